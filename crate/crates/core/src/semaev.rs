//! Semaev summation polynomials for `y^2 + xy = x^3 + a x^2 + b`.
//!
//! `S_3(x1, x2, x3) = (x1 x2 + x1 x3 + x2 x3)^2 + x1 x2 x3 + b` and for
//! `i >= 4` the polynomials are obtained by resultants,
//! `S_i = Res_X(S_{i-j}(x_1..x_{i-j-1}, X), S_{j+2}(x_{i-j}..x_i, X))`.

use std::fmt;

use crate::curve::CurveParams;
use crate::gf2n::FieldElement;
use crate::mvpoly::{MvPoly, PolyError};

/// The two evaluation classes: all variables free (`S_{m,1}`), or the last
/// variable fixed to the target x-coordinate (`S_{m,2}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemaevKind {
    Full,
    LastEvaluated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SemaevClass {
    kind: SemaevKind,
    m: usize,
    evaluated_at: Option<FieldElement>,
}

impl SemaevClass {
    pub fn full(m: usize) -> Self {
        Self { kind: SemaevKind::Full, m, evaluated_at: None }
    }

    pub fn last_evaluated(m: usize, x_r: FieldElement) -> Self {
        Self { kind: SemaevKind::LastEvaluated, m, evaluated_at: Some(x_r) }
    }

    pub fn kind(&self) -> SemaevKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn evaluated_at(&self) -> Option<FieldElement> {
        self.evaluated_at
    }

    /// `S_{m,1}` / `S_{m,2}` style label.
    pub fn label(&self) -> String {
        match self.kind {
            SemaevKind::Full => format!("S{},1", self.m),
            SemaevKind::LastEvaluated => format!("S{},2", self.m),
        }
    }
}

impl fmt::Display for SemaevClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// The third Semaev polynomial in the given variables.
pub fn s3(curve: &CurveParams, v1: &str, v2: &str, v3: &str) -> Result<MvPoly, PolyError> {
    let k = curve.field();
    let vars = [v1, v2, v3];
    let x1 = MvPoly::var(k, &vars, v1)?;
    let x2 = MvPoly::var(k, &vars, v2)?;
    let x3 = MvPoly::var(k, &vars, v3)?;
    let pair_sum = x1.mul(&x2)?.add(&x1.mul(&x3)?)?.add(&x2.mul(&x3)?)?;
    pair_sum.pow(2)?.add(&x1.mul(&x2)?.mul(&x3)?)?.add(&MvPoly::constant(k, &vars, curve.b())?)
}

/// Resultant with respect to `x` via the Sylvester matrix.
///
/// The determinant is expanded row by row with memoisation over the set of
/// used columns; in characteristic 2 the permutation signs vanish.
pub fn resultant(p: &MvPoly, q: &MvPoly, x: &str) -> Result<MvPoly, PolyError> {
    let absent = || PolyError::VariableAbsent(x.to_string());
    if p.degree_in(x).unwrap_or(0) == 0 || q.degree_in(x).unwrap_or(0) == 0 {
        return Err(absent());
    }
    let pc = p.coefficients_in(x)?;
    let qc = q.coefficients_in(x)?;
    let (dp, dq) = (pc.len() - 1, qc.len() - 1);
    let size = dp + dq;

    // common variable list for all entries
    let mut rest: Vec<String> = pc[0].vars().to_vec();
    for v in qc[0].vars() {
        if !rest.contains(v) {
            rest.push(v.clone());
        }
    }
    let names: Vec<&str> = rest.iter().map(|s| s.as_str()).collect();
    let zero = MvPoly::zero(p.context(), &names)?;
    let lift = |c: &MvPoly| zero.add(c);

    // rows: dq shifted copies of p (highest coefficient first), then dp of q
    let mut matrix: Vec<Vec<Option<MvPoly>>> = vec![vec![None; size]; size];
    for r in 0..dq {
        for k in 0..=dp {
            let c = &pc[dp - k];
            if !c.is_zero() {
                matrix[r][r + k] = Some(lift(c)?);
            }
        }
    }
    for r in 0..dp {
        for k in 0..=dq {
            let c = &qc[dq - k];
            if !c.is_zero() {
                matrix[dq + r][r + k] = Some(lift(c)?);
            }
        }
    }

    let mut layer: std::collections::HashMap<u32, MvPoly> = std::collections::HashMap::new();
    layer.insert(0, MvPoly::constant(p.context(), &names, p.context().one())?);
    for row in matrix.iter() {
        let mut next: std::collections::HashMap<u32, MvPoly> = std::collections::HashMap::new();
        for (mask, acc) in &layer {
            for (col, entry) in row.iter().enumerate() {
                if mask >> col & 1 == 1 {
                    continue;
                }
                if let Some(e) = entry {
                    let term = acc.mul(e)?;
                    let key = mask | 1 << col;
                    match next.get_mut(&key) {
                        Some(slot) => *slot = slot.add(&term)?,
                        None => {
                            next.insert(key, term);
                        }
                    }
                }
            }
        }
        next.retain(|_, v| !v.is_zero());
        layer = next;
    }
    let full = if size == 32 { u32::MAX } else { (1u32 << size) - 1 };
    Ok(layer.remove(&full).unwrap_or(zero))
}

/// `S_i` in the given variables, built with the split parameter `j`
/// (`1 <= j <= i - 3`). Supported for `3 <= i <= 6`.
pub fn semaev_poly_split(curve: &CurveParams, vars: &[&str], j: usize) -> Result<MvPoly, PolyError> {
    let i = vars.len();
    if !(3..=6).contains(&i) {
        return Err(PolyError::Unsupported(i));
    }
    for (k, v) in vars.iter().enumerate() {
        if vars[..k].contains(v) {
            return Err(PolyError::DuplicateVariable(v.to_string()));
        }
    }
    if i == 3 {
        return s3(curve, vars[0], vars[1], vars[2]);
    }
    if j < 1 || j > i - 3 {
        return Err(PolyError::Unsupported(i));
    }
    let x = format!("_X{i}");
    let mut left: Vec<&str> = vars[..i - j - 1].to_vec();
    left.push(&x);
    let mut right: Vec<&str> = vars[i - j - 1..].to_vec();
    right.push(&x);
    let p = semaev_poly(curve, &left)?;
    let q = semaev_poly(curve, &right)?;
    resultant(&p, &q, &x)
}

/// `S_i` with the default split: `j = 1` for `i <= 5`, `j = 2` for `i = 6`.
pub fn semaev_poly(curve: &CurveParams, vars: &[&str]) -> Result<MvPoly, PolyError> {
    let j = if vars.len() == 6 { 2 } else { 1 };
    semaev_poly_split(curve, vars, j)
}

/// `S_i(x_1, .., x_{i-1}, x_R)` built by fixing `x_R` in the right-hand
/// factor before taking the resultant. Equal to `evaluate_last(S_i, x_R)`
/// (specialisation commutes with the resultant since the degree in `X` is
/// unchanged by fixing `x_R`), but much cheaper for `i = 6`.
pub fn semaev_last_evaluated(curve: &CurveParams, vars: &[&str], x_r: FieldElement) -> Result<MvPoly, PolyError> {
    let i = vars.len() + 1;
    if !(3..=6).contains(&i) {
        return Err(PolyError::Unsupported(i));
    }
    if i <= 4 {
        let mut all = vars.to_vec();
        all.push("_xR");
        return evaluate_last(&semaev_poly(curve, &all)?, x_r);
    }
    let j = if i == 6 { 2 } else { 1 };
    let x = format!("_X{i}");
    let mut left: Vec<&str> = vars[..i - j - 1].to_vec();
    left.push(&x);
    let mut right: Vec<&str> = vars[i - j - 1..].to_vec();
    right.push("_xR");
    right.push(&x);
    let p = semaev_poly(curve, &left)?;
    let q = semaev_poly(curve, &right)?.substitute("_xR", x_r)?;
    resultant(&p, &q, &x)
}

/// Fixes the last variable to `x_R`, producing the `S_{m,2}` class.
pub fn evaluate_last(p: &MvPoly, x_r: FieldElement) -> Result<MvPoly, PolyError> {
    let last = p.vars().last().ok_or_else(|| PolyError::VariableAbsent("<last>".into()))?.clone();
    p.substitute(&last, x_r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Point;
    use crate::gf2n::FieldContext;

    fn curve(n: u32, seed: u64) -> CurveParams {
        CurveParams::random(FieldContext::new(n, None).unwrap(), seed)
    }

    fn mono(parts: &[(&str, u16)]) -> Vec<(String, u16)> {
        let mut v: Vec<(String, u16)> = parts.iter().map(|(s, k)| (s.to_string(), *k)).collect();
        v.sort();
        v
    }

    #[test]
    fn s3_shape() {
        let e = curve(7, 1);
        let p = s3(&e, "x1", "x2", "x12").unwrap();
        let k = e.field();
        assert_eq!(p.evaluate(&[k.zero(), k.zero(), k.zero()]).unwrap(), e.b());
        let expected: std::collections::BTreeSet<_> = [
            mono(&[]),
            mono(&[("x1", 2), ("x2", 2)]),
            mono(&[("x1", 2), ("x12", 2)]),
            mono(&[("x2", 2), ("x12", 2)]),
            mono(&[("x1", 1), ("x2", 1), ("x12", 1)]),
        ]
        .into_iter()
        .collect();
        assert_eq!(p.support(), expected);
        assert!(matches!(s3(&e, "x", "x", "y"), Err(PolyError::DuplicateVariable(_))));
    }

    #[test]
    fn s3_vanishes_on_sums() {
        let e = curve(11, 2);
        let p = s3(&e, "a", "b", "c").unwrap();
        for seed in 0..100 {
            let (pp, qq) = (e.random_point(2 * seed), e.random_point(2 * seed + 1));
            let r = e.add_unchecked(&pp, &qq);
            if let (Some(x1), Some(x2), Some(x3)) = (pp.x(), qq.x(), r.x()) {
                assert!(p.evaluate(&[x1, x2, x3]).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn small_resultants() {
        let k = FieldContext::new(5, None).unwrap();
        let vars = ["X", "u", "v"];
        let x = MvPoly::var(k, &vars, "X").unwrap();
        let u = MvPoly::var(k, &vars, "u").unwrap();
        let v = MvPoly::var(k, &vars, "v").unwrap();
        let r = resultant(&x.add(&u).unwrap(), &x.add(&v).unwrap(), "X").unwrap();
        assert_eq!(r, u.add(&v).unwrap());
        let r2 = resultant(&x.pow(2).unwrap().add(&u).unwrap(), &x.add(&v).unwrap(), "X").unwrap();
        assert_eq!(r2, v.pow(2).unwrap().add(&u).unwrap());
        assert!(matches!(resultant(&u, &x, "X"), Err(PolyError::VariableAbsent(_))));
    }

    #[test]
    fn s4_degrees_and_vanishing() {
        let e = curve(11, 3);
        let s4 = semaev_poly(&e, &["x1", "x2", "x3", "x4"]).unwrap();
        for v in ["x1", "x2", "x3", "x4"] {
            assert_eq!(s4.degree_in(v), Some(4));
        }
        let mut checked = 0;
        for seed in 0..100u64 {
            let p = e.random_point(3 * seed);
            let q = e.random_point(3 * seed + 1);
            let t = e.random_point(3 * seed + 2);
            let s = e.add_unchecked(&e.add_unchecked(&p, &q), &t);
            if let Point::Affine { x: xs, .. } = s {
                let v = [p.x().unwrap(), q.x().unwrap(), t.x().unwrap(), xs];
                assert!(s4.evaluate(&v).unwrap().is_zero());
                checked += 1;
            }
        }
        assert!(checked > 90);
    }

    #[test]
    fn s4_has_no_all_cubes_monomial() {
        // Over Z the coefficient of (x1 x2 x3 x4)^3 in the resultant is 24,
        // so it vanishes in characteristic 2 and the largest odd-exponent
        // pattern is (3, 3, 3, 1) up to symmetry.
        let e = curve(13, 4);
        let s4 = semaev_poly(&e, &["x1", "x2", "x3", "x4"]).unwrap();
        assert_eq!(s4.num_terms(), 24);
        assert!(s4.coefficient(&[3, 3, 3, 3]).is_zero());
        let odd_weight = |t: &Vec<u16>| t.iter().map(|k| k.count_ones()).sum::<u32>();
        let max = s4.sorted_terms().iter().map(|(t, _)| odd_weight(t)).max();
        assert_eq!(max, Some(7));
        assert!(!s4.coefficient(&[3, 3, 3, 1]).is_zero());
    }

    #[test]
    fn s5_degree() {
        let e = curve(7, 4);
        let s5 = semaev_poly(&e, &["x1", "x2", "x3", "x4", "x5"]).unwrap();
        for v in ["x1", "x2", "x3", "x4", "x5"] {
            assert_eq!(s5.degree_in(v), Some(8));
        }
        // the j = 2 construction has the same vanishing locus
        let alt = semaev_poly_split(&e, &["x1", "x2", "x3", "x4", "x5"], 2).unwrap();
        let k = e.field();
        for seed in 0..50 {
            let vals: Vec<_> = (0..5).map(|i| k.random_element(seed * 5 + i)).collect();
            let a = s5.evaluate(&vals).unwrap().is_zero();
            let b = alt.evaluate(&vals).unwrap().is_zero();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn s4_symmetric_vanishing_locus() {
        let e = curve(7, 8);
        let s4 = semaev_poly(&e, &["x1", "x2", "x3", "x4"]).unwrap();
        let k = e.field();
        for seed in 0..1000u64 {
            let v: Vec<_> = (0..4).map(|i| k.random_element(seed * 4 + i)).collect();
            let base = s4.evaluate(&v).unwrap().is_zero();
            let perm = [v[2], v[0], v[1], v[3]];
            assert_eq!(base, s4.evaluate(&perm).unwrap().is_zero());
        }
    }

    #[test]
    fn last_evaluated_class() {
        let e = curve(7, 5);
        let k = e.field();
        let xr = k.random_element(9);
        let p = evaluate_last(&s3(&e, "x3", "x12", "xR").unwrap(), xr).unwrap();
        let expected: std::collections::BTreeSet<_> = [
            mono(&[]),
            mono(&[("x3", 2), ("x12", 2)]),
            mono(&[("x3", 2)]),
            mono(&[("x12", 2)]),
            mono(&[("x3", 1), ("x12", 1)]),
        ]
        .into_iter()
        .collect();
        assert_eq!(p.support(), expected);
        let z = evaluate_last(&s3(&e, "a", "b", "c").unwrap(), k.zero()).unwrap();
        assert_eq!(z, s3(&e, "a", "b", "c").unwrap().substitute("c", k.zero()).unwrap());
        let cls = SemaevClass::last_evaluated(3, xr);
        assert_eq!(cls.label(), "S3,2");
        assert_eq!(cls.evaluated_at(), Some(xr));
        assert_eq!(SemaevClass::full(4).evaluated_at(), None);
    }

    #[test]
    fn specialised_route_matches_full_polynomial() {
        let e = curve(5, 6);
        let k = e.field();
        let xr = k.random_element(3);
        let full = semaev_poly(&e, &["x1", "x2", "x3", "x4", "xR"]).unwrap();
        let a = evaluate_last(&full, xr).unwrap();
        let b = semaev_last_evaluated(&e, &["x1", "x2", "x3", "x4"], xr).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multiplier_support_is_exact_ring_product() {
        let e = curve(7, 7);
        let p = s3(&e, "x1", "x2", "x12").unwrap();
        let q = p.mul_by_monomial(&[("x1", 1)]).unwrap();
        let expected: std::collections::BTreeSet<_> = [
            mono(&[("x1", 1)]),
            mono(&[("x1", 3), ("x2", 2)]),
            mono(&[("x1", 3), ("x12", 2)]),
            mono(&[("x1", 1), ("x2", 2), ("x12", 2)]),
            mono(&[("x1", 2), ("x2", 1), ("x12", 1)]),
        ]
        .into_iter()
        .collect();
        assert_eq!(q.support(), expected);
    }

    #[test]
    fn unsupported_orders() {
        let e = curve(5, 1);
        assert!(matches!(semaev_poly(&e, &["a", "b", "c", "d", "e", "f", "g"]), Err(PolyError::Unsupported(7))));
    }
}
