//! Weil descent from `F_{2^n}` to the boolean ring, and factor bases.
//!
//! A field variable `x` registered as a block of dimension `d` becomes
//! `x = sum_{j<d} x_j s^j` with boolean `x_j`. Field arithmetic on such
//! symbolic elements is carried out coordinate-wise on vectors of
//! [`BoolPoly`], reducing powers `s^n .. s^{2n-2}` with precomputed rows.

use std::collections::HashMap;

use thiserror::Error;

use crate::boolring::{canonicalize, Assignment, BoolError, BoolMonomial, BoolPoly, VarUniverse};
use crate::curve::{CurveError, CurveParams, Point};
use crate::gf2n::{FieldContext, FieldElement};
use crate::mvpoly::MvPoly;
use crate::par::Exec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DescentError {
    #[error("unknown block {0:?}")]
    UnknownBlock(String),
    #[error("variable {0:?} has no registered block")]
    UnregisteredVariable(String),
    #[error("block {name:?} has dimension {dim} > n = {n}")]
    BlockTooWide { name: String, dim: usize, n: usize },
    #[error("factor base dimension {n_prime} outside 1..={n}")]
    BadDimension { n_prime: usize, n: usize },
    #[error(transparent)]
    Bool(#[from] BoolError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// A field element whose `n` polynomial-basis coordinates are boolean
/// polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicFieldElement {
    coords: Vec<BoolPoly>,
}

impl SymbolicFieldElement {
    /// Coordinate `k` is the coefficient of `s^k`.
    pub fn coords(&self) -> &[BoolPoly] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<BoolPoly> {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn degree(&self) -> Option<u32> {
        self.coords.iter().filter_map(|c| c.degree()).max()
    }

    pub fn evaluate(&self, ctx: FieldContext, a: &Assignment) -> FieldElement {
        let bits = self.coords.iter().enumerate().fold(0u64, |acc, (k, c)| acc | (c.evaluate(a) as u64) << k);
        ctx.element_truncated(bits)
    }
}

/// Symbolic arithmetic for one field and one variable universe.
#[derive(Debug, Clone)]
pub struct Descender {
    ctx: FieldContext,
    universe: VarUniverse,
    /// `reduction[t]` holds the bits of `s^{n+t} mod f`.
    reduction: Vec<u64>,
}

impl Descender {
    pub fn new(ctx: FieldContext, universe: VarUniverse) -> Result<Self, DescentError> {
        let n = ctx.degree() as usize;
        for b in universe.blocks() {
            if b.dim > n {
                return Err(DescentError::BlockTooWide { name: b.name.clone(), dim: b.dim, n });
            }
        }
        let s = ctx.gen();
        let reduction = (0..n.saturating_sub(1)).map(|t| s.pow((n + t) as u128).bits()).collect();
        Ok(Self { ctx, universe, reduction })
    }

    pub fn context(&self) -> FieldContext {
        self.ctx
    }

    pub fn universe(&self) -> &VarUniverse {
        &self.universe
    }

    fn n(&self) -> usize {
        self.ctx.degree() as usize
    }

    fn nvars(&self) -> usize {
        self.universe.nvars()
    }

    pub fn zero(&self) -> SymbolicFieldElement {
        SymbolicFieldElement { coords: vec![BoolPoly::zero(self.nvars()); self.n()] }
    }

    pub fn embed_constant(&self, c: FieldElement) -> SymbolicFieldElement {
        let coords = (0..self.n()).map(|k| BoolPoly::constant(self.nvars(), c.coeff(k as u32))).collect();
        SymbolicFieldElement { coords }
    }

    pub fn symbolic_var(&self, block: &str) -> Result<SymbolicFieldElement, DescentError> {
        let b = self.universe.block(block).ok_or_else(|| DescentError::UnknownBlock(block.to_string()))?;
        let coords = (0..self.n())
            .map(|k| if k < b.dim { BoolPoly::var(self.nvars(), b.offset + k) } else { BoolPoly::zero(self.nvars()) })
            .collect();
        Ok(SymbolicFieldElement { coords })
    }

    fn check(&self, a: &SymbolicFieldElement) -> Result<(), DescentError> {
        let got = a.coords.first().map_or(self.nvars(), |c| c.nvars());
        if got != self.nvars() || a.coords.len() != self.n() {
            return Err(BoolError::UniverseMismatch(self.nvars(), got).into());
        }
        Ok(())
    }

    pub fn sym_add(
        &self,
        a: &SymbolicFieldElement,
        b: &SymbolicFieldElement,
    ) -> Result<SymbolicFieldElement, DescentError> {
        self.check(a)?;
        self.check(b)?;
        let coords = a.coords.iter().zip(&b.coords).map(|(x, y)| x.add_unchecked(y)).collect();
        Ok(SymbolicFieldElement { coords })
    }

    pub fn sym_mul(
        &self,
        a: &SymbolicFieldElement,
        b: &SymbolicFieldElement,
    ) -> Result<SymbolicFieldElement, DescentError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    pub fn sym_square(&self, a: &SymbolicFieldElement) -> Result<SymbolicFieldElement, DescentError> {
        self.check(a)?;
        Ok(self.square_unchecked(a))
    }

    /// Folds buckets for `s^0 .. s^{2n-2}` into `n` canonical coordinates.
    fn reduce(&self, mut buckets: Vec<Vec<BoolMonomial>>) -> SymbolicFieldElement {
        let n = self.n();
        for k in (n..buckets.len()).rev() {
            let mut high = std::mem::take(&mut buckets[k]);
            canonicalize(&mut high);
            if high.is_empty() {
                continue;
            }
            let row = self.reduction[k - n];
            for (t, bucket) in buckets.iter_mut().enumerate().take(n) {
                if row >> t & 1 == 1 {
                    bucket.extend_from_slice(&high);
                }
            }
        }
        buckets.truncate(n);
        let nv = self.nvars();
        let coords = buckets
            .into_iter()
            .map(|mut t| {
                canonicalize(&mut t);
                BoolPoly::from_sorted_unchecked(nv, t)
            })
            .collect();
        SymbolicFieldElement { coords }
    }

    fn mul_unchecked(&self, a: &SymbolicFieldElement, b: &SymbolicFieldElement) -> SymbolicFieldElement {
        let n = self.n();
        let mut buckets: Vec<Vec<BoolMonomial>> = vec![Vec::new(); 2 * n - 1];
        for (i, ai) in a.coords.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.coords.iter().enumerate() {
                for x in ai.terms() {
                    for y in bj.terms() {
                        buckets[i + j].push(x.mul(y));
                    }
                }
            }
        }
        self.reduce(buckets)
    }

    // Squaring is linear in characteristic 2 and x_j^2 = x_j.
    fn square_unchecked(&self, a: &SymbolicFieldElement) -> SymbolicFieldElement {
        let n = self.n();
        let mut buckets: Vec<Vec<BoolMonomial>> = vec![Vec::new(); 2 * n - 1];
        for (i, ai) in a.coords.iter().enumerate() {
            buckets[2 * i].extend_from_slice(ai.terms());
        }
        self.reduce(buckets)
    }

    fn scale_unchecked(&self, c: FieldElement, a: &SymbolicFieldElement) -> SymbolicFieldElement {
        if c.is_one() {
            return a.clone();
        }
        let n = self.n();
        let mut buckets: Vec<Vec<BoolMonomial>> = vec![Vec::new(); 2 * n - 1];
        for j in (0..n).filter(|&j| c.coeff(j as u32)) {
            for (i, ai) in a.coords.iter().enumerate() {
                buckets[i + j].extend_from_slice(ai.terms());
            }
        }
        self.reduce(buckets)
    }

    /// Descends one field polynomial to its `n` coordinate polynomials.
    pub fn descend_poly(&self, p: &MvPoly) -> Result<SymbolicFieldElement, DescentError> {
        let mut bases = Vec::with_capacity(p.vars().len());
        for v in p.vars() {
            if self.universe.block(v).is_none() {
                return Err(DescentError::UnregisteredVariable(v.clone()));
            }
            bases.push(self.symbolic_var(v)?);
        }
        let mut powers: HashMap<(usize, u16), SymbolicFieldElement> = HashMap::new();
        let n = self.n();
        let mut buckets: Vec<Vec<BoolMonomial>> = vec![Vec::new(); n];
        for (e, c) in p.sorted_terms() {
            let mut acc: Option<SymbolicFieldElement> = None;
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let pw = self.power(&bases[i], i, k, &mut powers);
                acc = Some(match acc {
                    None => pw,
                    Some(x) => self.mul_unchecked(&x, &pw),
                });
            }
            let term = match acc {
                None => self.embed_constant(c),
                Some(x) => self.scale_unchecked(c, &x),
            };
            for (bucket, coord) in buckets.iter_mut().zip(term.coords) {
                bucket.extend(coord.into_terms());
            }
        }
        Ok(self.reduce(buckets))
    }

    fn power(
        &self,
        base: &SymbolicFieldElement,
        var: usize,
        k: u16,
        memo: &mut HashMap<(usize, u16), SymbolicFieldElement>,
    ) -> SymbolicFieldElement {
        if k == 1 {
            return base.clone();
        }
        if let Some(p) = memo.get(&(var, k)) {
            return p.clone();
        }
        let r = if k.is_multiple_of(2) {
            let h = self.power(base, var, k / 2, memo);
            self.square_unchecked(&h)
        } else {
            let h = self.power(base, var, k - 1, memo);
            self.mul_unchecked(&h, base)
        };
        memo.insert((var, k), r.clone());
        r
    }

    /// Descends labelled field equations; each contributes exactly `n`
    /// boolean equations, zero ones included.
    pub fn descend(&self, equations: &[(String, MvPoly)], exec: Exec) -> Result<BoolSystem, DescentError> {
        let results = exec.map(equations, |(_, p)| self.descend_poly(p));
        let mut sys = BoolSystem { universe: self.universe.clone(), equations: Vec::new(), groups: Vec::new() };
        for ((label, _), r) in equations.iter().zip(results) {
            let start = sys.equations.len();
            sys.equations.extend(r?.into_coords());
            sys.groups.push(EquationGroup { label: label.clone(), start, len: self.n() });
        }
        Ok(sys)
    }

    /// The field value of a block under an assignment.
    pub fn block_value(&self, block: &str, a: &Assignment) -> Result<FieldElement, DescentError> {
        let b = self.universe.block(block).ok_or_else(|| DescentError::UnknownBlock(block.to_string()))?;
        Ok(self.ctx.element_truncated(a.extract(b.offset, b.dim)))
    }
}

/// The boolean equations descended from one field equation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationGroup {
    pub label: String,
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolSystem {
    universe: VarUniverse,
    equations: Vec<BoolPoly>,
    groups: Vec<EquationGroup>,
}

impl BoolSystem {
    /// A system with a single group holding all equations.
    pub fn new(universe: VarUniverse, equations: Vec<BoolPoly>) -> Result<Self, BoolError> {
        let n = universe.nvars();
        if let Some(p) = equations.iter().find(|p| p.nvars() != n) {
            return Err(BoolError::UniverseMismatch(n, p.nvars()));
        }
        let groups = vec![EquationGroup { label: "all".to_string(), start: 0, len: equations.len() }];
        Ok(Self { universe, equations, groups })
    }

    /// A system whose groups must tile `equations` in order.
    pub fn with_groups(
        universe: VarUniverse,
        equations: Vec<BoolPoly>,
        groups: Vec<EquationGroup>,
    ) -> Result<Self, BoolError> {
        let mut sys = Self::new(universe, equations)?;
        let mut next = 0;
        for g in &groups {
            if g.start != next {
                return Err(BoolError::Parse(format!("group {} does not start at {next}", g.label)));
            }
            next += g.len;
        }
        if next != sys.equations.len() {
            return Err(BoolError::Parse(format!("groups cover {next} of {} equations", sys.equations.len())));
        }
        sys.groups = groups;
        Ok(sys)
    }

    pub fn universe(&self) -> &VarUniverse {
        &self.universe
    }

    pub fn nvars(&self) -> usize {
        self.universe.nvars()
    }

    pub fn equations(&self) -> &[BoolPoly] {
        &self.equations
    }

    pub fn groups(&self) -> &[EquationGroup] {
        &self.groups
    }

    pub fn group_equations(&self, g: &EquationGroup) -> &[BoolPoly] {
        &self.equations[g.start..g.start + g.len]
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.equations.iter().filter_map(|p| p.degree()).max()
    }

    pub fn is_satisfied_by(&self, a: &Assignment) -> bool {
        self.equations.iter().all(|p| !p.evaluate(a))
    }

    /// ANF text: block header, then per group a `#group` line followed by
    /// one equation per line.
    pub fn to_anf(&self) -> String {
        let mut s = self.universe.header();
        for g in &self.groups {
            s.push_str(&format!("#group {} len={}\n", g.label, g.len));
            for p in self.group_equations(g) {
                s.push_str(&p.to_anf(&self.universe));
                s.push('\n');
            }
        }
        s
    }

    pub fn parse_anf(text: &str) -> Result<Self, BoolError> {
        let universe = VarUniverse::parse_header(text)?;
        let mut equations = Vec::new();
        let mut groups: Vec<EquationGroup> = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix("#group ") {
                let label = rest.split_whitespace().next().unwrap_or("").to_string();
                groups.push(EquationGroup { label, start: equations.len(), len: 0 });
            } else if !line.starts_with('#') {
                equations.push(BoolPoly::parse_anf(line, &universe)?);
                match groups.last_mut() {
                    Some(g) => g.len += 1,
                    None => groups.push(EquationGroup { label: "all".to_string(), start: 0, len: 1 }),
                }
            }
        }
        Ok(Self { universe, equations, groups })
    }
}

/// Points whose x-coordinate lies in `V = span{1, s, .., s^{n'-1}}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorBase {
    n_prime: usize,
    members: Vec<Point>,
}

impl FactorBase {
    pub fn dim(&self) -> usize {
        self.n_prime
    }

    pub fn members(&self) -> &[Point] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains_x(&self, x: FieldElement) -> bool {
        x.bits() >> self.n_prime == 0
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x().is_some_and(|x| self.contains_x(x))
    }
}

pub fn build_factor_base(curve: &CurveParams, n_prime: usize) -> Result<FactorBase, DescentError> {
    let ctx = curve.field();
    let n = ctx.degree() as usize;
    if n_prime == 0 || n_prime > n {
        return Err(DescentError::BadDimension { n_prime, n });
    }
    let solver = ctx.artin_schreier();
    let mut members = Vec::new();
    for bits in 0..(1u64 << n_prime) {
        members.extend(curve.lift_x_linear(ctx.element_truncated(bits), &solver));
    }
    Ok(FactorBase { n_prime, members })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semaev::{s3, semaev_last_evaluated, semaev_poly};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn universe(blocks: &[(&str, usize)]) -> VarUniverse {
        let mut u = VarUniverse::new();
        for (name, dim) in blocks {
            u.add_block(name, *dim).unwrap();
        }
        u
    }

    fn random_assignment(rng: &mut ChaCha8Rng, n: usize) -> Assignment {
        let bits: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        Assignment::from_bits(&bits)
    }

    #[test]
    fn square_in_f4() {
        let ctx = FieldContext::new(2, Some(0b111)).unwrap();
        let d = Descender::new(ctx, universe(&[("x", 2)])).unwrap();
        let x = d.symbolic_var("x").unwrap();
        let s = d.sym_add(&d.sym_square(&x).unwrap(), &x).unwrap();
        assert!(s.coords()[0] == BoolPoly::var(2, 1));
        assert!(s.coords()[1].is_zero());
    }

    #[test]
    fn symbolic_var_dimensions() {
        let ctx = FieldContext::new(7, None).unwrap();
        let d = Descender::new(ctx, universe(&[("x1", 3), ("x12", 7)])).unwrap();
        let x1 = d.symbolic_var("x1").unwrap();
        assert_eq!(x1.coords().iter().filter(|c| !c.is_zero()).count(), 3);
        let x12 = d.symbolic_var("x12").unwrap();
        assert_eq!(x12.coords().iter().filter(|c| !c.is_zero()).count(), 7);
        assert_eq!(d.symbolic_var("x9").unwrap_err(), DescentError::UnknownBlock("x9".into()));
        let b = ctx.element(0b1011001).unwrap();
        let e = d.embed_constant(b);
        assert!(e.coords().iter().all(|c| c.degree().unwrap_or(0) == 0));
        assert_eq!(e.evaluate(ctx, &Assignment::default()), b);
    }

    #[test]
    fn arithmetic_matches_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [5u32, 8, 13] {
            let ctx = FieldContext::new(n, None).unwrap();
            let u = universe(&[("x", n as usize), ("y", 3)]);
            let d = Descender::new(ctx, u.clone()).unwrap();
            let x = d.symbolic_var("x").unwrap();
            let y = d.symbolic_var("y").unwrap();
            let c = ctx.sample(&mut rng);
            let xy = d.sym_mul(&x, &y).unwrap();
            let x2 = d.sym_square(&x).unwrap();
            let cx = d.sym_mul(&d.embed_constant(c), &x).unwrap();
            for _ in 0..200 {
                let a = random_assignment(&mut rng, u.nvars());
                let xv = d.block_value("x", &a).unwrap();
                let yv = d.block_value("y", &a).unwrap();
                assert_eq!(xy.evaluate(ctx, &a), xv * yv);
                assert_eq!(x2.evaluate(ctx, &a), xv.square());
                assert_eq!(cx.evaluate(ctx, &a), c * xv);
            }
        }
    }

    #[test]
    fn unregistered_variable() {
        let ctx = FieldContext::new(5, None).unwrap();
        let curve = CurveParams::random(ctx, 1);
        let d = Descender::new(ctx, universe(&[("x1", 2), ("x2", 2)])).unwrap();
        let p = s3(&curve, "x1", "x2", "x12").unwrap();
        let err = d.descend(&[("e".into(), p)], Exec::Sequential).unwrap_err();
        assert_eq!(err, DescentError::UnregisteredVariable("x12".into()));
    }

    #[test]
    fn descent_of_s3_is_sound() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ctx = FieldContext::new(9, None).unwrap();
        let curve = CurveParams::random(ctx, 2);
        let u = universe(&[("x1", 3), ("x2", 3), ("x12", 9)]);
        let d = Descender::new(ctx, u.clone()).unwrap();
        let p = s3(&curve, "x1", "x2", "x12").unwrap();
        let sys = d.descend(&[("S3,1".into(), p.clone())], Exec::Sequential).unwrap();
        assert_eq!(sys.equations().len(), 9);
        assert_eq!(sys.max_degree(), Some(3));
        for _ in 0..300 {
            let a = random_assignment(&mut rng, u.nvars());
            let vals: Vec<FieldElement> = ["x1", "x2", "x12"].iter().map(|b| d.block_value(b, &a).unwrap()).collect();
            let f = p.evaluate(&vals).unwrap();
            for (k, eq) in sys.equations().iter().enumerate() {
                assert_eq!(eq.evaluate(&a), f.coeff(k as u32));
            }
        }
    }

    #[test]
    fn degree_table() {
        let ctx = FieldContext::new(13, None).unwrap();
        let curve = CurveParams::random(ctx, 4);
        let xr = ctx.random_element(5);
        let u = universe(&[("x1", 3), ("x2", 3), ("x3", 3), ("x4", 3), ("x12", 13), ("x123", 13)]);
        let d = Descender::new(ctx, u).unwrap();
        let deg = |p: &MvPoly| d.descend_poly(p).unwrap().degree();
        assert_eq!(deg(&s3(&curve, "x1", "x2", "x12").unwrap()), Some(3));
        assert_eq!(deg(&semaev_last_evaluated(&curve, &["x3", "x12"], xr).unwrap()), Some(2));
        assert_eq!(deg(&semaev_last_evaluated(&curve, &["x3", "x4", "x12"], xr).unwrap()), Some(6));
        // (x1 x2 x3 x123)^3 has an even coefficient in S_4, so 7 rather than 8
        assert_eq!(deg(&semaev_poly(&curve, &["x1", "x2", "x3", "x123"]).unwrap()), Some(7));
    }

    #[test]
    fn anf_round_trip() {
        let ctx = FieldContext::new(7, None).unwrap();
        let curve = CurveParams::random(ctx, 6);
        let d = Descender::new(ctx, universe(&[("x1", 2), ("x2", 2), ("x12", 7)])).unwrap();
        let p = s3(&curve, "x1", "x2", "x12").unwrap();
        let sys = d.descend(&[("S3,1".into(), p)], Exec::Sequential).unwrap();
        let text = sys.to_anf();
        assert!(text.contains("#block x12 dim=7 offset=4"));
        assert_eq!(BoolSystem::parse_anf(&text).unwrap(), sys);
    }

    #[test]
    fn factor_base() {
        let ctx = FieldContext::new(11, None).unwrap();
        let curve = CurveParams::random(ctx, 8);
        for n_prime in [2usize, 3, 5] {
            let fb = build_factor_base(&curve, n_prime).unwrap();
            let target = 1usize << n_prime;
            assert!(fb.len() * 2 >= target && fb.len() <= 2 * target, "{} vs {}", fb.len(), target);
            for p in fb.members() {
                assert!(curve.is_on_curve(p));
                assert!(fb.contains(p));
                assert!(fb.members().contains(&p.neg()));
            }
        }
        let small = FieldContext::new(7, None).unwrap();
        let curve = CurveParams::random(small, 1);
        let all = build_factor_base(&curve, 7).unwrap();
        assert_eq!(all.len() + 1, curve.enumerate_points().unwrap().len());
        assert!(build_factor_base(&curve, 0).is_err());
    }
}
