//! Sparse multivariate polynomials over a binary field.
//!
//! Variables are named; operations on two polynomials align their variable
//! lists by name (the left operand's order first). Exponent vectors are
//! stored densely per term since these polynomials have at most a handful of
//! variables.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::gf2n::{FieldContext, FieldElement, FieldError};

pub type Exponents = Vec<u16>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("duplicate variable {0:?}")]
    DuplicateVariable(String),
    #[error("variable {0:?} does not occur with positive degree")]
    VariableAbsent(String),
    #[error("no value assigned to variable {0:?}")]
    UnassignedVariable(String),
    #[error("Semaev polynomial S_{0} is not supported")]
    Unsupported(usize),
    #[error("expected {expected} variables, got {got}")]
    Arity { expected: usize, got: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone)]
pub struct MvPoly {
    ctx: FieldContext,
    vars: Vec<String>,
    terms: HashMap<Exponents, FieldElement>,
}

/// Graded reverse lexicographic comparison of exponent vectors.
pub fn grevlex(a: &[u16], b: &[u16]) -> Ordering {
    let da: u32 = a.iter().map(|&e| e as u32).sum();
    let db: u32 = b.iter().map(|&e| e as u32).sum();
    da.cmp(&db).then_with(|| {
        for (x, y) in a.iter().zip(b).rev() {
            if x != y {
                return y.cmp(x);
            }
        }
        Ordering::Equal
    })
}

fn check_distinct(vars: &[String]) -> Result<(), PolyError> {
    for (i, v) in vars.iter().enumerate() {
        if vars[..i].contains(v) {
            return Err(PolyError::DuplicateVariable(v.clone()));
        }
    }
    Ok(())
}

impl MvPoly {
    pub fn zero(ctx: FieldContext, vars: &[&str]) -> Result<Self, PolyError> {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        check_distinct(&vars)?;
        Ok(Self { ctx, vars, terms: HashMap::new() })
    }

    pub fn constant(ctx: FieldContext, vars: &[&str], c: FieldElement) -> Result<Self, PolyError> {
        let mut p = Self::zero(ctx, vars)?;
        let nv = p.vars.len();
        p.add_term(vec![0; nv], c);
        Ok(p)
    }

    /// The polynomial consisting of the single variable `name`.
    pub fn var(ctx: FieldContext, vars: &[&str], name: &str) -> Result<Self, PolyError> {
        Self::monomial(ctx, vars, &[(name, 1)], ctx.one())
    }

    pub fn monomial(
        ctx: FieldContext,
        vars: &[&str],
        powers: &[(&str, u16)],
        c: FieldElement,
    ) -> Result<Self, PolyError> {
        let mut p = Self::zero(ctx, vars)?;
        let mut e = vec![0u16; p.vars.len()];
        for (name, k) in powers {
            let i = p.index_of(name).ok_or_else(|| PolyError::VariableAbsent(name.to_string()))?;
            e[i] += k;
        }
        p.add_term(e, c);
        Ok(p)
    }

    pub fn context(&self) -> FieldContext {
        self.ctx
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &FieldElement)> {
        self.terms.iter()
    }

    /// Terms in descending grevlex order.
    pub fn sorted_terms(&self) -> Vec<(Exponents, FieldElement)> {
        let mut v: Vec<_> = self.terms.iter().map(|(e, c)| (e.clone(), *c)).collect();
        v.sort_by(|a, b| grevlex(&b.0, &a.0));
        v
    }

    pub fn coefficient(&self, e: &[u16]) -> FieldElement {
        self.terms.get(e).copied().unwrap_or_else(|| self.ctx.zero())
    }

    fn add_term(&mut self, e: Exponents, c: FieldElement) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().map(|&k| k as u32).sum()).max()
    }

    pub fn degree_in(&self, name: &str) -> Option<u16> {
        let i = self.index_of(name)?;
        self.terms.keys().map(|e| e[i]).max()
    }

    /// Support as a set of `(variable, exponent)` lists, for comparisons
    /// independent of variable order.
    pub fn support(&self) -> std::collections::BTreeSet<Vec<(String, u16)>> {
        self.terms
            .keys()
            .map(|e| {
                let mut m: Vec<(String, u16)> =
                    self.vars.iter().zip(e).filter(|(_, &k)| k > 0).map(|(v, &k)| (v.clone(), k)).collect();
                m.sort();
                m
            })
            .collect()
    }

    /// Re-expresses `self` over `target` (which must contain all variables
    /// of `self` that occur).
    fn embed(&self, target: &[String]) -> Self {
        let map: Vec<usize> =
            self.vars.iter().map(|v| target.iter().position(|t| t == v).unwrap_or(usize::MAX)).collect();
        let mut out = Self { ctx: self.ctx, vars: target.to_vec(), terms: HashMap::with_capacity(self.terms.len()) };
        for (e, c) in &self.terms {
            let mut ne = vec![0u16; target.len()];
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    ne[map[i]] = k;
                }
            }
            out.terms.insert(ne, *c);
        }
        out
    }

    fn union_vars(&self, other: &Self) -> Vec<String> {
        let mut vars = self.vars.clone();
        for v in &other.vars {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
        vars
    }

    fn aligned(&self, other: &Self) -> Result<(Self, Self), PolyError> {
        if self.ctx != other.ctx {
            return Err(FieldError::ContextMismatch.into());
        }
        if self.vars == other.vars {
            return Ok((self.clone(), other.clone()));
        }
        let vars = self.union_vars(other);
        Ok((self.embed(&vars), other.embed(&vars)))
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        let (mut a, b) = self.aligned(other)?;
        for (e, c) in b.terms {
            a.add_term(e, c);
        }
        Ok(a)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        let (a, b) = self.aligned(other)?;
        let mut out = Self { ctx: a.ctx, vars: a.vars.clone(), terms: HashMap::new() };
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, *ca * *cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: FieldElement) -> Result<Self, PolyError> {
        if c.context() != self.ctx {
            return Err(FieldError::ContextMismatch.into());
        }
        let mut out = Self { ctx: self.ctx, vars: self.vars.clone(), terms: HashMap::new() };
        for (e, v) in &self.terms {
            out.add_term(e.clone(), *v * c);
        }
        Ok(out)
    }

    /// Multiplies by `prod name^k`.
    pub fn mul_by_monomial(&self, powers: &[(&str, u16)]) -> Result<Self, PolyError> {
        let names: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        let mut all = names.clone();
        for (n, _) in powers {
            if !all.contains(n) {
                all.push(n);
            }
        }
        let m = Self::monomial(self.ctx, &all, powers, self.ctx.one())?;
        self.mul(&m)
    }

    pub fn pow(&self, k: u32) -> Result<Self, PolyError> {
        let mut acc = Self::constant(self.ctx, &[], self.ctx.one())?.embed(&self.vars);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Full evaluation; `values` follow `self.vars()` order.
    pub fn evaluate(&self, values: &[FieldElement]) -> Result<FieldElement, PolyError> {
        if values.len() != self.vars.len() {
            return Err(PolyError::Arity { expected: self.vars.len(), got: values.len() });
        }
        for v in values {
            if v.context() != self.ctx {
                return Err(FieldError::ContextMismatch.into());
            }
        }
        let mut acc = self.ctx.zero();
        for (e, c) in &self.terms {
            let mut t = *c;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= values[i].pow(k as u128);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn evaluate_named(&self, assignment: &HashMap<String, FieldElement>) -> Result<FieldElement, PolyError> {
        let values = self
            .vars
            .iter()
            .map(|v| assignment.get(v).copied().ok_or_else(|| PolyError::UnassignedVariable(v.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        self.evaluate(&values)
    }

    /// Substitutes `name = value`; the variable is removed from the result.
    pub fn substitute(&self, name: &str, value: FieldElement) -> Result<Self, PolyError> {
        let i = self.index_of(name).ok_or_else(|| PolyError::VariableAbsent(name.to_string()))?;
        if value.context() != self.ctx {
            return Err(FieldError::ContextMismatch.into());
        }
        let mut vars = self.vars.clone();
        vars.remove(i);
        let mut out = Self { ctx: self.ctx, vars, terms: HashMap::new() };
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            let k = ne.remove(i);
            out.add_term(ne, *c * value.pow(k as u128));
        }
        Ok(out)
    }

    /// Coefficients of `self` as a univariate polynomial in `name`, index =
    /// power. The coefficients live over the remaining variables.
    pub fn coefficients_in(&self, name: &str) -> Result<Vec<MvPoly>, PolyError> {
        let i = self.index_of(name).ok_or_else(|| PolyError::VariableAbsent(name.to_string()))?;
        let deg = self.terms.keys().map(|e| e[i]).max().unwrap_or(0) as usize;
        let mut vars = self.vars.clone();
        vars.remove(i);
        let mut out = vec![Self { ctx: self.ctx, vars: vars.clone(), terms: HashMap::new() }; deg + 1];
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            let k = ne.remove(i) as usize;
            out[k].add_term(ne, *c);
        }
        Ok(out)
    }

    /// Drops variables that do not occur in any term.
    pub fn compact(&self) -> Self {
        let used: Vec<usize> = (0..self.vars.len()).filter(|&i| self.terms.keys().any(|e| e[i] > 0)).collect();
        let vars: Vec<String> = used.iter().map(|&i| self.vars[i].clone()).collect();
        let terms = self.terms.iter().map(|(e, c)| (used.iter().map(|&i| e[i]).collect(), *c)).collect();
        Self { ctx: self.ctx, vars, terms }
    }

    /// Renames variables position-wise.
    pub fn rename(&self, new_names: &[&str]) -> Result<Self, PolyError> {
        if new_names.len() != self.vars.len() {
            return Err(PolyError::Arity { expected: self.vars.len(), got: new_names.len() });
        }
        let vars: Vec<String> = new_names.iter().map(|s| s.to_string()).collect();
        check_distinct(&vars)?;
        Ok(Self { ctx: self.ctx, vars, terms: self.terms.clone() })
    }
}

impl PartialEq for MvPoly {
    /// Equality as polynomials; variable order does not matter.
    fn eq(&self, other: &Self) -> bool {
        match self.add(other) {
            Ok(d) => d.is_zero(),
            Err(_) => false,
        }
    }
}

impl fmt::Debug for MvPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for MvPoly {
    /// `coefHex*x1^e1*...` terms joined by `+`, descending grevlex.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let terms = self.sorted_terms();
        let mut first = true;
        for (e, c) in terms {
            if !first {
                f.write_str("+")?;
            }
            first = false;
            write!(f, "{}", c.to_hex())?;
            for (v, &k) in self.vars.iter().zip(&e) {
                match k {
                    0 => {}
                    1 => write!(f, "*{v}")?,
                    _ => write!(f, "*{v}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> FieldContext {
        FieldContext::new(7, None).unwrap()
    }

    #[test]
    fn ring_basics() {
        let k = ctx();
        let x = MvPoly::var(k, &["x", "y"], "x").unwrap();
        let y = MvPoly::var(k, &["x", "y"], "y").unwrap();
        let p = x.mul(&y).unwrap().add(&x).unwrap();
        assert!(p.add(&p).unwrap().is_zero());
        let one = MvPoly::constant(k, &[], k.one()).unwrap();
        assert_eq!(one.mul(&p).unwrap(), p);
        assert_eq!(p.total_degree(), Some(2));
        let sq = x.add(&y).unwrap().pow(2).unwrap();
        // char 2: (x + y)^2 = x^2 + y^2
        assert_eq!(sq.num_terms(), 2);
    }

    #[test]
    fn evaluation_and_substitution() {
        let k = ctx();
        let x = MvPoly::var(k, &["x", "y"], "x").unwrap();
        let y = MvPoly::var(k, &["x", "y"], "y").unwrap();
        let p = x.mul(&x).unwrap().mul(&y).unwrap().add(&MvPoly::constant(k, &[], k.gen()).unwrap()).unwrap();
        let (a, b) = (k.random_element(1), k.random_element(2));
        assert_eq!(p.evaluate(&[a, b]).unwrap(), a * a * b + k.gen());
        let q = p.substitute("x", a).unwrap();
        assert_eq!(q.vars(), &["y".to_string()]);
        assert_eq!(q.evaluate(&[b]).unwrap(), a * a * b + k.gen());
        let z = p.substitute("y", k.zero()).unwrap();
        assert_eq!(z.evaluate(&[a]).unwrap(), k.gen());
        let mut named = HashMap::new();
        named.insert("x".to_string(), a);
        assert_eq!(p.evaluate_named(&named), Err(PolyError::UnassignedVariable("y".into())));
    }

    #[test]
    fn duplicate_variables_rejected() {
        assert!(matches!(MvPoly::zero(ctx(), &["x", "x"]), Err(PolyError::DuplicateVariable(_))));
    }

    #[test]
    fn display_is_sorted_grevlex() {
        let k = ctx();
        let vars = ["x", "y"];
        let p = MvPoly::monomial(k, &vars, &[("x", 1)], k.one())
            .unwrap()
            .add(&MvPoly::monomial(k, &vars, &[("x", 1), ("y", 2)], k.gen()).unwrap())
            .unwrap()
            .add(&MvPoly::constant(k, &vars, k.one()).unwrap())
            .unwrap();
        assert_eq!(p.to_string(), "2*x*y^2+1*x+1");
    }

    #[test]
    fn grevlex_order() {
        assert_eq!(grevlex(&[1, 0, 0], &[0, 1, 0]), Ordering::Greater);
        assert_eq!(grevlex(&[1, 0, 1], &[0, 2, 0]), Ordering::Less);
        assert_eq!(grevlex(&[0, 0, 3], &[1, 0, 0]), Ordering::Greater);
    }
}
