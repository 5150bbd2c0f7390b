//! First-fall-degree certificates and cost models.
//!
//! A certificate multiplies a source Semaev polynomial `f` by a monomial
//! `g` and descends `f`, `g` and `g * f`. If the descended product has
//! degree below `deg(f) + deg(g)`, the products `g_i f_i` fall at that
//! degree, so `deg(f) + deg(g)` bounds the first fall degree.
//!
//! The cost of an index-calculus attack is `2^{n'} (2^n m! / 2^{m n'}) C +
//! 2^{w' n'}` where `C = binom(N + D - 1, D)^w` is the cost of one
//! decomposition. [`ecdlp_cost`] evaluates it exactly; [`approx_cost`]
//! replaces the binomial with `N^D` and `n'` with `n/m`, which is the form
//! used for asymptotic estimates.

use std::fmt;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::mvpoly::MvPoly;
use crate::semaev::SemaevKind;
use crate::systems::{FieldEquation, PdpInstance, SystemError, SystemVariant};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FirstFallCertificate {
    /// Equation label, e.g. `S3,1`.
    pub source: String,
    pub source_vars: Vec<String>,
    /// Multiplier as text, e.g. `x3^3`.
    pub multiplier: String,
    pub source_degree: u32,
    pub multiplier_degree: u32,
    pub product_degree: u32,
    pub bound: u32,
}

impl FirstFallCertificate {
    /// The descended product has degree below `bound`.
    pub fn falls(&self) -> bool {
        self.product_degree < self.bound && self.multiplier_degree > 0
    }
}

impl fmt::Display for FirstFallCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({}) * {}: deg f = {}, deg g = {}, deg g*f = {} -> bound {}{}",
            self.source,
            self.source_vars.join(","),
            self.multiplier,
            self.source_degree,
            self.multiplier_degree,
            self.product_degree,
            self.bound,
            if self.falls() { "" } else { " (no fall)" }
        )
    }
}

/// The multiplier variable and exponent used for each Semaev class.
fn multiplier_for(eq: &FieldEquation) -> (usize, u16) {
    match (eq.class.m(), eq.class.kind()) {
        (3, SemaevKind::LastEvaluated) => (0, 3),
        (4, SemaevKind::Full) => (2, 1),
        _ => (0, 1),
    }
}

/// One certificate per equation of `variant`.
pub fn first_fall_bound(variant: &SystemVariant, inst: &PdpInstance) -> Result<Vec<FirstFallCertificate>, SystemError> {
    let descender = variant.descender(inst)?;
    let degree = |p: &MvPoly| -> Result<u32, SystemError> {
        Ok(descender.descend_poly(p).map_err(SystemError::Descent)?.degree().unwrap_or(0))
    };
    let ctx = inst.curve.field();
    variant
        .equations()
        .iter()
        .map(|eq| {
            let names: Vec<&str> = eq.poly.vars().iter().map(String::as_str).collect();
            let (i, k) = multiplier_for(eq);
            let g = MvPoly::monomial(ctx, &names, &[(names[i], k)], ctx.one())?;
            let product = g.mul(&eq.poly)?;
            let source_degree = degree(&eq.poly)?;
            let multiplier_degree = degree(&g)?;
            Ok(FirstFallCertificate {
                source: eq.label.clone(),
                source_vars: names.iter().map(|s| s.to_string()).collect(),
                multiplier: if k == 1 { names[i].to_string() } else { format!("{}^{k}", names[i]) },
                source_degree,
                multiplier_degree,
                product_degree: degree(&product)?,
                bound: source_degree + multiplier_degree,
            })
        })
        .collect()
}

/// The system-level bound: the largest certificate bound.
pub fn system_bound(certs: &[FirstFallCertificate]) -> Option<u32> {
    certs.iter().map(|c| c.bound).max()
}

/// Cost model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostParams {
    pub n: u32,
    pub m: u32,
    pub n_prime: u32,
    pub d_reg: u32,
    /// Number of boolean variables.
    pub nvars: u64,
    pub w: u32,
    pub w_prime: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostEstimate {
    #[serde(flatten)]
    pub params: CostParams,
    pub relation_log2: f64,
    pub linalg_log2: f64,
    pub total_log2: f64,
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n.saturating_sub(k));
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn factorial(m: u32) -> BigUint {
    (1..=m as u64).fold(BigUint::one(), |a, i| a * i)
}

/// `log2` of a positive big integer, accurate to double precision.
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_f64().unwrap_or(0.0).log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64 bits");
    top.log2() + shift as f64
}

fn log2_sum(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (1.0 + (lo - hi).exp2()).log2()
}

/// Exact evaluation of the cost formula.
pub fn ecdlp_cost(p: CostParams) -> CostEstimate {
    let c = binomial(p.nvars + p.d_reg as u64 - 1, p.d_reg as u64).pow(p.w);
    // relation term times 2^{m n'}, kept integral
    let relation_scaled = (BigUint::one() << (p.n_prime + p.n)) * factorial(p.m) * c;
    let linalg_scaled = BigUint::one() << (p.w_prime * p.n_prime + p.m * p.n_prime);
    let shift = (p.m * p.n_prime) as f64;
    CostEstimate {
        params: p,
        relation_log2: log2_big(&relation_scaled) - shift,
        linalg_log2: (p.w_prime * p.n_prime) as f64,
        total_log2: log2_big(&(relation_scaled + linalg_scaled)) - shift,
    }
}

/// Asymptotic form: `n' = n/m`, `N = nvars_per_n * n` and
/// `binom(N + D - 1, D)` replaced by `N^D`.
pub fn approx_cost(n: f64, m: u32, d_reg: u32, nvars_per_n: f64, w: u32, w_prime: u32) -> (f64, f64, f64) {
    let n_prime = n / m as f64;
    let relation = n_prime + log2_big(&factorial(m)) + (w * d_reg) as f64 * (nvars_per_n * n).log2();
    let linalg = w_prime as f64 * n_prime;
    (relation, linalg, log2_sum(relation, linalg))
}

/// The two asymptotic models: split systems with `m = 5` (`D = 9`,
/// `N ~ 2n`) and full splitting into third Semaev polynomials
/// (`D = 4`, `N ~ 4n`), both with `w = 3`, `w' = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostModel {
    Split5,
    FullSplit5,
}

impl CostModel {
    pub fn d_reg(self) -> u32 {
        match self {
            CostModel::Split5 => 9,
            CostModel::FullSplit5 => 4,
        }
    }

    pub fn nvars_per_n(self) -> f64 {
        match self {
            CostModel::Split5 => 2.0,
            CostModel::FullSplit5 => 4.0,
        }
    }

    /// Exact variable count at `n`.
    pub fn nvars(self, n: u32) -> u64 {
        let np = (n / 5) as u64;
        match self {
            CostModel::Split5 => 5 * np + n as u64,
            CostModel::FullSplit5 => 5 * np + 3 * n as u64,
        }
    }

    pub fn approx_log2(self, n: f64) -> f64 {
        approx_cost(n, 5, self.d_reg(), self.nvars_per_n(), 3, 2).2
    }

    pub fn exact(self, n: u32) -> CostEstimate {
        ecdlp_cost(CostParams { n, m: 5, n_prime: n / 5, d_reg: self.d_reg(), nvars: self.nvars(n), w: 3, w_prime: 2 })
    }

    /// Smallest integer `n` from which the approximate model stays below
    /// the generic `2^{n/2}`, searching up to `limit`.
    pub fn crossover(self, limit: u32) -> Option<u32> {
        let beats = |n: u32| self.approx_log2(n as f64) < n as f64 / 2.0;
        let last_loss = (2..=limit).rev().find(|&n| !beats(n))?;
        (last_loss < limit).then_some(last_loss + 1)
    }
}

/// `2^{m n'} / (2^n m!)`, the heuristic probability that a random point
/// decomposes over the factor base.
pub fn decomposition_probability(n: u32, m: u32, n_prime: u32) -> Ratio<BigUint> {
    Ratio::new(BigUint::one() << (m * n_prime), (BigUint::one() << n) * factorial(m))
}

/// Cost table as CSV with columns
/// `n,m,variant,D,N,relation_log2,linalg_log2,total_log2`.
pub fn cost_csv(rows: &[(String, CostEstimate)]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "m", "variant", "D", "N", "relation_log2", "linalg_log2", "total_log2"])?;
    for (variant, c) in rows {
        w.write_record([
            c.params.n.to_string(),
            c.params.m.to_string(),
            variant.clone(),
            c.params.d_reg.to_string(),
            c.params.nvars.to_string(),
            format!("{:.1}", c.relation_log2),
            format!("{:.1}", c.linalg_log2),
            format!("{:.1}", c.total_log2),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}
