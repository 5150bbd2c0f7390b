//! XL linearization.
//!
//! At degree `D` every product `t * f` with `deg t + deg f <= D` becomes a
//! row of a Macaulay matrix, which is put in reduced echelon form. Columns
//! are ordered by largest variable first, so a row whose leading monomial
//! has largest variable `k` involves only variables `0..=k`. A depth-first
//! search assigns variables in index order and checks those rows as soon as
//! their variables are set. When the search exceeds its node budget the
//! degree is raised.

use std::cmp::Ordering;

use rustc_hash::FxHashMap;

use super::groebner::{echelonize_sparse, BackendResult};
use super::{Deadline, SolveConfig, SolveError, SolveStats, SolveStatus};
use crate::boolring::{Assignment, BoolMonomial, BoolPoly};
use crate::descent::BoolSystem;

const NODE_BUDGET: usize = 1 << 20;

fn column_order(a: &BoolMonomial, b: &BoolMonomial) -> Ordering {
    let key = |m: &BoolMonomial| m.max_var().map_or(0, |v| v + 1);
    key(b).cmp(&key(a)).then(b.cmp(a))
}

/// Number of monomials of degree at most `d` in `n` variables, saturating.
fn monomials_up_to(n: usize, d: u32) -> usize {
    let mut total: usize = 0;
    let mut binom: usize = 1;
    for i in 0..=(d as usize).min(n) {
        total = total.saturating_add(binom);
        binom = binom.saturating_mul(n - i) / (i + 1);
    }
    total
}

fn multipliers(n: usize, d: u32, out: &mut Vec<BoolMonomial>) {
    fn rec(start: usize, n: usize, left: u32, cur: BoolMonomial, out: &mut Vec<BoolMonomial>) {
        out.push(cur);
        if left == 0 {
            return;
        }
        for v in start..n {
            let mut next = cur;
            next.insert(v);
            rec(v + 1, n, left - 1, next, out);
        }
    }
    rec(0, n, d, BoolMonomial::ONE, out);
}

pub(crate) fn linearize_solve(sys: &BoolSystem, cfg: &SolveConfig, deadline: Deadline) -> BackendResult {
    let n = sys.nvars();
    let eqs: Vec<&BoolPoly> = sys.equations().iter().filter(|p| !p.is_zero()).collect();
    let mut stats = SolveStats::default();
    let mut d = eqs.iter().filter_map(|p| p.degree()).max().unwrap_or(0).max(1);
    loop {
        let count = monomials_up_to(n, d);
        if count > cfg.max_monomials {
            return Err(SolveError::TooManyMonomials { count, bound: cfg.max_monomials });
        }
        stats.max_step_degree = d;
        let Some(rows) = macaulay_rref(&eqs, n, d, deadline, &mut stats) else {
            return Ok((SolveStatus::Timeout, Vec::new(), stats));
        };
        let mut search = Dfs::new(sys, rows, cfg.enumerate_all, deadline);
        match search.run() {
            DfsEnd::Finished | DfsEnd::Stopped => {
                let status = if search.found.is_empty() { SolveStatus::Inconsistent } else { SolveStatus::Solved };
                stats.basis_size = search.nrows;
                return Ok((status, search.found, stats));
            }
            DfsEnd::Timeout => return Ok((SolveStatus::Timeout, search.found, stats)),
            DfsEnd::Budget if d as usize >= n => {
                return Err(SolveError::SearchSpaceTooLarge(n));
            }
            DfsEnd::Budget => d += 1,
        }
    }
}

/// Echelonized Macaulay matrix rows as polynomials.
fn macaulay_rref(
    eqs: &[&BoolPoly],
    n: usize,
    d: u32,
    deadline: Deadline,
    stats: &mut SolveStats,
) -> Option<Vec<BoolPoly>> {
    let mut products: Vec<BoolPoly> = Vec::new();
    let mut mults = Vec::new();
    for f in eqs {
        let df = f.degree().unwrap_or(0);
        if df > d {
            continue;
        }
        mults.clear();
        multipliers(n, d - df, &mut mults);
        for t in &mults {
            let p = f.mul_monomial(t);
            if !p.is_zero() {
                products.push(p);
            }
        }
        if deadline.expired() {
            return None;
        }
    }
    let mut cols: Vec<BoolMonomial> = products.iter().flat_map(|p| p.terms().iter().copied()).collect();
    cols.sort_unstable_by(column_order);
    cols.dedup();
    let col_of: FxHashMap<BoolMonomial, u32> = cols.iter().enumerate().map(|(i, m)| (*m, i as u32)).collect();
    let sparse: Vec<Vec<u32>> = products
        .iter()
        .map(|p| {
            let mut r: Vec<u32> = p.terms().iter().map(|m| col_of[m]).collect();
            r.sort_unstable();
            r
        })
        .collect();
    stats.reductions += sparse.len() as u64;
    let (ech, bytes) = echelonize_sparse(sparse, deadline, None).ok()?;
    stats.peak_mem_estimate = stats.peak_mem_estimate.max(bytes);
    Some(
        ech.into_iter()
            .map(|r| BoolPoly::from_terms(n, r.iter().map(|&c| cols[c as usize]).collect()).expect("in range"))
            .collect(),
    )
}

enum DfsEnd {
    Finished,
    Stopped,
    Budget,
    Timeout,
}

struct Dfs<'a> {
    sys: &'a BoolSystem,
    /// `by_var[k]`: rows whose variables are all at most `k`.
    by_var: Vec<Vec<BoolPoly>>,
    inconsistent: bool,
    nrows: usize,
    enumerate_all: bool,
    deadline: Deadline,
    nodes: usize,
    found: Vec<Assignment>,
}

impl<'a> Dfs<'a> {
    fn new(sys: &'a BoolSystem, rows: Vec<BoolPoly>, enumerate_all: bool, deadline: Deadline) -> Self {
        let n = sys.nvars();
        let mut by_var = vec![Vec::new(); n];
        let mut inconsistent = false;
        let nrows = rows.len();
        for r in rows {
            match r.support().max_var() {
                None => inconsistent = true,
                Some(k) => by_var[k].push(r),
            }
        }
        Self { sys, by_var, inconsistent, nrows, enumerate_all, deadline, nodes: 0, found: Vec::new() }
    }

    fn run(&mut self) -> DfsEnd {
        if self.inconsistent {
            return DfsEnd::Finished;
        }
        let mut a = Assignment::from_bits(&[]);
        match self.visit(0, &mut a) {
            Some(end) => end,
            None => DfsEnd::Finished,
        }
    }

    fn visit(&mut self, k: usize, a: &mut Assignment) -> Option<DfsEnd> {
        if k == self.sys.nvars() {
            if self.sys.is_satisfied_by(a) {
                self.found.push(*a);
                if !self.enumerate_all {
                    return Some(DfsEnd::Stopped);
                }
            }
            return None;
        }
        for b in [false, true] {
            self.nodes += 1;
            if self.nodes > NODE_BUDGET {
                return Some(DfsEnd::Budget);
            }
            if self.nodes.is_multiple_of(1024) && self.deadline.expired() {
                return Some(DfsEnd::Timeout);
            }
            a.set(k, b);
            if self.by_var[k].iter().all(|r| !r.evaluate(a)) {
                if let Some(end) = self.visit(k + 1, a) {
                    return Some(end);
                }
            }
        }
        a.set(k, false);
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolring::VarUniverse;
    use crate::solver::{solve, Backend};

    fn universe(n: usize) -> VarUniverse {
        let mut u = VarUniverse::new();
        u.add_block("x", n).unwrap();
        u
    }

    fn poly(n: usize, terms: &[&[usize]]) -> BoolPoly {
        BoolPoly::from_terms(n, terms.iter().map(|t| BoolMonomial::from_vars(t)).collect()).unwrap()
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials_up_to(4, 2), 1 + 4 + 6);
        assert_eq!(monomials_up_to(3, 5), 8);
        let mut m = Vec::new();
        multipliers(5, 2, &mut m);
        assert_eq!(m.len(), monomials_up_to(5, 2));
    }

    #[test]
    fn column_order_groups_by_largest_variable() {
        let a = BoolMonomial::from_vars(&[3]);
        let b = BoolMonomial::from_vars(&[0, 1, 2]);
        assert_eq!(column_order(&a, &b), Ordering::Less);
        assert_eq!(column_order(&BoolMonomial::ONE, &b), Ordering::Greater);
    }

    #[test]
    fn solves_small_quadratic_system() {
        // x0 x1 = 1, x1 + x2 = 1
        let sys = BoolSystem::new(universe(3), vec![poly(3, &[&[0, 1], &[]]), poly(3, &[&[1], &[2], &[]])]).unwrap();
        let r =
            solve(&sys, &SolveConfig { enumerate_all: true, ..SolveConfig::with_backend(Backend::Linearize) }).unwrap();
        assert_eq!(r.status, SolveStatus::Solved);
        assert_eq!(r.solutions, vec![Assignment::from_bits(&[true, true, false])]);
    }

    #[test]
    fn detects_inconsistency() {
        let sys = BoolSystem::new(universe(2), vec![poly(2, &[&[0, 1], &[]]), poly(2, &[&[0]])]).unwrap();
        let r = solve(&sys, &SolveConfig::with_backend(Backend::Linearize)).unwrap();
        assert_eq!(r.status, SolveStatus::Inconsistent);
    }

    #[test]
    fn column_bound_is_enforced() {
        let sys = BoolSystem::new(universe(40), vec![poly(40, &[&[0, 1, 2, 3, 4, 5], &[]])]).unwrap();
        let cfg = SolveConfig { max_monomials: 1000, ..SolveConfig::with_backend(Backend::Linearize) };
        assert!(matches!(solve(&sys, &cfg), Err(SolveError::TooManyMonomials { bound: 1000, .. })));
    }
}
