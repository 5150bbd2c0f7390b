//! ANF to CNF conversion and the SAT backend.
//!
//! Each nonlinear monomial gets an auxiliary variable constrained to the
//! AND of its factors. Each equation is then a XOR constraint over
//! monomial literals; long XORs are cut into chunks of at most
//! [`XOR_CHUNK`] literals linked by parity variables, and each chunk is
//! encoded by forbidding its wrong-parity assignments.

use std::fmt::Write as _;

use rustc_hash::FxHashMap;
use varisat::{ExtendFormula, Lit, Solver};

use super::groebner::BackendResult;
use super::{Deadline, SolveConfig, SolveError, SolveStats, SolveStatus};
use crate::boolring::{Assignment, BoolMonomial};
use crate::descent::BoolSystem;

pub const XOR_CHUNK: usize = 6;

/// A CNF formula whose first `universe_vars` variables are the system's
/// variables (DIMACS numbering from 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub universe_vars: usize,
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
    pub comments: Vec<String>,
}

impl CnfFormula {
    fn fresh(&mut self) -> i32 {
        self.num_vars += 1;
        self.num_vars as i32
    }

    pub fn num_literals(&self) -> usize {
        self.clauses.iter().map(Vec::len).sum()
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = String::new();
        for c in &self.comments {
            let _ = writeln!(s, "c {c}");
        }
        let _ = writeln!(s, "p cnf {} {}", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for l in clause {
                let _ = write!(s, "{l} ");
            }
            s.push_str("0\n");
        }
        s
    }

    /// Adds `XOR(lits) = rhs`.
    fn add_xor(&mut self, lits: &[i32], rhs: bool) {
        if lits.is_empty() {
            if rhs {
                let t = self.fresh();
                self.comments.push(format!("false {t}"));
                self.clauses.push(vec![t]);
                self.clauses.push(vec![-t]);
            }
            return;
        }
        let k = lits.len();
        for pattern in 0u32..1 << k {
            if (pattern.count_ones() % 2 == 1) != rhs {
                self.clauses
                    .push(lits.iter().enumerate().map(|(i, &l)| if pattern >> i & 1 == 1 { -l } else { l }).collect());
            }
        }
    }
}

/// CNF encoding of `sys`; a model restricted to the first
/// `sys.nvars()` variables is a solution and conversely.
pub fn to_cnf(sys: &BoolSystem) -> CnfFormula {
    let universe = sys.universe();
    let n = sys.nvars();
    let mut f = CnfFormula { universe_vars: n, num_vars: n, clauses: Vec::new(), comments: Vec::new() };
    f.comments.push(format!("universe {n}"));
    let mut aux: FxHashMap<BoolMonomial, i32> = FxHashMap::default();
    for eq in sys.equations() {
        let mut lits = Vec::new();
        for m in eq.terms() {
            match m.degree() {
                0 => {}
                1 => lits.push(m.max_var().expect("degree 1") as i32 + 1),
                _ => {
                    let a = match aux.get(m) {
                        Some(&a) => a,
                        None => {
                            let a = f.fresh();
                            let names: Vec<String> = m.vars().map(|v| universe.var_name(v)).collect();
                            f.comments.push(format!("and {a} = {}", names.join("*")));
                            let mut long = vec![a];
                            for v in m.vars() {
                                f.clauses.push(vec![-a, v as i32 + 1]);
                                long.push(-(v as i32 + 1));
                            }
                            f.clauses.push(long);
                            aux.insert(*m, a);
                            a
                        }
                    };
                    lits.push(a);
                }
            }
        }
        let rhs = eq.has_constant_term();
        while lits.len() > XOR_CHUNK {
            let p = f.fresh();
            f.comments.push(format!("parity {p}"));
            let mut chunk: Vec<i32> = lits.drain(..XOR_CHUNK - 1).collect();
            chunk.push(p);
            f.add_xor(&chunk, false);
            lits.push(p);
        }
        f.add_xor(&lits, rhs);
    }
    f
}

pub(crate) fn sat_solve(sys: &BoolSystem, cfg: &SolveConfig, deadline: Deadline) -> BackendResult {
    let cnf = to_cnf(sys);
    let n = sys.nvars();
    let lit = |l: i32| Lit::from_index(l.unsigned_abs() as usize - 1, l > 0);
    let mut solver = Solver::new();
    for c in &cnf.clauses {
        solver.add_clause(&c.iter().map(|&l| lit(l)).collect::<Vec<_>>());
    }
    let mut stats = SolveStats {
        peak_mem_estimate: (cnf.num_literals() * 4) as u64,
        basis_size: cnf.clauses.len(),
        ..SolveStats::default()
    };
    let mut found = Vec::new();
    loop {
        if deadline.expired() {
            return Ok((SolveStatus::Timeout, found, stats));
        }
        stats.reductions += 1;
        if !solver.solve().map_err(|e| SolveError::Sat(e.to_string()))? {
            break;
        }
        let model = solver.model().ok_or_else(|| SolveError::Sat("missing model".into()))?;
        let mut bits = vec![false; n];
        for l in model {
            if l.index() < n {
                bits[l.index()] = l.is_positive();
            }
        }
        found.push(Assignment::from_bits(&bits));
        if !cfg.enumerate_all || n == 0 {
            break;
        }
        let block: Vec<Lit> = (0..n).map(|i| Lit::from_index(i, !bits[i])).collect();
        solver.add_clause(&block);
    }
    let status = if found.is_empty() { SolveStatus::Inconsistent } else { SolveStatus::Solved };
    Ok((status, found, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolring::{BoolPoly, VarUniverse};
    use crate::solver::{solve, Backend};
    use proptest::prelude::*;

    fn universe(n: usize) -> VarUniverse {
        let mut u = VarUniverse::new();
        u.add_block("x", n).unwrap();
        u
    }

    fn poly(n: usize, terms: &[&[usize]]) -> BoolPoly {
        BoolPoly::from_terms(n, terms.iter().map(|t| BoolMonomial::from_vars(t)).collect()).unwrap()
    }

    fn sat_all() -> SolveConfig {
        SolveConfig { enumerate_all: true, ..SolveConfig::with_backend(Backend::Sat) }
    }

    #[test]
    fn empty_system_is_satisfiable() {
        let sys = BoolSystem::new(universe(3), vec![]).unwrap();
        let r = solve(&sys, &SolveConfig::with_backend(Backend::Sat)).unwrap();
        assert_eq!(r.status, SolveStatus::Solved);
        assert_eq!(solve(&sys, &sat_all()).unwrap().solutions.len(), 8);
    }

    #[test]
    fn product_equal_one_forces_both() {
        let sys = BoolSystem::new(universe(2), vec![poly(2, &[&[0, 1], &[]])]).unwrap();
        let r = solve(&sys, &sat_all()).unwrap();
        assert_eq!(r.solutions, vec![Assignment::from_bits(&[true, true])]);
    }

    #[test]
    fn constant_one_is_unsatisfiable() {
        let sys = BoolSystem::new(universe(2), vec![BoolPoly::one(2)]).unwrap();
        assert_eq!(solve(&sys, &sat_all()).unwrap().status, SolveStatus::Inconsistent);
    }

    #[test]
    fn dimacs_header_and_comments() {
        let sys = BoolSystem::new(universe(3), vec![poly(3, &[&[0, 1], &[2], &[]])]).unwrap();
        let cnf = to_cnf(&sys);
        let text = cnf.to_dimacs();
        assert!(text.contains("c and 4 = b0_0*b0_1"), "{text}");
        assert!(text.contains(&format!("p cnf 4 {}", cnf.clauses.len())));
        assert_eq!(text.lines().filter(|l| l.ends_with(" 0")).count(), cnf.clauses.len());
    }

    fn arb_system(n: usize) -> impl Strategy<Value = Vec<BoolPoly>> {
        let term = prop::collection::vec(0..n, 0..4);
        let p = prop::collection::vec(term, 1..12).prop_map(move |ts| {
            BoolPoly::from_terms(n, ts.iter().map(|t| BoolMonomial::from_vars(t)).collect()).unwrap()
        });
        prop::collection::vec(p, 1..6)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn enumeration_matches_exhaustive_search(polys in arb_system(7)) {
            let n = 7;
            let sys = BoolSystem::new(universe(n), polys.clone()).unwrap();
            let mut expected: Vec<Assignment> = (0..1u64 << n)
                .map(|b| Assignment::from_bits(&(0..n).map(|i| b >> i & 1 == 1).collect::<Vec<_>>()))
                .filter(|a| sys.is_satisfied_by(a))
                .collect();
            expected.sort();
            prop_assert_eq!(solve(&sys, &sat_all()).unwrap().solutions, expected.clone());
            let xl = SolveConfig { enumerate_all: true, ..SolveConfig::with_backend(Backend::Linearize) };
            prop_assert_eq!(solve(&sys, &xl).unwrap().solutions, expected);
        }
    }
}
