//! Solution extraction from a Groebner basis.
//!
//! When the linear part of the basis fixes every variable it names the
//! unique solution.
//! Otherwise the first undetermined variable (factor-base bits first) is
//! fixed to each value in turn and the basis is recomputed incrementally.
//! Leaves are either `{1}` or a fully determined point, so the search is
//! exact even when the basis was computed under a degree cap.

use super::groebner::{stopped, BackendResult, Engine, Outcome};
use super::{Deadline, SolveConfig, SolveError, SolveStats, SolveStatus};
use crate::boolring::{Assignment, BoolMonomial, BoolPoly};
use crate::descent::BoolSystem;

/// Largest number of factor-base bits the extraction will branch over.
pub const MAX_FB_SEARCH_BITS: usize = 30;

const MAX_NODES: usize = 1 << 16;

enum Flow {
    Continue,
    Stop(SolveStatus),
    /// A recomputation did not finish.
    Halt(Outcome),
}

struct Search<'a> {
    sys: &'a BoolSystem,
    cfg: &'a SolveConfig,
    deadline: Deadline,
    stats: SolveStats,
    nodes: usize,
    found: Vec<Assignment>,
}

pub(crate) fn extract(
    engine: Engine,
    sys: &BoolSystem,
    cfg: &SolveConfig,
    deadline: Deadline,
    mut stats: SolveStats,
) -> BackendResult {
    if let Some(fb) = cfg.fb_vars {
        if fb > MAX_FB_SEARCH_BITS {
            return Err(SolveError::SearchSpaceTooLarge(fb));
        }
    }
    stats.absorb(&engine.stats);
    let mut s = Search { sys, cfg, deadline, stats, nodes: 0, found: Vec::new() };
    let root_basis_size = engine.minimal_len();
    let flow = s.node(engine);
    s.stats.basis_size = root_basis_size;
    let status = match flow {
        Flow::Halt(outcome) => return stopped(outcome, s.stats, cfg),
        Flow::Stop(status) => status,
        Flow::Continue if s.found.is_empty() => SolveStatus::Inconsistent,
        Flow::Continue => SolveStatus::Solved,
    };
    if status == SolveStatus::CapExceededIncomplete && cfg.degree_cap.is_none() {
        return Err(SolveError::SearchSpaceTooLarge(sys.nvars()));
    }
    Ok((status, s.found, s.stats))
}

/// Values forced by the linear polynomials: reduced row echelon form over
/// the variables, reading off rows of the form `x_v + c`.
fn fixed_values(n: usize, linear: &[BoolPoly]) -> Vec<Option<bool>> {
    let words = (n + 1).div_ceil(64);
    let set = |r: &mut Vec<u64>, i: usize| r[i / 64] ^= 1 << (i % 64);
    let get = |r: &[u64], i: usize| r[i / 64] >> (i % 64) & 1 == 1;
    let mut pivots: Vec<(usize, Vec<u64>)> = Vec::new();
    for p in linear {
        // column n holds the constant
        let mut row = vec![0u64; words];
        for m in p.terms() {
            set(&mut row, m.max_var().unwrap_or(n));
        }
        for (c, pr) in &pivots {
            if get(&row, *c) {
                row.iter_mut().zip(pr).for_each(|(a, b)| *a ^= b);
            }
        }
        let Some(lead) = (0..n).find(|&v| get(&row, v)) else {
            continue;
        };
        for (_, pr) in pivots.iter_mut() {
            if get(pr, lead) {
                pr.iter_mut().zip(&row).for_each(|(a, b)| *a ^= b);
            }
        }
        pivots.push((lead, row));
    }
    let mut fixed = vec![None; n];
    for (lead, row) in &pivots {
        if (0..n).filter(|&v| get(row, v)).count() == 1 {
            fixed[*lead] = Some(get(row, n));
        }
    }
    fixed
}

impl Search<'_> {
    fn node(&mut self, engine: Engine) -> Flow {
        self.nodes += 1;
        if self.nodes > MAX_NODES {
            return Flow::Stop(SolveStatus::CapExceededIncomplete);
        }
        if self.deadline.expired() {
            return Flow::Stop(SolveStatus::Timeout);
        }
        if engine.is_inconsistent() {
            return Flow::Continue;
        }
        let n = self.sys.nvars();
        let fixed = fixed_values(n, &engine.linear_part());
        let fb = self.cfg.fb_vars.unwrap_or(0).min(n);
        let pick = (0..fb).find(|&v| fixed[v].is_none()).or_else(|| (0..n).find(|&v| fixed[v].is_none()));
        let Some(v) = pick else {
            let a = Assignment::from_bits(&fixed.iter().map(|c| c.unwrap_or(false)).collect::<Vec<_>>());
            if self.sys.is_satisfied_by(&a) {
                self.found.push(a);
                if !self.cfg.enumerate_all {
                    return Flow::Stop(SolveStatus::Solved);
                }
            }
            return Flow::Continue;
        };
        for b in [false, true] {
            let mut child = engine.clone();
            child.stats = SolveStats::default();
            let mut terms = vec![BoolMonomial::var(v)];
            if b {
                terms.push(BoolMonomial::ONE);
            }
            let lin = BoolPoly::from_terms(n, terms).expect("in range");
            let mut outcome = child.add_input(&[lin], self.deadline);
            if outcome == Outcome::Done {
                outcome = child.run(self.deadline);
            }
            self.stats.absorb(&child.stats);
            if outcome != Outcome::Done {
                return Flow::Halt(outcome);
            }
            match self.node(child) {
                Flow::Continue => {}
                stop => return stop,
            }
        }
        Flow::Continue
    }
}
