//! Backends for descended boolean systems.
//!
//! * [`Backend::Groebner`]: batched Groebner-basis computation over the
//!   boolean ring (grevlex, normal selection strategy) followed by
//!   branch-and-recompute solution extraction;
//! * [`Backend::Linearize`]: XL-style linearization with a pruned search
//!   over the original variables;
//! * [`Backend::Sat`]: ANF to CNF conversion and a CDCL solver, with
//!   blocking clauses for enumeration.
//!
//! Every solution in a [`SolveReport`] has been checked against every input
//! equation.

mod extract;
pub mod groebner;
pub mod linearize;
pub mod sat;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boolring::Assignment;
use crate::descent::BoolSystem;
use crate::par::Exec;

pub use extract::MAX_FB_SEARCH_BITS;

/// Step memory budget used by the bench harness and the CLI.
pub const DEFAULT_MEMORY_LIMIT: u64 = 3 << 30;
pub use sat::{to_cnf, CnfFormula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("linearization needs {count} monomials, bound is {bound}")]
    TooManyMonomials { count: usize, bound: usize },
    #[error("search over {0} factor-base bits exceeds the limit of {MAX_FB_SEARCH_BITS}")]
    SearchSpaceTooLarge(usize),
    #[error("estimated step footprint of {estimate} bytes exceeds the memory limit of {limit}")]
    MemoryLimit { estimate: u64, limit: u64 },
    #[error("SAT solver failure: {0}")]
    Sat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Groebner,
    Linearize,
    Sat,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Groebner => "groebner",
            Backend::Linearize => "linearize",
            Backend::Sat => "sat",
        })
    }
}

impl FromStr for Backend {
    type Err = SolveError;
    fn from_str(s: &str) -> Result<Self, SolveError> {
        match s {
            "groebner" | "gb" => Ok(Backend::Groebner),
            "linearize" | "xl" => Ok(Backend::Linearize),
            "sat" => Ok(Backend::Sat),
            _ => Err(SolveError::Config(format!("unknown backend {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub backend: Backend,
    /// Pairs of degree above the cap are deferred, never processed.
    pub degree_cap: Option<u32>,
    /// Compute a basis per equation group first, then merge.
    pub partial_merge: bool,
    pub timeout: Option<Duration>,
    /// Return every solution instead of stopping at the first.
    pub enumerate_all: bool,
    /// Column bound for linearization.
    pub max_monomials: usize,
    /// Number of leading (factor-base) variables the extraction branches on
    /// first; `None` means all variables are treated alike.
    pub fb_vars: Option<usize>,
    /// Byte budget for one Groebner matrix step (estimated before the
    /// matrix is built).
    pub memory_limit: Option<u64>,
    pub exec: Exec,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Groebner,
            degree_cap: None,
            partial_merge: false,
            timeout: None,
            enumerate_all: false,
            max_monomials: 1 << 20,
            fb_vars: None,
            memory_limit: None,
            exec: Exec::default(),
        }
    }
}

impl SolveConfig {
    pub fn with_backend(backend: Backend) -> Self {
        Self { backend, ..Self::default() }
    }

    fn validate(&self) -> Result<(), SolveError> {
        if let Some(c) = self.degree_cap {
            if c < 2 {
                return Err(SolveError::Config(format!("degree cap must be at least 2, got {c}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Solved,
    Inconsistent,
    Timeout,
    CapExceededIncomplete,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Solved => "solved",
            SolveStatus::Inconsistent => "inconsistent",
            SolveStatus::Timeout => "timeout",
            SolveStatus::CapExceededIncomplete => "cap-exceeded-incomplete",
        })
    }
}

/// Work counters shared by the backends.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    /// Largest pair degree processed (Groebner) or linearization degree.
    pub max_step_degree: u32,
    pub pairs_processed: u64,
    pub basis_size: usize,
    /// Row reductions (Groebner), eliminated rows (XL) or SAT calls.
    pub reductions: u64,
    /// Best-effort size of the largest matrix or formula, in bytes.
    pub peak_mem_estimate: u64,
}

impl SolveStats {
    pub(crate) fn absorb(&mut self, other: &SolveStats) {
        self.max_step_degree = self.max_step_degree.max(other.max_step_degree);
        self.pairs_processed += other.pairs_processed;
        self.reductions += other.reductions;
        self.peak_mem_estimate = self.peak_mem_estimate.max(other.peak_mem_estimate);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub backend: Backend,
    pub status: SolveStatus,
    pub nvars: usize,
    #[serde(skip)]
    pub solutions: Vec<Assignment>,
    /// `solutions` as bit strings over the variable universe.
    pub solution_bits: Vec<String>,
    #[serde(flatten)]
    pub stats: SolveStats,
    pub wall_time_s: f64,
}

impl SolveReport {
    pub fn max_step_degree(&self) -> u32 {
        self.stats.max_step_degree
    }
}

/// Wall-clock budget.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Deadline(Option<Instant>);

impl Deadline {
    pub(crate) fn new(timeout: Option<Duration>) -> Self {
        Self(timeout.map(|t| Instant::now() + t))
    }

    pub(crate) fn expired(&self) -> bool {
        self.0.is_some_and(|d| Instant::now() >= d)
    }
}

/// Solves with the configured backend.
pub fn solve(sys: &BoolSystem, cfg: &SolveConfig) -> Result<SolveReport, SolveError> {
    cfg.validate()?;
    let start = Instant::now();
    let deadline = Deadline::new(cfg.timeout);
    let (status, mut solutions, stats) = match cfg.backend {
        Backend::Groebner => groebner::groebner_solve(sys, cfg, deadline)?,
        Backend::Linearize => linearize::linearize_solve(sys, cfg, deadline)?,
        Backend::Sat => sat::sat_solve(sys, cfg, deadline)?,
    };
    assert!(solutions.iter().all(|a| sys.is_satisfied_by(a)), "unverified solution from {}", cfg.backend);
    solutions.sort();
    solutions.dedup();
    let status = match status {
        SolveStatus::Solved if solutions.is_empty() => SolveStatus::Inconsistent,
        s => s,
    };
    Ok(SolveReport {
        backend: cfg.backend,
        status,
        nvars: sys.nvars(),
        solution_bits: solutions.iter().map(|a| a.to_bit_string(sys.nvars())).collect(),
        solutions,
        stats,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
