//! Brute-force decomposition oracle and the benchmark grid runner.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHasher;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{CurveParams, Point};
use crate::gf2n::{FieldContext, FieldElement};
use crate::par::Exec;
use crate::solver::{solve, Backend, SolveConfig, SolveStatus, DEFAULT_MEMORY_LIMIT};
use crate::systems::{generate_instance, InstanceMode, PdpInstance, SystemError, SystemVariant, VariantKind};

/// Largest `|FB|^m` the oracle will enumerate.
pub const ORACLE_LIMIT_LOG2: f64 = 26.0;

/// Curves tried per trial before a missing plant counts as an error.
const MAX_CURVE_DRAWS: usize = 16;

/// Version of the CSV and JSON bench schemas.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("oracle search of |FB|^m = 2^{0:.1} exceeds 2^{ORACLE_LIMIT_LOG2}")]
    TooLarge(f64),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("csv: {0}")]
    Csv(String),
}

/// Every unordered `m`-multiset of factor-base points (both signs of each
/// x-coordinate are members) summing to `R`, each sorted by position in the
/// factor base.
pub fn brute_force_pdp(inst: &PdpInstance, exec: Exec) -> Result<Vec<Vec<Point>>, HarnessError> {
    let fb = inst.factor_base()?;
    let pts = fb.members();
    let size_log2 = inst.m as f64 * (pts.len().max(1) as f64).log2();
    if size_log2 > ORACLE_LIMIT_LOG2 {
        return Err(HarnessError::TooLarge(size_log2));
    }
    if inst.m == 0 || pts.is_empty() {
        return Ok(Vec::new());
    }
    let index: HashMap<Point, usize> = pts.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let curve = &inst.curve;
    // the first m - 1 indices are enumerated, the last one is looked up
    let search = |first: usize| {
        let mut out = Vec::new();
        let mut idx = vec![first];
        let mut partial = vec![pts[first]];
        descend(curve, pts, &index, &inst.target, inst.m, &mut idx, &mut partial, &mut out);
        out
    };
    let found: Vec<Vec<Vec<usize>>> = if inst.m == 1 {
        vec![index.get(&inst.target).map(|&i| vec![vec![i]]).unwrap_or_default()]
    } else {
        exec.map_range(0..pts.len(), search)
    };
    Ok(found.into_iter().flatten().map(|ids| ids.into_iter().map(|i| pts[i]).collect()).collect())
}

#[allow(clippy::too_many_arguments)]
fn descend(
    curve: &CurveParams,
    pts: &[Point],
    index: &HashMap<Point, usize>,
    target: &Point,
    m: usize,
    idx: &mut Vec<usize>,
    partial: &mut Vec<Point>,
    out: &mut Vec<Vec<usize>>,
) {
    let last = *idx.last().expect("nonempty");
    let acc = *partial.last().expect("nonempty");
    if idx.len() == m - 1 {
        let need = curve.sub_unchecked(target, &acc);
        if let Some(&j) = index.get(&need) {
            if j >= last {
                let mut ids = idx.clone();
                ids.push(j);
                out.push(ids);
            }
        }
        return;
    }
    for j in last..pts.len() {
        idx.push(j);
        partial.push(curve.add_unchecked(&acc, &pts[j]));
        descend(curve, pts, index, target, m, idx, partial, out);
        idx.pop();
        partial.pop();
    }
}

/// Sorted x-coordinates of a decomposition: the form in which boolean
/// solutions and oracle decompositions are compared.
pub fn x_multiset(points: &[Point]) -> Vec<FieldElement> {
    let mut xs: Vec<FieldElement> = points.iter().filter_map(Point::x).collect();
    xs.sort_by_key(|x| x.bits());
    xs
}

/// One bench grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    pub n: u32,
    pub m: usize,
    pub n_prime: usize,
    pub variant: VariantKind,
    pub backend: Backend,
    pub degree_cap: Option<u32>,
    pub partial_merge: bool,
    pub timeout_s: Option<f64>,
}

impl BenchCell {
    /// Enumerates the whole variety: split systems also have roots whose
    /// points only exist over an extension, so the first boolean solution
    /// need not decode to a decomposition.
    pub fn solve_config(&self, fb_bits: usize) -> SolveConfig {
        SolveConfig {
            backend: self.backend,
            degree_cap: self.degree_cap,
            partial_merge: self.partial_merge,
            timeout: self.timeout_s.map(Duration::from_secs_f64),
            enumerate_all: true,
            fb_vars: Some(fb_bits),
            memory_limit: Some(DEFAULT_MEMORY_LIMIT),
            ..SolveConfig::default()
        }
    }

    fn key(&self) -> u64 {
        let mut h = FxHasher::default();
        (self.n, self.m, self.n_prime, self.variant.to_string(), self.backend.to_string()).hash(&mut h);
        (self.degree_cap, self.partial_merge).hash(&mut h);
        h.finish()
    }
}

/// Per-trial outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub curve_seed: u64,
    pub instance_seed: u64,
    pub status: Option<SolveStatus>,
    pub error: Option<String>,
    /// Some boolean solution decodes to a decomposition summing to `R`.
    pub verified: bool,
    pub max_step_degree: u32,
    pub time_s: f64,
    pub peak_mem_estimate: u64,
    pub nvars: usize,
    pub equations: usize,
}

/// Aggregate over a cell's trials: maxima of time, step degree and memory
/// and a count per status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    #[serde(flatten)]
    pub cell: BenchCell,
    pub trials: usize,
    pub solved: usize,
    pub verified: usize,
    pub inconsistent: usize,
    pub timeout: usize,
    pub cap_exceeded: usize,
    pub errors: usize,
    pub max_time_s: f64,
    pub max_d: u32,
    pub max_mem_estimate: u64,
    pub nvars: usize,
    pub equations: usize,
    pub results: Vec<TrialResult>,
}

impl BenchRow {
    fn from_results(cell: BenchCell, results: Vec<TrialResult>) -> Self {
        let count = |s: SolveStatus| results.iter().filter(|r| r.status == Some(s)).count();
        Self {
            trials: results.len(),
            solved: count(SolveStatus::Solved),
            verified: results.iter().filter(|r| r.verified).count(),
            inconsistent: count(SolveStatus::Inconsistent),
            timeout: count(SolveStatus::Timeout),
            cap_exceeded: count(SolveStatus::CapExceededIncomplete),
            errors: results.iter().filter(|r| r.error.is_some()).count(),
            max_time_s: results.iter().map(|r| r.time_s).fold(0.0, f64::max),
            max_d: results.iter().map(|r| r.max_step_degree).max().unwrap_or(0),
            max_mem_estimate: results.iter().map(|r| r.peak_mem_estimate).max().unwrap_or(0),
            nvars: results.iter().map(|r| r.nvars).max().unwrap_or(0),
            equations: results.iter().map(|r| r.equations).max().unwrap_or(0),
            cell,
            results,
        }
    }
}

/// Solves one planted instance on a random curve.
pub fn run_trial(cell: &BenchCell, curve_seed: u64, instance_seed: u64) -> TrialResult {
    let mut r = TrialResult {
        curve_seed,
        instance_seed,
        status: None,
        error: None,
        verified: false,
        max_step_degree: 0,
        time_s: 0.0,
        peak_mem_estimate: 0,
        nvars: 0,
        equations: 0,
    };
    let outcome = (|| -> Result<(), String> {
        let ctx = FieldContext::new(cell.n, None).map_err(|e| e.to_string())?;
        // small factor bases on some curves admit no plant at all
        let mut attempt = 0;
        let inst = loop {
            let curve = CurveParams::random(ctx, r.curve_seed);
            match generate_instance(&curve, cell.m, cell.n_prime, InstanceMode::Planted, instance_seed) {
                Err(SystemError::NoPlant(_)) if attempt < MAX_CURVE_DRAWS => {
                    attempt += 1;
                    r.curve_seed = r.curve_seed.wrapping_add(1);
                }
                other => break other.map_err(|e| e.to_string())?,
            }
        };
        let variant = SystemVariant::build(cell.variant, &inst).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let sys = variant.descend(&inst, Exec::Sequential).map_err(|e| e.to_string())?;
        r.nvars = sys.nvars();
        r.equations = sys.equations().len();
        let report = solve(&sys, &cell.solve_config(variant.fb_bits()));
        r.time_s = start.elapsed().as_secs_f64();
        let report = report.map_err(|e| e.to_string())?;
        r.status = Some(report.status);
        r.max_step_degree = report.max_step_degree();
        r.peak_mem_estimate = report.stats.peak_mem_estimate;
        r.verified = report.solutions.iter().any(|a| variant.decode(&inst, a).is_some());
        Ok(())
    })();
    r.error = outcome.err();
    r
}

/// Runs `trials` planted instances per cell, each on a fresh random curve.
/// Cells run concurrently on `jobs` workers; trials within a cell run in
/// order. Rows come back in cell order and depend only on `seed`.
pub fn run_bench(cells: &[BenchCell], trials: usize, seed: u64, jobs: Option<usize>, exec: Exec) -> Vec<BenchRow> {
    exec.install(jobs, || {
        exec.map(cells, |cell| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ cell.key());
            let results = (0..trials.max(1)).map(|_| run_trial(cell, rng.gen(), rng.gen())).collect();
            BenchRow::from_results(cell.clone(), results)
        })
    })
}

pub fn bench_csv(rows: &[BenchRow]) -> Result<String, HarnessError> {
    let csv_err = |e: csv::Error| HarnessError::Csv(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "schema_version",
        "n",
        "m",
        "n_prime",
        "variant",
        "backend",
        "degree_cap",
        "partial_merge",
        "trials",
        "solved",
        "verified",
        "inconsistent",
        "timeout",
        "cap_exceeded",
        "errors",
        "max_time_s",
        "max_D",
        "max_mem_estimate_bytes",
        "nvars",
        "equations",
    ])
    .map_err(csv_err)?;
    for r in rows {
        let c = &r.cell;
        w.write_record([
            SCHEMA_VERSION.to_string(),
            c.n.to_string(),
            c.m.to_string(),
            c.n_prime.to_string(),
            c.variant.to_string(),
            c.backend.to_string(),
            c.degree_cap.map_or_else(String::new, |d| d.to_string()),
            c.partial_merge.to_string(),
            r.trials.to_string(),
            r.solved.to_string(),
            r.verified.to_string(),
            r.inconsistent.to_string(),
            r.timeout.to_string(),
            r.cap_exceeded.to_string(),
            r.errors.to_string(),
            format!("{:.3}", r.max_time_s),
            r.max_d.to_string(),
            r.max_mem_estimate.to_string(),
            r.nvars.to_string(),
            r.equations.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn bench_json(rows: &[BenchRow]) -> serde_json::Value {
    serde_json::json!({ "schema_version": SCHEMA_VERSION, "rows": rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::verify_decomposition;

    fn instance(n: u32, m: usize, np: usize, mode: InstanceMode, seed: u64) -> PdpInstance {
        let curve = CurveParams::random(FieldContext::new(n, None).unwrap(), seed);
        generate_instance(&curve, m, np, mode, seed).unwrap()
    }

    // Independent oracle: all ordered m-tuples, deduplicated as multisets.
    fn naive(inst: &PdpInstance) -> Vec<Vec<FieldElement>> {
        let fb = inst.factor_base().unwrap();
        let pts = fb.members();
        let mut out = std::collections::BTreeSet::new();
        let mut idx = vec![0usize; inst.m];
        'outer: loop {
            let chosen: Vec<Point> = idx.iter().map(|&i| pts[i]).collect();
            if verify_decomposition(inst, &chosen) {
                out.insert(x_multiset(&chosen).iter().map(|x| x.bits()).collect::<Vec<_>>());
            }
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot < pts.len() {
                    continue 'outer;
                }
                *slot = 0;
            }
            break;
        }
        let ctx = inst.curve.field();
        out.into_iter().map(|v| v.into_iter().map(|b| ctx.element_truncated(b)).collect()).collect()
    }

    fn oracle_xs(inst: &PdpInstance) -> Vec<Vec<FieldElement>> {
        let mut v: Vec<Vec<FieldElement>> =
            brute_force_pdp(inst, Exec::Parallel).unwrap().iter().map(|d| x_multiset(d)).collect();
        v.sort_by_key(|xs| xs.iter().map(|x| x.bits()).collect::<Vec<_>>());
        v.dedup();
        v
    }

    #[test]
    fn planted_decomposition_is_found() {
        for (n, m, seed) in [(7, 2, 1), (9, 3, 2), (11, 3, 3)] {
            let inst = instance(n, m, n as usize / m, InstanceMode::Planted, seed);
            let plant = x_multiset(inst.planted.as_ref().unwrap());
            let found = brute_force_pdp(&inst, Exec::Sequential).unwrap();
            assert!(found.iter().all(|d| verify_decomposition(&inst, d)));
            assert!(found.iter().any(|d| x_multiset(d) == plant), "n={n} m={m}");
        }
    }

    #[test]
    fn matches_naive_enumeration() {
        for seed in 0..6 {
            for (n, m, np) in [(7, 2, 3), (7, 3, 2), (9, 2, 4)] {
                let inst = instance(n, m, np, InstanceMode::Random, seed);
                assert_eq!(oracle_xs(&inst), naive(&inst), "n={n} m={m} seed={seed}");
            }
        }
    }

    #[test]
    fn undecomposable_target_yields_nothing() {
        let found = (0..40)
            .map(|seed| instance(7, 2, 3, InstanceMode::Random, seed))
            .find(|inst| brute_force_pdp(inst, Exec::Sequential).unwrap().is_empty());
        let inst = found.expect("some random target has no decomposition");
        // no root of S_3(x1, x2, x_R) over the subspace either
        let xr = inst.target.x().unwrap();
        let ctx = inst.curve.field();
        let s3 = crate::semaev::s3(&inst.curve, "x1", "x2", "xr").unwrap();
        for a in 0..8 {
            for b in 0..8 {
                let vals = [ctx.element_truncated(a), ctx.element_truncated(b), xr];
                let lifts_ok = vals[..2].iter().all(|&x| !inst.curve.lift_x(x).unwrap_or_default().is_empty());
                assert!(!(lifts_ok && s3.evaluate(&vals).unwrap().is_zero()), "root at {a},{b}");
            }
        }
    }

    #[test]
    fn guard_rejects_large_searches() {
        let inst = instance(17, 5, 17, InstanceMode::Random, 0);
        assert!(matches!(brute_force_pdp(&inst, Exec::Sequential), Err(HarnessError::TooLarge(_))));
    }

    fn cell(n: u32, m: usize, variant: VariantKind, backend: Backend) -> BenchCell {
        BenchCell {
            n,
            m,
            n_prime: n as usize / m,
            variant,
            backend,
            degree_cap: None,
            partial_merge: false,
            timeout_s: Some(60.0),
        }
    }

    #[test]
    fn bench_is_deterministic_and_ordered() {
        let cells = [
            cell(9, 3, VariantKind::Split2, Backend::Groebner),
            cell(7, 2, VariantKind::Classic, Backend::Sat),
            cell(9, 3, VariantKind::Classic, Backend::Linearize),
        ];
        let a = run_bench(&cells, 2, 7, Some(2), Exec::Parallel);
        let b = run_bench(&cells, 2, 7, None, Exec::Sequential);
        assert_eq!(a.len(), 3);
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.cell, rb.cell);
            let seeds = |r: &BenchRow| r.results.iter().map(|t| (t.curve_seed, t.instance_seed)).collect::<Vec<_>>();
            assert_eq!(seeds(ra), seeds(rb));
            assert_eq!(ra.solved, ra.trials, "{:?}", ra.results);
            assert_eq!(ra.verified, ra.trials);
            assert_eq!(ra.max_d, rb.max_d);
        }
        let csv = bench_csv(&a).unwrap();
        assert!(csv.starts_with("schema_version,n,m,n_prime,variant,backend,"));
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(1).unwrap().starts_with("1,9,3,3,split2,groebner,,false,2,2,2,"));
        assert_eq!(bench_json(&a)["rows"].as_array().unwrap().len(), 3);
    }
}
