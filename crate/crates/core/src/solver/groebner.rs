//! Groebner bases over the boolean ring.
//!
//! Pairs are selected by the normal strategy (all pairs of minimal degree
//! at once) and reduced together in one matrix, F4 style: symbolic
//! preprocessing adds a reducer `t * g` for every monomial divisible by a
//! leading monomial, the pair rows are fully reduced against those
//! reducers, and the residue is echelonized. Besides ordinary S-pairs the
//! engine processes field pairs `x_v * g` for `v` in `LM(g)`, which account
//! for `x_v^2 = x_v`. Pair pruning follows Gebauer-Moeller.
//!
//! The degree of a pair is the degree of its lcm (`|LM(g)| + 1` for field
//! pairs); the largest degree processed is the run's step degree `D`.
//!
//! Polynomials are stored as lists of ids into a shared, append-only
//! monomial table, sorted by decreasing monomial. Engines cloned for
//! branching share both the table and the polynomial storage.

use std::sync::{Arc, Mutex};

use rustc_hash::{FxHashMap, FxHashSet};

use super::{extract, Deadline, SolveConfig, SolveError, SolveStats, SolveStatus};
use crate::alloc::live_bytes;
use crate::boolring::{Assignment, BoolMonomial, BoolPoly};
use crate::descent::BoolSystem;
use crate::par::Exec;

#[derive(Debug, Default)]
pub(crate) struct MonoTable {
    monos: Vec<BoolMonomial>,
    index: FxHashMap<BoolMonomial, u32>,
}

impl MonoTable {
    fn intern(&mut self, m: BoolMonomial) -> u32 {
        let next = self.monos.len() as u32;
        let id = *self.index.entry(m).or_insert(next);
        if id == next {
            self.monos.push(m);
        }
        id
    }
}

pub(crate) type SharedTable = Arc<Mutex<MonoTable>>;

pub(crate) fn new_table() -> SharedTable {
    Arc::new(Mutex::new(MonoTable::default()))
}

type Row = Arc<[u32]>;

#[derive(Debug, Clone, Copy)]
enum PairKind {
    Regular(u32, u32),
    Field(u32, u16),
}

#[derive(Debug, Clone, Copy)]
struct Pair {
    lcm: BoolMonomial,
    deg: u32,
    kind: PairKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Done,
    Timeout,
    /// A step's estimated footprint, in bytes, exceeded the memory limit.
    MemoryLimit(u64),
}

/// Rough bytes per interned monomial: the table entry plus its index slot.
const TABLE_BYTES_PER_MONO: u64 = 80;

/// Reducer row in column space: sparse columns, or dense words starting
/// at the word holding the pivot.
enum Reducer {
    Sparse(Vec<u32>),
    Dense { first_word: usize, words: Vec<u64> },
}

/// Incremental Groebner-basis state.
#[derive(Debug, Clone)]
pub(crate) struct Engine {
    nvars: usize,
    table: SharedTable,
    basis: Vec<Row>,
    lms: Vec<BoolMonomial>,
    redundant: Vec<bool>,
    lm_index: FxHashMap<BoolMonomial, u32>,
    /// Bit `d` set when some leading monomial has degree `d`.
    lm_degrees: u64,
    pairs: Vec<Pair>,
    cap: Option<u32>,
    mem_limit: Option<u64>,
    exec: Exec,
    inconsistent: bool,
    pub(crate) stats: SolveStats,
}

impl Engine {
    pub(crate) fn new(nvars: usize, table: SharedTable, cap: Option<u32>, exec: Exec) -> Self {
        Self {
            nvars,
            table,
            basis: Vec::new(),
            lms: Vec::new(),
            redundant: Vec::new(),
            lm_index: FxHashMap::default(),
            lm_degrees: 0,
            pairs: Vec::new(),
            cap,
            mem_limit: None,
            exec,
            inconsistent: false,
            stats: SolveStats::default(),
        }
    }

    pub(crate) fn with_memory_limit(mut self, limit: Option<u64>) -> Self {
        self.mem_limit = limit;
        self
    }

    pub(crate) fn is_inconsistent(&self) -> bool {
        self.inconsistent
    }

    /// True when no pairs were left unprocessed because of the cap.
    pub(crate) fn is_closed(&self) -> bool {
        self.pairs.is_empty()
    }

    fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.basis.len()).filter(|&i| !self.redundant[i])
    }

    pub(crate) fn minimal_len(&self) -> usize {
        self.active().count()
    }

    /// Non-redundant basis elements, in the shared representation.
    pub(crate) fn minimal_rows(&self) -> Vec<Arc<[u32]>> {
        self.active().map(|i| self.basis[i].clone()).collect()
    }

    /// Non-redundant basis elements of degree at most one.
    pub(crate) fn linear_part(&self) -> Vec<BoolPoly> {
        let tab = self.table.lock().expect("table lock");
        self.active().filter(|&i| self.lms[i].degree() <= 1).map(|i| self.to_poly(&tab, &self.basis[i])).collect()
    }

    fn to_poly(&self, tab: &MonoTable, ids: &[u32]) -> BoolPoly {
        BoolPoly::from_sorted_unchecked(self.nvars, ids.iter().map(|&id| tab.monos[id as usize]).collect())
    }

    /// Reduces `polys` against the current basis and adds the results.
    pub(crate) fn add_input(&mut self, polys: &[BoolPoly], deadline: Deadline) -> Outcome {
        let rows: Vec<Vec<u32>> = {
            let mut tab = self.table.lock().expect("table lock");
            polys.iter().filter(|p| !p.is_zero()).map(|p| p.terms().iter().map(|m| tab.intern(*m)).collect()).collect()
        };
        self.add_rows(rows, deadline)
    }

    /// As [`Engine::add_input`], for polynomials already in the table.
    pub(crate) fn add_rows(&mut self, rows: Vec<Vec<u32>>, deadline: Deadline) -> Outcome {
        let rows: Vec<Vec<u32>> = rows.into_iter().filter(|r| !r.is_empty()).collect();
        if rows.is_empty() || self.inconsistent {
            return Outcome::Done;
        }
        match self.step(rows, true, deadline) {
            Err(o) => o,
            Ok(new) => {
                self.insert_all(new);
                Outcome::Done
            }
        }
    }

    /// Processes pairs until none of degree at most the cap remain.
    pub(crate) fn run(&mut self, deadline: Deadline) -> Outcome {
        while !self.inconsistent {
            if deadline.expired() {
                return Outcome::Timeout;
            }
            let cap = self.cap.unwrap_or(u32::MAX);
            let Some(d) = self.pairs.iter().map(|p| p.deg).filter(|&d| d <= cap).min() else {
                break;
            };
            let (selected, rest): (Vec<Pair>, Vec<Pair>) = self.pairs.drain(..).partition(|p| p.deg == d);
            self.pairs = rest;
            self.stats.max_step_degree = self.stats.max_step_degree.max(d);
            self.stats.pairs_processed += selected.len() as u64;
            let rows = self.pair_rows(&selected);
            if rows.is_empty() {
                continue;
            }
            match self.step(rows, true, deadline) {
                Err(o) => return o,
                Ok(new) => self.insert_all(new),
            }
        }
        Outcome::Done
    }

    fn pair_rows(&self, pairs: &[Pair]) -> Vec<Vec<u32>> {
        let mut tab = self.table.lock().expect("table lock");
        let mut seen: FxHashSet<(u32, BoolMonomial)> = FxHashSet::default();
        let mut rows = Vec::new();
        for pair in pairs {
            let mut push = |k: u32, t: BoolMonomial, tab: &mut MonoTable| {
                if seen.insert((k, t)) {
                    let g = &self.basis[k as usize];
                    rows.push(
                        g.iter()
                            .map(|&id| {
                                let prod = tab.monos[id as usize].mul(&t);
                                tab.intern(prod)
                            })
                            .collect(),
                    );
                }
            };
            match pair.kind {
                PairKind::Regular(i, j) => {
                    let r = self.find_reducer(&pair.lcm).map(|r| r as u32);
                    for k in [i, j] {
                        if Some(k) != r {
                            push(k, pair.lcm.without(&self.lms[k as usize]), &mut tab);
                        }
                    }
                }
                PairKind::Field(i, v) => {
                    let g = &self.basis[i as usize];
                    // x_v * g = g when every term already contains x_v
                    if !g.iter().all(|&id| tab.monos[id as usize].contains(v as usize)) {
                        push(i, BoolMonomial::var(v as usize), &mut tab);
                    }
                }
            }
        }
        rows
    }

    /// A basis element whose leading monomial divides `m`, preferring the
    /// largest such leading monomial.
    fn find_reducer(&self, m: &BoolMonomial) -> Option<usize> {
        let vars: Vec<usize> = m.vars().collect();
        let k = vars.len();
        if k > 20 {
            return (0..self.lms.len()).find(|&i| self.lms[i].divides(m));
        }
        for size in (0..=k).rev() {
            if self.lm_degrees >> size & 1 == 0 {
                continue;
            }
            if size == 0 {
                return self.lm_index.get(&BoolMonomial::ONE).map(|&i| i as usize);
            }
            // Gosper's hack over k-bit masks with `size` bits set
            let mut mask: u32 = (1 << size) - 1;
            while mask < 1 << k {
                let mut sub = BoolMonomial::ONE;
                let mut bits = mask;
                while bits != 0 {
                    sub.insert(vars[bits.trailing_zeros() as usize]);
                    bits &= bits - 1;
                }
                if let Some(&i) = self.lm_index.get(&sub) {
                    return Some(i as usize);
                }
                let c = mask & mask.wrapping_neg();
                let r = mask + c;
                mask = (((r ^ mask) >> 2) / c) | r;
            }
        }
        None
    }

    /// One matrix reduction of `rows` (term ids, any order, duplicates
    /// cancel). With `echelonize` the nonzero echelonized residues are
    /// returned; without, one fully reduced residue per input row. Each
    /// result is sorted by decreasing monomial. Stops early on timeout or
    /// when the estimated footprint passes the memory limit.
    fn step(&mut self, rows: Vec<Vec<u32>>, echelonize: bool, deadline: Deadline) -> Result<Vec<Vec<u32>>, Outcome> {
        let table = self.table.clone();
        let mut tab = table.lock().expect("table lock");
        let limit = self.mem_limit;
        let mut reducer_terms = 0u64;

        // symbolic preprocessing
        let mut seen: FxHashSet<u32> = FxHashSet::default();
        let mut reducers: Vec<Vec<u32>> = Vec::new();
        let mut stack: Vec<u32> = rows.iter().flatten().copied().collect();
        let mut ticks = 0u32;
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            ticks += 1;
            if ticks.is_multiple_of(1024) {
                if deadline.expired() {
                    return Err(Outcome::Timeout);
                }
                check_memory(limit, tab.monos.len() as u64 * TABLE_BYTES_PER_MONO + reducer_terms * 4)?;
            }
            let m = tab.monos[id as usize];
            if let Some(g) = self.find_reducer(&m) {
                let t = m.without(&self.lms[g]);
                let g = &self.basis[g];
                let mut r = Vec::with_capacity(g.len());
                r.push(id);
                for &gid in &g[1..] {
                    let prod = tab.monos[gid as usize].mul(&t);
                    let p = tab.intern(prod);
                    if !seen.contains(&p) {
                        stack.push(p);
                    }
                    r.push(p);
                }
                reducer_terms += r.len() as u64;
                reducers.push(r);
            }
        }
        let mut cols: Vec<u32> = seen.into_iter().collect();
        cols.sort_unstable_by(|&a, &b| tab.monos[b as usize].cmp(&tab.monos[a as usize]));
        let mut col_of = vec![u32::MAX; tab.monos.len()];
        for (c, &id) in cols.iter().enumerate() {
            col_of[id as usize] = c as u32;
        }
        let table_bytes = tab.monos.len() as u64 * (TABLE_BYTES_PER_MONO + 4);
        drop(tab);
        let ncols = cols.len();
        let words = ncols.div_ceil(64);
        // reducers as stored below, plus the residues at dense size
        let est = table_bytes
            + reducers.iter().map(|r| (r.len() as u64 * 4).min((words as u64) * 8)).sum::<u64>()
            + (rows.len() * words * 8) as u64;
        check_memory(limit, est)?;
        let col_of = &col_of;
        let to_cols = |ids: &Vec<u32>| -> Vec<u32> {
            let mut c: Vec<u32> = ids.iter().map(|&id| col_of[id as usize]).collect();
            c.sort_unstable();
            let mut out: Vec<u32> = Vec::with_capacity(c.len());
            for x in c {
                if out.last() == Some(&x) {
                    out.pop();
                } else {
                    out.push(x);
                }
            }
            out
        };

        let reducer_rows: Vec<Reducer> = self.exec.map(&reducers, |r| {
            let c = to_cols(r);
            let first_word = c[0] as usize / 64;
            if c.len() * 4 > (words - first_word) * 8 {
                let mut w = vec![0u64; words - first_word];
                for &x in &c {
                    w[x as usize / 64 - first_word] |= 1 << (x % 64);
                }
                Reducer::Dense { first_word, words: w }
            } else {
                Reducer::Sparse(c)
            }
        });
        drop(reducers);
        let mut pivot = vec![u32::MAX; ncols];
        let mut reducer_bytes = 0usize;
        for (i, r) in reducer_rows.iter().enumerate() {
            let lead = match r {
                Reducer::Sparse(c) => {
                    reducer_bytes += c.len() * 4;
                    c[0]
                }
                Reducer::Dense { first_word, words } => {
                    reducer_bytes += words.len() * 8;
                    (first_word * 64) as u32 + words[0].trailing_zeros()
                }
            };
            pivot[lead as usize] = i as u32;
        }

        let pivot = &pivot;
        let reducer_rows = &reducer_rows;
        let residues: Vec<Result<Vec<u32>, Outcome>> = self.exec.map(&rows, |row| {
            if deadline.expired() {
                return Err(Outcome::Timeout);
            }
            check_memory(limit, 0)?;
            let mut dense = vec![0u64; words];
            for &c in &to_cols(row) {
                dense[c as usize / 64] ^= 1 << (c % 64);
            }
            let mut out = Vec::new();
            for w in 0..words {
                let mut x = dense[w];
                while x != 0 {
                    let b = x.trailing_zeros();
                    let col = w * 64 + b as usize;
                    let p = pivot[col];
                    if p == u32::MAX {
                        out.push(col as u32);
                        x &= x - 1;
                    } else {
                        match &reducer_rows[p as usize] {
                            Reducer::Sparse(cs) => {
                                for &c in cs {
                                    dense[c as usize / 64] ^= 1 << (c % 64);
                                }
                            }
                            Reducer::Dense { first_word, words: rw } => {
                                for (d, s) in dense[*first_word..].iter_mut().zip(rw) {
                                    *d ^= s;
                                }
                            }
                        }
                        x = dense[w] & (u64::MAX << b);
                    }
                }
            }
            Ok(out)
        });
        self.stats.reductions += rows.len() as u64;
        let residues: Vec<Vec<u32>> = residues.into_iter().collect::<Result<Vec<_>, _>>()?;
        let mut mem = (reducer_bytes + ncols * 8 + words * 8) as u64;

        let result_cols: Vec<Vec<u32>> = if echelonize {
            let (ech, dense_bytes) = echelonize_sparse(residues, deadline, limit)?;
            mem += dense_bytes;
            ech.into_iter().filter(|r| !r.is_empty()).collect()
        } else {
            residues
        };
        self.stats.peak_mem_estimate = self.stats.peak_mem_estimate.max(mem).max(live_bytes());
        Ok(result_cols.into_iter().map(|r| r.into_iter().map(|c| cols[c as usize]).collect()).collect())
    }

    fn insert_all(&mut self, new: Vec<Vec<u32>>) {
        let mut new: Vec<(BoolMonomial, Vec<u32>)> = {
            let tab = self.table.lock().expect("table lock");
            new.into_iter().map(|r| (tab.monos[r[0] as usize], r)).collect()
        };
        new.sort_by_key(|a| a.0);
        for (lm, h) in new {
            self.insert(lm, h.into());
            if self.inconsistent {
                return;
            }
        }
    }

    /// Adds `h` with leading monomial `lh` and updates the pair set
    /// (Gebauer-Moeller).
    fn insert(&mut self, lh: BoolMonomial, h: Row) {
        let k = self.basis.len() as u32;
        if lh.is_one() {
            self.inconsistent = true;
        }

        // candidate pairs with the active elements: (lcm, i, coprime)
        let mut cand: Vec<(BoolMonomial, u32, bool)> = self
            .active()
            .map(|i| {
                let li = &self.lms[i];
                (li.mul(&lh), i as u32, li.is_disjoint(&lh))
            })
            .collect();

        // chain criterion on the existing regular pairs
        let lms = &self.lms;
        self.pairs.retain(|p| match p.kind {
            PairKind::Field(..) => true,
            PairKind::Regular(i, j) => {
                !(lh.divides(&p.lcm) && lms[i as usize].mul(&lh) != p.lcm && lms[j as usize].mul(&lh) != p.lcm)
            }
        });

        // M: drop candidates whose lcm is a proper multiple of another's
        let lcms: Vec<BoolMonomial> = cand.iter().map(|c| c.0).collect();
        cand.retain(|c| !lcms.iter().any(|l| *l != c.0 && l.divides(&c.0)));
        // F: one candidate per lcm; B: drop the class if any member is coprime
        cand.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut i = 0;
        while i < cand.len() {
            let mut j = i;
            let mut coprime = false;
            while j < cand.len() && cand[j].0 == cand[i].0 {
                coprime |= cand[j].2;
                j += 1;
            }
            if !coprime {
                let lcm = cand[i].0;
                self.pairs.push(Pair { lcm, deg: lcm.degree(), kind: PairKind::Regular(cand[i].1, k) });
            }
            i = j;
        }
        for v in lh.vars() {
            self.pairs.push(Pair { lcm: lh, deg: lh.degree() + 1, kind: PairKind::Field(k, v as u16) });
        }

        for i in 0..k as usize {
            if !self.redundant[i] && lh.divides(&self.lms[i]) {
                self.redundant[i] = true;
            }
        }
        self.lm_index.insert(lh, k);
        self.lm_degrees |= 1 << lh.degree().min(63);
        self.lms.push(lh);
        self.basis.push(h);
        self.redundant.push(false);
    }

    /// The interreduced minimal basis, sorted by increasing leading
    /// monomial. A reduced Groebner basis once an uncapped run is complete.
    pub(crate) fn reduced_basis(&mut self, deadline: Deadline) -> Option<Vec<BoolPoly>> {
        if self.inconsistent {
            return Some(vec![BoolPoly::one(self.nvars)]);
        }
        let minimal = self.minimal_rows();
        let tails: Vec<Vec<u32>> = minimal.iter().map(|g| g[1..].to_vec()).collect();
        let reduced = self.step(tails, false, deadline).ok()?;
        let tab = self.table.lock().expect("table lock");
        let mut out: Vec<BoolPoly> = minimal
            .iter()
            .zip(reduced)
            .map(|(g, mut tail)| {
                tail.insert(0, g[0]);
                self.to_poly(&tab, &tail)
            })
            .collect();
        out.sort_by(|a, b| a.leading_monomial().cmp(&b.leading_monomial()));
        Some(out)
    }
}

/// Reduced row echelon form of sparse rows over their own support columns.
/// Returns the rows (sparse, ascending columns) and the dense matrix size
/// in bytes.
pub(super) fn echelonize_sparse(
    rows: Vec<Vec<u32>>,
    deadline: Deadline,
    mem_limit: Option<u64>,
) -> Result<(Vec<Vec<u32>>, u64), Outcome> {
    let mut support: Vec<u32> = rows.iter().flatten().copied().collect();
    support.sort_unstable();
    support.dedup();
    if support.is_empty() {
        return Ok((Vec::new(), 0));
    }
    let local: FxHashMap<u32, u32> = support.iter().enumerate().map(|(i, &c)| (c, i as u32)).collect();
    let words = support.len().div_ceil(64);
    let mut pivots: Vec<(usize, Vec<u64>)> = Vec::new();
    let lead =
        |r: &[u64]| r.iter().enumerate().find(|(_, &w)| w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize);
    for row in &rows {
        if deadline.expired() {
            return Err(Outcome::Timeout);
        }
        check_memory(mem_limit, (pivots.len() * words * 8) as u64)?;
        let mut dense = vec![0u64; words];
        for c in row {
            let l = local[c] as usize;
            dense[l / 64] ^= 1 << (l % 64);
        }
        for (p, prow) in &pivots {
            if dense[p / 64] >> (p % 64) & 1 == 1 {
                for (a, b) in dense.iter_mut().zip(prow) {
                    *a ^= b;
                }
            }
        }
        if let Some(l) = lead(&dense) {
            for (_, prow) in pivots.iter_mut() {
                if prow[l / 64] >> (l % 64) & 1 == 1 {
                    for (a, b) in prow.iter_mut().zip(&dense) {
                        *a ^= b;
                    }
                }
            }
            pivots.push((l, dense));
        }
    }
    let bytes = (pivots.len() * words * 8) as u64;
    let out = pivots
        .into_iter()
        .map(|(_, d)| {
            let mut cols = Vec::new();
            for (w, &x) in d.iter().enumerate() {
                let mut x = x;
                while x != 0 {
                    cols.push(support[w * 64 + x.trailing_zeros() as usize]);
                    x &= x - 1;
                }
            }
            cols
        })
        .collect();
    Ok((out, bytes))
}

/// Fails when the larger of `estimate` and the live allocation count
/// passes the limit.
fn check_memory(limit: Option<u64>, estimate: u64) -> Result<(), Outcome> {
    match limit {
        Some(limit) if estimate.max(live_bytes()) > limit => Err(Outcome::MemoryLimit(estimate.max(live_bytes()))),
        _ => Ok(()),
    }
}

/// A Groebner basis of `polys` (reduced when no cap is set), for callers
/// outside the solver.
pub fn groebner_basis(nvars: usize, polys: &[BoolPoly], cap: Option<u32>, exec: Exec) -> (Vec<BoolPoly>, SolveStats) {
    let deadline = Deadline::new(None);
    let mut e = Engine::new(nvars, new_table(), cap, exec);
    e.add_input(polys, deadline);
    e.run(deadline);
    let basis = e.reduced_basis(deadline).expect("no deadline");
    e.stats.basis_size = basis.len();
    (basis, e.stats)
}

pub(crate) type BackendResult = Result<(SolveStatus, Vec<Assignment>, SolveStats), SolveError>;

pub(crate) fn groebner_solve(sys: &BoolSystem, cfg: &SolveConfig, deadline: Deadline) -> BackendResult {
    let nvars = sys.nvars();
    let table = new_table();
    let mut stats = SolveStats::default();
    let engine = |cap| Engine::new(nvars, table.clone(), cap, cfg.exec).with_memory_limit(cfg.memory_limit);
    let mut main = engine(cfg.degree_cap);
    let mut outcome = if cfg.partial_merge && sys.groups().len() > 1 {
        let mut union: Vec<Vec<u32>> = Vec::new();
        for g in sys.groups() {
            let mut part = engine(cfg.degree_cap);
            let mut outcome = part.add_input(sys.group_equations(g), deadline);
            if outcome == Outcome::Done {
                outcome = part.run(deadline);
            }
            stats.absorb(&part.stats);
            if outcome != Outcome::Done {
                return stopped(outcome, stats, cfg);
            }
            if part.is_inconsistent() {
                return Ok((SolveStatus::Inconsistent, Vec::new(), stats));
            }
            // a group cut short by the cap contributes its input instead
            if part.is_closed() {
                union.extend(part.minimal_rows().iter().map(|r| r.to_vec()));
            } else {
                let mut tab = table.lock().expect("table lock");
                union.extend(sys.group_equations(g).iter().map(|p| p.terms().iter().map(|m| tab.intern(*m)).collect()));
            }
        }
        main.add_rows(union, deadline)
    } else {
        main.add_input(sys.equations(), deadline)
    };
    if outcome == Outcome::Done {
        outcome = main.run(deadline);
    }
    if outcome != Outcome::Done {
        stats.absorb(&main.stats);
        return stopped(outcome, stats, cfg);
    }
    extract::extract(main, sys, cfg, deadline, stats)
}

/// Maps an unfinished engine run to the solver's result.
pub(super) fn stopped(outcome: Outcome, stats: SolveStats, cfg: &SolveConfig) -> BackendResult {
    match outcome {
        Outcome::MemoryLimit(estimate) => {
            Err(SolveError::MemoryLimit { estimate, limit: cfg.memory_limit.unwrap_or(u64::MAX) })
        }
        _ => Ok((SolveStatus::Timeout, Vec::new(), stats)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolring::VarUniverse;
    use proptest::prelude::*;

    fn poly(n: usize, terms: &[&[usize]]) -> BoolPoly {
        BoolPoly::from_terms(n, terms.iter().map(|t| BoolMonomial::from_vars(t)).collect()).unwrap()
    }

    fn universe(n: usize) -> VarUniverse {
        let mut u = VarUniverse::new();
        u.add_block("x", n).unwrap();
        u
    }

    fn all_solutions(n: usize, polys: &[BoolPoly]) -> Vec<Assignment> {
        (0..1u64 << n)
            .map(|bits| Assignment::from_bits(&(0..n).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>()))
            .filter(|a| polys.iter().all(|p| !p.evaluate(a)))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    #[test]
    fn inconsistent_pair() {
        let (basis, _) = groebner_basis(1, &[poly(1, &[&[0]]), poly(1, &[&[0], &[]])], None, Exec::Sequential);
        assert_eq!(basis, vec![BoolPoly::one(1)]);
    }

    #[test]
    fn unique_solution_from_linear_system() {
        let polys = [poly(2, &[&[0], &[]]), poly(2, &[&[1], &[0]])];
        let sys = BoolSystem::new(universe(2), polys.to_vec()).unwrap();
        let report = crate::solver::solve(&sys, &SolveConfig::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Solved);
        assert_eq!(report.solutions, vec![Assignment::from_bits(&[true, true])]);
        assert!(report.max_step_degree() <= 2);
        let (basis, _) = groebner_basis(2, &polys, None, Exec::Sequential);
        assert_eq!(basis, vec![poly(2, &[&[1], &[]]), poly(2, &[&[0], &[]])]);
    }

    #[test]
    fn reducers_preserve_leading_monomials() {
        // t disjoint from LM(g) keeps t * LM(g) leading even when tails collide
        let g = poly(4, &[&[0, 1], &[1, 2], &[2], &[]]);
        let p = g.mul_monomial(&BoolMonomial::from_vars(&[2, 3]));
        assert_eq!(p.leading_monomial(), Some(&BoolMonomial::from_vars(&[0, 1, 2, 3])));
    }

    #[test]
    fn memory_limit_stops_cleanly() {
        let n = 10;
        let polys: Vec<BoolPoly> = (0..n - 2).map(|i| poly(n, &[&[i, i + 1, i + 2], &[i], &[]])).collect();
        let sys = BoolSystem::new(universe(n), polys).unwrap();
        let cfg = SolveConfig { memory_limit: Some(64), ..SolveConfig::default() };
        let err = crate::solver::solve(&sys, &cfg).unwrap_err();
        assert!(matches!(err, SolveError::MemoryLimit { limit: 64, .. }), "{err}");
        let cfg = SolveConfig { memory_limit: Some(1 << 30), ..cfg };
        assert!(crate::solver::solve(&sys, &cfg).is_ok());
    }

    fn arb_system(n: usize) -> impl Strategy<Value = Vec<BoolPoly>> {
        let term = prop::collection::vec(0..n, 0..4);
        let p = prop::collection::vec(term, 1..6).prop_map(move |ts| {
            BoolPoly::from_terms(n, ts.iter().map(|t| BoolMonomial::from_vars(t)).collect()).unwrap()
        });
        prop::collection::vec(p, 1..8)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn variety_matches_exhaustive_search(polys in arb_system(8)) {
            let n = 8;
            let sys = BoolSystem::new(universe(n), polys.clone()).unwrap();
            let cfg = SolveConfig { enumerate_all: true, exec: Exec::Sequential, ..SolveConfig::default() };
            let report = crate::solver::solve(&sys, &cfg).unwrap();
            let expected = all_solutions(n, &polys);
            prop_assert_eq!(&report.solutions, &expected);
            let (basis, _) = groebner_basis(n, &polys, None, Exec::Sequential);
            prop_assert_eq!(all_solutions(n, &basis), expected);
        }

        #[test]
        fn capped_runs_stay_sound(polys in arb_system(8)) {
            let n = 8;
            let sys = BoolSystem::new(universe(n), polys.clone()).unwrap();
            let cfg = SolveConfig { enumerate_all: true, degree_cap: Some(2), exec: Exec::Sequential, ..SolveConfig::default() };
            let report = crate::solver::solve(&sys, &cfg).unwrap();
            prop_assert_eq!(report.solutions, all_solutions(n, &polys));
        }

        #[test]
        fn sequential_and_parallel_agree(polys in arb_system(10)) {
            let (a, _) = groebner_basis(10, &polys, None, Exec::Sequential);
            let (b, _) = groebner_basis(10, &polys, None, Exec::Parallel);
            prop_assert_eq!(a, b);
        }
    }
}
