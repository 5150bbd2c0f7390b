//! Polynomials over the boolean ring `F_2[x_0..x_{N-1}] / (x_i^2 + x_i)`.
//!
//! Monomials are variable sets stored as fixed-width bitsets, so every
//! polynomial is squarefree by construction. Terms are kept sorted in
//! descending grevlex order with variable 0 the largest.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported number of boolean variables.
pub const MAX_VARS: usize = 256;
const WORDS: usize = MAX_VARS / 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoolError {
    #[error("polynomials live over universes of {0} and {1} variables")]
    UniverseMismatch(usize, usize),
    #[error("universe of {0} variables exceeds the limit of {MAX_VARS}")]
    TooManyVariables(usize),
    #[error("variable index {index} outside a universe of {nvars}")]
    VariableOutOfRange { index: usize, nvars: usize },
    #[error("duplicate block name {0:?}")]
    DuplicateBlock(String),
    #[error("cannot parse ANF {0:?}")]
    Parse(String),
}

/// A squarefree monomial, i.e. a set of variable indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BoolMonomial([u64; WORDS]);

impl BoolMonomial {
    pub const ONE: BoolMonomial = BoolMonomial([0; WORDS]);

    pub fn var(i: usize) -> Self {
        let mut m = Self::ONE;
        m.insert(i);
        m
    }

    pub fn from_vars(vars: &[usize]) -> Self {
        let mut m = Self::ONE;
        for &v in vars {
            m.insert(v);
        }
        m
    }

    #[inline]
    pub fn words(&self) -> &[u64; WORDS] {
        &self.0
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    #[inline]
    pub fn is_one(&self) -> bool {
        self.0 == [0; WORDS]
    }

    /// Product in the boolean ring (set union).
    #[inline]
    pub fn mul(&self, other: &Self) -> Self {
        let mut r = *self;
        for (a, b) in r.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
        r
    }

    #[inline]
    pub fn divides(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    /// `self \ other`: the cofactor `t` with `t * other = self` when
    /// `other` divides `self`, chosen disjoint from `other`.
    #[inline]
    pub fn without(&self, other: &Self) -> Self {
        let mut r = *self;
        for (a, b) in r.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
        r
    }

    #[inline]
    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == 0)
    }

    /// Highest variable index in the monomial.
    pub fn max_var(&self) -> Option<usize> {
        (0..WORDS).rev().find(|&w| self.0[w] != 0).map(|w| w * 64 + 63 - self.0[w].leading_zeros() as usize)
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        (0..WORDS).flat_map(move |w| {
            let mut bits = self.0[w];
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let t = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(w * 64 + t)
                }
            })
        })
    }

    /// True when every variable of the monomial is set in `a`.
    #[inline]
    pub fn evaluate(&self, a: &Assignment) -> bool {
        self.divides(&a.0)
    }
}

impl Ord for BoolMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for w in (0..WORDS).rev() {
                let x = self.0[w] ^ other.0[w];
                if x != 0 {
                    let bit = 63 - x.leading_zeros();
                    return if self.0[w] >> bit & 1 == 1 { Ordering::Less } else { Ordering::Greater };
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for BoolMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BoolMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let names: Vec<String> = self.vars().map(|v| format!("x{v}")).collect();
        f.write_str(&names.join("*"))
    }
}

/// A point of `F_2^N`, used both for evaluation and for reported solutions.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Assignment(BoolMonomial);

impl Assignment {
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut a = Self::default();
        for (i, &b) in bits.iter().enumerate() {
            a.set(i, b);
        }
        a
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.0.contains(i)
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        if value {
            self.0.insert(i)
        } else {
            self.0.remove(i)
        }
    }

    pub fn to_bits(&self, nvars: usize) -> Vec<bool> {
        (0..nvars).map(|i| self.get(i)).collect()
    }

    /// Bits `offset..offset+len` packed little-endian into an integer.
    pub fn extract(&self, offset: usize, len: usize) -> u64 {
        (0..len).fold(0, |acc, j| acc | (self.get(offset + j) as u64) << j)
    }

    pub fn to_bit_string(&self, nvars: usize) -> String {
        (0..nvars).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }

    pub fn parse_bit_string(s: &str) -> Option<Self> {
        let mut a = Self::default();
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' if i < MAX_VARS => a.set(i, true),
                _ => return None,
            }
        }
        Some(a)
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.0.max_var().map_or(0, |v| v + 1);
        write!(f, "Assignment({})", self.to_bit_string(n))
    }
}

/// A polynomial over the boolean ring with `nvars` variables.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BoolPoly {
    nvars: usize,
    terms: Vec<BoolMonomial>,
}

/// Sorts descending and cancels repeated monomials in pairs.
pub(crate) fn canonicalize(terms: &mut Vec<BoolMonomial>) {
    terms.sort_unstable_by(|a, b| b.cmp(a));
    let mut out = 0;
    let mut i = 0;
    while i < terms.len() {
        let mut j = i + 1;
        while j < terms.len() && terms[j] == terms[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            terms[out] = terms[i];
            out += 1;
        }
        i = j;
    }
    terms.truncate(out);
}

impl BoolPoly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: Vec::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self { nvars, terms: vec![BoolMonomial::ONE] }
    }

    pub fn constant(nvars: usize, c: bool) -> Self {
        if c {
            Self::one(nvars)
        } else {
            Self::zero(nvars)
        }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        debug_assert!(i < nvars);
        Self { nvars, terms: vec![BoolMonomial::var(i)] }
    }

    /// Builds a polynomial from arbitrary terms; repeated monomials cancel.
    pub fn from_terms(nvars: usize, mut terms: Vec<BoolMonomial>) -> Result<Self, BoolError> {
        if nvars > MAX_VARS {
            return Err(BoolError::TooManyVariables(nvars));
        }
        for t in &terms {
            if let Some(v) = t.max_var().filter(|&v| v >= nvars) {
                return Err(BoolError::VariableOutOfRange { index: v, nvars });
            }
        }
        canonicalize(&mut terms);
        Ok(Self { nvars, terms })
    }

    /// Wraps terms already sorted descending without repeats.
    pub(crate) fn from_sorted_unchecked(nvars: usize, terms: Vec<BoolMonomial>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0] > w[1]));
        Self { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Terms in descending grevlex order.
    pub fn terms(&self) -> &[BoolMonomial] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<BoolMonomial> {
        self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].is_one()
    }

    pub fn leading_monomial(&self) -> Option<&BoolMonomial> {
        self.terms.first()
    }

    /// Largest monomial degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        // The leading term has maximal degree under a graded order.
        self.terms.first().map(|m| m.degree())
    }

    pub fn has_constant_term(&self) -> bool {
        self.terms.last().is_some_and(|m| m.is_one())
    }

    /// Variables occurring in the polynomial.
    pub fn support(&self) -> BoolMonomial {
        self.terms.iter().fold(BoolMonomial::ONE, |acc, m| acc.mul(m))
    }

    fn check_universe(&self, other: &Self) -> Result<(), BoolError> {
        if self.nvars == other.nvars {
            Ok(())
        } else {
            Err(BoolError::UniverseMismatch(self.nvars, other.nvars))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, BoolError> {
        self.check_universe(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, BoolError> {
        self.check_universe(other)?;
        Ok(self.mul_unchecked(other))
    }

    /// Sorted merge with cancellation.
    pub(crate) fn add_unchecked(&self, other: &Self) -> Self {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Ordering::Greater => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Self { nvars: self.nvars, terms: out }
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.nvars);
        }
        if other.is_one() {
            return self.clone();
        }
        if self.is_one() {
            return other.clone();
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.mul(b));
            }
        }
        canonicalize(&mut terms);
        Self { nvars: self.nvars, terms }
    }

    /// Product with a single monomial.
    pub fn mul_monomial(&self, t: &BoolMonomial) -> Self {
        if t.is_one() {
            return self.clone();
        }
        let mut terms: Vec<BoolMonomial> = self.terms.iter().map(|m| m.mul(t)).collect();
        canonicalize(&mut terms);
        Self { nvars: self.nvars, terms }
    }

    pub fn evaluate(&self, a: &Assignment) -> bool {
        self.terms.iter().filter(|m| m.evaluate(a)).count() % 2 == 1
    }

    /// Substitutes `x_var = value` and renormalizes.
    pub fn fix(&self, var: usize, value: bool) -> Self {
        let mut terms: Vec<BoolMonomial> = Vec::with_capacity(self.terms.len());
        for m in &self.terms {
            if m.contains(var) {
                if value {
                    let mut r = *m;
                    r.remove(var);
                    terms.push(r);
                }
            } else {
                terms.push(*m);
            }
        }
        canonicalize(&mut terms);
        Self { nvars: self.nvars, terms }
    }

    /// Formats in ANF using the universe's block variable names.
    pub fn to_anf(&self, universe: &VarUniverse) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|m| {
                if m.is_one() {
                    "1".to_string()
                } else {
                    m.vars().map(|v| universe.var_name(v)).collect::<Vec<_>>().join("*")
                }
            })
            .collect();
        parts.join(" + ")
    }

    pub fn parse_anf(s: &str, universe: &VarUniverse) -> Result<Self, BoolError> {
        let err = || BoolError::Parse(s.to_string());
        let s = s.trim();
        if s == "0" {
            return Ok(Self::zero(universe.nvars()));
        }
        let mut terms = Vec::new();
        for term in s.split('+') {
            let term = term.trim();
            if term == "1" {
                terms.push(BoolMonomial::ONE);
                continue;
            }
            let mut m = BoolMonomial::ONE;
            for factor in term.split('*') {
                m.insert(universe.parse_var(factor.trim()).ok_or_else(err)?);
            }
            terms.push(m);
        }
        Self::from_terms(universe.nvars(), terms)
    }
}

impl fmt::Debug for BoolPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|m| format!("{m:?}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// One field-level variable expanded into `dim` consecutive boolean variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub dim: usize,
    pub offset: usize,
}

/// The boolean variable universe, partitioned into named blocks.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VarUniverse {
    blocks: Vec<Block>,
}

impl VarUniverse {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a block and returns its index.
    pub fn add_block(&mut self, name: &str, dim: usize) -> Result<usize, BoolError> {
        if self.block(name).is_some() {
            return Err(BoolError::DuplicateBlock(name.to_string()));
        }
        let offset = self.nvars();
        if offset + dim > MAX_VARS {
            return Err(BoolError::TooManyVariables(offset + dim));
        }
        self.blocks.push(Block { name: name.to_string(), dim, offset });
        Ok(self.blocks.len() - 1)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn block_index(&self, name: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.name == name)
    }

    pub fn nvars(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.offset + b.dim)
    }

    /// Block index and coordinate of a variable.
    pub fn locate(&self, var: usize) -> Option<(usize, usize)> {
        self.blocks
            .iter()
            .position(|b| var >= b.offset && var < b.offset + b.dim)
            .map(|i| (i, var - self.blocks[i].offset))
    }

    /// `b<block>_<j>`.
    pub fn var_name(&self, var: usize) -> String {
        match self.locate(var) {
            Some((b, j)) => format!("b{b}_{j}"),
            None => format!("v{var}"),
        }
    }

    pub fn parse_var(&self, name: &str) -> Option<usize> {
        let (b, j) = name.strip_prefix('b')?.split_once('_')?;
        let block = self.blocks.get(b.parse::<usize>().ok()?)?;
        let j: usize = j.parse().ok()?;
        (j < block.dim).then_some(block.offset + j)
    }

    /// Header comment lines describing the blocks.
    pub fn header(&self) -> String {
        let mut s = String::from("# variables are b<block>_<j>; block k lists below in order\n");
        for b in &self.blocks {
            s.push_str(&format!("#block {} dim={} offset={}\n", b.name, b.dim, b.offset));
        }
        s
    }

    /// Rebuilds a universe from `#block` header lines, ignoring other lines.
    pub fn parse_header(text: &str) -> Result<Self, BoolError> {
        let mut u = Self::new();
        for line in text.lines() {
            let Some(rest) = line.trim().strip_prefix("#block ") else { continue };
            let err = || BoolError::Parse(line.to_string());
            let mut it = rest.split_whitespace();
            let name = it.next().ok_or_else(err)?;
            let dim = it.next().and_then(|d| d.strip_prefix("dim=")).and_then(|d| d.parse().ok()).ok_or_else(err)?;
            let offset: usize =
                it.next().and_then(|d| d.strip_prefix("offset=")).and_then(|d| d.parse().ok()).ok_or_else(err)?;
            if offset != u.nvars() {
                return Err(err());
            }
            u.add_block(name, dim)?;
        }
        Ok(u)
    }
}
