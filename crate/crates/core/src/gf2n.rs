//! Arithmetic in `F_{2^n} = F_2[s]/(f(s))` for `2 <= n <= 64`.
//!
//! Elements are stored in polynomial basis as a single `u64` (bit `j` is the
//! coefficient of `s^j`). Every element carries its [`FieldContext`], so
//! mixing elements of different fields is detected by the checked
//! operations (`try_add`, `try_mul`, ...). The operator impls panic on a
//! mismatch instead.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const MIN_DEGREE: u32 = 2;
pub const MAX_DEGREE: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("extension degree {0} outside supported range 2..=64")]
    UnsupportedDegree(u32),
    #[error("modulus has degree {got}, expected {expected}")]
    DegreeMismatch { expected: u32, got: u32 },
    #[error("modulus {0} is reducible over F_2")]
    NotIrreducible(String),
    #[error("elements belong to different fields")]
    ContextMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("half trace requires odd extension degree")]
    EvenDegree,
    #[error("cannot parse {what}: {input:?}")]
    Parse { what: &'static str, input: String },
}

/// A binary field `F_2[s]/(f)`. `tail` holds `f - s^n` (the bits below `n`).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldContext {
    degree: u32,
    tail: u64,
}

/// Element of a binary field in polynomial basis.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    bits: u64,
    ctx: FieldContext,
}

// ---------------------------------------------------------------------------
// F_2[s] helpers on u128 words.

fn poly_degree(p: u128) -> i32 {
    127 - p.leading_zeros() as i32
}

fn clmul(a: u64, b: u64) -> u128 {
    let mut acc = 0u128;
    let wide = b as u128;
    let mut a = a;
    while a != 0 {
        let i = a.trailing_zeros();
        acc ^= wide << i;
        a &= a - 1;
    }
    acc
}

fn poly_mod(mut a: u128, m: u128) -> u128 {
    let dm = poly_degree(m);
    loop {
        let da = poly_degree(a);
        if da < dm {
            return a;
        }
        a ^= m << (da - dm);
    }
}

fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = poly_mod(a, b);
        a = b;
        b = r;
    }
    a
}

/// `a * b mod m` for reduced operands of a modulus with degree <= 64.
fn poly_mulmod(a: u128, b: u128, m: u128) -> u128 {
    debug_assert!(a >> 64 == 0 && b >> 64 == 0);
    poly_mod(clmul(a as u64, b as u64), m)
}

fn is_irreducible(n: u32, modulus: u128) -> bool {
    // s^(2^k) mod f for k = 1..=n, then gcd checks at n/p for primes p | n.
    let s = 2u128;
    let mut frob = Vec::with_capacity(n as usize + 1);
    let mut cur = poly_mod(s, modulus);
    frob.push(cur);
    for _ in 0..n {
        cur = poly_mulmod(cur, cur, modulus);
        frob.push(cur);
    }
    // frob[k] = s^(2^k)
    if frob[n as usize] != poly_mod(s, modulus) {
        return false;
    }
    for p in prime_divisors(n) {
        let k = (n / p) as usize;
        let g = poly_gcd(modulus, frob[k] ^ poly_mod(s, modulus));
        if g != 1 {
            return false;
        }
    }
    true
}

fn prime_divisors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// ---------------------------------------------------------------------------

impl FieldContext {
    /// Builds a field of degree `n`. Without a modulus the lexicographically
    /// smallest irreducible polynomial of degree `n` is used.
    pub fn new(n: u32, modulus: Option<u128>) -> Result<Self, FieldError> {
        if !(MIN_DEGREE..=MAX_DEGREE).contains(&n) {
            return Err(FieldError::UnsupportedDegree(n));
        }
        match modulus {
            Some(m) => {
                let got = poly_degree(m);
                if got != n as i32 {
                    return Err(FieldError::DegreeMismatch { expected: n, got: got.max(0) as u32 });
                }
                if !is_irreducible(n, m) {
                    return Err(FieldError::NotIrreducible(format_poly(m)));
                }
                Ok(Self::from_modulus_unchecked(n, m))
            }
            None => {
                let top = 1u128 << n;
                // constant term must be 1 for irreducibility
                let mut tail = 1u128;
                loop {
                    let m = top | tail;
                    if is_irreducible(n, m) {
                        return Ok(Self::from_modulus_unchecked(n, m));
                    }
                    tail += 2;
                }
            }
        }
    }

    fn from_modulus_unchecked(n: u32, m: u128) -> Self {
        Self { degree: n, tail: (m & ((1u128 << n) - 1)) as u64 }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// The full modulus including the leading `s^n` term.
    pub fn modulus(&self) -> u128 {
        (1u128 << self.degree) | self.tail as u128
    }

    pub fn order(&self) -> u128 {
        1u128 << self.degree
    }

    fn mask(&self) -> u64 {
        if self.degree == 64 {
            u64::MAX
        } else {
            (1u64 << self.degree) - 1
        }
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { bits: 0, ctx: *self }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement { bits: 1, ctx: *self }
    }

    /// The generator `s` of the polynomial basis.
    pub fn gen(&self) -> FieldElement {
        FieldElement { bits: 2, ctx: *self }
    }

    /// Element from its coefficient bits; bits at positions `>= n` are rejected.
    pub fn element(&self, bits: u64) -> Result<FieldElement, FieldError> {
        if bits & !self.mask() != 0 {
            return Err(FieldError::Parse { what: "field element", input: format!("{bits:#x}") });
        }
        Ok(FieldElement { bits, ctx: *self })
    }

    /// Element from bits, silently truncated to `n` bits.
    pub fn element_truncated(&self, bits: u64) -> FieldElement {
        FieldElement { bits: bits & self.mask(), ctx: *self }
    }

    /// Uniform element, reproducible from `seed`.
    pub fn random_element(&self, seed: u64) -> FieldElement {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample(&mut rng)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        self.element_truncated(rng.gen::<u64>())
    }

    /// Iterates over all `2^n` elements in increasing bit order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        let ctx = *self;
        (0..self.order()).map(move |b| ctx.element_truncated(b as u64))
    }

    fn reduce(&self, wide: u128) -> u64 {
        let n = self.degree as i32;
        let m = self.modulus();
        let mut a = wide;
        let mut d = poly_degree(a);
        while d >= n {
            a ^= m << (d - n);
            d = poly_degree(a);
        }
        a as u64
    }

    /// Parses a hex element (optional `0x` prefix).
    pub fn parse_element(&self, s: &str) -> Result<FieldElement, FieldError> {
        let t = s.trim();
        let t = t.strip_prefix("0x").unwrap_or(t);
        let bits = u64::from_str_radix(t, 16)
            .map_err(|_| FieldError::Parse { what: "field element", input: s.to_string() })?;
        self.element(bits)
    }

    /// Solver for `z^2 + z = c` that works for every `n`.
    pub fn artin_schreier(&self) -> ArtinSchreier {
        ArtinSchreier::new(*self)
    }
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}; {})", self.degree, format_poly(self.modulus()))
    }
}

impl fmt::Display for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_poly(self.modulus()))
    }
}

/// Formats a polynomial over F_2 as `s^4+s+1`.
pub fn format_poly(p: u128) -> String {
    if p == 0 {
        return "0".into();
    }
    let mut parts = Vec::new();
    for i in (0..128).rev() {
        if p >> i & 1 == 1 {
            parts.push(match i {
                0 => "1".to_string(),
                1 => "s".to_string(),
                _ => format!("s^{i}"),
            });
        }
    }
    parts.join("+")
}

/// Parses `s^4+s+1` (also accepts `x` as the indeterminate).
pub fn parse_poly(s: &str) -> Result<u128, FieldError> {
    let err = || FieldError::Parse { what: "polynomial", input: s.to_string() };
    let mut p = 0u128;
    for term in s.split('+') {
        let term = term.trim();
        let exp: u32 = match term {
            "1" => 0,
            "s" | "x" => 1,
            "0" => continue,
            _ => {
                let rest = term.strip_prefix("s^").or_else(|| term.strip_prefix("x^")).ok_or_else(err)?;
                rest.parse().map_err(|_| err())?
            }
        };
        if exp >= 128 {
            return Err(err());
        }
        p ^= 1u128 << exp;
    }
    Ok(p)
}

impl FieldElement {
    pub fn context(&self) -> FieldContext {
        self.ctx
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn is_one(&self) -> bool {
        self.bits == 1
    }

    /// Coefficient of `s^j`.
    pub fn coeff(&self, j: u32) -> bool {
        j < 64 && self.bits >> j & 1 == 1
    }

    fn check(&self, other: &Self) -> Result<(), FieldError> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(FieldError::ContextMismatch)
        }
    }

    pub fn try_add(self, other: Self) -> Result<Self, FieldError> {
        self.check(&other)?;
        Ok(Self { bits: self.bits ^ other.bits, ctx: self.ctx })
    }

    pub fn try_mul(self, other: Self) -> Result<Self, FieldError> {
        self.check(&other)?;
        Ok(self.mul_same(other))
    }

    pub fn try_div(self, other: Self) -> Result<Self, FieldError> {
        self.check(&other)?;
        Ok(self.mul_same(other.inv()?))
    }

    #[inline]
    fn mul_same(self, other: Self) -> Self {
        Self { bits: self.ctx.reduce(clmul(self.bits, other.bits)), ctx: self.ctx }
    }

    pub fn square(self) -> Self {
        self.mul_same(self)
    }

    pub fn pow(self, mut k: u128) -> Self {
        let mut base = self;
        let mut acc = self.ctx.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_same(base);
            }
            base = base.square();
            k >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by the extended Euclidean algorithm over F_2[s].
    pub fn inv(self) -> Result<Self, FieldError> {
        if self.bits == 0 {
            return Err(FieldError::DivisionByZero);
        }
        let m = self.ctx.modulus();
        let (mut r0, mut r1) = (m, self.bits as u128);
        let (mut t0, mut t1) = (0u128, 1u128);
        while r1 != 0 {
            let mut q = 0u128;
            let mut r = r0;
            let d1 = poly_degree(r1);
            loop {
                let dr = poly_degree(r);
                if dr < d1 {
                    break;
                }
                q ^= 1u128 << (dr - d1);
                r ^= r1 << (dr - d1);
            }
            r0 = r1;
            r1 = r;
            let t = t0 ^ poly_mulmod_raw(q, t1, m);
            t0 = t1;
            t1 = t;
        }
        debug_assert_eq!(r0, 1);
        Ok(Self { bits: poly_mod(t0, m) as u64, ctx: self.ctx })
    }

    /// Absolute trace `sum_{i<n} a^(2^i)`, an element of F_2.
    pub fn trace(self) -> bool {
        let mut acc = self;
        let mut cur = self;
        for _ in 1..self.ctx.degree {
            cur = cur.square();
            acc.bits ^= cur.bits;
        }
        debug_assert!(acc.bits <= 1);
        acc.bits == 1
    }

    /// Half trace `sum_{i=0}^{(n-1)/2} a^(2^(2i))`; solves `z^2 + z = a`
    /// when `n` is odd and `trace(a) = 0`.
    pub fn half_trace(self) -> Result<Self, FieldError> {
        let n = self.ctx.degree;
        if n.is_multiple_of(2) {
            return Err(FieldError::EvenDegree);
        }
        let mut acc = self;
        let mut cur = self;
        for _ in 0..(n - 1) / 2 {
            cur = cur.square().square();
            acc.bits ^= cur.bits;
        }
        Ok(acc)
    }

    /// Square root `a^(2^(n-1))`.
    pub fn sqrt(self) -> Self {
        let mut cur = self;
        for _ in 1..self.ctx.degree {
            cur = cur.square();
        }
        cur
    }

    pub fn to_hex(&self) -> String {
        format!("{:x}", self.bits)
    }
}

// q * t mod m where q, t may exceed 64 bits transiently inside the Euclid loop.
fn poly_mulmod_raw(a: u128, b: u128, m: u128) -> u128 {
    let a = poly_mod(a, m);
    let b = poly_mod(b, m);
    poly_mulmod(a, b, m)
}

impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.try_add(rhs).expect("field context mismatch")
    }
}

impl AddAssign for FieldElement {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(rhs).expect("field context mismatch")
    }
}

impl MulAssign for FieldElement {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.bits)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for FieldContext {
    type Err = FieldError;
    /// Parses a modulus polynomial string; the degree is taken from it.
    fn from_str(s: &str) -> Result<Self, FieldError> {
        let m = parse_poly(s)?;
        let d = poly_degree(m);
        if d < 0 {
            return Err(FieldError::Parse { what: "modulus", input: s.to_string() });
        }
        FieldContext::new(d as u32, Some(m))
    }
}

/// Solves `z^2 + z = c` via the F_2-linear map `z -> z^2 + z`.
///
/// The kernel is `{0, 1}`, so the image is the trace-zero hyperplane and
/// solutions come in pairs `z, z + 1`.
#[derive(Clone, Debug)]
pub struct ArtinSchreier {
    ctx: FieldContext,
    // Reduced rows: (pivot bit of the image, image bits, preimage bits).
    rows: Vec<(u32, u64, u64)>,
}

impl ArtinSchreier {
    fn new(ctx: FieldContext) -> Self {
        let mut rows: Vec<(u32, u64, u64)> = Vec::new();
        for j in 0..ctx.degree {
            let z = ctx.element_truncated(1u64 << j);
            let mut img = (z.square() + z).bits;
            let mut pre = z.bits;
            for &(p, ib, pb) in &rows {
                if img >> p & 1 == 1 {
                    img ^= ib;
                    pre ^= pb;
                }
            }
            if img != 0 {
                let p = 63 - img.leading_zeros();
                // keep rows fully reduced at their pivots
                for r in rows.iter_mut() {
                    if r.1 >> p & 1 == 1 {
                        r.1 ^= img;
                        r.2 ^= pre;
                    }
                }
                rows.push((p, img, pre));
            }
        }
        Self { ctx, rows }
    }

    /// One root of `z^2 + z = c`, or `None` when `trace(c) = 1`.
    pub fn solve(&self, c: FieldElement) -> Option<FieldElement> {
        let mut rem = c.bits;
        let mut pre = 0u64;
        for &(p, ib, pb) in &self.rows {
            if rem >> p & 1 == 1 {
                rem ^= ib;
                pre ^= pb;
            }
        }
        (rem == 0).then(|| self.ctx.element_truncated(pre))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f4() -> FieldContext {
        FieldContext::new(4, Some(0b10011)).unwrap()
    }

    #[test]
    fn contexts() {
        assert!(FieldContext::new(2, Some(0b111)).is_ok());
        assert!(FieldContext::new(4, Some(0b10011)).is_ok());
        assert!(matches!(FieldContext::new(4, Some(0b10101)), Err(FieldError::NotIrreducible(_))));
        assert!(matches!(FieldContext::new(4, Some(0b1011)), Err(FieldError::DegreeMismatch { .. })));
        assert!(matches!(FieldContext::new(1, None), Err(FieldError::UnsupportedDegree(1))));
        assert!(matches!(FieldContext::new(65, None), Err(FieldError::UnsupportedDegree(65))));
        // smallest irreducibles
        assert_eq!(FieldContext::new(2, None).unwrap().modulus(), 0b111);
        assert_eq!(FieldContext::new(4, None).unwrap().modulus(), 0b10011);
        assert_eq!(FieldContext::new(8, None).unwrap().modulus(), 0x11b);
        assert!(FieldContext::new(64, None).is_ok());
    }

    #[test]
    fn irreducible_count_matches_necklace_formula() {
        // number of irreducible degree-n polynomials over F_2
        let expected = [(2, 1), (3, 2), (4, 3), (5, 6), (6, 9), (7, 18), (8, 30)];
        for (n, count) in expected {
            let c = (1u128 << n..1u128 << (n + 1)).filter(|&m| is_irreducible(n, m)).count();
            assert_eq!(c, count, "n = {n}");
        }
    }

    #[test]
    fn small_products() {
        let f2 = FieldContext::new(2, Some(0b111)).unwrap();
        let s = f2.gen();
        assert_eq!((s * s).bits(), 0b11);
        let f = f4();
        let a = f.element(0b1001).unwrap();
        assert!((a * f.gen()).is_one());
        assert_eq!(f.gen().inv().unwrap().bits(), 0b1001);
        assert!(f.one().inv().unwrap().is_one());
        let s = f.gen();
        assert!((s + (s + f.one())).is_one());
        assert_eq!(f.zero().inv(), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn context_mismatch_is_reported() {
        let a = f4().one();
        let b = FieldContext::new(5, None).unwrap().one();
        assert_eq!(a.try_add(b), Err(FieldError::ContextMismatch));
        assert_eq!(a.try_mul(b), Err(FieldError::ContextMismatch));
    }

    #[test]
    fn trace_sqrt_and_half_trace() {
        for n in [5u32, 7, 13, 64] {
            let ctx = FieldContext::new(n, None).unwrap();
            assert!(!ctx.zero().trace());
            for seed in 0..100 {
                let a = ctx.random_element(seed);
                assert_eq!(a.sqrt().square(), a);
                if n % 2 == 1 && !a.trace() {
                    let z = a.half_trace().unwrap();
                    assert_eq!(z.square() + z, a);
                }
            }
        }
        assert_eq!(f4().one().half_trace(), Err(FieldError::EvenDegree));
    }

    #[test]
    fn artin_schreier_all_degrees() {
        for n in 2..=20u32 {
            let ctx = FieldContext::new(n, None).unwrap();
            let solver = ctx.artin_schreier();
            for seed in 0..50 {
                let c = ctx.random_element(seed);
                match solver.solve(c) {
                    Some(z) => assert_eq!(z.square() + z, c),
                    None => assert!(c.trace()),
                }
            }
        }
    }

    #[test]
    fn random_elements_cover_small_field() {
        let ctx = FieldContext::new(2, None).unwrap();
        let mut seen = [false; 4];
        for seed in 0..64 {
            seen[ctx.random_element(seed).bits() as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(ctx.random_element(9), ctx.random_element(9));
    }

    #[test]
    fn random_element_frequencies_within_five_sigma() {
        let ctx = FieldContext::new(8, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let draws = 100_000usize;
        let mut counts = vec![0usize; 256];
        for _ in 0..draws {
            counts[ctx.sample(&mut rng).bits() as usize] += 1;
        }
        let mean = draws as f64 / 256.0;
        let sigma = (draws as f64 * (1.0 / 256.0) * (255.0 / 256.0)).sqrt();
        for c in counts {
            assert!((c as f64 - mean).abs() <= 5.0 * sigma, "count {c}");
        }
    }

    #[test]
    fn field_axioms_random() {
        for n in 2..=20u32 {
            let ctx = FieldContext::new(n, None).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            for _ in 0..10_000 {
                let (a, b, c) = (ctx.sample(&mut rng), ctx.sample(&mut rng), ctx.sample(&mut rng));
                assert_eq!((a * b) * c, a * (b * c));
                assert_eq!(a * (b + c), a * b + a * c);
                assert_eq!(a * b, b * a);
                assert_eq!(a + a, ctx.zero());
            }
            for _ in 0..200 {
                let a = ctx.sample(&mut rng);
                assert_eq!(a.pow(ctx.order()), a);
                if !a.is_zero() {
                    assert_eq!(a.inv().unwrap().inv().unwrap(), a);
                    assert!((a * a.inv().unwrap()).is_one());
                }
            }
        }
    }

    #[test]
    fn text_encodings() {
        let ctx = f4();
        assert_eq!(ctx.to_string(), "s^4+s+1");
        assert_eq!("s^4+s+1".parse::<FieldContext>().unwrap(), ctx);
        let a = ctx.element(0b1001).unwrap();
        assert_eq!(a.to_hex(), "9");
        assert_eq!(ctx.parse_element("0x9").unwrap(), a);
        assert!(ctx.parse_element("1f").is_err());
    }
}
