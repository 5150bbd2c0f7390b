//! Ordinary binary curves `y^2 + xy = x^3 + a x^2 + b` in affine coordinates.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gf2n::{ArtinSchreier, FieldContext, FieldElement, FieldError};

/// Largest degree accepted by [`CurveParams::enumerate_points`].
pub const MAX_ENUMERATION_DEGREE: u32 = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error("b = 0 gives a singular curve")]
    Singular,
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("enumeration limited to n <= {MAX_ENUMERATION_DEGREE}, got {0}")]
    TooLarge(u32),
    #[error("half-trace lifting requires odd n")]
    OddDegreeRequired,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("cannot parse {what}: {input:?}")]
    Parse { what: &'static str, input: String },
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum Point {
    Infinity,
    Affine { x: FieldElement, y: FieldElement },
}

impl Point {
    pub fn x(&self) -> Option<FieldElement> {
        match self {
            Point::Infinity => None,
            Point::Affine { x, .. } => Some(*x),
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    /// `-(x, y) = (x, x + y)`.
    pub fn neg(&self) -> Point {
        match *self {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => Point::Affine { x, y: x + y },
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Infinity => f.write_str("inf"),
            Point::Affine { x, y } => write!(f, "({x},{y})"),
        }
    }
}

/// How `z^2 + z = c` is solved when lifting x-coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadraticSolver {
    /// Half trace; only valid for odd `n`.
    HalfTrace,
    /// Half trace for odd `n`, linear algebra otherwise.
    #[default]
    Auto,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct CurveParams {
    ctx: FieldContext,
    a: FieldElement,
    b: FieldElement,
}

impl fmt::Debug for CurveParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for CurveParams {
    /// `n;modulus;a;b`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};{};{};{}", self.ctx.degree(), self.ctx, self.a, self.b)
    }
}

impl std::str::FromStr for CurveParams {
    type Err = CurveError;
    fn from_str(s: &str) -> Result<Self, CurveError> {
        let err = || CurveError::Parse { what: "curve", input: s.to_string() };
        let parts: Vec<&str> = s.trim().split(';').collect();
        if parts.len() != 4 {
            return Err(err());
        }
        let n: u32 = parts[0].trim().parse().map_err(|_| err())?;
        let m = crate::gf2n::parse_poly(parts[1])?;
        let ctx = FieldContext::new(n, Some(m))?;
        let a = ctx.parse_element(parts[2])?;
        let b = ctx.parse_element(parts[3])?;
        CurveParams::new(a, b)
    }
}

impl CurveParams {
    pub fn new(a: FieldElement, b: FieldElement) -> Result<Self, CurveError> {
        if a.context() != b.context() {
            return Err(FieldError::ContextMismatch.into());
        }
        if b.is_zero() {
            return Err(CurveError::Singular);
        }
        Ok(Self { ctx: a.context(), a, b })
    }

    /// Random `(a, b)` with `b != 0`, reproducible from `seed`.
    pub fn random(ctx: FieldContext, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = ctx.sample(&mut rng);
        loop {
            let b = ctx.sample(&mut rng);
            if !b.is_zero() {
                return Self { ctx, a, b };
            }
        }
    }

    pub fn field(&self) -> FieldContext {
        self.ctx
    }

    pub fn a(&self) -> FieldElement {
        self.a
    }

    pub fn b(&self) -> FieldElement {
        self.b
    }

    pub fn is_on_curve(&self, p: &Point) -> bool {
        match *p {
            Point::Infinity => true,
            Point::Affine { x, y } => {
                if x.context() != self.ctx || y.context() != self.ctx {
                    return false;
                }
                let x2 = x.square();
                y.square() + x * y == x2 * x + self.a * x2 + self.b
            }
        }
    }

    fn check(&self, p: &Point) -> Result<(), CurveError> {
        if self.is_on_curve(p) {
            Ok(())
        } else {
            Err(CurveError::NotOnCurve)
        }
    }

    pub fn add(&self, p: &Point, q: &Point) -> Result<Point, CurveError> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.add_unchecked(p, q))
    }

    /// Group law without validating the inputs. Callers must pass points on
    /// this curve.
    pub fn add_unchecked(&self, p: &Point, q: &Point) -> Point {
        let r = match (*p, *q) {
            (Point::Infinity, _) => *q,
            (_, Point::Infinity) => *p,
            (Point::Affine { x: x1, y: y1 }, Point::Affine { x: x2, y: y2 }) => {
                if x1 == x2 {
                    if y2 == x1 + y1 {
                        Point::Infinity
                    } else {
                        self.double_affine(x1, y1)
                    }
                } else {
                    let lambda = (y1 + y2) * (x1 + x2).inv().expect("distinct x");
                    let x3 = lambda.square() + lambda + x1 + x2 + self.a;
                    let y3 = lambda * (x1 + x3) + x3 + y1;
                    Point::Affine { x: x3, y: y3 }
                }
            }
        };
        debug_assert!(self.is_on_curve(&r));
        r
    }

    fn double_affine(&self, x: FieldElement, y: FieldElement) -> Point {
        // x = 0 is the 2-torsion point and was handled as P + (-P) above.
        let lambda = x + y * x.inv().expect("x != 0");
        let x3 = lambda.square() + lambda + self.a;
        let y3 = x.square() + (lambda + self.ctx.one()) * x3;
        Point::Affine { x: x3, y: y3 }
    }

    pub fn double(&self, p: &Point) -> Result<Point, CurveError> {
        self.add(p, p)
    }

    pub fn neg(&self, p: &Point) -> Result<Point, CurveError> {
        self.check(p)?;
        Ok(p.neg())
    }

    pub fn sub_unchecked(&self, p: &Point, q: &Point) -> Point {
        self.add_unchecked(p, &q.neg())
    }

    /// Double-and-add.
    pub fn scalar_mul(&self, k: u128, p: &Point) -> Result<Point, CurveError> {
        self.check(p)?;
        let mut acc = Point::Infinity;
        for i in (0..128 - k.leading_zeros()).rev() {
            acc = self.add_unchecked(&acc, &acc);
            if k >> i & 1 == 1 {
                acc = self.add_unchecked(&acc, p);
            }
        }
        Ok(acc)
    }

    /// All points with the given x-coordinate (0, 1 or 2 of them).
    pub fn lift_x(&self, x: FieldElement) -> Result<Vec<Point>, CurveError> {
        self.lift_x_with(x, QuadraticSolver::Auto)
    }

    pub fn lift_x_with(&self, x: FieldElement, solver: QuadraticSolver) -> Result<Vec<Point>, CurveError> {
        let odd = self.ctx.degree() % 2 == 1;
        match (solver, odd) {
            (QuadraticSolver::HalfTrace, false) => Err(CurveError::OddDegreeRequired),
            (_, true) => Ok(self.lift_x_impl(x, |c| c.half_trace().expect("odd n"))),
            (QuadraticSolver::Auto, false) => {
                let as_solver = self.ctx.artin_schreier();
                Ok(self.lift_x_linear(x, &as_solver))
            }
        }
    }

    /// Lifting with a prebuilt Artin-Schreier solver, for bulk use.
    pub fn lift_x_linear(&self, x: FieldElement, solver: &ArtinSchreier) -> Vec<Point> {
        if x.is_zero() {
            return vec![Point::Affine { x, y: self.b.sqrt() }];
        }
        let c = self.rhs_over_x2(x);
        match solver.solve(c) {
            None => Vec::new(),
            Some(z) => self.two_points(x, z),
        }
    }

    fn lift_x_impl(&self, x: FieldElement, half_trace: impl Fn(FieldElement) -> FieldElement) -> Vec<Point> {
        if x.is_zero() {
            return vec![Point::Affine { x, y: self.b.sqrt() }];
        }
        let c = self.rhs_over_x2(x);
        if c.trace() {
            return Vec::new();
        }
        self.two_points(x, half_trace(c))
    }

    // (x^3 + a x^2 + b) / x^2
    fn rhs_over_x2(&self, x: FieldElement) -> FieldElement {
        let x2 = x.square();
        (x2 * x + self.a * x2 + self.b) * x2.inv().expect("x != 0")
    }

    fn two_points(&self, x: FieldElement, z: FieldElement) -> Vec<Point> {
        let y = x * z;
        let p = Point::Affine { x, y };
        debug_assert!(self.is_on_curve(&p));
        vec![p, p.neg()]
    }

    /// Every point of the curve, `Infinity` first, then affine points by x.
    pub fn enumerate_points(&self) -> Result<Vec<Point>, CurveError> {
        let n = self.ctx.degree();
        if n > MAX_ENUMERATION_DEGREE {
            return Err(CurveError::TooLarge(n));
        }
        let solver = self.ctx.artin_schreier();
        let mut out = vec![Point::Infinity];
        for x in self.ctx.elements() {
            out.extend(self.lift_x_linear(x, &solver));
        }
        Ok(out)
    }

    /// Samples x until it lifts, then picks one of the lifts by a coin flip.
    pub fn random_point(&self, seed: u64) -> Point {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_point(&mut rng)
    }

    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let solver = self.ctx.artin_schreier();
        loop {
            let x = self.ctx.sample(rng);
            let lifts = self.lift_x_linear(x, &solver);
            if !lifts.is_empty() {
                let pick = rng.gen::<bool>() as usize;
                return lifts[pick.min(lifts.len() - 1)];
            }
        }
    }

    pub fn parse_point(&self, s: &str) -> Result<Point, CurveError> {
        let t = s.trim();
        if t == "inf" {
            return Ok(Point::Infinity);
        }
        let err = || CurveError::Parse { what: "point", input: s.to_string() };
        let inner = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(err)?;
        let (hx, hy) = inner.split_once(',').ok_or_else(err)?;
        let p = Point::Affine { x: self.ctx.parse_element(hx)?, y: self.ctx.parse_element(hy)? };
        self.check(&p)?;
        Ok(p)
    }
}
