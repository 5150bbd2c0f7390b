//! PDP instances and the Semaev-polynomial systems that encode them.
//!
//! Given `R` and a factor base with x-coordinates in an `n'`-dimensional
//! subspace, a decomposition `R = P_1 + .. + P_m` corresponds to a common
//! root of the field equations built here:
//!
//! * `Classic`: `S_{m+1}(x_1, .., x_m, x_R) = 0`;
//! * `Split2`: two equations joined by one auxiliary point
//!   (`x12 = x(P1 + P2)` for `m = 3, 4`, `x123 = x(P1 + P2 + P3)` for `m = 5`);
//! * `FullSplit` (`m = 5`): four `S_3` equations with auxiliaries
//!   `P12 = P1 + P2`, `P34 = P3 + P4`, `P50 = P5 - R`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boolring::{Assignment, VarUniverse};
use crate::curve::{CurveError, CurveParams, Point};
use crate::descent::{build_factor_base, BoolSystem, Descender, DescentError, FactorBase};
use crate::gf2n::FieldElement;
use crate::mvpoly::{MvPoly, PolyError};
use crate::par::Exec;
use crate::semaev::{s3, semaev_last_evaluated, semaev_poly, SemaevClass};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("variant {variant} does not support m = {m}")]
    Unsupported { variant: VariantKind, m: usize },
    #[error("the factor base is empty")]
    EmptyFactorBase,
    #[error("no valid plant found in {0} draws from the factor base")]
    NoPlant(usize),
    #[error("the target point is the identity")]
    InfiniteTarget,
    #[error("n - delta = {0} is not divisible by m = {1}")]
    BadDelta(usize, usize),
    #[error("cannot parse instance: {0}")]
    Parse(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Descent(#[from] DescentError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantKind {
    Classic,
    Split2,
    FullSplit,
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VariantKind::Classic => "classic",
            VariantKind::Split2 => "split2",
            VariantKind::FullSplit => "full-split",
        })
    }
}

impl FromStr for VariantKind {
    type Err = SystemError;
    fn from_str(s: &str) -> Result<Self, SystemError> {
        match s {
            "classic" => Ok(VariantKind::Classic),
            "split2" | "split" => Ok(VariantKind::Split2),
            "full-split" | "fullsplit" => Ok(VariantKind::FullSplit),
            _ => Err(SystemError::Parse(format!("unknown variant {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceMode {
    Planted,
    Random,
}

impl FromStr for InstanceMode {
    type Err = SystemError;
    fn from_str(s: &str) -> Result<Self, SystemError> {
        match s {
            "planted" => Ok(InstanceMode::Planted),
            "random" => Ok(InstanceMode::Random),
            _ => Err(SystemError::Parse(format!("unknown mode {s:?}"))),
        }
    }
}

/// `n' = floor(n / m)` by default; with `delta`, `n' = (n - delta) / m`
/// exactly.
pub fn n_prime_for(n: usize, m: usize, delta: Option<usize>) -> Result<usize, SystemError> {
    match delta {
        None => Ok(n / m),
        Some(d) if d <= n && (n - d).is_multiple_of(m) => Ok((n - d) / m),
        Some(d) => Err(SystemError::BadDelta(n.saturating_sub(d), m)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdpInstance {
    pub curve: CurveParams,
    pub m: usize,
    pub n_prime: usize,
    pub target: Point,
    pub planted: Option<Vec<Point>>,
}

impl PdpInstance {
    pub fn factor_base(&self) -> Result<FactorBase, SystemError> {
        Ok(build_factor_base(&self.curve, self.n_prime)?)
    }

    fn in_factor_base(&self, p: &Point) -> bool {
        p.x().is_some_and(|x| x.bits() >> self.n_prime == 0) && self.curve.is_on_curve(p)
    }

    /// Three lines: the curve, `m;n_prime;R`, and the planted points joined
    /// by `;` (omitted when there is no plant).
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n{};{};{}\n", self.curve, self.m, self.n_prime, self.target);
        if let Some(pts) = &self.planted {
            let parts: Vec<String> = pts.iter().map(|p| p.to_string()).collect();
            s.push_str(&parts.join(";"));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, SystemError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let err = |m: &str| SystemError::Parse(m.to_string());
        let curve: CurveParams = lines.next().ok_or_else(|| err("missing curve line"))?.parse()?;
        let head = lines.next().ok_or_else(|| err("missing m;n_prime;R line"))?;
        let mut parts = head.splitn(3, ';');
        let m: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| err(head))?;
        let n_prime: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| err(head))?;
        let target = curve.parse_point(parts.next().ok_or_else(|| err(head))?)?;
        let planted = match lines.next() {
            None => None,
            Some(l) => Some(l.split(';').map(|p| curve.parse_point(p)).collect::<Result<Vec<_>, _>>()?),
        };
        Ok(Self { curve, m, n_prime, target, planted })
    }
}

const MAX_PLANT_DRAWS: usize = 10_000;

/// Samples an instance. Planted instances draw `m` factor-base points and
/// set `R` to their sum, redrawing whenever `R` or any auxiliary point
/// used by the split systems is the identity.
pub fn generate_instance(
    curve: &CurveParams,
    m: usize,
    n_prime: usize,
    mode: InstanceMode,
    seed: u64,
) -> Result<PdpInstance, SystemError> {
    let fb = build_factor_base(curve, n_prime)?;
    if fb.is_empty() {
        return Err(SystemError::EmptyFactorBase);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        InstanceMode::Random => {
            let target = curve.sample_point(&mut rng);
            Ok(PdpInstance { curve: *curve, m, n_prime, target, planted: None })
        }
        InstanceMode::Planted => {
            for _ in 0..MAX_PLANT_DRAWS {
                let pts: Vec<Point> = (0..m).map(|_| fb.members()[rng.gen_range(0..fb.len())]).collect();
                let target = sum(curve, &pts);
                if target.is_infinity() || auxiliary_points(curve, &pts, &target).iter().any(|p| p.is_infinity()) {
                    continue;
                }
                return Ok(PdpInstance { curve: *curve, m, n_prime, target, planted: Some(pts) });
            }
            Err(SystemError::NoPlant(MAX_PLANT_DRAWS))
        }
    }
}

fn sum(curve: &CurveParams, pts: &[Point]) -> Point {
    pts.iter().fold(Point::Infinity, |acc, p| curve.add_unchecked(&acc, p))
}

// Every auxiliary point any variant may need for this plant.
fn auxiliary_points(curve: &CurveParams, pts: &[Point], target: &Point) -> Vec<Point> {
    let mut out = Vec::new();
    if pts.len() >= 3 {
        out.push(sum(curve, &pts[..2]));
    }
    if pts.len() == 5 {
        out.push(sum(curve, &pts[..3]));
        out.push(sum(curve, &pts[2..4]));
        out.push(curve.sub_unchecked(&pts[4], target));
    }
    out
}

/// True iff there are `m` factor-base points summing to `R`.
pub fn verify_decomposition(inst: &PdpInstance, points: &[Point]) -> bool {
    points.len() == inst.m && points.iter().all(|p| inst.in_factor_base(p)) && sum(&inst.curve, points) == inst.target
}

/// Lifts x-coordinates to points and searches the `2^m` sign choices for
/// one summing to `R`.
pub fn reconstruct(inst: &PdpInstance, xs: &[FieldElement]) -> Option<Vec<Point>> {
    let lifts: Vec<Vec<Point>> = xs.iter().map(|&x| inst.curve.lift_x(x).ok().unwrap_or_default()).collect();
    if lifts.iter().any(|l| l.is_empty()) {
        return None;
    }
    for signs in 0..1u32 << xs.len() {
        let pts: Vec<Point> = lifts
            .iter()
            .enumerate()
            .map(|(i, l)| if signs >> i & 1 == 1 && l.len() > 1 { l[1] } else { l[0] })
            .collect();
        if verify_decomposition(inst, &pts) {
            return Some(pts);
        }
    }
    None
}

/// One field equation of a system together with its Semaev class.
#[derive(Debug, Clone)]
pub struct FieldEquation {
    pub label: String,
    pub class: SemaevClass,
    pub poly: MvPoly,
}

#[derive(Debug, Clone)]
pub struct SystemVariant {
    kind: VariantKind,
    m: usize,
    n_prime: usize,
    equations: Vec<FieldEquation>,
    /// Factor-base variables first, then auxiliaries.
    blocks: Vec<(String, usize)>,
}

fn fb_names(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("x{i}")).collect()
}

fn target_x(inst: &PdpInstance) -> Result<FieldElement, SystemError> {
    inst.target.x().ok_or(SystemError::InfiniteTarget)
}

impl SystemVariant {
    fn assemble(kind: VariantKind, inst: &PdpInstance, equations: Vec<FieldEquation>, aux: &[&str]) -> Self {
        let n = inst.curve.field().degree() as usize;
        let mut blocks: Vec<(String, usize)> = fb_names(inst.m).into_iter().map(|v| (v, inst.n_prime)).collect();
        blocks.extend(aux.iter().map(|a| (a.to_string(), n)));
        Self { kind, m: inst.m, n_prime: inst.n_prime, equations, blocks }
    }

    pub fn build(kind: VariantKind, inst: &PdpInstance) -> Result<Self, SystemError> {
        match kind {
            VariantKind::Classic => build_classic(inst),
            VariantKind::Split2 => build_split(inst),
            VariantKind::FullSplit => build_full_split_m5(inst),
        }
    }

    pub fn kind(&self) -> VariantKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_prime(&self) -> usize {
        self.n_prime
    }

    pub fn equations(&self) -> &[FieldEquation] {
        &self.equations
    }

    /// `(name, dimension)` for every field variable.
    pub fn blocks(&self) -> &[(String, usize)] {
        &self.blocks
    }

    pub fn universe(&self) -> VarUniverse {
        let mut u = VarUniverse::new();
        for (name, dim) in &self.blocks {
            u.add_block(name, *dim).expect("distinct block names");
        }
        u
    }

    /// Number of factor-base boolean variables, `m n'`.
    pub fn fb_bits(&self) -> usize {
        self.m * self.n_prime
    }

    pub fn descender(&self, inst: &PdpInstance) -> Result<Descender, SystemError> {
        Ok(Descender::new(inst.curve.field(), self.universe())?)
    }

    pub fn descend(&self, inst: &PdpInstance, exec: Exec) -> Result<BoolSystem, SystemError> {
        let eqs: Vec<(String, MvPoly)> = self.equations.iter().map(|e| (e.label.clone(), e.poly.clone())).collect();
        Ok(self.descender(inst)?.descend(&eqs, exec)?)
    }

    /// Field values of every variable for a planted instance.
    pub fn planted_values(&self, inst: &PdpInstance) -> Option<HashMap<String, FieldElement>> {
        let pts = inst.planted.as_ref()?;
        let c = &inst.curve;
        let mut vals: HashMap<String, FieldElement> = HashMap::new();
        for (i, p) in pts.iter().enumerate() {
            vals.insert(format!("x{}", i + 1), p.x()?);
        }
        let aux = |name: &str| -> Option<Point> {
            Some(match name {
                "x12" => sum(c, &pts[..2]),
                "x123" => sum(c, &pts[..3]),
                "x34" => sum(c, &pts[2..4]),
                "x50" => c.sub_unchecked(&pts[4], &inst.target),
                _ => return None,
            })
        };
        for (name, _) in &self.blocks[self.m..] {
            vals.insert(name.clone(), aux(name)?.x()?);
        }
        Some(vals)
    }

    /// The boolean assignment encoding the planted solution.
    pub fn planted_assignment(&self, inst: &PdpInstance) -> Option<Assignment> {
        let vals = self.planted_values(inst)?;
        let u = self.universe();
        let mut a = Assignment::default();
        for b in u.blocks() {
            let bits = vals[&b.name].bits();
            for j in 0..b.dim {
                a.set(b.offset + j, bits >> j & 1 == 1);
            }
        }
        Some(a)
    }

    /// Factor-base x-coordinates encoded by a boolean solution.
    pub fn decode_xs(&self, inst: &PdpInstance, a: &Assignment) -> Vec<FieldElement> {
        let ctx = inst.curve.field();
        let u = self.universe();
        u.blocks()[..self.m].iter().map(|b| ctx.element_truncated(a.extract(b.offset, b.dim))).collect()
    }

    /// Curve-level decomposition from a boolean solution, if one exists.
    pub fn decode(&self, inst: &PdpInstance, a: &Assignment) -> Option<Vec<Point>> {
        reconstruct(inst, &self.decode_xs(inst, a))
    }
}

/// `S_{m+1}(x_1, .., x_m, x_R) = 0` over `m` factor-base variables.
pub fn build_classic(inst: &PdpInstance) -> Result<SystemVariant, SystemError> {
    let m = inst.m;
    if !(2..=5).contains(&m) {
        return Err(SystemError::Unsupported { variant: VariantKind::Classic, m });
    }
    let xr = target_x(inst)?;
    let names = fb_names(m);
    let vars: Vec<&str> = names.iter().map(String::as_str).collect();
    let poly = semaev_last_evaluated(&inst.curve, &vars, xr)?;
    let class = SemaevClass::last_evaluated(m + 1, xr);
    let eq = FieldEquation { label: class.label(), class, poly };
    Ok(SystemVariant::assemble(VariantKind::Classic, inst, vec![eq], &[]))
}

/// The two-equation systems for `m = 3, 4, 5`.
pub fn build_split(inst: &PdpInstance) -> Result<SystemVariant, SystemError> {
    let c = &inst.curve;
    let xr = target_x(inst)?;
    let full = |m: usize, poly: MvPoly| {
        let class = SemaevClass::full(m);
        FieldEquation { label: class.label(), class, poly }
    };
    let last = |m: usize, poly: MvPoly| {
        let class = SemaevClass::last_evaluated(m, xr);
        FieldEquation { label: class.label(), class, poly }
    };
    let (eqs, aux) = match inst.m {
        3 => (vec![full(3, s3(c, "x1", "x2", "x12")?), last(3, semaev_last_evaluated(c, &["x3", "x12"], xr)?)], "x12"),
        4 => (
            vec![full(3, s3(c, "x1", "x2", "x12")?), last(4, semaev_last_evaluated(c, &["x3", "x4", "x12"], xr)?)],
            "x12",
        ),
        5 => (
            vec![
                full(4, semaev_poly(c, &["x1", "x2", "x3", "x123"])?),
                last(4, semaev_last_evaluated(c, &["x4", "x5", "x123"], xr)?),
            ],
            "x123",
        ),
        m => return Err(SystemError::Unsupported { variant: VariantKind::Split2, m }),
    };
    Ok(SystemVariant::assemble(VariantKind::Split2, inst, eqs, &[aux]))
}

/// Four `S_3` equations for `m = 5`.
pub fn build_full_split_m5(inst: &PdpInstance) -> Result<SystemVariant, SystemError> {
    if inst.m != 5 {
        return Err(SystemError::Unsupported { variant: VariantKind::FullSplit, m: inst.m });
    }
    let c = &inst.curve;
    let xr = target_x(inst)?;
    let full = |poly: MvPoly| FieldEquation { label: "S3,1".into(), class: SemaevClass::full(3), poly };
    let eqs = vec![
        full(s3(c, "x1", "x2", "x12")?),
        full(s3(c, "x3", "x4", "x34")?),
        FieldEquation {
            label: "S3,2".into(),
            class: SemaevClass::last_evaluated(3, xr),
            poly: semaev_last_evaluated(c, &["x5", "x50"], xr)?,
        },
        full(s3(c, "x12", "x34", "x50")?),
    ];
    Ok(SystemVariant::assemble(VariantKind::FullSplit, inst, eqs, &["x12", "x34", "x50"]))
}
