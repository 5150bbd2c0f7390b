//! Point decomposition on binary elliptic curves.
//!
//! The crate builds Semaev-polynomial systems for the point decomposition
//! problem `PDP(n, m, n')`, including the split variants that trade extra
//! auxiliary variables for lower degrees, applies Weil descent to obtain
//! boolean systems, and solves them with a Groebner-basis engine over the
//! boolean ring, XL-style linearization, or a SAT solver. It also computes
//! first-fall-degree certificates and index-calculus cost estimates.

pub mod alloc;
pub mod analysis;
pub mod boolring;
pub mod curve;
pub mod descent;
pub mod gf2n;
pub mod harness;
pub mod mvpoly;
pub mod par;
pub mod semaev;
pub mod solver;
pub mod systems;

pub use curve::{CurveParams, Point};
pub use gf2n::{FieldContext, FieldElement};
pub use par::Exec;
