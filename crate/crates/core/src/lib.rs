//! Frame-relative connection calculus over a single space-time chart.
//!
//! The crate is organised bottom-up:
//!
//! * [`expr`] symbolic complex scalar fields in the chart coordinates,
//! * [`sampling`] quasi-random validation points,
//! * [`geometry`] tangent frames, structure constants, the metric
//!   connection, torsion and the tangent curvature,
//! * [`tensor`] typed bundle/tangent tensor fields, complex conjugation and
//!   the covariant differential,
//! * [`bundles`] the U(1), SU(2) and SU(3) bundle structures, their
//!   concordance conditions, gauge transformations and field strengths.
//!
//! Identities are verified numerically at sample points; see [`residual`].

pub mod array;
pub mod bundles;
pub mod error;
pub mod expr;
pub mod geometry;
mod linalg;
pub mod residual;
pub mod sampling;
pub mod tensor;

pub use error::{Error, Result};
pub use expr::{ChartPoint, ScalarExpr};
pub use linalg::ExprMatrix;
