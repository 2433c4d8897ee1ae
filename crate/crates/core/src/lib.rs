//! Intrinsic geometry of curves on oriented surfaces.
//!
//! The crate computes Darboux-frame invariants (geodesic curvature, normal
//! curvature, geodesic torsion) and their arc-length derivatives through
//! truncated Taylor jets, evaluates torsion and curvature energies, runs a
//! literal one-parameter variation of a curve with fixed length and fixed
//! initial data, and checks the resulting free-end extremality conditions:
//! an interior residual density plus three boundary residuals at the far end.
//! A projected-gradient relaxation searches for minimizers of the total
//! square torsion over discretized curves.
//!
//! Layering, bottom to top:
//!
//! * [`jet`] — truncated Taylor arithmetic, the differentiation backbone;
//! * [`expr`] — a small expression language for user-defined surfaces,
//!   curves and variation fields;
//! * [`quadrature`] — composite Gauss-Legendre integration;
//! * [`surface`] — oriented parametric patches, built-in and expression-defined;
//! * [`curve`] — curves on patches, arc-length reparameterization, Darboux
//!   states, Frenet cross-checks, energy functionals;
//! * [`variation`] — the admissible variation family, its length constraint,
//!   and the first variation both by finite differences and analytically;
//! * [`elastic`] — residual evaluators and the extremal-verdict report;
//! * [`relax`] — constrained descent over discrete curves.

pub mod error;
pub mod jet;

pub use error::{Error, Result};
pub use jet::{Jet, JetVec3, DEFAULT_ORDER};

pub mod expr;
pub mod fd;
pub mod quadrature;
pub mod spline;
pub mod surface;
pub mod curve;
pub mod darboux;
pub mod elastic;
pub mod variation;
pub mod relax;
