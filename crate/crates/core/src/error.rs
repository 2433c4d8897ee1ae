//! Crate-wide error type.
//!
//! Every numeric operation that can fail returns an explicit error. There is
//! no silent NaN propagation: domain violations, singular divisions and
//! curvature degeneracies all surface as variants here.

use thiserror::Error;

/// Errors produced by jet arithmetic, surface/curve evaluation and the
/// variational machinery.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("jet order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("division by a jet with zero constant term")]
    SingularDivision,

    #[error("{function} is undefined at constant term {value}")]
    ElementaryDomain { function: &'static str, value: f64 },

    #[error("derivative index {index} out of range for jet of order {order}")]
    DerivativeOutOfRange { index: usize, order: usize },

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("surface domain violation: ({u}, {v}) outside {domain}")]
    SurfaceDomain { u: f64, v: f64, domain: String },

    #[error("irregular surface point at ({u}, {v}): |x_u x x_v| = {norm:.3e}")]
    IrregularPoint { u: f64, v: f64, norm: f64 },

    #[error("curve is not regular near sigma = {sigma}: speed = {speed:.3e}")]
    NonRegularCurve { sigma: f64, speed: f64 },

    #[error("curve is not arc-length parameterized: |speed - 1| = {deviation:.3e} at s = {s}")]
    NotArcLength { s: f64, deviation: f64 },

    #[error("curvature degeneracy at s = {s}: kappa^2 = {kappa2:.3e} below threshold")]
    CurvatureDegeneracy { s: f64, kappa2: f64 },

    #[error("variation field endpoint condition violated: {which} = {value:.3e} at s = 0")]
    EndpointCondition { which: &'static str, value: f64 },

    #[error("length root not bracketed: target {target} exceeds available length {available}")]
    RootNotBracketed { target: f64, available: f64 },

    #[error("quadrature failure: {context}")]
    QuadratureFailure { context: String },

    #[error("finite-difference table did not converge: last correction {last_correction:.3e}")]
    FdNotConverged { last_correction: f64 },

    #[error("corollary hypothesis violated: sup |{invariant}| = {sup:.3e} exceeds {threshold:.3e}")]
    HypothesisViolation {
        invariant: &'static str,
        sup: f64,
        threshold: f64,
    },

    #[error("node count {n} below the minimum of {min}")]
    NodeCount { n: usize, min: usize },

    #[error("line search failed after {rejections} step rejections at iteration {iteration}")]
    LineSearch { iteration: usize, rejections: usize },

    #[error("constraint projection diverged: {context}")]
    ProjectionDiverged { context: String },

    #[error("invalid configuration: {message}")]
    Config { message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
