use thiserror::Error;

/// Errors raised by the exterior-calculus layer (forms, fields, maps).
#[derive(Debug, Clone, Error, PartialEq)]
pub enum FormError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("chart mismatch: {left} vs {right}")]
    ChartMismatch { left: String, right: String },
    #[error("point {coords:?} lies outside chart {chart}")]
    PointOutsideChart { chart: String, coords: Vec<f64> },
    #[error("degree {degree} exceeds chart dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("interior product of a 0-form")]
    InteriorOfFunction,
    #[error("coefficient function returned {got} entries, expected {expected}")]
    CoefficientCount { got: usize, expected: usize },
    #[error("non-finite value at {coords:?}: {what}")]
    NonFinite { what: String, coords: Vec<f64> },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("derivative order {requested} requested from a finite-difference source (max {max})")]
    UnsupportedDerivativeOrder { requested: usize, max: usize },
}

/// Errors raised by the Riemannian utilities.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum MetricError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("metric is singular or ill-conditioned at {coords:?} (condition number {condition:e})")]
    Singular { coords: Vec<f64>, condition: f64 },
    #[error("vector field has g-length {length} at {coords:?}, expected 1")]
    NotUnitLength { coords: Vec<f64>, length: f64 },
}

/// Errors raised by quadrature.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum IntegrationError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("form of degree {form} cannot be integrated over a {chain}-chain")]
    DegreeMismatch { form: usize, chain: usize },
    #[error("integrand is not finite at node {node:?}")]
    NonFiniteIntegrand { node: Vec<f64> },
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
}

/// Errors raised by the exact Seifert/orbifold layer.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum InvariantError {
    #[error("pair ({alpha}, {beta}) is not coprime")]
    NotCoprime { alpha: i64, beta: i64 },
    #[error("multiplicity alpha must be nonzero")]
    ZeroMultiplicity,
    #[error("cone order {0} is below 2")]
    InvalidConeOrder(i64),
    #[error("orbifold index needs alpha >= 1, got {0}")]
    InvalidIndexOrder(i64),
    #[error("cone point of order {0} is not listed among the zeros")]
    MissingConeZero(i64),
    #[error("zero cites cone order {0}, which the orbifold does not have")]
    UnknownConeZero(i64),
    #[error("negative genus {0}")]
    NegativeGenus(i64),
    #[error("integrality invariant violated: {0}")]
    Integrality(String),
}

/// Errors raised by the check engines and catalog constructors.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum CheckError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error("chart dimension {dim} is too small for degree-{needed} forms")]
    DimensionTooSmall { dim: usize, needed: usize },
    #[error("precondition `{hypothesis}` fails at {coords:?} (deviation {deviation:e})")]
    Precondition {
        hypothesis: String,
        coords: Vec<f64>,
        deviation: f64,
    },
    #[error("rank-deficient system at {coords:?}, singular values {singular_values:?}")]
    RankDeficient {
        coords: Vec<f64>,
        singular_values: Vec<f64>,
    },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
