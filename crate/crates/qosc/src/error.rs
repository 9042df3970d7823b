use thiserror::Error;

/// Every failure mode of the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QoscError {
    #[error("invalid nome: |q| = {0} must be strictly below 1")]
    InvalidNome(f64),
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("series missed the tail criterion within {0} terms")]
    TruncationExhausted(usize),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("{what}: sum and product forms differ by {residual:e}")]
    RepresentationMismatch { what: String, residual: f64 },
    #[error("overflow guard: {0}")]
    OverflowGuard(String),
    #[error("degenerate argument: {0}")]
    DegenerateArgument(String),
    #[error("tail too fat: term {last:e} at the cap {cap} exceeds the cut {cut:e}")]
    TailTooFat { last: f64, cut: f64, cap: usize },
    #[error("eigensolver failure: {0}")]
    EigensolverFailure(String),
    #[error("singular measure at m = {m}: |[gamma q^m]| = {value:e}")]
    SingularMeasure { m: i64, value: f64 },
    #[error("pole hit: {0}")]
    PoleHit(String),
    #[error("quadrature window too small: relative endpoint magnitude {0:e}")]
    WindowTooSmall(f64),
    #[error("unsupported gamma: {0}")]
    UnsupportedGamma(String),
}

pub type Result<T> = std::result::Result<T, QoscError>;
