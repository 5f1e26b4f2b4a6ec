use thiserror::Error;

/// Errors produced by the analytic formulas, the billiard flow, and the
/// estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension must be at least {min}, got {got}")]
    DimensionTooSmall { min: usize, got: usize },

    #[error("scatterer radius {radius} out of range: {reason}")]
    RadiusOutOfRange { radius: f64, reason: &'static str },

    #[error("incipient-or-closed: no principal horizon exists for radius {radius} >= 1/2")]
    IncipientOrClosed { radius: f64 },

    #[error("{name} = {value} outside domain {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("Epstein zeta pole/divergence: s = {s} is not above k/2 = {half_k}")]
    EpsteinPole { s: f64, half_k: f64 },

    #[error("empty vector")]
    EmptyVector,

    #[error("rejection sampling failed after {0} draws; free volume is too small")]
    PackingTooDense(u64),

    #[error("degenerate geometry: {0} collisions within one time unit")]
    DegenerateGeometry(u64),

    #[error("exponent fit needs at least 3 bins inside the window, found {0}")]
    TooFewBins(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
