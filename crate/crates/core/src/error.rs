use crate::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Newton iteration did not converge (last k = {k}, relative residual {residual:.3e})")]
    NoConvergence { k: C64, residual: f64 },

    #[error("contour |k| = {radius} keeps passing within the safety margin of a root")]
    ContourTooClose { radius: f64 },

    #[error("winding integral {value} is not within 0.25 of an integer ({nodes} nodes)")]
    NonIntegerWinding { value: C64, nodes: usize },

    #[error("incomplete basis ({parity} parity): found {found} states, winding audit expects {expected}")]
    IncompleteBasis {
        parity: &'static str,
        found: usize,
        expected: usize,
    },

    #[error("normalisation radicand vanishes for k = {k}")]
    DegenerateNorm { k: C64 },

    #[error("wavenumber {k} is too close to zero")]
    ZeroWavenumber { k: C64 },

    #[error("spike at {position} lies outside the open interval (-{half_width}, {half_width})")]
    SpikeOutOfRange { position: f64, half_width: f64 },

    #[error("eigensolver failed: {0}")]
    EigFailure(String),

    #[error("kappa = {kappa} is within the pole tolerance of a singular point")]
    NearPole { kappa: C64 },

    #[error("band overlap of an empty state list is undefined")]
    EmptyStates,
}
