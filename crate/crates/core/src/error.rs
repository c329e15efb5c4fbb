use thiserror::Error;

/// Errors raised by grid construction, transforms, and functional evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid too small: n_theta = {n_theta} (min 2), n_phi = {n_phi} (min 4)")]
    Sizing { n_theta: usize, n_phi: usize },

    #[error("non-finite sample {value} at node {index}")]
    NonFinite { index: usize, value: f64 },

    /// Exponential overflow; carries the largest input sample and its location.
    #[error("range error: exp overflow at node {index} (theta = {theta}, phi = {phi}), max value {max_value}")]
    Range {
        max_value: f64,
        index: usize,
        theta: f64,
        phi: f64,
    },

    #[error("degree {l_max} exceeds anti-aliasing bound {bound} for this grid")]
    AntiAliasing { l_max: usize, bound: usize },

    #[error("dilation t = {t} not resolvable on this grid (max {max_t})")]
    Resolution { t: f64, max_t: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },

    #[error("residual balance violated: integral {integral} exceeds tolerance {tolerance}")]
    Balance { integral: f64, tolerance: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
