use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter {t} outside curve interval [{start}, {end}]")]
    ParamOutOfRange { t: f64, start: f64, end: f64 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("degenerate surface patch: {0}")]
    DegeneratePatch(String),

    #[error("degenerate intersection: {0}")]
    DegenerateIntersection(String),

    #[error("non-transversal crossing: {0}")]
    NonTransversal(String),

    #[error("evaluation point within guard distance of the source (distance {distance:.3e}, guard {guard:.3e})")]
    NearSingular { distance: f64, guard: f64 },

    #[error("curves too close (distance {distance:.3e}, guard {guard:.3e})")]
    CurvesTooClose { distance: f64, guard: f64 },

    #[error("quadrature did not converge at depth {depth} (error estimate {estimate:.3e}, tolerance {tolerance:.3e})")]
    NoConvergence {
        depth: usize,
        estimate: f64,
        tolerance: f64,
    },

    #[error("vector is not unit length (norm {0})")]
    NotUnit(f64),

    #[error("degenerate base point: x must be nonzero")]
    DegenerateBase,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures of a numerical computation, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NearSingular { .. }
                | Error::CurvesTooClose { .. }
                | Error::NoConvergence { .. }
                | Error::DegenerateIntersection(_)
                | Error::NonTransversal(_)
        )
    }
}
