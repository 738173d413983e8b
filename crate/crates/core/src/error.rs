use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An argument lies outside the domain where the quantity is finite or defined.
    #[error("out of domain: {0}")]
    OutOfDomain(String),

    /// Adaptive integrator step fell below the floor (`1e-12 * t_f`).
    #[error("step size underflow at t = {t:e} for mode energy {lambda:e} (h = {step:e})")]
    StepUnderflow { t: f64, lambda: f64, step: f64 },

    /// Adaptive quadrature did not reach its tolerance.
    #[error("quadrature did not converge: worst subinterval [{lo:e}, {hi:e}] has error estimate {error:e}")]
    Quadrature { lo: f64, hi: f64, error: f64 },

    /// Failure of a single mode inside a many-mode evolution.
    #[error("mode {index}: {source}")]
    Mode {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("csv row {row}: {message}")]
    Csv { row: usize, message: String },

    /// Scaling analysis cannot proceed on the given data.
    #[error("scaling analysis: {0}")]
    Analysis(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::StepUnderflow { .. } | Error::Quadrature { .. } => true,
            Error::Mode { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
