use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ellipticity violated: a({x}) = {value} < c0 = {c0}")]
    Ellipticity { x: f64, value: f64, c0: f64 },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("eigensolver did not converge for mode {mode} (residual {residual:e})")]
    EigenNonConvergence { mode: usize, residual: f64 },

    #[error(
        "non-resonant lambda = {lambda}: nearest eigenvalue is mu_{nearest_index} = {nearest}; \
         the non-resonant regime is not handled by this tool"
    )]
    NonResonant {
        lambda: f64,
        nearest_index: usize,
        nearest: f64,
    },

    #[error("ambiguous lambda = {lambda}: within tolerance of mu_{first} and mu_{second}")]
    AmbiguousResonance {
        lambda: f64,
        first: usize,
        second: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("time step {dt} too large at t = {t}: step-halving monitor detected divergence")]
    StepTooLarge { dt: f64, t: f64 },

    #[error("nonlinearity `{name}` does not provide {what}")]
    MissingAsymptotics { name: String, what: &'static str },

    #[error("condition inconclusive: {0}")]
    Inconclusive(String),

    #[error("not certified: {0}")]
    NotCertified(String),

    #[error(
        "Newton iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NewtonFailed { iterations: usize, residual: f64 },

    #[error("unknown {kind} `{name}`; known: {known}")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        known: String,
    },
}

impl Error {
    /// True for failures caused by a numerical procedure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenNonConvergence { .. }
                | Error::Consistency(_)
                | Error::StepTooLarge { .. }
                | Error::NewtonFailed { .. }
                | Error::NotCertified(_)
        )
    }
}
