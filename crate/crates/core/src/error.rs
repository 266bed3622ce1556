use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the function is defined.
    #[error("domain error in {function}: {reason}")]
    Domain {
        function: &'static str,
        reason: String,
    },

    /// A parameter violates the invariants of the type being constructed.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error(
        "quadrature did not converge: estimate {estimate:e} with error bound {error_bound:e} \
         after {intervals} subintervals"
    )]
    Quadrature {
        estimate: f64,
        error_bound: f64,
        intervals: usize,
    },

    /// A series (accelerated or not) failed to reach the requested tolerance.
    #[error("series did not converge after {terms} terms: partial sum {partial:e}, residual {residual:e}")]
    SeriesNonConvergence {
        terms: usize,
        partial: f64,
        residual: f64,
    },

    /// Evaluation exactly at a pole or zero of a rational response function.
    #[error("singular evaluation at omega = {omega}")]
    Singular { omega: f64 },

    /// No interior maximum inside a search window.
    #[error("no interior maximum of the specific heat in theta window [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    /// Symplectic integration blew up; the step size is too large.
    #[error("integration unstable at step {step}: energy grew from {initial:e} to {current:e}")]
    Instability {
        step: usize,
        initial: f64,
        current: f64,
    },

    #[error("eigen-solver failure: {0}")]
    Eigen(String),

    /// Failure at one node of a temperature scan.
    #[error("at theta = {theta}: {source}")]
    AtTemperature {
        theta: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(function: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            function,
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
