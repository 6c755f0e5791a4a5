use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller broke an operation precondition (bad derivative order, empty grid, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A wall trajectory or cavity failed one of its physical constraints.
    #[error("invalid trajectory: {constraint}")]
    InvalidTrajectory { constraint: String },

    /// The monotone root finder could not bracket the root.
    #[error(
        "root not bracketed for target {target} after {expansions} expansions \
         (last bracket [{lo}, {hi}])"
    )]
    RootNotBracketed {
        target: f64,
        expansions: u32,
        lo: f64,
        hi: f64,
    },

    /// The root finder ran out of iterations.
    #[error("root finder did not converge for target {target}: bracket width {width}")]
    RootNotConverged { target: f64, width: f64 },

    /// A point lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The supplied starting point is not on a periodic trajectory.
    #[error("starting point {start} is not periodic with period {period}: residual {residual:e}")]
    NotPeriodic {
        start: f64,
        period: f64,
        residual: f64,
    },

    /// A vanishing first derivative made the Schwarzian undefined.
    #[error("singular Schwarzian: first derivative {0:e} vanishes")]
    Singular(f64),

    /// Adaptive quadrature exhausted its interval budget.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Quadrature { estimate: f64, error_bound: f64 },

    /// Scenario file problems, with line and field when known.
    #[error("config error{}{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default(), field.as_ref().map(|f| format!(" (field `{f}`)")).unwrap_or_default())]
    Config {
        line: Option<usize>,
        field: Option<String>,
        message: String,
    },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn trajectory(msg: impl Into<String>) -> Self {
        Error::InvalidTrajectory {
            constraint: msg.into(),
        }
    }

    pub(crate) fn config(line: Option<usize>, field: Option<&str>, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            field: field.map(str::to_owned),
            message: msg.into(),
        }
    }

    /// True for errors caused by user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::InvalidTrajectory { .. } | Error::Contract(_)
        )
    }
}
