use thiserror::Error;

/// Errors raised by the model, the allocator, the oracle and the file formats.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("invalid power allocation: {0}")]
    InvalidAllocation(String),

    #[error("total energy consumption is zero")]
    ZeroConsumption,

    #[error("net energy consumption {value:e} J is not positive; the demand is too large relative to consumption")]
    DenominatorNonpositive { value: f64 },

    #[error("argument {x:e} lies outside the domain of the principal Lambert W branch")]
    Domain { x: f64 },

    #[error("stationarity parameter {gamma:e} < -1: the harvest constraint is forced active")]
    ConstraintForcedActive { gamma: f64 },

    #[error("no sign change of the threshold equation on [{lo:e}, {hi:e}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("demand {chi} J exceeds the maximum harvestable energy chi_max = {chi_max} J")]
    Infeasible { chi: f64, chi_max: f64 },

    #[error("no lattice point satisfies the harvest constraint for demand {chi} J")]
    InfeasibleEverywhere { chi: f64 },

    #[error("{}", parse_message(*.line, .field, .message))]
    Parse {
        line: Option<usize>,
        field: String,
        message: String,
    },
}

fn parse_message(line: Option<usize>, field: &str, message: &str) -> String {
    match line {
        Some(line) => format!("line {line}: `{field}`: {message}"),
        None => format!("`{field}`: {message}"),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
