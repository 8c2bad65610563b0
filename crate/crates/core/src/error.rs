use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("rescaling index must be positive")]
    ZeroIndex,

    #[error("the constant eta quotient has no extract")]
    ConstantQuotient,

    #[error("level {level} does not divide {target}")]
    LevelMismatch { level: u64, target: u64 },

    #[error("{d} does not divide {n}")]
    NotDivisor { d: u64, n: u64 },

    #[error("{d} is not an exact divisor of {n}")]
    NotExactDivisor { d: u64, n: u64 },

    #[error("levels {0} and {1} are not coprime")]
    NonCoprimeLevels(u64, u64),

    #[error("eta quotient is not holomorphic")]
    NotHolomorphic,

    #[error("eta quotient is constant")]
    Constant,

    #[error("orders do not correspond to an integral doubled weight")]
    NonIntegralWeight,

    #[error("enumeration budget of {budget} exhausted")]
    BudgetExhausted { budget: u64 },

    #[error("series of {requested} terms exceeds the budget of {budget}")]
    SeriesBudget { requested: usize, budget: usize },

    #[error("Mersmann level M_{0} is not known")]
    UnknownMersmannLevel(u64),

    #[error("{0}")]
    Domain(String),
}

impl Error {
    /// True for errors caused by running out of search or series budget,
    /// as opposed to bad input.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExhausted { .. } | Error::SeriesBudget { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
