use serde_json::{json, Value};
use thiserror::Error;

/// Default cap on the number of group elements or cosets any single
/// enumeration may touch.
pub const DEFAULT_RESOURCE_LIMIT: u128 = 100_000;

/// Environment variable that overrides [`DEFAULT_RESOURCE_LIMIT`].
pub const RESOURCE_LIMIT_ENV: &str = "STEINITZ_RESOURCE_LIMIT";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("tails cannot be combined: {0}")]
    IncompatibleTails(String),
    #[error("subgroup has infinite index")]
    InfiniteIndex,
    #[error("subgroup is not normal: {0}")]
    NotNormal(String),
    #[error("enumeration of {needed} elements exceeds the resource limit {limit}")]
    ResourceBound { needed: u128, limit: u128 },
    #[error("integer overflow while computing {0}")]
    Overflow(String),
    #[error("chain is not properly nested at level {level}")]
    NestingViolation { level: usize },
    #[error("presentation disagrees with the chain at level {level}: {detail}")]
    MismatchAtLevel { level: usize, detail: String },
    #[error("presentation is not 1-dimensional (dim = {0})")]
    Not1Dimensional(u32),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::IncompatibleTails(_) => "incompatible-tails",
            Error::InfiniteIndex => "infinite-index",
            Error::NotNormal(_) => "not-normal",
            Error::ResourceBound { .. } => "resource-bound",
            Error::Overflow(_) => "overflow",
            Error::NestingViolation { .. } => "nesting-violation",
            Error::MismatchAtLevel { .. } => "mismatch-at-level",
            Error::Not1Dimensional(_) => "not-1-dimensional",
            Error::InvariantViolation(_) => "invariant-violation",
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ResourceBound { .. } | Error::Overflow(_) => 3,
            Error::InvariantViolation(_) => 4,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "error": self.kind(), "message": self.to_string() });
        match self {
            Error::ResourceBound { needed, limit } => {
                v["needed"] = json!(needed.to_string());
                v["limit"] = json!(limit.to_string());
            }
            Error::NestingViolation { level } | Error::MismatchAtLevel { level, .. } => {
                v["level"] = json!(level);
            }
            _ => {}
        }
        v
    }
}

/// Resource limit, honouring the environment override when it parses.
pub fn resource_limit() -> u128 {
    std::env::var(RESOURCE_LIMIT_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<u128>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(DEFAULT_RESOURCE_LIMIT)
}

pub(crate) fn check_bound(needed: u128, limit: u128) -> Result<()> {
    if needed > limit {
        Err(Error::ResourceBound { needed, limit })
    } else {
        Ok(())
    }
}

pub(crate) fn checked_mul(a: u128, b: u128, what: &str) -> Result<u128> {
    a.checked_mul(b).ok_or_else(|| Error::Overflow(what.to_string()))
}
