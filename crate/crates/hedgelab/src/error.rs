//! Crate-wide error type.

use std::fmt;

/// Errors raised by schedule construction, pricing kernels, quadrature and
/// experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside its mathematical domain.
    ParameterDomain(String),
    /// The rebalance-dependent cost parameter rule violates its growth condition.
    RhoRule(String),
    /// A numerical routine failed to converge or produced a non-finite value.
    Numerics(String),
    /// Inconsistent run configuration (e.g. correction mode vs cost regime).
    Config(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ParameterDomain(msg) => write!(f, "parameter domain: {msg}"),
            Error::RhoRule(msg) => write!(f, "cost-parameter rule: {msg}"),
            Error::Numerics(msg) => write!(f, "numerical failure: {msg}"),
            Error::Config(msg) => write!(f, "configuration: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
