// SPDX-License-Identifier: MIT OR Apache-2.0
use thiserror::Error;

/// Errors raised by estimators, simulators and asymptotic formulas.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("length mismatch: {values} values but {mask} mask entries")]
    LengthMismatch { values: usize, mask: usize },
    #[error("unsupported order pair ({0}, {1})")]
    UnsupportedOrder(u32, u32),
    #[error("lag series did not reach tolerance within {0} lags")]
    Convergence(u64),
    #[error("numerical degeneracy: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
