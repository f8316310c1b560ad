use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A parameter set, bitstring, or configuration value is inconsistent.
    #[error("parameter error: {0}")]
    Param(String),

    /// An operation was attempted out of order, e.g. a new tag requested
    /// while a previous packet is still unresolved.
    #[error("protocol-order error: {0}")]
    ProtocolOrder(String),

    /// An acknowledgement named a counter that is not in flight.
    #[error("unknown counter {0}")]
    UnknownCounter(u32),

    /// A packet counter did not strictly increase at the receiver.
    #[error("replayed or regressed counter {counter} (last seen {last})")]
    Replay { counter: u32, last: u32 },

    /// No authentication record exists for the counter.
    #[error("no record for counter {0}")]
    NotFound(u32),

    /// A recovery oracle was asked for a segment without all of the MACs
    /// or tags the recovery equation needs.
    #[error("insufficient oracle data: {0}")]
    InsufficientOracleData(String),

    /// Time-series diagnostics are undefined for the input.
    #[error("diagnostics error: {0}")]
    Diagnostics(String),

    /// Reading or parsing an input file failed.
    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Param(msg.into()))
}
