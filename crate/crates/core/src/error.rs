//! Error type shared by every module of the core crate.

use thiserror::Error;

/// Failures reported by the algebraic, combinatorial and certification layers.
///
/// `TheoremViolation` is special: it signals that an internal guarantee of a
/// proven lemma failed to hold, which can only be an implementation bug.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Input that does not describe a valid object (bad index, bad symbol, ...).
    #[error("malformed input: {0}")]
    Malformed(String),
    /// Text that could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
    /// An operation was called outside its documented domain.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A guarantee of a proven lemma failed; this is a correctness alarm.
    #[error("theorem violation (implementation bug): {0}")]
    TheoremViolation(String),
    /// The expansion watchdog aborted a computation that grew too large.
    #[error("term-count watchdog tripped: {0}")]
    Watchdog(String),
    /// A linear-algebra problem exceeded the configured size guard.
    #[error("dimension guard exceeded: {0}")]
    Dimension(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
