use thiserror::Error;

/// Errors raised by the library. Every variant carries enough context to
/// name the offending limit or input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the operation's domain (negative energy, NaN, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A closed form hits a singular parameter limit, e.g. `z=0` or `N=0`.
    #[error("singular parameter: {0}")]
    SingularParameter(String),
    /// A Gaussian state violates symmetry or the uncertainty principle.
    #[error("invalid state: {0}")]
    InvalidState(String),
    /// The output state is too close to pure for the SLD linear system.
    #[error("singular D operator: output state near pure (min nu - 1/2 = {gap:e})")]
    NearPure { gap: f64 },
    /// A matrix that must be inverted is singular.
    #[error("singular matrix: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;
