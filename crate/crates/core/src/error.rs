//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by model construction and the frequency-domain solvers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A physical parameter or coupling violates its domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Couplings that drive the model unstable are rejected up front.
    #[error("couplings g_plus = {g_plus} > g_minus = {g_minus}: the anti-damped quadrature pair can become unstable; the builders only accept g_plus <= g_minus")]
    CouplingOrder { g_minus: f64, g_plus: f64 },

    /// Impedance matching is impossible below unit cooperativity.
    #[error("cannot impedance-match: g_minus = {g_minus} is below the minimum {min_g_minus} set by kappa_tot * gamma_m / 4")]
    Unmatchable { g_minus: f64, min_g_minus: f64 },

    /// A builder was called with a drive configuration for another scheme.
    #[error("drive scheme mismatch: expected {expected}, got {got}")]
    SchemeMismatch {
        expected: &'static str,
        got: &'static str,
    },

    /// Spectra are only defined for strictly stable models.
    #[error("model is {verdict} (max eigenvalue real part {max_re:e}); stationary spectra require strict stability")]
    NotStable { verdict: &'static str, max_re: f64 },

    /// The resolvent became singular at a real frequency.
    #[error("linear system singular at omega = {omega}: a marginally stable mode sits on the real axis")]
    SingularAtFrequency { omega: f64 },

    /// The harmonic truncation failed to settle within the escalation budget.
    #[error("harmonic truncation did not converge by n_harm = {n_harm}: last iterates {previous:e} and {latest:e} (relative change {rel_change:e}, demanded {demanded:e})")]
    NonConvergence {
        n_harm: u32,
        previous: f64,
        latest: f64,
        rel_change: f64,
        demanded: f64,
    },

    /// A numerical routine produced an out-of-domain intermediate.
    #[error("numerical failure in {context}: {reason}")]
    Numerical {
        context: &'static str,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
