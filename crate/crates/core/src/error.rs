//! Error taxonomy shared by all modules.
//!
//! Errors fall into three classes that the CLI maps onto exit codes:
//! usage/configuration (1), physics or feasibility (2), and numerical
//! failure (3).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A raw input or control parameter lies outside its physical domain.
    #[error("parameter `{field}` out of domain: {reason}")]
    ParameterDomain { field: &'static str, reason: String },

    /// The drift matrix has an eigenvalue with non-negative real part, so no
    /// steady state exists.
    #[error("drift matrix is not strictly stable (max Re eig = {max_re:.6e} s^-1)")]
    UnstableDrift { max_re: f64 },

    /// The integrated covariance blew up (trace exceeded 10^6 x its initial
    /// value), i.e. the modulation drove the linearized system unstable.
    #[error("integration unstable at t = {t:.6e} s: trace(V) exceeded 1e6 x trace(V(0))")]
    Instability { t: f64 },

    /// A stored covariance sample violated the physicality bound even after
    /// the step-halving retries.
    #[error(
        "physicality lost at t = {t:.6e} s (min symplectic eigenvalue {nu_min:.6e} < 1/2 - 1e-6) \
         after {retries} step-halving retries"
    )]
    PhysicalityLoss { t: f64, nu_min: f64, retries: u32 },

    /// The per-period entanglement maximum did not settle within the period
    /// cap of the long-time objective.
    #[error("periodic objective did not converge within {periods} periods")]
    NonConvergence { periods: usize },

    /// An internally inconsistent numerical result (e.g. the two symplectic
    /// eigenvalue routes disagree), pointing at conditioning problems.
    #[error("numerical conditioning failure in {context}: {detail}")]
    Conditioning {
        context: &'static str,
        detail: String,
    },

    /// The two independent symplectic-eigenvalue computations disagree beyond
    /// tolerance; this is a bug guard, not a user error.
    #[error("internal cross-check failed in {context}: {detail}")]
    Internal {
        context: &'static str,
        detail: String,
    },

    /// A bipartite quantity was requested for a single mode.
    #[error("bipartite entanglement requires two distinct modes")]
    SameMode,

    /// A pump profile violates its variant constraints.
    #[error("infeasible pump profile: {reason}")]
    InfeasibleProfile { reason: String },

    /// The energy-normalization equation for the Fourier profile has no
    /// positive root, so the coefficient vector cannot be rescaled onto the
    /// constant-energy shell.
    #[error("energy normalization has no positive root for this coefficient vector")]
    NoPositiveRoot,

    /// Every multistart candidate was infeasible or unstable.
    #[error("optimization failed: all {starts} starts were infeasible")]
    AllStartsInfeasible { starts: usize },

    /// Configuration file problems: unreadable, unparsable, or unknown keys.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code class: 1 usage, 2 physics/feasibility, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) => 1,
            Error::ParameterDomain { .. }
            | Error::UnstableDrift { .. }
            | Error::SameMode
            | Error::InfeasibleProfile { .. }
            | Error::NoPositiveRoot
            | Error::AllStartsInfeasible { .. } => 2,
            Error::Instability { .. }
            | Error::PhysicalityLoss { .. }
            | Error::NonConvergence { .. }
            | Error::Conditioning { .. }
            | Error::Internal { .. } => 3,
        }
    }
}
