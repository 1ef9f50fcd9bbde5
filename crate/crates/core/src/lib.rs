//! Open-system Gaussian dynamics of a driven optomechanical cavity whose
//! field couples simultaneously to a vibrating end-mirror mode and to a
//! Bogoliubov excitation of an intracavity atomic condensate.
//!
//! The state is a 6x6 covariance matrix over the quadratures
//! (cavity x, cavity y, mirror q, mirror p, atom Q, atom P) with vacuum
//! variance 1/2. The crate provides:
//!
//! - parameter derivation from laboratory quantities ([`physics`]),
//! - covariance integration and algebraic steady states ([`dynamics`]),
//! - logarithmic-negativity entanglement of any mode pair ([`entanglement`]),
//! - time-dependent pump profiles with energy/ball constraints ([`modulation`]),
//! - multistart derivative-free coefficient optimization ([`optimizer`]),
//! - detuning and modulation-frequency sweeps ([`scans`]),
//! - strict flat-TOML configuration ([`config`]) and deterministic
//!   CSV/JSONL writers ([`output`]).

pub mod config;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod gaussian;
pub mod modulation;
pub mod optimizer;
pub mod output;
pub mod physics;
pub mod scans;

pub use config::RunConfig;
pub use dynamics::{
    constant_drift_solution, initial_covariance, integrate, lyapunov_steady_state,
    periodic_steady_max, PeriodResult, Trajectory,
};
pub use entanglement::{log_negativity, two_mode_squeezed, ModeId};
pub use error::{Error, Result};
pub use gaussian::{is_physical, min_symplectic_eigenvalue, CovMatrix, PHYSICALITY_TOL};
pub use modulation::{normalize_energy, PumpProfile, TAU_KAPPA};
pub use optimizer::{
    multistart_optimize, nelder_mead, objective_long, objective_short, robustness_check, NmOptions,
    OptimizeOutcome,
};
pub use physics::{derive_params, steady_state, LabParams, SteadyState, SystemParams};
pub use scans::{detuning_scan, sigma_resonance_scan, DetuningScan, SigmaScan};
