//! Shared fixtures for the criterion benchmarks.

use optomech::{
    derive_params, initial_covariance, CovMatrix, LabParams, PumpProfile, SystemParams,
};

/// Operating point used by every benchmark: the default laboratory setup
/// at the standard reduced pump.
pub fn operating_point() -> (SystemParams, PumpProfile, CovMatrix) {
    let p = derive_params(&LabParams::default()).expect("default parameters are valid");
    let profile = PumpProfile::Constant {
        eta0: 0.30 * p.eta0,
    };
    let v0 = initial_covariance(p.nbar);
    (p, profile, v0)
}
