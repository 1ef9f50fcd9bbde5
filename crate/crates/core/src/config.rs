//! Run configuration: a flat TOML file of `key = value` pairs.
//!
//! Every key has a default, so an empty file is a valid configuration;
//! unknown keys are fatal (they are almost always typos of real knobs).
//! Keys carry their unit in the name; frequencies are plain Hz and are
//! converted to angular frequencies when the physical parameters are built.

use crate::error::{Error, Result};
use crate::modulation::PumpProfile;
use crate::modulation::TAU_KAPPA;
use crate::physics::{LabParams, SystemParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    // --- physical setup ---
    pub mechanical_freq_hz: f64,
    pub bogoliubov_freq_hz: f64,
    pub temperature_k: f64,
    pub q_factor: f64,
    pub mass_kg: f64,
    pub power_w: f64,
    pub finesse: f64,
    pub cavity_len_m: f64,
    pub lambda_c_m: f64,
    pub delta_over_omega_m: f64,
    pub zeta_over_chi: f64,
    /// Atomic dispersive frequency shift reported alongside the
    /// radiation-pressure detuning corrections (rad/s).
    pub atomic_shift_rad_s: f64,

    // --- drive ---
    /// Fraction of the nominal pump rate actually applied.
    pub pump_scale: f64,
    /// One of "constant", "fourier", "monochromatic", "harmonic".
    pub profile: String,
    pub profile_a: Vec<f64>,
    pub profile_b: Vec<f64>,
    /// Harmonic-frequency shifts for the Fourier profile (rad/s); drawn
    /// from the seed when left empty.
    pub profile_shifts: Vec<f64>,
    pub sigma_over_kappa: f64,

    // --- integration ---
    pub dt_kappa: f64,
    pub t_end_kappa: f64,
    pub min_samples: usize,

    // --- optimization ---
    pub seed: u64,
    pub n_starts: usize,
    pub j_max: usize,
    pub n_max: usize,

    // --- sweeps ---
    pub delta_scan_min: f64,
    pub delta_scan_max: f64,
    pub delta_scan_points: usize,
    pub sigma_scan_min: f64,
    pub sigma_scan_max: f64,
    pub sigma_scan_points: usize,

    // --- reporting ---
    /// "e" for natural-log entanglement output, "2" for log-2.
    pub log_base: String,
    pub campaign: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mechanical_freq_hz: 3.0e6,
            bogoliubov_freq_hz: 3.0e6,
            temperature_k: 1.0e-5,
            q_factor: 3.0e4,
            mass_kg: 5.0e-11,
            power_w: 5.0e-2,
            finesse: 1.0e4,
            cavity_len_m: 1.0e-3,
            lambda_c_m: 7.8e-7,
            delta_over_omega_m: 2.7,
            zeta_over_chi: 1.0,
            atomic_shift_rad_s: 0.0,
            pump_scale: 0.30,
            profile: "constant".into(),
            profile_a: Vec::new(),
            profile_b: Vec::new(),
            profile_shifts: Vec::new(),
            sigma_over_kappa: 0.75,
            dt_kappa: 1.0e-3,
            t_end_kappa: 10.0,
            min_samples: 2000,
            seed: 7,
            n_starts: 16,
            j_max: 6,
            n_max: 8,
            delta_scan_min: 0.5,
            delta_scan_max: 4.0,
            delta_scan_points: 64,
            sigma_scan_min: 0.2,
            sigma_scan_max: 2.0,
            sigma_scan_points: 64,
            log_base: "e".into(),
            campaign: String::new(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    /// SHA-256 of the canonical serialized form, for run manifests.
    pub fn sha256_hex(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn validate(&self) -> Result<()> {
        let named = |field: &'static str, ok: bool, reason: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::ParameterDomain {
                    field,
                    reason: reason.into(),
                })
            }
        };
        named("pump_scale", self.pump_scale >= 0.0, "must be nonnegative")?;
        named("dt_kappa", self.dt_kappa > 0.0, "must be positive")?;
        named("t_end_kappa", self.t_end_kappa > 0.0, "must be positive")?;
        named(
            "sigma_over_kappa",
            self.sigma_over_kappa > 0.0,
            "must be positive",
        )?;
        named("n_starts", self.n_starts >= 1, "must be at least 1")?;
        named("j_max", self.j_max >= 1, "must be at least 1")?;
        named("n_max", self.n_max >= 1, "must be at least 1")?;
        named(
            "delta_scan_points",
            self.delta_scan_points >= 2 && self.delta_scan_min < self.delta_scan_max,
            "needs at least 2 points and min < max",
        )?;
        named(
            "sigma_scan_points",
            self.sigma_scan_points >= 2 && self.sigma_scan_min < self.sigma_scan_max,
            "needs at least 2 points and min < max",
        )?;
        if !matches!(
            self.profile.as_str(),
            "constant" | "fourier" | "monochromatic" | "harmonic"
        ) {
            return Err(Error::Config(format!(
                "unknown profile {:?}; expected constant, fourier, monochromatic or harmonic",
                self.profile
            )));
        }
        if !matches!(self.log_base.as_str(), "e" | "2") {
            return Err(Error::Config(format!(
                "unknown log_base {:?}; expected \"e\" or \"2\"",
                self.log_base
            )));
        }
        Ok(())
    }

    /// Laboratory parameters implied by this configuration.
    pub fn lab_params(&self) -> LabParams {
        let two_pi = 2.0 * std::f64::consts::PI;
        LabParams {
            omega_m: two_pi * self.mechanical_freq_hz,
            omega_b: two_pi * self.bogoliubov_freq_hz,
            temperature: self.temperature_k,
            q_factor: self.q_factor,
            mass: self.mass_kg,
            power: self.power_w,
            finesse: self.finesse,
            cavity_len: self.cavity_len_m,
            lambda_c: self.lambda_c_m,
            delta_over_omega_m: self.delta_over_omega_m,
            zeta_over_chi: self.zeta_over_chi,
        }
    }

    /// Scaled pump rate actually applied: pump_scale * eta0.
    pub fn operating_eta(&self, p: &SystemParams) -> f64 {
        self.pump_scale * p.eta0
    }

    /// Build the configured pump profile.
    ///
    /// Coefficient arrays shorter than the configured order are padded
    /// with zeros. An empty harmonic series defaults to the pure
    /// fundamental (A_1 = 1), the canonical resonant drive. Fourier
    /// coefficients are rescaled onto the constant-energy shell; shifts
    /// left empty are drawn from `seed`.
    pub fn profile(&self, p: &SystemParams) -> Result<PumpProfile> {
        let eta0 = self.operating_eta(p);
        let sigma = self.sigma_over_kappa * p.kappa;
        let resize = |v: &[f64], len: usize| -> Result<Vec<f64>> {
            if v.len() > len {
                return Err(Error::Config(format!(
                    "{} profile coefficients given, at most {} allowed",
                    v.len(),
                    len
                )));
            }
            let mut out = v.to_vec();
            out.resize(len, 0.0);
            Ok(out)
        };
        match self.profile.as_str() {
            "constant" => Ok(PumpProfile::Constant { eta0 }),
            "monochromatic" => Ok(PumpProfile::Monochromatic { eta0, sigma }),
            "harmonic" => {
                let mut a = resize(&self.profile_a, self.n_max)?;
                let b = resize(&self.profile_b, self.n_max)?;
                if self.profile_a.is_empty() && self.profile_b.is_empty() {
                    a[0] = 1.0;
                }
                Ok(PumpProfile::HarmonicSeries { eta0, sigma, a, b })
            }
            "fourier" => {
                let tau = TAU_KAPPA / p.kappa;
                let a = resize(&self.profile_a, self.j_max)?;
                let b = resize(&self.profile_b, self.j_max)?;
                let shifts = if self.profile_shifts.is_empty() {
                    let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                    let PumpProfile::FourierOc { shifts, .. } =
                        PumpProfile::fourier_with_random_shifts(eta0, tau, self.j_max, &mut rng)
                    else {
                        unreachable!()
                    };
                    shifts
                } else if self.profile_shifts.len() == self.j_max {
                    self.profile_shifts.clone()
                } else {
                    return Err(Error::Config(format!(
                        "profile_shifts has {} entries but j_max is {}",
                        self.profile_shifts.len(),
                        self.j_max
                    )));
                };
                crate::modulation::normalize_energy(&PumpProfile::FourierOc {
                    eta0,
                    tau,
                    a,
                    b,
                    shifts,
                })
            }
            _ => unreachable!("validated"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::derive_params;

    #[test]
    fn empty_file_is_the_default_configuration() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let cfg = RunConfig {
            mass_kg: 5.000000000000001e-11,
            pump_scale: 0.30000000000000004,
            profile_a: vec![0.1234567890123456, -1.0 / 3.0],
            campaign: "fig-styles".into(),
            ..RunConfig::default()
        };
        let text = cfg.to_toml_string();
        let back = RunConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
        // And the canonical form is stable under a second round trip.
        assert_eq!(text, back.to_toml_string());
    }

    #[test]
    fn unknown_keys_are_fatal_and_named() {
        let err = RunConfig::from_toml_str("pump_scael = 0.3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("pump_scael"), "message was: {msg}");
    }

    #[test]
    fn partial_files_override_only_their_keys() {
        let cfg = RunConfig::from_toml_str("pump_scale = 0.5\nseed = 99\n").unwrap();
        assert_eq!(cfg.pump_scale, 0.5);
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.finesse, RunConfig::default().finesse);
    }

    #[test]
    fn bad_values_are_rejected_with_the_field_name() {
        let err = RunConfig::from_toml_str("dt_kappa = -1.0\n").unwrap_err();
        assert!(err.to_string().contains("dt_kappa"));
        let err = RunConfig::from_toml_str("profile = \"square\"\n").unwrap_err();
        assert!(err.to_string().contains("square"));
        let err = RunConfig::from_toml_str("log_base = \"10\"\n").unwrap_err();
        assert!(err.to_string().contains("log_base"));
    }

    #[test]
    fn lab_params_convert_frequencies_to_angular() {
        let cfg = RunConfig::default();
        let lab = cfg.lab_params();
        assert_eq!(lab.omega_m, 2.0 * std::f64::consts::PI * 3.0e6);
        assert_eq!(lab.omega_b, lab.omega_m);
        assert_eq!(lab.mass, 5.0e-11);
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.sha256_hex(), b.sha256_hex());
        assert_eq!(a.sha256_hex().len(), 64);
        b.seed = 8;
        assert_ne!(a.sha256_hex(), b.sha256_hex());
    }

    #[test]
    fn profile_construction_as_configured() {
        let cfg = RunConfig::default();
        let p = derive_params(&cfg.lab_params()).unwrap();
        let eta_op = cfg.operating_eta(&p);

        let c = cfg.profile(&p).unwrap();
        assert_eq!(c, PumpProfile::Constant { eta0: eta_op });

        let mut mono = cfg.clone();
        mono.profile = "monochromatic".into();
        assert_eq!(
            mono.profile(&p).unwrap(),
            PumpProfile::Monochromatic {
                eta0: eta_op,
                sigma: 0.75 * p.kappa
            }
        );

        // Empty harmonic arrays default to the pure fundamental.
        let mut harm = cfg.clone();
        harm.profile = "harmonic".into();
        if let PumpProfile::HarmonicSeries { a, b, .. } = harm.profile(&p).unwrap() {
            assert_eq!(a[0], 1.0);
            assert!(a[1..].iter().all(|c| *c == 0.0));
            assert!(b.iter().all(|c| *c == 0.0));
        } else {
            panic!("wrong variant");
        }

        // Fourier shifts come deterministically from the seed.
        let mut four = cfg.clone();
        four.profile = "fourier".into();
        let p1 = four.profile(&p).unwrap();
        let p2 = four.profile(&p).unwrap();
        assert_eq!(p1, p2);
        if let PumpProfile::FourierOc { shifts, tau, .. } = &p1 {
            assert_eq!(shifts.len(), 6);
            assert!(shifts.iter().any(|s| *s != 0.0));
            assert_eq!(*tau, TAU_KAPPA / p.kappa);
        } else {
            panic!("wrong variant");
        }

        // Oversized coefficient arrays are a configuration error.
        let mut over = cfg.clone();
        over.profile = "harmonic".into();
        over.profile_a = vec![0.0; 9];
        assert!(over.profile(&p).is_err());
    }
}
