//! Time-dependent pump profiles and their constraints.
//!
//! Four variants:
//! - `Constant`: eta(t) = eta0.
//! - `FourierOc`: eta(t) = eta0 (1 + sum_j A_j cos(w_j t) + B_j sin(w_j t))
//!   with w_j = 2 pi j / tau + delta_j, delta_j a small random detuning of the
//!   j-th harmonic. Coefficients are dimensionless relative to eta0 and are
//!   rescaled so the mean-square pump rate over [0, tau] equals eta0^2
//!   (the constant-drive energy).
//! - `Monochromatic`: eta(t) = eta0'' + eta0' (1 - sin Sigma t) with
//!   eta0' = eta0/2, eta0'' = eta0/8, so eta stays in [eta0/8, 9 eta0/8].
//! - `HarmonicSeries`: eta(t) = eta0'' + eta0' (1 - sum_n A_n sin(n Sigma t) +
//!   B_n cos(n Sigma t)) with sum_n (A_n^2 + B_n^2) <= 1; the coefficient
//!   ball contains the monochromatic profile at A_1 = 1.
//!
//! Positivity of eta(t) is a hard feasibility condition for every variant.

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Optimization horizon for the Fourier profile, in units of 1/kappa.
pub const TAU_KAPPA: f64 = 3.4;

/// Number of positivity sample points per period/horizon.
const POSITIVITY_SAMPLES: usize = 10_000;

/// A time-dependent pump amplitude eta(t).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum PumpProfile {
    Constant {
        eta0: f64,
    },
    FourierOc {
        eta0: f64,
        /// Horizon tau (s); harmonics are 2 pi j / tau + shifts[j-1].
        tau: f64,
        a: Vec<f64>,
        b: Vec<f64>,
        /// Random angular-frequency shifts delta_j (s^-1), one per harmonic.
        shifts: Vec<f64>,
    },
    Monochromatic {
        eta0: f64,
        /// Modulation angular frequency Sigma (s^-1).
        sigma: f64,
    },
    HarmonicSeries {
        eta0: f64,
        /// Base angular frequency Sigma (s^-1) of the harmonic series.
        sigma: f64,
        a: Vec<f64>,
        b: Vec<f64>,
    },
}

impl PumpProfile {
    /// Draw a Fourier profile with zero coefficients and random harmonic
    /// shifts delta_j ~ U[-0.05, 0.05] * (2 pi / tau).
    pub fn fourier_with_random_shifts(
        eta0: f64,
        tau: f64,
        j_max: usize,
        rng: &mut impl Rng,
    ) -> PumpProfile {
        let base = 2.0 * std::f64::consts::PI / tau;
        let shifts = (0..j_max)
            .map(|_| rng.random_range(-0.05..0.05) * base)
            .collect();
        PumpProfile::FourierOc {
            eta0,
            tau,
            a: vec![0.0; j_max],
            b: vec![0.0; j_max],
            shifts,
        }
    }

    /// Pump rate at time `t`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            PumpProfile::Constant { eta0 } => *eta0,
            PumpProfile::FourierOc {
                eta0,
                tau,
                a,
                b,
                shifts,
            } => {
                let base = 2.0 * std::f64::consts::PI / tau;
                let mut f = 0.0;
                for j in 0..a.len() {
                    let w = base * (j + 1) as f64 + shifts[j];
                    f += a[j] * (w * t).cos() + b[j] * (w * t).sin();
                }
                eta0 * (1.0 + f)
            }
            PumpProfile::Monochromatic { eta0, sigma } => {
                eta0 / 8.0 + (eta0 / 2.0) * (1.0 - (sigma * t).sin())
            }
            PumpProfile::HarmonicSeries { eta0, sigma, a, b } => {
                let mut f = 0.0;
                for n in 0..a.len() {
                    let w = sigma * (n + 1) as f64;
                    f += a[n] * (w * t).sin() + b[n] * (w * t).cos();
                }
                eta0 / 8.0 + (eta0 / 2.0) * (1.0 - f)
            }
        }
    }

    /// Base pump rate eta0.
    pub fn eta0(&self) -> f64 {
        match self {
            PumpProfile::Constant { eta0 }
            | PumpProfile::FourierOc { eta0, .. }
            | PumpProfile::Monochromatic { eta0, .. }
            | PumpProfile::HarmonicSeries { eta0, .. } => *eta0,
        }
    }

    /// Modulation period for the periodic variants.
    pub fn period(&self) -> Option<f64> {
        match self {
            PumpProfile::Monochromatic { sigma, .. }
            | PumpProfile::HarmonicSeries { sigma, .. } => Some(2.0 * std::f64::consts::PI / sigma),
            _ => None,
        }
    }

    /// Variant-specific constraints: energy shell for the Fourier profile,
    /// coefficient ball for the harmonic series, and positivity of eta(t)
    /// for all variants (analytic triangle bound, then 10^4-point sampling).
    pub fn feasibility(&self) -> bool {
        match self {
            PumpProfile::Constant { eta0 } => *eta0 >= 0.0,
            PumpProfile::FourierOc {
                eta0,
                tau,
                a,
                b,
                shifts,
            } => {
                if *eta0 < 0.0 {
                    return false;
                }
                // On the constant-energy shell: mean square equals eta0^2.
                let (m1, m2) = fourier_energy_moments(*tau, a, b, shifts);
                if (2.0 * m1 + m2).abs() > 1e-9 * (1.0 + m2) {
                    return false;
                }
                // Positivity: 1 + f(t) >= 0.
                let amp: f64 = a.iter().zip(b).map(|(x, y)| x.hypot(*y)).sum();
                if amp <= 1.0 {
                    return true;
                }
                self.sampled_min(*tau) >= 0.0
            }
            PumpProfile::Monochromatic { eta0, .. } => *eta0 >= 0.0,
            PumpProfile::HarmonicSeries { eta0, sigma, a, b } => {
                if *eta0 < 0.0 {
                    return false;
                }
                let norm2: f64 = a.iter().zip(b).map(|(x, y)| x * x + y * y).sum();
                if norm2 > 1.0 + 1e-12 {
                    return false;
                }
                let amp: f64 = a.iter().zip(b).map(|(x, y)| x.hypot(*y)).sum();
                if amp <= 1.25 {
                    // eta0/8 + eta0/2 (1 - amp) >= 0 iff amp <= 5/4.
                    return true;
                }
                self.sampled_min(2.0 * std::f64::consts::PI / sigma) >= 0.0
            }
        }
    }

    /// Minimum of eta over [0, span] sampled at the positivity resolution.
    fn sampled_min(&self, span: f64) -> f64 {
        (0..=POSITIVITY_SAMPLES)
            .map(|i| self.eval(span * i as f64 / POSITIVITY_SAMPLES as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest relative change of eta per 1/kappa, sampled over `span`; the
    /// adiabatic-following approximation is considered safe below 0.1.
    pub fn max_relative_rate(&self, kappa: f64, span: f64) -> f64 {
        let n = 2000;
        let h = 0.01 / kappa;
        (0..=n)
            .map(|i| {
                let t = span * i as f64 / n as f64;
                let d = (self.eval(t + h) - self.eval((t - h).max(0.0))).abs() / (h + t.min(h)); // two-sided except at t=0
                d / (kappa * self.eval(t).abs().max(1e-300))
            })
            .fold(0.0, f64::max)
    }
}

/// Mean-of-f and mean-of-f^2 over [0, tau] for the Fourier modulation
/// f(t) = sum_j A_j cos(w_j t) + B_j sin(w_j t), evaluated in closed form
/// (the w_j are not exact harmonics, so all cross-terms contribute).
fn fourier_energy_moments(tau: f64, a: &[f64], b: &[f64], shifts: &[f64]) -> (f64, f64) {
    let base = 2.0 * std::f64::consts::PI / tau;
    let w: Vec<f64> = (0..a.len())
        .map(|j| base * (j + 1) as f64 + shifts[j])
        .collect();
    let cm = |wv: f64| cos_mean(wv * tau);
    let sm = |wv: f64| sin_mean(wv * tau);

    let mut m1 = 0.0;
    for j in 0..a.len() {
        m1 += a[j] * cm(w[j]) + b[j] * sm(w[j]);
    }
    let mut m2 = 0.0;
    for j in 0..a.len() {
        for k in 0..a.len() {
            let (wm, wp) = (w[j] - w[k], w[j] + w[k]);
            let cc = 0.5 * (cm(wm) + cm(wp));
            let ss = 0.5 * (cm(wm) - cm(wp));
            let cs = 0.5 * (sm(wp) - sm(wm)); // <cos(w_j t) sin(w_k t)>
            let sc = 0.5 * (sm(wp) + sm(wm)); // <sin(w_j t) cos(w_k t)>
            m2 += a[j] * a[k] * cc + b[j] * b[k] * ss + a[j] * b[k] * cs + b[j] * a[k] * sc;
        }
    }
    (m1, m2)
}

/// (1/tau) int_0^tau cos(wt) dt = sin(x)/x at x = w tau.
fn cos_mean(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// (1/tau) int_0^tau sin(wt) dt = (1 - cos(x))/x at x = w tau (odd in x).
fn sin_mean(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        x * (0.5 - x2 / 24.0 + x2 * x2 / 720.0)
    } else {
        (1.0 - x.cos()) / x
    }
}

/// Mean-square pump rate over [0, tau] divided by eta0^2 (Fourier variant).
pub fn fourier_mean_square_ratio(tau: f64, a: &[f64], b: &[f64], shifts: &[f64]) -> f64 {
    let (m1, m2) = fourier_energy_moments(tau, a, b, shifts);
    1.0 + 2.0 * m1 + m2
}

/// Rescale the Fourier coefficients by the positive root s of
/// (1/tau) int eta(t; s)^2 dt = eta0^2, i.e. 2 s M1 + s^2 M2 = 0.
///
/// All-zero coefficient vectors already satisfy the constraint and pass
/// through unchanged; a nonzero vector whose equation has no positive root
/// cannot be placed on the energy shell and is an error. Positivity of the
/// rescaled profile is NOT checked here; [`PumpProfile::feasibility`] flags it.
pub fn normalize_energy(profile: &PumpProfile) -> Result<PumpProfile> {
    let PumpProfile::FourierOc {
        eta0,
        tau,
        a,
        b,
        shifts,
    } = profile
    else {
        return Ok(profile.clone());
    };
    if a.iter().chain(b).all(|c| *c == 0.0) {
        return Ok(profile.clone());
    }
    let (m1, m2) = fourier_energy_moments(*tau, a, b, shifts);
    // m2 is the mean of f^2 > 0 for a nonzero coefficient vector. Roots
    // below 1e-9 only exist through rounding noise in m1 (e.g. sin(2 pi k)
    // evaluating to ~1e-16 for exact harmonics) and would annihilate the
    // modulation rather than rescale it.
    let s = -2.0 * m1 / m2;
    if !s.is_finite() || s <= 1e-9 {
        return Err(Error::NoPositiveRoot);
    }
    Ok(PumpProfile::FourierOc {
        eta0: *eta0,
        tau: *tau,
        a: a.iter().map(|c| c * s).collect(),
        b: b.iter().map(|c| c * s).collect(),
        shifts: shifts.clone(),
    })
}
