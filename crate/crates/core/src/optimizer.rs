//! Derivative-free optimization of pump-profile coefficients.
//!
//! A standard Nelder-Mead simplex (reflection 1, expansion 2, contraction
//! 1/2, shrink 1/2) minimizes an objective over the profile coefficients;
//! the multistart driver runs several independent simplexes in parallel
//! from seeded random starting points and keeps the best incumbent.
//!
//! Constraints are enforced by construction on every candidate before the
//! objective runs: Fourier coefficients are rescaled onto the constant
//! mean-square-energy shell, harmonic-series coefficients are radially
//! projected onto the unit ball. Candidates that cannot be made feasible
//! (or whose simulation fails) evaluate to an infinite penalty.

use crate::dynamics::{initial_covariance, integrate, periodic_steady_max};
use crate::error::{Error, Result};
use crate::modulation::{normalize_energy, PumpProfile};
use crate::physics::SystemParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Simplex search settings.
#[derive(Clone, Copy, Debug)]
pub struct NmOptions {
    /// Hard cap on objective evaluations.
    pub max_evals: usize,
    /// Terminate when the simplex diameter (max-norm) falls below this.
    pub diameter_tol: f64,
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions {
            max_evals: 500,
            diameter_tol: 1e-4,
            initial_step: 0.1,
        }
    }
}

/// Result of one simplex run.
#[derive(Clone, Debug)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Minimize `f` from `x0` with the Nelder-Mead simplex.
pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &NmOptions) -> NmResult {
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    let n = x0.len();
    assert!(n > 0, "empty coefficient space");
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        f(x)
    };

    // Initial simplex: x0 plus one axis step per dimension.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        if evals >= opts.max_evals {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }

    let diameter = |s: &[(Vec<f64>, f64)]| -> f64 {
        let best = &s[0].0;
        s.iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(best)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    };

    'outer: while simplex.len() == n + 1 {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if evals >= opts.max_evals || diameter(&simplex) < opts.diameter_tol {
            break;
        }

        // Centroid of all vertices but the worst.
        let mut c = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (ci, xi) in c.iter_mut().zip(x) {
                *ci += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let point = |coef: f64| -> Vec<f64> {
            c.iter()
                .zip(&worst.0)
                .map(|(ci, wi)| ci + coef * (ci - wi))
                .collect()
        };

        let xr = point(ALPHA);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            // Best so far: try to expand further along the same direction.
            if evals >= opts.max_evals {
                simplex[n] = (xr, fr);
                break;
            }
            let xe = point(ALPHA * GAMMA);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            // Contract, either outside (toward the reflection) or inside.
            if evals >= opts.max_evals {
                break;
            }
            let (xc, against) = if fr < worst.1 {
                (point(ALPHA * RHO), fr)
            } else {
                (point(-RHO), worst.1)
            };
            let fc = eval(&xc, &mut evals);
            if fc <= against {
                simplex[n] = (xc, fc);
            } else {
                // Shrink everything toward the best vertex.
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    if evals >= opts.max_evals {
                        break 'outer;
                    }
                    let x: Vec<f64> = vertex
                        .0
                        .iter()
                        .zip(&best)
                        .map(|(xi, bi)| bi + SIGMA * (xi - bi))
                        .collect();
                    let v = eval(&x, &mut evals);
                    *vertex = (x, v);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    NmResult { x, value, evals }
}

/// Flat coefficient vector (a then b) of an optimizable profile.
pub fn coefficients(profile: &PumpProfile) -> Option<Vec<f64>> {
    match profile {
        PumpProfile::FourierOc { a, b, .. } | PumpProfile::HarmonicSeries { a, b, .. } => {
            Some(a.iter().chain(b).copied().collect())
        }
        _ => None,
    }
}

/// Rebuild a profile from raw coefficients, enforcing the variant
/// constraint by construction: energy-shell rescaling for the Fourier
/// profile (which can fail), radial ball projection for the harmonic
/// series (which cannot).
pub fn profile_from(template: &PumpProfile, x: &[f64]) -> Result<PumpProfile> {
    match template {
        PumpProfile::FourierOc {
            eta0,
            tau,
            a,
            shifts,
            ..
        } => {
            let j = a.len();
            debug_assert_eq!(x.len(), 2 * j);
            let raw = PumpProfile::FourierOc {
                eta0: *eta0,
                tau: *tau,
                a: x[..j].to_vec(),
                b: x[j..].to_vec(),
                shifts: shifts.clone(),
            };
            normalize_energy(&raw)
        }
        PumpProfile::HarmonicSeries { eta0, sigma, a, .. } => {
            let nm = a.len();
            debug_assert_eq!(x.len(), 2 * nm);
            let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            let s = if norm > 1.0 { 1.0 / norm } else { 1.0 };
            Ok(PumpProfile::HarmonicSeries {
                eta0: *eta0,
                sigma: *sigma,
                a: x[..nm].iter().map(|c| c * s).collect(),
                b: x[nm..].iter().map(|c| c * s).collect(),
            })
        }
        _ => Err(Error::InfeasibleProfile {
            reason: "profile has no free coefficients to optimize".into(),
        }),
    }
}

/// Outcome of one multistart slot, suitable for line-oriented JSON logs.
#[derive(Clone, Debug, Serialize)]
pub struct StartRecord {
    pub start_index: usize,
    pub seed: u64,
    /// Best objective value reached from this start (maximization sense);
    /// minus infinity when every candidate was infeasible.
    pub value: f64,
    pub evals: usize,
    pub feasible: bool,
    /// Raw coefficient vector at the per-start optimum.
    pub coeffs: Vec<f64>,
}

/// Best profile across all starts, plus the per-start log.
#[derive(Clone, Debug)]
pub struct OptimizeOutcome {
    pub best_profile: PumpProfile,
    pub best_value: f64,
    pub best_start: usize,
    pub records: Vec<StartRecord>,
}

/// Maximize `objective` over the free coefficients of `template` with
/// `n_starts` independent simplex runs.
///
/// Start 0 begins exactly at the template's own coefficients, so the
/// incumbent can never fall below the unoptimized profile; later starts
/// perturb each coefficient by U(-0.3, 0.3). Per-start seeds are drawn
/// up front from a root generator, and results are collected in start
/// order, making the outcome independent of the worker-pool size.
pub fn multistart_optimize(
    objective: &(impl Fn(&PumpProfile) -> Result<f64> + Sync),
    template: &PumpProfile,
    n_starts: usize,
    seed: u64,
    nm: &NmOptions,
) -> Result<OptimizeOutcome> {
    let x_init = coefficients(template).ok_or_else(|| Error::InfeasibleProfile {
        reason: "profile has no free coefficients to optimize".into(),
    })?;
    if n_starts == 0 {
        return Err(Error::InfeasibleProfile {
            reason: "n_starts must be at least 1".into(),
        });
    }

    let mut root = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..n_starts).map(|_| root.random()).collect();

    let penalized = |x: &[f64]| -> f64 {
        match profile_from(template, x) {
            Ok(p) if p.feasibility() => match objective(&p) {
                Ok(v) => -v,
                Err(_) => f64::INFINITY,
            },
            _ => f64::INFINITY,
        }
    };

    let records: Vec<StartRecord> = seeds
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let mut x0 = x_init.clone();
            if k > 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(*s);
                for c in &mut x0 {
                    *c += rng.random_range(-0.3..0.3);
                }
            }
            let res = nelder_mead(&penalized, &x0, nm);
            let value = -res.value;
            StartRecord {
                start_index: k,
                seed: *s,
                feasible: value.is_finite(),
                value,
                evals: res.evals,
                coeffs: res.x,
            }
        })
        .collect();

    let best = records
        .iter()
        .filter(|r| r.feasible)
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .ok_or(Error::AllStartsInfeasible { starts: n_starts })?;
    let best_profile = profile_from(template, &best.coeffs)?;
    Ok(OptimizeOutcome {
        best_profile,
        best_value: best.value,
        best_start: best.start_index,
        records,
    })
}

/// Short-horizon objective: mirror-atom entanglement at the end of the
/// fixed window [0, tau], starting from the thermal state.
pub fn objective_short(p: &SystemParams, profile: &PumpProfile, dt: f64, tau: f64) -> Result<f64> {
    let v0 = initial_covariance(p.nbar);
    let tr = integrate(p, profile, &v0, tau, dt, 50)?;
    Ok(*tr.e_ma.last().expect("trajectory has samples"))
}

/// Long-time objective: converged per-period maximum of the mirror-atom
/// entanglement (algebraic steady-state value for a constant drive).
pub fn objective_long(p: &SystemParams, profile: &PumpProfile, dt: f64) -> Result<f64> {
    Ok(periodic_steady_max(p, profile, dt)?.max_e_ma)
}

/// One row of a coupling-robustness report.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RobustnessRow {
    /// Multiplier applied to the optomechanical coupling chi.
    pub factor: f64,
    /// Long-time objective at the scaled coupling.
    pub value: f64,
    /// Fractional drop relative to the nominal coupling (negative = gain).
    pub drop_fraction: f64,
}

/// Re-evaluate a fixed profile under scaled optomechanical coupling
/// (the atomic coupling zeta stays at its nominal value).
pub fn robustness_check(
    p: &SystemParams,
    profile: &PumpProfile,
    dt: f64,
    factors: &[f64],
) -> Result<Vec<RobustnessRow>> {
    let value_at = |factor: f64| -> Result<f64> {
        let mut scaled = p.clone();
        scaled.chi *= factor;
        objective_long(&scaled, profile, dt)
    };
    let nominal = value_at(1.0)?;
    factors
        .iter()
        .map(|&factor| {
            let value = if factor == 1.0 {
                nominal
            } else {
                value_at(factor)?
            };
            let drop_fraction = if nominal.abs() > 0.0 {
                (nominal - value) / nominal
            } else {
                0.0
            };
            Ok(RobustnessRow {
                factor,
                value,
                drop_fraction,
            })
        })
        .collect()
}
