//! Parameter sweeps built on the integrator.
//!
//! Both scans parallelize over grid points; points are collected in grid
//! order and any per-point failures are recorded rather than aborting the
//! whole sweep, so one unstable corner of parameter space cannot destroy a
//! campaign's worth of results.

use crate::dynamics::{initial_covariance, integrate, periodic_steady_max};
use crate::error::Result;
use crate::modulation::PumpProfile;
use crate::physics::{derive_params, LabParams};
use rayon::prelude::*;

/// Evenly spaced inclusive grid.
pub fn linspace(min: f64, max: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2, "a grid needs at least two points");
    let step = (max - min) / (points - 1) as f64;
    (0..points).map(|i| min + step * i as f64).collect()
}

/// A grid point whose simulation failed, with the reason.
#[derive(Clone, Debug)]
pub struct ScanFailure {
    pub index: usize,
    pub coordinate: f64,
    pub message: String,
}

/// Entanglement history at one cavity detuning.
#[derive(Clone, Debug)]
pub struct DetuningTrace {
    pub delta_over_omega_m: f64,
    pub kappa_t: Vec<f64>,
    pub e_cm: Vec<f64>,
    pub e_ca: Vec<f64>,
    pub e_ma: Vec<f64>,
}

impl DetuningTrace {
    fn argmax(times: &[f64], values: &[f64]) -> (f64, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, v) in values.iter().enumerate() {
            if *v > best.1 {
                best = (i, *v);
            }
        }
        (times[best.0], best.1)
    }

    /// (kappa t, value) at the cavity-mirror maximum.
    pub fn peak_e_cm(&self) -> (f64, f64) {
        Self::argmax(&self.kappa_t, &self.e_cm)
    }

    /// (kappa t, value) at the mirror-atom maximum.
    pub fn peak_e_ma(&self) -> (f64, f64) {
        Self::argmax(&self.kappa_t, &self.e_ma)
    }
}

/// Transient entanglement versus cavity detuning under a constant pump.
#[derive(Clone, Debug)]
pub struct DetuningScan {
    pub traces: Vec<DetuningTrace>,
    pub failures: Vec<ScanFailure>,
}

impl DetuningScan {
    /// Detunings whose mirror-atom entanglement (above `floor`) does NOT
    /// peak later than the cavity-mirror entanglement. The expected
    /// generation sequence is cavity-mirror first, mirror-atom afterwards.
    pub fn delay_violations(&self, floor: f64) -> Vec<f64> {
        self.traces
            .iter()
            .filter(|tr| {
                let (t_cm, _) = tr.peak_e_cm();
                let (t_ma, peak_ma) = tr.peak_e_ma();
                peak_ma > floor && t_cm >= t_ma
            })
            .map(|tr| tr.delta_over_omega_m)
            .collect()
    }

    /// Detuning whose trace attains the largest mirror-atom entanglement.
    pub fn best_delta(&self) -> Option<f64> {
        self.traces
            .iter()
            .map(|tr| (tr.delta_over_omega_m, tr.peak_e_ma().1))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(d, _)| d)
    }
}

/// Sweep the cavity detuning at a fixed constant pump, integrating each
/// point over `t_end_kappa / kappa` and sampling the three pairwise
/// entanglements along the way.
pub fn detuning_scan(
    lab: &LabParams,
    pump_scale: f64,
    grid: &[f64],
    t_end_kappa: f64,
    dt_kappa: f64,
    min_samples: usize,
) -> Result<DetuningScan> {
    let results: Vec<(usize, Result<DetuningTrace>)> = grid
        .par_iter()
        .enumerate()
        .map(|(i, delta)| {
            let run = || -> Result<DetuningTrace> {
                let point = LabParams {
                    delta_over_omega_m: *delta,
                    ..*lab
                };
                let p = derive_params(&point)?;
                let profile = PumpProfile::Constant {
                    eta0: pump_scale * p.eta0,
                };
                let v0 = initial_covariance(p.nbar);
                let tr = integrate(
                    &p,
                    &profile,
                    &v0,
                    t_end_kappa / p.kappa,
                    dt_kappa / p.kappa,
                    min_samples,
                )?;
                Ok(DetuningTrace {
                    delta_over_omega_m: *delta,
                    kappa_t: tr.times.iter().map(|t| t * p.kappa).collect(),
                    e_cm: tr.e_cm,
                    e_ca: tr.e_ca,
                    e_ma: tr.e_ma,
                })
            };
            (i, run())
        })
        .collect();

    let mut scan = DetuningScan {
        traces: Vec::new(),
        failures: Vec::new(),
    };
    for (i, res) in results {
        match res {
            Ok(tr) => scan.traces.push(tr),
            Err(e) => scan.failures.push(ScanFailure {
                index: i,
                coordinate: grid[i],
                message: e.to_string(),
            }),
        }
    }
    Ok(scan)
}

/// Location of a resonance peak on a discrete grid.
#[derive(Clone, Copy, Debug)]
pub struct PeakEstimate {
    pub sigma_over_kappa: f64,
    pub value: f64,
    pub grid_index: usize,
}

/// Vertex abscissa of the parabola through three equally spaced samples;
/// falls back to `x0` when the points do not bend downwards.
pub fn refine_parabolic(xm: f64, x0: f64, xp: f64, ym: f64, y0: f64, yp: f64) -> f64 {
    let denom = ym - 2.0 * y0 + yp;
    if denom >= 0.0 {
        return x0;
    }
    let h = 0.5 * (xp - xm);
    (x0 + 0.5 * h * (ym - yp) / denom).clamp(xm, xp)
}

/// Long-time mirror-atom entanglement versus modulation frequency for the
/// monochromatic drive.
#[derive(Clone, Debug)]
pub struct SigmaScan {
    pub sigma_over_kappa: Vec<f64>,
    /// Converged per-period maximum, None where the point failed.
    pub max_e_ma: Vec<Option<f64>>,
    /// Periods needed for convergence, None where the point failed.
    pub periods: Vec<Option<usize>>,
    pub failures: Vec<ScanFailure>,
}

impl SigmaScan {
    /// Grid argmax with parabolic refinement from the two neighbors.
    pub fn peak(&self) -> Option<PeakEstimate> {
        let (i, value) = self
            .max_e_ma
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (i, v)))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        let x = &self.sigma_over_kappa;
        let refined = match (
            i.checked_sub(1).and_then(|j| self.max_e_ma[j]),
            self.max_e_ma.get(i + 1).copied().flatten(),
        ) {
            (Some(ym), Some(yp)) => refine_parabolic(x[i - 1], x[i], x[i + 1], ym, value, yp),
            _ => x[i],
        };
        Some(PeakEstimate {
            sigma_over_kappa: refined,
            value,
            grid_index: i,
        })
    }

    /// Indices of strict interior local maxima above `floor`.
    ///
    /// Each converged point is compared against its nearest converged
    /// neighbor on either side, so failed grid points (e.g. a parametric
    /// instability window next to the resonance) are gaps in the curve
    /// rather than walls that hide the peak. The first and last converged
    /// points are exterior and never reported.
    pub fn interior_maxima(&self, floor: f64) -> Vec<usize> {
        let pts: Vec<(usize, f64)> = self
            .max_e_ma
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (i, v)))
            .collect();
        pts.windows(3)
            .filter(|w| w[1].1 > floor && w[1].1 > w[0].1 && w[1].1 > w[2].1)
            .map(|w| w[1].0)
            .collect()
    }
}

/// Sweep the monochromatic modulation frequency, driving each point to its
/// periodic quasi-steady state.
pub fn sigma_resonance_scan(
    lab: &LabParams,
    pump_scale: f64,
    grid: &[f64],
    dt_kappa: f64,
) -> Result<SigmaScan> {
    let p = derive_params(lab)?;
    let eta_op = pump_scale * p.eta0;

    let results: Vec<Result<(f64, usize)>> = grid
        .par_iter()
        .map(|sk| {
            let profile = PumpProfile::Monochromatic {
                eta0: eta_op,
                sigma: sk * p.kappa,
            };
            periodic_steady_max(&p, &profile, dt_kappa / p.kappa).map(|r| (r.max_e_ma, r.periods))
        })
        .collect();

    let mut scan = SigmaScan {
        sigma_over_kappa: grid.to_vec(),
        max_e_ma: Vec::with_capacity(grid.len()),
        periods: Vec::with_capacity(grid.len()),
        failures: Vec::new(),
    };
    for (i, res) in results.into_iter().enumerate() {
        match res {
            Ok((e, per)) => {
                scan.max_e_ma.push(Some(e));
                scan.periods.push(Some(per));
            }
            Err(e) => {
                scan.max_e_ma.push(None);
                scan.periods.push(None);
                scan.failures.push(ScanFailure {
                    index: i,
                    coordinate: grid[i],
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(scan)
}
