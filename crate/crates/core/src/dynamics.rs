//! Time evolution of the covariance matrix.
//!
//! The second moments of the linearized system obey the differential
//! Lyapunov equation dV/dt = K(t) V + V K(t)^T + D, integrated here with a
//! fixed-step classical Runge-Kutta scheme. For a time-dependent pump the
//! drift is evaluated through the adiabatic steady-state amplitude
//! alpha_s(t) = eta(t) / sqrt(delta^2 + kappa^2).
//!
//! Two independent solution routes exist for constant drift:
//! the algebraic steady state (21-unknown linear solve of K V + V K^T + D = 0)
//! and the closed-form propagation V(t) = V_ss + e^{Kt} (V0 - V_ss) e^{K^T t};
//! both serve as oracles for the stepper.

use crate::entanglement::{log_negativity, ModeId};
use crate::error::{Error, Result};
use crate::gaussian::{min_symplectic_eigenvalue, symmetrize, CovMatrix, PHYSICALITY_TOL};
use crate::modulation::PumpProfile;
use crate::physics::{drift_matrix, max_re_eig, noise_matrix, SystemParams};
use nalgebra::{DMatrix, DVector, Matrix6};

/// Integration diverges when trace(V) exceeds this multiple of trace(V(0)).
pub const INSTABILITY_TRACE_FACTOR: f64 = 1e6;

/// On physicality loss the step is halved and the run restarted, at most
/// this many times.
pub const MAX_DT_RETRIES: u32 = 4;

/// Largest relative pump change per 1/kappa for which the adiabatic
/// drift approximation is considered safe.
pub const ADIABATIC_RATE_LIMIT: f64 = 0.1;

/// Periodic drives are integrated period by period until the per-period
/// maximum of E_MA settles to this relative tolerance.
pub const PERIOD_REL_TOL: f64 = 1e-4;

/// Upper bound on integrated periods before giving up on convergence.
pub const MAX_PERIODS: usize = 200;

/// Minimum integration steps per modulation period.
pub const MIN_STEPS_PER_PERIOD: usize = 200;

/// Initial state: cavity and atomic modes in vacuum, mirror in a thermal
/// state with occupancy nbar. Variances are (2 nbar + 1)/2 per quadrature.
pub fn initial_covariance(nbar: f64) -> CovMatrix {
    let th = nbar + 0.5;
    Matrix6::from_diagonal(&nalgebra::Vector6::new(0.5, 0.5, th, th, 0.5, 0.5))
}

/// Drift matrix at time `t` under the adiabatic-following approximation.
pub fn drift_at(p: &SystemParams, profile: &PumpProfile, t: f64) -> Matrix6<f64> {
    let alpha = profile.eval(t) / p.delta.hypot(p.kappa);
    drift_matrix(p, alpha)
}

/// Right-hand side K V + V K^T + D; symmetric whenever V is.
fn rhs(k: &Matrix6<f64>, v: &CovMatrix, d: &Matrix6<f64>) -> Matrix6<f64> {
    let kv = k * v;
    kv + kv.transpose() + d
}

/// One classical Runge-Kutta step of the covariance equation, with the
/// drift sampled at t, t + dt/2 and t + dt; the result is resymmetrized.
pub fn rk4_step(
    k_of_t: &impl Fn(f64) -> Matrix6<f64>,
    d: &Matrix6<f64>,
    v: &CovMatrix,
    t: f64,
    dt: f64,
) -> CovMatrix {
    let half = 0.5 * dt;
    let k1 = rhs(&k_of_t(t), v, d);
    let km = k_of_t(t + half);
    let k2 = rhs(&km, &(v + half * k1), d);
    let k3 = rhs(&km, &(v + half * k2), d);
    let k4 = rhs(&k_of_t(t + dt), &(v + dt * k3), d);
    let mut out = v + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
    symmetrize(&mut out);
    out
}

/// Sampled solution of one integration attempt.
struct RawRun {
    times: Vec<f64>,
    cov: Vec<CovMatrix>,
    nu_min: Vec<f64>,
    dt_used: f64,
}

/// Integrate at a fixed step, storing roughly `min_samples` evenly spaced
/// covariance snapshots (always including t = 0 and t = t_end). Fails with
/// `Instability` on trace blow-up and `PhysicalityLoss` when a stored
/// sample violates the physicality bound.
fn run_fixed_dt(
    k_of_t: &impl Fn(f64) -> Matrix6<f64>,
    d: &Matrix6<f64>,
    v0: &CovMatrix,
    t_end: f64,
    dt: f64,
    min_samples: usize,
) -> Result<RawRun> {
    let n_steps = (t_end / dt).ceil().max(1.0) as usize;
    let dt_eff = t_end / n_steps as f64;
    let stride = (n_steps / min_samples.max(1)).max(1);
    let trace0 = v0.trace();

    let mut run = RawRun {
        times: Vec::with_capacity(n_steps / stride + 2),
        cov: Vec::new(),
        nu_min: Vec::new(),
        dt_used: dt_eff,
    };
    let mut store = |t: f64, v: &CovMatrix| -> Result<()> {
        let nu = min_symplectic_eigenvalue(v);
        if nu < 0.5 - PHYSICALITY_TOL {
            return Err(Error::PhysicalityLoss {
                t,
                nu_min: nu,
                retries: 0,
            });
        }
        run.times.push(t);
        run.cov.push(*v);
        run.nu_min.push(nu);
        Ok(())
    };

    let mut v = *v0;
    store(0.0, &v)?;
    for i in 0..n_steps {
        let t = i as f64 * dt_eff;
        v = rk4_step(k_of_t, d, &v, t, dt_eff);
        if !v.trace().is_finite() || v.trace() > INSTABILITY_TRACE_FACTOR * trace0 {
            return Err(Error::Instability { t: t + dt_eff });
        }
        if (i + 1) % stride == 0 || i + 1 == n_steps {
            store(t + dt_eff, &v)?;
        }
    }
    Ok(run)
}

/// One simulated trajectory: sampled covariances and derived observables.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub cov: Vec<CovMatrix>,
    /// Pump rate eta(t) at the sample times.
    pub eta: Vec<f64>,
    /// Cavity-mirror logarithmic negativity.
    pub e_cm: Vec<f64>,
    /// Cavity-atom logarithmic negativity.
    pub e_ca: Vec<f64>,
    /// Mirror-atom logarithmic negativity.
    pub e_ma: Vec<f64>,
    /// Minimum symplectic eigenvalue of the full state (physicality margin).
    pub nu_min: Vec<f64>,
    /// Step actually used after any halvings.
    pub dt_used: f64,
    /// Number of step halvings that were needed.
    pub retries: u32,
    /// False when the pump changes too fast for adiabatic following.
    pub adiabatic_ok: bool,
}

impl Trajectory {
    fn peak(times: &[f64], values: &[f64]) -> (f64, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, v) in values.iter().enumerate() {
            if *v > best.1 {
                best = (i, *v);
            }
        }
        (times[best.0], best.1)
    }

    /// (time, value) of the cavity-mirror entanglement maximum.
    pub fn peak_e_cm(&self) -> (f64, f64) {
        Self::peak(&self.times, &self.e_cm)
    }

    /// (time, value) of the cavity-atom entanglement maximum.
    pub fn peak_e_ca(&self) -> (f64, f64) {
        Self::peak(&self.times, &self.e_ca)
    }

    /// (time, value) of the mirror-atom entanglement maximum.
    pub fn peak_e_ma(&self) -> (f64, f64) {
        Self::peak(&self.times, &self.e_ma)
    }
}

/// Integrate the covariance equation from `v0` to `t_end`.
///
/// The step starts at `dt` and is halved (restarting the run) up to
/// [`MAX_DT_RETRIES`] times if a stored sample loses physicality; trace
/// blow-up aborts immediately since no step refinement rescues an unstable
/// drift. At least `min_samples` snapshots are stored when the horizon
/// allows, and entanglement observables are evaluated at every snapshot.
pub fn integrate(
    p: &SystemParams,
    profile: &PumpProfile,
    v0: &CovMatrix,
    t_end: f64,
    dt: f64,
    min_samples: usize,
) -> Result<Trajectory> {
    let d = noise_matrix(p);
    let k_of_t = |t: f64| drift_at(p, profile, t);

    let mut attempt = 0u32;
    let raw = loop {
        match run_fixed_dt(
            &k_of_t,
            &d,
            v0,
            t_end,
            dt / f64::powi(2.0, attempt as i32),
            min_samples,
        ) {
            Ok(run) => break run,
            Err(Error::PhysicalityLoss { t, nu_min, .. }) => {
                if attempt == MAX_DT_RETRIES {
                    return Err(Error::PhysicalityLoss {
                        t,
                        nu_min,
                        retries: attempt,
                    });
                }
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    };

    let n = raw.times.len();
    let mut tr = Trajectory {
        times: raw.times,
        cov: raw.cov,
        eta: Vec::with_capacity(n),
        e_cm: Vec::with_capacity(n),
        e_ca: Vec::with_capacity(n),
        e_ma: Vec::with_capacity(n),
        nu_min: raw.nu_min,
        dt_used: raw.dt_used,
        retries: attempt,
        adiabatic_ok: profile.max_relative_rate(p.kappa, t_end) <= ADIABATIC_RATE_LIMIT,
    };
    for (t, v) in tr.times.iter().zip(&tr.cov) {
        tr.eta.push(profile.eval(*t));
        tr.e_cm.push(log_negativity(v, ModeId::C, ModeId::M)?);
        tr.e_ca.push(log_negativity(v, ModeId::C, ModeId::A)?);
        tr.e_ma.push(log_negativity(v, ModeId::M, ModeId::A)?);
    }
    Ok(tr)
}

/// Solve the algebraic steady-state condition K V + V K^T + D = 0 for the
/// 21 independent entries of symmetric V. The drift must be strictly
/// stable, otherwise no steady state exists.
pub fn lyapunov_steady_state(k: &Matrix6<f64>, d: &Matrix6<f64>) -> Result<CovMatrix> {
    let max_re = max_re_eig(k);
    if max_re >= 0.0 || max_re.is_nan() {
        return Err(Error::UnstableDrift { max_re });
    }

    // Upper-triangle (i <= j) row-major packing of a symmetric 6x6.
    let idx = |i: usize, j: usize| -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * 6 - i * (i + 1) / 2 + j
    };

    let mut a = DMatrix::<f64>::zeros(21, 21);
    let mut b = DVector::<f64>::zeros(21);
    let mut row = 0;
    for i in 0..6 {
        for j in i..6 {
            for m in 0..6 {
                a[(row, idx(m, j))] += k[(i, m)];
                a[(row, idx(i, m))] += k[(j, m)];
            }
            b[row] = -d[(i, j)];
            row += 1;
        }
    }

    let x = a.lu().solve(&b).ok_or_else(|| Error::Conditioning {
        context: "steady-state solve",
        detail: "singular coefficient matrix".into(),
    })?;
    let mut v = Matrix6::zeros();
    for i in 0..6 {
        for j in 0..6 {
            v[(i, j)] = x[idx(i, j)];
        }
    }

    let residual = (k * v + v * k.transpose() + d).norm();
    let scale = (k.norm() * v.norm() + d.norm()).max(f64::MIN_POSITIVE);
    if residual > 1e-9 * scale {
        return Err(Error::Conditioning {
            context: "steady-state solve",
            detail: format!("relative residual {:.3e}", residual / scale),
        });
    }
    Ok(v)
}

/// Closed-form solution for a constant drift:
/// V(t) = V_ss + e^{Kt} (V0 - V_ss) e^{K^T t}.
pub fn constant_drift_solution(
    k: &Matrix6<f64>,
    d: &Matrix6<f64>,
    v0: &CovMatrix,
    t: f64,
) -> Result<CovMatrix> {
    let vss = lyapunov_steady_state(k, d)?;
    let ekt = (k * t).exp();
    let mut v = vss + ekt * (v0 - vss) * ekt.transpose();
    symmetrize(&mut v);
    Ok(v)
}

/// Long-time figure of merit for a periodic drive.
#[derive(Clone, Copy, Debug)]
pub struct PeriodResult {
    /// Largest mirror-atom entanglement over the last integrated period.
    pub max_e_ma: f64,
    /// Time at which that maximum occurred.
    pub t_at_max: f64,
    /// Number of periods integrated before convergence.
    pub periods: usize,
}

/// Integrate a periodic drive period by period from the thermal initial
/// state until the per-period maximum of the mirror-atom entanglement
/// changes by less than [`PERIOD_REL_TOL`] between consecutive periods,
/// twice in a row. The double requirement matters: the transient envelope
/// is not monotone, and at the crest of its overshoot two consecutive
/// maxima agree to first order, so a single small difference can fire 15-20%
/// above the settled value. A crest produces one small difference followed
/// by growing ones; only the true plateau produces a run of them.
///
/// A constant drive has no period; its long-time limit is the algebraic
/// steady state, evaluated directly.
pub fn periodic_steady_max(
    p: &SystemParams,
    profile: &PumpProfile,
    dt: f64,
) -> Result<PeriodResult> {
    let d = noise_matrix(p);
    let Some(period) = profile.period() else {
        let k = drift_at(p, profile, 0.0);
        let vss = lyapunov_steady_state(&k, &d)?;
        let e = log_negativity(&vss, ModeId::M, ModeId::A)?;
        return Ok(PeriodResult {
            max_e_ma: e,
            t_at_max: 0.0,
            periods: 0,
        });
    };

    let n_sub = ((period / dt).ceil() as usize).max(MIN_STEPS_PER_PERIOD);
    let dt_eff = period / n_sub as f64;
    let k_of_t = |t: f64| drift_at(p, profile, t);
    let mut v = initial_covariance(p.nbar);
    let trace0 = v.trace();
    let mut prev: Option<f64> = None;
    let mut settled = 0u32;

    for per in 1..=MAX_PERIODS {
        let t0 = (per - 1) as f64 * period;
        let mut mx = f64::NEG_INFINITY;
        let mut t_mx = t0;
        for i in 0..n_sub {
            let t = t0 + i as f64 * dt_eff;
            v = rk4_step(&k_of_t, &d, &v, t, dt_eff);
            if !v.trace().is_finite() || v.trace() > INSTABILITY_TRACE_FACTOR * trace0 {
                return Err(Error::Instability { t: t + dt_eff });
            }
            let e = log_negativity(&v, ModeId::M, ModeId::A)?;
            if e > mx {
                mx = e;
                t_mx = t + dt_eff;
            }
        }
        let nu = min_symplectic_eigenvalue(&v);
        if nu < 0.5 - PHYSICALITY_TOL {
            return Err(Error::PhysicalityLoss {
                t: per as f64 * period,
                nu_min: nu,
                retries: 0,
            });
        }
        if let Some(prev_mx) = prev {
            if (mx - prev_mx).abs() <= PERIOD_REL_TOL * mx.max(prev_mx).max(1e-300) {
                settled += 1;
                if settled >= 2 {
                    return Ok(PeriodResult {
                        max_e_ma: mx,
                        t_at_max: t_mx,
                        periods: per,
                    });
                }
            } else {
                settled = 0;
            }
        }
        prev = Some(mx);
    }
    Err(Error::NonConvergence {
        periods: MAX_PERIODS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::max_relative_diff;
    use crate::physics::{derive_params, LabParams};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    const PUMP_SCALE: f64 = 0.30;

    fn operating(lab: &LabParams) -> (SystemParams, PumpProfile) {
        let p = derive_params(lab).unwrap();
        let profile = PumpProfile::Constant {
            eta0: PUMP_SCALE * p.eta0,
        };
        (p, profile)
    }

    /// Mirror/atom-damped side configuration whose slowest mode decays fast
    /// enough for true steady-state convergence within t = 50/kappa.
    fn damped_lab() -> LabParams {
        LabParams {
            delta_over_omega_m: 2.0,
            omega_b: 2.7 * 2.0 * std::f64::consts::PI * 3.0e6,
            zeta_over_chi: 2.0,
            q_factor: 10.0,
            ..LabParams::default()
        }
    }

    #[test]
    fn initial_state_is_vacuum_with_thermal_mirror() {
        let v = initial_covariance(2.0);
        let diag: Vec<f64> = (0..6).map(|i| v[(i, i)]).collect();
        assert_eq!(diag, vec![0.5, 0.5, 2.5, 2.5, 0.5, 0.5]);
        assert_eq!(
            v.lower_triangle() - Matrix6::from_diagonal(&v.diagonal()),
            Matrix6::zeros()
        );
    }

    #[test]
    fn scalar_drift_has_closed_form() {
        // K = -kappa I, D = 2 kappa c I: V(t) = cI + e^{-2 kappa t}(V0 - cI).
        let kappa = 3.0e5;
        let c = 0.8;
        let k = -kappa * Matrix6::identity();
        let d = 2.0 * kappa * c * Matrix6::identity();
        let vss = lyapunov_steady_state(&k, &d).unwrap();
        assert_relative_eq!(vss, c * Matrix6::identity(), max_relative = 1e-12);

        let v0 = initial_covariance(0.5);
        let t = 1.0 / kappa;
        let run = run_fixed_dt(&|_| k, &d, &v0, t, 1e-3 / kappa, 100).unwrap();
        let decay = (-2.0 * kappa * t).exp();
        let expect = c * Matrix6::identity() + decay * (v0 - c * Matrix6::identity());
        assert!(max_relative_diff(run.cov.last().unwrap(), &expect) < 1e-9);
        // The matrix-exponential route agrees too.
        let closed = constant_drift_solution(&k, &d, &v0, t).unwrap();
        assert!(max_relative_diff(&closed, &expect) < 1e-12);
    }

    #[test]
    fn block_diagonal_drift_solves_by_hand() {
        // Three independent damped blocks; the mechanical-type block
        // [[0, w], [-w, -g]] with D = diag(0, g(2n+1)) settles to the
        // thermal state (n + 1/2) I regardless of w and g.
        let (w, g, nbar) = (2.0e6, 4.0e4, 1.5);
        let kappa = 1.0e6;
        let mut k = Matrix6::zeros();
        k[(0, 0)] = -kappa;
        k[(1, 1)] = -kappa;
        k[(2, 3)] = w;
        k[(3, 2)] = -w;
        k[(3, 3)] = -g;
        k[(4, 5)] = 3.0 * w;
        k[(5, 4)] = -3.0 * w;
        k[(5, 5)] = -2.0 * g;
        let mut d = Matrix6::zeros();
        d[(0, 0)] = kappa;
        d[(1, 1)] = kappa;
        d[(3, 3)] = g * (2.0 * nbar + 1.0);
        d[(5, 5)] = 2.0 * g;

        let v = lyapunov_steady_state(&k, &d).unwrap();
        let mut expect = Matrix6::identity() * 0.5;
        expect[(2, 2)] = nbar + 0.5;
        expect[(3, 3)] = nbar + 0.5;
        assert!(max_relative_diff(&v, &expect) < 1e-10);
    }

    #[test]
    fn undamped_drift_has_no_steady_state() {
        let (p, _) = operating(&LabParams::default());
        let k = drift_matrix(&p, 0.0); // decoupled: atomic block is lossless
        let d = noise_matrix(&p);
        assert!(matches!(
            lyapunov_steady_state(&k, &d),
            Err(Error::UnstableDrift { .. })
        ));
    }

    #[test]
    fn damped_configuration_converges_to_algebraic_steady_state() {
        let (p, profile) = operating(&damped_lab());
        let k = drift_at(&p, &profile, 0.0);
        let d = noise_matrix(&p);
        let vss = lyapunov_steady_state(&k, &d).unwrap();

        // Start above the steady state: V0 - V_ss is positive semidefinite,
        // so V(t) >= V_ss stays physical for the whole transient. (At this
        // low mechanical Q the Brownian-noise model is far enough from a
        // completely positive generator that a bare thermal start would
        // transiently dip a few 1e-5 below the physicality boundary.)
        let v0 = 1.25 * vss;
        let tr = integrate(&p, &profile, &v0, 50.0 / p.kappa, 1e-3 / p.kappa, 500).unwrap();
        let diff = max_relative_diff(tr.cov.last().unwrap(), &vss);
        assert!(diff < 1e-6, "not converged: {diff:.3e}");
        assert_eq!(tr.retries, 0);
        assert!(tr.adiabatic_ok);
    }

    #[test]
    fn stepper_matches_matrix_exponential_at_operating_point() {
        let (p, profile) = operating(&LabParams::default());
        let k = drift_at(&p, &profile, 0.0);
        let d = noise_matrix(&p);
        let v0 = initial_covariance(p.nbar);
        let t_end = 50.0 / p.kappa;

        let tr = integrate(&p, &profile, &v0, t_end, 1e-3 / p.kappa, 2000).unwrap();
        let closed = constant_drift_solution(&k, &d, &v0, t_end).unwrap();
        assert!(max_relative_diff(tr.cov.last().unwrap(), &closed) < 1e-6);
        assert!(tr.times.len() >= 2000);
        assert_eq!(tr.times[0], 0.0);
        assert_relative_eq!(*tr.times.last().unwrap(), t_end, max_relative = 1e-12);
    }

    #[test]
    fn halving_the_step_barely_moves_the_endpoint() {
        let (p, _) = operating(&LabParams::default());
        let sigma = 0.75 * p.kappa;
        let profile = PumpProfile::Monochromatic {
            eta0: PUMP_SCALE * p.eta0,
            sigma,
        };
        let v0 = initial_covariance(p.nbar);
        let t_end = 5.0 / p.kappa;

        let a = integrate(&p, &profile, &v0, t_end, 1e-3 / p.kappa, 200).unwrap();
        let b = integrate(&p, &profile, &v0, t_end, 5e-4 / p.kappa, 200).unwrap();
        assert!(max_relative_diff(a.cov.last().unwrap(), b.cov.last().unwrap()) < 1e-8);
    }

    #[test]
    fn lossless_rotation_preserves_the_state_over_a_full_turn() {
        // K = block-diagonal rotations at a common frequency, D = 0:
        // V(2 pi / w) returns to V(0) and the trace is conserved throughout.
        let w = 1.0;
        let mut k = Matrix6::zeros();
        for m in 0..3 {
            k[(2 * m, 2 * m + 1)] = w;
            k[(2 * m + 1, 2 * m)] = -w;
        }
        let d = Matrix6::zeros();
        let v0 = Matrix6::from_diagonal(&nalgebra::Vector6::new(0.7, 0.9, 0.6, 0.8, 1.3, 0.5));
        let t_end = 2.0 * std::f64::consts::PI / w;
        let run = run_fixed_dt(&|_| k, &d, &v0, t_end, 1e-4, 100).unwrap();
        for v in &run.cov {
            assert_abs_diff_eq!(v.trace(), v0.trace(), epsilon = 1e-10);
        }
        assert!(max_relative_diff(run.cov.last().unwrap(), &v0) < 1e-9);
    }

    #[test]
    fn symmetric_parameters_give_identical_mirror_and_atom_entanglement() {
        // With gamma = 0, nbar = 0, zeta = chi and omega_b = omega_m the
        // model is invariant under exchanging the two material modes, so
        // E_CM(t) = E_CA(t) along any trajectory.
        let (mut p, _) = operating(&LabParams::default());
        p.gamma = 0.0;
        p.nbar = 0.0;
        let profile = PumpProfile::Monochromatic {
            eta0: PUMP_SCALE * p.eta0,
            sigma: 0.75 * p.kappa,
        };
        let v0 = initial_covariance(p.nbar);
        let tr = integrate(&p, &profile, &v0, 10.0 / p.kappa, 1e-3 / p.kappa, 500).unwrap();
        for (cm, ca) in tr.e_cm.iter().zip(&tr.e_ca) {
            assert!((cm - ca).abs() <= 1e-9 * cm.max(*ca).max(1e-12));
        }
        assert!(tr.e_cm.iter().cloned().fold(0.0f64, f64::max) > 1e-3);
    }

    #[test]
    fn unstable_pump_reports_instability() {
        // The full Fig-1 pump rate sits beyond the parametric instability.
        let p = derive_params(&LabParams::default()).unwrap();
        let profile = PumpProfile::Constant { eta0: p.eta0 };
        let v0 = initial_covariance(p.nbar);
        let err = integrate(&p, &profile, &v0, 50.0 / p.kappa, 1e-3 / p.kappa, 100).unwrap_err();
        assert!(matches!(err, Error::Instability { .. }));
    }

    #[test]
    fn trajectory_samples_stay_physical() {
        let (p, profile) = operating(&LabParams::default());
        let v0 = initial_covariance(p.nbar);
        let tr = integrate(&p, &profile, &v0, 10.0 / p.kappa, 1e-3 / p.kappa, 1000).unwrap();
        assert!(tr.nu_min.iter().all(|nu| *nu >= 0.5 - PHYSICALITY_TOL));
    }

    #[test]
    fn peak_helpers_locate_the_maximum() {
        let tr = Trajectory {
            times: vec![0.0, 1.0, 2.0, 3.0],
            cov: vec![Matrix6::zeros(); 4],
            eta: vec![0.0; 4],
            e_cm: vec![0.0, 0.3, 0.2, 0.1],
            e_ca: vec![0.1, 0.0, 0.4, 0.2],
            e_ma: vec![0.0, 0.1, 0.2, 0.35],
            nu_min: vec![0.5; 4],
            dt_used: 1.0,
            retries: 0,
            adiabatic_ok: true,
        };
        assert_eq!(tr.peak_e_cm(), (1.0, 0.3));
        assert_eq!(tr.peak_e_ca(), (2.0, 0.4));
        assert_eq!(tr.peak_e_ma(), (3.0, 0.35));
    }

    #[test]
    fn constant_drive_long_time_limit_is_the_steady_state() {
        let (p, profile) = operating(&damped_lab());
        let res = periodic_steady_max(&p, &profile, 1e-3 / p.kappa).unwrap();
        assert_eq!(res.periods, 0);

        let k = drift_at(&p, &profile, 0.0);
        let vss = lyapunov_steady_state(&k, &noise_matrix(&p)).unwrap();
        let e = log_negativity(&vss, ModeId::M, ModeId::A).unwrap();
        assert_relative_eq!(res.max_e_ma, e, max_relative = 1e-12);
    }

    #[test]
    fn resonant_modulation_builds_long_time_entanglement() {
        let (p, _) = operating(&LabParams::default());
        let profile = PumpProfile::Monochromatic {
            eta0: PUMP_SCALE * p.eta0,
            sigma: 0.75 * p.kappa,
        };
        let res = periodic_steady_max(&p, &profile, 1e-2 / p.kappa).unwrap();
        assert!(res.periods >= 2, "convergence needs at least two periods");
        assert!(
            res.max_e_ma > 0.05,
            "resonant drive should entangle, got {}",
            res.max_e_ma
        );
        let period = profile.period().unwrap();
        assert!(res.t_at_max > (res.periods - 1) as f64 * period - 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn steady_state_solver_leaves_tiny_residual(
            seed in prop::array::uniform32(-1.0f64..1.0),
            diag_shift in 1.5f64..4.0,
            noise_seed in prop::array::uniform32(-1.0f64..1.0),
        ) {
            // Random strictly stable drift (diagonally shifted) and PSD noise.
            let mut k = Matrix6::zeros();
            for i in 0..6 {
                for j in 0..6 {
                    k[(i, j)] = seed[(6 * i + j) % 32];
                }
                k[(i, i)] -= diag_shift;
            }
            prop_assume!(max_re_eig(&k) < -1e-6);
            let mut g = Matrix6::zeros();
            for i in 0..6 {
                for j in 0..6 {
                    g[(i, j)] = noise_seed[(6 * i + j + 3) % 32];
                }
            }
            let d = g * g.transpose();
            let v = lyapunov_steady_state(&k, &d).unwrap();
            let resid = (k * v + v * k.transpose() + d).norm();
            let scale = k.norm() * v.norm() + d.norm();
            prop_assert!(resid <= 1e-10 * scale);
        }
    }
}
