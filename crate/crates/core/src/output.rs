//! Result serialization: CSV for curves, JSON lines for optimizer logs,
//! JSON for the run manifest.
//!
//! Data files are written with `{}` float formatting (shortest exact
//! round-trip), contain nothing run-dependent beyond the numbers
//! themselves, and therefore come out byte-identical for identical inputs.
//! Wall-clock information lives only in the manifest.

use crate::dynamics::Trajectory;
use crate::modulation::PumpProfile;
use crate::optimizer::{OptimizeOutcome, RobustnessRow};
use crate::scans::{DetuningScan, SigmaScan};
use serde::Serialize;
use std::io::{self, Write};

/// Divisor applied to entanglement columns: ln 2 rescales the natural-log
/// values to log-2 units.
pub fn log_divisor(log_base: &str) -> f64 {
    if log_base == "2" {
        std::f64::consts::LN_2
    } else {
        1.0
    }
}

/// `t, kappa_t, eta, E_CM, E_CA, E_MA, nu_min_phys` per sample.
pub fn write_trajectory_csv(
    w: &mut impl Write,
    tr: &Trajectory,
    kappa: f64,
    log_base: &str,
) -> io::Result<()> {
    let div = log_divisor(log_base);
    writeln!(w, "t,kappa_t,eta,E_CM,E_CA,E_MA,nu_min_phys")?;
    for i in 0..tr.times.len() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            tr.times[i],
            tr.times[i] * kappa,
            tr.eta[i],
            tr.e_cm[i] / div,
            tr.e_ca[i] / div,
            tr.e_ma[i] / div,
            tr.nu_min[i],
        )?;
    }
    Ok(())
}

/// Long-format detuning sweep: one row per (detuning, time) sample.
pub fn write_detuning_csv(
    w: &mut impl Write,
    scan: &DetuningScan,
    log_base: &str,
) -> io::Result<()> {
    let div = log_divisor(log_base);
    writeln!(w, "delta_over_omega_m,kappa_t,E_CM,E_CA,E_MA")?;
    for tr in &scan.traces {
        for i in 0..tr.kappa_t.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                tr.delta_over_omega_m,
                tr.kappa_t[i],
                tr.e_cm[i] / div,
                tr.e_ca[i] / div,
                tr.e_ma[i] / div,
            )?;
        }
    }
    Ok(())
}

/// Modulation-frequency sweep; failed grid points are omitted.
pub fn write_sigma_csv(w: &mut impl Write, scan: &SigmaScan, log_base: &str) -> io::Result<()> {
    let div = log_divisor(log_base);
    writeln!(w, "sigma_over_kappa,max_E_MA,periods")?;
    for i in 0..scan.sigma_over_kappa.len() {
        if let (Some(e), Some(per)) = (scan.max_e_ma[i], scan.periods[i]) {
            writeln!(w, "{},{},{}", scan.sigma_over_kappa[i], e / div, per)?;
        }
    }
    Ok(())
}

/// Coupling-robustness report.
pub fn write_robustness_csv(
    w: &mut impl Write,
    rows: &[RobustnessRow],
    log_base: &str,
) -> io::Result<()> {
    let div = log_divisor(log_base);
    writeln!(w, "factor,value,drop_fraction")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.factor, r.value / div, r.drop_fraction)?;
    }
    Ok(())
}

/// Pump profiles sampled on a common time grid, one column per profile.
pub fn write_profile_overlay_csv(
    w: &mut impl Write,
    profiles: &[(&str, &PumpProfile)],
    span: f64,
    points: usize,
) -> io::Result<()> {
    write!(w, "t")?;
    for (name, _) in profiles {
        write!(w, ",{name}")?;
    }
    writeln!(w)?;
    for i in 0..=points {
        let t = span * i as f64 / points as f64;
        write!(w, "{t}")?;
        for (_, p) in profiles {
            write!(w, ",{}", p.eval(t))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct IncumbentLine<'a> {
    incumbent: bool,
    best_start: usize,
    best_value: f64,
    profile: &'a PumpProfile,
}

/// One JSON line per start, then a final line for the incumbent.
pub fn write_optimize_jsonl(w: &mut impl Write, out: &OptimizeOutcome) -> io::Result<()> {
    for rec in &out.records {
        serde_json::to_writer(&mut *w, rec)?;
        writeln!(w)?;
    }
    serde_json::to_writer(
        &mut *w,
        &IncumbentLine {
            incumbent: true,
            best_start: out.best_start,
            best_value: out.best_value,
            profile: &out.best_profile,
        },
    )?;
    writeln!(w)
}

/// Provenance sidecar for a batch of outputs. This is the only file that
/// records the wall clock, keeping the data files reproducible.
#[derive(Serialize)]
pub struct Manifest {
    pub version: String,
    pub timestamp: String,
    pub config_sha256: String,
    pub seed: u64,
    pub campaign: String,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(config_sha256: String, seed: u64, campaign: String, outputs: Vec<String>) -> Self {
        Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            config_sha256,
            seed,
            campaign,
            outputs,
        }
    }

    pub fn write(&self, w: &mut impl Write) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut *w, self)?;
        writeln!(w)
    }
}
