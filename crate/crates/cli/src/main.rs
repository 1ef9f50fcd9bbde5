//! Command-line campaigns for the optomech simulator.
//!
//! Every subcommand reads one flat TOML configuration (all keys optional),
//! writes its data files plus a `manifest.json` provenance sidecar into the
//! output directory, and echoes the effective configuration as
//! `config.toml` so a run can be reproduced from its output alone.
//!
//! Exit codes: 0 success, 1 usage or configuration problems, 2 physics or
//! feasibility violations (no steady state, infeasible profile, parameter
//! out of domain), 3 numerical failures (instability, physicality loss,
//! non-convergence).

use clap::{Parser, Subcommand};
use optomech::output::{
    log_divisor, write_detuning_csv, write_optimize_jsonl, write_profile_overlay_csv,
    write_robustness_csv, write_sigma_csv, write_trajectory_csv, Manifest,
};
use optomech::physics::detuning_shift_report;
use optomech::scans::linspace;
use optomech::{
    derive_params, detuning_scan, initial_covariance, integrate, multistart_optimize,
    objective_long, objective_short, robustness_check, sigma_resonance_scan, steady_state, Error,
    NmOptions, PumpProfile, Result, RunConfig, SystemParams, Trajectory, TAU_KAPPA,
};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "optomech",
    version,
    about = "Gaussian dynamics of a driven cavity coupled to a vibrating mirror and an atomic mode"
)]
struct Cli {
    /// TOML configuration file; omitted keys take their defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory for data files and the run manifest.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Override the configured random seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Override the integration step, in units of 1/kappa.
    #[arg(long, global = true, value_name = "STEP")]
    dt: Option<f64>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate one trajectory under the configured pump profile.
    Simulate,
    /// Sweep the cavity detuning at constant pump and record all three
    /// pairwise entanglements along each transient.
    ScanDetuning,
    /// Sweep the monochromatic modulation frequency, driving each point to
    /// its periodic quasi-steady state.
    ScanSigma,
    /// Optimize a finite-window Fourier pulse for mirror-atom entanglement
    /// at the end of the window.
    OptimizeShort,
    /// Optimize a periodic harmonic series for the long-time per-period
    /// entanglement maximum.
    OptimizeLong,
    /// Re-evaluate the configured profile under scaled mirror coupling.
    Robustness,
    /// Produce the full bundle of figure data files (detuning sweep,
    /// resonance sweep, constant-vs-modulated traces, profile overlay).
    Figures,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too; they are not usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: &Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dt) = cli.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::ParameterDomain {
                field: "dt",
                reason: format!("must be a positive finite number, got {dt}"),
            });
        }
        cfg.dt_kappa = dt;
    }

    std::fs::create_dir_all(&cli.out)?;
    let mut outputs = vec!["config.toml".to_string()];
    std::fs::write(cli.out.join("config.toml"), cfg.to_toml_string())?;

    match cli.command {
        Cmd::Simulate => simulate(&cfg, &cli.out, &mut outputs)?,
        Cmd::ScanDetuning => scan_detuning(&cfg, &cli.out, &mut outputs)?,
        Cmd::ScanSigma => scan_sigma(&cfg, &cli.out, &mut outputs)?,
        Cmd::OptimizeShort => optimize_short(&cfg, &cli.out, &mut outputs)?,
        Cmd::OptimizeLong => optimize_long(&cfg, &cli.out, &mut outputs)?,
        Cmd::Robustness => robustness(&cfg, &cli.out, &mut outputs)?,
        Cmd::Figures => figures(&cfg, &cli.out, &mut outputs)?,
    }

    let manifest = Manifest::new(cfg.sha256_hex(), cfg.seed, cfg.campaign.clone(), outputs);
    let mut w = BufWriter::new(File::create(cli.out.join("manifest.json"))?);
    manifest.write(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Open `name` in the output directory and record it in the manifest list.
fn create(out: &Path, name: &str, outputs: &mut Vec<String>) -> Result<BufWriter<File>> {
    outputs.push(name.to_string());
    Ok(BufWriter::new(File::create(out.join(name))?))
}

fn require_feasible(profile: &PumpProfile) -> Result<()> {
    if profile.feasibility() {
        Ok(())
    } else {
        Err(Error::InfeasibleProfile {
            reason: "configured profile violates its constraints \
                     (energy shell, positivity, or coefficient ball)"
                .into(),
        })
    }
}

fn warn_if_nonadiabatic(tr: &Trajectory) {
    if !tr.adiabatic_ok {
        eprintln!(
            "warning: pump modulation is fast on the cavity timescale; \
             the adiabatic intracavity-field approximation is marginal here"
        );
    }
}

fn simulate(cfg: &RunConfig, out: &Path, outputs: &mut Vec<String>) -> Result<()> {
    let p = derive_params(&cfg.lab_params())?;
    let profile = cfg.profile(&p)?;
    require_feasible(&profile)?;

    let v0 = initial_covariance(p.nbar);
    let tr = integrate(
        &p,
        &profile,
        &v0,
        cfg.t_end_kappa / p.kappa,
        cfg.dt_kappa / p.kappa,
        cfg.min_samples,
    )?;
    warn_if_nonadiabatic(&tr);

    let mut w = create(out, "trajectory.csv", outputs)?;
    write_trajectory_csv(&mut w, &tr, p.kappa, &cfg.log_base)?;
    w.flush()?;

    let div = log_divisor(&cfg.log_base);
    let ss = steady_state(&p, profile.eta0())?;
    let shifts = detuning_shift_report(&p, &ss, cfg.atomic_shift_rad_s);
    let (tcm, pcm) = tr.peak_e_cm();
    let (tca, pca) = tr.peak_e_ca();
    let (tma, pma) = tr.peak_e_ma();
    println!(
        "simulate: {} samples over kappa t = {} (dt = {:.3e} s, {} retries)",
        tr.times.len(),
        cfg.t_end_kappa,
        tr.dt_used,
        tr.retries
    );
    println!(
        "  peak E_CM = {:.6} at kappa t = {:.3}",
        pcm / div,
        tcm * p.kappa
    );
    println!(
        "  peak E_CA = {:.6} at kappa t = {:.3}",
        pca / div,
        tca * p.kappa
    );
    println!(
        "  peak E_MA = {:.6} at kappa t = {:.3}",
        pma / div,
        tma * p.kappa
    );
    println!(
        "  final E_MA = {:.6}, min symplectic eigenvalue {:.6}",
        tr.e_ma.last().unwrap() / div,
        tr.nu_min.iter().cloned().fold(f64::INFINITY, f64::min)
    );
    println!(
        "  static detuning pulls: mirror {:+.3e} s^-1, atoms {:+.3e} s^-1, \
         dispersive {:+.3e} s^-1 (Delta = {:.3e} s^-1)",
        shifts.mirror, shifts.atom, shifts.atomic_dispersive, p.delta
    );
    Ok(())
}

fn scan_detuning(cfg: &RunConfig, out: &Path, outputs: &mut Vec<String>) -> Result<()> {
    let grid = linspace(
        cfg.delta_scan_min,
        cfg.delta_scan_max,
        cfg.delta_scan_points,
    );
    let scan = detuning_scan(
        &cfg.lab_params(),
        cfg.pump_scale,
        &grid,
        cfg.t_end_kappa,
        cfg.dt_kappa,
        cfg.min_samples,
    )?;
    for f in &scan.failures {
        eprintln!(
            "warning: detuning {:.4} omega_m failed: {}",
            f.coordinate, f.message
        );
    }

    let mut w = create(out, "detuning_scan.csv", outputs)?;
    write_detuning_csv(&mut w, &scan, &cfg.log_base)?;
    w.flush()?;

    println!(
        "scan-detuning: {} of {} points integrated over kappa t = {}",
        scan.traces.len(),
        grid.len(),
        cfg.t_end_kappa
    );
    if let Some(best) = scan.best_delta() {
        println!("  strongest mirror-atom entanglement at Delta = {best:.4} omega_m");
    }
    println!(
        "  points where E_CM peaks later than E_MA: {}",
        scan.delay_violations(1e-3).len()
    );
    Ok(())
}

fn scan_sigma(cfg: &RunConfig, out: &Path, outputs: &mut Vec<String>) -> Result<()> {
    let grid = linspace(
        cfg.sigma_scan_min,
        cfg.sigma_scan_max,
        cfg.sigma_scan_points,
    );
    let scan = sigma_resonance_scan(&cfg.lab_params(), cfg.pump_scale, &grid, cfg.dt_kappa)?;
    for f in &scan.failures {
        eprintln!(
            "warning: sigma {:.4} kappa failed: {}",
            f.coordinate, f.message
        );
    }

    let mut w = create(out, "sigma_scan.csv", outputs)?;
    write_sigma_csv(&mut w, &scan, &cfg.log_base)?;
    w.flush()?;

    let div = log_divisor(&cfg.log_base);
    println!(
        "scan-sigma: {} of {} points converged",
        scan.max_e_ma.iter().flatten().count(),
        grid.len()
    );
    if let Some(pk) = scan.peak() {
        println!(
            "  peak long-time E_MA = {:.6} at sigma = {:.4} kappa (grid index {})",
            pk.value / div,
            pk.sigma_over_kappa,
            pk.grid_index
        );
    }
    Ok(())
}

/// Template for the short-window optimizer: the configured coefficients
/// reinterpreted as a Fourier pulse (all-zero coefficients are the constant
/// drive, so start 0 of the multistart is the unmodulated baseline).
fn fourier_template(cfg: &RunConfig, p: &SystemParams) -> Result<PumpProfile> {
    let mut fcfg = cfg.clone();
    fcfg.profile = "fourier".into();
    fcfg.profile(p)
}

fn optimize_short(cfg: &RunConfig, out: &Path, outputs: &mut Vec<String>) -> Result<()> {
    let p = derive_params(&cfg.lab_params())?;
    let template = fourier_template(cfg, &p)?;
    let dt = cfg.dt_kappa / p.kappa;
    let tau = TAU_KAPPA / p.kappa;

    let objective = |prof: &PumpProfile| objective_short(&p, prof, dt, tau);
    let outcome = multistart_optimize(
        &objective,
        &template,
        cfg.n_starts,
        cfg.seed,
        &NmOptions::default(),
    )?;
    let baseline = objective_short(
        &p,
        &PumpProfile::Constant {
            eta0: cfg.operating_eta(&p),
        },
        dt,
        tau,
    )?;

    let mut w = create(out, "optimize_short.jsonl", outputs)?;
    write_optimize_jsonl(&mut w, &outcome)?;
    w.flush()?;

    let div = log_divisor(&cfg.log_base);
    let feasible = outcome.records.iter().filter(|r| r.feasible).count();
    println!(
        "optimize-short: best E_MA(tau = {TAU_KAPPA}/kappa) = {:.6} from start {} \
         ({feasible}/{} feasible starts)",
        outcome.best_value / div,
        outcome.best_start,
        cfg.n_starts
    );
    println!(
        "  constant-drive baseline over the same window: {:.6}",
        baseline / div
    );
    Ok(())
}

fn optimize_long(cfg: &RunConfig, out: &Path, outputs: &mut Vec<String>) -> Result<()> {
    let p = derive_params(&cfg.lab_params())?;
    // Template: the configured coefficients as a harmonic series; empty
    // arrays default to the pure fundamental at sigma_over_kappa.
    let mut hcfg = cfg.clone();
    hcfg.profile = "harmonic".into();
    let template = hcfg.profile(&p)?;
    let dt = cfg.dt_kappa / p.kappa;

    let objective = |prof: &PumpProfile| objective_long(&p, prof, dt);
    let outcome = multistart_optimize(
        &objective,
        &template,
        cfg.n_starts,
        cfg.seed,
        &NmOptions::default(),
    )?;
    let mono = objective_long(
        &p,
        &PumpProfile::Monochromatic {
            eta0: cfg.operating_eta(&p),
            sigma: cfg.sigma_over_kappa * p.kappa,
        },
        dt,
    )?;

    let mut w = create(out, "optimize_long.jsonl", outputs)?;
    write_optimize_jsonl(&mut w, &outcome)?;
    w.flush()?;

    let div = log_divisor(&cfg.log_base);
    let feasible = outcome.records.iter().filter(|r| r.feasible).count();
    println!(
        "optimize-long: best periodic max E_MA = {:.6} from start {} ({feasible}/{} feasible starts)",
        outcome.best_value / div,
        outcome.best_start,
        cfg.n_starts
    );
    println!(
        "  monochromatic drive at sigma = {} kappa reaches {:.6}",
        cfg.sigma_over_kappa,
        mono / div
    );
    Ok(())
}

fn robustness(cfg: &RunConfig, out: &Path, outputs: &mut Vec<String>) -> Result<()> {
    let p = derive_params(&cfg.lab_params())?;
    let profile = cfg.profile(&p)?;
    require_feasible(&profile)?;
    let rows = robustness_check(&p, &profile, cfg.dt_kappa / p.kappa, &[0.9, 1.0, 1.1])?;

    let mut w = create(out, "robustness.csv", outputs)?;
    write_robustness_csv(&mut w, &rows, &cfg.log_base)?;
    w.flush()?;

    let div = log_divisor(&cfg.log_base);
    println!("robustness: long-time E_MA under scaled mirror coupling");
    for r in &rows {
        println!(
            "  chi x {:.2}: E_MA = {:.6} (drop {:+.2}%)",
            r.factor,
            r.value / div,
            100.0 * r.drop_fraction
        );
    }
    Ok(())
}

fn figures(cfg: &RunConfig, out: &Path, outputs: &mut Vec<String>) -> Result<()> {
    let p = derive_params(&cfg.lab_params())?;
    let eta_op = cfg.operating_eta(&p);
    let sigma = cfg.sigma_over_kappa * p.kappa;
    let div = log_divisor(&cfg.log_base);

    // 1. Transient entanglement across the detuning range at constant pump.
    let grid = linspace(
        cfg.delta_scan_min,
        cfg.delta_scan_max,
        cfg.delta_scan_points,
    );
    let dscan = detuning_scan(
        &cfg.lab_params(),
        cfg.pump_scale,
        &grid,
        cfg.t_end_kappa,
        cfg.dt_kappa,
        cfg.min_samples,
    )?;
    for f in &dscan.failures {
        eprintln!(
            "warning: detuning {:.4} omega_m failed: {}",
            f.coordinate, f.message
        );
    }
    let mut w = create(out, "fig_detuning.csv", outputs)?;
    write_detuning_csv(&mut w, &dscan, &cfg.log_base)?;
    w.flush()?;

    // 2. Long-time entanglement versus modulation frequency.
    let sgrid = linspace(
        cfg.sigma_scan_min,
        cfg.sigma_scan_max,
        cfg.sigma_scan_points,
    );
    let sscan = sigma_resonance_scan(&cfg.lab_params(), cfg.pump_scale, &sgrid, cfg.dt_kappa)?;
    for f in &sscan.failures {
        eprintln!(
            "warning: sigma {:.4} kappa failed: {}",
            f.coordinate, f.message
        );
    }
    let mut w = create(out, "fig_sigma.csv", outputs)?;
    write_sigma_csv(&mut w, &sscan, &cfg.log_base)?;
    w.flush()?;

    // 3. Constant versus resonantly modulated trajectories on one window.
    let constant = PumpProfile::Constant { eta0: eta_op };
    let mono = PumpProfile::Monochromatic {
        eta0: eta_op,
        sigma,
    };
    let v0 = initial_covariance(p.nbar);
    let t_end = cfg.t_end_kappa / p.kappa;
    let dt = cfg.dt_kappa / p.kappa;
    let tr_const = integrate(&p, &constant, &v0, t_end, dt, cfg.min_samples)?;
    let tr_mono = integrate(&p, &mono, &v0, t_end, dt, cfg.min_samples)?;
    warn_if_nonadiabatic(&tr_mono);
    let mut w = create(out, "fig_trace_constant.csv", outputs)?;
    write_trajectory_csv(&mut w, &tr_const, p.kappa, &cfg.log_base)?;
    w.flush()?;
    let mut w = create(out, "fig_trace_modulated.csv", outputs)?;
    write_trajectory_csv(&mut w, &tr_mono, p.kappa, &cfg.log_base)?;
    w.flush()?;

    // 4. The drive shapes themselves, over one modulation period.
    let fundamental = PumpProfile::HarmonicSeries {
        eta0: eta_op,
        sigma,
        a: vec![1.0],
        b: vec![0.0],
    };
    let span = 2.0 * std::f64::consts::PI / sigma;
    let mut w = create(out, "fig_profiles.csv", outputs)?;
    write_profile_overlay_csv(
        &mut w,
        &[
            ("constant", &constant),
            ("monochromatic", &mono),
            ("fundamental", &fundamental),
        ],
        span,
        512,
    )?;
    w.flush()?;

    if let Some(best) = dscan.best_delta() {
        println!("figures: best transient detuning Delta = {best:.4} omega_m");
    }
    if let Some(pk) = sscan.peak() {
        println!(
            "figures: resonance peak E_MA = {:.6} at sigma = {:.4} kappa",
            pk.value / div,
            pk.sigma_over_kappa
        );
    }
    println!(
        "figures: modulated peak E_MA = {:.6} vs constant {:.6} on kappa t <= {}",
        tr_mono.peak_e_ma().1 / div,
        tr_const.peak_e_ma().1 / div,
        cfg.t_end_kappa
    );
    Ok(())
}
