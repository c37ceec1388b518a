//! `vacfric`: batch front end for the vacuum-friction engines.
//!
//! Every subcommand reads an optional TOML config, applies flag overrides,
//! runs one engine, and emits CSV (17 significant digits) to stdout or to
//! `--out`. Exit status 0 on success, 2 for configuration or domain
//! problems, 3 for numerical failures.

// Validation guards are written as `!(x > limit)` on purpose: the negated
// comparison is false for NaN, so non-numbers are rejected along with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use clap::{Parser, Subcommand};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use config::{
    resolve, CommandKind, FileConfig, Overrides, Resolved, EFFECTIVELY_INFINITE_MASS,
};
use vacuum_friction::{
    angular_oracles, build_mode_grid, decay_rate_closed, decay_report, default_sample_stride,
    default_step, direction_grid, emitter_scenario, evolve, fit_decay_rate, fit_momentum_drift,
    frequency_grid, grid_golden_rule, AtomParams, Constants, Error, UnitSystem, Vec3,
};

/// Decay rate and vacuum momentum drift of a moving two-level emitter:
/// closed forms, direction-resolved quadrature, and mode-bath dynamics.
#[derive(Parser)]
#[command(name = "vacfric", version)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write CSV here instead of stdout (summaries then go to stdout).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Polar node count of the direction grid.
    #[arg(long = "grid-polar", global = true, value_name = "N")]
    grid_polar: Option<usize>,

    /// Azimuthal node count of the direction grid.
    #[arg(long = "grid-azimuth", global = true, value_name = "N")]
    grid_azimuth: Option<usize>,

    /// Recoil parameter hbar*omega_a/(M c^2); sets the mass to
    /// omega_a/epsilon in natural units (0 disables recoil).
    #[arg(long, global = true, value_name = "X")]
    epsilon: Option<f64>,

    /// Velocity over c; sets p0 = mass * c * beta.
    #[arg(long, global = true, num_args = 3, value_names = ["BX", "BY", "BZ"],
          allow_negative_numbers = true)]
    beta: Option<Vec<f64>>,

    /// Transition dipole vector (magnitude times orientation), scenario units.
    #[arg(long, global = true, num_args = 3, value_names = ["DX", "DY", "DZ"],
          allow_negative_numbers = true)]
    dipole: Option<Vec<f64>>,

    /// Report outputs in SI, interpreting scenario omega_a as rad/s.
    #[arg(long, global = true)]
    si: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decay rate by quadrature over emission directions vs the closed form.
    DecayRate,
    /// Vacuum momentum drift by quadrature vs the closed form.
    Drift,
    /// Integrate the mode-bath amplitudes and write the sampled trajectory.
    Evolve,
    /// Angular integrals of the emission pattern vs their analytic values.
    Oracles,
    /// Relativistic two-photon emission ledger over a velocity list.
    Emitter,
    /// Decay rate and drift over an (epsilon, beta) lattice.
    Sweep,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(m) => CliError::Config(m),
            Error::Numerical(m) => CliError::Numerical(m),
        }
    }
}

impl CliError {
    fn status(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let file: FileConfig = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read {}: {e}", path.display()))
            })?;
            toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let triple = |v: &Option<Vec<f64>>| v.as_ref().map(|v| [v[0], v[1], v[2]]);
    let flags = Overrides {
        grid_polar: cli.grid_polar,
        grid_azimuth: cli.grid_azimuth,
        epsilon: cli.epsilon,
        beta: triple(&cli.beta),
        dipole: triple(&cli.dipole),
        out: cli.out.clone(),
        si: cli.si,
    };
    let kind = match cli.command {
        Command::Evolve => CommandKind::Evolve,
        _ => CommandKind::Quadrature,
    };
    let r = resolve(&file, &flags, kind).map_err(CliError::Config)?;

    let (csv, summary) = match cli.command {
        Command::DecayRate => cmd_decay_rate(&r)?,
        Command::Drift => cmd_drift(&r)?,
        Command::Evolve => cmd_evolve(&r)?,
        Command::Oracles => cmd_oracles(&r)?,
        Command::Emitter => cmd_emitter(&r)?,
        Command::Sweep => cmd_sweep(&r)?,
    };

    match &r.out_path {
        Some(path) => {
            fs::write(path, &csv).map_err(|e| {
                CliError::Config(format!("cannot write {}: {e}", path.display()))
            })?;
            if let Some(s) = summary {
                print!("{s}");
            }
        }
        None => print!("{csv}"),
    }
    Ok(())
}

/// 17-significant-digit float field with negative zero normalized away, so
/// reruns and algebraically-zero results are byte-stable.
fn fmt_f(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn row(vals: &[f64]) -> String {
    let mut s = vals.iter().map(|&v| fmt_f(v)).collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

type Output = (String, Option<String>);

fn cmd_decay_rate(r: &Resolved) -> Result<Output, CliError> {
    let dirs = direction_grid(r.n_polar, r.n_azimuth)?;
    let report = decay_report(&r.atom, &dirs)?;
    let mut csv = String::from("gamma_quad,gamma_closed,rel_dev\n");
    csv += &row(&[
        report.gamma_quad * r.scale.rate,
        report.gamma_closed * r.scale.rate,
        report.rel_dev_gamma,
    ]);
    Ok((csv, None))
}

fn cmd_drift(r: &Resolved) -> Result<Output, CliError> {
    let dirs = direction_grid(r.n_polar, r.n_azimuth)?;
    let report = decay_report(&r.atom, &dirs)?;
    let s = r.scale.drift;
    let mut csv = String::from(
        "drift_quad_x,drift_quad_y,drift_quad_z,drift_closed_x,drift_closed_y,drift_closed_z,rel_dev\n",
    );
    csv += &row(&[
        report.drift_quad.x * s,
        report.drift_quad.y * s,
        report.drift_quad.z * s,
        report.drift_closed.x * s,
        report.drift_closed.y * s,
        report.drift_closed.z * s,
        report.rel_dev_drift,
    ]);
    Ok((csv, None))
}

fn cmd_oracles(r: &Resolved) -> Result<Output, CliError> {
    let dirs = direction_grid(r.n_polar, r.n_azimuth)?;
    let d_vec = r.atom.e_d * r.atom.dipole;
    // the mixed integral needs a momentum probe; fall back to z-hat when the
    // scenario is motionless so the check is not trivially 0 = 0
    let p = if r.atom.p0.norm() > 0.0 {
        r.atom.p0
    } else {
        Vec3::unit_z()
    };
    let checks = angular_oracles(&dirs, d_vec, p);
    let mut csv = String::from("integral,component,quadrature,analytic,abs_dev\n");
    let mut push = |name: &str, comp: &str, got: f64, want: f64| {
        csv += &format!(
            "{name},{comp},{},{},{}\n",
            fmt_f(got),
            fmt_f(want),
            fmt_f((got - want).abs())
        );
    };
    push("transverse", "scalar", checks.transverse.0, checks.transverse.1);
    for (comp, got, want) in [
        ("x", checks.beamed.0.x, checks.beamed.1.x),
        ("y", checks.beamed.0.y, checks.beamed.1.y),
        ("z", checks.beamed.0.z, checks.beamed.1.z),
    ] {
        push("beamed", comp, got, want);
    }
    for (comp, got, want) in [
        ("x", checks.mixed.0.x, checks.mixed.1.x),
        ("y", checks.mixed.0.y, checks.mixed.1.y),
        ("z", checks.mixed.0.z, checks.mixed.1.z),
    ] {
        push("mixed", comp, got, want);
    }
    Ok((csv, None))
}

fn cmd_emitter(r: &Resolved) -> Result<Output, CliError> {
    let k: Constants<f64> = Constants::natural();
    let mut csv =
        String::from("beta,lorentz_gamma,omega_left,omega_right,d_energy,d_momentum\n");
    for &beta in &r.emitter_velocities {
        let s = emitter_scenario(r.emitter_omega0, beta, k)?;
        csv += &row(&[
            s.beta,
            s.gamma,
            s.omega_l * r.scale.rate,
            s.omega_r * r.scale.rate,
            s.d_energy * r.scale.energy,
            s.d_momentum * r.scale.momentum,
        ]);
    }
    Ok((csv, None))
}

fn cmd_sweep(r: &Resolved) -> Result<Output, CliError> {
    let dirs = direction_grid(r.n_polar, r.n_azimuth)?;
    let mut csv = String::from(
        "epsilon,beta,gamma_quad,gamma_closed,rel_dev_gamma,drift_quad_z,drift_closed_z,abs_dev_drift\n",
    );
    for &eps in &r.sweep_epsilons {
        if !(0.0..0.5).contains(&eps) {
            return Err(CliError::Config(format!(
                "sweep.epsilons entries must lie in [0, 0.5), got {eps}"
            )));
        }
        let mass = if eps > 0.0 {
            r.atom.omega_a / eps
        } else {
            EFFECTIVELY_INFINITE_MASS
        };
        for &beta in &r.sweep_betas {
            let atom = AtomParams::new(
                r.atom.omega_a,
                r.atom.dipole,
                r.atom.e_d,
                mass,
                Vec3::new(0.0, 0.0, beta) * mass,
                UnitSystem::Natural,
            )?;
            let report = decay_report(&atom, &dirs)?;
            csv += &row(&[
                eps,
                beta,
                report.gamma_quad * r.scale.rate,
                report.gamma_closed * r.scale.rate,
                report.rel_dev_gamma,
                report.drift_quad.z * r.scale.drift,
                report.drift_closed.z * r.scale.drift,
                (report.drift_quad - report.drift_closed).norm() * r.scale.drift,
            ]);
        }
    }
    Ok((csv, None))
}

fn cmd_evolve(r: &Resolved) -> Result<Output, CliError> {
    let atom = r.atom;
    let gamma_closed = decay_rate_closed(&atom);
    let freqs = frequency_grid(atom.omega_a, r.hw_in_gamma * gamma_closed, r.n_freq)?;
    let dirs = direction_grid(r.n_polar, r.n_azimuth)?;
    let grid = build_mode_grid(dirs, freqs)?;
    let gamma_grid = grid_golden_rule(&atom, &grid)?;
    let t_end = r.t_end_in_inverse_gamma / gamma_grid;
    let dt = r.dt.unwrap_or_else(|| default_step(&grid));
    let stride = r
        .sample_stride
        .unwrap_or_else(|| default_sample_stride((t_end / dt).ceil() as usize));

    let traj = evolve(&atom, &grid, t_end, dt, stride)?;
    for w in &traj.warnings {
        eprintln!("warning: {w}");
    }

    let mut csv = String::from("t,pop,Px,Py,Pz,BxDx,BxDy,BxDz,norm\n");
    let (st, sp) = (r.scale.time, r.scale.momentum);
    for s in &traj.samples {
        csv += &row(&[
            s.t * st,
            s.population,
            s.momentum.x * sp,
            s.momentum.y * sp,
            s.momentum.z * sp,
            s.roentgen_momentum.x * sp,
            s.roentgen_momentum.y * sp,
            s.roentgen_momentum.z * sp,
            s.norm,
        ]);
    }

    let mut summary = format!(
        "gamma_grid = {}\ngamma_closed = {}\n",
        fmt_f(gamma_grid * r.scale.rate),
        fmt_f(gamma_closed * r.scale.rate)
    );
    // rate and drift fits need the trajectory to cover their window
    if r.t_end_in_inverse_gamma >= 1.0 {
        if let Ok(fitted) = fit_decay_rate(&traj, gamma_grid) {
            summary += &format!("fit_gamma = {}\n", fmt_f(fitted * r.scale.rate));
        }
        if let Ok(drift) = fit_momentum_drift(&traj, gamma_grid) {
            summary += &format!(
                "fit_drift_x = {}\nfit_drift_y = {}\nfit_drift_z = {}\n",
                fmt_f(drift.x * r.scale.drift),
                fmt_f(drift.y * r.scale.drift),
                fmt_f(drift.z * r.scale.drift)
            );
        }
    }
    Ok((csv, Some(summary)))
}
