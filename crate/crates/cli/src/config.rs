//! Run configuration: the TOML file schema, flag overrides, and the
//! resolution of both into engine-ready parameters.
//!
//! Every file field is optional; missing values fall back to per-command
//! defaults, and command-line flags win over the file.

use serde::Deserialize;
use std::path::PathBuf;
use vacuum_friction::{AtomParams, Constants, UnitSystem, Vec3};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scenario: Option<ScenarioSection>,
    pub grid: Option<GridSection>,
    pub evolve: Option<EvolveSection>,
    pub output: Option<OutputSection>,
    pub emitter: Option<EmitterSection>,
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    /// "natural" (hbar = c = eps0 = 1) or "si".
    pub units: Option<String>,
    pub omega_a: Option<f64>,
    /// Full transition dipole vector, magnitude times orientation.
    pub dipole: Option<[f64; 3]>,
    pub mass: Option<f64>,
    pub p0: Option<[f64; 3]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_polar: Option<usize>,
    pub n_azimuth: Option<usize>,
    pub n_freq: Option<usize>,
    /// Frequency window halfwidth in units of the closed-form decay rate.
    pub freq_halfwidth_in_gamma: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    /// Evolution length in units of 1/Gamma of the grid rate.
    pub t_end_in_inverse_gamma: Option<f64>,
    /// Integrator step; 0 or missing picks the accuracy-matched default.
    pub dt: Option<f64>,
    /// Steps between stored samples; 0 or missing targets ~512 samples.
    pub sample_stride: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Destination file; empty or missing writes CSV to stdout.
    pub path: Option<PathBuf>,
    /// Only "csv" is implemented.
    pub format: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterSection {
    /// Rest-frame photon frequency in units of omega_a.
    pub omega0: Option<f64>,
    /// Velocities over c to tabulate.
    pub velocities: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub epsilons: Option<Vec<f64>>,
    pub betas: Option<Vec<f64>>,
}

/// Command-line overrides that win over the file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub grid_polar: Option<usize>,
    pub grid_azimuth: Option<usize>,
    pub epsilon: Option<f64>,
    pub beta: Option<[f64; 3]>,
    pub dipole: Option<[f64; 3]>,
    pub out: Option<PathBuf>,
    pub si: bool,
}

/// Which family of defaults a command starts from.
///
/// The quadrature commands benchmark against the closed forms, so they
/// default to the motionless, recoil-free emitter with unit dipole. The
/// time-domain command needs a light emitter moving along z so that decay
/// and drift are visible within a tractable bath.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Quadrature,
    Evolve,
}

/// Multiplicative factors applied to outputs at the boundary. Natural-unit
/// reporting is the identity; `--si` rescales by the transition frequency
/// (taken as rad/s) and the SI constants.
#[derive(Clone, Copy, Debug)]
pub struct OutputScale {
    pub rate: f64,
    pub time: f64,
    pub momentum: f64,
    pub drift: f64,
    pub energy: f64,
}

impl OutputScale {
    pub fn identity() -> Self {
        Self {
            rate: 1.0,
            time: 1.0,
            momentum: 1.0,
            drift: 1.0,
            energy: 1.0,
        }
    }

    pub fn si(omega_a: f64) -> Self {
        let k: Constants<f64> = Constants::si();
        Self {
            rate: omega_a,
            time: omega_a.recip(),
            momentum: k.hbar * omega_a / k.c,
            drift: k.hbar * omega_a * omega_a / k.c,
            energy: k.hbar * omega_a,
        }
    }
}

/// Everything a command needs, resolved to natural units.
#[derive(Debug)]
pub struct Resolved {
    pub atom: AtomParams<f64>,
    pub scale: OutputScale,
    pub n_polar: usize,
    pub n_azimuth: usize,
    pub n_freq: usize,
    pub hw_in_gamma: f64,
    pub t_end_in_inverse_gamma: f64,
    pub dt: Option<f64>,
    pub sample_stride: Option<usize>,
    pub out_path: Option<PathBuf>,
    pub emitter_omega0: f64,
    pub emitter_velocities: Vec<f64>,
    pub sweep_epsilons: Vec<f64>,
    pub sweep_betas: Vec<f64>,
}

/// Mass standing in for "no recoil at all": epsilon = 1e-300 in natural
/// units, far below every tolerance yet exactly representable.
pub const EFFECTIVELY_INFINITE_MASS: f64 = 1e300;

fn parse_units(s: &str) -> Result<UnitSystem, String> {
    match s {
        "natural" => Ok(UnitSystem::Natural),
        "si" => Ok(UnitSystem::Si),
        other => Err(format!(
            "scenario.units must be \"natural\" or \"si\", got \"{other}\""
        )),
    }
}

pub fn resolve(
    file: &FileConfig,
    flags: &Overrides,
    kind: CommandKind,
) -> Result<Resolved, String> {
    let scenario = file.scenario.as_ref();
    let units = match scenario.and_then(|s| s.units.as_deref()) {
        Some(s) => parse_units(s)?,
        None => UnitSystem::Natural,
    };

    // Scenario fields; SI mode has no sensible fallback values, so the
    // dimensionful fields are required there.
    let require = |field: Option<f64>, name: &str, natural_default: f64| match (field, units) {
        (Some(v), _) => Ok(v),
        (None, UnitSystem::Natural) => Ok(natural_default),
        (None, UnitSystem::Si) => Err(format!("scenario.{name} is required with si units")),
    };
    let (d_default, mass_default, p_default) = match kind {
        CommandKind::Quadrature => ([0.0, 0.0, 1.0], EFFECTIVELY_INFINITE_MASS, [0.0; 3]),
        CommandKind::Evolve => ([0.0, 0.0, 0.3], 1000.0, [0.0, 0.0, 1.0]),
    };
    let omega_a = require(scenario.and_then(|s| s.omega_a), "omega_a", 1.0)?;
    let mass = require(scenario.and_then(|s| s.mass), "mass", mass_default)?;
    let mut dipole = match (scenario.and_then(|s| s.dipole), units) {
        (Some(v), _) => v,
        (None, UnitSystem::Natural) => d_default,
        (None, UnitSystem::Si) => return Err("scenario.dipole is required with si units".into()),
    };
    let p0 = scenario.and_then(|s| s.p0).unwrap_or(match units {
        UnitSystem::Natural => p_default,
        UnitSystem::Si => [0.0; 3],
    });

    // The dipole flag carries scenario units; the dimensionless epsilon and
    // beta flags apply after rescaling to natural units.
    if let Some(d) = flags.dipole {
        dipole = d;
    }
    let atom = AtomParams::from_dipole_vector(
        omega_a,
        Vec3::new(dipole[0], dipole[1], dipole[2]),
        mass,
        Vec3::new(p0[0], p0[1], p0[2]),
        units,
    )
    .map_err(|e| e.to_string())?;
    let mut atom = atom.to_natural();

    if let Some(eps) = flags.epsilon {
        if !(0.0..0.5).contains(&eps) {
            return Err(format!("--epsilon must lie in [0, 0.5), got {eps}"));
        }
        let new_mass = if eps > 0.0 {
            atom.omega_a / eps
        } else {
            EFFECTIVELY_INFINITE_MASS
        };
        // keep the velocity, not the momentum, when the mass changes
        let beta = atom.small_params().beta;
        atom = AtomParams::new(
            atom.omega_a,
            atom.dipole,
            atom.e_d,
            new_mass,
            beta * new_mass,
            UnitSystem::Natural,
        )
        .map_err(|e| e.to_string())?;
    }
    if let Some(beta) = flags.beta {
        let p0 = Vec3::new(beta[0], beta[1], beta[2]) * atom.mass;
        atom = AtomParams::new(
            atom.omega_a,
            atom.dipole,
            atom.e_d,
            atom.mass,
            p0,
            UnitSystem::Natural,
        )
        .map_err(|e| e.to_string())?;
    }

    let scale = if flags.si {
        OutputScale::si(omega_a)
    } else {
        OutputScale::identity()
    };

    let grid = file.grid.as_ref();
    let (polar_default, azimuth_default) = match kind {
        CommandKind::Quadrature => (16, 32),
        CommandKind::Evolve => (8, 16),
    };
    let n_polar = flags
        .grid_polar
        .or(grid.and_then(|g| g.n_polar))
        .unwrap_or(polar_default);
    let n_azimuth = flags
        .grid_azimuth
        .or(grid.and_then(|g| g.n_azimuth))
        .unwrap_or(azimuth_default);
    let n_freq = grid.and_then(|g| g.n_freq).unwrap_or(301);
    let hw_in_gamma = grid.and_then(|g| g.freq_halfwidth_in_gamma).unwrap_or(25.0);
    if !(hw_in_gamma > 0.0) {
        return Err("grid.freq_halfwidth_in_gamma must be positive".into());
    }

    let ev = file.evolve.as_ref();
    let t_end_in_inverse_gamma = ev.and_then(|e| e.t_end_in_inverse_gamma).unwrap_or(2.0);
    if !(t_end_in_inverse_gamma > 0.0) {
        return Err("evolve.t_end_in_inverse_gamma must be positive".into());
    }
    let dt = ev.and_then(|e| e.dt).filter(|&v| v != 0.0);
    if let Some(v) = dt {
        if !(v > 0.0) {
            return Err("evolve.dt must be positive (or 0 for automatic)".into());
        }
    }
    let sample_stride = ev.and_then(|e| e.sample_stride).filter(|&v| v != 0);

    let out = file.output.as_ref();
    if let Some(fmt) = out.and_then(|o| o.format.as_deref()) {
        if fmt != "csv" {
            return Err(format!("output.format: only \"csv\" is implemented, got \"{fmt}\""));
        }
    }
    let out_path = flags.out.clone().or_else(|| {
        out.and_then(|o| o.path.clone())
            .filter(|p| !p.as_os_str().is_empty())
    });

    let em = file.emitter.as_ref();
    let emitter_omega0 = em.and_then(|e| e.omega0).unwrap_or(1.0);
    let emitter_velocities = em
        .and_then(|e| e.velocities.clone())
        .unwrap_or_else(|| vec![0.0, 1e-6, 0.01, 0.1, 0.5]);

    let sw = file.sweep.as_ref();
    let lattice_default = || vec![0.0, 1e-4, 1e-3, 1e-2];
    let sweep_epsilons = sw.and_then(|s| s.epsilons.clone()).unwrap_or_else(lattice_default);
    let sweep_betas = sw.and_then(|s| s.betas.clone()).unwrap_or_else(lattice_default);

    Ok(Resolved {
        atom,
        scale,
        n_polar,
        n_azimuth,
        n_freq,
        hw_in_gamma,
        t_end_in_inverse_gamma,
        dt,
        sample_stride,
        out_path,
        emitter_omega0,
        emitter_velocities,
        sweep_epsilons,
        sweep_betas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_resolves_to_benchmark_defaults() {
        let r = resolve(&FileConfig::default(), &Overrides::default(), CommandKind::Quadrature)
            .unwrap();
        assert_eq!(r.atom.dipole, 1.0);
        assert_eq!(r.atom.mass, EFFECTIVELY_INFINITE_MASS);
        assert_eq!(r.atom.p0, Vec3::zero());
        assert_eq!((r.n_polar, r.n_azimuth), (16, 32));

        let r = resolve(&FileConfig::default(), &Overrides::default(), CommandKind::Evolve)
            .unwrap();
        assert_eq!(r.atom.dipole, 0.3);
        assert_eq!(r.atom.mass, 1000.0);
        assert_eq!(r.atom.p0, Vec3::new(0.0, 0.0, 1.0));
        assert_eq!((r.n_polar, r.n_azimuth), (8, 16));
        assert_eq!(r.n_freq, 301);
    }

    #[test]
    fn flags_override_file_values() {
        let file: FileConfig = toml::from_str(
            r#"
            [scenario]
            dipole = [0.0, 0.0, 0.5]
            mass = 500.0
            [grid]
            n_polar = 6
            "#,
        )
        .unwrap();
        let flags = Overrides {
            grid_polar: Some(10),
            epsilon: Some(1e-3),
            beta: Some([0.0, 0.0, 2e-3]),
            dipole: Some([0.6, 0.0, 0.8]),
            ..Overrides::default()
        };
        let r = resolve(&file, &flags, CommandKind::Quadrature).unwrap();
        assert_eq!(r.n_polar, 10);
        assert_eq!(r.atom.mass, 1000.0);
        assert_eq!(r.atom.dipole, 1.0);
        assert!((r.atom.e_d - Vec3::new(0.6, 0.0, 0.8)).norm() < 1e-15);
        assert_eq!(r.atom.p0, Vec3::new(0.0, 0.0, 2.0));
    }

    #[test]
    fn epsilon_zero_flag_means_effectively_infinite_mass() {
        let flags = Overrides {
            epsilon: Some(0.0),
            ..Overrides::default()
        };
        let r = resolve(&FileConfig::default(), &flags, CommandKind::Evolve).unwrap();
        assert_eq!(r.atom.mass, EFFECTIVELY_INFINITE_MASS);
        // the default evolve velocity survives the mass change
        assert!((r.atom.small_params().beta.z - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn si_scenario_requires_dimensionful_fields() {
        let file: FileConfig = toml::from_str("[scenario]\nunits = \"si\"\n").unwrap();
        let err = resolve(&file, &Overrides::default(), CommandKind::Quadrature).unwrap_err();
        assert!(err.contains("omega_a"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(toml::from_str::<FileConfig>("[scenario]\nomega = 1.0\n").is_err());
        assert!(toml::from_str::<FileConfig>("[grids]\nn_polar = 4\n").is_err());
    }

    #[test]
    fn si_scale_factors_are_consistent() {
        let s = OutputScale::si(2.0e15);
        assert_eq!(s.rate, 2.0e15);
        assert_eq!(s.time, 0.5e-15);
        // drift = momentum per time
        assert!((s.drift - s.momentum * s.rate).abs() / s.drift < 1e-15);
    }
}
