//! Scenario files: TOML with the unit spelled out in every key name.
//!
//! ```toml
//! name = "caf-rotational"
//! temperature_k = 300.0
//!
//! [atom]
//! level_omega_rad_per_s = [0.0, 1.32e11]
//! [[atom.transition]]
//! lower = 0
//! upper = 1
//! dipole_c_m = 1.02e-29
//!
//! [material]
//! kind = "drude"
//! plasma_frequency_rad_per_s = 1.37e16
//! relaxation_rate_rad_per_s = 4.06e13
//!
//! [geometry]
//! z_m = 5e-6
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thermocp_core::constants::{E_CHARGE, HBAR};
use thermocp_core::force::StateForceModel;
use thermocp_core::matsubara::SeriesOptions;
use thermocp_core::thermal::Temperature;
use thermocp_core::{
    ForceOptions, FreeCarriers, LevelSystem, Material, Oscillator, QuadratureOptions, ShiftMode, Transition,
};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: Option<String>,
    temperature_k: f64,
    atom: AtomSection,
    material: MaterialSection,
    geometry: GeometrySection,
    time: Option<TimeSection>,
    #[serde(default)]
    tolerances: TolerancesSection,
    #[serde(default)]
    output: OutputSection,
    #[serde(default)]
    dilute: DiluteSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomSection {
    labels: Option<Vec<String>>,
    energies_j: Option<Vec<f64>>,
    level_omega_rad_per_s: Option<Vec<f64>>,
    #[serde(default = "yes")]
    isotropic: bool,
    #[serde(default)]
    shift_mode: ShiftModeKey,
    #[serde(default, rename = "transition")]
    transitions: Vec<TransitionSection>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize, Default, Clone, Copy)]
#[serde(rename_all = "kebab-case")]
enum ShiftModeKey {
    #[default]
    Perturbative,
    SinglePass,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionSection {
    lower: usize,
    upper: usize,
    dipole_c_m: Option<f64>,
    dipole_debye: Option<f64>,
    dipole_vector_c_m: Option<[f64; 3]>,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(rename_all = "kebab-case")]
enum MaterialKind {
    Vacuum,
    PerfectMirror,
    Drude,
    Plasma,
    DrudeLorentz,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialSection {
    kind: MaterialKind,
    plasma_frequency_rad_per_s: Option<f64>,
    plasma_energy_ev: Option<f64>,
    relaxation_rate_rad_per_s: Option<f64>,
    relaxation_energy_ev: Option<f64>,
    #[serde(default, rename = "oscillator")]
    oscillators: Vec<OscillatorSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OscillatorSection {
    strength_rad2_per_s2: f64,
    resonance_rad_per_s: f64,
    #[serde(default)]
    damping_rad_per_s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometrySection {
    z_m: Option<f64>,
    z_grid: Option<GridSection>,
}

#[derive(Debug, Deserialize, Default, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    start_m: f64,
    stop_m: f64,
    count: usize,
    #[serde(default)]
    spacing: Spacing,
}

#[derive(Debug, Deserialize, Default, Clone, Copy)]
#[serde(rename_all = "kebab-case")]
enum ModelKey {
    #[default]
    Perturbative,
    Exact,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeSection {
    #[serde(default)]
    start_s: f64,
    stop_s: Option<f64>,
    stop_lifetimes: Option<f64>,
    count: usize,
    #[serde(default)]
    spacing: Option<Spacing>,
    #[serde(default)]
    initial_state: usize,
    #[serde(default)]
    force_model: ModelKey,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct TolerancesSection {
    series_rel: Option<f64>,
    quadrature_rel: Option<f64>,
    n_max: Option<usize>,
    oscillation_budget: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    directory: Option<PathBuf>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct DiluteSection {
    number_density_per_m3: Option<f64>,
}

/// End of the time grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStop {
    Seconds(f64),
    /// Multiples of `1/max_n Γ_n`, resolved once rates are known.
    Lifetimes(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSpec {
    pub start: f64,
    pub stop: TimeStop,
    pub count: usize,
    pub spacing: Spacing,
    pub initial_state: usize,
    pub model: StateForceModel,
}

impl TimeSpec {
    /// Grid points for a resolved stop time (s).
    pub fn grid(&self, stop: f64) -> Vec<f64> {
        match self.spacing {
            Spacing::Linear => linspace(self.start, stop, self.count),
            Spacing::Log => {
                // first point at `start`, the rest log-spaced
                let first = if self.start > 0.0 { self.start } else { stop * 1e-4 };
                let mut g = logspace(first, stop, self.count.saturating_sub(usize::from(self.start == 0.0)));
                if self.start == 0.0 {
                    g.insert(0, 0.0);
                }
                g
            }
        }
    }
}

/// Validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub temperature: Temperature,
    pub levels: LevelSystem,
    pub shift_mode: ShiftMode,
    pub material: Material,
    /// Single height from `geometry.z_m`.
    pub z: Option<f64>,
    /// Heights for distance scans: `geometry.z_grid`, or `[z_m]`.
    pub heights: Vec<f64>,
    pub time: Option<TimeSpec>,
    pub options: ForceOptions,
    pub output_dir: Option<PathBuf>,
    pub number_density: Option<f64>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        Self::parse(&text, stem.as_deref().unwrap_or("scenario")).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses and validates a scenario; `default_name` is used when the
    /// file has no `name` key.
    pub fn parse(text: &str, default_name: &str) -> Result<Self, CliError> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        build(file, default_name)
    }

    /// The single height required by point computations.
    pub fn height(&self) -> Result<f64, CliError> {
        self.z
            .ok_or_else(|| CliError::Config("geometry.z_m: required for this subcommand".into()))
    }
}

fn field<T>(name: &str, r: thermocp_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Config(format!("{name}: {e}")))
}

fn bad(name: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{name}: {msg}"))
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(name, format!("must be a positive number, got {v}")))
    }
}

fn ev_to_rad_per_s(ev: f64) -> f64 {
    ev * E_CHARGE / HBAR
}

fn one_of(
    a_name: &str,
    a: Option<f64>,
    b_name: &str,
    b: Option<f64>,
    convert_b: fn(f64) -> f64,
) -> Result<Option<f64>, CliError> {
    match (a, b) {
        (Some(_), Some(_)) => Err(bad(a_name, format!("give either {a_name} or {b_name}, not both"))),
        (Some(v), None) => Ok(Some(v)),
        (None, Some(v)) => Ok(Some(convert_b(v))),
        (None, None) => Ok(None),
    }
}

fn build(file: ScenarioFile, default_name: &str) -> Result<Scenario, CliError> {
    let temperature = field("temperature_k", Temperature::new(file.temperature_k))?;
    let levels = build_levels(&file.atom)?;
    let material = build_material(&file.material)?;

    let z = file.geometry.z_m.map(|v| positive("geometry.z_m", v)).transpose()?;
    let heights = match (&file.geometry.z_grid, z) {
        (Some(grid), _) => build_grid(grid)?,
        (None, Some(z)) => vec![z],
        (None, None) => return Err(bad("geometry", "needs z_m or z_grid")),
    };

    let time = file.time.as_ref().map(|t| build_time(t, levels.len())).transpose()?;

    let mut options = ForceOptions::default();
    let tol = &file.tolerances;
    if let Some(v) = tol.series_rel {
        options.series.tol = positive("tolerances.series_rel", v)?;
    }
    if let Some(v) = tol.quadrature_rel {
        options.quad.rel_tol = positive("tolerances.quadrature_rel", v)?;
    }
    if let Some(v) = tol.n_max {
        if v == 0 {
            return Err(bad("tolerances.n_max", "must be >= 1"));
        }
        options.series.n_max = v;
    }
    if let Some(v) = tol.oscillation_budget {
        options.quad.oscillation_budget = positive("tolerances.oscillation_budget", v)?;
    }

    let number_density = file
        .dilute
        .number_density_per_m3
        .map(|v| positive("dilute.number_density_per_m3", v))
        .transpose()?;

    Ok(Scenario {
        name: file.name.unwrap_or_else(|| default_name.to_string()),
        temperature,
        levels,
        shift_mode: match file.atom.shift_mode {
            ShiftModeKey::Perturbative => ShiftMode::Perturbative,
            ShiftModeKey::SinglePass => ShiftMode::SinglePass,
        },
        material,
        z,
        heights,
        time,
        options,
        output_dir: file.output.directory,
        number_density,
    })
}

fn build_levels(atom: &AtomSection) -> Result<LevelSystem, CliError> {
    let energies = match (&atom.energies_j, &atom.level_omega_rad_per_s) {
        (Some(_), Some(_)) => return Err(bad("atom", "give either energies_j or level_omega_rad_per_s, not both")),
        (Some(e), None) => e.clone(),
        (None, Some(w)) => w.iter().map(|w| HBAR * w).collect(),
        (None, None) => return Err(bad("atom", "needs energies_j or level_omega_rad_per_s")),
    };
    let labels = match &atom.labels {
        Some(l) => l.clone(),
        None => (0..energies.len()).map(|i| i.to_string()).collect(),
    };
    let mut transitions = Vec::with_capacity(atom.transitions.len());
    for (i, t) in atom.transitions.iter().enumerate() {
        let name = format!("atom.transition[{i}]");
        let given = [
            t.dipole_c_m.is_some(),
            t.dipole_debye.is_some(),
            t.dipole_vector_c_m.is_some(),
        ];
        if given.iter().filter(|g| **g).count() != 1 {
            return Err(bad(
                &name,
                "give exactly one of dipole_c_m, dipole_debye, dipole_vector_c_m",
            ));
        }
        let dipole = if let Some(v) = t.dipole_vector_c_m {
            v
        } else {
            let m = t
                .dipole_c_m
                .or(t.dipole_debye.map(|d| d * thermocp_core::constants::DEBYE))
                .expect("checked above");
            if !atom.isotropic {
                return Err(bad(&name, "anisotropic atoms need dipole_vector_c_m"));
            }
            [m, 0.0, 0.0]
        };
        transitions.push(Transition {
            lower: t.lower,
            upper: t.upper,
            dipole,
        });
    }
    field("atom", LevelSystem::new(energies, labels, &transitions, atom.isotropic))
}

fn build_material(m: &MaterialSection) -> Result<Material, CliError> {
    let wp = one_of(
        "material.plasma_frequency_rad_per_s",
        m.plasma_frequency_rad_per_s,
        "material.plasma_energy_ev",
        m.plasma_energy_ev,
        ev_to_rad_per_s,
    )?;
    let gamma = one_of(
        "material.relaxation_rate_rad_per_s",
        m.relaxation_rate_rad_per_s,
        "material.relaxation_energy_ev",
        m.relaxation_energy_ev,
        ev_to_rad_per_s,
    )?;
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| bad(name, "required for this material kind"));
    let unused = |ok: bool| {
        if ok {
            Ok(())
        } else {
            Err(bad("material", "parameters given that this material kind does not use"))
        }
    };
    match m.kind {
        MaterialKind::Vacuum | MaterialKind::PerfectMirror => {
            unused(wp.is_none() && gamma.is_none() && m.oscillators.is_empty())?;
            Ok(if matches!(m.kind, MaterialKind::Vacuum) {
                Material::Vacuum
            } else {
                Material::PerfectMirror
            })
        }
        MaterialKind::Drude => {
            unused(m.oscillators.is_empty())?;
            field(
                "material",
                Material::drude(
                    need(wp, "material.plasma_frequency_rad_per_s")?,
                    need(gamma, "material.relaxation_rate_rad_per_s")?,
                ),
            )
        }
        MaterialKind::Plasma => {
            unused(m.oscillators.is_empty() && gamma.is_none())?;
            field(
                "material",
                Material::plasma(need(wp, "material.plasma_frequency_rad_per_s")?),
            )
        }
        MaterialKind::DrudeLorentz => {
            let oscillators = m
                .oscillators
                .iter()
                .map(|o| Oscillator {
                    strength: o.strength_rad2_per_s2,
                    resonance: o.resonance_rad_per_s,
                    damping: o.damping_rad_per_s,
                })
                .collect();
            let drude_part = match (wp, gamma) {
                (Some(p), g) => Some(FreeCarriers {
                    plasma_frequency: p,
                    relaxation_rate: g.unwrap_or(0.0),
                }),
                (None, Some(_)) => return Err(bad("material.relaxation_rate_rad_per_s", "needs a plasma frequency")),
                (None, None) => None,
            };
            field("material", Material::drude_lorentz(oscillators, drude_part))
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                a
            } else if i == n - 1 {
                b
            } else {
                (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

fn build_grid(g: &GridSection) -> Result<Vec<f64>, CliError> {
    let start = positive("geometry.z_grid.start_m", g.start_m)?;
    let stop = positive("geometry.z_grid.stop_m", g.stop_m)?;
    if g.count == 0 {
        return Err(bad("geometry.z_grid.count", "must be >= 1"));
    }
    if stop < start || (stop == start && g.count > 1) {
        return Err(bad("geometry.z_grid", "stop_m must exceed start_m"));
    }
    Ok(match g.spacing {
        Spacing::Log => logspace(start, stop, g.count),
        Spacing::Linear => linspace(start, stop, g.count),
    })
}

fn build_time(t: &TimeSection, levels: usize) -> Result<TimeSpec, CliError> {
    if !(t.start_s >= 0.0 && t.start_s.is_finite()) {
        return Err(bad("time.start_s", "must be >= 0"));
    }
    let stop = match (t.stop_s, t.stop_lifetimes) {
        (Some(s), None) => {
            if !(s > t.start_s && s.is_finite()) {
                return Err(bad("time.stop_s", "must exceed time.start_s"));
            }
            TimeStop::Seconds(s)
        }
        (None, Some(l)) => TimeStop::Lifetimes(positive("time.stop_lifetimes", l)?),
        _ => return Err(bad("time", "give exactly one of stop_s and stop_lifetimes")),
    };
    if t.count < 2 {
        return Err(bad("time.count", "must be >= 2"));
    }
    if t.initial_state >= levels {
        return Err(bad("time.initial_state", format!("must be < {levels}")));
    }
    Ok(TimeSpec {
        start: t.start_s,
        stop,
        count: t.count,
        spacing: t.spacing.unwrap_or(Spacing::Linear),
        initial_state: t.initial_state,
        model: match t.force_model {
            ModelKey::Perturbative => StateForceModel::Perturbative,
            ModelKey::Exact => StateForceModel::Exact,
        },
    })
}

/// Applies a command-line tolerance override to the series truncation.
pub fn override_tolerance(options: &mut ForceOptions, rel: f64) -> Result<(), CliError> {
    let rel = positive("--tol", rel)?;
    options.series = SeriesOptions {
        tol: rel,
        ..options.series
    };
    options.quad = QuadratureOptions {
        rel_tol: options.quad.rel_tol.min((rel * 1e-2).max(1e-13)),
        ..options.quad
    };
    Ok(())
}
