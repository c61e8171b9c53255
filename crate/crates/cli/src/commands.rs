//! Subcommands. Each one evaluates a scenario and writes one or more CSV
//! tables named `<scenario>-<table>.csv`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thermocp_core::atom::thermal_state;
use thermocp_core::constants::EPS0;
use thermocp_core::dynamics::evolve;
use thermocp_core::force::{
    dilute_gas_check, force_macroscopic, force_state_exact, force_state_perturbative, force_zero_temperature,
    state_forces, weighted_force, ImaginaryPolarizability, StateForceModel,
};
use thermocp_core::thermal::{photon_number, thermal_reduction_deficit, thermal_reduction_ratio};
use thermocp_core::{DressedLevels, InternalState, PlanarGeometry};

use crate::config::{Scenario, TimeStop};
use crate::output::{emit_csv, Cell, Table};
use crate::CliError;

const SIGN: &str = "sign: negative force = attractive (toward the surface)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    ForceVsDistance,
    Dynamics,
    Ratio,
    Rates,
    Compare,
    DiluteCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ForceVsDistance => "force-vs-distance",
            Command::Dynamics => "dynamics",
            Command::Ratio => "ratio",
            Command::Rates => "rates",
            Command::Compare => "compare",
            Command::DiluteCheck => "dilute-check",
        }
    }
}

/// Maps a core error raised while computing `what`.
fn fail(what: &str) -> impl Fn(thermocp_core::Error) -> CliError + '_ {
    move |e| {
        use thermocp_core::Error as E;
        match e {
            E::Convergence { .. } | E::Quadrature { .. } | E::OscillationBudget { .. } => {
                CliError::Convergence(format!("{what}: {e}"))
            }
            E::InvalidInput(_) | E::Domain(_) | E::DegenerateLevels(..) => CliError::Config(format!("{what}: {e}")),
            _ => CliError::Compute(format!("{what}: {e}")),
        }
    }
}

fn geometry(s: &Scenario, z: f64) -> Result<PlanarGeometry, CliError> {
    PlanarGeometry::new(z, s.material.clone()).map_err(fail("geometry"))
}

fn dressed(s: &Scenario, g: &PlanarGeometry) -> Result<DressedLevels, CliError> {
    DressedLevels::compute(
        &s.levels,
        g,
        s.temperature,
        s.shift_mode,
        &s.options.quad,
        &s.options.series,
    )
    .map_err(fail("level shifts and rates"))
}

/// Macroscopic force for `alpha`: Matsubara sum at `T > 0`, frequency
/// integral at `T = 0`.
fn macroscopic(s: &Scenario, alpha: &ImaginaryPolarizability, g: &PlanarGeometry) -> Result<f64, CliError> {
    if s.temperature.is_zero() {
        force_zero_temperature(alpha, g, &s.options).map_err(fail("force_zero_temperature"))
    } else {
        force_macroscopic(alpha, g, s.temperature, &s.options).map_err(fail("force_macroscopic"))
    }
}

fn header_comment(s: &Scenario, what: &str, units: &str) -> String {
    format!(
        "thermocp {what} | scenario {} | T = {} K | material {}\nunits: {units}",
        s.name,
        s.temperature.kelvin(),
        s.material.name()
    )
}

/// Runs `command` and returns the files written.
pub fn run(command: Command, s: &Scenario, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !out_dir.is_dir() {
        std::fs::create_dir_all(out_dir).map_err(|e| CliError::Output(format!("{}: {e}", out_dir.display())))?;
    }
    let tables = match command {
        Command::ForceVsDistance => vec![("force-vs-distance", force_vs_distance(s)?)],
        Command::Dynamics => vec![("dynamics", dynamics(s)?)],
        Command::Ratio => vec![("ratio", ratio(s)?)],
        Command::Rates => {
            let (rates, shifts) = rates(s)?;
            vec![("rates", rates), ("shifts", shifts)]
        }
        Command::Compare => vec![("compare", compare(s)?)],
        Command::DiluteCheck => vec![("dilute-check", dilute(s)?)],
    };
    let mut written = Vec::new();
    for (suffix, table) in tables {
        let path = out_dir.join(format!("{}-{suffix}.csv", s.name));
        emit_csv(&table, &path)?;
        written.push(path);
    }
    Ok(written)
}

fn force_vs_distance(s: &Scenario) -> Result<Table, CliError> {
    let rows: Vec<Vec<Cell>> = s
        .heights
        .par_iter()
        .map(|&z| -> Result<Vec<Cell>, CliError> {
            let g = geometry(s, z)?;
            let d = dressed(s, &g)?;
            let sharp = d.with_scaled_rates(0.0);
            let f0 = macroscopic(s, &ImaginaryPolarizability::state(&s.levels, &sharp, 0), &g)?;
            let ft = macroscopic(
                s,
                &ImaginaryPolarizability::thermal(&s.levels, &sharp, s.temperature),
                &g,
            )?;
            let ground = force_state_exact(&s.levels, &d, &g, s.temperature, 0, &s.options)
                .map_err(fail("force_state_exact"))?;
            Ok(vec![
                z.into(),
                f0.into(),
                ft.into(),
                ground.nonresonant.into(),
                ground.resonant_emission.into(),
                ground.resonant_absorption.into(),
                ground.total.into(),
                ground.metadata.continuation_warning.into(),
            ])
        })
        .collect::<Result<_, _>>()?;
    let mut t = Table::new(
        header_comment(s, "force-vs-distance", &format!("z in m; forces in N; {SIGN}")),
        &[
            "z_m",
            "force_macroscopic_alpha0_n",
            "force_macroscopic_alphaT_n",
            "ground_exact_nonresonant_n",
            "ground_exact_resonant_emission_n",
            "ground_exact_resonant_absorption_n",
            "ground_exact_total_n",
            "continuation_warning",
        ],
    );
    t.rows = rows;
    Ok(t)
}

fn dynamics(s: &Scenario) -> Result<Table, CliError> {
    let spec = s
        .time
        .as_ref()
        .ok_or_else(|| CliError::Config("time: section required for dynamics".into()))?;
    let g = geometry(s, s.height()?)?;
    let d = dressed(s, &g)?;
    let stop = match spec.stop {
        TimeStop::Seconds(t) => t,
        TimeStop::Lifetimes(k) => {
            let fastest = (0..d.len()).map(|n| d.total_rate(n)).fold(0.0, f64::max);
            if fastest == 0.0 {
                return Err(CliError::Config("time.stop_lifetimes: all rates vanish".into()));
            }
            spec.start + k / fastest
        }
    };
    let grid = spec.grid(stop);
    let init = InternalState {
        time: spec.start,
        ..InternalState::pure(s.levels.len(), spec.initial_state)
    };
    let states = evolve(&init, &d, &grid).map_err(fail("dynamics"))?;
    let per_state =
        state_forces(&s.levels, &d, &g, s.temperature, spec.model, &s.options).map_err(fail("state forces"))?;
    let mut header = vec!["t_s".to_string()];
    header.extend(s.levels.labels().iter().map(|l| format!("population_{l}")));
    header.push("force_total_n".into());
    let mut t = Table::new(
        header_comment(
            s,
            "dynamics",
            &format!("t in s; populations dimensionless; force in N at z = {} m; {SIGN}", g.z),
        ),
        &[],
    );
    t.header = header;
    for st in &states {
        let mut row: Vec<Cell> = vec![st.time.into()];
        row.extend(st.populations.iter().map(|p| Cell::from(*p)));
        row.push(weighted_force(&per_state, st).map_err(fail("force_total"))?.into());
        t.push(row);
    }
    Ok(t)
}

fn transitions(s: &Scenario) -> Vec<(usize, usize)> {
    let n = s.levels.len();
    let mut out = Vec::new();
    for upper in 0..n {
        for lower in 0..upper {
            if s.levels.dipole_squared(upper, lower) > 0.0 {
                out.push((lower, upper));
            }
        }
    }
    out
}

fn ratio(s: &Scenario) -> Result<Table, CliError> {
    let labels = s.levels.labels();
    let mut t = Table::new(
        header_comment(
            s,
            "ratio",
            "omega in rad/s; r_T = tanh(hbar omega / 2 k_B T) dimensionless",
        ),
        &[
            "lower",
            "upper",
            "omega_rad_per_s",
            "photon_number",
            "r_t",
            "one_minus_r_t",
        ],
    );
    for (lower, upper) in transitions(s) {
        let w = s.levels.omega(upper, lower);
        let f = fail("thermal_reduction_ratio");
        t.push(vec![
            labels[lower].clone().into(),
            labels[upper].clone().into(),
            w.into(),
            photon_number(w, s.temperature).map_err(&f)?.into(),
            thermal_reduction_ratio(w, s.temperature).map_err(&f)?.into(),
            thermal_reduction_deficit(w, s.temperature).map_err(&f)?.into(),
        ]);
    }
    Ok(t)
}

fn rates(s: &Scenario) -> Result<(Table, Table), CliError> {
    let g = geometry(s, s.height()?)?;
    let d = dressed(s, &g)?;
    let labels = s.levels.labels();
    let n = s.levels.len();
    let mut rates = Table::new(
        header_comment(s, "rates", &format!("omega in rad/s; rates in 1/s at z = {} m", g.z)),
        &["from", "to", "omega_tilde_rad_per_s", "rate_per_s"],
    );
    for from in 0..n {
        for to in 0..n {
            if from != to && s.levels.dipole_squared(from, to) > 0.0 {
                rates.push(vec![
                    labels[from].clone().into(),
                    labels[to].clone().into(),
                    d.omega_tilde(from, to).into(),
                    d.rate(from, to).into(),
                ]);
            }
        }
    }
    let mut shifts = Table::new(
        header_comment(
            s,
            "shifts",
            &format!(
                "surface-induced shifts in rad/s; total loss rates in 1/s at z = {} m",
                g.z
            ),
        ),
        &[
            "level",
            "shift_rad_per_s",
            "applied_shift_rad_per_s",
            "total_rate_per_s",
        ],
    );
    for i in 0..n {
        shifts.push(vec![
            labels[i].clone().into(),
            d.shifts()[i].into(),
            d.applied_shifts()[i].into(),
            d.total_rate(i).into(),
        ]);
    }
    Ok((rates, shifts))
}

fn compare(s: &Scenario) -> Result<Table, CliError> {
    let g = geometry(s, s.height()?)?;
    let d = dressed(s, &g)?;
    let sharp = d.with_scaled_rates(0.0);
    let ls = &s.levels;
    let ground = force_state_perturbative(ls, &sharp, &g, s.temperature, 0, &s.options)
        .map_err(fail("force_state_perturbative"))?;
    let f_alpha0 = macroscopic(s, &ImaginaryPolarizability::state(ls, &sharp, 0), &g)?;
    let f_alpha_t = macroscopic(s, &ImaginaryPolarizability::thermal(ls, &sharp, s.temperature), &g)?;
    let per_state = state_forces(ls, &sharp, &g, s.temperature, StateForceModel::Perturbative, &s.options)
        .map_err(fail("state forces"))?;
    let sigma = InternalState {
        time: 0.0,
        populations: thermal_state(&sharp, s.temperature),
        coherences: None,
    };
    let equilibrium = weighted_force(&per_state, &sigma).map_err(fail("force_total"))?;
    let resonant_sum: f64 = per_state
        .iter()
        .zip(&sigma.populations)
        .map(|(f, p)| p * f.resonant())
        .sum();
    let mut t = Table::new(
        header_comment(
            s,
            "compare",
            &format!("forces in N at z = {} m; ratios dimensionless; {SIGN}", g.z),
        ),
        &["quantity", "value"],
    );
    let mut row = |k: &str, v: f64| t.push(vec![k.into(), v.into()]);
    row("force_macroscopic_alpha0_n", f_alpha0);
    row("force_macroscopic_alphaT_n", f_alpha_t);
    row("ground_state_force_n", ground.total);
    row("ground_state_nonresonant_n", ground.nonresonant);
    row("ground_state_resonant_absorption_n", ground.resonant_absorption);
    row("ground_state_deviation_n", ground.total - f_alpha0);
    row("equilibrium_force_n", equilibrium);
    row("equilibrium_resonant_sum_n", resonant_sum);
    row("equilibrium_ratio", equilibrium / f_alpha0);
    if let Some(&(lower, upper)) = transitions(s).first() {
        let w = ls.omega(upper, lower);
        row(
            "r_t_lowest_transition",
            thermal_reduction_ratio(w, s.temperature).map_err(fail("thermal_reduction_ratio"))?,
        );
    }
    Ok(t)
}

/// Default gas density: `η α(0)/ε₀ = 1e-7`.
fn default_density(s: &Scenario) -> f64 {
    let bare = DressedLevels::bare(&s.levels);
    let a0 = thermocp_core::atom::polarizability_imag_diag(&s.levels, &bare, 0, 0.0)[0];
    if a0 > 0.0 {
        1e-7 * EPS0 / a0
    } else {
        1.0
    }
}

fn dilute(s: &Scenario) -> Result<Table, CliError> {
    let g = geometry(s, s.height()?)?;
    let eta = s.number_density.unwrap_or_else(|| default_density(s));
    let r = dilute_gas_check(&s.levels, &g, s.temperature, eta, &s.options).map_err(fail("dilute_gas_check"))?;
    let mut t = Table::new(
        header_comment(
            s,
            "dilute-check",
            &format!("d in m; density in 1/m^3; forces in N per atom; {SIGN}"),
        ),
        &[
            "d_m",
            "number_density_per_m3",
            "force_gas_per_atom_n",
            "force_atom_n",
            "deviation",
            "deviation_half_density",
            "deviation_extrapolated",
            "nonlinearity_warning",
        ],
    );
    t.push(vec![
        g.z.into(),
        eta.into(),
        r.force_gas.into(),
        r.force_atom.into(),
        r.deviation.into(),
        r.deviation_half.into(),
        r.extrapolated.into(),
        r.nonlinearity_warning.into(),
    ]);
    Ok(t)
}
