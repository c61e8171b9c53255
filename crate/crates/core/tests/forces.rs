//! Force assembly: perfect-mirror closed form, equilibrium identities,
//! exact-vs-perturbative limits and shift/force duality.

use std::f64::consts::PI;

use thermocp_core::atom::{state_potential, thermal_state};
use thermocp_core::constants::{C, EPS0, HBAR, MU0};
use thermocp_core::dynamics::evolve;
use thermocp_core::force::{
    force_macroscopic, force_state_exact, force_state_perturbative, force_total, force_zero_temperature, state_forces,
    StateForceModel,
};
use thermocp_core::matsubara::SeriesOptions;
use thermocp_core::thermal::Temperature;
use thermocp_core::{
    DressedLevels, ForceOptions, ImaginaryPolarizability, InternalState, LevelSystem, Material, PlanarGeometry,
    QuadratureOptions, ShiftMode,
};

fn t(k: f64) -> Temperature {
    Temperature::new(k).unwrap()
}

fn gold() -> Material {
    Material::drude(1.37e16, 4.06e13).unwrap()
}

/// Zero-temperature force on a two-level atom above a perfect mirror from
/// the image-dipole field, integrated on a dense logarithmic grid in
/// `a = 2ξz/c` with composite Simpson weights.
fn mirror_force_oracle(omega: f64, dipole: f64, z: f64) -> f64 {
    let alpha = |xi: f64| 2.0 * dipole * dipole * omega / (3.0 * HBAR * (omega * omega + xi * xi));
    let (t0, t1, n) = (-40.0f64, 80f64.ln(), 40_000usize);
    let h = (t1 - t0) / n as f64;
    let mut acc = 0.0;
    for j in 0..=n {
        let a = (t0 + j as f64 * h).exp();
        let xi = a * C / (2.0 * z);
        let w = if j == 0 || j == n {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        // ∂_z [ξ² Tr G] = c²/(16π z⁴) e^{−a} (a³ + 3a² + 6a + 6); dξ = (c/2z) a dt
        let integrand =
            alpha(xi) * C * C / (16.0 * PI * z.powi(4)) * (-a).exp() * (a.powi(3) + 3.0 * a * a + 6.0 * a + 6.0);
        acc += w * integrand * a * C / (2.0 * z);
    }
    -MU0 * HBAR / (2.0 * PI) * acc * h / 3.0
}

#[test]
fn zero_temperature_mirror_force_matches_image_oracle() {
    let (w, d) = (2.37e15, 3.58e-29);
    let ls = LevelSystem::two_level(w, d).unwrap();
    let bare = DressedLevels::bare(&ls);
    let alpha = ImaginaryPolarizability::state(&ls, &bare, 0);
    for &zc in &[1e-3, 0.1, 1.0, 30.0] {
        let z = zc * C / w;
        let g = PlanarGeometry::new(z, Material::PerfectMirror).unwrap();
        let f = force_zero_temperature(&alpha, &g, &ForceOptions::default()).unwrap();
        let o = mirror_force_oracle(w, d, z);
        assert!((f - o).abs() / o.abs() < 1e-7, "z = {zc} c/ω: {f:e} vs {o:e}");
    }
}

#[test]
fn retarded_mirror_force_approaches_closed_form() {
    let (w, d) = (2.37e15, 3.58e-29);
    let z = 300.0 * C / w;
    let a0 = 2.0 * d * d / (3.0 * HBAR * w);
    let closed = -3.0 * HBAR * C * a0 / (8.0 * PI * PI * EPS0 * z.powi(5));
    let o = mirror_force_oracle(w, d, z);
    assert!((o - closed).abs() / closed.abs() < 1e-3);
}

#[test]
fn state_forces_reduce_to_macroscopic_in_equilibrium() {
    let ls = LevelSystem::two_level(1.32e11, 1.02e-29).unwrap();
    let bare = DressedLevels::bare(&ls);
    let g = PlanarGeometry::new(5e-6, gold()).unwrap();
    let o = ForceOptions::default();
    let temp = t(300.0);
    let per = state_forces(&ls, &bare, &g, temp, StateForceModel::Perturbative, &o).unwrap();
    let sigma = thermal_state(&bare, temp);
    let resonant: f64 = per.iter().zip(&sigma).map(|(f, p)| p * f.resonant()).sum();
    let largest = per
        .iter()
        .map(|f| f.resonant_emission.abs().max(f.resonant_absorption.abs()))
        .fold(0.0, f64::max);
    assert!(resonant.abs() <= 1e-6 * largest);
    let state = InternalState {
        time: 0.0,
        populations: sigma,
        coherences: None,
    };
    let total = force_total(&ls, &bare, &g, temp, &[state], StateForceModel::Perturbative, &o).unwrap()[0];
    let mac = force_macroscopic(&ImaginaryPolarizability::thermal(&ls, &bare, temp), &g, temp, &o).unwrap();
    assert!((total - mac).abs() / mac.abs() < 1e-6);
}

#[test]
fn force_along_trajectory_moves_monotonically_to_equilibrium() {
    let ls = LevelSystem::two_level(1.32e11, 1.02e-29).unwrap();
    let g = PlanarGeometry::new(5e-6, gold()).unwrap();
    let temp = t(300.0);
    let o = ForceOptions::default();
    let dressed = DressedLevels::compute(&ls, &g, temp, ShiftMode::Perturbative, &o.quad, &o.series).unwrap();
    let tau = 1.0 / (dressed.total_rate(0) + dressed.total_rate(1));
    let grid: Vec<f64> = (0..100).map(|i| i as f64 * 0.1 * tau).collect();
    let states = evolve(&InternalState::ground(2), &dressed, &grid).unwrap();
    let f = force_total(&ls, &dressed, &g, temp, &states, StateForceModel::Perturbative, &o).unwrap();
    let f0 = force_state_perturbative(&ls, &dressed, &g, temp, 0, &o).unwrap().total;
    assert_eq!(f[0], f0);
    let diffs: Vec<f64> = f.windows(2).map(|w| w[1] - w[0]).collect();
    let sign = diffs[0].signum();
    assert!(diffs.iter().all(|d| d * sign >= 0.0));
}

#[test]
fn exact_force_reduces_to_perturbative_without_linewidth() {
    let ls = LevelSystem::two_level(2.37e15, 3.58e-29).unwrap();
    let g = PlanarGeometry::new(4e-7, gold()).unwrap();
    let o = ForceOptions::default();
    let temp = t(300.0);
    let dressed = DressedLevels::compute(&ls, &g, temp, ShiftMode::Perturbative, &o.quad, &o.series).unwrap();
    let sharp = dressed.with_scaled_rates(0.0);
    for n in 0..2 {
        let p = force_state_perturbative(&ls, &sharp, &g, temp, n, &o).unwrap();
        let e = force_state_exact(&ls, &sharp, &g, temp, n, &o).unwrap();
        assert!((p.total - e.total).abs() <= 1e-8 * p.total.abs(), "state {n}");
    }
}

#[test]
fn exact_force_departs_linearly_in_linewidth() {
    let w = 2.37e15;
    let ls = LevelSystem::two_level(w, 3.58e-29).unwrap();
    let g = PlanarGeometry::new(4e-7, gold()).unwrap();
    let o = ForceOptions {
        quad: QuadratureOptions {
            rel_tol: 1e-11,
            ..Default::default()
        },
        series: SeriesOptions {
            tol: 1e-13,
            ..Default::default()
        },
    };
    let temp = Temperature::ZERO;
    let base = force_state_exact(&ls, &DressedLevels::bare(&ls), &g, temp, 1, &o)
        .unwrap()
        .total;
    let ratios = [1e-6, 1e-5, 1e-4];
    let dev: Vec<f64> = ratios
        .iter()
        .map(|r| {
            // Γ_1 = 2rω so that Γ/(2ω̃) = r
            let d = DressedLevels::from_parts(&ls, vec![0.0; 2], vec![vec![0.0, 0.0], vec![2.0 * r * w, 0.0]]).unwrap();
            (force_state_exact(&ls, &d, &g, temp, 1, &o).unwrap().total - base).abs()
        })
        .collect();
    let slope = (dev[2].ln() - dev[0].ln()) / (ratios[2].ln() - ratios[0].ln());
    assert!((slope - 1.0).abs() < 0.02, "slope {slope}");
}

#[test]
fn continuation_flag_for_broad_lines() {
    let w = 1e14;
    let ls = LevelSystem::two_level(w, 1e-30).unwrap();
    let g = PlanarGeometry::new(1e-6, gold()).unwrap();
    let d = DressedLevels::from_parts(&ls, vec![0.0; 2], vec![vec![0.0, 0.0], vec![0.3 * w, 0.0]]).unwrap();
    let f = force_state_exact(&ls, &d, &g, Temperature::ZERO, 1, &ForceOptions::default()).unwrap();
    assert!(f.metadata.continuation_warning);
    assert!(f.total.is_finite());
}

#[test]
fn perturbative_force_is_gradient_of_shift() {
    let ls = LevelSystem::two_level(2.37e15, 3.58e-29).unwrap();
    let bare = DressedLevels::bare(&ls);
    let temp = t(300.0);
    let o = ForceOptions {
        quad: QuadratureOptions {
            rel_tol: 1e-12,
            ..Default::default()
        },
        series: SeriesOptions {
            tol: 1e-13,
            ..Default::default()
        },
    };
    for &z in &[2e-7, 1e-6] {
        let g = PlanarGeometry::new(z, gold()).unwrap();
        let h = 1e-3 * z;
        let u = |x: f64| state_potential(&ls, &bare, &g.at_height(x).unwrap(), temp, 1, &o.quad, &o.series).unwrap();
        let fd = -(u(z - 2.0 * h) - 8.0 * u(z - h) + 8.0 * u(z + h) - u(z + 2.0 * h)) / (12.0 * h);
        let f = force_state_perturbative(&ls, &bare, &g, temp, 1, &o).unwrap().total;
        assert!((fd - f).abs() / f.abs() < 1e-5, "z = {z}: {fd:e} vs {f:e}");
    }
}
