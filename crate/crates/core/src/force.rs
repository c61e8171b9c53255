//! Casimir–Polder force assembly.
//!
//! * [`force_macroscopic`] / [`force_zero_temperature`]: the Lifshitz-type
//!   force for a given imaginary-frequency polarizability, as a Matsubara
//!   sum or as its `T → 0` frequency integral.
//! * [`force_state_perturbative`] / [`force_state_exact`]: the force on an
//!   atom in energy eigenstate `n`, split into a nonresonant part and
//!   resonant emission/absorption parts.
//! * [`force_total`]: population-weighted force along a trajectory.
//! * [`plate_pressure`] and [`dilute_gas_check`]: the two-half-space
//!   Lifshitz pressure and the dilute-gas consistency check built on it.
//!
//! Forces are z-components in newtons; negative means toward the surface.
//! All gradients here are total derivatives of coincident-point values.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::atom::{
    polarizability_imag_diag, polarizability_symmetrized_diag, thermal_state, DressedLevels, LevelSystem,
};
use crate::constants::{C, EPS0, HBAR, MU0};
use crate::dynamics::InternalState;
use crate::greens::{self, reflection_imag, GreenScatter, PlanarGeometry, QuadratureOptions};
use crate::materials::{Material, Oscillator};
use crate::matsubara::{frequency_integral, matsubara_sum, SeriesOptions};
use crate::quadrature::{integrate_semi_infinite, Tolerance};
use crate::thermal::{photon_number, Temperature};
use crate::{Error, Result};

/// Γ/ω̃ above which the complex-frequency continuation is flagged.
pub const CONTINUATION_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ForceOptions {
    pub quad: QuadratureOptions,
    pub series: SeriesOptions,
}

impl ForceOptions {
    /// Series truncation at `rel`, with k∥ quadrature two orders tighter
    /// (but never looser than the default).
    pub fn with_tolerance(rel: f64) -> Self {
        let mut o = Self::default();
        o.series.tol = rel;
        o.quad.rel_tol = (rel * 1e-2).clamp(1e-13, o.quad.rel_tol);
        o
    }

    /// The frequency integrand is itself a k∥ quadrature at `quad.rel_tol`,
    /// so the outer integral is held one decade looser.
    fn frequency_tolerance(&self) -> Tolerance {
        Tolerance {
            rel: 10.0 * self.quad.rel_tol,
            abs: 0.0,
            max_subdivisions: self.quad.max_subdivisions,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ForceMetadata {
    /// Matsubara terms summed; `None` on the zero-temperature integral path.
    pub matsubara_terms: Option<usize>,
    /// Largest `(Γ_n + Γ_k)/(2|ω̃_nk|)` over the resonant terms.
    pub max_linewidth_ratio: f64,
    /// Set when `max_linewidth_ratio` exceeds [`CONTINUATION_LIMIT`].
    pub continuation_warning: bool,
}

/// Force on an atom in eigenstate `state` (N).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceBreakdown {
    pub state: usize,
    pub nonresonant: f64,
    pub resonant_emission: f64,
    pub resonant_absorption: f64,
    pub total: f64,
    pub metadata: ForceMetadata,
}

impl ForceBreakdown {
    fn new(state: usize, nonresonant: f64, emission: f64, absorption: f64, metadata: ForceMetadata) -> Self {
        Self {
            state,
            nonresonant,
            resonant_emission: emission,
            resonant_absorption: absorption,
            total: nonresonant + emission + absorption,
            metadata,
        }
    }

    pub fn resonant(&self) -> f64 {
        self.resonant_emission + self.resonant_absorption
    }
}

/// Diagonal polarizability `α_ii(iξ)` for `ξ ≥ 0`, with the characteristic
/// frequencies used to place quadrature panels.
pub struct ImaginaryPolarizability<'a> {
    eval: Box<dyn Fn(f64) -> [f64; 3] + Send + Sync + 'a>,
    scales: Vec<f64>,
}

impl<'a> ImaginaryPolarizability<'a> {
    pub fn new(eval: impl Fn(f64) -> [f64; 3] + Send + Sync + 'a, scales: Vec<f64>) -> Self {
        Self {
            eval: Box::new(eval),
            scales,
        }
    }

    pub fn zero() -> Self {
        Self::new(|_| [0.0; 3], Vec::new())
    }

    /// Isotropic `α(iξ)·1`.
    pub fn isotropic(eval: impl Fn(f64) -> f64 + Send + Sync + 'a, scales: Vec<f64>) -> Self {
        Self::new(move |xi| [eval(xi); 3], scales)
    }

    /// `α_n(iξ)` of a level system with the given dressing.
    pub fn state(ls: &'a LevelSystem, dressed: &'a DressedLevels, n: usize) -> Self {
        Self::new(
            move |xi| polarizability_imag_diag(ls, dressed, n, xi),
            ls.transition_frequencies(),
        )
    }

    /// Thermal polarizability `α_T(iξ)`.
    pub fn thermal(ls: &'a LevelSystem, dressed: &'a DressedLevels, temperature: Temperature) -> Self {
        let pops = thermal_state(dressed, temperature);
        Self::new(
            move |xi| {
                let mut out = [0.0; 3];
                for (n, p) in pops.iter().enumerate().filter(|(_, p)| **p > 0.0) {
                    let a = polarizability_imag_diag(ls, dressed, n, xi);
                    for i in 0..3 {
                        out[i] += p * a[i];
                    }
                }
                out
            },
            ls.transition_frequencies(),
        )
    }

    pub fn at(&self, xi: f64) -> [f64; 3] {
        (self.eval)(xi)
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }
}

fn dot(a: [f64; 3], s: &GreenScatter) -> f64 {
    (a[0] + a[1]) * s.d_xx_dz.re + a[2] * s.d_zz_dz.re
}

/// `−μ₀ k_BT Σ'_N ξ_N² Σ_i α_ii(iξ_N) ∂_z G_ii(iξ_N)` or, at `T = 0`,
/// `−(μ₀ħ/2π) ∫ dξ ξ² Σ_i α_ii(iξ) ∂_z G_ii(iξ)`.
fn nonresonant<A>(
    g: &PlanarGeometry,
    temperature: Temperature,
    opts: &ForceOptions,
    scales: &[f64],
    alpha: A,
) -> Result<(f64, Option<usize>)>
where
    A: Fn(f64) -> [f64; 3] + Sync,
{
    if g.material.is_vacuum() {
        return Ok((0.0, None));
    }
    let limit = greens::xi2_scatter_static_limit(g);
    let integrand = |xi: f64| -> Result<[f64; 1]> {
        let a = alpha(xi);
        if a == [0.0; 3] {
            return Ok([0.0]);
        }
        if xi == 0.0 {
            return Ok([dot(a, &limit)]);
        }
        let s = greens::scatter_imag_axis(g, xi, &opts.quad)?;
        Ok([xi * xi * dot(a, &s)])
    };
    if temperature.is_zero() {
        let mut all = scales.to_vec();
        all.push(C / (2.0 * g.z));
        let [v] = frequency_integral(&all, &opts.frequency_tolerance(), integrand)?;
        Ok((-MU0 * HBAR / (2.0 * PI) * v, None))
    } else {
        let sum = matsubara_sum(temperature, &opts.series, "casimir-polder force", |_, xi| integrand(xi))?;
        Ok((-MU0 * temperature.energy() * sum.values[0], Some(sum.terms)))
    }
}

/// Lifshitz-type force from a Matsubara sum; requires `T > 0`.
pub fn force_macroscopic(
    alpha: &ImaginaryPolarizability,
    g: &PlanarGeometry,
    temperature: Temperature,
    opts: &ForceOptions,
) -> Result<f64> {
    if temperature.is_zero() {
        return Err(Error::Domain(
            "Matsubara force needs T > 0; use force_zero_temperature".into(),
        ));
    }
    Ok(nonresonant(g, temperature, opts, alpha.scales(), |xi| alpha.at(xi))?.0)
}

/// Zero-temperature force from the continuous imaginary-frequency integral.
pub fn force_zero_temperature(alpha: &ImaginaryPolarizability, g: &PlanarGeometry, opts: &ForceOptions) -> Result<f64> {
    Ok(nonresonant(g, Temperature::ZERO, opts, alpha.scales(), |xi| alpha.at(xi))?.0)
}

fn check_state(ls: &LevelSystem, dressed: &DressedLevels, n: usize) -> Result<()> {
    if dressed.len() != ls.len() {
        return Err(Error::InvalidInput(
            "dressed levels do not match the level system".into(),
        ));
    }
    if n >= ls.len() {
        return Err(Error::InvalidInput(format!(
            "state {n} out of range ({} levels)",
            ls.len()
        )));
    }
    Ok(())
}

fn coupled(ls: &LevelSystem, n: usize) -> impl Iterator<Item = usize> + '_ {
    (0..ls.len()).filter(move |&k| k != n && ls.dipole_squared(n, k) > 0.0)
}

/// Perturbative force on state `n`: decay rates neglected, transition
/// frequencies `ω̃_nk` as carried by `dressed`.
pub fn force_state_perturbative(
    ls: &LevelSystem,
    dressed: &DressedLevels,
    g: &PlanarGeometry,
    temperature: Temperature,
    n: usize,
    opts: &ForceOptions,
) -> Result<ForceBreakdown> {
    check_state(ls, dressed, n)?;
    let sharp = dressed.with_scaled_rates(0.0);
    let (nonres, terms) = nonresonant(g, temperature, opts, &ls.transition_frequencies(), |xi| {
        polarizability_imag_diag(ls, &sharp, n, xi)
    })?;
    let (mut emission, mut absorption) = (0.0, 0.0);
    if !g.material.is_vacuum() {
        for k in coupled(ls, n) {
            let w = dressed.omega_tilde(n, k);
            let (factor, upward) = if w > 0.0 {
                (photon_number(w, temperature)? + 1.0, false)
            } else {
                (photon_number(-w, temperature)?, true)
            };
            if factor == 0.0 {
                continue;
            }
            let s = greens::scatter_real_axis(g, w.abs(), &opts.quad)?;
            let v = MU0 * w * w * factor * s.contract_gradient(ls.weights(n, k)).re;
            if upward {
                absorption -= v;
            } else {
                emission += v;
            }
        }
    }
    let meta = ForceMetadata {
        matsubara_terms: terms,
        ..Default::default()
    };
    Ok(ForceBreakdown::new(n, nonres, emission, absorption, meta))
}

/// `n(Ω) = 1/(e^{ħΩ/k_BT} − 1)` continued to complex `Ω`.
fn photon_number_complex(omega: Complex64, temperature: Temperature) -> Complex64 {
    if temperature.is_zero() {
        return Complex64::new(0.0, 0.0);
    }
    let x = HBAR * omega / temperature.energy();
    if x.re > crate::thermal::SATURATION_EXPONENT {
        return Complex64::new(0.0, 0.0);
    }
    // e^{a+ib} − 1 = expm1(a) cos b − 2 sin²(b/2) + i e^a sin b
    let (a, b) = (x.re, x.im);
    let half = (0.5 * b).sin();
    let em1 = Complex64::new(a.exp_m1() * b.cos() - 2.0 * half * half, a.exp() * b.sin());
    em1.inv()
}

/// Force on state `n` with complex transition frequencies
/// `Ω_nk = ω̃_nk + i(Γ_n + Γ_k)/2` and the symmetrized polarizability.
pub fn force_state_exact(
    ls: &LevelSystem,
    dressed: &DressedLevels,
    g: &PlanarGeometry,
    temperature: Temperature,
    n: usize,
    opts: &ForceOptions,
) -> Result<ForceBreakdown> {
    check_state(ls, dressed, n)?;
    let (nonres, terms) = nonresonant(g, temperature, opts, &ls.transition_frequencies(), |xi| {
        polarizability_symmetrized_diag(ls, dressed, n, xi).map(|a| 0.5 * a)
    })?;
    let (mut emission, mut absorption) = (0.0, 0.0);
    let mut ratio: f64 = 0.0;
    for k in coupled(ls, n) {
        let w = dressed.omega_tilde(n, k);
        let width = 0.5 * (dressed.total_rate(n) + dressed.total_rate(k));
        ratio = ratio.max(width / w.abs());
        if g.material.is_vacuum() {
            continue;
        }
        let weights = ls.weights(n, k);
        if w > 0.0 {
            let big = dressed.complex_frequency(n, k);
            let factor = photon_number_complex(big, temperature) + 1.0;
            let s = greens::scatter_complex(g, big, &opts.quad)?;
            emission += MU0 * (big * big * factor * s.contract_gradient(weights)).re;
        } else {
            let big = dressed.complex_frequency(k, n).conj();
            let factor = photon_number_complex(big, temperature);
            if factor.norm() == 0.0 {
                continue;
            }
            let s = greens::scatter_complex(g, big, &opts.quad)?;
            absorption -= MU0 * (big * big * factor * s.contract_gradient(weights)).re;
        }
    }
    let meta = ForceMetadata {
        matsubara_terms: terms,
        max_linewidth_ratio: ratio,
        continuation_warning: ratio > CONTINUATION_LIMIT,
    };
    Ok(ForceBreakdown::new(n, nonres, emission, absorption, meta))
}

/// Which per-state force enters [`force_total`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StateForceModel {
    #[default]
    Perturbative,
    Exact,
}

/// Per-state forces for every level, evaluated in parallel.
pub fn state_forces(
    ls: &LevelSystem,
    dressed: &DressedLevels,
    g: &PlanarGeometry,
    temperature: Temperature,
    model: StateForceModel,
    opts: &ForceOptions,
) -> Result<Vec<ForceBreakdown>> {
    (0..ls.len())
        .into_par_iter()
        .map(|n| match model {
            StateForceModel::Perturbative => force_state_perturbative(ls, dressed, g, temperature, n, opts),
            StateForceModel::Exact => force_state_exact(ls, dressed, g, temperature, n, opts),
        })
        .collect()
}

/// Population-weighted force `Σ_n σ_nn(t) F_n` for per-state forces
/// already evaluated.
pub fn weighted_force(per_state: &[ForceBreakdown], state: &InternalState) -> Result<f64> {
    if state.populations.len() != per_state.len() {
        return Err(Error::InvalidInput(format!(
            "{} populations for {} states",
            state.populations.len(),
            per_state.len()
        )));
    }
    Ok(state.populations.iter().zip(per_state).map(|(p, f)| p * f.total).sum())
}

/// `F(t) = Σ_n σ_nn(t) F_n` for each state in `states`.
pub fn force_total(
    ls: &LevelSystem,
    dressed: &DressedLevels,
    g: &PlanarGeometry,
    temperature: Temperature,
    states: &[InternalState],
    model: StateForceModel,
    opts: &ForceOptions,
) -> Result<Vec<f64>> {
    let per_state = state_forces(ls, dressed, g, temperature, model, opts)?;
    states.iter().map(|s| weighted_force(&per_state, s)).collect()
}

/// `[P, ∂P/∂d]` for two half-spaces separated by a vacuum gap `d`.
fn plate_pressure_parts(
    m1: &Material,
    m2: &Material,
    d: f64,
    temperature: Temperature,
    opts: &ForceOptions,
) -> Result<[f64; 2]> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Domain(format!("plate separation must be > 0, got {d}")));
    }
    if temperature.is_zero() {
        return Err(Error::Domain("plate pressure needs T > 0".into()));
    }
    m1.validate()?;
    m2.validate()?;
    if m1.is_vacuum() || m2.is_vacuum() {
        return Ok([0.0, 0.0]);
    }
    let tol = Tolerance {
        rel: opts.quad.rel_tol,
        abs: 0.0,
        max_subdivisions: opts.quad.max_subdivisions,
    };
    let breaks = [0.0, 1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
    let sum = matsubara_sum(temperature, &opts.series, "plate pressure", |_, xi| {
        // κ = ξ/c + u/(2d)
        let mut failure = None;
        let r = integrate_semi_infinite(
            |u: f64| -> [f64; 2] {
                let kappa = xi / C + u / (2.0 * d);
                let pair = reflection_imag(m1, xi, kappa).and_then(|a| Ok((a, reflection_imag(m2, xi, kappa)?)));
                let ((s1, p1), (s2, p2)) = match pair {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        return [0.0; 2];
                    }
                };
                let damp = (-2.0 * kappa * d).exp();
                let (mut value, mut grad) = (0.0, 0.0);
                for x in [s1 * s2 * damp, p1 * p2 * damp] {
                    value += x / (1.0 - x);
                    grad += -2.0 * kappa * x / ((1.0 - x) * (1.0 - x));
                }
                let k2 = kappa * kappa;
                [k2 * value, k2 * grad]
            },
            &breaks,
            16.0,
            &tol,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let v = r?.value;
        Ok([v[0] / (2.0 * d), v[1] / (2.0 * d)])
    })?;
    let pref = -temperature.energy() / PI;
    Ok(sum.values.map(|v| pref * v))
}

/// Lifshitz pressure (Pa) between two half-spaces; negative is attractive.
pub fn plate_pressure(
    m1: &Material,
    m2: &Material,
    d: f64,
    temperature: Temperature,
    opts: &ForceOptions,
) -> Result<f64> {
    Ok(plate_pressure_parts(m1, m2, d, temperature, opts)?[0])
}

/// `∂P/∂d` (Pa/m).
pub fn plate_pressure_gradient(
    m1: &Material,
    m2: &Material,
    d: f64,
    temperature: Temperature,
    opts: &ForceOptions,
) -> Result<f64> {
    Ok(plate_pressure_parts(m1, m2, d, temperature, opts)?[1])
}

/// Outcome of [`dilute_gas_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiluteGasReport {
    /// Per-atom force `−(1/η) ∂P/∂d` at density `η`.
    pub force_gas: f64,
    /// `force_macroscopic` with the ground-state polarizability.
    pub force_atom: f64,
    /// Signed relative deviation at `η`.
    pub deviation: f64,
    /// Signed relative deviation at `η/2`.
    pub deviation_half: f64,
    /// Richardson extrapolation `2·dev(η/2) − dev(η)` to `η → 0`.
    pub extrapolated: f64,
    /// Halving `η` failed to halve the deviation to within 10% of it.
    pub nonlinearity_warning: bool,
}

/// Half-space of ground-state atoms at number density `eta` (1/m³), as an
/// undamped Lorentz medium with `ε(iξ) = 1 + η α₀(iξ)/ε₀`.
pub fn dilute_gas_material(ls: &LevelSystem, eta: f64) -> Result<Material> {
    let mut oscillators = Vec::new();
    for k in 1..ls.len() {
        let d2 = ls.dipole_squared(0, k);
        if d2 == 0.0 {
            continue;
        }
        let w = ls.omega(k, 0);
        oscillators.push(Oscillator {
            strength: 2.0 * eta * w * d2 / (3.0 * HBAR * EPS0),
            resonance: w,
            damping: 0.0,
        });
    }
    if oscillators.is_empty() {
        return Ok(Material::Vacuum);
    }
    Material::drude_lorentz(oscillators, None)
}

/// Compares the force on one ground-state atom at height `g.z` with the
/// per-atom force extracted from the plate pressure between the surface and
/// a dilute gas of such atoms. Uses the isotropic polarizability.
pub fn dilute_gas_check(
    ls: &LevelSystem,
    g: &PlanarGeometry,
    temperature: Temperature,
    eta: f64,
    opts: &ForceOptions,
) -> Result<DiluteGasReport> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("number density must be > 0, got {eta}")));
    }
    let isotropic = ls.is_isotropic()
        || (1..ls.len()).all(|k| {
            let d = ls.dipole(0, k);
            d[0] == d[1] && d[1] == d[2]
        });
    if !isotropic {
        return Err(Error::InvalidInput(
            "dilute-gas check needs an isotropic ground-state polarizability".into(),
        ));
    }
    let bare = DressedLevels::bare(ls);
    let a0 = polarizability_imag_diag(ls, &bare, 0, 0.0)[0];
    if eta * a0 / EPS0 > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "eta*alpha(0)/eps0 = {:e} exceeds 1e-6; the gas is not dilute",
            eta * a0 / EPS0
        )));
    }
    let alpha = ImaginaryPolarizability::state(ls, &bare, 0);
    let force_atom = force_macroscopic(&alpha, g, temperature, opts)?;
    let per_atom = |density: f64| -> Result<f64> {
        let gas = dilute_gas_material(ls, density)?;
        Ok(-plate_pressure_gradient(&gas, &g.material, g.z, temperature, opts)? / density)
    };
    let force_gas = per_atom(eta)?;
    let force_half = per_atom(0.5 * eta)?;
    let rel = |f: f64| {
        if f == force_atom {
            0.0
        } else {
            (f - force_atom) / force_atom.abs()
        }
    };
    let deviation = rel(force_gas);
    let deviation_half = rel(force_half);
    // The leading deviation is linear in η, so halving η should halve it;
    // whatever survives extrapolation is the non-linear part.
    let extrapolated = 2.0 * deviation_half - deviation;
    Ok(DiluteGasReport {
        force_gas,
        force_atom,
        deviation,
        deviation_half,
        extrapolated,
        nonlinearity_warning: extrapolated.abs() > 0.1 * deviation.abs(),
    })
}
