//! Atomic and molecular level structure and the quantities derived from its
//! coupling to the surface-assisted field: polarizabilities, loss and
//! heating rates, surface-induced level shifts, and the thermal state.
//!
//! Dipole matrix elements are real vectors. Because the planar Green tensor
//! is diagonal, every contraction reduces to per-axis weights `|d_i|²`
//! (or `|d|²/3` on each axis in isotropic mode).

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::constants::{HBAR, MU0};
use crate::greens::{self, imG_freespace, GreenScatter, PlanarGeometry, QuadratureOptions};
use crate::matsubara::{frequency_integral, matsubara_sum, SeriesOptions};
use crate::quadrature::Tolerance;
use crate::thermal::{photon_number, Temperature};
use crate::{Error, Result};

/// Default pole-exclusion radius, relative to `|Ω_nk|`.
pub const POLE_EXCLUSION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub lower: usize,
    pub upper: usize,
    /// Dipole vector `d_lu` in C·m. In isotropic mode only its norm is used.
    pub dipole: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSystem {
    energies: Vec<f64>,
    labels: Vec<String>,
    dipoles: Vec<[f64; 3]>,
    isotropic: bool,
}

impl LevelSystem {
    /// Builds a level system from ascending, non-degenerate energies (J) and
    /// a list of dipole-coupled transitions.
    pub fn new(energies: Vec<f64>, labels: Vec<String>, transitions: &[Transition], isotropic: bool) -> Result<Self> {
        let n = energies.len();
        if n == 0 {
            return Err(Error::InvalidInput("level system needs at least one level".into()));
        }
        if labels.len() != n {
            return Err(Error::InvalidInput(format!("{} labels for {} levels", labels.len(), n)));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidInput("energies must be finite".into()));
        }
        for i in 1..n {
            if energies[i] == energies[i - 1] {
                return Err(Error::DegenerateLevels(i - 1, i));
            }
            if energies[i] < energies[i - 1] {
                return Err(Error::InvalidInput("energies must be ascending".into()));
            }
        }
        let mut dipoles = vec![[0.0; 3]; n * n];
        for t in transitions {
            if t.lower >= n || t.upper >= n || t.lower == t.upper {
                return Err(Error::InvalidInput(format!(
                    "transition {} -> {} out of range",
                    t.lower, t.upper
                )));
            }
            if t.dipole.iter().any(|d| !d.is_finite()) {
                return Err(Error::InvalidInput("dipoles must be finite".into()));
            }
            dipoles[t.lower * n + t.upper] = t.dipole;
            dipoles[t.upper * n + t.lower] = t.dipole;
        }
        Ok(Self {
            energies,
            labels,
            dipoles,
            isotropic,
        })
    }

    /// Isotropic two-level system with transition frequency `omega10` and
    /// dipole magnitude `dipole` (C·m).
    pub fn two_level(omega10: f64, dipole: f64) -> Result<Self> {
        if !(omega10 > 0.0) {
            return Err(Error::Domain(format!(
                "transition frequency must be > 0, got {omega10}"
            )));
        }
        Self::new(
            vec![0.0, HBAR * omega10],
            vec!["0".into(), "1".into()],
            &[Transition {
                lower: 0,
                upper: 1,
                dipole: [dipole, 0.0, 0.0],
            }],
            true,
        )
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_isotropic(&self) -> bool {
        self.isotropic
    }

    /// Bare transition frequency `ω_mn = (E_m − E_n)/ħ`.
    pub fn omega(&self, m: usize, n: usize) -> f64 {
        (self.energies[m] - self.energies[n]) / HBAR
    }

    pub fn dipole(&self, m: usize, n: usize) -> [f64; 3] {
        self.dipoles[m * self.len() + n]
    }

    pub fn dipole_squared(&self, m: usize, n: usize) -> f64 {
        self.dipole(m, n).iter().map(|d| d * d).sum()
    }

    /// Diagonal weights of `d_mn d_nm` used against a diagonal Green tensor.
    pub fn weights(&self, m: usize, n: usize) -> [f64; 3] {
        let d = self.dipole(m, n);
        if self.isotropic {
            let w = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / 3.0;
            [w; 3]
        } else {
            [d[0] * d[0], d[1] * d[1], d[2] * d[2]]
        }
    }

    fn dyad(&self, m: usize, n: usize) -> Matrix3<f64> {
        let d = self.dipole(m, n);
        if self.isotropic {
            Matrix3::identity() * (self.dipole_squared(m, n) / 3.0)
        } else {
            let v = nalgebra::Vector3::from(d);
            v * v.transpose()
        }
    }

    fn coupled(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| k != n && self.dipole_squared(n, k) > 0.0)
    }

    /// Characteristic frequencies `|ω_nk|` of all dipole-coupled pairs.
    pub fn transition_frequencies(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for n in 0..self.len() {
            for k in self.coupled(n).filter(|&k| k > n) {
                out.push(self.omega(k, n));
            }
        }
        out
    }
}

/// How the surface-induced shifts feed back into transition frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftMode {
    /// `ω̃_nk ≃ ω_nk`: shifts are reported but not applied.
    #[default]
    Perturbative,
    /// One fixed-point pass: shifts computed with bare frequencies are
    /// applied, then recomputed with the shifted ones.
    SinglePass,
}

/// Shifts, rates and shifted transition frequencies of a level system.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedLevels {
    shifts: Vec<f64>,
    applied: Vec<f64>,
    base_omegas: Vec<f64>,
    rates: Vec<f64>,
    totals: Vec<f64>,
}

impl DressedLevels {
    /// No shifts and no decay: the `Γ → 0, δω → 0` limit.
    pub fn bare(ls: &LevelSystem) -> Self {
        let n = ls.len();
        Self {
            shifts: vec![0.0; n],
            applied: vec![0.0; n],
            base_omegas: ls.energies.iter().map(|e| e / HBAR).collect(),
            rates: vec![0.0; n * n],
            totals: vec![0.0; n],
        }
    }

    /// Assembles dressed levels from explicitly given applied shifts (rad/s)
    /// and a rate matrix `rates[n][k] = Γ_nk` (1/s).
    pub fn from_parts(ls: &LevelSystem, shifts: Vec<f64>, rates: Vec<Vec<f64>>) -> Result<Self> {
        let n = ls.len();
        if shifts.len() != n || rates.len() != n || rates.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("shape mismatch in dressed levels".into()));
        }
        let mut flat = vec![0.0; n * n];
        for (i, row) in rates.iter().enumerate() {
            for (k, &g) in row.iter().enumerate() {
                if i == k {
                    continue;
                }
                if !(g >= 0.0 && g.is_finite()) {
                    return Err(Error::InvalidInput(format!("rate {i}->{k} must be >= 0, got {g}")));
                }
                flat[i * n + k] = g;
            }
        }
        let mut d = Self::bare(ls);
        d.shifts = shifts.clone();
        d.applied = shifts;
        d.set_rates(flat);
        Ok(d)
    }

    /// Computes shifts (per `mode`) and then the rates at the resulting
    /// transition frequencies.
    pub fn compute(
        ls: &LevelSystem,
        g: &PlanarGeometry,
        temperature: Temperature,
        mode: ShiftMode,
        quad: &QuadratureOptions,
        series: &SeriesOptions,
    ) -> Result<Self> {
        let mut dressed = Self::bare(ls);
        let first = shifts(ls, &dressed, g, temperature, quad, series)?;
        match mode {
            ShiftMode::Perturbative => dressed.shifts = first,
            ShiftMode::SinglePass => {
                dressed.applied = first.clone();
                dressed.check_ordering(ls)?;
                let second = shifts(ls, &dressed, g, temperature, quad, series)?;
                dressed.applied = second.clone();
                dressed.shifts = second;
                dressed.check_ordering(ls)?;
            }
        }
        let r = rates(ls, &dressed, g, temperature, quad)?;
        dressed.set_rates(r);
        Ok(dressed)
    }

    fn check_ordering(&self, ls: &LevelSystem) -> Result<()> {
        for n in 1..ls.len() {
            if self.omega_tilde(n, n - 1) <= 0.0 {
                return Err(Error::Model(format!(
                    "shifted levels {} and {} cross; shifts are outside the perturbative regime",
                    n - 1,
                    n
                )));
            }
        }
        Ok(())
    }

    fn set_rates(&mut self, flat: Vec<f64>) {
        let n = self.len();
        self.totals = (0..n).map(|i| flat[i * n..(i + 1) * n].iter().sum()).collect();
        self.rates = flat;
    }

    /// Returns a copy with all rates multiplied by `factor`.
    pub fn with_scaled_rates(&self, factor: f64) -> Self {
        let mut d = self.clone();
        d.set_rates(self.rates.iter().map(|g| g * factor).collect());
        d
    }

    /// Returns a copy with applied shifts multiplied by `factor`.
    pub fn with_scaled_shifts(&self, factor: f64) -> Self {
        let mut d = self.clone();
        d.applied = self.applied.iter().map(|s| s * factor).collect();
        d
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    /// Surface-induced shifts `δω_n` (rad/s), as computed.
    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    /// Shifts that enter `ω̃_mn` (zero in perturbative mode).
    pub fn applied_shifts(&self) -> &[f64] {
        &self.applied
    }

    /// `ω̃_mn = ω_mn + δω_m − δω_n`.
    pub fn omega_tilde(&self, m: usize, n: usize) -> f64 {
        (self.base_omegas[m] - self.base_omegas[n]) + (self.applied[m] - self.applied[n])
    }

    /// `Γ_nk`, the rate from `n` to `k`.
    pub fn rate(&self, n: usize, k: usize) -> f64 {
        self.rates[n * self.len() + k]
    }

    /// `Γ_n = Σ_k Γ_nk`.
    pub fn total_rate(&self, n: usize) -> f64 {
        self.totals[n]
    }

    pub fn rate_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n).map(|i| self.rates[i * n..(i + 1) * n].to_vec()).collect()
    }

    /// `Ω_nk = ω̃_nk + i(Γ_n + Γ_k)/2`.
    pub fn complex_frequency(&self, n: usize, k: usize) -> Complex64 {
        Complex64::new(self.omega_tilde(n, k), 0.5 * (self.totals[n] + self.totals[k]))
    }
}

/// Polarizability tensor `α_n(ω)` (C·m²/V).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarizability(pub Matrix3<Complex64>);

impl Polarizability {
    pub fn tensor(&self) -> &Matrix3<Complex64> {
        &self.0
    }

    pub fn diagonal(&self) -> [Complex64; 3] {
        [self.0[(0, 0)], self.0[(1, 1)], self.0[(2, 2)]]
    }

    /// Isotropic scalar `Tr α / 3`.
    pub fn scalar(&self) -> Complex64 {
        self.0.trace() / 3.0
    }
}

/// `α_n(ω) = (1/ħ) Σ_k [d_nk d_kn/(−Ω_nk − ω) + d_kn d_nk/(−Ω*_nk + ω)]`.
pub fn polarizability(ls: &LevelSystem, dressed: &DressedLevels, n: usize, omega: Complex64) -> Result<Polarizability> {
    polarizability_with_exclusion(ls, dressed, n, omega, POLE_EXCLUSION)
}

/// As [`polarizability`], with an explicit pole-exclusion radius relative
/// to `|Ω_nk|`.
pub fn polarizability_with_exclusion(
    ls: &LevelSystem,
    dressed: &DressedLevels,
    n: usize,
    omega: Complex64,
    exclusion: f64,
) -> Result<Polarizability> {
    check_state(ls, n)?;
    let mut alpha = Matrix3::<Complex64>::zeros();
    for k in ls.coupled(n) {
        let big = dressed.complex_frequency(n, k);
        let radius = exclusion * big.norm();
        let d1 = -big - omega;
        let d2 = -big.conj() + omega;
        if d1.norm() <= radius || d2.norm() <= radius {
            return Err(Error::PoleProximity {
                omega: format!("{omega}"),
            });
        }
        let factor = (d1.inv() + d2.inv()) / HBAR;
        alpha += ls.dyad(n, k).map(|v| Complex64::new(v, 0.0)) * factor;
    }
    Ok(Polarizability(alpha))
}

/// Diagonal of `α_n(iξ)`; real for any decay rates.
pub fn polarizability_imag_diag(ls: &LevelSystem, dressed: &DressedLevels, n: usize, xi: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for k in ls.coupled(n) {
        let big = dressed.complex_frequency(n, k);
        // 1/(−Ω − iξ) + 1/(−Ω* + iξ) = 2 Re[1/(−Ω − iξ)]
        let f = 2.0 * (-big - Complex64::new(0.0, xi)).inv().re / HBAR;
        for (o, w) in out.iter_mut().zip(ls.weights(n, k)) {
            *o += f * w;
        }
    }
    out
}

/// Diagonal of the symmetrized combination `α_n(iξ) + α_n(−iξ)`.
pub fn polarizability_symmetrized_diag(ls: &LevelSystem, dressed: &DressedLevels, n: usize, xi: f64) -> [f64; 3] {
    let plus = polarizability_imag_diag(ls, dressed, n, xi);
    let minus = polarizability_imag_diag(ls, dressed, n, -xi);
    [plus[0] + minus[0], plus[1] + minus[1], plus[2] + minus[2]]
}

/// Boltzmann populations over the shifted energies `Ẽ_n = E_n + ħδω_n`.
pub fn thermal_state(dressed: &DressedLevels, temperature: Temperature) -> Vec<f64> {
    let n = dressed.len();
    if temperature.is_zero() {
        let mut p = vec![0.0; n];
        p[0] = 1.0;
        return p;
    }
    let kt = temperature.energy();
    let exps: Vec<f64> = (0..n).map(|i| -HBAR * dressed.omega_tilde(i, 0) / kt).collect();
    let max = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = exps.iter().map(|x| (x - max).exp()).collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

/// `α_T(ω) = Σ_n σ_{T,nn} α_n(ω)`.
pub fn thermal_polarizability(
    ls: &LevelSystem,
    dressed: &DressedLevels,
    temperature: Temperature,
    omega: Complex64,
) -> Result<Polarizability> {
    let pops = thermal_state(dressed, temperature);
    let mut acc = Matrix3::<Complex64>::zeros();
    for (n, p) in pops.iter().enumerate() {
        if *p > 0.0 {
            acc += polarizability(ls, dressed, n, omega)?.0 * Complex64::new(*p, 0.0);
        }
    }
    Ok(Polarizability(acc))
}

/// Diagonal of `α_T(iξ)`.
pub fn thermal_polarizability_imag_diag(
    ls: &LevelSystem,
    dressed: &DressedLevels,
    temperature: Temperature,
    xi: f64,
) -> [f64; 3] {
    let pops = thermal_state(dressed, temperature);
    let mut out = [0.0; 3];
    for (n, p) in pops.iter().enumerate() {
        if *p > 0.0 {
            let a = polarizability_imag_diag(ls, dressed, n, xi);
            for i in 0..3 {
                out[i] += p * a[i];
            }
        }
    }
    out
}

fn check_state(ls: &LevelSystem, n: usize) -> Result<()> {
    if n < ls.len() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "state {n} out of range ({} levels)",
            ls.len()
        )))
    }
}

/// Loss/heating rates `Γ_nk` (flattened row-major), evaluated at `|ω̃_nk|`
/// with the full `Im G = Im G⁽⁰⁾ + Im G⁽¹⁾`.
pub fn rates(
    ls: &LevelSystem,
    dressed: &DressedLevels,
    g: &PlanarGeometry,
    temperature: Temperature,
    quad: &QuadratureOptions,
) -> Result<Vec<f64>> {
    let n = ls.len();
    let mut out = vec![0.0; n * n];
    for upper in 0..n {
        for lower in ls.coupled(upper).filter(|&k| k < upper) {
            let w = dressed.omega_tilde(upper, lower);
            if w <= 0.0 {
                return Err(Error::Model(format!(
                    "non-positive shifted frequency {w} for {lower}->{upper}"
                )));
            }
            let scatter = greens::scatter_real_axis(g, w, quad)?;
            let free = imG_freespace(w);
            let weights = ls.weights(upper, lower);
            let img = (weights[0] + weights[1]) * (free + scatter.xx.im) + weights[2] * (free + scatter.zz.im);
            let nbar = photon_number(w, temperature)?;
            let base = 2.0 * MU0 / HBAR * w * w * img;
            out[upper * n + lower] = base * (nbar + 1.0);
            out[lower * n + upper] = base * nbar;
        }
    }
    Ok(out)
}

/// `Σ_i α_ii(iξ)·G_ii` and the ξ²-weighted combination used in potentials.
fn contract_real(alpha: [f64; 3], s: &GreenScatter) -> f64 {
    (alpha[0] + alpha[1]) * s.xx.re + alpha[2] * s.zz.re
}

/// Surface-induced shifts `δω_n` (rad/s) for every level.
///
/// Evaluated through the potential `ħδω_n = U_n` whose negative gradient is
/// the perturbative force of state `n`: a nonresonant imaginary-frequency
/// part (Matsubara sum, or its integral at `T = 0`) plus resonant
/// `Re G⁽¹⁾(ω̃_nk)` terms from emission and absorption. The
/// position-independent free-space part is excluded.
pub fn shifts(
    ls: &LevelSystem,
    dressed: &DressedLevels,
    g: &PlanarGeometry,
    temperature: Temperature,
    quad: &QuadratureOptions,
    series: &SeriesOptions,
) -> Result<Vec<f64>> {
    (0..ls.len())
        .map(|n| Ok(state_potential(ls, dressed, g, temperature, n, quad, series)? / HBAR))
        .collect()
}

/// `U_n` (J), the potential counterpart of the perturbative force.
pub fn state_potential(
    ls: &LevelSystem,
    dressed: &DressedLevels,
    g: &PlanarGeometry,
    temperature: Temperature,
    n: usize,
    quad: &QuadratureOptions,
    series: &SeriesOptions,
) -> Result<f64> {
    check_state(ls, n)?;
    if g.material.is_vacuum() {
        return Ok(0.0);
    }
    let bare = DressedLevels {
        rates: vec![0.0; dressed.rates.len()],
        totals: vec![0.0; dressed.len()],
        ..dressed.clone()
    };
    let nonresonant = if temperature.is_zero() {
        let mut scales = ls.transition_frequencies();
        scales.push(crate::constants::C / (2.0 * g.z));
        let tol = Tolerance {
            rel: 10.0 * quad.rel_tol,
            abs: 0.0,
            max_subdivisions: quad.max_subdivisions,
        };
        let [v] = frequency_integral(&scales, &tol, |xi| {
            if xi == 0.0 {
                return Ok([0.0]);
            }
            let s = greens::scatter_imag_axis(g, xi, quad)?;
            let a = polarizability_imag_diag(ls, &bare, n, xi);
            Ok([xi * xi * contract_real(a, &s)])
        })?;
        MU0 * HBAR / (2.0 * std::f64::consts::PI) * v
    } else {
        let limit = greens::xi2_scatter_static_limit(g);
        let sum = matsubara_sum(temperature, series, "state_potential", |_, xi| {
            let a = polarizability_imag_diag(ls, &bare, n, xi);
            if xi == 0.0 {
                return Ok([contract_real(a, &limit)]);
            }
            let s = greens::scatter_imag_axis(g, xi, quad)?;
            Ok([xi * xi * contract_real(a, &s)])
        })?;
        MU0 * temperature.energy() * sum.values[0]
    };
    let mut resonant = 0.0;
    for k in ls.coupled(n) {
        let w = dressed.omega_tilde(n, k);
        let factor = if w > 0.0 {
            photon_number(w, temperature)? + 1.0
        } else {
            -photon_number(-w, temperature)?
        };
        if factor == 0.0 {
            continue;
        }
        let s = greens::scatter_real_axis(g, w.abs(), quad)?;
        resonant -= MU0 * w * w * factor * s.contract(ls.weights(n, k)).re;
    }
    Ok(nonresonant + resonant)
}
