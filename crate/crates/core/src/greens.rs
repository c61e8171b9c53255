//! Scattering Green tensor of a vacuum/half-space interface at coincident
//! points `G⁽¹⁾(r_A, r_A, ω)`, for an atom at height `z` above the surface.
//!
//! Only `xx (= yy)` and `zz` survive by planar symmetry. With `k = ω/c` and
//! `k_z = √(k² − k∥²)` the tensor is
//!
//! ```text
//! G⁽¹⁾ = (i/8π) ∫₀^∞ dk∥ (k∥/k_z) e^{2ik_z z}
//!        [ (r_s − k_z²/k² r_p)(xx + yy) + 2 k∥²/k² r_p zz ]
//! ```
//!
//! On the imaginary axis the integration variable is `κ = −ik_z ≥ ξ/c`. On
//! the real axis (and its continuation to complex frequencies) the
//! integral is split at the light line into a propagating piece integrated
//! over `k_z ∈ [0, k]` and an evanescent piece over `κ ∈ [0, ∞)`; both are
//! analytic in `k`, so the same code serves complex `ω` near the real axis.
//!
//! Gradients are total derivatives of the coincident value with respect to
//! `z`. The gradient with respect to the first argument only, which is what
//! the state-resolved force uses, is half of that by reciprocity and is
//! exposed separately.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constants::C;
use crate::materials::Material;
use crate::quadrature::{integrate, integrate_semi_infinite, QuadValue, Tolerance};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarGeometry {
    /// Atom height above the interface (m).
    pub z: f64,
    pub material: Material,
}

impl PlanarGeometry {
    pub fn new(z: f64, material: Material) -> Result<Self> {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::Domain(format!("atom height must be > 0, got {z}")));
        }
        material.validate()?;
        Ok(Self { z, material })
    }

    pub fn at_height(&self, z: f64) -> Result<Self> {
        Self::new(z, self.material.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Relative error target for the k∥ integrals.
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Largest admissible `2 Re(ω) z / c` on the real axis.
    pub oscillation_budget: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_subdivisions: 4000,
            oscillation_budget: 1e4,
        }
    }
}

impl QuadratureOptions {
    fn tolerance(&self) -> Tolerance {
        Tolerance {
            rel: self.rel_tol,
            abs: 0.0,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

/// Coincident-point scattering Green tensor (1/m) and its z-derivatives (1/m²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenScatter {
    pub xx: Complex64,
    pub zz: Complex64,
    pub trace: Complex64,
    pub d_xx_dz: Complex64,
    pub d_zz_dz: Complex64,
    pub d_trace_dz: Complex64,
}

impl GreenScatter {
    pub const ZERO: GreenScatter = GreenScatter {
        xx: Complex64::new(0.0, 0.0),
        zz: Complex64::new(0.0, 0.0),
        trace: Complex64::new(0.0, 0.0),
        d_xx_dz: Complex64::new(0.0, 0.0),
        d_zz_dz: Complex64::new(0.0, 0.0),
        d_trace_dz: Complex64::new(0.0, 0.0),
    };

    pub fn from_components(xx: Complex64, zz: Complex64, d_xx_dz: Complex64, d_zz_dz: Complex64) -> Self {
        Self {
            xx,
            zz,
            trace: 2.0 * xx + zz,
            d_xx_dz,
            d_zz_dz,
            d_trace_dz: 2.0 * d_xx_dz + d_zz_dz,
        }
    }

    pub fn diagonal(&self) -> [Complex64; 3] {
        [self.xx, self.xx, self.zz]
    }

    pub fn diagonal_gradient(&self) -> [Complex64; 3] {
        [self.d_xx_dz, self.d_xx_dz, self.d_zz_dz]
    }

    /// `Σ_i w_i G_ii` for diagonal weights (e.g. `|d_i|²` or `α_ii`).
    pub fn contract(&self, weights: [f64; 3]) -> Complex64 {
        (weights[0] + weights[1]) * self.xx + weights[2] * self.zz
    }

    /// `Σ_i w_i ∂_z G_ii`, total derivative of the coincident value.
    pub fn contract_gradient(&self, weights: [f64; 3]) -> Complex64 {
        (weights[0] + weights[1]) * self.d_xx_dz + weights[2] * self.d_zz_dz
    }

    /// `Σ_i w_i ∂_z G_ii(r, r_A)|_{r = r_A}`, the gradient acting on the
    /// first argument only.
    pub fn contract_first_argument_gradient(&self, weights: [f64; 3]) -> Complex64 {
        0.5 * self.contract_gradient(weights)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            xx: self.xx * factor,
            zz: self.zz * factor,
            trace: self.trace * factor,
            d_xx_dz: self.d_xx_dz * factor,
            d_zz_dz: self.d_zz_dz * factor,
            d_trace_dz: self.d_trace_dz * factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Real,
    Imaginary,
}

/// Principal square root with the branch `Im ≥ 0` (decay into the lower half-space).
fn sqrt_upper(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.im < 0.0 {
        -s
    } else {
        s
    }
}

/// Fresnel coefficients from `ε`, `k²` and the vacuum normal wavevector `k_z`.
fn fresnel_kz(eps: Complex64, k2: Complex64, kz: Complex64) -> (Complex64, Complex64) {
    let kzm = sqrt_upper(kz * kz + (eps - 1.0) * k2);
    let rs = (kz - kzm) / (kz + kzm);
    let rp = (eps * kz - kzm) / (eps * kz + kzm);
    (rs, rp)
}

/// Imaginary-axis Fresnel coefficients for `ξ > 0` and `κ = √(k∥² + ξ²/c²)`,
/// from `χ = ε − 1`. Numerators are rationalized so that weakly reflecting
/// media do not lose precision to cancellation.
fn fresnel_imag(chi: f64, xi: f64, kappa: f64) -> (f64, f64) {
    let q2 = (xi / C).powi(2);
    let km = (kappa * kappa + chi * q2).sqrt();
    let eps = 1.0 + chi;
    let rs = -chi * q2 / ((kappa + km) * (kappa + km));
    let rp = chi * ((eps + 1.0) * kappa * kappa - q2) / ((eps * kappa + km) * (eps * kappa + km));
    (rs, rp)
}

/// Real `(r_s, r_p)` on the imaginary axis parametrized by `κ ≥ ξ/c`,
/// including `ξ = 0` (static limit with `k∥ = κ`).
pub fn reflection_imag(material: &Material, xi: f64, kappa: f64) -> Result<(f64, f64)> {
    match material {
        Material::PerfectMirror => Ok((-1.0, 1.0)),
        Material::Vacuum => Ok((0.0, 0.0)),
        m if xi == 0.0 => Ok(m.static_reflection(kappa)),
        m => Ok(fresnel_imag(m.susceptibility_imag_axis(xi)?, xi, kappa)),
    }
}

/// Fresnel reflection coefficients `(r_s, r_p)` of the half-space.
///
/// `freq` is `ω` on the real axis and `ξ` on the imaginary axis. At
/// `freq = 0` the per-model static limits are returned.
pub fn fresnel(material: &Material, axis: Axis, freq: f64, kpar: f64) -> (Complex64, Complex64) {
    let re = |v: f64| Complex64::new(v, 0.0);
    match material {
        Material::PerfectMirror => return (re(-1.0), re(1.0)),
        Material::Vacuum => return (re(0.0), re(0.0)),
        _ => {}
    }
    if freq == 0.0 {
        let (rs, rp) = material.static_reflection(kpar);
        return (re(rs), re(rp));
    }
    match axis {
        Axis::Imaginary => {
            let chi = material
                .susceptibility_imag_axis(freq)
                .expect("variant has a permittivity");
            let kappa = (kpar * kpar + (freq / C).powi(2)).sqrt();
            let (rs, rp) = fresnel_imag(chi, freq, kappa);
            (re(rs), re(rp))
        }
        Axis::Real => {
            let eps = material.eps_real_axis(freq).expect("variant has a permittivity");
            let k2 = re((freq / C).powi(2));
            let kz = sqrt_upper(k2 - kpar * kpar);
            fresnel_kz(eps, k2, kz)
        }
    }
}

/// Diagonal element of `Im G⁽⁰⁾(r, r, ω)` in free space, `ω/(6πc)`.
#[allow(non_snake_case)]
pub fn imG_freespace(omega: f64) -> f64 {
    omega / (6.0 * PI * C)
}

// Panel boundaries for the exponentially damped integrals in u = 2κz (or its
// shifted counterpart). The first few resolve structure close to the light line.
const DAMPED_BREAKS: [f64; 12] = [0.0, 1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];

/// `G⁽¹⁾(iξ)` for `ξ > 0`; all values are real.
///
/// The `ξ → 0` limit diverges like `1/ξ²`; the finite combination
/// `ξ² G⁽¹⁾` at `ξ = 0` is provided by [`xi2_scatter_static_limit`].
pub fn scatter_imag_axis(g: &PlanarGeometry, xi: f64, opts: &QuadratureOptions) -> Result<GreenScatter> {
    if xi == 0.0 {
        return Err(Error::Domain(
            "G(i0) diverges; use xi2_scatter_static_limit for the xi = 0 term".into(),
        ));
    }
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::Domain(format!("imaginary frequency must be >= 0, got {xi}")));
    }
    if g.material.is_vacuum() {
        return Ok(GreenScatter::ZERO);
    }
    let z = g.z;
    let a = 2.0 * xi * z / C;
    if (-a).exp() == 0.0 {
        // every term carries e^{−a}
        return Ok(GreenScatter::ZERO);
    }
    let chi = match g.material {
        Material::PerfectMirror => None,
        ref m => Some(m.susceptibility_imag_axis(xi)?),
    };
    // κ = ξ/c + u/(2z); v = κc/ξ − 1 = u/a
    let integrand = |u: f64| -> [f64; 4] {
        let kappa = xi / C + u / (2.0 * z);
        let (rs, rp) = match chi {
            None => (-1.0, 1.0),
            Some(x) => fresnel_imag(x, xi, kappa),
        };
        let v = u / a;
        let q2 = (1.0 + v) * (1.0 + v);
        let m_xx = rs - q2 * rp;
        let m_zz = -2.0 * v * (2.0 + v) * rp;
        let w = (-u).exp();
        // z·∂_z brings down −2κz = −(a + u)
        let dz = -(a + u);
        [w * m_xx, w * m_zz, w * dz * m_xx, w * dz * m_zz]
    };
    let r = integrate_semi_infinite(integrand, &DAMPED_BREAKS, 16.0, &opts.tolerance())?;
    let pref = (-a).exp() / (16.0 * PI * z);
    let [xx, zz, dxx, dzz] = r.value.scale(pref);
    let re = |v: f64| Complex64::new(v, 0.0);
    Ok(GreenScatter::from_components(re(xx), re(zz), re(dxx / z), re(dzz / z)))
}

/// `lim_{ξ→0} ξ² G⁽¹⁾(iξ)` and its z-derivative, in closed form.
///
/// Only the TM channel survives the limit; its static reflection
/// coefficient is independent of `k∥` for every model (1 for conductors
/// and the perfect mirror, `(ε(0)−1)/(ε(0)+1)` for dielectrics), so
/// `ξ²G_xx → −c² r_p/(32πz³)` and `ξ²G_zz → −c² r_p/(16πz³)`.
pub fn xi2_scatter_static_limit(g: &PlanarGeometry) -> GreenScatter {
    let (_, rp) = g.material.static_reflection(1.0);
    let z = g.z;
    let xx = -C * C * rp / (32.0 * PI * z.powi(3));
    let zz = 2.0 * xx;
    let re = |v: f64| Complex64::new(v, 0.0);
    GreenScatter::from_components(re(xx), re(zz), re(-3.0 * xx / z), re(-3.0 * zz / z))
}

/// `G⁽¹⁾(ω)` for real `ω > 0`.
pub fn scatter_real_axis(g: &PlanarGeometry, omega: f64, opts: &QuadratureOptions) -> Result<GreenScatter> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Domain(format!("frequency must be > 0, got {omega}")));
    }
    scatter_complex(g, Complex64::new(omega, 0.0), opts)
}

/// `G⁽¹⁾(Ω)` for complex `Ω` with `Re Ω > 0`, by continuation of the
/// real-axis representation.
///
/// Valid in a neighborhood of the positive real axis; callers are expected
/// to keep `|Im Ω| ≪ Re Ω`.
pub fn scatter_complex(g: &PlanarGeometry, omega: Complex64, opts: &QuadratureOptions) -> Result<GreenScatter> {
    if !(omega.re > 0.0) || !omega.is_finite() {
        return Err(Error::Domain(format!("complex frequency needs Re > 0, got {omega}")));
    }
    if g.material.is_vacuum() {
        return Ok(GreenScatter::ZERO);
    }
    let z = g.z;
    let phase = 2.0 * omega.re * z / C;
    if phase > opts.oscillation_budget {
        return Err(Error::OscillationBudget {
            phase,
            budget: opts.oscillation_budget,
        });
    }
    let i = Complex64::i();
    let k = omega / C;
    let k2 = k * k;
    let eps = match g.material {
        Material::PerfectMirror => None,
        ref m => Some(m.eps_complex(omega)?),
    };
    let reflect = |kz: Complex64| match eps {
        None => (Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)),
        Some(e) => fresnel_kz(e, k2, kz),
    };
    let tol = opts.tolerance();

    // Propagating sector: k_z = s k, s ∈ [0, 1]; then k_z²/k² = s².
    let propagating = |s: f64| -> [Complex64; 4] {
        let kz = s * k;
        let (rs, rp) = reflect(kz);
        let m_xx = rs - s * s * rp;
        let m_zz = 2.0 * (1.0 - s * s) * rp;
        let e = (2.0 * i * kz * z).exp();
        let dz = 2.0 * i * kz * z;
        [e * m_xx, e * m_zz, e * dz * m_xx, e * dz * m_zz]
    };
    let mut breaks = vec![0.0, 1e-6, 1e-4, 1e-2];
    // zeros of cos(2 Re(k_z) z)
    let mut m = 0.0;
    loop {
        let s = (m + 0.5) * PI / phase;
        if s >= 1.0 {
            break;
        }
        if s > 1e-2 {
            breaks.push(s);
        }
        m += 1.0;
    }
    breaks.push(1.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let prop = integrate(propagating, &breaks, &tol)?.value;
    let prop = prop.map(|v| v * k);

    // Evanescent sector: k_z = iκ, u = 2κz; k_z²/k² = −κ²/k².
    let evanescent = |u: f64| -> [Complex64; 4] {
        let kappa = u / (2.0 * z);
        let kz = Complex64::new(0.0, kappa);
        let (rs, rp) = reflect(kz);
        let ratio = kappa * kappa / k2;
        let m_xx = rs + ratio * rp;
        let m_zz = 2.0 * (1.0 + ratio) * rp;
        let w = (-u).exp();
        [w * m_xx, w * m_zz, -u * w * m_xx, -u * w * m_zz]
    };
    let evan = integrate_semi_infinite(evanescent, &DAMPED_BREAKS, 16.0, &tol)?.value;
    let evan = evan.map(|v| v * (-i / (2.0 * z)));

    let pref = i / (8.0 * PI);
    let total: [Complex64; 4] = std::array::from_fn(|j| pref * (prop[j] + evan[j]));
    Ok(GreenScatter::from_components(
        total[0],
        total[1],
        total[2] / z,
        total[3] / z,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> QuadratureOptions {
        QuadratureOptions::default()
    }

    #[test]
    fn weak_medium_keeps_relative_precision() {
        // first order in χ: r_s = −χq²/4κ², r_p = χ(2κ² − q²)/4κ²
        let (xi, kappa) = (1e14, 2e6);
        let q2 = (xi / C).powi(2);
        let chi = 1e-12;
        let (rs, rp) = fresnel_imag(chi, xi, kappa);
        let rs1 = -chi * q2 / (4.0 * kappa * kappa);
        let rp1 = chi * (2.0 * kappa * kappa - q2) / (4.0 * kappa * kappa);
        assert!((rs - rs1).abs() < 1e-10 * rs1.abs());
        assert!((rp - rp1).abs() < 1e-10 * rp1.abs());
    }

    #[test]
    fn vacuum_scatters_nothing() {
        let g = PlanarGeometry::new(1e-6, Material::Vacuum).unwrap();
        assert_eq!(scatter_imag_axis(&g, 1e14, &opts()).unwrap(), GreenScatter::ZERO);
        assert_eq!(scatter_real_axis(&g, 1e14, &opts()).unwrap(), GreenScatter::ZERO);
    }

    #[test]
    fn fresnel_special_cases() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(fresnel(&Material::PerfectMirror, Axis::Real, 1e14, 1e5), (-one, one));
        assert_eq!(
            fresnel(&Material::PerfectMirror, Axis::Imaginary, 0.0, 0.0),
            (-one, one)
        );
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(fresnel(&Material::Vacuum, Axis::Imaginary, 1e14, 1e5), (zero, zero));
        let drude = Material::drude(1.37e16, 4.06e13).unwrap();
        let (rs, rp) = fresnel(&drude, Axis::Imaginary, 0.0, 1e6);
        assert_eq!((rs.re, rp.re), (0.0, 1.0));
        let plasma = Material::plasma(1.37e16).unwrap();
        let (rs, rp) = fresnel(&plasma, Axis::Imaginary, 0.0, 1e6);
        assert!(rs.re < -0.9);
        assert_eq!(rp.re, 1.0);
    }

    #[test]
    fn normal_incidence_identity() {
        let m = Material::drude(1.37e16, 4.06e13).unwrap();
        for &w in &[1e11, 1e13, 1.15e14, 2.37e15, 3e16] {
            let eps = m.eps_real_axis(w).unwrap();
            let n = eps.sqrt();
            let expected = ((n - 1.0) / (n + 1.0)).norm();
            let (rs, rp) = fresnel(&m, Axis::Real, w, 0.0);
            assert!((rs.norm() - expected).abs() < 1e-12);
            assert!((rp.norm() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_permittivity_means_no_reflection() {
        let m = Material::drude(0.0, 1e13).unwrap();
        let (rs, rp) = fresnel(&m, Axis::Real, 1e14, 1e5);
        assert!(rs.norm() < 1e-15 && rp.norm() < 1e-15);
    }

    #[test]
    fn freespace_imaginary_part() {
        assert!((imG_freespace(6.0 * PI * C) - 1.0).abs() < 1e-15);
        assert!((imG_freespace(2e15) - 2.0 * imG_freespace(1e15)).abs() < 1e-30);
    }

    #[test]
    fn trace_is_consistent() {
        let g = PlanarGeometry::new(2e-7, Material::drude(1.37e16, 4.06e13).unwrap()).unwrap();
        for s in [
            scatter_imag_axis(&g, 3e14, &opts()).unwrap(),
            scatter_real_axis(&g, 3e14, &opts()).unwrap(),
        ] {
            let resid = s.trace - 2.0 * s.xx - s.zz;
            assert!(resid.norm() <= 1e-13 * s.trace.norm());
        }
    }

    #[test]
    fn imaginary_axis_values_are_real() {
        let g = PlanarGeometry::new(1e-6, Material::plasma(1.37e16).unwrap()).unwrap();
        let s = scatter_imag_axis(&g, 1e14, &opts()).unwrap();
        for v in [s.xx, s.zz, s.d_xx_dz, s.d_zz_dz] {
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn static_limit_matches_small_xi() {
        let g = PlanarGeometry::new(1e-6, Material::drude(1.37e16, 4.06e13).unwrap()).unwrap();
        let lim = xi2_scatter_static_limit(&g);
        let xi = 1e8;
        let s = scatter_imag_axis(&g, xi, &opts())
            .unwrap()
            .scaled(Complex64::new(xi * xi, 0.0));
        assert!((s.trace - lim.trace).norm() / lim.trace.norm() < 1e-3);
        assert!((s.d_trace_dz - lim.d_trace_dz).norm() / lim.d_trace_dz.norm() < 1e-3);
    }

    #[test]
    fn oscillation_budget_is_enforced() {
        let g = PlanarGeometry::new(1e-3, Material::PerfectMirror).unwrap();
        let err = scatter_real_axis(&g, 1e16, &opts()).unwrap_err();
        assert!(matches!(err, Error::OscillationBudget { .. }));
    }

    #[test]
    fn rejects_zero_frequency_and_height() {
        let g = PlanarGeometry::new(1e-6, Material::PerfectMirror).unwrap();
        assert!(scatter_imag_axis(&g, 0.0, &opts()).is_err());
        assert!(scatter_real_axis(&g, 0.0, &opts()).is_err());
        assert!(PlanarGeometry::new(0.0, Material::PerfectMirror).is_err());
    }
}
