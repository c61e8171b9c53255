//! Thermal-field scalar functions.
//!
//! Bose–Einstein photon numbers, Matsubara frequencies and the equilibrium
//! reduction factor `r_T = tanh(ħω/2k_BT)`.

use crate::constants::{HBAR, KB, TWO_PI};
use crate::{Error, Result};

/// Above this value of `ħω/k_BT` the photon number is returned as exactly 0.
pub const SATURATION_EXPONENT: f64 = 700.0;

/// Absolute temperature in kelvin.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Temperature(f64);

impl Temperature {
    pub const ZERO: Temperature = Temperature(0.0);

    pub fn new(kelvin: f64) -> Result<Self> {
        if kelvin.is_finite() && kelvin >= 0.0 {
            Ok(Self(kelvin))
        } else {
            Err(Error::Domain(format!("temperature must be >= 0 K, got {kelvin}")))
        }
    }

    pub fn kelvin(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }

    /// `k_B T` in joules.
    pub fn energy(self) -> f64 {
        KB * self.0
    }
}

/// `ħω/(k_B T)`; infinite at `T = 0`.
fn reduced_energy(omega: f64, temperature: Temperature) -> f64 {
    if temperature.is_zero() {
        f64::INFINITY
    } else {
        HBAR * omega / temperature.energy()
    }
}

fn check_positive(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("frequency must be > 0, got {omega}")))
    }
}

/// Mean thermal photon number `n(ω) = 1/(e^{ħω/k_BT} − 1)`.
pub fn photon_number(omega: f64, temperature: Temperature) -> Result<f64> {
    check_positive(omega)?;
    let x = reduced_energy(omega, temperature);
    if x > SATURATION_EXPONENT {
        return Ok(0.0);
    }
    Ok(1.0 / x.exp_m1())
}

/// Matsubara frequency `ξ_N = 2π k_B T N / ħ`.
pub fn matsubara_frequency(n: usize, temperature: Temperature) -> Result<f64> {
    if temperature.is_zero() {
        return Err(Error::Domain("Matsubara frequencies are undefined at T = 0".into()));
    }
    Ok(TWO_PI * temperature.energy() * n as f64 / HBAR)
}

/// Equilibrium reduction factor `r_T = tanh(ħω/2k_BT) = 1/(2n(ω)+1)`.
pub fn thermal_reduction_ratio(omega: f64, temperature: Temperature) -> Result<f64> {
    check_positive(omega)?;
    let x = reduced_energy(omega, temperature);
    if x > SATURATION_EXPONENT {
        return Ok(1.0);
    }
    Ok((0.5 * x).tanh())
}

/// `1 − r_T`, evaluated as `2e^{-x}/(1+e^{-x})` so that values far below
/// machine epsilon stay representable.
pub fn thermal_reduction_deficit(omega: f64, temperature: Temperature) -> Result<f64> {
    check_positive(omega)?;
    let x = reduced_energy(omega, temperature);
    if x.is_infinite() {
        return Ok(0.0);
    }
    let q = (-x).exp();
    Ok(2.0 * q / (1.0 + q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(k: f64) -> Temperature {
        Temperature::new(k).unwrap()
    }

    #[test]
    fn photon_number_at_ln2() {
        let temp = t(300.0);
        let omega = std::f64::consts::LN_2 * KB * 300.0 / HBAR;
        let n = photon_number(omega, temp).unwrap();
        assert!((n - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_temperature_limits() {
        assert_eq!(photon_number(1e15, Temperature::ZERO).unwrap(), 0.0);
        assert_eq!(thermal_reduction_ratio(1e15, Temperature::ZERO).unwrap(), 1.0);
        assert_eq!(thermal_reduction_deficit(1e15, Temperature::ZERO).unwrap(), 0.0);
        assert!(matsubara_frequency(1, Temperature::ZERO).is_err());
    }

    #[test]
    fn caf_rotational_photon_number() {
        // 1/(exp(ħω/kT) - 1) with ħω/kT = 3.3611e-3
        let n = photon_number(1.32e11, t(300.0)).unwrap();
        let x = HBAR * 1.32e11 / (KB * 300.0);
        assert!((n - 1.0 / (x.exp() - 1.0)).abs() / n < 1e-9);
        assert!((n - 297.0).abs() < 1.0, "n = {n}");
    }

    #[test]
    fn matsubara_values() {
        assert_eq!(matsubara_frequency(0, t(300.0)).unwrap(), 0.0);
        let xi1 = matsubara_frequency(1, t(300.0)).unwrap();
        assert!((xi1 / 2.4677e14 - 1.0).abs() < 1e-4, "xi1 = {xi1:e}");
        let xi2 = matsubara_frequency(2, t(150.0)).unwrap();
        assert!((xi1 - xi2).abs() <= 1e-15 * xi1);
    }

    #[test]
    fn domain_errors() {
        assert!(photon_number(0.0, t(300.0)).is_err());
        assert!(photon_number(-1.0, t(300.0)).is_err());
        assert!(thermal_reduction_ratio(-1.0, t(300.0)).is_err());
        assert!(Temperature::new(-1.0).is_err());
    }

    #[test]
    fn saturation_returns_exact_limits() {
        let temp = t(1.0);
        let omega = 720.0 * KB / HBAR;
        assert_eq!(photon_number(omega, temp).unwrap(), 0.0);
        assert_eq!(thermal_reduction_ratio(omega, temp).unwrap(), 1.0);
        assert!(thermal_reduction_deficit(omega, temp).unwrap() > 0.0);
    }

    #[test]
    fn reduction_ratio_reported_values() {
        let temp = t(300.0);
        let rb = thermal_reduction_deficit(2.37e15, temp).unwrap();
        assert!((rb / 1.3e-26 - 1.0).abs() < 0.05, "1 - r_T(Rb) = {rb:e}");
        let vib = thermal_reduction_ratio(1.15e14, temp).unwrap();
        assert!((vib - 0.90).abs() < 0.005, "r_T = {vib}");
        let rot = thermal_reduction_ratio(1.32e11, temp).unwrap();
        assert!((rot - 0.0017).abs() < 5e-5, "r_T = {rot}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ratio_times_occupation_is_one(log_w in 9.0f64..16.0, temp in 0.1f64..5000.0) {
                let omega = 10f64.powf(log_w);
                let temp = t(temp);
                let r = thermal_reduction_ratio(omega, temp).unwrap();
                let n = photon_number(omega, temp).unwrap();
                prop_assert!((r * (2.0 * n + 1.0) - 1.0).abs() < 1e-12);
            }

            #[test]
            fn photon_number_decreases_in_frequency(log_w in 9.0f64..15.0, step in 1.001f64..3.0, temp in 1.0f64..3000.0) {
                let omega = 10f64.powf(log_w);
                let temp = t(temp);
                let a = photon_number(omega, temp).unwrap();
                let b = photon_number(omega * step, temp).unwrap();
                prop_assert!(b < a || (a == 0.0 && b == 0.0));
            }

            #[test]
            fn photon_number_increases_in_temperature(log_w in 9.0f64..15.0, temp in 1.0f64..3000.0, step in 1.001f64..3.0) {
                let omega = 10f64.powf(log_w);
                let a = photon_number(omega, t(temp)).unwrap();
                let b = photon_number(omega, t(temp * step)).unwrap();
                prop_assert!(b >= a);
            }
        }
    }
}
