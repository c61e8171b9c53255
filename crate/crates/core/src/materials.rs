//! Permittivity models for the surface half-space.
//!
//! Parameters are SI angular frequencies (rad/s) throughout; `strength` of a
//! Lorentz oscillator is in rad²/s².

use num_complex::Complex64;

use crate::{Error, Result};

/// Lorentz oscillator term `s / (ω_0² − ω² − iγω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    pub strength: f64,
    pub resonance: f64,
    pub damping: f64,
}

/// Free-carrier term `−ω_p² / (ω(ω + iγ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeCarriers {
    pub plasma_frequency: f64,
    pub relaxation_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Material {
    Vacuum,
    PerfectMirror,
    Drude {
        plasma_frequency: f64,
        relaxation_rate: f64,
    },
    Plasma {
        plasma_frequency: f64,
    },
    DrudeLorentz {
        oscillators: Vec<Oscillator>,
        drude_part: Option<FreeCarriers>,
    },
}

impl Material {
    pub fn drude(plasma_frequency: f64, relaxation_rate: f64) -> Result<Self> {
        let m = Material::Drude {
            plasma_frequency,
            relaxation_rate,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn plasma(plasma_frequency: f64) -> Result<Self> {
        let m = Material::Plasma { plasma_frequency };
        m.validate()?;
        Ok(m)
    }

    pub fn drude_lorentz(oscillators: Vec<Oscillator>, drude_part: Option<FreeCarriers>) -> Result<Self> {
        let m = Material::DrudeLorentz {
            oscillators,
            drude_part,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Material::Vacuum => "vacuum",
            Material::PerfectMirror => "perfect-mirror",
            Material::Drude { .. } => "drude",
            Material::Plasma { .. } => "plasma",
            Material::DrudeLorentz { .. } => "drude-lorentz",
        }
    }

    /// Checks that every rate and frequency parameter is finite and
    /// non-negative, and that Lorentz resonances are strictly positive.
    pub fn validate(&self) -> Result<()> {
        fn nonneg(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{name} must be finite and >= 0, got {v}")))
            }
        }
        match self {
            Material::Vacuum | Material::PerfectMirror => Ok(()),
            Material::Drude {
                plasma_frequency,
                relaxation_rate,
            } => {
                nonneg("plasma_frequency", *plasma_frequency)?;
                nonneg("relaxation_rate", *relaxation_rate)
            }
            Material::Plasma { plasma_frequency } => nonneg("plasma_frequency", *plasma_frequency),
            Material::DrudeLorentz {
                oscillators,
                drude_part,
            } => {
                for o in oscillators {
                    nonneg("oscillator strength", o.strength)?;
                    nonneg("oscillator damping", o.damping)?;
                    if !(o.resonance > 0.0 && o.resonance.is_finite()) {
                        return Err(Error::InvalidInput(format!(
                            "oscillator resonance must be > 0, got {}",
                            o.resonance
                        )));
                    }
                }
                if let Some(d) = drude_part {
                    nonneg("plasma_frequency", d.plasma_frequency)?;
                    nonneg("relaxation_rate", d.relaxation_rate)?;
                }
                Ok(())
            }
        }
    }

    fn free_carriers(&self) -> Option<FreeCarriers> {
        match self {
            Material::Drude {
                plasma_frequency,
                relaxation_rate,
            } => Some(FreeCarriers {
                plasma_frequency: *plasma_frequency,
                relaxation_rate: *relaxation_rate,
            }),
            Material::Plasma { plasma_frequency } => Some(FreeCarriers {
                plasma_frequency: *plasma_frequency,
                relaxation_rate: 0.0,
            }),
            Material::DrudeLorentz { drude_part, .. } => *drude_part,
            Material::Vacuum | Material::PerfectMirror => None,
        }
    }

    /// `ε(iξ)` for `ξ > 0`.
    pub fn eps_imag_axis(&self, xi: f64) -> Result<f64> {
        Ok(1.0 + self.susceptibility_imag_axis(xi)?)
    }

    /// `ε(iξ) − 1` for `ξ > 0`, summed without forming `ε` so that weak
    /// media keep full relative precision.
    pub fn susceptibility_imag_axis(&self, xi: f64) -> Result<f64> {
        if !(xi > 0.0) {
            return Err(Error::Domain(format!("imaginary frequency must be > 0, got {xi}")));
        }
        let mut chi = 0.0;
        match self {
            Material::PerfectMirror => return Err(Error::NoPermittivity(self.name())),
            Material::Vacuum => {}
            Material::Drude { .. } | Material::Plasma { .. } => {}
            Material::DrudeLorentz { oscillators, .. } => {
                for o in oscillators {
                    chi += o.strength / (o.resonance * o.resonance + xi * xi + o.damping * xi);
                }
            }
        }
        if let Some(fc) = self.free_carriers() {
            chi += fc.plasma_frequency * fc.plasma_frequency / (xi * (xi + fc.relaxation_rate));
        }
        Ok(chi)
    }

    /// `ε(ω)` for real `ω > 0`.
    pub fn eps_real_axis(&self, omega: f64) -> Result<Complex64> {
        if !(omega > 0.0) {
            return Err(Error::Domain(format!("frequency must be > 0, got {omega}")));
        }
        self.eps_complex(Complex64::new(omega, 0.0))
    }

    /// `ε(ω)` continued to complex `ω`. Used for the upper-half-plane
    /// response and its continuation to complex transition frequencies.
    pub fn eps_complex(&self, omega: Complex64) -> Result<Complex64> {
        let i = Complex64::i();
        let mut eps = Complex64::new(1.0, 0.0);
        match self {
            Material::PerfectMirror => return Err(Error::NoPermittivity(self.name())),
            Material::Vacuum | Material::Drude { .. } | Material::Plasma { .. } => {}
            Material::DrudeLorentz { oscillators, .. } => {
                for o in oscillators {
                    eps += o.strength / (o.resonance * o.resonance - omega * omega - i * o.damping * omega);
                }
            }
        }
        if let Some(fc) = self.free_carriers() {
            eps -= fc.plasma_frequency * fc.plasma_frequency / (omega * (omega + i * fc.relaxation_rate));
        }
        Ok(eps)
    }

    pub fn is_vacuum(&self) -> bool {
        match self {
            Material::Vacuum => true,
            Material::Drude { plasma_frequency, .. } | Material::Plasma { plasma_frequency } => {
                *plasma_frequency == 0.0
            }
            Material::DrudeLorentz {
                oscillators,
                drude_part,
            } => oscillators.iter().all(|o| o.strength == 0.0) && drude_part.is_none_or(|d| d.plasma_frequency == 0.0),
            Material::PerfectMirror => false,
        }
    }

    /// Static reflection limits `(r_s, r_p)` at `ξ → 0` for transverse
    /// wavenumber `kpar`.
    ///
    /// Free carriers with finite relaxation (Drude) give `r_s → 0`; without
    /// relaxation (plasma) `r_s` keeps a finite, `kpar`-dependent value.
    /// Any free-carrier term drives `r_p → 1`; pure dielectrics give
    /// `(ε(0) − 1)/(ε(0) + 1)`.
    pub fn static_reflection(&self, kpar: f64) -> (f64, f64) {
        use crate::constants::C;
        match self {
            Material::Vacuum => (0.0, 0.0),
            Material::PerfectMirror => (-1.0, 1.0),
            _ if self.is_vacuum() => (0.0, 0.0),
            _ => {
                if let Some(fc) = self.free_carriers().filter(|fc| fc.plasma_frequency > 0.0) {
                    let rs = if fc.relaxation_rate == 0.0 {
                        let km = (kpar * kpar + (fc.plasma_frequency / C).powi(2)).sqrt();
                        (kpar - km) / (kpar + km)
                    } else {
                        0.0
                    };
                    (rs, 1.0)
                } else {
                    let chi0 = self.bound_static_susceptibility();
                    (0.0, chi0 / (2.0 + chi0))
                }
            }
        }
    }

    /// `ε(0)` of the bound-charge part. Infinite when free carriers are present.
    pub fn static_permittivity(&self) -> f64 {
        match self {
            Material::Vacuum => 1.0,
            Material::PerfectMirror => f64::INFINITY,
            Material::Drude { plasma_frequency, .. } | Material::Plasma { plasma_frequency } => {
                if *plasma_frequency > 0.0 {
                    f64::INFINITY
                } else {
                    1.0
                }
            }
            Material::DrudeLorentz { drude_part, .. } => {
                if drude_part.is_some_and(|d| d.plasma_frequency > 0.0) {
                    return f64::INFINITY;
                }
                1.0 + self.bound_static_susceptibility()
            }
        }
    }

    fn bound_static_susceptibility(&self) -> f64 {
        match self {
            Material::DrudeLorentz { oscillators, .. } => oscillators
                .iter()
                .map(|o| o.strength / (o.resonance * o.resonance))
                .sum(),
            _ => 0.0,
        }
    }
}
