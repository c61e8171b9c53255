//! Physical constants in SI units (CODATA 2018).

use std::f64::consts::PI;

/// Reduced Planck constant (J·s)
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant (J/K)
pub const KB: f64 = 1.380_649e-23;

/// Speed of light in vacuum (m/s)
pub const C: f64 = 299_792_458.0;

/// Vacuum permeability (N/A²)
pub const MU0: f64 = 1.256_637_062_12e-6;

/// Vacuum permittivity (F/m), from `1/(μ₀c²)`
pub const EPS0: f64 = 1.0 / (MU0 * C * C);

/// Elementary charge (C)
pub const E_CHARGE: f64 = 1.602_176_634e-19;

/// Bohr radius (m)
pub const BOHR: f64 = 5.291_772_109_03e-11;

/// Debye (C·m)
pub const DEBYE: f64 = 3.335_640_951_98e-30;

pub const TWO_PI: f64 = 2.0 * PI;
