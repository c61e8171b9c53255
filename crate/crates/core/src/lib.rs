//! Thermal Casimir–Polder forces on atoms and polar molecules above a planar
//! surface.
//!
//! The crate compares two routes to the force on an atomic system at
//! temperature `T`:
//!
//! * the macroscopic (Lifshitz-type) Matsubara sum built from a
//!   polarizability and the scattering Green tensor of the surface, and
//! * the state-resolved force obtained from the atom–field dynamics, which
//!   adds resonant contributions from real absorption and emission of
//!   thermal photons and is weighted by internal-state populations that
//!   evolve under rate equations.
//!
//! All quantities are in SI units. Forces are z-components; negative values
//! point toward the surface.

pub mod atom;
pub mod constants;
pub mod dynamics;
mod error;
pub mod force;
pub mod greens;
pub mod materials;
pub mod matsubara;
pub mod quadrature;
pub mod thermal;

pub use atom::{DressedLevels, LevelSystem, Polarizability, ShiftMode, Transition};
pub use dynamics::InternalState;
pub use error::{Error, Result};
pub use force::{ForceBreakdown, ForceOptions, ImaginaryPolarizability, StateForceModel};
pub use greens::{GreenScatter, PlanarGeometry, QuadratureOptions};
pub use materials::{FreeCarriers, Material, Oscillator};
