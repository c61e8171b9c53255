//! Shared fixtures for the benchmarks.

use thermocp_core::{DressedLevels, LevelSystem, Material, PlanarGeometry};

/// Rubidium-like two-level atom (D-line frequency and dipole).
pub fn rubidium() -> LevelSystem {
    LevelSystem::two_level(2.37e15, 3.58e-29).expect("valid parameters")
}

/// CaF-like rotational two-level molecule.
pub fn caf_rotational() -> LevelSystem {
    LevelSystem::two_level(1.32e11, 1.02e-29).expect("valid parameters")
}

pub fn gold() -> Material {
    Material::drude(1.37e16, 4.06e13).expect("valid parameters")
}

pub fn above_gold(z: f64) -> PlanarGeometry {
    PlanarGeometry::new(z, gold()).expect("valid height")
}

pub fn bare(ls: &LevelSystem) -> DressedLevels {
    DressedLevels::bare(ls)
}
