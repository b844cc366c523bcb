//! Physical constants (CODATA 2018) and species data.
//!
//! Every constant used by the library lives here so unit prefactors have a
//! single source.

use std::f64::consts::PI;

/// Elementary charge (C), exact.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Unified atomic mass unit (kg).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Electron mass (kg).
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;

/// Vacuum electric permittivity (F/m).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Coulomb constant 1/(4πϵ₀) (N m² / C²).
pub const COULOMB_CONSTANT: f64 = 1.0 / (4.0 * PI * VACUUM_PERMITTIVITY);

/// Atomic mass of neutral ⁸⁸Sr (u), AME2016.
pub const SR88_ATOMIC_MASS_U: f64 = 87.905_612_5;

/// Joules per electron-volt.
pub const JOULES_PER_EV: f64 = ELEMENTARY_CHARGE;
