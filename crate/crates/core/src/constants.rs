//! Physical constants (CODATA 2018, SI).

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Mass of 138Ba+ in kg (atomic mass minus one electron).
pub const BARIUM_138_MASS: f64 = (137.905_247 - 5.485_799e-4) * ATOMIC_MASS_UNIT;

/// Design wavelength of the collected Ba+ line.
pub const DESIGN_WAVELENGTH: f64 = 493e-9;
