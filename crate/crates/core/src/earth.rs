//! Physical constants shared across the simulator.

/// WGS-72 gravitational parameter used by SGP4 (km³/s²).
pub const MU_WGS72: f64 = 398_600.8;

/// WGS-72 equatorial radius used by SGP4 (km).
pub const RADIUS_WGS72_KM: f64 = 6378.135;

/// Spherical Earth radius for visibility and occlusion geometry (km).
pub const RADIUS_KM: f64 = 6378.137;

/// Second zonal harmonic used for the sun-synchronous inclination.
pub const J2: f64 = 1.08263e-3;

/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Length of the tropical year (days).
pub const TROPICAL_YEAR_DAYS: f64 = 365.242_19;

pub const SECONDS_PER_DAY: f64 = 86_400.0;
