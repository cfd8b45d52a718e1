//! Link physics derived from pair geometry: free-space path loss, Doppler
//! offset and rate, plus an analytical Doppler profile for overhead passes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::earth::{MU_WGS72, RADIUS_KM, SPEED_OF_LIGHT};

/// Default carrier: low edge of the Ku-band downlink.
pub const DEFAULT_CARRIER_HZ: f64 = 10.7e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    pub carrier_frequency: f64,
    pub min_elevation: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            carrier_frequency: DEFAULT_CARRIER_HZ,
            min_elevation: 25.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("range must be positive, got {0} km")]
    NonPositiveRange(f64),
    #[error("frequency must be positive, got {0} Hz")]
    NonPositiveFrequency(f64),
    #[error("need at least 2 samples for a Doppler rate, got {0}")]
    TooFewSamples(usize),
    #[error("sample step must be positive, got {0} s")]
    NonPositiveStep(f64),
    #[error("satellite altitude {sat} km must exceed user altitude {user} km")]
    DegenerateProfile { user: f64, sat: f64 },
}

/// Free-space path loss in dB for a range in km and a frequency in Hz.
pub fn fspl_db(range_km: f64, frequency_hz: f64) -> Result<f64, LinkError> {
    if !(range_km > 0.0) {
        return Err(LinkError::NonPositiveRange(range_km));
    }
    if !(frequency_hz > 0.0) {
        return Err(LinkError::NonPositiveFrequency(frequency_hz));
    }
    Ok(fspl_db_unchecked(range_km, frequency_hz))
}

#[inline]
pub(crate) fn fspl_db_unchecked(range_km: f64, frequency_hz: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * range_km * 1000.0 * frequency_hz / SPEED_OF_LIGHT).log10()
}

/// Doppler offset in Hz; an approaching object (negative range rate) shifts up.
#[inline]
pub fn doppler_offset(range_rate_km_s: f64, frequency_hz: f64) -> f64 {
    -frequency_hz * range_rate_km_s * 1000.0 / SPEED_OF_LIGHT
}

/// Time derivative of a uniformly sampled offset series: central differences
/// inside, one-sided differences at both ends.
pub fn doppler_rate(offsets: &[f64], step_s: f64) -> Result<Vec<f64>, LinkError> {
    let n = offsets.len();
    if n < 2 {
        return Err(LinkError::TooFewSamples(n));
    }
    if !(step_s > 0.0) {
        return Err(LinkError::NonPositiveStep(step_s));
    }
    let mut rates = Vec::with_capacity(n);
    rates.push((offsets[1] - offsets[0]) / step_s);
    for w in offsets.windows(3) {
        rates.push((w[2] - w[0]) / (2.0 * step_s));
    }
    rates.push((offsets[n - 1] - offsets[n - 2]) / step_s);
    Ok(rates)
}

/// Relative sense of motion of the two coplanar circular orbits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelativeMotion {
    /// Both objects orbit in the same direction.
    #[default]
    CoRotating,
    /// Head-on: the objects orbit in opposite directions.
    CounterRotating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZenithDopplerPoint {
    pub elevation: f64,
    pub range_km: f64,
    /// Hz, on the approaching half of the pass (non-negative).
    pub offset_hz: f64,
    /// Hz/s
    pub rate_hz_s: f64,
}

/// Analytical Doppler offset and rate of an overhead pass between two
/// coplanar circular orbits, tabulated over elevation from `min_elevation`
/// to 90° in `elevation_step` increments (90° always included).
///
/// With angular rates ω = √(μ/a³) and separation θ(t) = (ω_sat − ω_user)·t,
/// the range follows the law of cosines and both its time derivatives are
/// closed-form.
pub fn zenith_doppler_profile(
    user_altitude: f64,
    sat_altitude: f64,
    frequency_hz: f64,
    min_elevation: f64,
    elevation_step: f64,
    motion: RelativeMotion,
) -> Result<Vec<ZenithDopplerPoint>, LinkError> {
    if !(sat_altitude > user_altitude) {
        return Err(LinkError::DegenerateProfile {
            user: user_altitude,
            sat: sat_altitude,
        });
    }
    if !(frequency_hz > 0.0) {
        return Err(LinkError::NonPositiveFrequency(frequency_hz));
    }
    if !(elevation_step > 0.0) {
        return Err(LinkError::NonPositiveStep(elevation_step));
    }
    let a_user = RADIUS_KM + user_altitude;
    let a_sat = RADIUS_KM + sat_altitude;
    let w_user = (MU_WGS72 / a_user.powi(3)).sqrt();
    let w_sat = (MU_WGS72 / a_sat.powi(3)).sqrt();
    let dw = match motion {
        RelativeMotion::CoRotating => w_sat - w_user,
        RelativeMotion::CounterRotating => w_sat + w_user,
    };
    let product = a_user * a_sat;

    let mut elevations = Vec::new();
    let mut e = min_elevation.clamp(-90.0, 90.0);
    while e < 90.0 {
        elevations.push(e);
        e += elevation_step;
    }
    elevations.push(90.0);

    Ok(elevations
        .into_iter()
        .map(|elevation| {
            let eps = elevation.to_radians();
            // Earth-central separation from the (centre, user, satellite) triangle.
            let theta = (std::f64::consts::FRAC_PI_2 - eps - (a_user * eps.cos() / a_sat).asin()).max(0.0);
            let range = (a_user * a_user + a_sat * a_sat - 2.0 * product * theta.cos()).sqrt();
            // Approaching half: dθ/dt drives θ toward zero.
            let range_rate = -(product * theta.sin() * dw.abs()) / range;
            let range_accel =
                dw * dw * (product * theta.cos() / range - (product * theta.sin()).powi(2) / range.powi(3));
            ZenithDopplerPoint {
                elevation,
                range_km: range,
                offset_hz: doppler_offset(range_rate, frequency_hz),
                rate_hz_s: -frequency_hz * range_accel * 1000.0 / SPEED_OF_LIGHT,
            }
        })
        .collect())
}
