//! SGP4/SDP4 propagation to TEME state vectors.
//!
//! The analytical model itself comes from the `sgp4` crate, run in AFSPC
//! compatibility mode so results line up with the published verification
//! ephemerides.

use chrono::{DateTime, Utc};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::tle::TwoLineElementSet;
use crate::earth::RADIUS_WGS72_KM;

/// Inertial (TEME) position in km and velocity in km/s at an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub epoch: DateTime<Utc>,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropagationError {
    #[error("object {object}: invalid elements: {reason}")]
    Initialization { object: String, reason: String },
    #[error("object {object}: propagation failed {minutes:.3} min from epoch: {reason}")]
    Diverged {
        object: String,
        minutes: f64,
        reason: String,
    },
    #[error("object {object}: decayed (radius {radius_km:.1} km) {minutes:.3} min from epoch")]
    Decayed {
        object: String,
        minutes: f64,
        radius_km: f64,
    },
}

/// Initialized SGP4 model for one element set; cheap to evaluate repeatedly.
#[derive(Debug, Clone)]
pub struct Propagator {
    label: String,
    epoch: DateTime<Utc>,
    constants: sgp4::Constants,
}

fn label_of(tle: &TwoLineElementSet) -> String {
    if tle.name.is_empty() {
        format!("#{}", tle.catalog_id)
    } else {
        format!("{} (#{})", tle.name, tle.catalog_id)
    }
}

impl Propagator {
    pub fn new(tle: &TwoLineElementSet) -> Result<Self, PropagationError> {
        let label = label_of(tle);
        let elements = sgp4::Elements {
            object_name: (!tle.name.is_empty()).then(|| tle.name.clone()),
            international_designator: None,
            norad_id: u64::from(tle.catalog_id),
            classification: sgp4::Classification::Unclassified,
            datetime: tle.epoch.naive_utc(),
            mean_motion_dot: tle.mean_motion_dot,
            mean_motion_ddot: tle.mean_motion_ddot,
            drag_term: tle.bstar,
            element_set_number: u64::from(tle.element_set_number),
            inclination: tle.inclination,
            right_ascension: tle.raan,
            eccentricity: tle.eccentricity,
            argument_of_perigee: tle.arg_perigee,
            mean_anomaly: tle.mean_anomaly,
            mean_motion: tle.mean_motion,
            revolution_number: u64::from(tle.revolution_number),
            ephemeris_type: tle.ephemeris_type,
        };
        let constants = sgp4::Constants::from_elements_afspc_compatibility_mode(&elements).map_err(|e| {
            PropagationError::Initialization {
                object: label.clone(),
                reason: e.to_string(),
            }
        })?;
        Ok(Self {
            label,
            epoch: tle.epoch,
            constants,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn epoch(&self) -> DateTime<Utc> {
        self.epoch
    }

    pub fn minutes_since_epoch(&self, t: DateTime<Utc>) -> f64 {
        let delta = t - self.epoch;
        match delta.num_nanoseconds() {
            Some(ns) => ns as f64 / 60e9,
            None => delta.num_milliseconds() as f64 / 60e3,
        }
    }

    /// Position (km) and velocity (km/s) `minutes` after the element epoch.
    pub fn propagate_minutes(&self, minutes: f64) -> Result<([f64; 3], [f64; 3]), PropagationError> {
        let prediction = self
            .constants
            .propagate_afspc_compatibility_mode(sgp4::MinutesSinceEpoch(minutes))
            .map_err(|e| PropagationError::Diverged {
                object: self.label.clone(),
                minutes,
                reason: e.to_string(),
            })?;
        let [x, y, z] = prediction.position;
        let radius = (x * x + y * y + z * z).sqrt();
        if radius < RADIUS_WGS72_KM {
            return Err(PropagationError::Decayed {
                object: self.label.clone(),
                minutes,
                radius_km: radius,
            });
        }
        Ok((prediction.position, prediction.velocity))
    }

    pub fn propagate(&self, t: DateTime<Utc>) -> Result<StateVector, PropagationError> {
        let (p, v) = self.propagate_minutes(self.minutes_since_epoch(t))?;
        Ok(StateVector {
            epoch: t,
            position: Vector3::from(p),
            velocity: Vector3::from(v),
        })
    }
}

/// One-shot propagation of `tle` to `t`.
pub fn propagate(tle: &TwoLineElementSet, t: DateTime<Utc>) -> Result<StateVector, PropagationError> {
    Propagator::new(tle)?.propagate(t)
}

/// Greenwich mean sidereal time (IAU 1982) in radians, UT1 taken as UTC.
pub fn gmst(t: DateTime<Utc>) -> f64 {
    let jd = 2_440_587.5 + t.timestamp() as f64 / 86_400.0 + f64::from(t.timestamp_subsec_nanos()) / 86_400e9;
    let tu = (jd - 2_451_545.0) / 36_525.0;
    let seconds =
        67_310.548_41 + (876_600.0 * 3600.0 + 8_640_184.812_866) * tu + 0.093_104 * tu * tu - 6.2e-6 * tu * tu * tu;
    (seconds.rem_euclid(86_400.0) / 240.0).to_radians()
}
