//! Walker-delta shell synthesis and element-to-TLE conversion.

use std::f64::consts::PI;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::tle::TwoLineElementSet;
use crate::earth::{MU_WGS72, RADIUS_WGS72_KM, SECONDS_PER_DAY};

/// Classical elements of a single object at an epoch. Angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeplerianElements {
    pub semi_major_axis: f64,
    pub eccentricity: f64,
    pub inclination: f64,
    pub raan: f64,
    pub arg_perigee: f64,
    pub mean_anomaly: f64,
    pub epoch: DateTime<Utc>,
}

impl KeplerianElements {
    /// Circular orbit at `altitude` km above the equatorial radius.
    pub fn circular(altitude: f64, inclination: f64, raan: f64, mean_anomaly: f64, epoch: DateTime<Utc>) -> Self {
        Self {
            semi_major_axis: RADIUS_WGS72_KM + altitude,
            eccentricity: 0.0,
            inclination,
            raan,
            arg_perigee: 0.0,
            mean_anomaly,
            epoch,
        }
    }

    pub fn altitude(&self) -> f64 {
        self.semi_major_axis - RADIUS_WGS72_KM
    }

    /// Two-body mean motion in revolutions per day.
    pub fn mean_motion_rev_per_day(&self) -> f64 {
        let n = (MU_WGS72 / self.semi_major_axis.powi(3)).sqrt();
        n * SECONDS_PER_DAY / (2.0 * PI)
    }
}

/// One Walker shell: evenly spaced circular planes with regular phasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellSpec {
    pub altitude: f64,
    pub inclination: f64,
    pub plane_count: u32,
    pub sats_per_plane: u32,
    /// Arc over which plane RAANs are spread; 360 for a Walker delta.
    #[serde(default = "default_raan_span")]
    pub raan_span: f64,
    /// Mean-anomaly step between adjacent planes. Defaults to 360 / total.
    #[serde(default)]
    pub inter_plane_phase: Option<f64>,
    /// Constant mean-anomaly shift applied to every slot of the shell.
    #[serde(default)]
    pub anomaly_offset: f64,
}

fn default_raan_span() -> f64 {
    360.0
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkerError {
    #[error("shell needs at least one plane and one satellite per plane")]
    EmptyShell,
    #[error("raan_span must lie in (0, 360], got {0}")]
    RaanSpan(f64),
    #[error("inclination must lie in [0, 180], got {0}")]
    Inclination(f64),
    #[error("semi-major axis {0} km is inside the Earth")]
    BelowSurface(f64),
    #[error("eccentricity must lie in [0, 1), got {0}")]
    Eccentricity(f64),
}

impl ShellSpec {
    pub fn new(altitude: f64, inclination: f64, plane_count: u32, sats_per_plane: u32) -> Self {
        Self {
            altitude,
            inclination,
            plane_count,
            sats_per_plane,
            raan_span: 360.0,
            inter_plane_phase: None,
            anomaly_offset: 0.0,
        }
    }

    pub fn total(&self) -> usize {
        self.plane_count as usize * self.sats_per_plane as usize
    }

    pub fn resolved_inter_plane_phase(&self) -> f64 {
        self.inter_plane_phase
            .unwrap_or_else(|| 360.0 / (self.plane_count as f64 * self.sats_per_plane as f64))
    }

    pub fn validate(&self) -> Result<(), WalkerError> {
        if self.plane_count == 0 || self.sats_per_plane == 0 {
            return Err(WalkerError::EmptyShell);
        }
        if !(self.raan_span > 0.0 && self.raan_span <= 360.0) {
            return Err(WalkerError::RaanSpan(self.raan_span));
        }
        if !(0.0..=180.0).contains(&self.inclination) {
            return Err(WalkerError::Inclination(self.inclination));
        }
        if self.altitude <= 0.0 {
            return Err(WalkerError::BelowSurface(RADIUS_WGS72_KM + self.altitude));
        }
        Ok(())
    }
}

/// Expands a shell into plane-major circular elements: index = plane × sats_per_plane + slot.
pub fn build_walker(shell: &ShellSpec, epoch: DateTime<Utc>) -> Result<Vec<KeplerianElements>, WalkerError> {
    shell.validate()?;
    let planes = shell.plane_count;
    let per_plane = shell.sats_per_plane;
    let phase = shell.resolved_inter_plane_phase();
    let mut out = Vec::with_capacity(shell.total());
    for p in 0..planes {
        let raan = (p as f64 * shell.raan_span / planes as f64).rem_euclid(360.0);
        for s in 0..per_plane {
            let ma = (s as f64 * 360.0 / per_plane as f64 + p as f64 * phase + shell.anomaly_offset).rem_euclid(360.0);
            out.push(KeplerianElements::circular(
                shell.altitude,
                shell.inclination,
                raan,
                ma,
                epoch,
            ));
        }
    }
    Ok(out)
}

/// Drag-free TLE whose Kozai mean motion comes from Kepler's third law.
pub fn elements_to_tle(elements: &KeplerianElements, catalog_id: u32) -> Result<TwoLineElementSet, WalkerError> {
    if elements.semi_major_axis <= RADIUS_WGS72_KM {
        return Err(WalkerError::BelowSurface(elements.semi_major_axis));
    }
    if !(0.0..1.0).contains(&elements.eccentricity) {
        return Err(WalkerError::Eccentricity(elements.eccentricity));
    }
    if !(0.0..=180.0).contains(&elements.inclination) {
        return Err(WalkerError::Inclination(elements.inclination));
    }
    Ok(TwoLineElementSet {
        name: String::new(),
        catalog_id,
        classification: 'U',
        international_designator: String::new(),
        epoch: elements.epoch,
        mean_motion_dot: 0.0,
        mean_motion_ddot: 0.0,
        bstar: 0.0,
        ephemeris_type: 0,
        element_set_number: 999,
        inclination: elements.inclination,
        raan: elements.raan.rem_euclid(360.0),
        eccentricity: elements.eccentricity,
        arg_perigee: elements.arg_perigee.rem_euclid(360.0),
        mean_anomaly: elements.mean_anomaly.rem_euclid(360.0),
        mean_motion: elements.mean_motion_rev_per_day(),
        revolution_number: 0,
    })
}
