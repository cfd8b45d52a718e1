//! Monte Carlo user populations and the named single-user presets.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::earth::{J2, MU_WGS72, RADIUS_WGS72_KM, SECONDS_PER_DAY, TROPICAL_YEAR_DAYS};
use crate::propagation::KeplerianElements;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserTag {
    Montecarlo,
    ShellBand,
    IssPreset,
    SsoPreset,
    Explicit,
}

impl UserTag {
    pub fn as_str(self) -> &'static str {
        match self {
            UserTag::Montecarlo => "montecarlo",
            UserTag::ShellBand => "shell_band",
            UserTag::IssPreset => "iss_preset",
            UserTag::SsoPreset => "sso_preset",
            UserTag::Explicit => "explicit",
        }
    }
}

impl fmt::Display for UserTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserSpec {
    pub user_id: u32,
    pub elements: KeplerianElements,
    pub tag: UserTag,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PopulationError {
    #[error("unknown preset '{0}' (expected iss or sso_eo)")]
    UnknownPreset(String),
    #[error("altitude range [{0}, {1}] km is empty or negative")]
    AltitudeRange(f64, f64),
    #[error("no sun-synchronous circular orbit exists at {0} km")]
    NoSunSynchronous(f64),
}

/// Extra stratum of users confined to an altitude band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltitudeBand {
    pub count: u32,
    pub altitude: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PopulationSpec {
    pub main_count: u32,
    pub main_altitude: [f64; 2],
    pub bands: Vec<AltitudeBand>,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        Self {
            main_count: 1000,
            main_altitude: [350.0, 1200.0],
            bands: vec![
                AltitudeBand {
                    count: 100,
                    altitude: [470.0, 570.0],
                },
                AltitudeBand {
                    count: 100,
                    altitude: [1100.0, 1200.0],
                },
            ],
        }
    }
}

impl PopulationSpec {
    /// Same strata with every count multiplied by `fraction` (rounded).
    pub fn scaled(&self, fraction: f64) -> Self {
        let scale = |n: u32| (n as f64 * fraction).round() as u32;
        Self {
            main_count: scale(self.main_count),
            main_altitude: self.main_altitude,
            bands: self
                .bands
                .iter()
                .map(|b| AltitudeBand {
                    count: scale(b.count),
                    altitude: b.altitude,
                })
                .collect(),
        }
    }

    pub fn total(&self) -> usize {
        self.main_count as usize + self.bands.iter().map(|b| b.count as usize).sum::<usize>()
    }

    pub fn validate(&self) -> Result<(), PopulationError> {
        for [lo, hi] in std::iter::once(self.main_altitude).chain(self.bands.iter().map(|b| b.altitude)) {
            if !(lo >= 0.0 && hi >= lo) {
                return Err(PopulationError::AltitudeRange(lo, hi));
            }
        }
        Ok(())
    }

    /// Users with uniform altitude per stratum, inclination in [0, 180],
    /// RAAN and mean anomaly in [0, 360), all circular. Ids are sequential,
    /// main stratum first.
    pub fn generate(&self, seed: u64, epoch: DateTime<Utc>) -> Result<Vec<UserSpec>, PopulationError> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let strata = std::iter::once((self.main_count, self.main_altitude, UserTag::Montecarlo))
            .chain(self.bands.iter().map(|b| (b.count, b.altitude, UserTag::ShellBand)));
        let mut users = Vec::with_capacity(self.total());
        for (count, [lo, hi], tag) in strata {
            for _ in 0..count {
                let altitude = lo + (hi - lo) * rng.random::<f64>();
                let inclination = 180.0 * rng.random::<f64>();
                let raan = rng.random_range(0.0..360.0);
                let mean_anomaly = rng.random_range(0.0..360.0);
                users.push(UserSpec {
                    user_id: users.len() as u32,
                    elements: KeplerianElements::circular(altitude, inclination, raan, mean_anomaly, epoch),
                    tag,
                });
            }
        }
        Ok(users)
    }
}

/// Default 1200-user population.
pub fn generate_population(seed: u64, epoch: DateTime<Utc>) -> Vec<UserSpec> {
    PopulationSpec::default()
        .generate(seed, epoch)
        .expect("default strata are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    Iss,
    SsoEo,
}

impl PresetName {
    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Iss => "iss",
            PresetName::SsoEo => "sso_eo",
        }
    }
}

impl FromStr for PresetName {
    type Err = PopulationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iss" => Ok(PresetName::Iss),
            "sso_eo" | "sso" => Ok(PresetName::SsoEo),
            other => Err(PopulationError::UnknownPreset(other.to_string())),
        }
    }
}

pub const ISS_ALTITUDE_KM: f64 = 420.0;
pub const ISS_INCLINATION_DEG: f64 = 51.6;
pub const SSO_EO_ALTITUDE_KM: f64 = 500.0;

/// Inclination of a circular orbit whose J2 nodal precession tracks the
/// mean Sun (one revolution per tropical year).
pub fn sun_synchronous_inclination(altitude: f64) -> Result<f64, PopulationError> {
    let a = RADIUS_WGS72_KM + altitude;
    let precession = 2.0 * PI / (TROPICAL_YEAR_DAYS * SECONDS_PER_DAY);
    let cos_i = -precession * 2.0 * a.powf(3.5) / (3.0 * J2 * MU_WGS72.sqrt() * RADIUS_WGS72_KM.powi(2));
    if cos_i < -1.0 {
        return Err(PopulationError::NoSunSynchronous(altitude));
    }
    Ok(cos_i.acos().to_degrees())
}

/// Named single user. RAAN and mean anomaly are zero.
pub fn preset(name: PresetName, epoch: DateTime<Utc>) -> UserSpec {
    let (altitude, inclination, tag) = match name {
        PresetName::Iss => (ISS_ALTITUDE_KM, ISS_INCLINATION_DEG, UserTag::IssPreset),
        PresetName::SsoEo => (
            SSO_EO_ALTITUDE_KM,
            sun_synchronous_inclination(SSO_EO_ALTITUDE_KM).expect("500 km is sun-synchronous"),
            UserTag::SsoPreset,
        ),
    };
    UserSpec {
        user_id: 0,
        elements: KeplerianElements::circular(altitude, inclination, 0.0, 0.0, epoch),
        tag,
    }
}

pub const POPULATION_CSV_HEADER: &str = "user_id,alt_km,inc_deg,raan_deg,ma_deg,tag";

pub fn population_csv(users: &[UserSpec]) -> String {
    let mut out = String::from(POPULATION_CSV_HEADER);
    out.push('\n');
    for u in users {
        let e = &u.elements;
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{}\n",
            u.user_id,
            e.altitude(),
            e.inclination,
            e.raan,
            e.mean_anomaly,
            u.tag
        ));
    }
    out
}
