//! Relative geometry of a (user, satellite) pair and the two-sided visibility
//! predicate.
//!
//! The user carries a zenith-pointing antenna limited by a minimum elevation;
//! the satellite carries a nadir-pointing beam limited by a half-cone. A pair
//! is visible only when both ends see each other and the Earth sphere does not
//! block the segment between them.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::earth::RADIUS_KM;
use crate::propagation::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeGeometry {
    /// km
    pub range: f64,
    /// km/s, positive when the objects separate.
    pub range_rate: f64,
    /// Degrees above the user's local horizontal plane.
    pub user_elevation: f64,
    /// Degrees between the satellite's nadir and the satellite→user direction.
    pub sat_off_nadir: f64,
    pub los_clear: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BeamModel {
    /// Nadir cone that just encloses the visible Earth disc.
    EarthLimb,
    FixedHalfCone {
        half_cone: f64,
    },
}

impl BeamModel {
    /// Beam half-cone in degrees for a satellite at `sat_altitude` km.
    pub fn half_cone(&self, sat_altitude: f64) -> f64 {
        match *self {
            BeamModel::EarthLimb => earth_limb_half_cone(sat_altitude),
            BeamModel::FixedHalfCone { half_cone } => half_cone,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        match *self {
            BeamModel::FixedHalfCone { half_cone } if !(half_cone > 0.0 && half_cone <= 90.0) => {
                Err(GeometryError::HalfCone(half_cone))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("user and satellite positions coincide")]
    Coincident,
    #[error("state vectors are not at the same epoch")]
    EpochMismatch,
    #[error("fixed beam half-cone must lie in (0, 90], got {0}")]
    HalfCone(f64),
}

/// Half-angle (degrees) of the nadir cone tangent to the Earth sphere.
pub fn earth_limb_half_cone(altitude: f64) -> f64 {
    let ratio = RADIUS_KM / (RADIUS_KM + altitude.max(0.0));
    ratio.min(1.0).asin().to_degrees()
}

pub fn relative_geometry(user: &StateVector, sat: &StateVector) -> Result<RelativeGeometry, GeometryError> {
    if user.epoch != sat.epoch {
        return Err(GeometryError::EpochMismatch);
    }
    relative_geometry_raw(&user.position, &user.velocity, &sat.position, &sat.velocity)
}

/// Same as [`relative_geometry`] on bare position/velocity vectors.
pub fn relative_geometry_raw(
    user_pos: &Vector3<f64>,
    user_vel: &Vector3<f64>,
    sat_pos: &Vector3<f64>,
    sat_vel: &Vector3<f64>,
) -> Result<RelativeGeometry, GeometryError> {
    let rel = sat_pos - user_pos;
    let range = rel.norm();
    if range == 0.0 || !range.is_finite() {
        return Err(GeometryError::Coincident);
    }
    let range_rate = rel.dot(&(sat_vel - user_vel)) / range;
    let user_elevation = (user_pos.dot(&rel) / (user_pos.norm() * range))
        .clamp(-1.0, 1.0)
        .asin()
        .to_degrees();
    // Nadir is -sat_pos and the satellite→user direction is -rel.
    let sat_off_nadir = (sat_pos.dot(&rel) / (sat_pos.norm() * range))
        .clamp(-1.0, 1.0)
        .acos()
        .to_degrees();
    Ok(RelativeGeometry {
        range,
        range_rate,
        user_elevation,
        sat_off_nadir,
        los_clear: segment_clears_earth(user_pos, sat_pos),
    })
}

/// True iff the closed segment between `a` and `b` stays outside the Earth sphere.
pub fn segment_clears_earth(a: &Vector3<f64>, b: &Vector3<f64>) -> bool {
    let d = b - a;
    let len2 = d.norm_squared();
    let t = if len2 > 0.0 {
        (-a.dot(&d) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a + d * t).norm() > RADIUS_KM
}

/// Two-sided visibility: clear line of sight, user elevation at or above
/// `min_elevation`, and the user inside the satellite beam. Both bounds inclusive.
pub fn is_visible(geom: &RelativeGeometry, min_elevation: f64, sat_beam: &BeamModel, sat_altitude: f64) -> bool {
    geom.los_clear && geom.user_elevation >= min_elevation && geom.sat_off_nadir <= sat_beam.half_cone(sat_altitude)
}

/// Upper bound (radians) on the Earth-central angle between a user at radius
/// `user_radius` and any satellite no higher than `max_sat_radius` that can be
/// visible with elevation ≥ `min_elevation` degrees. `None` means no such
/// satellite can be visible at all.
///
/// Used to cull pairs before the exact predicate; the bound only ever errs on
/// the wide side.
pub fn central_angle_bound(user_radius: f64, max_sat_radius: f64, min_elevation: f64) -> Option<f64> {
    const MARGIN: f64 = 1e-6;
    if min_elevation >= 0.0 {
        // A point below the user's radius lies under the local horizontal plane.
        if max_sat_radius < user_radius {
            return None;
        }
        let eps = min_elevation.to_radians();
        let sin_eta = (user_radius * eps.cos() / max_sat_radius).min(1.0);
        let bound = std::f64::consts::FRAC_PI_2 - eps - sin_eta.asin();
        return Some((bound + MARGIN).max(MARGIN));
    }
    let horizon = |r: f64| (RADIUS_KM / r).min(1.0).acos();
    Some(horizon(user_radius) + horizon(max_sat_radius) + MARGIN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    fn sv(p: [f64; 3], v: [f64; 3]) -> StateVector {
        StateVector {
            epoch: Utc.with_ymd_and_hms(2021, 3, 20, 9, 37, 29).unwrap(),
            position: Vector3::from(p),
            velocity: Vector3::from(v),
        }
    }

    #[test]
    fn radial_alignment() {
        let g = relative_geometry(&sv([7000.0, 0.0, 0.0], [0.0; 3]), &sv([7500.0, 0.0, 0.0], [0.0; 3])).unwrap();
        assert!((g.range - 500.0).abs() < 1e-12);
        assert_eq!(g.range_rate, 0.0);
        assert!((g.user_elevation - 90.0).abs() < 1e-9);
        assert!(g.sat_off_nadir.abs() < 1e-9);
        assert!(g.los_clear);
    }

    #[test]
    fn antipodal_occlusion() {
        let g = relative_geometry(&sv([7000.0, 0.0, 0.0], [0.0; 3]), &sv([-7500.0, 0.0, 0.0], [0.0; 3])).unwrap();
        assert!(!g.los_clear);
    }

    #[test]
    fn co_moving_pair_has_zero_range_rate() {
        let g = relative_geometry(
            &sv([7000.0, 0.0, 0.0], [0.0, 7.5, 0.0]),
            &sv([7000.0, 100.0, 0.0], [0.0, 7.5, 0.0]),
        )
        .unwrap();
        assert!((g.range - 100.0).abs() < 1e-12);
        assert_eq!(g.range_rate, 0.0);
    }

    #[test]
    fn coincident_and_epoch_errors() {
        let a = sv([7000.0, 0.0, 0.0], [0.0; 3]);
        assert_eq!(relative_geometry(&a, &a), Err(GeometryError::Coincident));
        let mut b = sv([7100.0, 0.0, 0.0], [0.0; 3]);
        b.epoch += chrono::Duration::seconds(1);
        assert_eq!(relative_geometry(&a, &b), Err(GeometryError::EpochMismatch));
    }

    #[test]
    fn limb_half_cone_values() {
        assert!((earth_limb_half_cone(1e-9) - 90.0).abs() < 1e-3);
        let expected = (6378.137f64 / 7578.137).asin().to_degrees();
        assert!((earth_limb_half_cone(1200.0) - expected).abs() < 1e-12);
        assert!((earth_limb_half_cone(1200.0) - 57.3).abs() < 0.05);
        let geo = earth_limb_half_cone(35_786.0);
        assert!((geo - 8.7).abs() < 0.05);
        assert!(geo < 10.5 && 10.5 < 13.0);
    }

    #[test]
    fn zenith_satellite_is_visible() {
        let g = relative_geometry(&sv([6798.0, 0.0, 0.0], [0.0; 3]), &sv([7578.0, 0.0, 0.0], [0.0; 3])).unwrap();
        assert!(is_visible(&g, 25.0, &BeamModel::EarthLimb, 1200.0));
    }

    #[test]
    fn user_above_satellite_is_not_covered() {
        let g = relative_geometry(&sv([7678.0, 0.0, 0.0], [0.0; 3]), &sv([7578.0, 0.0, 0.0], [0.0; 3])).unwrap();
        assert!(!is_visible(&g, 25.0, &BeamModel::EarthLimb, 1200.0));
    }

    #[test]
    fn elevation_threshold_is_inclusive() {
        let mut g = RelativeGeometry {
            range: 1000.0,
            range_rate: 0.0,
            user_elevation: 24.9,
            sat_off_nadir: 10.0,
            los_clear: true,
        };
        assert!(!is_visible(&g, 25.0, &BeamModel::EarthLimb, 1200.0));
        g.user_elevation = 25.0;
        assert!(is_visible(&g, 25.0, &BeamModel::EarthLimb, 1200.0));
        g.sat_off_nadir = 10.5;
        assert!(is_visible(
            &g,
            25.0,
            &BeamModel::FixedHalfCone { half_cone: 10.5 },
            35_786.0
        ));
        g.sat_off_nadir = 10.500001;
        assert!(!is_visible(
            &g,
            25.0,
            &BeamModel::FixedHalfCone { half_cone: 10.5 },
            35_786.0
        ));
    }

    #[test]
    fn beam_validation() {
        assert!(BeamModel::FixedHalfCone { half_cone: 0.0 }.validate().is_err());
        assert!(BeamModel::FixedHalfCone { half_cone: 10.5 }.validate().is_ok());
    }

    fn point() -> impl Strategy<Value = Vector3<f64>> {
        (6500.0..45_000.0f64, -1.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, z, phi)| {
            let s = (1.0 - z * z).sqrt();
            Vector3::new(r * s * phi.cos(), r * s * phi.sin(), r * z)
        })
    }

    fn velocity() -> impl Strategy<Value = Vector3<f64>> {
        (-8.0..8.0f64, -8.0..8.0f64, -8.0..8.0f64).prop_map(|(x, y, z)| Vector3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn swap_symmetry_and_triangle(a in point(), b in point(), va in velocity(), vb in velocity()) {
            prop_assume!((a - b).norm() > 1.0);
            let ab = relative_geometry_raw(&a, &va, &b, &vb).unwrap();
            let ba = relative_geometry_raw(&b, &vb, &a, &va).unwrap();
            prop_assert!((ab.range - ba.range).abs() < 1e-9);
            prop_assert!((ab.range_rate.abs() - ba.range_rate.abs()).abs() < 1e-9);
            prop_assert_eq!(ab.los_clear, ba.los_clear);
            // Interior angles of (centre, A, B): at A = 90 + elevation, at B = off-nadir.
            let at_center = (a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos().to_degrees();
            let sum = at_center + (90.0 + ab.user_elevation) + ab.sat_off_nadir;
            prop_assert!((sum - 180.0).abs() < 1e-6, "sum {}", sum);
            prop_assert!((-90.0..=90.0).contains(&ab.user_elevation));
            prop_assert!((0.0..=180.0).contains(&ab.sat_off_nadir));
        }

        #[test]
        fn raising_min_elevation_is_monotone(a in point(), b in point(), e1 in -10.0..80.0f64, de in 0.0..30.0f64) {
            prop_assume!((a - b).norm() > 1.0);
            let g = relative_geometry_raw(&a, &Vector3::zeros(), &b, &Vector3::zeros()).unwrap();
            let alt = b.norm() - RADIUS_KM;
            if is_visible(&g, e1 + de, &BeamModel::EarthLimb, alt) {
                prop_assert!(is_visible(&g, e1, &BeamModel::EarthLimb, alt));
            }
        }

        #[test]
        fn no_coverage_from_below(user in point(), sat in point()) {
            prop_assume!(user.norm() > sat.norm() + 1.0);
            let g = relative_geometry_raw(&user, &Vector3::zeros(), &sat, &Vector3::zeros()).unwrap();
            if g.user_elevation >= 0.0 {
                prop_assert!(g.sat_off_nadir > earth_limb_half_cone(sat.norm() - RADIUS_KM));
            }
        }

        #[test]
        fn culling_bound_is_conservative(user in point(), sat in point(), min_el in -20.0..60.0f64, cone in 5.0..90.0f64) {
            prop_assume!((user - sat).norm() > 1.0);
            let g = relative_geometry_raw(&user, &Vector3::zeros(), &sat, &Vector3::zeros()).unwrap();
            let beams = [BeamModel::EarthLimb, BeamModel::FixedHalfCone { half_cone: cone }];
            for beam in beams {
                if is_visible(&g, min_el, &beam, sat.norm() - RADIUS_KM) {
                    let bound = central_angle_bound(user.norm(), sat.norm(), min_el);
                    let angle = (user.dot(&sat) / (user.norm() * sat.norm())).clamp(-1.0, 1.0).acos();
                    prop_assert!(bound.is_some_and(|b| angle <= b));
                }
            }
        }
    }
}
