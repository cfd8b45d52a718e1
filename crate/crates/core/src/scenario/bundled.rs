//! Built-in constellation definitions: the OneWeb and Starlink Walker shells
//! and a reconstructed Eutelsat GEO catalog.

use chrono::{DateTime, Utc};

use crate::earth::{MU_WGS72, SECONDS_PER_DAY};
use crate::geometry::BeamModel;
use crate::propagation::{gmst, parse_tle_file, ParseMode, ShellSpec, TwoLineElementSet};

pub const ONEWEB: &str = "oneweb";
pub const STARLINK: &str = "starlink";
pub const EUTELSAT_GEO: &str = "eutelsat_geo";

pub const BUNDLED_NAMES: [&str; 3] = [ONEWEB, STARLINK, EUTELSAT_GEO];

/// Half-cone of the wide GEO Ku-band beams.
pub const GEO_HALF_CONE_DEG: f64 = 10.5;

pub fn oneweb_shells() -> Vec<ShellSpec> {
    vec![
        ShellSpec::new(1200.0, 87.9, 12, 49),
        ShellSpec::new(1200.0, 55.0, 8, 16),
    ]
}

pub fn starlink_shells() -> Vec<ShellSpec> {
    vec![
        ShellSpec::new(540.0, 53.2, 72, 22),
        ShellSpec::new(550.0, 53.0, 72, 22),
        ShellSpec::new(560.0, 97.6, 6, 58),
        ShellSpec::new(560.0, 97.6, 4, 43),
        ShellSpec::new(570.0, 70.0, 36, 20),
    ]
}

pub fn default_beam(name: &str) -> BeamModel {
    if name == EUTELSAT_GEO {
        BeamModel::FixedHalfCone {
            half_cone: GEO_HALF_CONE_DEG,
        }
    } else {
        BeamModel::EarthLimb
    }
}

/// Shipped GEO catalog, generated by [`reconstruct_eutelsat`] at the default
/// scenario epoch.
pub const EUTELSAT_TLE: &str = include_str!("../../data/eutelsat_geo.tle");

pub fn eutelsat_catalog() -> Vec<TwoLineElementSet> {
    parse_tle_file(EUTELSAT_TLE, ParseMode::Strict)
        .expect("bundled catalog parses")
        .into_iter()
        .map(|p| p.tle)
        .collect()
}

struct GeoSlot {
    name: &'static str,
    catalog_id: u32,
    designator: &'static str,
    inclination: f64,
    /// Degrees east.
    longitude: f64,
}

const fn slot(
    name: &'static str,
    catalog_id: u32,
    designator: &'static str,
    inclination: f64,
    longitude: f64,
) -> GeoSlot {
    GeoSlot {
        name,
        catalog_id,
        designator,
        inclination,
        longitude,
    }
}

// Names, catalog numbers and designators are kept as given;
// orbital slots follow the satellite names. Inclinations are kept where the
// printed value is plausible for a GEO platform.
const GEO_SLOTS: [GeoSlot; 23] = [
    slot("EUTELSAT 133 WEST A", 26719, "01011A", 0.05, -133.0),
    slot("EUTELSAT 5 WEST A", 27460, "02035A", 2.4102, -5.0),
    slot("EUTELSAT 7A", 28187, "04008A", 2.2051, 7.0),
    slot("EUTELSAT 33E", 13750, "06008B", 0.0497, 33.0),
    slot("EUTELSAT 10A", 14710, "09016A", 0.0489, 10.0),
    slot("EUTELSAT 36B", 16010, "09085A", 0.0666, 36.0),
    slot("EUTELSAT 7 WEST A", 17810, "11057A", 0.0592, -7.0),
    slot("EUTELSAT 16A", 17836, "11057A", 0.0666, 16.0),
    slot("EUTELSAT 21B", 18992, "12026B", 0.0672, 21.5),
    slot("EUTELSAT 70B", 19020, "12089A", 0.0681, 70.5),
    slot("EUTELSAT 117 WEST A", 19122, "13012A", 0.0268, -116.8),
    slot("EUTELSAT 31B", 19163, "13022A", 0.0687, 31.0),
    slot("EUTELSAT 3B", 19773, "14030A", 0.0618, 3.0),
    slot("EUTELSAT 11 WEST B", 40235, "15010B", 0.0034, -114.9),
    slot("EUTELSAT 6 WEST B", 40875, "15039B", 0.0642, -8.0),
    slot("EUTELSAT 6S WEST A", 41382, "16014A", 0.0476, -65.0),
    slot("EUTELSAT 117 WEST B", 41589, "16038B", 0.0072, -117.0),
    slot("EUTELSAT 172B", 42741, "17029B", 0.0434, 172.0),
    slot("EUTELSAT 7C", 44340, "19034B", 0.0698, 7.0),
    slot("EUTELSAT QUANTUM", 49056, "21069B", 0.0150, 48.0),
    slot("EUTELSAT EXPRESS-AMU1", 41191, "15082A", 0.0184, 36.0),
    slot("EUTELSAT EXPRESS-AM6", 40277, "14064A", 0.0301, 53.0),
    slot("EUTELSAT 174A", 28924, "05052A", 0.6057, 174.0),
];

/// Earth rotation rate (rad/s) used for the geostationary mean motion.
const EARTH_ROTATION_RAD_S: f64 = 7.292_115_855_3e-5;

/// Circular, drag-free GEO elements placing each platform over its nominal
/// longitude at `epoch`.
pub fn reconstruct_eutelsat(epoch: DateTime<Utc>) -> Vec<TwoLineElementSet> {
    let theta = gmst(epoch);
    let mean_motion = EARTH_ROTATION_RAD_S * SECONDS_PER_DAY / (2.0 * std::f64::consts::PI);
    debug_assert!(((MU_WGS72 / EARTH_ROTATION_RAD_S.powi(2)).cbrt() - 42_164.7).abs() < 1.0);
    GEO_SLOTS
        .iter()
        .map(|s| TwoLineElementSet {
            name: s.name.to_string(),
            catalog_id: s.catalog_id,
            classification: 'U',
            international_designator: s.designator.to_string(),
            epoch,
            mean_motion_dot: 0.0,
            mean_motion_ddot: 0.0,
            bstar: 0.0,
            ephemeris_type: 0,
            element_set_number: 999,
            inclination: s.inclination,
            raan: 0.0,
            eccentricity: 0.0,
            arg_perigee: 0.0,
            mean_anomaly: (theta + s.longitude).rem_euclid(360.0),
            mean_motion,
            revolution_number: 0,
        })
        .collect()
}

/// File text for a catalog, with a provenance comment.
pub fn catalog_text(tles: &[TwoLineElementSet]) -> String {
    let mut out = String::from(
        "# Eutelsat GEO fleet, reconstructed: circular orbits over the nominal slot\n\
         # longitudes; names and catalog numbers are kept as given.\n",
    );
    for tle in tles {
        out.push_str(&tle.to_text().expect("GEO elements are encodable"));
    }
    out
}
