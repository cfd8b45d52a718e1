//! Helpers shared by the integration test targets.

#![allow(dead_code)]

use serde::Deserialize;
use spacelink::propagation::{parse_tle, ParseMode, Propagator};

#[derive(Deserialize)]
#[serde(untagged)]
enum State {
    Ok {
        time: f64,
        position: [f64; 3],
        velocity: [f64; 3],
    },
    Err {
        time: f64,
        error: String,
    },
}

#[derive(Deserialize)]
struct Case {
    line1: String,
    line2: String,
    states: Vec<State>,
}

#[derive(Deserialize)]
struct Cases {
    list: Vec<Case>,
}

/// Outcome of replaying the SGP4 verification ephemerides.
#[derive(Debug, Default)]
pub struct Sgp4Replay {
    pub states: usize,
    pub expected_errors: usize,
    pub max_position_error_km: f64,
    pub max_velocity_error_km_s: f64,
    /// Descriptions of cases that did not behave as published.
    pub mismatches: Vec<String>,
}

/// Propagates every published state (Vallado's `tcppver` set,
/// AFSPC-compatible mode) through the crate's own parser and propagator.
pub fn replay_sgp4_verification() -> Sgp4Replay {
    let cases: Cases = toml::from_str(include_str!("../data/sgp4_verification.toml")).unwrap();
    let mut out = Sgp4Replay::default();
    for case in &cases.list {
        let text = format!("{}\n{}\n", case.line1, case.line2);
        let tle = match parse_tle(&text, ParseMode::Lenient) {
            Ok(p) => p.tle,
            Err(e) => {
                out.mismatches.push(format!("{}: {e}", case.line1));
                continue;
            }
        };
        let propagator = match Propagator::new(&tle) {
            Ok(p) => p,
            Err(e) => {
                out.mismatches.push(format!("{}: {e}", tle.catalog_id));
                continue;
            }
        };
        for state in &case.states {
            match state {
                State::Ok {
                    time,
                    position,
                    velocity,
                } => match propagator.propagate_minutes(*time) {
                    Ok((r, v)) => {
                        let dr = (0..3).map(|i| (r[i] - position[i]).powi(2)).sum::<f64>().sqrt();
                        let dv = (0..3).map(|i| (v[i] - velocity[i]).powi(2)).sum::<f64>().sqrt();
                        out.max_position_error_km = out.max_position_error_km.max(dr);
                        out.max_velocity_error_km_s = out.max_velocity_error_km_s.max(dv);
                        out.states += 1;
                    }
                    Err(e) => out.mismatches.push(format!("{} t={time}: {e}", tle.catalog_id)),
                },
                State::Err { time, error } => {
                    if propagator.propagate_minutes(*time).is_ok() {
                        out.mismatches
                            .push(format!("{} t={time}: expected '{error}'", tle.catalog_id));
                    }
                    out.expected_errors += 1;
                }
            }
        }
    }
    out
}
