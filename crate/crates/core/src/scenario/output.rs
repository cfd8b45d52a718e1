//! Result documents and the files written for a run.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::SecondsFormat;
use serde::{Deserialize, Serialize};

use super::config::{Scenario, ScenarioConfig, UsersConfig, ViewDef};
use super::engine::{RunOutcome, UserOutcome};
use super::ScenarioError;
use crate::geometry::BeamModel;
use crate::metrics::{
    bin_grid, CoverageSummary, Grid, GridMetric, DEFAULT_ALTITUDE_BIN_KM, DEFAULT_INCLINATION_BIN_DEG,
};
use crate::population::{population_csv, UserTag};
use crate::propagation::ShellSpec;

pub const SOFTWARE_NAME: &str = env!("CARGO_PKG_NAME");
pub const SOFTWARE_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const POPULATION_FILE: &str = "population.csv";
pub const SATELLITES_FILE: &str = "satellites.csv";
pub const INTERVALS_CSV_HEADER: &str = "user_id,kind,sat_id,start_iso,end_iso,duration_min";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserResult {
    pub user_id: u32,
    pub tag: UserTag,
    pub alt_km: f64,
    pub inc_deg: f64,
    pub raan_deg: f64,
    pub ma_deg: f64,
    /// Counted in the view's headline aggregate.
    pub headline: bool,
    pub summary: CoverageSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageShare {
    pub name: String,
    /// Percent of covered time served by this fleet, over headline users.
    pub percent: f64,
}

/// Network-level statistics over the headline users of one view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewAggregate {
    pub users: usize,
    pub headline_users: usize,
    /// Mean per-user coverage, percent.
    pub coverage_percent: Option<f64>,
    pub fspl_min_db: Option<f64>,
    /// Sample-weighted mean.
    pub fspl_avg_db: Option<f64>,
    pub fspl_max_db: Option<f64>,
    pub max_doppler_khz: Option<f64>,
    pub max_doppler_rate_khz_s: Option<f64>,
    /// Mean over all accesses of all headline users.
    pub avg_access_min: Option<f64>,
    pub max_access_min: Option<f64>,
    pub visible_min: Option<u32>,
    pub visible_avg: Option<f64>,
    pub visible_max: Option<u32>,
    pub passes: u64,
    pub passes_under_1_min: Option<f64>,
    pub passes_under_5_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fleet_usage: Vec<UsageShare>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewResult {
    pub name: String,
    pub constellations: Vec<String>,
    pub aggregate: ViewAggregate,
    pub users: Vec<UserResult>,
}

/// Contents of `summary.json`: deterministic for a given configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDocument {
    pub software: String,
    pub version: String,
    pub config: ScenarioConfig,
    pub steps: u64,
    pub views: Vec<ViewResult>,
}

impl SummaryDocument {
    pub fn view(&self, name: &str) -> Option<&ViewResult> {
        self.views.iter().find(|v| v.name == name)
    }

    pub fn is_monte_carlo(&self) -> bool {
        self.views
            .iter()
            .flat_map(|v| &v.users)
            .any(|u| matches!(u.tag, UserTag::Montecarlo | UserTag::ShellBand))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstellationManifest {
    pub name: String,
    pub satellites: usize,
    pub first_sat_id: u32,
    pub max_altitude_km: f64,
    pub beams: Vec<BeamModel>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shells: Vec<ShellSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub software: String,
    pub version: String,
    pub seed: Option<u64>,
    pub carrier_frequency_hz: f64,
    pub config: ScenarioConfig,
    pub constellations: Vec<ConstellationManifest>,
    pub total_satellites: usize,
    pub users: usize,
    pub steps: u64,
    pub pair_evaluations: u64,
    pub exact_evaluations: u64,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub files: Vec<String>,
}

fn headline_range(scenario: &Scenario, view: &ViewDef) -> Option<[f64; 2]> {
    match view.fleets.as_slice() {
        [single] => scenario.fleets[*single].headline_altitude_range,
        _ => scenario.config.headline.altitude_range,
    }
}

fn in_headline(scenario: &Scenario, view: &ViewDef, tag: UserTag, altitude: f64) -> bool {
    if tag == UserTag::ShellBand && !scenario.config.headline.include_bands {
        return false;
    }
    headline_range(scenario, view).is_none_or(|[lo, hi]| (lo..=hi).contains(&altitude))
}

fn min_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) | (None, x) => x,
    }
}

fn max_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) | (None, x) => x,
    }
}

pub fn aggregate(users: &[&UserResult]) -> ViewAggregate {
    let n = users.len();
    let mut agg = ViewAggregate {
        users: 0,
        headline_users: n,
        coverage_percent: (n > 0)
            .then(|| 100.0 * users.iter().map(|u| u.summary.coverage_probability).sum::<f64>() / n as f64),
        fspl_min_db: None,
        fspl_avg_db: None,
        fspl_max_db: None,
        max_doppler_khz: None,
        max_doppler_rate_khz_s: None,
        avg_access_min: None,
        max_access_min: None,
        visible_min: users.iter().map(|u| u.summary.visible_min).min(),
        visible_avg: (n > 0).then(|| users.iter().map(|u| u.summary.visible_avg).sum::<f64>() / n as f64),
        visible_max: users.iter().map(|u| u.summary.visible_max).max(),
        passes: 0,
        passes_under_1_min: None,
        passes_under_5_min: None,
        fleet_usage: Vec::new(),
    };
    let (mut fspl_sum, mut fspl_n) = (0.0, 0u64);
    let (mut access_sum, mut access_n) = (0.0, 0u64);
    let (mut under1, mut under5) = (0u64, 0u64);
    let mut served: Vec<(String, u64)> = Vec::new();
    let mut covered = 0u64;
    for u in users {
        let s = &u.summary;
        agg.fspl_min_db = min_opt(agg.fspl_min_db, s.fspl_min_db);
        agg.fspl_max_db = max_opt(agg.fspl_max_db, s.fspl_max_db);
        if let Some(avg) = s.fspl_avg_db {
            fspl_sum += avg * s.fspl_samples as f64;
            fspl_n += s.fspl_samples;
        }
        agg.max_doppler_khz = max_opt(agg.max_doppler_khz, s.max_doppler_khz);
        agg.max_doppler_rate_khz_s = max_opt(agg.max_doppler_rate_khz_s, s.max_doppler_rate_khz_s);
        if let Some(avg) = s.avg_access_min {
            access_sum += avg * s.access_count as f64;
            access_n += s.access_count;
        }
        agg.max_access_min = max_opt(agg.max_access_min, s.max_access_min);
        agg.passes += s.pass_count;
        under1 += s.pass_duration_hist_min.iter().take(1).sum::<u64>();
        under5 += s.pass_duration_hist_min.iter().take(5).sum::<u64>();
        covered += s.covered_steps;
        for usage in &s.fleet_usage {
            match served.iter_mut().find(|(name, _)| *name == usage.name) {
                Some(entry) => entry.1 += usage.served_steps,
                None => served.push((usage.name.clone(), usage.served_steps)),
            }
        }
    }
    if fspl_n > 0 {
        agg.fspl_avg_db = Some(
            (fspl_sum / fspl_n as f64).clamp(agg.fspl_min_db.unwrap_or(f64::MIN), agg.fspl_max_db.unwrap_or(f64::MAX)),
        );
    }
    if access_n > 0 {
        agg.avg_access_min = Some(access_sum / access_n as f64);
    }
    if agg.passes > 0 {
        agg.passes_under_1_min = Some(under1 as f64 / agg.passes as f64);
        agg.passes_under_5_min = Some(under5 as f64 / agg.passes as f64);
    }
    if covered > 0 {
        agg.fleet_usage = served
            .into_iter()
            .map(|(name, steps)| UsageShare {
                name,
                percent: 100.0 * steps as f64 / covered as f64,
            })
            .collect();
    }
    agg
}

/// Builds the summary document from a finished run.
pub fn summary_document(scenario: &Scenario, outcome: &RunOutcome) -> SummaryDocument {
    let views = outcome
        .views
        .iter()
        .map(|vo| {
            let users: Vec<UserResult> = scenario
                .users
                .iter()
                .zip(&vo.users)
                .map(|(spec, result)| {
                    let e = &spec.elements;
                    UserResult {
                        user_id: spec.user_id,
                        tag: spec.tag,
                        alt_km: e.altitude(),
                        inc_deg: e.inclination,
                        raan_deg: e.raan,
                        ma_deg: e.mean_anomaly,
                        headline: in_headline(scenario, &vo.view, spec.tag, e.altitude()),
                        summary: result.summary.clone(),
                    }
                })
                .collect();
            let headline: Vec<&UserResult> = users.iter().filter(|u| u.headline).collect();
            let mut aggregate = aggregate(&headline);
            aggregate.users = users.len();
            ViewResult {
                name: vo.view.name.clone(),
                constellations: vo
                    .view
                    .fleets
                    .iter()
                    .map(|&f| scenario.fleets[f].name.clone())
                    .collect(),
                aggregate,
                users,
            }
        })
        .collect();
    SummaryDocument {
        software: SOFTWARE_NAME.to_string(),
        version: SOFTWARE_VERSION.to_string(),
        config: scenario.config.clone(),
        steps: outcome.steps,
        views,
    }
}

/// Every grid metric for one view, concatenated under one CSV header.
pub fn view_grids(view: &ViewResult) -> Vec<Grid> {
    let users: Vec<(f64, f64)> = view.users.iter().map(|u| (u.alt_km, u.inc_deg)).collect();
    let summaries: Vec<CoverageSummary> = view.users.iter().map(|u| u.summary.clone()).collect();
    GridMetric::ALL
        .iter()
        .map(|&m| {
            bin_grid(
                &users,
                &summaries,
                DEFAULT_ALTITUDE_BIN_KM,
                DEFAULT_INCLINATION_BIN_DEG,
                m,
            )
            .expect("default bins are positive")
        })
        .collect()
}

pub fn grids_csv(grids: &[Grid]) -> String {
    let mut out = String::from(Grid::CSV_HEADER);
    out.push('\n');
    for g in grids {
        out.extend(g.to_csv().lines().skip(1).map(|l| format!("{l}\n")));
    }
    out
}

pub fn intervals_csv(scenario: &Scenario, users: &[UserOutcome]) -> String {
    let iso = |step: u64| scenario.instant(step).to_rfc3339_opts(SecondsFormat::Millis, true);
    let mut out = String::from(INTERVALS_CSV_HEADER);
    out.push('\n');
    for (spec, result) in scenario.users.iter().zip(users) {
        for a in &result.accesses {
            out.push_str(&format!(
                "{},access,,{},{},{:.4}\n",
                spec.user_id,
                iso(a.start_step),
                iso(a.end_step),
                a.duration_min
            ));
        }
        for p in &result.passes {
            out.push_str(&format!(
                "{},pass,{},{},{},{:.4}\n",
                spec.user_id,
                p.sat_id,
                iso(p.start_step),
                iso(p.end_step),
                p.duration_min
            ));
        }
    }
    out
}

pub fn satellites_csv(scenario: &Scenario) -> String {
    let mut out =
        String::from("sat_id,constellation,catalog_id,name,inc_deg,raan_deg,ecc,argp_deg,ma_deg,mean_motion_rev_day\n");
    for fleet in &scenario.fleets {
        for s in &fleet.satellites {
            let t = &s.tle;
            out.push_str(&format!(
                "{},{},{},{},{:.4},{:.4},{:.7},{:.4},{:.4},{:.8}\n",
                s.sat_id,
                fleet.name,
                t.catalog_id,
                t.name.replace(',', " "),
                t.inclination,
                t.raan,
                t.eccentricity,
                t.arg_perigee,
                t.mean_anomaly,
                t.mean_motion
            ));
        }
    }
    out
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> ScenarioError + '_ {
    move |source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Creates the directory and proves it is writable.
pub fn prepare_output_dir(dir: &Path) -> Result<(), ScenarioError> {
    let unwritable = |source| ScenarioError::OutputDir {
        path: dir.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(unwritable)?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"").map_err(unwritable)?;
    fs::remove_file(&probe).map_err(unwritable)?;
    Ok(())
}

fn write(dir: &Path, name: &str, contents: &str, files: &mut Vec<String>) -> Result<(), ScenarioError> {
    let path: PathBuf = dir.join(name);
    fs::write(&path, contents).map_err(io_error(&path))?;
    files.push(name.to_string());
    Ok(())
}

/// Writes every output file and returns the manifest (also written).
pub fn write_outputs(scenario: &Scenario, outcome: &RunOutcome, dir: &Path) -> Result<RunManifest, ScenarioError> {
    let mut files = Vec::new();
    let document = summary_document(scenario, outcome);
    let json = serde_json::to_string_pretty(&document)?;
    write(dir, SUMMARY_FILE, &(json + "\n"), &mut files)?;
    write(dir, POPULATION_FILE, &population_csv(&scenario.users), &mut files)?;
    write(dir, SATELLITES_FILE, &satellites_csv(scenario), &mut files)?;
    if scenario.config.write_intervals {
        for vo in &outcome.views {
            let name = format!("intervals_{}.csv", file_safe(&vo.view.name));
            write(dir, &name, &intervals_csv(scenario, &vo.users), &mut files)?;
        }
    }
    if matches!(scenario.config.users, UsersConfig::Population { .. }) {
        for view in &document.views {
            let name = format!("grid_{}.csv", file_safe(&view.name));
            write(dir, &name, &grids_csv(&view_grids(view)), &mut files)?;
        }
    }
    let satellites = scenario.satellite_count();
    let manifest = RunManifest {
        software: SOFTWARE_NAME.to_string(),
        version: SOFTWARE_VERSION.to_string(),
        seed: scenario.config.seed,
        carrier_frequency_hz: scenario.config.carrier_frequency,
        config: scenario.config.clone(),
        constellations: scenario
            .fleets
            .iter()
            .map(|f| {
                let mut beams: Vec<BeamModel> = Vec::new();
                for s in &f.satellites {
                    if !beams.contains(&s.beam) {
                        beams.push(s.beam);
                    }
                }
                ConstellationManifest {
                    name: f.name.clone(),
                    satellites: f.satellites.len(),
                    first_sat_id: f.first_sat(),
                    max_altitude_km: f.max_altitude,
                    beams,
                    shells: f.shells.clone(),
                }
            })
            .collect(),
        total_satellites: satellites,
        users: scenario.users.len(),
        steps: outcome.steps,
        pair_evaluations: scenario.users.len() as u64 * satellites as u64 * outcome.steps,
        exact_evaluations: outcome.exact_evaluations,
        threads: outcome.threads,
        wall_clock_seconds: outcome.elapsed_seconds,
        files: {
            let mut all = files.clone();
            all.push(MANIFEST_FILE.to_string());
            all
        },
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    write(dir, MANIFEST_FILE, &(json + "\n"), &mut files)?;
    Ok(manifest)
}
