//! Scenario configuration: TOML schema, defaults, resolution into concrete
//! satellites and users, and pre-run validation.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use super::bundled::{self, BUNDLED_NAMES};
use super::ScenarioError;
use crate::earth::{MU_WGS72, RADIUS_WGS72_KM, SECONDS_PER_DAY};
use crate::geometry::BeamModel;
use crate::link::DEFAULT_CARRIER_HZ;
use crate::metrics::ReportingMode;
use crate::policy::{PolicyKind, SelectionPolicy};
use crate::population::{preset, PopulationSpec, PresetName, UserSpec, UserTag};
use crate::propagation::{
    build_walker, elements_to_tle, parse_tle_file, KeplerianElements, ParseMode, ShellSpec, TwoLineElementSet,
};

pub fn default_epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2021, 3, 20, 9, 37, 29).unwrap()
}

fn default_duration() -> f64 {
    86_400.0
}

fn default_step() -> f64 {
    10.0
}

fn default_min_elevation() -> f64 {
    25.0
}

fn default_frequency() -> f64 {
    DEFAULT_CARRIER_HZ
}

fn default_output() -> PathBuf {
    PathBuf::from("output")
}

fn yes() -> bool {
    true
}

/// Propagation accuracy envelope around a TLE epoch.
pub const TLE_ENVELOPE_DAYS: i64 = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_epoch")]
    pub epoch: DateTime<Utc>,
    /// Seconds.
    #[serde(default = "default_duration")]
    pub duration: f64,
    /// Seconds.
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_min_elevation")]
    pub min_elevation: f64,
    /// Hz.
    #[serde(default = "default_frequency")]
    pub carrier_frequency: f64,
    pub constellations: Vec<ConstellationConfig>,
    pub users: UsersConfig,
    #[serde(default = "default_policy")]
    pub policy: PolicyKind,
    #[serde(default)]
    pub reporting_mode: ReportingMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_output")]
    pub output_directory: PathBuf,
    /// Skip pairs outside the conservative central-angle bound.
    #[serde(default = "yes")]
    pub culling: bool,
    #[serde(default)]
    pub headline: HeadlineConfig,
    /// Constellation groups evaluated as separate networks. Defaults to each
    /// constellation alone plus all of them combined.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub views: Option<Vec<Vec<String>>>,
    #[serde(default = "yes")]
    pub write_intervals: bool,
    #[serde(default)]
    pub tle_mode: ParseMode,
}

fn default_policy() -> PolicyKind {
    PolicyKind::Random
}

/// Which users enter the per-network headline coverage.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadlineConfig {
    /// Count the extra altitude-band strata as well.
    #[serde(default)]
    pub include_bands: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub altitude_range: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConstellationEntry")]
pub struct ConstellationConfig {
    pub name: String,
    pub source: ConstellationSource,
    /// Beam for every satellite without a per-shell override.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beam: Option<BeamModel>,
    /// Mean-anomaly shift added to every Walker shell, in degrees.
    #[serde(default)]
    pub anomaly_offset: f64,
    /// Overrides the scenario headline altitude range for this network alone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub headline_altitude_range: Option<[f64; 2]>,
}

impl ConstellationConfig {
    pub fn bundled(name: &str) -> Self {
        Self {
            name: name.to_string(),
            source: ConstellationSource::Bundled,
            beam: None,
            anomaly_offset: 0.0,
            headline_altitude_range: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstellationSource {
    /// Built-in definition looked up by the constellation name.
    Bundled,
    Walker {
        shells: Vec<ShellConfig>,
    },
    TleFile {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellConfig {
    #[serde(flatten)]
    pub shell: ShellSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beam: Option<BeamModel>,
}

/// Accepts either a bare bundled name or a full table.
#[derive(Deserialize)]
#[serde(untagged)]
enum ConstellationEntry {
    Name(String),
    Full(ConstellationTable),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstellationTable {
    name: String,
    #[serde(default)]
    source: Option<ConstellationSource>,
    #[serde(default)]
    beam: Option<BeamModel>,
    #[serde(default)]
    anomaly_offset: f64,
    #[serde(default)]
    headline_altitude_range: Option<[f64; 2]>,
}

impl TryFrom<ConstellationEntry> for ConstellationConfig {
    type Error = String;

    fn try_from(entry: ConstellationEntry) -> Result<Self, Self::Error> {
        Ok(match entry {
            ConstellationEntry::Name(name) => ConstellationConfig::bundled(&name),
            ConstellationEntry::Full(t) => ConstellationConfig {
                name: t.name,
                source: t.source.unwrap_or(ConstellationSource::Bundled),
                beam: t.beam,
                anomaly_offset: t.anomaly_offset,
                headline_altitude_range: t.headline_altitude_range,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UsersConfig {
    Population {
        #[serde(flatten)]
        spec: PopulationSpec,
        /// Multiplies every stratum count.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
        /// Falls back to the scenario seed.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Preset {
        names: Vec<PresetName>,
    },
    Explicit {
        orbits: Vec<ExplicitOrbit>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitOrbit {
    pub altitude: f64,
    pub inclination: f64,
    #[serde(default)]
    pub raan: f64,
    #[serde(default)]
    pub mean_anomaly: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn warning(message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            message: message.into(),
        }
    }

    fn error(message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{label}: {}", self.message)
    }
}

/// One satellite ready for propagation.
#[derive(Debug, Clone)]
pub struct SatelliteDef {
    pub sat_id: u32,
    pub tle: TwoLineElementSet,
    pub beam: BeamModel,
}

#[derive(Debug, Clone)]
pub struct FleetDef {
    pub name: String,
    pub satellites: Vec<SatelliteDef>,
    /// Highest apogee altitude in the fleet, km.
    pub max_altitude: f64,
    pub headline_altitude_range: Option<[f64; 2]>,
    /// Walker shells as expanded, with phasing resolved; empty for TLE sources.
    pub shells: Vec<ShellSpec>,
}

impl FleetDef {
    pub fn first_sat(&self) -> u32 {
        self.satellites.first().map_or(0, |s| s.sat_id)
    }
}

/// A group of fleets treated as one network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewDef {
    pub name: String,
    pub fleets: Vec<usize>,
}

/// Everything the engine needs, with every default and file resolved.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub fleets: Vec<FleetDef>,
    pub users: Vec<UserSpec>,
    pub views: Vec<ViewDef>,
    pub policy: SelectionPolicy,
    pub tle_warnings: Vec<String>,
}

impl Scenario {
    pub fn satellite_count(&self) -> usize {
        self.fleets.iter().map(|f| f.satellites.len()).sum()
    }

    /// Endpoint-inclusive instants: floor(duration / step) + 1.
    pub fn step_count(&self) -> u64 {
        step_count(self.config.duration, self.config.step)
    }

    pub fn instant(&self, step_index: u64) -> DateTime<Utc> {
        instant(self.config.epoch, self.config.step, step_index)
    }
}

pub fn step_count(duration: f64, step: f64) -> u64 {
    // Tolerate representation error in durations that are exact multiples.
    (duration / step + 1e-9).floor() as u64 + 1
}

pub fn instant(epoch: DateTime<Utc>, step: f64, step_index: u64) -> DateTime<Utc> {
    epoch + Duration::nanoseconds((step * step_index as f64 * 1e9).round() as i64)
}

fn apogee_altitude(tle: &TwoLineElementSet) -> f64 {
    let n = tle.mean_motion * 2.0 * std::f64::consts::PI / SECONDS_PER_DAY;
    let a = (MU_WGS72 / (n * n)).cbrt();
    a * (1.0 + tle.eccentricity) - RADIUS_WGS72_KM
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            ScenarioError::Config(msg) => ScenarioError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Minimal configuration with every default applied.
    pub fn new(constellations: Vec<ConstellationConfig>, users: UsersConfig) -> Self {
        Self {
            epoch: default_epoch(),
            duration: default_duration(),
            step: default_step(),
            min_elevation: default_min_elevation(),
            carrier_frequency: default_frequency(),
            constellations,
            users,
            policy: default_policy(),
            reporting_mode: ReportingMode::default(),
            seed: None,
            output_directory: default_output(),
            culling: true,
            headline: HeadlineConfig::default(),
            views: None,
            write_intervals: true,
            tle_mode: ParseMode::default(),
        }
    }

    fn resolved_views(&self) -> Result<Vec<ViewDef>, ScenarioError> {
        let names: Vec<&str> = self.constellations.iter().map(|c| c.name.as_str()).collect();
        let groups: Vec<Vec<String>> = match &self.views {
            Some(groups) => groups.clone(),
            None => {
                let mut groups: Vec<Vec<String>> = names.iter().map(|n| vec![n.to_string()]).collect();
                if names.len() > 1 {
                    groups.push(names.iter().map(|n| n.to_string()).collect());
                }
                groups
            }
        };
        groups
            .into_iter()
            .map(|group| {
                let mut fleets = BTreeSet::new();
                for member in &group {
                    let idx = names.iter().position(|n| n == member).ok_or_else(|| {
                        ScenarioError::Config(format!("view refers to unknown constellation '{member}'"))
                    })?;
                    fleets.insert(idx);
                }
                if fleets.is_empty() {
                    return Err(ScenarioError::Config("empty view".into()));
                }
                let fleets: Vec<usize> = fleets.into_iter().collect();
                let name = fleets.iter().map(|&i| names[i]).collect::<Vec<_>>().join("+");
                Ok(ViewDef { name, fleets })
            })
            .collect()
    }

    fn resolve_fleets(&self, base_dir: &Path) -> Result<(Vec<FleetDef>, Vec<String>), ScenarioError> {
        let mut fleets = Vec::new();
        let mut warnings = Vec::new();
        let mut next_id = 0u32;
        for c in &self.constellations {
            let default_beam = c.beam.unwrap_or_else(|| bundled::default_beam(&c.name));
            if let Some(beam) = &c.beam {
                beam.validate()
                    .map_err(|e| ScenarioError::Config(format!("{}: {e}", c.name)))?;
            }
            let mut sats: Vec<(TwoLineElementSet, BeamModel)> = Vec::new();
            let mut shells = Vec::new();
            let walker = |shell_configs: &[ShellConfig], shells: &mut Vec<ShellSpec>, sats: &mut Vec<_>| {
                for sc in shell_configs {
                    let mut shell = sc.shell;
                    shell.anomaly_offset += c.anomaly_offset;
                    shell.inter_plane_phase = Some(shell.resolved_inter_plane_phase());
                    let beam = sc.beam.unwrap_or(default_beam);
                    beam.validate()
                        .map_err(|e| ScenarioError::Config(format!("{}: {e}", c.name)))?;
                    let elements = build_walker(&shell, self.epoch).map_err(|source| ScenarioError::Walker {
                        constellation: c.name.clone(),
                        source,
                    })?;
                    shells.push(shell);
                    for e in elements {
                        sats.push((e, beam));
                    }
                }
                Ok::<_, ScenarioError>(())
            };
            let mut walker_elements: Vec<(KeplerianElements, BeamModel)> = Vec::new();
            match &c.source {
                ConstellationSource::Bundled => match c.name.as_str() {
                    bundled::ONEWEB | bundled::STARLINK => {
                        let shell_specs = if c.name == bundled::ONEWEB {
                            bundled::oneweb_shells()
                        } else {
                            bundled::starlink_shells()
                        };
                        let configs: Vec<ShellConfig> = shell_specs
                            .into_iter()
                            .map(|shell| ShellConfig { shell, beam: None })
                            .collect();
                        walker(&configs, &mut shells, &mut walker_elements)?;
                    }
                    bundled::EUTELSAT_GEO => {
                        sats.extend(bundled::eutelsat_catalog().into_iter().map(|t| (t, default_beam)));
                    }
                    other => {
                        return Err(ScenarioError::Config(format!(
                            "unknown bundled constellation '{other}' (available: {})",
                            BUNDLED_NAMES.join(", ")
                        )))
                    }
                },
                ConstellationSource::Walker { shells: configs } => {
                    walker(configs, &mut shells, &mut walker_elements)?;
                }
                ConstellationSource::TleFile { path } => {
                    let full = if path.is_absolute() {
                        path.clone()
                    } else {
                        base_dir.join(path)
                    };
                    let text = std::fs::read_to_string(&full).map_err(|source| ScenarioError::Io {
                        path: full.clone(),
                        source,
                    })?;
                    let parsed = parse_tle_file(&text, self.tle_mode).map_err(|source| ScenarioError::Tle {
                        path: full.clone(),
                        source,
                    })?;
                    for p in parsed {
                        warnings.extend(p.warnings.iter().map(|w| format!("{}: {w}", full.display())));
                        sats.push((p.tle, default_beam));
                    }
                }
            }
            for (e, beam) in walker_elements {
                let tle =
                    elements_to_tle(&e, next_id + sats.len() as u32 + 1).map_err(|source| ScenarioError::Walker {
                        constellation: c.name.clone(),
                        source,
                    })?;
                sats.push((tle, beam));
            }
            if sats.is_empty() {
                return Err(ScenarioError::Config(format!(
                    "constellation '{}' has no satellites",
                    c.name
                )));
            }
            let max_altitude = sats.iter().map(|(t, _)| apogee_altitude(t)).fold(f64::MIN, f64::max);
            let satellites = sats
                .into_iter()
                .map(|(tle, beam)| {
                    let sat = SatelliteDef {
                        sat_id: next_id,
                        tle,
                        beam,
                    };
                    next_id += 1;
                    sat
                })
                .collect();
            fleets.push(FleetDef {
                name: c.name.clone(),
                satellites,
                max_altitude,
                headline_altitude_range: c.headline_altitude_range.or(self.headline.altitude_range),
                shells,
            });
        }
        Ok((fleets, warnings))
    }

    fn resolve_users(&self) -> Result<Vec<UserSpec>, ScenarioError> {
        Ok(match &self.users {
            UsersConfig::Population { spec, scale, seed } => {
                let seed = seed
                    .or(self.seed)
                    .ok_or_else(|| ScenarioError::Config("population users need a seed".into()))?;
                let spec = scale.map_or_else(|| spec.clone(), |s| spec.scaled(s));
                spec.generate(seed, self.epoch)?
            }
            UsersConfig::Preset { names } => names
                .iter()
                .enumerate()
                .map(|(i, name)| UserSpec {
                    user_id: i as u32,
                    ..preset(*name, self.epoch)
                })
                .collect(),
            UsersConfig::Explicit { orbits } => orbits
                .iter()
                .enumerate()
                .map(|(i, o)| UserSpec {
                    user_id: i as u32,
                    elements: KeplerianElements::circular(
                        o.altitude,
                        o.inclination,
                        o.raan,
                        o.mean_anomaly,
                        self.epoch,
                    ),
                    tag: UserTag::Explicit,
                })
                .collect(),
        })
    }

    fn basic_errors(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if !(self.step > 0.0) {
            out.push(Diagnostic::error(format!("step must be positive, got {} s", self.step)));
        }
        if !(self.duration >= self.step) {
            out.push(Diagnostic::error(format!(
                "duration {} s is shorter than the step {} s",
                self.duration, self.step
            )));
        }
        if !(-90.0..=90.0).contains(&self.min_elevation) {
            out.push(Diagnostic::error(format!(
                "min_elevation {} outside [-90, 90]",
                self.min_elevation
            )));
        }
        if !(self.carrier_frequency > 0.0) {
            out.push(Diagnostic::error(format!(
                "carrier_frequency must be positive, got {} Hz",
                self.carrier_frequency
            )));
        }
        if self.constellations.is_empty() {
            out.push(Diagnostic::error("at least one constellation is required"));
        }
        let mut seen = BTreeSet::new();
        for c in &self.constellations {
            if !seen.insert(c.name.as_str()) {
                out.push(Diagnostic::error(format!("duplicate constellation name '{}'", c.name)));
            }
        }
        let no_users = match &self.users {
            UsersConfig::Population { spec, scale, .. } => {
                scale.map_or_else(|| spec.clone(), |s| spec.scaled(s)).total() == 0
            }
            UsersConfig::Preset { names } => names.is_empty(),
            UsersConfig::Explicit { orbits } => orbits.is_empty(),
        };
        if no_users {
            out.push(Diagnostic::error("at least one user is required"));
        }
        if self.policy == PolicyKind::Random && self.seed.is_none() {
            out.push(Diagnostic::error("the random policy needs a seed"));
        }
        out
    }

    /// Resolves files, satellites and users. Fails on the first error-level
    /// diagnostic.
    pub fn resolve(&self, base_dir: &Path) -> Result<Scenario, ScenarioError> {
        let errors: Vec<String> = self.basic_errors().into_iter().map(|d| d.message).collect();
        if !errors.is_empty() {
            return Err(ScenarioError::Config(errors.join("; ")));
        }
        let (fleets, tle_warnings) = self.resolve_fleets(base_dir)?;
        let users = self.resolve_users()?;
        let views = self.resolved_views()?;
        let policy = match self.policy {
            PolicyKind::Closest => SelectionPolicy::closest(),
            PolicyKind::Random => SelectionPolicy::random(self.seed.unwrap_or_default()),
        };
        let mut config = self.clone();
        if let UsersConfig::Population { seed, .. } = &mut config.users {
            *seed = seed.or(self.seed);
        }
        config.views = Some(
            views
                .iter()
                .map(|v| v.fleets.iter().map(|&i| self.constellations[i].name.clone()).collect())
                .collect(),
        );
        Ok(Scenario {
            config,
            fleets,
            users,
            views,
            policy,
            tle_warnings,
        })
    }

    /// Diagnostics without running anything. Never fails; problems that stop
    /// resolution are reported as errors.
    pub fn validate(&self, base_dir: &Path) -> Vec<Diagnostic> {
        let mut out = self.basic_errors();
        if out.iter().any(|d| d.severity == Severity::Error) {
            return out;
        }
        if (self.duration / self.step - (self.duration / self.step).round()).abs() > 1e-9 {
            out.push(Diagnostic::warning(format!(
                "step {} s does not divide duration {} s; the last instant is at {} s",
                self.step,
                self.duration,
                (step_count(self.duration, self.step) - 1) as f64 * self.step
            )));
        }
        if !(1e9..=50e9).contains(&self.carrier_frequency) {
            out.push(Diagnostic::warning(format!(
                "carrier frequency {} Hz is outside 1-50 GHz",
                self.carrier_frequency
            )));
        }
        let scenario = match self.resolve(base_dir) {
            Ok(s) => s,
            Err(e) => {
                out.push(Diagnostic::error(e.to_string()));
                return out;
            }
        };
        out.extend(scenario.tle_warnings.iter().map(|w| Diagnostic::warning(w.clone())));
        let start = self.epoch;
        let end = scenario.instant(scenario.step_count() - 1);
        for fleet in &scenario.fleets {
            let stale = fleet
                .satellites
                .iter()
                .filter(|s| {
                    let span = (start - s.tle.epoch).abs().max((end - s.tle.epoch).abs());
                    span > Duration::days(TLE_ENVELOPE_DAYS)
                })
                .count();
            if stale > 0 {
                out.push(Diagnostic::warning(format!(
                    "{}: {stale} element sets are propagated more than {TLE_ENVELOPE_DAYS} days from their epoch",
                    fleet.name
                )));
            }
        }
        // A satellite below the user's radius is under its local horizon.
        if self.min_elevation >= 0.0 {
            let ceiling = scenario.fleets.iter().map(|f| f.max_altitude).fold(f64::MIN, f64::max);
            let above: Vec<&UserSpec> = scenario
                .users
                .iter()
                .filter(|u| u.elements.altitude() > ceiling)
                .collect();
            if !above.is_empty() {
                out.push(Diagnostic::warning(format!(
                    "{} user(s) orbit above every constellation (highest at {:.1} km): no coverage geometrically possible",
                    above.len(),
                    ceiling
                )));
            }
        }
        out
    }
}
