//! End-to-end scenario runs: configuration, the time loop and persisted
//! outputs.

mod bundled;
mod config;
mod engine;
mod output;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use bundled::{
    catalog_text, default_beam, eutelsat_catalog, oneweb_shells, reconstruct_eutelsat, starlink_shells, BUNDLED_NAMES,
    EUTELSAT_GEO, GEO_HALF_CONE_DEG, ONEWEB, STARLINK,
};
pub use config::{
    default_epoch, instant, step_count, ConstellationConfig, ConstellationSource, Diagnostic, ExplicitOrbit, FleetDef,
    HeadlineConfig, SatelliteDef, Scenario, ScenarioConfig, Severity, ShellConfig, UsersConfig, ViewDef,
    TLE_ENVELOPE_DAYS,
};
pub use engine::{
    run_scenario, visibility_trace, RunOptions, RunOutcome, UserOutcome, ViewOutcome, DEFAULT_BLOCK_STEPS,
};
pub use output::{
    aggregate, grids_csv, intervals_csv, prepare_output_dir, satellites_csv, summary_document, view_grids,
    write_outputs, ConstellationManifest, RunManifest, SummaryDocument, UsageShare, UserResult, ViewAggregate,
    ViewResult, INTERVALS_CSV_HEADER, MANIFEST_FILE, SATELLITES_FILE, SOFTWARE_NAME, SOFTWARE_VERSION, SUMMARY_FILE,
};

use crate::population::PopulationError;
use crate::propagation::{PropagationError, TleError, WalkerError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("output directory {} is not writable: {source}", path.display())]
    OutputDir { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Tle { path: PathBuf, source: TleError },
    #[error("constellation {constellation}: {source}")]
    Walker { constellation: String, source: WalkerError },
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error(transparent)]
    Population(#[from] PopulationError),
    #[error("cannot serialize results: {0}")]
    Json(#[from] serde_json::Error),
}

/// Resolves `config`, checks the output directory, runs the time loop and
/// writes every output file into `out_dir`.
pub fn run(
    config: &ScenarioConfig,
    base_dir: &Path,
    out_dir: &Path,
    options: &RunOptions,
) -> Result<(SummaryDocument, RunManifest), ScenarioError> {
    let scenario = config.resolve(base_dir)?;
    prepare_output_dir(out_dir)?;
    let outcome = run_scenario(&scenario, options)?;
    let manifest = write_outputs(&scenario, &outcome, out_dir)?;
    Ok((summary_document(&scenario, &outcome), manifest))
}
