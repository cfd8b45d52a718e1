//! Command-line interface.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};

use crate::metrics::{bin_grid, CoverageSummary, GridMetric, DEFAULT_ALTITUDE_BIN_KM, DEFAULT_INCLINATION_BIN_DEG};
use crate::policy::PolicyKind;
use crate::population::PresetName;
use crate::propagation::{build_walker, elements_to_tle, ParseMode, ShellSpec};
use crate::report;
use crate::scenario::{
    self, default_epoch, ConstellationConfig, RunOptions, ScenarioConfig, Severity, SummaryDocument, UsersConfig,
};

#[derive(Debug, Parser)]
#[command(
    name = "spacelink",
    version,
    about = "Coverage and link simulation for space users of satellite constellations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario described by a configuration file.
    Run {
        #[arg(long, short)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a named single-user scenario against the bundled constellations.
    Preset {
        /// iss or sso_eo
        name: String,
        #[command(flatten)]
        overrides: Overrides,
        /// Window length in seconds.
        #[arg(long, default_value_t = 86_400.0)]
        duration: f64,
        /// Time step in seconds.
        #[arg(long, default_value_t = 10.0)]
        step: f64,
    },
    /// Write the TLEs of one Walker shell.
    Walker {
        /// Altitude in km.
        #[arg(long)]
        alt: f64,
        /// Inclination in degrees.
        #[arg(long)]
        inc: f64,
        #[arg(long)]
        planes: u32,
        #[arg(long = "per-plane")]
        per_plane: u32,
        #[arg(long = "raan-span", default_value_t = 360.0)]
        raan_span: f64,
        /// Inter-plane mean-anomaly step in degrees (default 360 / total).
        #[arg(long)]
        phase: Option<f64>,
        #[arg(long = "anomaly-offset", default_value_t = 0.0)]
        anomaly_offset: f64,
        #[arg(long)]
        epoch: Option<DateTime<Utc>>,
        #[arg(long = "first-catalog", default_value_t = 1)]
        first_catalog: u32,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Accepted for uniformity; the shell is fully deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render a summary JSON as a text table.
    Report { summary: PathBuf },
    /// Bin per-user results of one or more summaries into an altitude x inclination CSV.
    Grid {
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
        /// View name, e.g. oneweb or oneweb+starlink (default: first view).
        #[arg(long)]
        view: Option<String>,
        #[arg(long, default_value = "coverage")]
        metric: String,
        #[arg(long = "alt-bin", default_value_t = DEFAULT_ALTITUDE_BIN_KM)]
        alt_bin: f64,
        #[arg(long = "inc-bin", default_value_t = DEFAULT_INCLINATION_BIN_DEG)]
        inc_bin: f64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Check a configuration without running it.
    Validate {
        #[arg(long, short)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Debug, Args, Default)]
pub struct Overrides {
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_parser = parse_policy)]
    pub policy: Option<PolicyKind>,
    #[arg(long = "min-elev")]
    pub min_elev: Option<f64>,
    /// Carrier frequency in Hz.
    #[arg(long)]
    pub freq: Option<f64>,
    /// Comma-separated constellation names.
    #[arg(long, value_delimiter = ',')]
    pub constellations: Option<Vec<String>>,
    #[arg(long = "strict-tle")]
    pub strict_tle: bool,
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    match s {
        "random" => Ok(PolicyKind::Random),
        "closest" => Ok(PolicyKind::Closest),
        other => Err(format!("unknown policy '{other}' (expected random or closest)")),
    }
}

impl Overrides {
    fn apply(&self, config: &mut ScenarioConfig) {
        if let Some(out) = &self.out {
            config.output_directory = out.clone();
        }
        if let Some(seed) = self.seed {
            config.seed = Some(seed);
        }
        if let Some(policy) = self.policy {
            config.policy = policy;
        }
        if let Some(e) = self.min_elev {
            config.min_elevation = e;
        }
        if let Some(f) = self.freq {
            config.carrier_frequency = f;
        }
        if let Some(names) = &self.constellations {
            let existing = std::mem::take(&mut config.constellations);
            config.constellations = names
                .iter()
                .map(|n| {
                    existing
                        .iter()
                        .find(|c| &c.name == n)
                        .cloned()
                        .unwrap_or_else(|| ConstellationConfig::bundled(n))
                })
                .collect();
            config.views = None;
        }
        if self.strict_tle {
            config.tle_mode = ParseMode::Strict;
        }
    }

    fn options(&self) -> RunOptions {
        RunOptions {
            threads: self.threads,
            ..RunOptions::default()
        }
    }
}

type CliResult = Result<(), String>;

fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn execute(config: ScenarioConfig, base_dir: &Path, options: &RunOptions) -> CliResult {
    for d in config.validate(base_dir) {
        eprintln!("{d}");
    }
    let out_dir = config.output_directory.clone();
    let (document, manifest) = scenario::run(&config, base_dir, &out_dir, options).map_err(|e| e.to_string())?;
    print!("{}", report::render(&document));
    println!(
        "\n{} satellites, {} users, {} steps, seed {}, {:.1} s on {} thread(s); outputs in {}",
        manifest.total_satellites,
        manifest.users,
        manifest.steps,
        manifest.seed.map_or_else(|| "none".to_string(), |s| s.to_string()),
        manifest.wall_clock_seconds,
        manifest.threads,
        out_dir.display()
    );
    Ok(())
}

fn load_summary(path: &Path) -> Result<SummaryDocument, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: not a summary document: {e}", path.display()))
}

fn write_or_print(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(command: Command) -> CliResult {
    match command {
        Command::Run { config, overrides } => {
            let mut cfg = ScenarioConfig::load(&config).map_err(|e| e.to_string())?;
            overrides.apply(&mut cfg);
            execute(cfg, &config_dir(&config), &overrides.options())
        }
        Command::Preset {
            name,
            overrides,
            duration,
            step,
        } => {
            let preset: PresetName = name
                .parse()
                .map_err(|e: crate::population::PopulationError| e.to_string())?;
            let names = overrides
                .constellations
                .clone()
                .unwrap_or_else(|| vec![scenario::ONEWEB.into(), scenario::STARLINK.into()]);
            let mut cfg = ScenarioConfig::new(
                names.iter().map(|n| ConstellationConfig::bundled(n)).collect(),
                UsersConfig::Preset { names: vec![preset] },
            );
            cfg.duration = duration;
            cfg.step = step;
            cfg.seed = Some(0);
            cfg.output_directory = PathBuf::from(format!("output-{}", preset.as_str()));
            overrides.apply(&mut cfg);
            execute(cfg, Path::new("."), &overrides.options())
        }
        Command::Walker {
            alt,
            inc,
            planes,
            per_plane,
            raan_span,
            phase,
            anomaly_offset,
            epoch,
            first_catalog,
            out,
            seed: _,
        } => {
            let shell = ShellSpec {
                raan_span,
                inter_plane_phase: phase,
                anomaly_offset,
                ..ShellSpec::new(alt, inc, planes, per_plane)
            };
            let elements = build_walker(&shell, epoch.unwrap_or_else(default_epoch)).map_err(|e| e.to_string())?;
            let mut text = String::new();
            for (i, e) in elements.iter().enumerate() {
                let mut tle = elements_to_tle(e, first_catalog + i as u32).map_err(|e| e.to_string())?;
                tle.name = format!(
                    "WALKER {alt:.0}/{inc} P{} S{}",
                    i / per_plane as usize,
                    i % per_plane as usize
                );
                text.push_str(&tle.to_text().map_err(|e| e.to_string())?);
            }
            if let Some(path) = &out {
                eprintln!("{} element sets written to {}", elements.len(), path.display());
            }
            write_or_print(out.as_deref(), &text)
        }
        Command::Report { summary } => {
            let doc = load_summary(&summary)?;
            print!("{}", report::render(&doc));
            Ok(())
        }
        Command::Grid {
            summaries,
            view,
            metric,
            alt_bin,
            inc_bin,
            out,
        } => {
            let metric: GridMetric = metric.parse().map_err(|e: crate::metrics::GridError| e.to_string())?;
            let mut users = Vec::new();
            let mut results: Vec<CoverageSummary> = Vec::new();
            for path in &summaries {
                let doc = load_summary(path)?;
                let chosen = match &view {
                    Some(name) => doc
                        .view(name)
                        .ok_or_else(|| format!("{}: no view named '{name}'", path.display()))?,
                    None => doc
                        .views
                        .first()
                        .ok_or_else(|| format!("{}: no views", path.display()))?,
                };
                for u in &chosen.users {
                    users.push((u.alt_km, u.inc_deg));
                    results.push(u.summary.clone());
                }
            }
            let grid = bin_grid(&users, &results, alt_bin, inc_bin, metric).map_err(|e| e.to_string())?;
            write_or_print(out.as_deref(), &grid.to_csv())
        }
        Command::Validate { config, overrides } => {
            let mut cfg = ScenarioConfig::load(&config).map_err(|e| e.to_string())?;
            overrides.apply(&mut cfg);
            let diagnostics = cfg.validate(&config_dir(&config));
            for d in &diagnostics {
                println!("{d}");
            }
            if diagnostics.iter().any(|d| d.severity == Severity::Error) {
                return Err(format!("{}: configuration has errors", config.display()));
            }
            if diagnostics.is_empty() {
                println!("{}: ok", config.display());
            }
            Ok(())
        }
    }
}

/// Parses `args` (program name first) and runs the command. Returns the exit
/// status: 0 on success, 1 on runtime failure, 2 on usage errors.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(message) => {
            eprintln!("error: {message}");
            1
        }
    }
}
