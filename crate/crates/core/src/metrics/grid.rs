//! Altitude × inclination binning of per-user summaries.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::summary::CoverageSummary;

pub const DEFAULT_ALTITUDE_BIN_KM: f64 = 25.0;
pub const DEFAULT_INCLINATION_BIN_DEG: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("bin widths must be positive, got {altitude} km x {inclination} deg")]
    BinWidth { altitude: f64, inclination: f64 },
    #[error("{users} users but {summaries} summaries")]
    LengthMismatch { users: usize, summaries: usize },
    #[error("unknown grid metric '{0}'")]
    UnknownMetric(String),
}

/// Per-user scalar that a grid cell averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMetric {
    /// Percent of steps covered.
    Coverage,
    AvgAccessMin,
    MaxAccessMin,
    AvgPassMin,
    VisibleAvg,
    VisibleMax,
    FsplMinDb,
    FsplAvgDb,
    FsplMaxDb,
    MaxDopplerKhz,
}

impl GridMetric {
    pub const ALL: [GridMetric; 10] = [
        GridMetric::Coverage,
        GridMetric::AvgAccessMin,
        GridMetric::MaxAccessMin,
        GridMetric::AvgPassMin,
        GridMetric::VisibleAvg,
        GridMetric::VisibleMax,
        GridMetric::FsplMinDb,
        GridMetric::FsplAvgDb,
        GridMetric::FsplMaxDb,
        GridMetric::MaxDopplerKhz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GridMetric::Coverage => "coverage",
            GridMetric::AvgAccessMin => "avg_access_min",
            GridMetric::MaxAccessMin => "max_access_min",
            GridMetric::AvgPassMin => "avg_pass_min",
            GridMetric::VisibleAvg => "visible_avg",
            GridMetric::VisibleMax => "visible_max",
            GridMetric::FsplMinDb => "fspl_min_db",
            GridMetric::FsplAvgDb => "fspl_avg_db",
            GridMetric::FsplMaxDb => "fspl_max_db",
            GridMetric::MaxDopplerKhz => "max_doppler_khz",
        }
    }

    /// `None` when the user has no sample for this metric (for example no
    /// access at all); such users do not contribute to the cell mean.
    pub fn extract(self, s: &CoverageSummary) -> Option<f64> {
        match self {
            GridMetric::Coverage => Some(100.0 * s.coverage_probability),
            GridMetric::AvgAccessMin => s.avg_access_min,
            GridMetric::MaxAccessMin => s.max_access_min,
            GridMetric::AvgPassMin => s.avg_pass_min,
            GridMetric::VisibleAvg => Some(s.visible_avg),
            GridMetric::VisibleMax => Some(s.visible_max as f64),
            GridMetric::FsplMinDb => s.fspl_min_db,
            GridMetric::FsplAvgDb => s.fspl_avg_db,
            GridMetric::FsplMaxDb => s.fspl_max_db,
            GridMetric::MaxDopplerKhz => s.max_doppler_khz,
        }
    }
}

impl fmt::Display for GridMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GridMetric {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GridMetric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| GridError::UnknownMetric(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub alt_bin_low_km: f64,
    pub inc_bin_low_deg: f64,
    /// `None` marks a cell with no contributing user.
    pub value: Option<f64>,
    pub count: usize,
}

/// Dense rectangle of cells spanning the populated bins, row-major by
/// altitude then inclination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub metric: GridMetric,
    pub altitude_bin: f64,
    pub inclination_bin: f64,
    pub cells: Vec<GridCell>,
}

impl Grid {
    pub fn populated(&self) -> impl Iterator<Item = &GridCell> {
        self.cells.iter().filter(|c| c.value.is_some())
    }

    pub fn cell_at(&self, altitude: f64, inclination: f64) -> Option<&GridCell> {
        let a = (altitude / self.altitude_bin).floor() * self.altitude_bin;
        let i = (inclination / self.inclination_bin).floor() * self.inclination_bin;
        self.cells
            .iter()
            .find(|c| (c.alt_bin_low_km - a).abs() < 1e-9 && (c.inc_bin_low_deg - i).abs() < 1e-9)
    }

    pub const CSV_HEADER: &'static str = "alt_bin_low_km,inc_bin_low_deg,metric,value,count";

    /// CSV rows with the standard header; empty cells leave `value` blank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let value = c.value.map(|v| format!("{v:.6}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.alt_bin_low_km, c.inc_bin_low_deg, self.metric, value, c.count
            ));
        }
        out
    }
}

/// Bins users by (altitude, inclination) and averages `metric` per cell.
/// `users` holds (altitude km, inclination deg) in the same order as `summaries`.
pub fn bin_grid(
    users: &[(f64, f64)],
    summaries: &[CoverageSummary],
    altitude_bin: f64,
    inclination_bin: f64,
    metric: GridMetric,
) -> Result<Grid, GridError> {
    if !(altitude_bin > 0.0 && inclination_bin > 0.0) {
        return Err(GridError::BinWidth {
            altitude: altitude_bin,
            inclination: inclination_bin,
        });
    }
    if users.len() != summaries.len() {
        return Err(GridError::LengthMismatch {
            users: users.len(),
            summaries: summaries.len(),
        });
    }
    let keys: Vec<(i64, i64)> = users
        .iter()
        .map(|&(alt, inc)| {
            (
                (alt / altitude_bin).floor() as i64,
                (inc / inclination_bin).floor() as i64,
            )
        })
        .collect();
    let cells = match (keys.iter().map(|k| k.0).min(), keys.iter().map(|k| k.0).max()) {
        (Some(a0), Some(a1)) => {
            let i0 = keys.iter().map(|k| k.1).min().unwrap_or(0);
            let i1 = keys.iter().map(|k| k.1).max().unwrap_or(0);
            let width = (i1 - i0 + 1) as usize;
            let mut sums = vec![(0.0, 0usize); (a1 - a0 + 1) as usize * width];
            for (key, summary) in keys.iter().zip(summaries) {
                if let Some(v) = metric.extract(summary) {
                    let slot = &mut sums[(key.0 - a0) as usize * width + (key.1 - i0) as usize];
                    slot.0 += v;
                    slot.1 += 1;
                }
            }
            sums.into_iter()
                .enumerate()
                .map(|(idx, (sum, count))| GridCell {
                    alt_bin_low_km: (a0 + (idx / width) as i64) as f64 * altitude_bin,
                    inc_bin_low_deg: (i0 + (idx % width) as i64) as f64 * inclination_bin,
                    value: (count > 0).then(|| sum / count as f64),
                    count,
                })
                .collect()
        }
        _ => Vec::new(),
    };
    Ok(Grid {
        metric,
        altitude_bin,
        inclination_bin,
        cells,
    })
}
