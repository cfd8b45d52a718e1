//! Per-step records and the interval types extracted from them.

use serde::{Deserialize, Serialize};

/// One visible satellite at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibleSat {
    pub sat_id: u32,
    pub range: f64,
    pub range_rate: f64,
    pub user_elevation: f64,
}

/// Everything the metrics need from one time step for one user.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepRecord {
    pub step_index: u64,
    pub visible: Vec<VisibleSat>,
    pub serving: Option<u32>,
}

impl StepRecord {
    pub fn contains(&self, sat_id: u32) -> bool {
        self.visible.iter().any(|v| v.sat_id == sat_id)
    }
}

/// Contiguous visibility of one satellite. Steps are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassInterval {
    pub sat_id: u32,
    pub start_step: u64,
    pub end_step: u64,
    pub duration_min: f64,
}

/// Contiguous steps with at least one satellite visible. Steps are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccessInterval {
    pub start_step: u64,
    pub end_step: u64,
    pub duration_min: f64,
}

impl PassInterval {
    pub fn samples(&self) -> u64 {
        self.end_step - self.start_step + 1
    }
}

impl AccessInterval {
    pub fn samples(&self) -> u64 {
        self.end_step - self.start_step + 1
    }

    pub fn contains(&self, pass: &PassInterval) -> bool {
        self.start_step <= pass.start_step && pass.end_step <= self.end_step
    }
}

/// Duration of `samples` consecutive samples: each sample lasts one step.
pub fn duration_min(samples: u64, step_seconds: f64) -> f64 {
    samples as f64 * step_seconds / 60.0
}

/// Maximal runs of consecutive step indices for which `hit` holds.
fn runs<'a>(records: &'a [StepRecord], hit: impl Fn(&StepRecord) -> bool + 'a) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut open: Option<(u64, u64)> = None;
    for rec in records {
        let on = hit(rec);
        open = match (open, on) {
            (Some((start, last)), true) if rec.step_index == last + 1 => Some((start, rec.step_index)),
            (Some(run), true) => {
                out.push(run);
                Some((rec.step_index, rec.step_index))
            }
            (None, true) => Some((rec.step_index, rec.step_index)),
            (Some(run), false) => {
                out.push(run);
                None
            }
            (None, false) => None,
        };
    }
    out.extend(open);
    out
}

/// Passes of one satellite over a uniformly stepped record sequence.
pub fn extract_passes(records: &[StepRecord], sat_id: u32, step_seconds: f64) -> Vec<PassInterval> {
    runs(records, |r| r.contains(sat_id))
        .into_iter()
        .map(|(start_step, end_step)| PassInterval {
            sat_id,
            start_step,
            end_step,
            duration_min: duration_min(end_step - start_step + 1, step_seconds),
        })
        .collect()
}

/// Passes of every satellite seen in `records`, ordered by (start, satellite).
pub fn extract_all_passes(records: &[StepRecord], step_seconds: f64) -> Vec<PassInterval> {
    let mut ids: Vec<u32> = records
        .iter()
        .flat_map(|r| r.visible.iter().map(|v| v.sat_id))
        .collect();
    ids.sort_unstable();
    ids.dedup();
    let mut passes: Vec<PassInterval> = ids
        .into_iter()
        .flat_map(|id| extract_passes(records, id, step_seconds))
        .collect();
    passes.sort_by_key(|p| (p.start_step, p.sat_id));
    passes
}

/// Network accesses: runs of steps with a non-empty visible set, regardless
/// of which satellite provides them.
pub fn extract_accesses(records: &[StepRecord], step_seconds: f64) -> Vec<AccessInterval> {
    runs(records, |r| !r.visible.is_empty())
        .into_iter()
        .map(|(start_step, end_step)| AccessInterval {
            start_step,
            end_step,
            duration_min: duration_min(end_step - start_step + 1, step_seconds),
        })
        .collect()
}

/// Fraction of steps with at least one satellite visible.
pub fn coverage_probability(records: &[StepRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let covered = records.iter().filter(|r| !r.visible.is_empty()).count();
    covered as f64 / records.len() as f64
}
