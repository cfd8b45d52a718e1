//! Streaming per-user accumulation of the coverage summary.
//!
//! [`CoverageAccumulator`] consumes one [`StepRecord`] at a time in step
//! order, so a full run never needs the pair-level timeline in memory.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::intervals::{duration_min, AccessInterval, PassInterval, StepRecord};
use crate::link::{doppler_offset, fspl_db_unchecked};

/// Which pair-samples feed the FSPL and Doppler statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportingMode {
    /// Every visible (user, satellite) sample.
    #[default]
    AllVisible,
    /// Only the sample of the serving satellite.
    ServingOnly,
}

/// A contiguous block of satellite ids that belongs to one named fleet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fleet {
    pub name: String,
    pub first_sat: u32,
    pub count: u32,
}

impl Fleet {
    pub fn contains(&self, sat_id: u32) -> bool {
        sat_id >= self.first_sat && sat_id - self.first_sat < self.count
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryOptions {
    pub step_seconds: f64,
    pub carrier_frequency: f64,
    pub mode: ReportingMode,
    pub fleets: Vec<Fleet>,
}

pub const FSPL_BIN_DB: f64 = 1.0;
pub const DOPPLER_BIN_KHZ: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetUsage {
    pub name: String,
    pub served_steps: u64,
    /// Share of covered steps served by this fleet.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub total_steps: u64,
    pub covered_steps: u64,
    pub coverage_probability: f64,

    pub access_count: u64,
    pub avg_access_min: Option<f64>,
    pub max_access_min: Option<f64>,

    pub pass_count: u64,
    pub avg_pass_min: Option<f64>,
    /// Bin `i` counts passes lasting `[i, i + 1)` minutes.
    pub pass_duration_hist_min: Vec<u64>,

    pub visible_min: u32,
    pub visible_avg: f64,
    pub visible_max: u32,
    /// Index is the number of simultaneously visible satellites.
    pub visible_hist: Vec<u64>,

    pub fspl_samples: u64,
    pub fspl_min_db: Option<f64>,
    pub fspl_avg_db: Option<f64>,
    pub fspl_max_db: Option<f64>,
    /// Keyed by the lower edge of each 1 dB bin.
    pub fspl_hist_db: BTreeMap<i64, u64>,

    pub max_doppler_khz: Option<f64>,
    /// Signed offsets keyed by the lower edge of each 10 kHz bin.
    pub doppler_hist_khz: BTreeMap<i64, u64>,
    /// Largest finite-difference Doppler rate along any pass.
    pub max_doppler_rate_khz_s: Option<f64>,

    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fleet_usage: Vec<FleetUsage>,
}

impl CoverageSummary {
    /// Share of passes strictly shorter than `minutes` whole minutes.
    pub fn fraction_of_passes_shorter_than(&self, minutes: usize) -> Option<f64> {
        if self.pass_count == 0 {
            return None;
        }
        let short: u64 = self.pass_duration_hist_min.iter().take(minutes).sum();
        Some(short as f64 / self.pass_count as f64)
    }
}

#[derive(Debug, Clone)]
struct ActiveRun {
    sat_id: u32,
    start: u64,
    samples: u64,
    last_offset: f64,
    prev_offset: f64,
    last_counted: bool,
}

#[derive(Debug, Clone, Default)]
struct Extremes {
    min: f64,
    max: f64,
    sum: f64,
    n: u64,
}

impl Extremes {
    fn push(&mut self, v: f64) {
        if self.n == 0 {
            self.min = v;
            self.max = v;
        } else {
            self.min = self.min.min(v);
            self.max = self.max.max(v);
        }
        self.sum += v;
        self.n += 1;
    }
}

/// Single-pass accumulator for one user (one constellation view).
#[derive(Debug, Clone)]
pub struct CoverageAccumulator {
    options: Arc<SummaryOptions>,
    last_step: Option<u64>,
    total_steps: u64,
    covered_steps: u64,

    access_open: Option<u64>,
    accesses: Vec<AccessInterval>,

    active: Vec<ActiveRun>,
    next_active: Vec<ActiveRun>,
    passes: Vec<PassInterval>,

    visible_min: u32,
    visible_max: u32,
    visible_sum: u64,
    visible_hist: Vec<u64>,

    fspl: Extremes,
    fspl_hist: BTreeMap<i64, u64>,
    doppler_max: Option<f64>,
    doppler_hist: BTreeMap<i64, u64>,
    rate_max: Option<f64>,

    served: Vec<u64>,
}

impl CoverageAccumulator {
    pub fn new(options: Arc<SummaryOptions>) -> Self {
        let fleets = options.fleets.len();
        Self {
            options,
            last_step: None,
            total_steps: 0,
            covered_steps: 0,
            access_open: None,
            accesses: Vec::new(),
            active: Vec::new(),
            next_active: Vec::new(),
            passes: Vec::new(),
            visible_min: u32::MAX,
            visible_max: 0,
            visible_sum: 0,
            visible_hist: Vec::new(),
            fspl: Extremes::default(),
            fspl_hist: BTreeMap::new(),
            doppler_max: None,
            doppler_hist: BTreeMap::new(),
            rate_max: None,
            served: vec![0; fleets],
        }
    }

    fn record_rate(&mut self, rate_hz_s: f64) {
        let r = rate_hz_s.abs() / 1e3;
        self.rate_max = Some(self.rate_max.map_or(r, |m| m.max(r)));
    }

    fn close_pass(&mut self, run: &ActiveRun) {
        let step = self.options.step_seconds;
        if run.samples >= 2 && run.last_counted {
            self.record_rate((run.last_offset - run.prev_offset) / step);
        }
        self.passes.push(PassInterval {
            sat_id: run.sat_id,
            start_step: run.start,
            end_step: run.start + run.samples - 1,
            duration_min: duration_min(run.samples, step),
        });
    }

    fn close_access(&mut self, end_step: u64) {
        if let Some(start) = self.access_open.take() {
            self.accesses.push(AccessInterval {
                start_step: start,
                end_step,
                duration_min: duration_min(end_step - start + 1, self.options.step_seconds),
            });
        }
    }

    /// Feeds the next step. `record.visible` must be sorted by satellite id.
    pub fn push(&mut self, record: &StepRecord) {
        debug_assert!(record.visible.windows(2).all(|w| w[0].sat_id < w[1].sat_id));
        let contiguous = self.last_step.is_none_or(|last| record.step_index == last + 1);
        if !contiguous {
            let last = self.last_step.unwrap_or(0);
            for run in std::mem::take(&mut self.active) {
                self.close_pass(&run);
            }
            self.close_access(last);
        }
        self.last_step = Some(record.step_index);
        self.total_steps += 1;

        let count = record.visible.len();
        let count_u32 = count as u32;
        self.visible_min = self.visible_min.min(count_u32);
        self.visible_max = self.visible_max.max(count_u32);
        self.visible_sum += count as u64;
        if self.visible_hist.len() <= count {
            self.visible_hist.resize(count + 1, 0);
        }
        self.visible_hist[count] += 1;

        if count == 0 {
            if let Some(prev) = record.step_index.checked_sub(1) {
                self.close_access(prev);
            }
        } else {
            self.covered_steps += 1;
            if self.access_open.is_none() {
                self.access_open = Some(record.step_index);
            }
        }

        if let Some(serving) = record.serving {
            if let Some(i) = self.options.fleets.iter().position(|f| f.contains(serving)) {
                self.served[i] += 1;
            }
        }

        let step = self.options.step_seconds;
        let freq = self.options.carrier_frequency;
        let all_visible = self.options.mode == ReportingMode::AllVisible;

        // Merge the sorted active runs with the sorted visible list.
        let mut previous = std::mem::take(&mut self.active);
        let mut next = std::mem::take(&mut self.next_active);
        next.clear();
        let mut old = previous.drain(..).peekable();
        for v in &record.visible {
            while let Some(run) = old.next_if(|r| r.sat_id < v.sat_id) {
                self.close_pass(&run);
            }
            let counted = all_visible || record.serving == Some(v.sat_id);
            let offset = doppler_offset(v.range_rate, freq);
            let run = match old.next_if(|r| r.sat_id == v.sat_id) {
                Some(mut run) => {
                    if run.samples == 1 {
                        if run.last_counted {
                            self.record_rate((offset - run.last_offset) / step);
                        }
                    } else if run.last_counted {
                        self.record_rate((offset - run.prev_offset) / (2.0 * step));
                    }
                    run.prev_offset = run.last_offset;
                    run.last_offset = offset;
                    run.last_counted = counted;
                    run.samples += 1;
                    run
                }
                None => ActiveRun {
                    sat_id: v.sat_id,
                    start: record.step_index,
                    samples: 1,
                    last_offset: offset,
                    prev_offset: offset,
                    last_counted: counted,
                },
            };
            next.push(run);

            if counted {
                let loss = fspl_db_unchecked(v.range, freq);
                self.fspl.push(loss);
                *self.fspl_hist.entry((loss / FSPL_BIN_DB).floor() as i64).or_default() += 1;
                let khz = offset / 1e3;
                self.doppler_max = Some(self.doppler_max.map_or(khz.abs(), |m| m.max(khz.abs())));
                *self
                    .doppler_hist
                    .entry(((khz / DOPPLER_BIN_KHZ).floor() * DOPPLER_BIN_KHZ) as i64)
                    .or_default() += 1;
            }
        }
        for run in old {
            self.close_pass(&run);
        }
        self.active = next;
        self.next_active = previous;
    }

    /// Closes every open interval and returns the summary with the
    /// passes (ordered by start, then satellite) and accesses.
    pub fn finish(mut self) -> (CoverageSummary, Vec<PassInterval>, Vec<AccessInterval>) {
        for run in std::mem::take(&mut self.active) {
            self.close_pass(&run);
        }
        if let Some(last) = self.last_step {
            self.close_access(last);
        }
        self.passes.sort_by_key(|p| (p.start_step, p.sat_id));

        let step = self.options.step_seconds;
        let access_samples: u64 = self.accesses.iter().map(AccessInterval::samples).sum();
        let max_access = self.accesses.iter().map(AccessInterval::samples).max();
        let pass_samples: u64 = self.passes.iter().map(PassInterval::samples).sum();

        let mut pass_hist = Vec::new();
        for p in &self.passes {
            let bin = (p.duration_min.floor()) as usize;
            if pass_hist.len() <= bin {
                pass_hist.resize(bin + 1, 0);
            }
            pass_hist[bin] += 1;
        }

        let fleet_usage = self
            .options
            .fleets
            .iter()
            .zip(&self.served)
            .map(|(fleet, &served_steps)| FleetUsage {
                name: fleet.name.clone(),
                served_steps,
                fraction: if self.covered_steps == 0 {
                    0.0
                } else {
                    served_steps as f64 / self.covered_steps as f64
                },
            })
            .collect();

        let access_count = self.accesses.len() as u64;
        let pass_count = self.passes.len() as u64;
        let fspl = &self.fspl;
        let summary = CoverageSummary {
            total_steps: self.total_steps,
            covered_steps: self.covered_steps,
            coverage_probability: if self.total_steps == 0 {
                0.0
            } else {
                self.covered_steps as f64 / self.total_steps as f64
            },
            access_count,
            avg_access_min: (access_count > 0).then(|| duration_min(access_samples, step) / access_count as f64),
            max_access_min: max_access.map(|s| duration_min(s, step)),
            pass_count,
            avg_pass_min: (pass_count > 0).then(|| duration_min(pass_samples, step) / pass_count as f64),
            pass_duration_hist_min: pass_hist,
            visible_min: if self.total_steps == 0 { 0 } else { self.visible_min },
            visible_avg: if self.total_steps == 0 {
                0.0
            } else {
                self.visible_sum as f64 / self.total_steps as f64
            },
            visible_max: self.visible_max,
            visible_hist: self.visible_hist,
            fspl_samples: fspl.n,
            fspl_min_db: (fspl.n > 0).then_some(fspl.min),
            fspl_avg_db: (fspl.n > 0).then(|| (fspl.sum / fspl.n as f64).clamp(fspl.min, fspl.max)),
            fspl_max_db: (fspl.n > 0).then_some(fspl.max),
            fspl_hist_db: self.fspl_hist,
            max_doppler_khz: self.doppler_max,
            doppler_hist_khz: self.doppler_hist,
            max_doppler_rate_khz_s: self.rate_max,
            fleet_usage,
        };
        (summary, self.passes, self.accesses)
    }
}

/// Batch form of the accumulator over an in-memory record sequence.
pub fn summarize(records: &[StepRecord], options: &SummaryOptions) -> CoverageSummary {
    summarize_with_intervals(records, options).0
}

pub fn summarize_with_intervals(
    records: &[StepRecord],
    options: &SummaryOptions,
) -> (CoverageSummary, Vec<PassInterval>, Vec<AccessInterval>) {
    let mut acc = CoverageAccumulator::new(Arc::new(options.clone()));
    for record in records {
        if record.visible.windows(2).all(|w| w[0].sat_id < w[1].sat_id) {
            acc.push(record);
        } else {
            let mut sorted = record.clone();
            sorted.visible.sort_by_key(|v| v.sat_id);
            sorted.visible.dedup_by_key(|v| v.sat_id);
            acc.push(&sorted);
        }
    }
    acc.finish()
}
