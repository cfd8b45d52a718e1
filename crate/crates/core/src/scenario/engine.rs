//! The time loop.
//!
//! Steps are processed in blocks: every satellite is propagated for the
//! block into a shared read-only buffer, then users advance through the block
//! independently (in parallel), each feeding its own per-view accumulators.
//! No user ever observes another user's state, so results do not depend on
//! the number of worker threads.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::Vector3;
use rayon::prelude::*;

use super::config::{Scenario, ViewDef};
use super::ScenarioError;
use crate::earth::RADIUS_KM;
use crate::geometry::{central_angle_bound, is_visible, relative_geometry_raw, BeamModel};
use crate::metrics::{
    AccessInterval, CoverageAccumulator, CoverageSummary, Fleet, PassInterval, StepRecord, SummaryOptions, VisibleSat,
};
use crate::propagation::{elements_to_tle, PropagationError, Propagator};

pub const DEFAULT_BLOCK_STEPS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Overrides the configured culling switch.
    pub culling: Option<bool>,
    pub block_steps: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            threads: None,
            culling: None,
            block_steps: DEFAULT_BLOCK_STEPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserOutcome {
    pub summary: CoverageSummary,
    pub passes: Vec<PassInterval>,
    pub accesses: Vec<AccessInterval>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewOutcome {
    pub view: ViewDef,
    /// Indexed like `Scenario::users`.
    pub users: Vec<UserOutcome>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub views: Vec<ViewOutcome>,
    pub steps: u64,
    /// Pairs that passed culling and went through the exact predicate.
    pub exact_evaluations: u64,
    pub elapsed_seconds: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct SatState {
    pos: [f64; 3],
    vel: [f64; 3],
    unit: [f64; 3],
    radius: f64,
}

struct SatModel {
    propagator: Propagator,
    /// Minutes from the element epoch to the scenario epoch.
    offset_min: f64,
    beam: BeamModel,
}

struct Context<'a> {
    scenario: &'a Scenario,
    sats: Vec<SatModel>,
    /// Satellite index range per fleet.
    fleet_ranges: Vec<std::ops::Range<usize>>,
    culling: bool,
    step_seconds: f64,
}

/// Satellite states for one block: `states[k * n + s]`, plus the highest
/// radius per (step, fleet) for the culling bound.
struct Block {
    first_step: u64,
    len: usize,
    states: Vec<SatState>,
    fleet_max_radius: Vec<f64>,
}

struct UserWork {
    user_index: usize,
    user_id: u64,
    propagator: Propagator,
    offset_min: f64,
    accumulators: Vec<CoverageAccumulator>,
    per_fleet: Vec<Vec<VisibleSat>>,
    record: StepRecord,
    candidates: Vec<(u32, f64)>,
    exact: u64,
    error: Option<PropagationError>,
    /// Optional visibility trace, one sorted id list per step.
    trace: Option<Vec<Vec<u32>>>,
}

fn propagation_error(e: PropagationError) -> ScenarioError {
    ScenarioError::Propagation(e)
}

impl<'a> Context<'a> {
    fn new(scenario: &'a Scenario, culling: bool) -> Result<Self, ScenarioError> {
        let epoch = scenario.config.epoch;
        let mut sats = Vec::with_capacity(scenario.satellite_count());
        let mut fleet_ranges = Vec::new();
        for fleet in &scenario.fleets {
            let start = sats.len();
            for sat in &fleet.satellites {
                let propagator = Propagator::new(&sat.tle).map_err(propagation_error)?;
                let offset_min = propagator.minutes_since_epoch(epoch);
                sats.push(SatModel {
                    propagator,
                    offset_min,
                    beam: sat.beam,
                });
            }
            fleet_ranges.push(start..sats.len());
        }
        Ok(Self {
            scenario,
            sats,
            fleet_ranges,
            culling,
            step_seconds: scenario.config.step,
        })
    }

    fn minutes(&self, offset_min: f64, step_index: u64) -> f64 {
        offset_min + step_index as f64 * self.step_seconds / 60.0
    }

    fn propagate_block(&self, block: &mut Block) -> Result<(), ScenarioError> {
        let n = self.sats.len();
        let fleets = self.fleet_ranges.len();
        block.states.resize(block.len * n, SatState::default());
        block.fleet_max_radius.resize(block.len * fleets, 0.0);
        let first = block.first_step;
        block
            .states
            .par_chunks_mut(n.max(1))
            .zip(block.fleet_max_radius.par_chunks_mut(fleets.max(1)))
            .enumerate()
            .try_for_each(|(k, (states, max_r))| {
                let step_index = first + k as u64;
                for (state, model) in states.iter_mut().zip(&self.sats) {
                    let (pos, vel) = model
                        .propagator
                        .propagate_minutes(self.minutes(model.offset_min, step_index))?;
                    let radius = (pos[0] * pos[0] + pos[1] * pos[1] + pos[2] * pos[2]).sqrt();
                    *state = SatState {
                        pos,
                        vel,
                        unit: [pos[0] / radius, pos[1] / radius, pos[2] / radius],
                        radius,
                    };
                }
                for (f, range) in self.fleet_ranges.iter().enumerate() {
                    max_r[f] = states[range.clone()].iter().map(|s| s.radius).fold(0.0, f64::max);
                }
                Ok::<_, PropagationError>(())
            })
            .map_err(propagation_error)
    }

    fn new_user(
        &self,
        user_index: usize,
        options: &[Arc<SummaryOptions>],
        trace: bool,
    ) -> Result<UserWork, ScenarioError> {
        let spec = &self.scenario.users[user_index];
        let mut tle = elements_to_tle(&spec.elements, 0)
            .map_err(|e| ScenarioError::Config(format!("user {}: {e}", spec.user_id)))?;
        tle.name = format!("user {}", spec.user_id);
        let propagator = Propagator::new(&tle).map_err(propagation_error)?;
        let offset_min = propagator.minutes_since_epoch(self.scenario.config.epoch);
        Ok(UserWork {
            user_index,
            user_id: u64::from(spec.user_id),
            propagator,
            offset_min,
            accumulators: options
                .iter()
                .map(|o| CoverageAccumulator::new(Arc::clone(o)))
                .collect(),
            per_fleet: vec![Vec::new(); self.fleet_ranges.len()],
            record: StepRecord::default(),
            candidates: Vec::new(),
            exact: 0,
            error: None,
            trace: trace.then(Vec::new),
        })
    }

    fn advance_user(&self, work: &mut UserWork, block: &Block) {
        if work.error.is_some() {
            return;
        }
        let n = self.sats.len();
        let fleets = self.fleet_ranges.len();
        let min_elevation = self.scenario.config.min_elevation;
        for k in 0..block.len {
            let step_index = block.first_step + k as u64;
            let (up, uv) = match work
                .propagator
                .propagate_minutes(self.minutes(work.offset_min, step_index))
            {
                Ok(s) => s,
                Err(e) => {
                    work.error = Some(e);
                    return;
                }
            };
            let user_pos = Vector3::from(up);
            let user_vel = Vector3::from(uv);
            let user_radius = user_pos.norm();
            let u = user_pos / user_radius;
            let states = &block.states[k * n..(k + 1) * n];
            for (f, range) in self.fleet_ranges.iter().enumerate() {
                let out = &mut work.per_fleet[f];
                out.clear();
                let min_cos = if self.culling {
                    match central_angle_bound(user_radius, block.fleet_max_radius[k * fleets + f], min_elevation) {
                        None => continue,
                        Some(b) if b < std::f64::consts::PI => b.cos(),
                        Some(_) => -2.0,
                    }
                } else {
                    -2.0
                };
                for s in range.clone() {
                    let st = &states[s];
                    if u.x * st.unit[0] + u.y * st.unit[1] + u.z * st.unit[2] < min_cos {
                        continue;
                    }
                    work.exact += 1;
                    let sat_pos = Vector3::from(st.pos);
                    let sat_vel = Vector3::from(st.vel);
                    let Ok(geom) = relative_geometry_raw(&user_pos, &user_vel, &sat_pos, &sat_vel) else {
                        continue;
                    };
                    if is_visible(&geom, min_elevation, &self.sats[s].beam, st.radius - RADIUS_KM) {
                        out.push(VisibleSat {
                            sat_id: s as u32,
                            range: geom.range,
                            range_rate: geom.range_rate,
                            user_elevation: geom.user_elevation,
                        });
                    }
                }
            }
            if let Some(trace) = &mut work.trace {
                trace.push(work.per_fleet.iter().flatten().map(|v| v.sat_id).collect());
            }
            for (view, acc) in self.scenario.views.iter().zip(work.accumulators.iter_mut()) {
                let record = &mut work.record;
                record.step_index = step_index;
                record.visible.clear();
                for &f in &view.fleets {
                    record.visible.extend_from_slice(&work.per_fleet[f]);
                }
                work.candidates.clear();
                work.candidates
                    .extend(record.visible.iter().map(|v| (v.sat_id, v.range)));
                record.serving = self.scenario.policy.select(&work.candidates, step_index, work.user_id);
                acc.push(record);
            }
        }
    }
}

fn summary_options(scenario: &Scenario) -> Vec<Arc<SummaryOptions>> {
    scenario
        .views
        .iter()
        .map(|view| {
            let fleets = if view.fleets.len() > 1 {
                view.fleets
                    .iter()
                    .map(|&f| {
                        let fleet = &scenario.fleets[f];
                        Fleet {
                            name: fleet.name.clone(),
                            first_sat: fleet.first_sat(),
                            count: fleet.satellites.len() as u32,
                        }
                    })
                    .collect()
            } else {
                Vec::new()
            };
            Arc::new(SummaryOptions {
                step_seconds: scenario.config.step,
                carrier_frequency: scenario.config.carrier_frequency,
                mode: scenario.config.reporting_mode,
                fleets,
            })
        })
        .collect()
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<(T, usize), ScenarioError> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| ScenarioError::Config(format!("cannot start {n} worker threads: {e}")))?;
            Ok((pool.install(f), n.max(1)))
        }
        None => Ok((f(), rayon::current_num_threads())),
    }
}

fn drive(scenario: &Scenario, options: &RunOptions, trace: bool) -> Result<(Vec<UserWork>, u64), ScenarioError> {
    let culling = options.culling.unwrap_or(scenario.config.culling);
    let ctx = Context::new(scenario, culling)?;
    let summary_opts = summary_options(scenario);
    let mut users = (0..scenario.users.len())
        .map(|i| ctx.new_user(i, &summary_opts, trace))
        .collect::<Result<Vec<_>, _>>()?;
    let steps = scenario.step_count();
    let block_steps = options.block_steps.max(1) as u64;
    let mut block = Block {
        first_step: 0,
        len: 0,
        states: Vec::new(),
        fleet_max_radius: Vec::new(),
    };
    while block.first_step < steps {
        block.len = block_steps.min(steps - block.first_step) as usize;
        ctx.propagate_block(&mut block)?;
        users.par_iter_mut().for_each(|w| ctx.advance_user(w, &block));
        if let Some(e) = users.iter_mut().find_map(|w| w.error.take()) {
            return Err(ScenarioError::Propagation(e));
        }
        block.first_step += block.len as u64;
    }
    Ok((users, steps))
}

/// Runs the full time loop and returns per-view, per-user results.
pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> Result<RunOutcome, ScenarioError> {
    let started = Instant::now();
    let (result, threads) = with_pool(options.threads, || drive(scenario, options, false))?;
    let (users, steps) = result?;
    let exact_evaluations = users.iter().map(|w| w.exact).sum();
    let mut views: Vec<ViewOutcome> = scenario
        .views
        .iter()
        .map(|v| ViewOutcome {
            view: v.clone(),
            users: Vec::with_capacity(users.len()),
        })
        .collect();
    let mut users = users;
    users.sort_by_key(|w| w.user_index);
    for work in users {
        for (view, acc) in views.iter_mut().zip(work.accumulators) {
            let (summary, passes, accesses) = acc.finish();
            view.users.push(UserOutcome {
                summary,
                passes,
                accesses,
            });
        }
    }
    Ok(RunOutcome {
        views,
        steps,
        exact_evaluations,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        threads,
    })
}

/// Sorted visible satellite ids per user and step, across all fleets.
/// Used to compare the culled and brute-force paths.
pub fn visibility_trace(scenario: &Scenario, options: &RunOptions) -> Result<Vec<Vec<Vec<u32>>>, ScenarioError> {
    let (result, _) = with_pool(options.threads, || drive(scenario, options, true))?;
    let (mut users, _) = result?;
    users.sort_by_key(|w| w.user_index);
    Ok(users.into_iter().map(|w| w.trace.unwrap_or_default()).collect())
}
