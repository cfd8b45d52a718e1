//! Coverage, interval, link-statistic and grid metrics over per-step records.

mod grid;
mod intervals;
mod summary;

pub use grid::{bin_grid, Grid, GridCell, GridError, GridMetric, DEFAULT_ALTITUDE_BIN_KM, DEFAULT_INCLINATION_BIN_DEG};
pub use intervals::{
    coverage_probability, duration_min, extract_accesses, extract_all_passes, extract_passes, AccessInterval,
    PassInterval, StepRecord, VisibleSat,
};
pub use summary::{
    summarize, summarize_with_intervals, CoverageAccumulator, CoverageSummary, Fleet, FleetUsage, ReportingMode,
    SummaryOptions, DOPPLER_BIN_KHZ, FSPL_BIN_DB,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::{doppler_offset, doppler_rate, fspl_db};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sat(id: u32, range: f64, range_rate: f64) -> VisibleSat {
        VisibleSat {
            sat_id: id,
            range,
            range_rate,
            user_elevation: 40.0,
        }
    }

    /// Records from a step-major boolean visibility matrix.
    fn timeline(pattern: &[Vec<bool>]) -> Vec<StepRecord> {
        pattern
            .iter()
            .enumerate()
            .map(|(i, row)| StepRecord {
                step_index: i as u64,
                visible: row
                    .iter()
                    .enumerate()
                    .filter(|(_, on)| **on)
                    .map(|(s, _)| sat(s as u32, 1000.0 + s as f64, 0.0))
                    .collect(),
                serving: None,
            })
            .collect()
    }

    fn options(step: f64, mode: ReportingMode) -> SummaryOptions {
        SummaryOptions {
            step_seconds: step,
            carrier_frequency: 10.7e9,
            mode,
            fleets: Vec::new(),
        }
    }

    /// Independent rescan: a run starts where the flag rises and ends where
    /// it falls, checked sample by sample.
    fn rescan(flags: &[bool]) -> Vec<(u64, u64)> {
        let n = flags.len();
        let mut out = Vec::new();
        for i in 0..n {
            let starts = flags[i] && (i == 0 || !flags[i - 1]);
            if starts {
                let mut j = i;
                while j + 1 < n && flags[j + 1] {
                    j += 1;
                }
                out.push((i as u64, j as u64));
            }
        }
        out
    }

    #[test]
    fn full_run_is_one_pass() {
        let recs = timeline(&vec![vec![true]; 12]);
        let passes = extract_passes(&recs, 0, 10.0);
        assert_eq!(passes.len(), 1);
        assert_eq!(passes[0].samples(), 12);
        assert!((passes[0].duration_min - 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_passes_from_gap() {
        let recs = timeline(&[vec![true], vec![true], vec![false], vec![true]]);
        let passes = extract_passes(&recs, 0, 10.0);
        let secs: Vec<f64> = passes.iter().map(|p| p.duration_min * 60.0).collect();
        assert_eq!(secs.len(), 2);
        assert!((secs[0] - 20.0).abs() < 1e-9 && (secs[1] - 10.0).abs() < 1e-9);
        assert_eq!(rescan(&[true, true, false, true]), vec![(0, 1), (3, 3)]);
    }

    #[test]
    fn empty_timeline_has_no_access() {
        let recs = timeline(&vec![vec![false, false]; 5]);
        assert!(extract_accesses(&recs, 10.0).is_empty());
        assert_eq!(coverage_probability(&recs), 0.0);
        let s = summarize(&recs, &options(10.0, ReportingMode::AllVisible));
        assert_eq!(s.access_count, 0);
        assert_eq!(s.avg_access_min, None);
        assert_eq!(s.fspl_min_db, None);
    }

    #[test]
    fn abutting_passes_form_one_access() {
        let rows: Vec<Vec<bool>> = (0..10).map(|i| vec![i < 5, i >= 5]).collect();
        let recs = timeline(&rows);
        let acc = extract_accesses(&recs, 10.0);
        assert_eq!(acc.len(), 1);
        assert_eq!((acc[0].start_step, acc[0].end_step), (0, 9));
        assert_eq!(extract_all_passes(&recs, 10.0).len(), 2);
    }

    #[test]
    fn half_covered() {
        let rows: Vec<Vec<bool>> = (0..10).map(|i| vec![i % 2 == 0]).collect();
        assert_eq!(coverage_probability(&timeline(&rows)), 0.5);
    }

    #[test]
    fn fixed_range_fspl_is_flat() {
        let recs: Vec<StepRecord> = (0..20)
            .map(|i| StepRecord {
                step_index: i,
                visible: vec![sat(4, 1657.0, 0.0)],
                serving: Some(4),
            })
            .collect();
        let s = summarize(&recs, &options(10.0, ReportingMode::AllVisible));
        let expected = fspl_db(1657.0, 10.7e9).unwrap();
        assert_eq!(s.fspl_min_db, Some(expected));
        assert_eq!(s.fspl_max_db, Some(expected));
        assert_eq!(s.fspl_avg_db, Some(expected));
        assert_eq!(s.fspl_samples, 20);
        assert_eq!(s.max_doppler_rate_khz_s, Some(0.0));
        assert_eq!(s.max_access_min, Some(20.0 * 10.0 / 60.0));
    }

    #[test]
    fn serving_only_mode_ignores_other_samples() {
        let recs: Vec<StepRecord> = (0..4)
            .map(|i| StepRecord {
                step_index: i,
                visible: vec![sat(1, 800.0, -5.0), sat(2, 2000.0, 6.0)],
                serving: Some(1),
            })
            .collect();
        let all = summarize(&recs, &options(10.0, ReportingMode::AllVisible));
        let serving = summarize(&recs, &options(10.0, ReportingMode::ServingOnly));
        assert_eq!(all.fspl_samples, 8);
        assert_eq!(serving.fspl_samples, 4);
        assert_eq!(serving.fspl_max_db, Some(fspl_db(800.0, 10.7e9).unwrap()));
        assert!(all.max_doppler_khz.unwrap() > serving.max_doppler_khz.unwrap());
        // The pass and access structure is independent of the reporting mode.
        assert_eq!(all.pass_count, serving.pass_count);
    }

    #[test]
    fn pass_doppler_rate_matches_series_rate() {
        let step = 10.0;
        let rates: Vec<f64> = (0..30)
            .map(|i| -7.0 + 0.02 * (i as f64).powi(2) - 0.3 * i as f64)
            .collect();
        let recs: Vec<StepRecord> = rates
            .iter()
            .enumerate()
            .map(|(i, rr)| StepRecord {
                step_index: i as u64 + 100,
                visible: vec![sat(9, 1500.0, *rr)],
                serving: Some(9),
            })
            .collect();
        let offsets: Vec<f64> = rates.iter().map(|rr| doppler_offset(*rr, 10.7e9)).collect();
        let oracle = doppler_rate(&offsets, step)
            .unwrap()
            .iter()
            .map(|r| r.abs() / 1e3)
            .fold(0.0, f64::max);
        let s = summarize(&recs, &options(step, ReportingMode::AllVisible));
        assert!((s.max_doppler_rate_khz_s.unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn fleet_usage_fractions() {
        let fleets = vec![
            Fleet {
                name: "a".into(),
                first_sat: 0,
                count: 10,
            },
            Fleet {
                name: "b".into(),
                first_sat: 10,
                count: 10,
            },
        ];
        let recs: Vec<StepRecord> = (0..10)
            .map(|i| {
                let id = if i < 3 { 2 } else { 15 };
                StepRecord {
                    step_index: i,
                    visible: if i == 9 { vec![] } else { vec![sat(id, 900.0, 0.0)] },
                    serving: (i != 9).then_some(id),
                }
            })
            .collect();
        let mut opts = options(10.0, ReportingMode::AllVisible);
        opts.fleets = fleets;
        let s = summarize(&recs, &opts);
        assert_eq!(s.covered_steps, 9);
        assert_eq!(s.fleet_usage[0].served_steps, 3);
        assert!((s.fleet_usage[0].fraction - 3.0 / 9.0).abs() < 1e-12);
        assert!((s.fleet_usage[1].fraction - 6.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn pass_histogram_counts() {
        // Passes of 3, 7 and 12 samples at 10 s: 0.5, 1.1(6) and 2 minutes.
        let mut rows = Vec::new();
        for len in [3, 7, 12] {
            rows.extend(std::iter::repeat_n(vec![true], len));
            rows.push(vec![false]);
        }
        let s = summarize(&timeline(&rows), &options(10.0, ReportingMode::AllVisible));
        assert_eq!(s.pass_duration_hist_min, vec![1, 1, 1]);
        assert_eq!(s.fraction_of_passes_shorter_than(1), Some(1.0 / 3.0));
        assert_eq!(s.fraction_of_passes_shorter_than(5), Some(1.0));
    }

    #[test]
    fn random_timelines_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in 0..1000 {
            let steps = rng.random_range(1..=1000usize);
            let sats = rng.random_range(1..=5usize);
            // Vary the density so that both sparse and near-full timelines occur.
            let density: f64 = rng.random_range(0.05..0.95);
            let pattern: Vec<Vec<bool>> = (0..steps)
                .map(|_| (0..sats).map(|_| rng.random_bool(density)).collect())
                .collect();
            let recs = timeline(&pattern);
            let (summary, passes, accesses) =
                summarize_with_intervals(&recs, &options(10.0, ReportingMode::AllVisible));

            let mut expected_passes = Vec::new();
            for s in 0..sats {
                let flags: Vec<bool> = pattern.iter().map(|row| row[s]).collect();
                let oracle = rescan(&flags);
                let got: Vec<(u64, u64)> = extract_passes(&recs, s as u32, 10.0)
                    .iter()
                    .map(|p| (p.start_step, p.end_step))
                    .collect();
                assert_eq!(got, oracle, "case {case} sat {s}");
                expected_passes.extend(oracle.into_iter().map(|(a, b)| (a, s as u32, b)));
            }
            expected_passes.sort();
            let streamed: Vec<(u64, u32, u64)> = passes.iter().map(|p| (p.start_step, p.sat_id, p.end_step)).collect();
            assert_eq!(streamed, expected_passes, "case {case}");

            let any: Vec<bool> = pattern.iter().map(|row| row.iter().any(|b| *b)).collect();
            let oracle_acc = rescan(&any);
            let batch_acc: Vec<(u64, u64)> = extract_accesses(&recs, 10.0)
                .iter()
                .map(|a| (a.start_step, a.end_step))
                .collect();
            let stream_acc: Vec<(u64, u64)> = accesses.iter().map(|a| (a.start_step, a.end_step)).collect();
            assert_eq!(batch_acc, oracle_acc, "case {case}");
            assert_eq!(stream_acc, oracle_acc, "case {case}");

            let covered = any.iter().filter(|b| **b).count() as u64;
            assert_eq!(summary.covered_steps, covered);
            assert_eq!(accesses.iter().map(AccessInterval::samples).sum::<u64>(), covered);
            let visible_total: usize = pattern.iter().map(|r| r.iter().filter(|b| **b).count()).sum();
            assert_eq!(summary.visible_hist.iter().sum::<u64>(), steps as u64);
            assert!((summary.visible_avg - visible_total as f64 / steps as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_single_cell_is_plain_mean() {
        let mk = |cov: f64| {
            let mut s = summarize(&[], &options(10.0, ReportingMode::AllVisible));
            s.coverage_probability = cov;
            s
        };
        let summaries = vec![mk(0.2), mk(0.4), mk(0.9)];
        let users = vec![(401.0, 51.0), (410.0, 52.0), (424.9, 54.9)];
        let g = bin_grid(&users, &summaries, 25.0, 5.0, GridMetric::Coverage).unwrap();
        assert_eq!(g.cells.len(), 1);
        assert_eq!(g.cells[0].count, 3);
        assert!((g.cells[0].value.unwrap() - 50.0).abs() < 1e-12);
        assert_eq!((g.cells[0].alt_bin_low_km, g.cells[0].inc_bin_low_deg), (400.0, 50.0));
    }

    #[test]
    fn grid_flags_empty_cells_and_rejects_bad_bins() {
        let s = summarize(&[], &options(10.0, ReportingMode::AllVisible));
        let g = bin_grid(
            &[(360.0, 1.0), (420.0, 12.0)],
            &[s.clone(), s.clone()],
            25.0,
            5.0,
            GridMetric::Coverage,
        )
        .unwrap();
        assert_eq!(g.cells.len(), 3 * 3);
        assert_eq!(g.populated().count(), 2);
        let empty = g.cell_at(385.0, 6.0).unwrap();
        assert_eq!((empty.value, empty.count), (None, 0));
        assert_eq!(g.cell_at(360.0, 1.0).unwrap().value, Some(0.0));
        let csv = g.to_csv();
        assert!(csv.starts_with("alt_bin_low_km,inc_bin_low_deg,metric,value,count\n"));
        assert!(csv.contains("375,5,coverage,,0\n"));
        assert!(matches!(
            bin_grid(&[], &[], 0.0, 5.0, GridMetric::Coverage),
            Err(GridError::BinWidth { .. })
        ));
        assert!(matches!(
            bin_grid(&[(400.0, 10.0)], &[], 25.0, 5.0, GridMetric::Coverage),
            Err(GridError::LengthMismatch { .. })
        ));
        assert_eq!("fspl_avg_db".parse::<GridMetric>().unwrap(), GridMetric::FsplAvgDb);
    }

    fn arb_records() -> impl Strategy<Value = Vec<StepRecord>> {
        proptest::collection::vec(
            proptest::collection::vec((0u32..4, 500.0..3000.0f64, -7.0..7.0f64, any::<bool>()), 0..4),
            1..200,
        )
        .prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, row)| {
                    let mut visible: Vec<VisibleSat> = row.iter().map(|(id, r, rr, _)| sat(*id, *r, *rr)).collect();
                    visible.sort_by_key(|v| v.sat_id);
                    visible.dedup_by_key(|v| v.sat_id);
                    let serving = visible.first().map(|v| v.sat_id);
                    StepRecord {
                        step_index: i as u64,
                        visible,
                        serving,
                    }
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn summary_invariants(recs in arb_records(), step in 1.0..60.0f64) {
            for mode in [ReportingMode::AllVisible, ReportingMode::ServingOnly] {
                let (s, passes, accesses) = summarize_with_intervals(&recs, &options(step, mode));
                prop_assert!((0.0..=1.0).contains(&s.coverage_probability));
                let access_samples: u64 = accesses.iter().map(AccessInterval::samples).sum();
                prop_assert_eq!(access_samples as f64 / s.total_steps as f64, s.coverage_probability);
                prop_assert_eq!(s.coverage_probability, coverage_probability(&recs));
                for p in &passes {
                    prop_assert!(accesses.iter().any(|a| a.contains(p)));
                }
                for w in accesses.windows(2) {
                    prop_assert!(w[1].start_step >= w[0].end_step + 2);
                }
                let total_min = duration_min(s.total_steps, step);
                if let (Some(avg), Some(max)) = (s.avg_access_min, s.max_access_min) {
                    prop_assert!(avg <= max + 1e-12 && max <= total_min + 1e-12);
                }
                prop_assert!(s.visible_min as f64 <= s.visible_avg && s.visible_avg <= s.visible_max as f64);
                if let (Some(lo), Some(avg), Some(hi)) = (s.fspl_min_db, s.fspl_avg_db, s.fspl_max_db) {
                    prop_assert!(lo <= avg && avg <= hi);
                }
                prop_assert_eq!(s.pass_duration_hist_min.iter().sum::<u64>(), s.pass_count);
                prop_assert_eq!(s.fspl_hist_db.values().sum::<u64>(), s.fspl_samples);
            }
        }

        #[test]
        fn single_satellite_passes_equal_accesses(flags in proptest::collection::vec(any::<bool>(), 1..300)) {
            let rows: Vec<Vec<bool>> = flags.iter().map(|f| vec![*f]).collect();
            let recs = timeline(&rows);
            let passes: Vec<(u64, u64)> = extract_passes(&recs, 0, 10.0).iter().map(|p| (p.start_step, p.end_step)).collect();
            let accesses: Vec<(u64, u64)> = extract_accesses(&recs, 10.0).iter().map(|a| (a.start_step, a.end_step)).collect();
            prop_assert_eq!(passes, accesses);
        }
    }
}
