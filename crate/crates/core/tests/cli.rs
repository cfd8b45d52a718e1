//! Black-box tests of the `spacelink` binary.

use std::path::Path;
use std::process::{Command, Output};

fn spacelink(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spacelink"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_CONFIG: &str = r#"
duration = 1200
step = 10
seed = 3
output_directory = "out"

[[constellations]]
name = "ring"
source = { kind = "walker", shells = [{ altitude = 1000, inclination = 60, plane_count = 4, sats_per_plane = 6 }] }

[users]
kind = "population"
main_count = 6
main_altitude = [350, 900]
bands = [{ count = 2, altitude = [470, 570] }]
"#;

#[test]
fn walker_writes_one_record_per_slot() {
    let dir = tempfile::tempdir().unwrap();
    let out = spacelink(
        &[
            "walker",
            "--alt",
            "1200",
            "--inc",
            "87.9",
            "--planes",
            "12",
            "--per-plane",
            "49",
            "--out",
            "polar.tle",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("polar.tle")).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("1 ")).count(), 588);
    assert_eq!(text.lines().filter(|l| l.starts_with("2 ")).count(), 588);
    let parsed = spacelink::propagation::parse_tle_file(&text, spacelink::propagation::ParseMode::Strict).unwrap();
    assert_eq!(parsed.len(), 588);
}

#[test]
fn report_on_missing_file_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = spacelink(&["report", "nope.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("nope.json"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["frobnicate"][..],
        &["walker", "--alt", "500"],
        &["run", "-c", "x.toml", "--policy", "best"],
    ] {
        let out = spacelink(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn validate_flags_a_random_policy_without_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(&path, SMALL_CONFIG.replace("seed = 3\n", "")).unwrap();
    let out = spacelink(&["validate", "-c", "s.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("seed"), "{}", stdout(&out));

    std::fs::write(&path, SMALL_CONFIG).unwrap();
    let out = spacelink(&["validate", "-c", "s.toml"], dir.path());
    assert!(out.status.success(), "{}", stdout(&out));
}

#[test]
fn run_then_report_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.toml"), SMALL_CONFIG).unwrap();
    let out = spacelink(&["run", "-c", "s.toml", "--threads", "2"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("Overall Coverage [%]"));

    let results = dir.path().join("out");
    for file in [
        "summary.json",
        "manifest.json",
        "population.csv",
        "satellites.csv",
        "intervals_ring.csv",
        "grid_ring.csv",
    ] {
        assert!(results.join(file).is_file(), "missing {file}");
    }

    let report = spacelink(&["report", "out/summary.json"], dir.path());
    assert!(report.status.success(), "{}", stderr(&report));
    assert_eq!(
        stdout(&report),
        stdout(&out).split("\n\n24 satellites").next().unwrap().to_string() + "\n"
    );

    let grid = spacelink(
        &[
            "grid",
            "out/summary.json",
            "--metric",
            "visible_avg",
            "--alt-bin",
            "100",
            "--inc-bin",
            "30",
        ],
        dir.path(),
    );
    assert!(grid.status.success(), "{}", stderr(&grid));
    let csv = stdout(&grid);
    assert_eq!(
        csv.lines().next(),
        Some("alt_bin_low_km,inc_bin_low_deg,metric,value,count")
    );
    let counted: u64 = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(counted, 8);

    let bad = spacelink(&["grid", "out/summary.json", "--metric", "latency"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    let bad = spacelink(&["grid", "out/summary.json", "--view", "other"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn unwritable_output_directory_fails_before_the_loop() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.toml"), SMALL_CONFIG).unwrap();
    std::fs::write(dir.path().join("blocker"), "").unwrap();
    let out = spacelink(&["run", "-c", "s.toml", "--out", "blocker/sub"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("blocker"), "{}", stderr(&out));
}

#[test]
fn shipped_configs_validate() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for name in ["iss.toml", "population.toml"] {
        let path = configs.join(name);
        let out = spacelink(&["validate", "-c", path.to_str().unwrap()], &configs);
        assert!(out.status.success(), "{name}: {}{}", stdout(&out), stderr(&out));
        assert!(stdout(&out).contains(": ok"), "{name}: {}", stdout(&out));
    }
}
