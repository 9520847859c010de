use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_loopcal"));
    c.env_remove("LOOPCAL_OUT_DIR");
    c
}

fn asset(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_no_drift_writes_versioned_logs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = asset("scenarios/no_drift.toml");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("update_events=0\n"));
    let frames = fs::read_to_string(dir.path().join("frames.csv")).unwrap();
    let mut lines = frames.lines();
    assert_eq!(lines.next(), Some("# loopcal frame-log v1"));
    assert!(lines.next().unwrap().starts_with("frame,pair,decision,rot_estimate_deg,trans_estimate_m,event"));
    assert_eq!(lines.count(), 3000);
    let events = fs::read_to_string(dir.path().join("events.log")).unwrap();
    assert_eq!(events, "# loopcal event-log v1\n");
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn simulate_step_reports_two_frame_latency() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = asset("scenarios/step_yaw_0p2deg.toml");
    let o = bin()
        .args(["simulate", "--config", cfg.to_str().unwrap()])
        .env("LOOPCAL_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("drift onset=50 sensor=lidar latency_frames=2 localized=true"));
    let events = fs::read_to_string(dir.path().join("events.log")).unwrap();
    assert!(events.lines().nth(1).unwrap().starts_with("frame=51 effective_frame=52 pair=lc"));
}

#[test]
fn simulate_is_deterministic_and_seed_overridable() {
    let cfg = asset("scenarios/step_yaw_0p2deg.toml");
    let logs: Vec<String> = ["7", "7", "8"]
        .iter()
        .map(|seed| {
            let dir = tempfile::tempdir().unwrap();
            let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", seed, "--out", dir.path().to_str().unwrap()]);
            assert!(o.status.success());
            fs::read_to_string(dir.path().join("frames.csv")).unwrap()
        })
        .collect();
    assert_eq!(logs[0], logs[1]);
    assert_ne!(logs[0], logs[2]);
}

#[test]
fn simulate_batch_partitions_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--config", asset("scenarios").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["no_drift", "step_yaw_0p2deg"] {
        assert!(dir.path().join(name).join("frames.csv").exists());
    }
}

#[test]
fn missing_config_exits_with_usage_code() {
    let o = run(&["simulate", "--config", "/definitely/missing.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/definitely/missing.toml"));
}

#[test]
fn malformed_config_is_line_anchored_and_leaves_no_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[scenario]\nframes = 10\n\n[ground_truth]\nlc = \"1 0 0 0 0 0\"\nrc = \"1 0 0 0 0 0 0\"\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.toml:5:"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn clap_usage_errors_exit_two() {
    assert_eq!(run(&["simulate"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn refine_consistent_triple_has_zero_residuals() {
    let o = run(&["refine", "--config", asset("fixtures/consistent_triple.txt").to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(2).take(5).collect();
    assert_eq!(rows.len(), 5);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(*row, format!("{i},0.000000000,0.000000000"));
    }
}

#[test]
fn refine_inconsistent_fixture_decreases() {
    let o = run(&["refine", "--config", asset("fixtures/inconsistent_triple.txt").to_str().unwrap(), "--iterations", "6"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let res: Vec<(f64, f64)> = out
        .lines()
        .skip(2)
        .take(7)
        .map(|l| {
            let v: Vec<f64> = l.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
            (v[0], v[1])
        })
        .collect();
    assert!(res[0].0 > 1.0);
    for w in res.windows(2) {
        assert!(w[1].0 < w[0].0 && w[1].1 < w[0].1);
    }
}

#[test]
fn refine_zero_iterations_echoes_input() {
    let input = asset("fixtures/inconsistent_triple.txt");
    let o = run(&["refine", "--config", input.to_str().unwrap(), "--iterations", "0"]);
    let out = stdout(&o);
    let refined: Vec<&str> = out.lines().skip_while(|l| *l != "refined").skip(1).collect();
    let original: Vec<String> = fs::read_to_string(&input)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(String::from)
        .collect();
    assert_eq!(refined.len(), original.len());
    for (a, b) in refined.iter().zip(&original) {
        let fields = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
        let (fa, fb) = (fields(a), fields(b));
        assert_eq!(fa[0], fb[0]);
        for (x, y) in fa[1..].iter().zip(&fb[1..]) {
            let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
            assert!((x - y).abs() < 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn refine_rejects_bad_records() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.txt");
    fs::write(&f, "lc 1 0 0 0 0 0 0\nrc 1 0 zero 0 0 0 0\n").unwrap();
    let o = run(&["refine", "--config", f.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("bad.txt:2:"));
}

#[test]
fn losses_at_ground_truth_are_zero() {
    let o = run(&["losses", "--config", asset("fixtures/losses_zero.toml").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let row = out.lines().nth(2).unwrap();
    let values: Vec<f64> = row.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
    assert_eq!(values.len(), 7);
    assert!(values.iter().all(|v| v.abs() < 1e-12), "{row}");
}

#[test]
fn losses_with_identity_prediction_are_positive() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "losses",
        "--config",
        asset("fixtures/losses_identity_pred.toml").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("losses.csv")).unwrap();
    let values: Vec<f64> = csv.lines().nth(2).unwrap().split(',').skip(1).map(|x| x.parse().unwrap()).collect();
    assert!(values[0] > 0.0 && values[3] > 0.0 && values[6] > 0.0);
}

#[test]
fn project_three_point_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["project", "--config", asset("fixtures/cloud3.xyz").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("depth 640x480 occupied=3"));
    assert!(out.contains("bev 300x600 occupied=3"));
    for f in ["depth.pgm", "bev.pgm", "depth.csv", "bev.csv"] {
        assert!(dir.path().join(f).exists());
    }
    assert!(fs::read_to_string(dir.path().join("bev.pgm")).unwrap().starts_with("P2\n300 600\n255\n"));
}

#[test]
fn bench_reports_every_radius() {
    let o = run(&["bench", "--d", "3", "--reps", "1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "d,channels,median_ns");
    assert_eq!(rows.len(), 4);
    assert!(rows[3].starts_with("3,49,"));
}
