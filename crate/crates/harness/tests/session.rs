use std::fs;
use std::path::Path;
use std::process::Command;

use xrsim_harness::session::{AUDIO_FILE, EST_FILE, FRAME_INDEX, MTP_FILE, REPORT_FILE, TRACE_FILE};
use xrsim_harness::{analyze, load_report, replay, run_session, SessionConfig};

fn short(extra: &[&str]) -> SessionConfig {
    let mut overrides = vec!["duration_s=2", "quality.every=40"];
    overrides.extend_from_slice(extra);
    SessionConfig::default().with_overrides(&overrides).unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let config = short(&["vio.pos_sigma=0.01", "imu_noise.gyro_sigma=0.002", "costs.application={kind=\"normal\", mean_ms=4.0, std_ms=1.0}"]);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run_session(&config, a.path()).unwrap();
    let rb = run_session(&config, b.path()).unwrap();
    assert_eq!(ra, rb);
    for f in [TRACE_FILE, REPORT_FILE, MTP_FILE, EST_FILE, AUDIO_FILE, FRAME_INDEX] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f} differs");
    }
    assert!(ra.is_ok(), "{:?}", ra.violations);
}

#[test]
fn different_seeds_give_different_noise() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run_session(&short(&["seed=1", "vio.pos_sigma=0.01"]), a.path()).unwrap();
    let rb = run_session(&short(&["seed=2", "vio.pos_sigma=0.01"]), b.path()).unwrap();
    assert_ne!(ra.quality.ate_m, rb.quality.ate_m);
}

#[test]
fn replay_reproduces_the_report() {
    let config = short(&["vio.pos_sigma=0.005"]);
    let dir = tempfile::tempdir().unwrap();
    let original = run_session(&config, dir.path()).unwrap();
    let (o1, o2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let r1 = replay(dir.path(), o1.path()).unwrap();
    replay(dir.path(), o2.path()).unwrap();
    assert_eq!(r1.quality, original.quality);
    assert_eq!(r1, original);
    assert_eq!(read(o1.path(), REPORT_FILE), read(o2.path(), REPORT_FILE));
    assert_eq!(read(o1.path(), REPORT_FILE), read(dir.path(), REPORT_FILE));
    assert_eq!(load_report(o1.path()).unwrap(), r1);
}

#[test]
fn damaged_dataset_gives_flagged_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let original = run_session(&short(&[]), dir.path()).unwrap();

    let est = dir.path().join(EST_FILE);
    let text = fs::read_to_string(&est).unwrap();
    let keep: Vec<&str> = text.lines().take(400).collect();
    fs::write(&est, format!("{}\n1234,not,a,row\n", keep.join("\n"))).unwrap();
    let frames = fs::read_to_string(dir.path().join(FRAME_INDEX)).unwrap();
    let first = frames.lines().nth(1).unwrap().split(',').next().unwrap().parse::<u64>().unwrap();
    fs::remove_file(dir.path().join(format!("frames/frame_{first:06}_display.ppm"))).unwrap();
    fs::remove_file(dir.path().join(AUDIO_FILE)).unwrap();

    let out = tempfile::tempdir().unwrap();
    let r = replay(dir.path(), out.path()).unwrap();
    let flags = &r.quality.flags;
    assert!(flags.contains(&"trajectory_truncated".to_owned()), "{flags:?}");
    assert!(flags.contains(&"trajectory_rows_rejected:1".to_owned()), "{flags:?}");
    assert!(flags.contains(&"frames_incomplete".to_owned()), "{flags:?}");
    assert!(flags.contains(&"audio_missing".to_owned()), "{flags:?}");
    assert_eq!(r.images.sampled + 1, original.images.sampled);
    assert!(r.quality.ate_m.is_finite());
    assert_eq!(r.frame_stats, original.frame_stats);
}

#[test]
fn analysis_needs_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    run_session(&short(&[]), dir.path()).unwrap();
    fs::remove_file(dir.path().join(TRACE_FILE)).unwrap();
    assert!(analyze(dir.path()).is_err());
}

#[test]
fn wall_clock_session_completes() {
    let dir = tempfile::tempdir().unwrap();
    let config = short(&["clock=wall", "duration_s=1", "quality.enabled=false"]);
    let r = run_session(&config, dir.path()).unwrap();
    let imu = &r.frame_stats.components["imu"];
    assert!(imu.invocations > 400, "{}", imu.invocations);
    assert!(r.mtp.consistent);
    assert!(r.quality.flags.is_empty() || !r.quality.flags.contains(&"frames_missing".to_owned()));
    assert_eq!(r.images.sampled, 0);
}

#[test]
fn cli_reports_and_validates() {
    let exe = env!("CARGO_BIN_EXE_xrsim");
    let out = Command::new(exe).args(["validate-config", "--set", "seed=5"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(SessionConfig::from_toml_str(&text).unwrap().seed, 5);

    let bad = Command::new(exe).args(["validate-config", "--set", "imu_rate_hz=2000"]).output().unwrap();
    assert!(!bad.status.success());

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("session.toml");
    fs::write(&cfg, "duration_s = 1.0\n[quality]\nevery = 60\n").unwrap();
    let session = dir.path().join("out");
    let run = Command::new(exe)
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&session)
        .output()
        .unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).contains("MTP"));

    let report = Command::new(exe).arg("report").arg(&session).output().unwrap();
    assert!(report.status.success());
    assert_eq!(report.stdout, run.stdout);
}
