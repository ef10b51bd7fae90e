use proptest::prelude::*;
use xrsim_core::{ClockMode, CostModel};
use xrsim_harness::{HarnessError, SessionConfig};

#[test]
fn defaults_are_valid_and_roundtrip() {
    let c = SessionConfig::default();
    c.validate().unwrap();
    let text = c.to_toml_string().unwrap();
    let back = SessionConfig::from_toml_str(&text).unwrap();
    assert_eq!(back, c);
    assert_eq!(back.to_toml_string().unwrap(), text);
}

#[test]
fn empty_file_means_defaults() {
    assert_eq!(SessionConfig::from_toml_str("").unwrap(), SessionConfig::default());
}

#[test]
fn partial_file_keeps_other_defaults() {
    let c = SessionConfig::from_toml_str("seed = 9\n[vio]\nlatency_ms = 80.0\n").unwrap();
    assert_eq!(c.seed, 9);
    assert_eq!(c.vio.latency_ms, 80.0);
    assert_eq!(c.imu_rate_hz, SessionConfig::default().imu_rate_hz);
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(matches!(
        SessionConfig::from_toml_str("sede = 3\n"),
        Err(HarnessError::Config(_))
    ));
}

#[test]
fn overrides_reach_nested_tables() {
    let c = SessionConfig::default()
        .with_overrides(&[
            "seed=42",
            "clock=wall",
            "vio.latency_ms=70",
            "display_rate_hz=90",
            "costs.reprojection={kind=\"constant\", ms=12.0}",
        ])
        .unwrap();
    assert_eq!(c.seed, 42);
    assert_eq!(c.clock, ClockMode::Wall);
    assert_eq!(c.vio.latency_ms, 70.0);
    assert_eq!(c.display_rate_hz, 90.0);
    assert_eq!(c.cost("reprojection"), CostModel::Constant { ms: 12.0 });
    assert_eq!(c.cost("camera"), CostModel::Zero);
    c.validate().unwrap();
}

#[test]
fn malformed_overrides_are_errors() {
    let c = SessionConfig::default();
    assert!(c.with_overrides(&["seed"]).is_err());
    assert!(c.with_overrides(&["seed=abc"]).is_err());
    assert!(c.with_overrides(&["vio.nope=1"]).is_err());
}

#[test]
fn out_of_range_values_fail_validation() {
    for bad in [
        "camera_rate_hz=10",
        "camera_rate_hz=101",
        "imu_rate_hz=900",
        "display_rate_hz=200",
        "audio_rate_hz=40",
        "audio_block=4096",
        "width=3840",
        "height=2160",
        "fov_deg=180",
        "duration_s=0",
        "quality.every=0",
        "audio.order=4",
        "costs.unknown_plugin={kind=\"zero\"}",
        "costs.imu={kind=\"constant\", ms=-1.0}",
    ] {
        let c = SessionConfig::default().with_overrides(&[bad]);
        let err = c.and_then(|c| c.validate());
        assert!(matches!(err, Err(HarnessError::Config(_))), "{bad} accepted");
    }
}

#[test]
fn boundary_rates_are_accepted() {
    for ok in [
        "camera_rate_hz=15",
        "camera_rate_hz=100",
        "imu_rate_hz=800",
        "display_rate_hz=30",
        "display_rate_hz=144",
        "audio_rate_hz=96",
        "audio_block=256",
        "audio_block=2048",
    ] {
        SessionConfig::default().with_overrides(&[ok]).unwrap().validate().unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn serialization_is_idempotent(
        seed in 0u64..i64::MAX as u64,
        camera in 15.0f64..=100.0,
        imu in 1.0f64..=800.0,
        display in 30.0f64..=144.0,
        latency in 0.0f64..200.0,
    ) {
        let c = SessionConfig::default()
            .with_overrides(&[
                format!("seed={seed}"),
                format!("camera_rate_hz={camera:?}"),
                format!("imu_rate_hz={imu:?}"),
                format!("display_rate_hz={display:?}"),
                format!("vio.latency_ms={latency:?}"),
            ])
            .unwrap();
        prop_assert!(c.validate().is_ok());
        let once = c.to_toml_string().unwrap();
        let back = SessionConfig::from_toml_str(&once).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_toml_string().unwrap(), once);
    }
}
