use std::collections::BTreeMap;
use std::time::Duration;

use proptest::prelude::*;
use xrsim_core::{InvocationRecord, Timestamp};
use xrsim_metrics::{cpu_attribution, frame_stats, record_mtp, write_mtp_csv};

fn record(name: &str, seq: u64, start: u64, dur: u64, cpu: u64) -> InvocationRecord {
    InvocationRecord::completed(
        name,
        seq,
        Timestamp::from_nanos(start),
        Timestamp::from_nanos(start + dur),
        Duration::from_nanos(cpu),
        Duration::from_millis(5),
    )
}

#[test]
fn mtp_csv_columns() {
    let ms = |v: u64| Timestamp::from_nanos(v * 1_000_000);
    let r = record_mtp(3, ms(0), ms(1), ms(3), ms(7)).unwrap();
    let mut buf = Vec::new();
    write_mtp_csv(&mut buf, &[r]).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "seq,ts_ns,imu_age_ns,reprojection_ns,swap_ns,total_ns\n3,7000000,1000000,2000000,4000000,7000000\n"
    );
}

#[test]
fn stats_are_reproducible() {
    let trace: Vec<_> = (0..50).map(|i| record("a", i, i * 1_000_000, 300_000 + i * 1000, 10)).collect();
    let targets = BTreeMap::from([("a".to_owned(), Some(1000.0))]);
    let s1 = frame_stats(&trace, &targets, Duration::from_millis(50)).unwrap();
    let s2 = frame_stats(&trace.clone(), &targets, Duration::from_millis(50)).unwrap();
    assert_eq!(s1, s2);
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn mtp_parts_sum_exactly(imu in 0u64..1_000_000_000, a in 0u64..50_000_000, b in 0u64..50_000_000, c in 0u64..50_000_000) {
        let t0 = Timestamp::from_nanos(imu);
        let t1 = Timestamp::from_nanos(imu + a);
        let t2 = Timestamp::from_nanos(imu + a + b);
        let t3 = Timestamp::from_nanos(imu + a + b + c);
        let r = record_mtp(0, t0, t1, t2, t3).unwrap();
        prop_assert!(r.is_consistent());
        prop_assert_eq!(r.total.as_nanos() as u64, a + b + c);
    }

    #[test]
    fn cpu_shares_sum_to_one_in_any_order(
        cpus in prop::collection::vec((0usize..4, 0u64..10_000_000), 1..60),
        rotate in 0usize..60,
    ) {
        let names = ["camera", "imu", "vio", "audio"];
        let mut trace: Vec<_> = cpus.iter().enumerate().map(|(i, (n, c))| record(names[*n], i as u64, 0, 1, *c)).collect();
        let a = cpu_attribution(&trace);
        prop_assert!((a.values().sum::<f64>() - 1.0).abs() < 1e-9);
        let k = rotate % trace.len();
        trace.rotate_left(k);
        trace.reverse();
        let b = cpu_attribution(&trace);
        for (k, v) in &a {
            prop_assert!((v - b[k]).abs() < 1e-12);
        }
    }
}
