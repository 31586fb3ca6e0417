use lbsim::metrics::RunStatus;
use lbsim::preset::{all_lb_schemes, recovery_schemes, roce, tcp};
use lbsim::scenario::{parse_scenario, Failures, RecoveryConfig, Scenario, WorkloadKind};
use lbsim::sim::run_scenario;
use proptest::prelude::*;

fn small() -> Scenario {
    let mut sc = Scenario::default();
    sc.topology.k = 4;
    sc.workload.message_packets = 40;
    sc
}

fn perm(m: u32) -> Scenario {
    let mut sc = small();
    sc.workload.kind = WorkloadKind::Permutations;
    sc.workload.m = m;
    sc
}

#[test]
fn every_lb_and_recovery_completes_and_conserves() {
    for lb in all_lb_schemes() {
        for rec in recovery_schemes().into_iter().chain([RecoveryConfig::IdealCoding]) {
            for base in [small(), perm(1)] {
                let mut sc = base;
                sc.lb = lb;
                sc.recovery = rec;
                let m = run_scenario(&sc, 3).unwrap();
                let what = format!("{} {}", lb.name(), rec.name());
                assert_eq!(m.status, RunStatus::Complete, "{what}");
                assert!(m.conservation_ok(), "{what}");
                assert!(m.normalized_cct() >= 0.999, "{what}: {}", m.normalized_cct());
            }
        }
    }
}

#[test]
fn identical_inputs_give_identical_metrics() {
    let mut sc = small();
    sc.recovery = tcp(3);
    sc.failures = Failures::Flaky {
        links_per_pod: 2,
        arrival_mean_us: 20.0,
        duration_mean_us: 5.0,
    };
    let a = run_scenario(&sc, 11).unwrap();
    let b = run_scenario(&sc, 11).unwrap();
    assert_eq!(a, b);
    let c = run_scenario(&sc, 12).unwrap();
    assert_ne!(a.cct, c.cct);
}

#[test]
fn pfc_fabric_is_lossless() {
    for base in [small(), perm(1), perm(3)] {
        let mut sc = base;
        sc.recovery = roce();
        sc.workload.message_packets = 100;
        let m = run_scenario(&sc, 5).unwrap();
        assert!(m.is_complete());
        assert_eq!(m.network.data_drops, 0);
        assert_eq!(m.network.control_drops, 0);
        if sc.workload.kind == WorkloadKind::AllToAll {
            assert!(m.network.pfc_pauses > 0);
        }
    }
}

#[test]
fn trimming_turns_drops_into_headers() {
    let mut sc = small();
    sc.recovery = RecoveryConfig::Trim {
        mode: lbsim::scenario::TrimModeConfig::Reflect,
        rto_us: None,
    };
    sc.workload.message_packets = 200;
    let m = run_scenario(&sc, 1).unwrap();
    assert!(m.is_complete());
    assert_eq!(m.network.data_drops, 0);
    assert!(m.network.trims > 0);
}

#[test]
fn slow_pacing_finishes_near_message_over_rate() {
    let mut sc = small();
    sc.topology.buffer_bytes = 409_600;
    sc.rate_coefficient = 0.5;
    let m = run_scenario(&sc, 1).unwrap();
    assert!(m.is_complete());
    assert_eq!(m.network.data_drops, 0);
    let norm = m.normalized_cct();
    assert!((2.0..2.1).contains(&norm), "{norm}");
}

#[test]
fn time_limit_is_reported_not_hidden() {
    let sc = parse_scenario(
        r#"{"topology": {"k": 4}, "workload": {"message_packets": 200}, "caps": {"time_limit_ms": 0.05}}"#,
    )
    .unwrap();
    let m = run_scenario(&sc, 1).unwrap();
    assert_eq!(m.status, RunStatus::TimeLimit);
    assert!(!m.is_complete());
    assert!(m.conservation_ok());
}

#[test]
fn event_cap_reports_livelock() {
    let mut sc = small();
    sc.caps.event_cap = 1000;
    let m = run_scenario(&sc, 1).unwrap();
    assert_eq!(m.status, RunStatus::Livelock);
}

#[test]
fn static_failure_slows_ecmp_collective() {
    let mut healthy = small();
    healthy.workload.message_packets = 100;
    healthy.lb = lbsim::scenario::LbScheme::HostSpray;
    let mut failed = healthy.clone();
    failed.failures = Failures::Static {
        links_per_pod: 2,
        frac_lost: 0.9,
    };
    let a = run_scenario(&healthy, 2).unwrap();
    let b = run_scenario(&failed, 2).unwrap();
    assert!(b.cct > a.cct, "{} vs {}", b.cct.as_us_f64(), a.cct.as_us_f64());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_small_scenarios_conserve(
        lb in 0usize..7,
        rec in 0usize..6,
        c in 0.3f64..=1.0,
        buf in prop::sample::select(vec![8192u64, 32768, 131072]),
        m in 1u32..4,
        a2a in any::<bool>(),
        seed in 0u64..1000,
    ) {
        let mut sc = if a2a { small() } else { perm(m) };
        sc.workload.message_packets = 25;
        sc.lb = all_lb_schemes()[lb];
        sc.recovery = recovery_schemes()
            .into_iter()
            .chain([RecoveryConfig::IdealCoding])
            .nth(rec)
            .unwrap();
        sc.rate_coefficient = c;
        sc.topology.buffer_bytes = buf;
        let met = run_scenario(&sc, seed).unwrap();
        prop_assert!(met.conservation_ok());
        prop_assert!(met.is_complete());
        for f in &met.flows {
            prop_assert!(f.delivered >= sc.workload.message_packets as u64);
        }
    }
}
