//! Named experiment presets, each a list of labelled scenario points.

use crate::scenario::{
    Failures, LbScheme, RecoveryConfig, Scenario, Subflows, AutoTag, TrimModeConfig,
    WorkloadKind,
};

#[derive(Debug, Clone)]
pub struct Point {
    pub label: String,
    pub scenario: Scenario,
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub points: Vec<Point>,
}

impl Preset {
    /// Replaces the seed list of every point.
    pub fn with_seeds(mut self, seeds: &[u64]) -> Preset {
        for p in &mut self.points {
            p.scenario.seeds = seeds.to_vec();
        }
        self
    }

    pub fn total_runs(&self) -> usize {
        self.points.iter().map(|p| p.scenario.seeds.len()).sum()
    }
}

pub const PRESET_NAMES: &[&str] = &[
    "fig1_rate_sweep",
    "fig2_worst_flow",
    "fig3_lb_baseline",
    "fig4_failures",
    "fig5_insufficient",
    "fig6_permutations",
    "fig7_bigbuffer",
    "table2",
    "fig8_recovery_rates",
    "fig9_recovery_workloads",
    "fig10_recovery_failures",
    "fig11_subflows",
    "fig12_subflow_failures",
    "smoke_k4",
];

pub const RATE_SWEEP: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// Rates tried per point when a figure reports the best rate.
pub const RATE_CHOICES: [f64; 3] = [0.6, 0.8, 1.0];

pub const BIG_BUFFER_BYTES: u64 = 409_600;

pub fn all_lb_schemes() -> Vec<LbScheme> {
    vec![
        LbScheme::Ecmp,
        LbScheme::EcmpAr {
            remap_fraction: 0.5,
        },
        LbScheme::Plb {
            repath_packets: 10,
            bad_fraction: 0.4,
        },
        LbScheme::FlowletAr { gap_us: 10.0 },
        LbScheme::HostSpray,
        LbScheme::SwitchSprayRr,
        LbScheme::SwitchSprayAr,
    ]
}

fn spray_schemes() -> Vec<LbScheme> {
    vec![
        LbScheme::HostSpray,
        LbScheme::SwitchSprayRr,
        LbScheme::SwitchSprayAr,
        LbScheme::Ecmp,
    ]
}

pub fn tcp(t: u32) -> RecoveryConfig {
    RecoveryConfig::Tcp {
        dupack_threshold: t,
        partial_ack: false,
        rto_us: None,
    }
}

pub fn trim(mode: TrimModeConfig) -> RecoveryConfig {
    RecoveryConfig::Trim { mode, rto_us: None }
}

pub fn roce() -> RecoveryConfig {
    RecoveryConfig::Roce {
        from_start: false,
        rto_us: None,
    }
}

/// Practical recovery schemes compared against each other.
pub fn recovery_schemes() -> Vec<RecoveryConfig> {
    vec![
        RecoveryConfig::Coding { overhead: 0.05 },
        tcp(3),
        roce(),
        trim(TrimModeConfig::Reflect),
        trim(TrimModeConfig::Rts),
    ]
}

pub fn failure_cases() -> Vec<Failures> {
    vec![
        Failures::Static {
            links_per_pod: 2,
            frac_lost: 0.9,
        },
        Failures::Flaky {
            links_per_pod: 2,
            arrival_mean_us: 100.0,
            duration_mean_us: 10.0,
        },
    ]
}

fn permutations(m: u32) -> Scenario {
    let mut sc = Scenario::default();
    sc.workload.kind = WorkloadKind::Permutations;
    sc.workload.m = m;
    sc
}

/// Subflow variants: a label and (lb, recovery, subflows).
fn subflow_variants() -> Vec<(&'static str, LbScheme, RecoveryConfig, Subflows)> {
    let auto = Subflows::Auto(AutoTag::Auto);
    vec![
        ("sf_t3", LbScheme::Ecmp, tcp(3), auto),
        ("sf_t6", LbScheme::Ecmp, tcp(6), auto),
        ("tcp", LbScheme::HostSpray, tcp(3), Subflows::Fixed(1)),
        (
            "trim",
            LbScheme::HostSpray,
            trim(TrimModeConfig::Reflect),
            Subflows::Fixed(1),
        ),
    ]
}

fn point(label: String, scenario: Scenario) -> Point {
    Point { label, scenario }
}

fn rate_points(recoveries: &[RecoveryConfig], lbs: &[LbScheme]) -> Vec<Point> {
    let mut out = Vec::new();
    for lb in lbs {
        for rec in recoveries {
            for &c in &RATE_SWEEP {
                let mut sc = Scenario::default();
                sc.lb = *lb;
                sc.recovery = *rec;
                sc.rate_coefficient = c;
                out.push(point(format!("{}/{}/c={c}", lb.name(), rec.name()), sc));
            }
        }
    }
    out
}

pub fn preset(name: &str) -> Option<Preset> {
    let (description, points): (&str, Vec<Point>) = match name {
        "fig1_rate_sweep" => (
            "All-to-all CCT vs sending rate, ECMP vs host spraying, ideal coding",
            rate_points(
                &[RecoveryConfig::IdealCoding],
                &[LbScheme::Ecmp, LbScheme::HostSpray],
            ),
        ),
        "fig2_worst_flow" => (
            "Drops of the worst-hit flow vs sending rate, ECMP vs host spraying",
            rate_points(
                &[RecoveryConfig::IdealCoding],
                &[LbScheme::Ecmp, LbScheme::HostSpray],
            ),
        ),
        "fig3_lb_baseline" => (
            "All-to-all CCT for every load balancer, ideal coding, c=1",
            all_lb_schemes()
                .into_iter()
                .map(|lb| {
                    let mut sc = Scenario::default();
                    sc.lb = lb;
                    point(lb.name().to_string(), sc)
                })
                .collect(),
        ),
        "fig4_failures" => {
            let mut pts = Vec::new();
            for (f, p) in [(2, 0.9), (4, 0.6), (9, 0.2)] {
                for lb in all_lb_schemes() {
                    let mut sc = Scenario::default();
                    sc.lb = lb;
                    sc.failures = Failures::Static {
                        links_per_pod: f,
                        frac_lost: p,
                    };
                    pts.push(point(format!("f={f},p={p}/{}", lb.name()), sc));
                }
            }
            (
                "All-to-all CCT under static link degradation with sufficient capacity",
                pts,
            )
        }
        "fig5_insufficient" => (
            "All-to-all CCT when failures leave too little pod uplink capacity",
            all_lb_schemes()
                .into_iter()
                .map(|lb| {
                    let mut sc = Scenario::default();
                    sc.lb = lb;
                    sc.failures = Failures::Static {
                        links_per_pod: 3,
                        frac_lost: 0.9,
                    };
                    point(format!("f=3,p=0.9/{}", lb.name()), sc)
                })
                .collect(),
        ),
        "fig6_permutations" => {
            let mut pts = Vec::new();
            for m in [1, 2, 4, 8, 16, 32, 64, 127] {
                for lb in all_lb_schemes() {
                    let mut sc = permutations(m);
                    sc.lb = lb;
                    pts.push(point(format!("m={m}/{}", lb.name()), sc));
                }
            }
            ("CCT of m concurrent permutations for every load balancer", pts)
        }
        "fig7_bigbuffer" => (
            "All-to-all CCT for every load balancer with 400 KB port buffers",
            all_lb_schemes()
                .into_iter()
                .map(|lb| {
                    let mut sc = Scenario::default();
                    sc.lb = lb;
                    sc.topology.buffer_bytes = BIG_BUFFER_BYTES;
                    point(format!("400KB/{}", lb.name()), sc)
                })
                .collect(),
        ),
        "table2" => {
            let mut pts = Vec::new();
            for (wl, base) in [("all_to_all", Scenario::default()), ("perm1", permutations(1))] {
                for (bl, buf) in [("32KB", 32 * 1024), ("400KB", BIG_BUFFER_BYTES)] {
                    for lb in spray_schemes() {
                        let mut sc = base.clone();
                        sc.lb = lb;
                        sc.topology.buffer_bytes = buf;
                        pts.push(point(format!("{wl}/{bl}/{}", lb.name()), sc));
                    }
                }
            }
            ("Normalized CCT summary across workloads and buffer sizes", pts)
        }
        "fig8_recovery_rates" => (
            "All-to-all CCT vs sending rate for each recovery scheme, host spraying",
            rate_points(&recovery_schemes(), &[LbScheme::HostSpray]),
        ),
        "fig9_recovery_workloads" => {
            let mut pts = Vec::new();
            for m in [1, 2, 4, 8, 16, 40, 127] {
                for rec in recovery_schemes() {
                    for &c in &RATE_CHOICES {
                        let mut sc = permutations(m);
                        sc.recovery = rec;
                        sc.rate_coefficient = c;
                        pts.push(point(format!("m={m}/{}/c={c}", rec.name()), sc));
                    }
                }
            }
            (
                "Recovery schemes across permutation counts; report the best rate per point",
                pts,
            )
        }
        "fig10_recovery_failures" => {
            let mut pts = Vec::new();
            for fail in failure_cases() {
                for rec in recovery_schemes() {
                    for &c in &RATE_CHOICES {
                        let mut sc = permutations(1);
                        sc.recovery = rec;
                        sc.failures = fail;
                        sc.rate_coefficient = c;
                        pts.push(point(
                            format!("{}/{}/c={c}", fail.describe(), rec.name()),
                            sc,
                        ));
                    }
                }
            }
            ("Recovery schemes on one permutation under static and flaky failures", pts)
        }
        "fig11_subflows" => {
            let mut pts = Vec::new();
            for m in [1, 2, 4, 8, 16, 40] {
                for (label, lb, rec, sf) in subflow_variants() {
                    let mut sc = permutations(m);
                    sc.lb = lb;
                    sc.recovery = rec;
                    sc.subflows = sf;
                    pts.push(point(format!("m={m}/{label}"), sc));
                }
            }
            ("Subflow TCP vs single-path TCP and trimming across permutation counts", pts)
        }
        "fig12_subflow_failures" => {
            let mut pts = Vec::new();
            for fail in failure_cases() {
                for (label, lb, rec, sf) in subflow_variants() {
                    let mut sc = permutations(1);
                    sc.lb = lb;
                    sc.recovery = rec;
                    sc.subflows = sf;
                    sc.failures = fail;
                    pts.push(point(format!("{}/{label}", fail.describe()), sc));
                }
            }
            ("Subflow TCP under static and flaky failures", pts)
        }
        "smoke_k4" => (
            "Small k=4 load-balancer comparison that finishes in seconds",
            all_lb_schemes()
                .into_iter()
                .map(|lb| {
                    let mut sc = Scenario::default();
                    sc.topology.k = 4;
                    sc.seeds = (1..=3).collect();
                    sc.lb = match lb {
                        LbScheme::FlowletAr { .. } => LbScheme::FlowletAr { gap_us: 2.0 },
                        other => other,
                    };
                    point(format!("k4/{}", lb.name()), sc)
                })
                .collect(),
        ),
        _ => return None,
    };
    Some(Preset {
        name: name.to_string(),
        description: description.to_string(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_builds_and_validates() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap_or_else(|| panic!("{name} missing"));
            assert!(!p.points.is_empty(), "{name}");
            for pt in &p.points {
                pt.scenario
                    .validate()
                    .unwrap_or_else(|e| panic!("{name}/{}: {e}", pt.label));
            }
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn labels_and_fingerprints_are_unique_within_a_preset() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            let mut labels: Vec<_> = p.points.iter().map(|x| x.label.clone()).collect();
            labels.sort();
            labels.dedup();
            assert_eq!(labels.len(), p.points.len(), "{name}");
            let mut fps: Vec<_> = p.points.iter().map(|x| x.scenario.fingerprint()).collect();
            fps.sort();
            fps.dedup();
            assert_eq!(fps.len(), p.points.len(), "{name}");
        }
    }

    #[test]
    fn seed_override() {
        let p = preset("smoke_k4").unwrap().with_seeds(&[7, 8]);
        assert!(p.points.iter().all(|x| x.scenario.seeds == vec![7, 8]));
        assert_eq!(p.total_runs(), 2 * p.points.len());
    }
}
