//! Experiment description: a fully defaulted, validated, seedable scenario
//! parsed from JSON.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::time::{Bandwidth, SimTime};
use crate::transport::{compute_subflows, Recovery, TrimMode};
use crate::workload::PermutationFamily;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("sweep axis `{0}` does not name a field")]
    UnknownAxis(String),
    #[error("sweep axis `{0}` is not a scalar field")]
    NonScalarAxis(String),
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopologyConfig {
    pub k: usize,
    pub link_gbps: f64,
    pub latency_ns: u64,
    /// Data buffer per switch port.
    pub buffer_bytes: u64,
    pub control_headroom_bytes: u64,
    pub ecn_fraction: f64,
    /// Wire size of a data packet, header included.
    pub packet_bytes: u32,
    /// Size of ACK, NACK and trimmed-header packets.
    pub header_bytes: u32,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        TopologyConfig {
            k: 8,
            link_gbps: 100.0,
            latency_ns: 1000,
            buffer_bytes: 32 * 1024,
            control_headroom_bytes: 4096,
            ecn_fraction: 0.6,
            packet_bytes: 4096,
            header_bytes: 64,
        }
    }
}

impl TopologyConfig {
    pub fn link_rate(&self) -> Bandwidth {
        Bandwidth::from_gbps_f64(self.link_gbps)
    }

    pub fn latency(&self) -> SimTime {
        SimTime::from_ns(self.latency_ns)
    }

    pub fn n_hosts(&self) -> usize {
        self.k * self.k * self.k / 4
    }

    /// Buffer capacity in whole data packets.
    pub fn buffer_packets(&self) -> u32 {
        (self.buffer_bytes / self.packet_bytes as u64).max(1) as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkloadKind {
    AllToAll,
    Permutations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorkloadConfig {
    pub kind: WorkloadKind,
    /// Concurrent permutation matrices (permutations only).
    pub m: u32,
    pub message_packets: u32,
    pub family: PermutationFamily,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig {
            kind: WorkloadKind::AllToAll,
            m: 1,
            message_packets: 500,
            family: PermutationFamily::Random,
        }
    }
}

fn default_remap() -> f64 {
    0.5
}
fn default_gap_us() -> f64 {
    10.0
}
fn default_repath() -> u32 {
    10
}
fn default_bad() -> f64 {
    0.4
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case", deny_unknown_fields)]
pub enum LbScheme {
    Ecmp,
    EcmpAr {
        #[serde(default = "default_remap")]
        remap_fraction: f64,
    },
    HostSpray,
    SwitchSprayRr,
    SwitchSprayAr,
    FlowletAr {
        #[serde(default = "default_gap_us")]
        gap_us: f64,
    },
    Plb {
        #[serde(default = "default_repath")]
        repath_packets: u32,
        #[serde(default = "default_bad")]
        bad_fraction: f64,
    },
}

impl Default for LbScheme {
    fn default() -> Self {
        LbScheme::HostSpray
    }
}

impl LbScheme {
    pub fn name(&self) -> &'static str {
        match self {
            LbScheme::Ecmp => "ecmp",
            LbScheme::EcmpAr { .. } => "ecmp_ar",
            LbScheme::HostSpray => "host_spray",
            LbScheme::SwitchSprayRr => "switch_spray_rr",
            LbScheme::SwitchSprayAr => "switch_spray_ar",
            LbScheme::FlowletAr { .. } => "flowlet_ar",
            LbScheme::Plb { .. } => "plb",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

/// Subflows per flow: a fixed count, or `"auto"` to size them from the
/// buffer, the dupACK threshold and the flows per host.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Subflows {
    Fixed(u32),
    Auto(AutoTag),
}

impl Default for Subflows {
    fn default() -> Self {
        Subflows::Fixed(1)
    }
}

fn default_overhead() -> f64 {
    0.05
}
fn default_dupack() -> u32 {
    3
}
fn default_partial_ack() -> bool {
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case", deny_unknown_fields)]
pub enum RecoveryConfig {
    IdealCoding,
    Coding {
        #[serde(default = "default_overhead")]
        overhead: f64,
    },
    Tcp {
        #[serde(default = "default_dupack")]
        dupack_threshold: u32,
        /// Retransmit the next hole on each partial ACK during recovery.
        #[serde(default = "default_partial_ack")]
        partial_ack: bool,
        #[serde(default)]
        rto_us: Option<f64>,
    },
    Roce {
        #[serde(default)]
        from_start: bool,
        #[serde(default)]
        rto_us: Option<f64>,
    },
    Trim {
        mode: TrimModeConfig,
        #[serde(default)]
        rto_us: Option<f64>,
    },
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig::IdealCoding
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrimModeConfig {
    Reflect,
    Rts,
}

impl RecoveryConfig {
    pub fn name(&self) -> String {
        match *self {
            RecoveryConfig::IdealCoding => "ideal_coding".into(),
            RecoveryConfig::Coding { overhead } => format!("coding({overhead})"),
            RecoveryConfig::Tcp {
                dupack_threshold, ..
            } => format!("tcp(t={dupack_threshold})"),
            RecoveryConfig::Roce { from_start, .. } => {
                if from_start {
                    "roce(restart)".into()
                } else {
                    "roce".into()
                }
            }
            RecoveryConfig::Trim { mode, .. } => match mode {
                TrimModeConfig::Reflect => "trim(reflect)".into(),
                TrimModeConfig::Rts => "trim(rts)".into(),
            },
        }
    }

    pub fn to_recovery(&self) -> Recovery {
        match *self {
            RecoveryConfig::IdealCoding => Recovery::Coding { overhead: 0.0 },
            RecoveryConfig::Coding { overhead } => Recovery::Coding { overhead },
            RecoveryConfig::Tcp {
                dupack_threshold,
                partial_ack,
                ..
            } => Recovery::Tcp {
                dupack_threshold,
                partial_ack,
            },
            RecoveryConfig::Roce { from_start, .. } => Recovery::Roce { from_start },
            RecoveryConfig::Trim { mode, .. } => Recovery::Trim {
                mode: match mode {
                    TrimModeConfig::Reflect => TrimMode::Reflect,
                    TrimModeConfig::Rts => TrimMode::Rts,
                },
            },
        }
    }

    pub fn rto_us(&self) -> Option<f64> {
        match *self {
            RecoveryConfig::Tcp { rto_us, .. }
            | RecoveryConfig::Roce { rto_us, .. }
            | RecoveryConfig::Trim { rto_us, .. } => rto_us,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Failures {
    #[default]
    None,
    Static {
        links_per_pod: usize,
        frac_lost: f64,
    },
    Flaky {
        links_per_pod: usize,
        arrival_mean_us: f64,
        duration_mean_us: f64,
    },
}

impl Failures {
    pub fn describe(&self) -> String {
        match *self {
            Failures::None => "none".into(),
            Failures::Static {
                links_per_pod,
                frac_lost,
            } => format!("static(f={links_per_pod},p={frac_lost})"),
            Failures::Flaky {
                links_per_pod,
                arrival_mean_us,
                duration_mean_us,
            } => format!("flaky(f={links_per_pod},arr={arrival_mean_us}us,dur={duration_mean_us}us)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Caps {
    pub event_cap: u64,
    /// Simulated-time limit; runs still going are reported incomplete.
    pub time_limit_ms: f64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            event_cap: crate::engine::DEFAULT_EVENT_CAP,
            time_limit_ms: 2000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IdealAccounting {
    /// `packet_bytes` per data packet.
    #[default]
    Wire,
    /// `packet_bytes + header_bytes` per data packet.
    WirePlusHeader,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub topology: TopologyConfig,
    pub workload: WorkloadConfig,
    pub lb: LbScheme,
    pub subflows: Subflows,
    pub recovery: RecoveryConfig,
    pub rate_coefficient: f64,
    pub failures: Failures,
    /// Lossless fabric. Defaults to on for RoCE recovery, off otherwise.
    pub pfc: Option<bool>,
    pub ideal_cct: IdealAccounting,
    pub seeds: Vec<u64>,
    pub caps: Caps,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            topology: TopologyConfig::default(),
            workload: WorkloadConfig::default(),
            lb: LbScheme::default(),
            subflows: Subflows::default(),
            recovery: RecoveryConfig::default(),
            rate_coefficient: 1.0,
            failures: Failures::None,
            pfc: None,
            ideal_cct: IdealAccounting::Wire,
            seeds: (1..=10).collect(),
            caps: Caps::default(),
        }
    }
}

/// Parses JSON into a validated scenario. Missing keys take defaults;
/// unknown keys are rejected with their path.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let text = if text.trim().is_empty() { "{}" } else { text };
    let de = &mut serde_json::Deserializer::from_str(text);
    let sc: Scenario = serde_path_to_error::deserialize(de).map_err(|e| ScenarioError::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    sc.validate()?;
    Ok(sc)
}

impl Scenario {
    pub fn pfc_enabled(&self) -> bool {
        self.pfc
            .unwrap_or(matches!(self.recovery, RecoveryConfig::Roce { .. }))
    }

    pub fn flows_per_host(&self) -> u32 {
        match self.workload.kind {
            WorkloadKind::AllToAll => self.topology.n_hosts() as u32 - 1,
            WorkloadKind::Permutations => self.workload.m,
        }
    }

    /// Resolved subflow count.
    pub fn subflow_count(&self) -> u32 {
        match self.subflows {
            Subflows::Fixed(s) => s,
            Subflows::Auto(_) => {
                let t = match self.recovery {
                    RecoveryConfig::Tcp {
                        dupack_threshold, ..
                    } => dupack_threshold,
                    _ => 1,
                };
                compute_subflows(self.topology.buffer_packets(), t, self.flows_per_host())
            }
        }
    }

    /// Time to serialize one data packet at line rate.
    pub fn packet_time(&self) -> SimTime {
        self.topology
            .link_rate()
            .tx_time(self.topology.packet_bytes as u64)
    }

    /// Spacing between consecutive packets of one flow (all subflows
    /// together) at the configured rate coefficient.
    pub fn flow_interval(&self) -> SimTime {
        let ps = self.packet_time().0 as f64 * self.flows_per_host() as f64 / self.rate_coefficient;
        SimTime(ps.ceil() as u64)
    }

    /// Base round trip of the longest (six hop each way) path.
    pub fn base_rtt(&self) -> SimTime {
        let hop = self.topology.latency() + self.packet_time();
        SimTime(hop.0 * 12)
    }

    pub fn rto(&self) -> SimTime {
        match self.recovery.rto_us() {
            Some(us) => SimTime::from_us_f64(us),
            None => SimTime(self.base_rtt().0 * 4),
        }
    }

    pub fn rto_cap(&self) -> SimTime {
        SimTime(self.base_rtt().0 * 100).max(self.rto())
    }

    /// Minimum possible completion time: the data one host sends, at line rate.
    pub fn ideal_cct(&self) -> SimTime {
        let per_packet = match self.ideal_cct {
            IdealAccounting::Wire => self.topology.packet_bytes,
            IdealAccounting::WirePlusHeader => {
                self.topology.packet_bytes + self.topology.header_bytes
            }
        } as u64;
        let bytes =
            self.flows_per_host() as u64 * self.workload.message_packets as u64 * per_packet;
        self.topology.link_rate().tx_time(bytes)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let t = &self.topology;
        if t.k < 4 || t.k % 2 != 0 {
            return Err(invalid(format!("k must be even and >= 4, got {}", t.k)));
        }
        if !(t.link_gbps > 0.0) {
            return Err(invalid("link_gbps must be positive"));
        }
        if t.packet_bytes == 0 || t.header_bytes == 0 || t.header_bytes >= t.packet_bytes {
            return Err(invalid("need 0 < header_bytes < packet_bytes"));
        }
        if t.buffer_bytes < t.packet_bytes as u64 {
            return Err(invalid("buffer must hold at least one packet"));
        }
        if !(0.0..=1.0).contains(&t.ecn_fraction) {
            return Err(invalid("ecn_fraction must be in [0, 1]"));
        }
        if !(self.rate_coefficient > 0.0 && self.rate_coefficient <= 1.0) {
            return Err(invalid(format!(
                "rate_coefficient must be in (0, 1], got {}",
                self.rate_coefficient
            )));
        }
        if self.workload.message_packets == 0 {
            return Err(invalid("message_packets must be positive"));
        }
        let n = t.n_hosts();
        if self.workload.kind == WorkloadKind::Permutations
            && (self.workload.m == 0 || self.workload.m as usize >= n)
        {
            return Err(invalid(format!("m must be in [1, {}]", n - 1)));
        }
        match self.subflows {
            Subflows::Fixed(0) => return Err(invalid("subflows must be >= 1")),
            Subflows::Fixed(s) if s > u16::MAX as u32 => {
                return Err(invalid("too many subflows"))
            }
            Subflows::Auto(_) if !matches!(self.recovery, RecoveryConfig::Tcp { .. }) => {
                return Err(invalid("subflows \"auto\" requires tcp recovery"))
            }
            _ => {}
        }
        match self.recovery {
            RecoveryConfig::Coding { overhead } if !(overhead >= 0.0) => {
                return Err(invalid("coding overhead must be >= 0"))
            }
            RecoveryConfig::Tcp {
                dupack_threshold: 0,
                ..
            } => return Err(invalid("dupack_threshold must be >= 1")),
            _ => {}
        }
        if let Some(us) = self.recovery.rto_us() {
            if !(us > 0.0) {
                return Err(invalid("rto_us must be positive"));
            }
        }
        match self.lb {
            LbScheme::EcmpAr { remap_fraction } if !(0.0..=1.0).contains(&remap_fraction) => {
                return Err(invalid("remap_fraction must be in [0, 1]"))
            }
            LbScheme::FlowletAr { gap_us } if !(gap_us >= 0.0) => {
                return Err(invalid("gap_us must be >= 0"))
            }
            LbScheme::Plb {
                repath_packets,
                bad_fraction,
            } if repath_packets == 0 || !(0.0..=1.0).contains(&bad_fraction) => {
                return Err(invalid("plb needs repath_packets >= 1, bad_fraction in [0, 1]"))
            }
            _ => {}
        }
        if self.pfc_enabled() && matches!(self.recovery, RecoveryConfig::Trim { .. }) {
            return Err(invalid("trimming and pfc are mutually exclusive"));
        }
        let max_f = t.k * t.k / 4;
        match self.failures {
            Failures::None => {}
            Failures::Static {
                links_per_pod,
                frac_lost,
            } => {
                if links_per_pod > max_f {
                    return Err(invalid(format!("links_per_pod must be <= {max_f}")));
                }
                if !(0.0..1.0).contains(&frac_lost) {
                    return Err(invalid("frac_lost must be in [0, 1)"));
                }
            }
            Failures::Flaky {
                links_per_pod,
                arrival_mean_us,
                duration_mean_us,
            } => {
                if links_per_pod > max_f {
                    return Err(invalid(format!("links_per_pod must be <= {max_f}")));
                }
                if !(arrival_mean_us > 0.0) || !(duration_mean_us >= 0.0) {
                    return Err(invalid("flaky means must be positive"));
                }
            }
        }
        if self.seeds.is_empty() {
            return Err(invalid("at least one seed is required"));
        }
        if self.caps.event_cap == 0 || !(self.caps.time_limit_ms > 0.0) {
            return Err(invalid("caps must be positive"));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON of everything except the seed list,
    /// so all rows of one scenario point share a fingerprint.
    pub fn fingerprint(&self) -> String {
        let mut v = serde_json::to_value(self).expect("scenario serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("seeds");
        }
        let canonical = serde_json::to_string(&v).expect("value serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Returns a copy with the scalar at dotted `path` replaced by `value`.
    pub fn with_field(
        &self,
        path: &str,
        value: serde_json::Value,
    ) -> Result<Scenario, ScenarioError> {
        let mut root = serde_json::to_value(self).expect("scenario serializes");
        let parts: Vec<&str> = path.split('.').collect();
        let (last, parents) = parts.split_last().expect("split yields one part");
        let mut parent = &mut root;
        for part in parents {
            parent = parent
                .as_object_mut()
                .and_then(|o| o.get_mut(*part))
                .ok_or_else(|| ScenarioError::UnknownAxis(path.to_string()))?;
        }
        let obj = parent
            .as_object_mut()
            .ok_or_else(|| ScenarioError::UnknownAxis(path.to_string()))?;
        let cur = obj
            .get_mut(*last)
            .ok_or_else(|| ScenarioError::UnknownAxis(path.to_string()))?;
        if cur.is_object() || cur.is_array() {
            return Err(ScenarioError::NonScalarAxis(path.to_string()));
        }
        // Switching a tagged variant drops the old variant's parameters.
        let is_tag = matches!(*last, "scheme" | "kind") && !parents.is_empty() && *cur != value;
        if is_tag && parents[0] != "workload" {
            obj.clear();
            obj.insert(last.to_string(), value);
        } else {
            *cur = value;
        }
        let sc: Scenario =
            serde_path_to_error::deserialize(root).map_err(|e| ScenarioError::Parse {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        sc.validate()?;
        Ok(sc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_baseline() {
        let sc = parse_scenario("{}").unwrap();
        assert_eq!(sc, Scenario::default());
        assert_eq!(sc.topology.k, 8);
        assert_eq!(sc.topology.buffer_bytes, 32768);
        assert_eq!(sc.seeds.len(), 10);
        assert_eq!(sc.flows_per_host(), 127);
        assert_eq!(parse_scenario("").unwrap(), sc);
    }

    #[test]
    fn large_buffer_variant() {
        let sc = parse_scenario(r#"{"topology": {"buffer_bytes": 409600}}"#).unwrap();
        assert_eq!(sc.topology.buffer_bytes, 409600);
        assert_eq!(sc.topology.k, 8);
    }

    #[test]
    fn inconsistent_keys_rejected() {
        let err = parse_scenario(
            r#"{"lb": {"scheme": "flowlet_ar"}, "recovery": {"scheme": "roce", "mode": "rts"}}"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("recovery"), "{msg}");
        assert!(msg.contains("mode"), "{msg}");
    }

    #[test]
    fn unknown_key_reports_path() {
        let err = parse_scenario(r#"{"topology": {"kk": 4}}"#).unwrap_err();
        assert!(err.to_string().contains("topology"), "{err}");
        assert!(err.to_string().contains("kk"), "{err}");
    }

    #[test]
    fn range_errors() {
        assert!(parse_scenario(r#"{"rate_coefficient": 0}"#).is_err());
        assert!(parse_scenario(r#"{"topology": {"k": 5}}"#).is_err());
        assert!(parse_scenario(
            r#"{"failures": {"kind": "static", "links_per_pod": 17, "frac_lost": 0.5}}"#
        )
        .is_err());
        assert!(parse_scenario(r#"{"subflows": "auto"}"#).is_err());
    }

    #[test]
    fn variants_round_trip() {
        let text = r#"{
            "lb": {"scheme": "plb"},
            "recovery": {"scheme": "tcp", "dupack_threshold": 6},
            "subflows": "auto",
            "workload": {"kind": "permutations", "m": 1},
            "failures": {"kind": "flaky", "links_per_pod": 2, "arrival_mean_us": 100, "duration_mean_us": 10}
        }"#;
        let sc = parse_scenario(text).unwrap();
        assert_eq!(sc.subflow_count(), 6);
        let again = parse_scenario(&serde_json::to_string(&sc).unwrap()).unwrap();
        assert_eq!(sc, again);
        assert_eq!(sc.fingerprint(), again.fingerprint());
    }

    #[test]
    fn fingerprint_ignores_seeds_only() {
        let a = Scenario::default();
        let mut b = a.clone();
        b.seeds = vec![99];
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.rate_coefficient = 0.5;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn with_field_sets_scalars() {
        let base = Scenario::default();
        let s = base.with_field("rate_coefficient", 0.3.into()).unwrap();
        assert_eq!(s.rate_coefficient, 0.3);
        let mut perm = base.clone();
        perm.workload.kind = WorkloadKind::Permutations;
        assert_eq!(perm.with_field("workload.m", 8.into()).unwrap().workload.m, 8);
        assert!(matches!(
            base.with_field("workload", 1.into()),
            Err(ScenarioError::NonScalarAxis(_))
        ));
        let ar = base.with_field("lb.scheme", "flowlet_ar".into()).unwrap();
        assert_eq!(ar.lb, LbScheme::FlowletAr { gap_us: 10.0 });
        let plb = ar.with_field("lb.scheme", "plb".into()).unwrap();
        assert_eq!(plb.lb.name(), "plb");
        let tcp = base.with_field("recovery.scheme", "tcp".into()).unwrap();
        assert_eq!(tcp.recovery.name(), "tcp(t=3)");
        assert_eq!(
            tcp.with_field("recovery.dupack_threshold", 6.into()).unwrap().recovery.name(),
            "tcp(t=6)"
        );
        assert!(matches!(
            base.with_field("nope.x", 1.into()),
            Err(ScenarioError::UnknownAxis(_))
        ));
    }

    #[test]
    fn derived_timings() {
        let sc = Scenario::default();
        assert_eq!(sc.packet_time(), SimTime::from_ps(327_680));
        assert_eq!(sc.flow_interval(), SimTime::from_ps(327_680 * 127));
        assert_eq!(sc.base_rtt(), SimTime::from_ps(12 * 1_327_680));
        assert_eq!(sc.rto(), SimTime::from_ps(48 * 1_327_680));
        // 127 * 500 * 4096 B at 100 Gb/s
        assert_eq!(sc.ideal_cct(), SimTime::from_ps(20_807_680_000));
    }

    #[test]
    fn pfc_defaults_follow_recovery() {
        let mut sc = Scenario::default();
        assert!(!sc.pfc_enabled());
        sc.recovery = RecoveryConfig::Roce {
            from_start: false,
            rto_us: None,
        };
        assert!(sc.pfc_enabled());
        sc.pfc = Some(false);
        assert!(!sc.pfc_enabled());
    }
}
