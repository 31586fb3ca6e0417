//! Per-run results and aggregates over seeded repetitions.

use serde::Serialize;

use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    /// Simulated-time limit reached with flows unfinished.
    TimeLimit,
    /// Event cap exceeded.
    Livelock,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FlowStats {
    pub src: u32,
    pub dst: u32,
    /// Data packets placed into the network, retransmissions included.
    pub sent: u64,
    /// Data packets that reached the receiver host.
    pub delivered: u64,
    /// Data packets dropped at a full queue or on a flaky wire.
    pub drops: u64,
    pub wire_drops: u64,
    pub trimmed: u64,
    /// Data packets still in the network when the run stopped.
    pub residual: u64,
    pub retransmits: u64,
    pub spurious_dupack: u64,
    pub spurious_timeout: u64,
    pub spurious_other: u64,
    pub timeouts: u64,
    pub completed_at: Option<SimTime>,
}

impl FlowStats {
    pub fn spurious(&self) -> u64 {
        self.spurious_dupack + self.spurious_timeout + self.spurious_other
    }

    pub fn conserved(&self) -> bool {
        self.sent == self.delivered + self.drops + self.trimmed + self.residual
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NetworkStats {
    pub data_drops: u64,
    pub wire_drops: u64,
    pub control_drops: u64,
    pub trims: u64,
    pub ecn_marks: u64,
    pub pfc_pauses: u64,
    pub repaths: u64,
    pub events: u64,
    /// Ports whose arrived/dequeued/dropped/trimmed/resident identity failed.
    pub queue_audit_failures: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub status: RunStatus,
    /// Latest flow completion, measured from the collective start at 0.
    pub cct: SimTime,
    pub ideal_cct: SimTime,
    pub end_time: SimTime,
    pub subflows: u32,
    pub flows: Vec<FlowStats>,
    pub network: NetworkStats,
}

impl RunMetrics {
    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Complete
    }

    pub fn normalized_cct(&self) -> f64 {
        self.cct.0 as f64 / self.ideal_cct.0 as f64
    }

    /// Most data packets lost by any single flow.
    pub fn worst_hit_flow(&self) -> u64 {
        self.flows.iter().map(|f| f.drops).max().unwrap_or(0)
    }

    pub fn total_spurious(&self) -> u64 {
        self.flows.iter().map(FlowStats::spurious).sum()
    }

    pub fn spurious_dupack(&self) -> u64 {
        self.flows.iter().map(|f| f.spurious_dupack).sum()
    }

    pub fn total_retransmits(&self) -> u64 {
        self.flows.iter().map(|f| f.retransmits).sum()
    }

    pub fn mean_spurious_per_flow(&self) -> f64 {
        self.total_spurious() as f64 / self.flows.len().max(1) as f64
    }

    /// Exact packet conservation for every flow and every port.
    pub fn conservation_ok(&self) -> bool {
        self.network.queue_audit_failures == 0 && self.flows.iter().all(FlowStats::conserved)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single run.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

/// Mean, sample SD, min and max. Panics on an empty slice.
pub fn aggregate(values: &[f64]) -> AggregateStats {
    assert!(!values.is_empty(), "aggregate of no runs");
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    AggregateStats {
        n,
        mean: mean.clamp(min, max),
        sd,
        min,
        max,
    }
}
