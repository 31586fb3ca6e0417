//! Switch dataplane: port queues with ECN, trimming and PFC, and the in-switch
//! path selection policies.

pub mod queue;
pub mod select;

pub use queue::{EnqueueOutcome, PfcAction, PfcState, PortQueue, QueueConfig, QueueCounters};
pub use select::{
    adaptive_select, ecmp_select, flow_hash, EcmpArTable, FlowKey, FlowletTable, RoundRobin,
};
