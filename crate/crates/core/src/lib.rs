//! Packet-level discrete-event simulator for load balancing and loss
//! recovery of collective traffic on fat-tree networks.

pub mod dataplane;
pub mod engine;
pub mod packet;
pub mod rng;
pub mod time;
pub mod topology;
pub mod transport;
pub mod workload;
pub mod metrics;
pub mod scenario;
pub mod sim;
pub mod preset;
pub mod sweep;
pub mod batch;
pub mod report;
