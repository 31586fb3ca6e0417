//! Collective traffic matrices and fair-share pacing rates.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::RngStream;
use crate::time::Bandwidth;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("need at least 2 hosts, got {0}")]
    TooFewHosts(usize),
    #[error("need at least one permutation matrix")]
    NoMatrices,
    #[error("rate coefficient must lie in (0, 1], got {0}")]
    BadCoefficient(f64),
    #[error("flows per host must be >= 1")]
    NoFlows,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlowSpec {
    pub src: u32,
    pub dst: u32,
    pub message_packets: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    AllToAll,
    Permutations(usize),
}

/// How permutation matrices are drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationFamily {
    /// Independent uniform derangements.
    #[default]
    Random,
    /// Fixed shifts `i -> i + j` for `j = 1..=m`; composing `n - 1` of them
    /// yields exactly an all-to-all.
    Shift,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficMatrix {
    pub flows: Vec<FlowSpec>,
    pub flows_per_host: usize,
    pub kind: MatrixKind,
}

pub fn gen_all_to_all(n: usize, message_packets: u32) -> Result<TrafficMatrix, WorkloadError> {
    if n < 2 {
        return Err(WorkloadError::TooFewHosts(n));
    }
    let flows = (0..n as u32)
        .flat_map(|s| {
            (0..n as u32).filter(move |&d| d != s).map(move |d| FlowSpec {
                src: s,
                dst: d,
                message_packets,
            })
        })
        .collect();
    Ok(TrafficMatrix {
        flows,
        flows_per_host: n - 1,
        kind: MatrixKind::AllToAll,
    })
}

/// Uniform random derangement by rejection sampling.
fn random_derangement(n: usize, rng: &mut RngStream) -> Vec<u32> {
    let mut p: Vec<u32> = (0..n as u32).collect();
    loop {
        p.shuffle(rng);
        if p.iter().enumerate().all(|(i, &d)| i as u32 != d) {
            return p;
        }
    }
}

pub fn gen_permutations(
    n: usize,
    m: usize,
    message_packets: u32,
    family: PermutationFamily,
    rng: &mut RngStream,
) -> Result<TrafficMatrix, WorkloadError> {
    if n < 2 {
        return Err(WorkloadError::TooFewHosts(n));
    }
    if m == 0 {
        return Err(WorkloadError::NoMatrices);
    }
    let mut flows = Vec::with_capacity(n * m);
    for j in 0..m {
        let perm: Vec<u32> = match family {
            PermutationFamily::Random => random_derangement(n, rng),
            PermutationFamily::Shift => {
                let shift = 1 + j % (n - 1);
                (0..n).map(|i| ((i + shift) % n) as u32).collect()
            }
        };
        flows.extend(perm.into_iter().enumerate().map(|(s, d)| FlowSpec {
            src: s as u32,
            dst: d,
            message_packets,
        }));
    }
    Ok(TrafficMatrix {
        flows,
        flows_per_host: m,
        kind: MatrixKind::Permutations(m),
    })
}

/// Per-flow pacing rate: `coefficient * link / flows_per_host`.
pub fn calc_rate(
    link: Bandwidth,
    flows_per_host: usize,
    coefficient: f64,
) -> Result<f64, WorkloadError> {
    if flows_per_host == 0 {
        return Err(WorkloadError::NoFlows);
    }
    if !(coefficient > 0.0 && coefficient <= 1.0) {
        return Err(WorkloadError::BadCoefficient(coefficient));
    }
    Ok(coefficient * link.bps() as f64 / flows_per_host as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamId;

    #[test]
    fn all_to_all_sizes() {
        let m = gen_all_to_all(128, 500).unwrap();
        assert_eq!(m.flows.len(), 16256);
        assert_eq!(m.flows_per_host, 127);
        assert_eq!(gen_all_to_all(2, 1).unwrap().flows.len(), 2);
        assert!(gen_all_to_all(1, 1).is_err());
        assert!(m.flows.iter().all(|f| f.src != f.dst));
    }

    #[test]
    fn single_permutation_sizes() {
        let mut rng = RngStream::new(1, StreamId::Workload);
        let m = gen_permutations(128, 1, 500, PermutationFamily::Random, &mut rng).unwrap();
        assert_eq!(m.flows.len(), 128);
        assert_eq!(m.flows_per_host, 1);
    }

    #[test]
    fn rows_and_columns_sum_to_m() {
        let mut rng = RngStream::new(2, StreamId::Workload);
        for family in [PermutationFamily::Random, PermutationFamily::Shift] {
            for m in [1, 3, 8] {
                let tm = gen_permutations(16, m, 10, family, &mut rng).unwrap();
                let mut out = [0; 16];
                let mut inn = [0; 16];
                for f in &tm.flows {
                    assert_ne!(f.src, f.dst);
                    out[f.src as usize] += 1;
                    inn[f.dst as usize] += 1;
                }
                assert!(out.iter().chain(inn.iter()).all(|&c| c == m));
            }
        }
    }

    #[test]
    fn rates() {
        let r = calc_rate(Bandwidth::gbps(100), 127, 1.0).unwrap();
        assert!((r / 1e9 - 0.787_401_6).abs() < 1e-6);
        assert_eq!(calc_rate(Bandwidth::gbps(100), 1, 1.0).unwrap(), 100e9);
        assert_eq!(calc_rate(Bandwidth::gbps(100), 4, 0.5).unwrap(), 12.5e9);
        assert!(calc_rate(Bandwidth::gbps(100), 4, 0.0).is_err());
        assert!(calc_rate(Bandwidth::gbps(100), 4, 1.5).is_err());
        assert!(calc_rate(Bandwidth::gbps(100), 0, 1.0).is_err());
    }
}
