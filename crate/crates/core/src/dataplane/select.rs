//! Next-hop selection among equal-cost uplinks.

use std::collections::HashMap;

use rand::Rng;

use crate::time::SimTime;

/// Transport five-tuple. The source port encodes the flow and subflow so
/// that distinct subflows hash independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FlowKey {
    pub src: u32,
    pub dst: u32,
    pub sport: u32,
    pub dport: u16,
    pub proto: u8,
}

impl FlowKey {
    pub const ROCE_PORT: u16 = 4791;
    pub const UDP: u8 = 17;

    pub fn new(src: u32, dst: u32, flow: u32, subflow: u16) -> Self {
        FlowKey {
            src,
            dst,
            sport: (flow << 8) ^ subflow as u32,
            dport: Self::ROCE_PORT,
            proto: Self::UDP,
        }
    }

    /// Key with source and destination swapped, used for reverse traffic.
    pub fn reversed(self) -> Self {
        FlowKey {
            src: self.dst,
            dst: self.src,
            ..self
        }
    }

    fn words(&self) -> [u64; 2] {
        [
            (self.src as u64) << 32 | self.dst as u64,
            (self.sport as u64) << 32 | (self.dport as u64) << 8 | self.proto as u64,
        ]
    }
}

/// 64-bit finalizer from MurmurHash3.
#[inline]
fn fmix64(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    x = x.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    x ^= x >> 33;
    x
}

/// Keyed hash of `(five-tuple, label)` under a per-switch salt.
pub fn flow_hash(key: &FlowKey, label: u32, salt: u64) -> u64 {
    let [a, b] = key.words();
    let mut h = fmix64(salt ^ 0x9e37_79b9_7f4a_7c15);
    h = fmix64(h ^ a);
    h = fmix64(h ^ b);
    fmix64(h ^ label as u64)
}

pub fn ecmp_select(key: &FlowKey, label: u32, salt: u64, n_ports: usize) -> usize {
    assert!(n_ports >= 1);
    // Multiply-shift maps the hash onto [0, n) without modulo bias.
    ((flow_hash(key, label, salt) as u128 * n_ports as u128) >> 64) as usize
}

/// Per-switch round-robin over the uplink set, shared by all flows.
#[derive(Debug, Clone, Default)]
pub struct RoundRobin {
    next: usize,
    order: Vec<usize>,
}

impl RoundRobin {
    /// Round robin whose visiting order is reshuffled at the start of every
    /// round: each port still gets exactly one packet per `n_ports`.
    pub fn select_shuffled<R: Rng + ?Sized>(&mut self, n_ports: usize, rng: &mut R) -> usize {
        use rand::seq::SliceRandom;
        if self.order.len() != n_ports {
            self.order = (0..n_ports).collect();
            self.next %= n_ports;
        }
        if self.next == 0 {
            self.order.shuffle(rng);
        }
        let port = self.order[self.next];
        self.next = (self.next + 1) % n_ports;
        port
    }

    pub fn select(&mut self, n_ports: usize) -> usize {
        let port = self.next % n_ports;
        self.next = (port + 1) % n_ports;
        port
    }
}

/// Index of the least-occupied port, ties broken uniformly.
pub fn adaptive_select<R: Rng + ?Sized>(
    n_ports: usize,
    occupancy: impl Fn(usize) -> u64,
    rng: &mut R,
) -> usize {
    assert!(n_ports >= 1);
    let mut best = 0;
    let mut best_occ = occupancy(0);
    let mut ties = 1u32;
    for i in 1..n_ports {
        let occ = occupancy(i);
        if occ < best_occ {
            best = i;
            best_occ = occ;
            ties = 1;
        } else if occ == best_occ {
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                best = i;
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct FlowletEntry {
    last_packet: SimTime,
    port: usize,
}

/// Switch flowlet table: a flow keeps its port while packets arrive within
/// `gap` of each other, otherwise it is re-placed on the shortest queue.
#[derive(Debug, Clone)]
pub struct FlowletTable {
    gap: SimTime,
    entries: HashMap<FlowKey, FlowletEntry>,
    pub reassignments: u64,
}

impl FlowletTable {
    pub fn new(gap: SimTime) -> Self {
        FlowletTable {
            gap,
            entries: HashMap::new(),
            reassignments: 0,
        }
    }

    pub fn select<R: Rng + ?Sized>(
        &mut self,
        key: FlowKey,
        now: SimTime,
        n_ports: usize,
        occupancy: impl Fn(usize) -> u64,
        rng: &mut R,
    ) -> usize {
        let gap = self.gap;
        match self.entries.get_mut(&key) {
            Some(e) if now.saturating_sub(e.last_packet) <= gap => {
                e.last_packet = now;
                e.port
            }
            _ => {
                let port = adaptive_select(n_ports, occupancy, rng);
                self.reassignments += 1;
                self.entries.insert(
                    key,
                    FlowletEntry {
                        last_packet: now,
                        port,
                    },
                );
                port
            }
        }
    }
}

/// ECMP with one-shot adaptive placement: a new flow takes its hashed port
/// unless that queue is above `remap_fraction` of capacity, in which case it
/// is pinned to a shortest queue instead.
#[derive(Debug, Clone)]
pub struct EcmpArTable {
    remap_fraction: f64,
    pinned: HashMap<(FlowKey, u32), usize>,
    pub remapped: u64,
}

impl EcmpArTable {
    pub fn new(remap_fraction: f64) -> Self {
        EcmpArTable {
            remap_fraction,
            pinned: HashMap::new(),
            remapped: 0,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn select<R: Rng + ?Sized>(
        &mut self,
        key: FlowKey,
        label: u32,
        salt: u64,
        n_ports: usize,
        capacity: u64,
        occupancy: impl Fn(usize) -> u64,
        rng: &mut R,
    ) -> usize {
        if let Some(&port) = self.pinned.get(&(key, label)) {
            return port;
        }
        let hashed = ecmp_select(&key, label, salt, n_ports);
        let port = if occupancy(hashed) as f64 > self.remap_fraction * capacity as f64 {
            self.remapped += 1;
            adaptive_select(n_ports, occupancy, rng)
        } else {
            hashed
        };
        self.pinned.insert((key, label), port);
        port
    }
}
