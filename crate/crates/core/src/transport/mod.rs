//! Host transport: paced senders, receivers and loss recovery schemes.

pub mod label;
pub mod receiver;
pub mod sender;

pub use label::{LabelPolicy, LabelState};
pub use receiver::{Receiver, Response};
pub use sender::{Outgoing, Reaction, RetxCause, Sender, SenderStats};

/// Where a trimming switch sends the header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrimMode {
    /// Forward to the receiver, which NACKs back to the sender.
    Reflect,
    /// Return to the sender directly.
    Rts,
}

/// Loss recovery scheme, as seen by the hosts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Recovery {
    Coding { overhead: f64 },
    /// `partial_ack`: during recovery, an ACK that advances but stays below
    /// the recovery point retransmits the next hole at once.
    Tcp { dupack_threshold: u32, partial_ack: bool },
    Roce { from_start: bool },
    Trim { mode: TrimMode },
}

impl Recovery {
    /// Distinct packets the receiver needs before the (sub)flow is complete.
    pub fn completion_target(&self, message_packets: u32) -> u32 {
        match *self {
            Recovery::Coding { overhead } => {
                // Round before ceil so 500 * 1.05 lands on 525, not 526.
                let exact = (1.0 + overhead) * message_packets as f64;
                ((exact * 1e9).round() / 1e9).ceil() as u32
            }
            _ => message_packets,
        }
    }
}

/// Least subflow count `s` such that spraying reordering cannot produce
/// `t` duplicate ACKs: `s = max(1, ceil(4q / (t f)))` with `q` in packets.
pub fn compute_subflows(q_pkts: u32, dupack_threshold: u32, flows_per_host: u32) -> u32 {
    assert!(q_pkts >= 1 && dupack_threshold >= 1 && flows_per_host >= 1);
    let num = 4 * q_pkts as u64;
    let den = dupack_threshold as u64 * flows_per_host as u64;
    num.div_ceil(den).max(1) as u32
}

/// Fixed-size bitset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
    ones: usize,
}

impl Bits {
    pub fn new(len: usize) -> Self {
        Bits {
            words: vec![0; len.div_ceil(64)],
            len,
            ones: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Out-of-range indices read as unset.
    pub fn get(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let w = &mut self.words[i / 64];
        let m = 1u64 << (i % 64);
        if *w & m == 0 {
            *w |= m;
            self.ones += 1;
        }
    }

    pub fn count(&self) -> usize {
        self.ones
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subflow_anchors() {
        assert_eq!(compute_subflows(8, 3, 1), 11);
        assert_eq!(compute_subflows(8, 6, 1), 6);
        assert_eq!(compute_subflows(8, 3, 40), 1);
        // dupack threshold that makes a single flow safe
        assert_eq!(compute_subflows(8, 32, 1), 1);
    }

    #[test]
    fn coding_targets() {
        assert_eq!(Recovery::Coding { overhead: 0.05 }.completion_target(500), 525);
        assert_eq!(Recovery::Coding { overhead: 0.0 }.completion_target(500), 500);
        assert_eq!(Recovery::Coding { overhead: 0.05 }.completion_target(10), 11);
        assert_eq!(Recovery::Tcp { dupack_threshold: 3, partial_ack: false }.completion_target(500), 500);
    }

    #[test]
    fn bits_count_and_bounds() {
        let mut b = Bits::new(130);
        b.set(0);
        b.set(129);
        b.set(129);
        assert_eq!(b.count(), 2);
        assert!(b.get(129) && !b.get(64) && !b.get(500));
    }
}
