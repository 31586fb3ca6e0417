//! Host-side flow labels: per-packet spraying, constant labels, and
//! ECN-driven repathing.

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LabelPolicy {
    /// New label on every packet.
    Spray,
    /// One label for the lifetime of the (sub)flow.
    Constant,
    /// Constant until a window of ACKs shows too many ECN echoes.
    Plb {
        repath_packets: u32,
        bad_fraction: f64,
    },
}

#[derive(Debug, Clone)]
pub struct LabelState {
    policy: LabelPolicy,
    current: u32,
    counter: u32,
    window_acked: u32,
    window_marked: u32,
    pub repaths: u32,
}

impl LabelState {
    /// `initial` should differ across subflows of one flow so they hash apart.
    pub fn new(policy: LabelPolicy, initial: u32) -> Self {
        LabelState {
            policy,
            current: initial,
            counter: 0,
            window_acked: 0,
            window_marked: 0,
            repaths: 0,
        }
    }

    pub fn policy(&self) -> LabelPolicy {
        self.policy
    }

    pub fn next_label(&mut self) -> u32 {
        match self.policy {
            LabelPolicy::Spray => {
                let l = self.counter;
                self.counter = self.counter.wrapping_add(1);
                l
            }
            LabelPolicy::Constant | LabelPolicy::Plb { .. } => self.current,
        }
    }

    /// Feeds one ACK's ECN echo into the repath window. Returns true if the
    /// flow moved to a fresh random label.
    pub fn plb_maybe_repath<R: Rng + ?Sized>(&mut self, ecn_echo: bool, rng: &mut R) -> bool {
        let LabelPolicy::Plb {
            repath_packets,
            bad_fraction,
        } = self.policy
        else {
            return false;
        };
        self.window_acked += 1;
        self.window_marked += u32::from(ecn_echo);
        if self.window_acked < repath_packets {
            return false;
        }
        let frac = self.window_marked as f64 / self.window_acked as f64;
        self.window_acked = 0;
        self.window_marked = 0;
        if frac >= bad_fraction {
            let old = self.current;
            while self.current == old {
                self.current = rng.random();
            }
            self.repaths += 1;
            true
        } else {
            false
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RngStream, StreamId};

    const PLB: LabelPolicy = LabelPolicy::Plb {
        repath_packets: 10,
        bad_fraction: 0.4,
    };

    fn feed(marks: &[bool]) -> (LabelState, Vec<bool>) {
        let mut rng = RngStream::new(1, StreamId::Relabel);
        let mut s = LabelState::new(PLB, 0);
        let out = marks
            .iter()
            .map(|&m| s.plb_maybe_repath(m, &mut rng))
            .collect();
        (s, out)
    }

    #[test]
    fn spray_increments() {
        let mut s = LabelState::new(LabelPolicy::Spray, 0);
        let labels: Vec<_> = (0..5).map(|_| s.next_label()).collect();
        assert_eq!(labels, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn constant_never_changes() {
        let mut s = LabelState::new(LabelPolicy::Constant, 7);
        assert!((0..100).all(|_| s.next_label() == 7));
    }

    #[test]
    fn repaths_on_half_marked_window() {
        let mut marks = vec![true; 5];
        marks.extend([false; 5]);
        let (s, out) = feed(&marks);
        assert_eq!(out.iter().filter(|&&x| x).count(), 1);
        assert!(out[9]);
        assert_eq!(s.repaths, 1);
    }

    #[test]
    fn no_repath_at_thirty_percent() {
        let mut marks = vec![true; 3];
        marks.extend([false; 7]);
        let (s, out) = feed(&marks);
        assert!(out.iter().all(|&x| !x));
        assert_eq!(s.repaths, 0);
    }

    #[test]
    fn window_must_fill_first() {
        let (_, out) = feed(&[true; 9]);
        assert!(out.iter().all(|&x| !x));
    }

    #[test]
    fn repath_changes_label() {
        let mut rng = RngStream::new(2, StreamId::Relabel);
        let mut s = LabelState::new(PLB, 0);
        let before = s.next_label();
        for _ in 0..10 {
            s.plb_maybe_repath(true, &mut rng);
        }
        assert_ne!(s.next_label(), before);
    }
}
