//! Receiver automata, one per (sub)flow.

use crate::packet::{flags, Packet, PacketKind};
use crate::time::SimTime;

use super::{Bits, Recovery};

/// What the receiver sends back for an arriving packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Response {
    Ack { seq: u32, aux: u32, flags: u8 },
    Nack { seq: u32 },
    None,
}

#[derive(Debug, Clone)]
enum Logic {
    /// Counts distinct symbols.
    Coding { count: u32 },
    /// Selective bitmap with cumulative ack (TCP-like and trimming).
    Sequence { have: Bits, cum: u32 },
    /// In-order only; out-of-order arrivals are discarded.
    InOrder {
        expected: u32,
        nack_sent_for: Option<u32>,
    },
}

#[derive(Debug, Clone)]
pub struct Receiver {
    target: u32,
    logic: Logic,
    complete_at: Option<SimTime>,
    /// Data arrivals, duplicates included.
    pub arrivals: u64,
    /// Arrivals that were discarded (duplicates, out-of-order for in-order).
    pub discarded: u64,
}

impl Receiver {
    pub fn new(recovery: &Recovery, message_packets: u32) -> Self {
        let logic = match recovery {
            Recovery::Coding { .. } => Logic::Coding { count: 0 },
            Recovery::Tcp { .. } | Recovery::Trim { .. } => Logic::Sequence {
                have: Bits::new(message_packets as usize),
                cum: 0,
            },
            Recovery::Roce { .. } => Logic::InOrder {
                expected: 0,
                nack_sent_for: None,
            },
        };
        Receiver {
            target: recovery.completion_target(message_packets),
            logic,
            complete_at: None,
            arrivals: 0,
            discarded: 0,
        }
    }

    pub fn completion_target(&self) -> u32 {
        self.target
    }

    pub fn complete_at(&self) -> Option<SimTime> {
        self.complete_at
    }

    pub fn is_complete(&self) -> bool {
        self.complete_at.is_some()
    }

    /// Distinct useful packets held.
    pub fn progress(&self) -> u32 {
        match &self.logic {
            Logic::Coding { count } => *count,
            Logic::Sequence { have, .. } => have.count() as u32,
            Logic::InOrder { expected, .. } => *expected,
        }
    }

    /// Whether the receiver already holds `seq` (oracle for spurious
    /// retransmit accounting).
    pub fn holds(&self, seq: u32) -> bool {
        match &self.logic {
            Logic::Coding { .. } => false,
            Logic::Sequence { have, .. } => have.get(seq as usize),
            Logic::InOrder { expected, .. } => seq < *expected,
        }
    }

    fn mark_complete(&mut self, now: SimTime) {
        if self.complete_at.is_none() && self.progress() >= self.target {
            self.complete_at = Some(now);
        }
    }

    pub fn on_data(&mut self, pkt: &Packet, now: SimTime) -> Response {
        debug_assert_eq!(pkt.kind, PacketKind::Data);
        self.arrivals += 1;
        let echo = if pkt.has(flags::ECN) { flags::ECN_ECHO } else { 0 };
        let resp = match &mut self.logic {
            Logic::Coding { count } => {
                *count += 1;
                let c = *count;
                self.mark_complete(now);
                Response::Ack {
                    seq: c,
                    aux: pkt.seq,
                    flags: echo,
                }
            }
            Logic::Sequence { have, cum } => {
                let s = pkt.seq as usize;
                if have.get(s) {
                    self.discarded += 1;
                } else {
                    have.set(s);
                    while (*cum as usize) < have.len() && have.get(*cum as usize) {
                        *cum += 1;
                    }
                }
                let c = *cum;
                self.mark_complete(now);
                Response::Ack {
                    seq: c,
                    aux: pkt.seq,
                    flags: echo,
                }
            }
            Logic::InOrder {
                expected,
                nack_sent_for,
            } => {
                if pkt.seq == *expected {
                    *expected += 1;
                    let e = *expected;
                    self.mark_complete(now);
                    Response::Ack {
                        seq: e,
                        aux: pkt.seq,
                        flags: echo,
                    }
                } else if pkt.seq > *expected {
                    self.discarded += 1;
                    if *nack_sent_for == Some(*expected) {
                        Response::None
                    } else {
                        *nack_sent_for = Some(*expected);
                        Response::Nack { seq: *expected }
                    }
                } else {
                    self.discarded += 1;
                    Response::Ack {
                        seq: *expected,
                        aux: pkt.seq,
                        flags: echo,
                    }
                }
            }
        };
        match resp {
            Response::Ack { seq, aux, flags: f } if self.is_complete() => Response::Ack {
                seq,
                aux,
                flags: f | flags::COMPLETE,
            },
            r => r,
        }
    }

    /// A reflected trimmed header: tell the sender which packet to resend.
    pub fn on_trimmed_header(&mut self, pkt: &Packet) -> Response {
        if self.holds(pkt.seq) {
            Response::None
        } else {
            Response::Nack { seq: pkt.seq }
        }
    }
}
