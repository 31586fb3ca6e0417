//! Paced sender automata. The pacing rate is fixed for the lifetime of a
//! sender; loss signals only decide which packet goes out in the next slot.

use std::collections::VecDeque;

use crate::packet::{flags, Packet, PacketKind};
use crate::time::SimTime;

use super::label::LabelState;
use super::{Bits, Recovery};

/// Why a retransmission was scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetxCause {
    DupAck,
    /// Next hole retransmitted on a partial ACK during recovery.
    PartialAck,
    Timeout,
    Nack,
    Trim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outgoing {
    pub seq: u32,
    pub cause: Option<RetxCause>,
}

/// Effect of a control packet on the sender.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reaction {
    Nothing,
    /// New work was queued; wake the pacer.
    Wake,
    /// A trim signal: requeue `seq` after a desynchronization delay.
    Requeue(u32),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SenderStats {
    pub sent: u64,
    pub retransmits: u64,
    pub fast_retransmits: u64,
    pub timeouts: u64,
    pub nacks: u64,
    pub trim_signals: u64,
}

#[derive(Debug, Clone)]
struct Rto {
    base: SimTime,
    cap: SimTime,
    current: SimTime,
    deadline: Option<SimTime>,
}

impl Rto {
    fn restart(&mut self, now: SimTime, outstanding: bool) {
        self.current = self.base;
        self.deadline = outstanding.then_some(now + self.current);
    }

    fn ensure_armed(&mut self, now: SimTime) {
        if self.deadline.is_none() {
            self.deadline = Some(now + self.current);
        }
    }

    fn back_off(&mut self, now: SimTime) {
        self.current = SimTime(self.current.0.saturating_mul(2)).min(self.cap);
        self.deadline = Some(now + self.current);
    }
}

#[derive(Debug, Clone)]
struct TcpState {
    threshold: u32,
    next_new: u32,
    snd_una: u32,
    dupacks: u32,
    fired_for: Option<u32>,
    partial_ack: bool,
    /// Highest seq sent when recovery began.
    recover: Option<u32>,
    retx: VecDeque<(u32, RetxCause)>,
}

#[derive(Debug, Clone)]
struct RoceState {
    from_start: bool,
    next_seq: u32,
    high: u32,
    snd_una: u32,
    last_nack: Option<u32>,
    rewind_cause: RetxCause,
}

#[derive(Debug, Clone)]
struct TrimState {
    next_new: u32,
    acked: Bits,
    snd_una: u32,
    retx: VecDeque<(u32, RetxCause)>,
}

#[derive(Debug, Clone)]
enum Logic {
    Coding { next_symbol: u32 },
    Tcp(TcpState),
    Roce(RoceState),
    Trim(TrimState),
}

#[derive(Debug, Clone)]
pub struct Sender {
    n: u32,
    interval: SimTime,
    logic: Logic,
    pub label: LabelState,
    rto: Rto,
    done: bool,
    /// Packets handed to the host NIC that have not started transmission.
    in_host: u32,
    pub stats: SenderStats,
}

impl Sender {
    pub fn new(
        recovery: &Recovery,
        message_packets: u32,
        interval: SimTime,
        label: LabelState,
        rto: SimTime,
        rto_cap: SimTime,
    ) -> Self {
        let logic = match *recovery {
            Recovery::Coding { .. } => Logic::Coding { next_symbol: 0 },
            Recovery::Tcp {
                dupack_threshold,
                partial_ack,
            } => Logic::Tcp(TcpState {
                threshold: dupack_threshold,
                next_new: 0,
                snd_una: 0,
                dupacks: 0,
                fired_for: None,
                partial_ack,
                recover: None,
                retx: VecDeque::new(),
            }),
            Recovery::Roce { from_start } => Logic::Roce(RoceState {
                from_start,
                next_seq: 0,
                high: 0,
                snd_una: 0,
                last_nack: None,
                rewind_cause: RetxCause::Nack,
            }),
            Recovery::Trim { .. } => Logic::Trim(TrimState {
                next_new: 0,
                acked: Bits::new(message_packets as usize),
                snd_una: 0,
                retx: VecDeque::new(),
            }),
        };
        Sender {
            n: message_packets,
            interval,
            logic,
            label,
            rto: Rto {
                base: rto,
                cap: rto_cap.max(rto),
                current: rto,
                deadline: None,
            },
            done: message_packets == 0,
            in_host: 0,
            stats: SenderStats::default(),
        }
    }

    pub fn message_packets(&self) -> u32 {
        self.n
    }

    /// Minimum spacing between this sender's packets.
    pub fn interval(&self) -> SimTime {
        self.interval
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// When the retransmission timer expires, if armed.
    pub fn rto_deadline(&self) -> Option<SimTime> {
        if self.done {
            None
        } else {
            self.rto.deadline
        }
    }

    pub fn rto_current(&self) -> SimTime {
        self.rto.current
    }

    /// Whether `next_packet` would produce something.
    pub fn has_pending(&self) -> bool {
        if self.done {
            return false;
        }
        match &self.logic {
            Logic::Coding { .. } => true,
            Logic::Tcp(s) => s.retx.iter().any(|&(q, _)| q >= s.snd_una) || s.next_new < self.n,
            Logic::Roce(s) => s.next_seq < self.n,
            Logic::Trim(s) => {
                s.retx.iter().any(|&(q, _)| !s.acked.get(q as usize)) || s.next_new < self.n
            }
        }
    }

    /// Whether some unacknowledged packet has left the host. Packets still
    /// in the NIC queue do not count, so host backlog never fires the timer.
    fn outstanding(&self) -> bool {
        let window = match &self.logic {
            Logic::Coding { .. } => 0,
            Logic::Tcp(s) => s.next_new - s.snd_una,
            Logic::Roce(s) => s.high.saturating_sub(s.snd_una),
            Logic::Trim(s) => s.next_new - s.snd_una,
        };
        window > self.in_host
    }

    /// A data packet of this sender started serializing on the host link.
    pub fn on_departure(&mut self, now: SimTime) {
        self.in_host = self.in_host.saturating_sub(1);
        if !self.done && !matches!(self.logic, Logic::Coding { .. }) {
            self.rto.ensure_armed(now);
        }
    }

    /// Chooses the packet for the current send slot: pending retransmissions
    /// first, then new data.
    pub fn next_packet(&mut self) -> Option<Outgoing> {
        if self.done {
            return None;
        }
        let n = self.n;
        let out = match &mut self.logic {
            Logic::Coding { next_symbol } => {
                let seq = *next_symbol;
                *next_symbol += 1;
                Some(Outgoing { seq, cause: None })
            }
            Logic::Tcp(s) => {
                let mut out = None;
                while let Some((seq, cause)) = s.retx.pop_front() {
                    if seq >= s.snd_una {
                        out = Some(Outgoing {
                            seq,
                            cause: Some(cause),
                        });
                        break;
                    }
                }
                out.or_else(|| {
                    (s.next_new < n).then(|| {
                        s.next_new += 1;
                        Outgoing {
                            seq: s.next_new - 1,
                            cause: None,
                        }
                    })
                })
            }
            Logic::Roce(s) => (s.next_seq < n).then(|| {
                let seq = s.next_seq;
                s.next_seq += 1;
                let cause = (seq < s.high).then_some(s.rewind_cause);
                s.high = s.high.max(seq + 1);
                Outgoing { seq, cause }
            }),
            Logic::Trim(s) => {
                let mut out = None;
                while let Some((seq, cause)) = s.retx.pop_front() {
                    if !s.acked.get(seq as usize) {
                        out = Some(Outgoing {
                            seq,
                            cause: Some(cause),
                        });
                        break;
                    }
                }
                out.or_else(|| {
                    (s.next_new < n).then(|| {
                        s.next_new += 1;
                        Outgoing {
                            seq: s.next_new - 1,
                            cause: None,
                        }
                    })
                })
            }
        };
        if let Some(o) = &out {
            self.stats.sent += 1;
            if o.cause.is_some() {
                self.stats.retransmits += 1;
            }
            self.in_host += 1;
        }
        out
    }

    /// Processes an ACK, NACK or returned trimmed header.
    pub fn on_control(&mut self, pkt: &Packet, now: SimTime) -> Reaction {
        if self.done {
            return Reaction::Nothing;
        }
        let n = self.n;
        let mut progressed = false;
        let mut reaction = Reaction::Nothing;
        match (&mut self.logic, pkt.kind) {
            (Logic::Coding { .. }, PacketKind::Ack) => {
                if pkt.has(flags::COMPLETE) {
                    self.done = true;
                }
            }
            (Logic::Tcp(s), PacketKind::Ack) => {
                let cum = pkt.seq;
                if cum > s.snd_una {
                    s.snd_una = cum;
                    s.dupacks = 0;
                    progressed = true;
                    match s.recover {
                        Some(r) if cum < r && cum < n => {
                            s.fired_for = Some(cum);
                            s.retx.push_front((cum, RetxCause::PartialAck));
                            self.stats.fast_retransmits += 1;
                            reaction = Reaction::Wake;
                        }
                        Some(_) => s.recover = None,
                        None => {}
                    }
                } else if cum == s.snd_una && s.snd_una < s.next_new {
                    s.dupacks += 1;
                    if s.dupacks >= s.threshold && s.fired_for != Some(s.snd_una) {
                        s.fired_for = Some(s.snd_una);
                        if s.partial_ack {
                            s.recover = Some(s.next_new);
                        }
                        s.retx.push_front((s.snd_una, RetxCause::DupAck));
                        self.stats.fast_retransmits += 1;
                        reaction = Reaction::Wake;
                    }
                }
                if s.snd_una >= n {
                    self.done = true;
                }
            }
            (Logic::Roce(s), PacketKind::Ack) => {
                if pkt.seq > s.snd_una {
                    s.snd_una = pkt.seq;
                    progressed = true;
                    if s.next_seq < s.snd_una {
                        s.next_seq = s.snd_una;
                    }
                }
                if s.snd_una >= n {
                    self.done = true;
                }
            }
            (Logic::Roce(s), PacketKind::Nack) => {
                self.stats.nacks += 1;
                let x = pkt.seq;
                if x > s.snd_una {
                    s.snd_una = x;
                    progressed = true;
                }
                if s.last_nack != Some(x) && x < s.next_seq {
                    s.next_seq = if s.from_start { 0 } else { x };
                    s.last_nack = Some(x);
                    s.rewind_cause = RetxCause::Nack;
                    reaction = Reaction::Wake;
                }
            }
            (Logic::Trim(s), PacketKind::Ack) => {
                let seq = pkt.aux as usize;
                if seq < s.acked.len() && !s.acked.get(seq) {
                    s.acked.set(seq);
                    progressed = true;
                    while (s.snd_una as usize) < s.acked.len() && s.acked.get(s.snd_una as usize)
                    {
                        s.snd_una += 1;
                    }
                }
                if s.snd_una >= n {
                    self.done = true;
                }
            }
            (Logic::Trim(s), PacketKind::Nack | PacketKind::TrimmedHeader) => {
                self.stats.trim_signals += 1;
                if !s.acked.get(pkt.seq as usize) {
                    reaction = Reaction::Requeue(pkt.seq);
                }
            }
            _ => {}
        }
        if progressed {
            let outstanding = self.outstanding();
            self.rto.restart(now, outstanding);
        }
        if self.done {
            self.rto.deadline = None;
            return Reaction::Nothing;
        }
        reaction
    }

    /// Queues a retransmission after a trim signal's desynchronization delay.
    pub fn requeue(&mut self, seq: u32) -> bool {
        if self.done {
            return false;
        }
        match &mut self.logic {
            Logic::Trim(s) if !s.acked.get(seq as usize) => {
                s.retx.push_back((seq, RetxCause::Trim));
                true
            }
            _ => false,
        }
    }

    /// Retransmission timer expiry. Returns true if work was queued.
    pub fn on_timeout(&mut self, now: SimTime) -> bool {
        if self.done || !self.outstanding() {
            self.rto.deadline = None;
            return false;
        }
        self.stats.timeouts += 1;
        match &mut self.logic {
            Logic::Coding { .. } => {}
            Logic::Tcp(s) => {
                s.retx.push_front((s.snd_una, RetxCause::Timeout));
                s.dupacks = 0;
                s.fired_for = Some(s.snd_una);
                if s.partial_ack {
                    s.recover = Some(s.next_new);
                }
            }
            Logic::Roce(s) => {
                s.next_seq = s.snd_una;
                s.last_nack = None;
                s.rewind_cause = RetxCause::Timeout;
            }
            Logic::Trim(s) => {
                s.retx.push_front((s.snd_una, RetxCause::Timeout));
            }
        }
        self.rto.back_off(now);
        true
    }
}
