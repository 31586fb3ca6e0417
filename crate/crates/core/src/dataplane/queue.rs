//! Output port queue: a data FIFO plus a strict-priority control FIFO.
//!
//! Occupancy counts the packet currently on the wire until its transmission
//! completes, so a 32 KB port holds exactly eight 4 KB packets. A port in
//! auto-finish mode retires its in-service packet by itself once the clock
//! passes the end of serialization; otherwise the caller calls `finish`.

use std::collections::VecDeque;

use crate::packet::{flags, Packet};
use crate::time::SimTime;
use crate::topology::LinkId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueConfig {
    /// Data buffer in bytes.
    pub capacity: u64,
    /// Separate allowance for control packets (ACK/NACK/headers).
    pub control_headroom: u64,
    /// Fraction of `capacity` at or above which arriving data is CE-marked.
    pub ecn_fraction: f64,
    pub trim: bool,
    /// PFC fabric: nothing is tail-dropped, upstream pausing bounds data.
    pub lossless: bool,
    pub header_bytes: u32,
}

impl QueueConfig {
    pub fn switch_port(capacity: u64) -> Self {
        QueueConfig {
            capacity,
            control_headroom: 4096,
            ecn_fraction: 0.6,
            trim: false,
            lossless: false,
            header_bytes: 64,
        }
    }

    /// Host NIC queue: never drops.
    pub fn host_nic() -> Self {
        QueueConfig {
            capacity: u64::MAX,
            control_headroom: u64::MAX,
            ecn_fraction: 1.0,
            trim: false,
            lossless: true,
            header_bytes: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnqueueOutcome {
    Enqueued,
    EnqueuedMarked,
    /// Data did not fit; the returned header should be forwarded at high
    /// priority by the caller (toward the receiver or back to the sender).
    Trimmed(Packet),
    Dropped,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueueCounters {
    /// Every packet offered to the port.
    pub arrived: u64,
    /// Packets that started serialization.
    pub dequeued: u64,
    pub dropped: u64,
    pub trimmed: u64,
    pub ecn_marked: u64,
    pub control_dropped: u64,
}

/// A packet sitting in a port, remembering the link it arrived on so the
/// ingress PFC counter can be released when it leaves.
#[derive(Debug, Clone, Copy)]
pub struct Queued {
    pub pkt: Packet,
    pub in_link: Option<LinkId>,
}

#[derive(Debug, Clone)]
pub struct PortQueue {
    cfg: QueueConfig,
    data: VecDeque<Queued>,
    control: VecDeque<Queued>,
    data_bytes: u64,
    control_bytes: u64,
    in_service: Option<Queued>,
    busy_until: SimTime,
    auto_finish: bool,
    paused: bool,
    pub counters: QueueCounters,
}

impl PortQueue {
    pub fn new(cfg: QueueConfig) -> Self {
        PortQueue {
            cfg,
            data: VecDeque::new(),
            control: VecDeque::new(),
            data_bytes: 0,
            control_bytes: 0,
            in_service: None,
            busy_until: SimTime::ZERO,
            auto_finish: false,
            paused: false,
            counters: QueueCounters::default(),
        }
    }

    pub fn config(&self) -> &QueueConfig {
        &self.cfg
    }

    pub fn set_auto_finish(&mut self, on: bool) {
        self.auto_finish = on;
    }

    /// Data bytes buffered at `now`, including a data packet being serialized.
    pub fn occupancy(&self, now: SimTime) -> u64 {
        match &self.in_service {
            Some(q) if self.expired(now) && !q.pkt.kind.is_control() => {
                self.data_bytes - q.pkt.size as u64
            }
            _ => self.data_bytes,
        }
    }

    fn expired(&self, now: SimTime) -> bool {
        self.auto_finish && now >= self.busy_until
    }

    /// Retires an in-service packet whose serialization has ended.
    fn settle(&mut self, now: SimTime) {
        if self.in_service.is_some() && self.expired(now) {
            self.finish();
        }
    }

    pub fn control_occupancy(&self) -> u64 {
        self.control_bytes
    }

    pub fn is_busy(&self, now: SimTime) -> bool {
        self.in_service.is_some() && !self.expired(now)
    }

    /// End of the current (or last) serialization.
    pub fn busy_until(&self) -> SimTime {
        self.busy_until
    }

    /// Packets waiting behind the one on the wire.
    pub fn has_queued(&self) -> bool {
        !self.control.is_empty() || !self.data.is_empty()
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    pub fn set_paused(&mut self, paused: bool) {
        self.paused = paused;
    }

    /// Packets waiting to start serialization.
    pub fn resident(&self) -> usize {
        self.data.len() + self.control.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Queued> {
        self.control.iter().chain(self.data.iter())
    }

    pub fn enqueue(
        &mut self,
        mut pkt: Packet,
        in_link: Option<LinkId>,
        now: SimTime,
    ) -> EnqueueOutcome {
        debug_assert!(pkt.size > 0);
        self.settle(now);
        self.counters.arrived += 1;
        let size = pkt.size as u64;
        if pkt.kind.is_control() {
            if !self.cfg.lossless
                && self.control_bytes.saturating_add(size) > self.cfg.control_headroom
            {
                self.counters.control_dropped += 1;
                self.counters.dropped += 1;
                return EnqueueOutcome::Dropped;
            }
            self.control_bytes += size;
            self.control.push_back(Queued { pkt, in_link });
            return EnqueueOutcome::Enqueued;
        }

        let fits = self.cfg.lossless || self.data_bytes.saturating_add(size) <= self.cfg.capacity;
        if !fits {
            if self.cfg.trim {
                self.counters.trimmed += 1;
                return EnqueueOutcome::Trimmed(pkt.trimmed(self.cfg.header_bytes));
            }
            self.counters.dropped += 1;
            return EnqueueOutcome::Dropped;
        }
        let marked = self.data_bytes as f64 >= self.cfg.ecn_fraction * self.cfg.capacity as f64;
        if marked {
            pkt.set(flags::ECN);
            self.counters.ecn_marked += 1;
        }
        self.data_bytes += size;
        self.data.push_back(Queued { pkt, in_link });
        if marked {
            EnqueueOutcome::EnqueuedMarked
        } else {
            EnqueueOutcome::Enqueued
        }
    }

    /// Picks the next packet to serialize: control first, then data unless
    /// the port is paused. Returns `None` if busy or nothing is eligible.
    /// The caller must follow up with `set_busy_until`.
    pub fn start_next(&mut self, now: SimTime) -> Option<Queued> {
        self.settle(now);
        if self.in_service.is_some() {
            return None;
        }
        let next = match self.control.pop_front() {
            Some(q) => Some(q),
            None if !self.paused => self.data.pop_front(),
            None => None,
        };
        if next.is_some() {
            self.counters.dequeued += 1;
        }
        self.in_service = next;
        next
    }

    pub fn set_busy_until(&mut self, t: SimTime) {
        self.busy_until = t;
    }

    /// Completes the current transmission, releasing its buffer space.
    pub fn finish(&mut self) -> Queued {
        let q = self.in_service.take().expect("finish with nothing in service");
        if q.pkt.kind.is_control() {
            self.control_bytes -= q.pkt.size as u64;
        } else {
            self.data_bytes -= q.pkt.size as u64;
        }
        q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfcAction {
    Pause,
    Resume,
    NoChange,
}

/// Ingress accounting for one link at its receiving switch: bytes that
/// arrived on the link and are still buffered in the switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PfcState {
    pub pause_threshold: u64,
    pub resume_threshold: u64,
    pub bytes: u64,
    pub paused: bool,
    pub pauses_sent: u64,
}

impl PfcState {
    /// Pause at the buffer size, resume one packet below it.
    pub fn new(buffer: u64, packet: u64) -> Self {
        PfcState {
            pause_threshold: buffer,
            resume_threshold: buffer.saturating_sub(packet),
            bytes: 0,
            paused: false,
            pauses_sent: 0,
        }
    }

    pub fn update(&mut self) -> PfcAction {
        if !self.paused && self.bytes >= self.pause_threshold {
            self.paused = true;
            self.pauses_sent += 1;
            PfcAction::Pause
        } else if self.paused && self.bytes <= self.resume_threshold {
            self.paused = false;
            PfcAction::Resume
        } else {
            PfcAction::NoChange
        }
    }
}
