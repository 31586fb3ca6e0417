//! Deterministic discrete-event core.
//!
//! Events are ordered by `(fire_time, insertion sequence)`, so events that
//! share a timestamp fire in the order they were scheduled. Cancellation is
//! lazy: a cancelled handle is remembered and its event is discarded when it
//! reaches the head of the queue.
//!
//! The queue is a calendar: a wheel of fixed-width time buckets covering the
//! near future, plus a binary heap for events beyond the wheel's span. A
//! bucket is sorted when the clock reaches it.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use thiserror::Error;

use crate::time::SimTime;

/// Default cap on processed events per run.
pub const DEFAULT_EVENT_CAP: u64 = 1_000_000_000;

/// log2 of the default bucket width in picoseconds (about 8 ns).
pub const DEFAULT_BUCKET_SHIFT: u32 = 13;
/// Default bucket count; with the default width the wheel spans about 134 us.
pub const DEFAULT_BUCKETS: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("event scheduled in the past: fire time {at} < clock {now}")]
    PastEvent { at: SimTime, now: SimTime },
    #[error("livelock: event cap of {cap} exceeded at {at}")]
    Livelock { cap: u64, at: SimTime },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

/// Ordering key plus the slab slot holding the payload.
#[derive(Clone, Copy)]
struct Entry {
    at: SimTime,
    seq: u64,
    slot: u32,
}

impl Entry {
    fn key(&self) -> (SimTime, u64) {
        (self.at, self.seq)
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // BinaryHeap is a max-heap; invert so the earliest (at, seq) is on top.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key().cmp(&self.key())
    }
}

pub struct EventQueue<E> {
    now: SimTime,
    next_seq: u64,
    processed: u64,
    cancelled: HashSet<u64>,
    shift: u32,
    n_buckets: u64,
    /// Each bucket, once current, is kept sorted in descending order so the
    /// earliest entry is at the end.
    buckets: Vec<Vec<Entry>>,
    /// Absolute bucket number (`time >> shift`) being drained.
    cur: u64,
    cur_sorted: bool,
    in_wheel: usize,
    overflow: BinaryHeap<Entry>,
    slab: Vec<Option<E>>,
    free: Vec<u32>,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        Self::with_wheel(DEFAULT_BUCKET_SHIFT, DEFAULT_BUCKETS)
    }

    /// Calendar with `n_buckets` buckets of `2^shift` ps each.
    pub fn with_wheel(shift: u32, n_buckets: usize) -> Self {
        assert!(n_buckets.is_power_of_two(), "bucket count must be a power of two");
        EventQueue {
            now: SimTime::ZERO,
            next_seq: 0,
            processed: 0,
            cancelled: HashSet::new(),
            shift,
            n_buckets: n_buckets as u64,
            buckets: (0..n_buckets).map(|_| Vec::new()).collect(),
            cur: 0,
            cur_sorted: false,
            in_wheel: 0,
            overflow: BinaryHeap::new(),
            slab: Vec::new(),
            free: Vec::new(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Number of events popped so far (cancelled events excluded).
    pub fn processed(&self) -> u64 {
        self.processed
    }

    /// Pending entries, including lazily cancelled ones.
    pub fn len(&self) -> usize {
        self.in_wheel + self.overflow.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == self.cancelled.len()
    }

    pub fn schedule(&mut self, at: SimTime, event: E) -> Result<EventHandle, EngineError> {
        if at < self.now {
            return Err(EngineError::PastEvent { at, now: self.now });
        }
        Ok(self.push(at, event))
    }

    /// Schedules `delay` after the current clock; never fails.
    pub fn schedule_in(&mut self, delay: SimTime, event: E) -> EventHandle {
        let at = self.now + delay;
        self.push(at, event)
    }

    #[inline]
    fn bucket_of(&self, at: SimTime) -> u64 {
        at.0 >> self.shift
    }

    #[inline]
    fn slot(&self, bucket: u64) -> usize {
        (bucket & (self.n_buckets - 1)) as usize
    }

    fn push(&mut self, at: SimTime, event: E) -> EventHandle {
        let seq = self.next_seq;
        self.next_seq += 1;
        let slot = match self.free.pop() {
            Some(i) => {
                self.slab[i as usize] = Some(event);
                i
            }
            None => {
                self.slab.push(Some(event));
                (self.slab.len() - 1) as u32
            }
        };
        let entry = Entry { at, seq, slot };
        let b = self.bucket_of(at);
        if b < self.cur {
            // Only reachable after a peek skipped ahead; the skipped buckets
            // were empty, so rewinding is safe.
            self.cur = b;
            self.cur_sorted = false;
        }
        if b >= self.cur + self.n_buckets {
            self.overflow.push(entry);
            return EventHandle(seq);
        }
        let in_current = b == self.cur && self.cur_sorted;
        let slot = self.slot(b);
        let bucket = &mut self.buckets[slot];
        if in_current {
            let key = entry.key();
            let pos = bucket.partition_point(|e| e.key() > key);
            bucket.insert(pos, entry);
        } else {
            bucket.push(entry);
        }
        self.in_wheel += 1;
        EventHandle(seq)
    }

    pub fn cancel(&mut self, handle: EventHandle) {
        if handle.0 < self.next_seq {
            self.cancelled.insert(handle.0);
        }
    }

    /// Moves overflow events that now fall inside the wheel's span.
    fn migrate(&mut self) {
        let horizon = self.cur + self.n_buckets;
        while let Some(top) = self.overflow.peek() {
            let b = self.bucket_of(top.at);
            if b >= horizon {
                break;
            }
            let entry = self.overflow.pop().expect("peeked");
            if b == self.cur {
                self.cur_sorted = false;
            }
            let slot = self.slot(b);
            self.buckets[slot].push(entry);
            self.in_wheel += 1;
        }
    }

    /// Advances to the earliest live entry, leaving it at the end of the
    /// current bucket. Returns false if no events remain.
    fn settle(&mut self) -> bool {
        loop {
            if self.in_wheel == 0 {
                let Some(top) = self.overflow.peek() else {
                    return false;
                };
                self.cur = self.cur.max(self.bucket_of(top.at));
                self.cur_sorted = false;
                self.migrate();
            }
            let slot = self.slot(self.cur);
            if !self.cur_sorted {
                self.buckets[slot].sort_unstable_by_key(|e| std::cmp::Reverse(e.key()));
                self.cur_sorted = true;
            }
            let shift = self.shift;
            let cur = self.cur;
            let bucket = &mut self.buckets[slot];
            match bucket.last() {
                Some(e) if e.at.0 >> shift == cur => {
                    if !self.cancelled.is_empty() && self.cancelled.remove(&e.seq) {
                        let slot = e.slot;
                        bucket.pop();
                        self.in_wheel -= 1;
                        self.slab[slot as usize] = None;
                        self.free.push(slot);
                        continue;
                    }
                    return true;
                }
                _ => {
                    self.cur += 1;
                    self.cur_sorted = false;
                    self.migrate();
                }
            }
        }
    }

    /// Time of the next live event, discarding cancelled entries on the way.
    pub fn peek_time(&mut self) -> Option<SimTime> {
        if !self.settle() {
            return None;
        }
        let slot = self.slot(self.cur);
        self.buckets[slot].last().map(|e| e.at)
    }

    /// Pops the next live event and advances the clock to its fire time.
    pub fn pop(&mut self) -> Option<(SimTime, E)> {
        if !self.settle() {
            return None;
        }
        let slot = self.slot(self.cur);
        let entry = self.buckets[slot].pop().expect("settled bucket has an entry");
        self.in_wheel -= 1;
        debug_assert!(entry.at >= self.now);
        self.now = entry.at;
        self.processed += 1;
        let event = self.slab[entry.slot as usize].take().expect("live slot");
        self.free.push(entry.slot);
        Some((entry.at, event))
    }

    /// Iterates over pending events without consuming them; order is unspecified.
    pub fn pending(&self) -> impl Iterator<Item = (SimTime, &E)> {
        self.buckets
            .iter()
            .flatten()
            .chain(self.overflow.iter())
            .filter(|e| !self.cancelled.contains(&e.seq))
            .map(|e| (e.at, self.slab[e.slot as usize].as_ref().expect("live slot")))
    }

    /// Processes events until the queue is empty or the next event lies beyond
    /// `limit`. Returns the final clock: the time of the last processed event,
    /// or `limit` if events remain beyond it.
    pub fn run_until_idle<F>(
        &mut self,
        limit: SimTime,
        max_events: u64,
        mut handler: F,
    ) -> Result<SimTime, EngineError>
    where
        F: FnMut(&mut EventQueue<E>, E),
    {
        let start = self.processed;
        loop {
            match self.peek_time() {
                None => return Ok(self.now),
                Some(at) if at > limit => {
                    self.now = limit;
                    return Ok(limit);
                }
                Some(_) => {}
            }
            if self.processed - start >= max_events {
                return Err(EngineError::Livelock {
                    cap: max_events,
                    at: self.now,
                });
            }
            let (_, event) = self.pop().expect("peeked event vanished");
            handler(self, event);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_in_time_order() {
        let mut q = EventQueue::new();
        q.schedule(SimTime(5), 'b').unwrap();
        q.schedule(SimTime(3), 'a').unwrap();
        assert_eq!(q.pop(), Some((SimTime(3), 'a')));
        assert_eq!(q.pop(), Some((SimTime(5), 'b')));
        assert_eq!(q.pop(), None);
    }

    #[test]
    fn equal_times_fire_fifo() {
        let mut q = EventQueue::new();
        q.schedule(SimTime(7), "A").unwrap();
        q.schedule(SimTime(7), "B").unwrap();
        assert_eq!(q.pop().unwrap().1, "A");
        assert_eq!(q.pop().unwrap().1, "B");
    }

    #[test]
    fn rejects_past_events() {
        let mut q = EventQueue::new();
        q.schedule(SimTime(4), ()).unwrap();
        q.pop();
        assert_eq!(q.now(), SimTime(4));
        let err = q.schedule(SimTime(2), ()).unwrap_err();
        assert_eq!(
            err,
            EngineError::PastEvent {
                at: SimTime(2),
                now: SimTime(4)
            }
        );
    }

    #[test]
    fn cancelled_events_never_fire() {
        let mut q = EventQueue::new();
        let h = q.schedule(SimTime(1), 1).unwrap();
        q.schedule(SimTime(2), 2).unwrap();
        q.cancel(h);
        assert_eq!(q.pop(), Some((SimTime(2), 2)));
        assert!(q.is_empty());
    }

    #[test]
    fn empty_queue_runs_to_zero() {
        let mut q: EventQueue<()> = EventQueue::new();
        let end = q
            .run_until_idle(SimTime(100), DEFAULT_EVENT_CAP, |_, _| {})
            .unwrap();
        assert_eq!(end, SimTime(0));
    }

    #[test]
    fn single_event_sets_final_clock() {
        let mut q = EventQueue::new();
        q.schedule(SimTime(10), ()).unwrap();
        let end = q
            .run_until_idle(SimTime(100), DEFAULT_EVENT_CAP, |_, _| {})
            .unwrap();
        assert_eq!(end, SimTime(10));
    }

    #[test]
    fn stops_at_limit_when_events_remain() {
        let mut q = EventQueue::new();
        q.schedule(SimTime(10), ()).unwrap();
        q.schedule(SimTime(200), ()).unwrap();
        let end = q
            .run_until_idle(SimTime(100), DEFAULT_EVENT_CAP, |_, _| {})
            .unwrap();
        assert_eq!(end, SimTime(100));
        assert_eq!(q.processed(), 1);
    }

    #[test]
    fn ping_pong_trips_livelock_cap() {
        #[derive(Debug)]
        enum Ball {
            Ping,
            Pong,
        }
        let mut q = EventQueue::new();
        q.schedule(SimTime(0), Ball::Ping).unwrap();
        let cap = 1_000_000;
        let err = q
            .run_until_idle(SimTime::MAX, cap, |q, ev| {
                let next = match ev {
                    Ball::Ping => Ball::Pong,
                    Ball::Pong => Ball::Ping,
                };
                q.schedule_in(SimTime(1), next);
            })
            .unwrap_err();
        assert!(matches!(err, EngineError::Livelock { cap: c, .. } if c == cap));
        assert_eq!(q.processed(), cap);
    }

    #[test]
    fn far_future_events_come_back_in_order() {
        let mut q = EventQueue::with_wheel(2, 8);
        for (i, t) in [1000u64, 3, 40, 31, 32, 5000, 33, 1000].iter().enumerate() {
            q.schedule(SimTime(*t), i).unwrap();
        }
        let order: Vec<usize> = std::iter::from_fn(|| q.pop().map(|(_, i)| i)).collect();
        assert_eq!(order, vec![1, 3, 4, 6, 2, 0, 7, 5]);
    }

    #[test]
    fn schedule_after_peek_beyond_limit() {
        let mut q = EventQueue::with_wheel(0, 4);
        q.schedule(SimTime(100), 'z').unwrap();
        let end = q.run_until_idle(SimTime(10), 10, |_, _| {}).unwrap();
        assert_eq!(end, SimTime(10));
        q.schedule(SimTime(12), 'a').unwrap();
        assert_eq!(q.pop(), Some((SimTime(12), 'a')));
        assert_eq!(q.pop(), Some((SimTime(100), 'z')));
    }

    #[test]
    fn clock_is_monotone_under_random_schedules() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut q = EventQueue::new();
        for i in 0..200u32 {
            q.schedule(SimTime(rng.random_range(0..1000)), i).unwrap();
        }
        let mut last = SimTime::ZERO;
        let mut n = 0;
        q.run_until_idle(SimTime::MAX, DEFAULT_EVENT_CAP, |q, i| {
            assert!(q.now() >= last);
            last = q.now();
            n += 1;
            if i % 3 == 0 && n < 1000 {
                q.schedule_in(SimTime(rng.random_range(0..50)), i + 1);
            }
        })
        .unwrap();
    }

    proptest::proptest! {
        #[test]
        fn matches_reference_heap_order(
            ops in proptest::collection::vec((0u64..400, 0u8..4), 1..300),
            shift in 0u32..4,
        ) {
            use std::collections::BinaryHeap;
            use std::cmp::Reverse;
            let mut q = EventQueue::with_wheel(shift, 8);
            let mut reference = BinaryHeap::new();
            let mut seq = 0u64;
            for (delay, op) in ops {
                if op == 0 {
                    let want = reference.pop().map(|Reverse((t, s))| (SimTime(t), s));
                    proptest::prop_assert_eq!(q.pop(), want);
                } else {
                    let at = q.now() + SimTime(delay);
                    q.schedule(at, seq).unwrap();
                    reference.push(Reverse((at.0, seq)));
                    seq += 1;
                }
                if op == 3 {
                    let want = reference.peek().map(|Reverse((t, _))| SimTime(*t));
                    proptest::prop_assert_eq!(q.peek_time(), want);
                }
            }
            while let Some(Reverse((t, s))) = reference.pop() {
                proptest::prop_assert_eq!(q.pop(), Some((SimTime(t), s)));
            }
            proptest::prop_assert_eq!(q.pop(), None);
        }
    }
}
