//! Event queue with a virtual clock.
//!
//! Events are dispatched in `(time, seq)` order, where `seq` is issued at
//! scheduling time. Two events at the same instant therefore run in the
//! order they were scheduled.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::time::SimTime;
use super::SimError;

#[derive(Debug, Clone, PartialEq)]
pub struct Event<K> {
    pub time: SimTime,
    pub seq: u64,
    pub target: usize,
    pub kind: K,
}

struct Entry<K>(Event<K>);

impl<K> PartialEq for Entry<K> {
    fn eq(&self, other: &Self) -> bool {
        self.0.time == other.0.time && self.0.seq == other.0.seq
    }
}

impl<K> Eq for Entry<K> {}

impl<K> PartialOrd for Entry<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<K> Ord for Entry<K> {
    // BinaryHeap is a max-heap; reverse so the earliest (time, seq) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        (other.0.time, other.0.seq).cmp(&(self.0.time, self.0.seq))
    }
}

pub struct EventQueue<K> {
    heap: BinaryHeap<Entry<K>>,
    now: SimTime,
    next_seq: u64,
    dispatched: u64,
}

impl<K> Default for EventQueue<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K> EventQueue<K> {
    pub fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            now: SimTime::ZERO,
            next_seq: 0,
            dispatched: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Total number of events dispatched so far.
    pub fn dispatched(&self) -> u64 {
        self.dispatched
    }

    /// Enqueues `kind` for `target` at absolute time `time`; returns its seq.
    pub fn schedule(&mut self, time: SimTime, target: usize, kind: K) -> Result<u64, SimError> {
        if time < self.now {
            return Err(SimError::ScheduleInPast {
                at: time,
                now: self.now,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry(Event {
            time,
            seq,
            target,
            kind,
        }));
        Ok(seq)
    }

    /// Enqueues `kind` `delay_us` microseconds from now.
    pub fn schedule_in(&mut self, delay_us: u64, target: usize, kind: K) -> Result<u64, SimError> {
        self.schedule(self.now.after(delay_us), target, kind)
    }

    /// Removes and returns the next event if it is due at or before `limit`,
    /// advancing the clock to its time.
    pub fn pop_due(&mut self, limit: SimTime) -> Option<Event<K>> {
        if self.heap.peek()?.0.time > limit {
            return None;
        }
        let Entry(event) = self.heap.pop()?;
        debug_assert!(event.time >= self.now);
        self.now = event.time;
        self.dispatched += 1;
        Some(event)
    }

    /// Dispatches every event with `time <= limit` to `handler`, then sets
    /// the clock to `limit`. Returns the number of events processed.
    pub fn run_until<E, F>(&mut self, limit: SimTime, mut handler: F) -> Result<u64, E>
    where
        F: FnMut(&mut Self, Event<K>) -> Result<(), E>,
    {
        let mut count = 0;
        while let Some(event) = self.pop_due(limit) {
            handler(self, event)?;
            count += 1;
        }
        if limit > self.now {
            self.now = limit;
        }
        Ok(count)
    }
}
