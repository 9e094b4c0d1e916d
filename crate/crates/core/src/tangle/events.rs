//! Time-ordered event queue shared by the tip-dynamics simulators.
//!
//! Events are ordered by `(time, class, sequence)`. Attachments sort before
//! conflict seeding, which sorts before creations, so a creation at time `t`
//! observes the counters after every attachment scheduled at `t` (the
//! left-limit convention for the selection probabilities).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventClass {
    Attach = 0,
    Seed = 1,
    Create = 2,
}

#[derive(Debug)]
struct Entry<T> {
    time: f64,
    class: EventClass,
    seq: u64,
    payload: T,
}

impl<T> PartialEq for Entry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T> Eq for Entry<T> {}

impl<T> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Entry<T> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.class.cmp(&self.class))
            .then(other.seq.cmp(&self.seq))
    }
}

#[derive(Debug)]
pub struct EventQueue<T> {
    heap: BinaryHeap<Entry<T>>,
    next_seq: u64,
}

impl<T> Default for EventQueue<T> {
    fn default() -> Self {
        Self {
            heap: BinaryHeap::new(),
            next_seq: 0,
        }
    }
}

impl<T> EventQueue<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time: f64, class: EventClass, payload: T) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry {
            time,
            class,
            seq,
            payload,
        });
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.time)
    }

    pub fn pop(&mut self) -> Option<(f64, EventClass, T)> {
        self.heap.pop().map(|e| (e.time, e.class, e.payload))
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attach_precedes_create_at_equal_time() {
        let mut q = EventQueue::new();
        q.push(1.0, EventClass::Create, "c0");
        q.push(1.0, EventClass::Attach, "a0");
        q.push(0.5, EventClass::Create, "early");
        q.push(1.0, EventClass::Create, "c1");
        q.push(1.0, EventClass::Seed, "s");
        let order: Vec<_> = std::iter::from_fn(|| q.pop().map(|e| e.2)).collect();
        assert_eq!(order, vec!["early", "a0", "s", "c0", "c1"]);
    }
}
