use alloc::collections::BinaryHeap;
use core::cmp::{Ordering, Reverse};

#[derive(Clone, Copy, Debug)]
struct Event {
    time: f64,
    worker: usize,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.worker.cmp(&other.worker))
    }
}

/// Discrete-event clock. Events pop in nondecreasing time, ties by worker id.
#[derive(Clone, Debug, Default)]
pub struct VirtualClock {
    now: f64,
    queue: BinaryHeap<Reverse<Event>>,
}

impl VirtualClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn schedule(&mut self, time: f64, worker: usize) {
        assert!(time >= self.now, "event at {time} scheduled in the past (now {})", self.now);
        self.queue.push(Reverse(Event { time, worker }));
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.queue.peek().map(|e| e.0.time)
    }

    /// Advances to the next event and returns `(time, worker)`.
    pub fn pop(&mut self) -> Option<(f64, usize)> {
        let Reverse(e) = self.queue.pop()?;
        self.now = e.time;
        Some((e.time, e.worker))
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }
}
