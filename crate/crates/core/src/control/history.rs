use std::collections::VecDeque;

use crate::dataset::StateTuple;
use crate::error::{Error, Result};
use crate::Scalar;

/// Chronological window of observed state tuples.
///
/// A tuple is complete once its action is known. Between observing the world and choosing
/// the next action the buffer also holds a pending observation: the increments of the last
/// step and the pusher position, with the action still open.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryBuffer<S> {
    capacity: usize,
    tuples: VecDeque<StateTuple<S>>,
    pending: Option<StateTuple<S>>,
}

impl<S: Scalar> HistoryBuffer<S> {
    pub fn new(capacity: usize) -> Self {
        Self { capacity: capacity.max(1), tuples: VecDeque::with_capacity(capacity.max(1)), pending: None }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Number of complete tuples.
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Appends a complete tuple, evicting the oldest one when full.
    pub fn push(&mut self, tuple: StateTuple<S>) {
        if self.tuples.len() == self.capacity {
            self.tuples.pop_front();
        }
        self.tuples.push_back(tuple);
    }

    /// Records the observation part of the next tuple; any action fields are ignored.
    pub fn observe(&mut self, tuple: StateTuple<S>) {
        self.pending = Some(StateTuple { ax: S::zero(), ay: S::zero(), ..tuple });
    }

    pub fn pending(&self) -> Option<&StateTuple<S>> {
        self.pending.as_ref()
    }

    /// Completes the pending observation with the action taken.
    pub fn commit(&mut self, ax: S, ay: S) -> Result<StateTuple<S>> {
        let p = self.pending.take().ok_or(Error::Empty("pending observation"))?;
        let t = StateTuple { ax, ay, ..p };
        self.push(t);
        Ok(t)
    }

    pub fn iter(&self) -> impl Iterator<Item = &StateTuple<S>> {
        self.tuples.iter()
    }

    /// The most recent `n` complete tuples, oldest first.
    pub fn latest(&self, n: usize) -> Result<Vec<StateTuple<S>>> {
        if self.tuples.len() < n {
            return Err(Error::ShortHistory { have: self.tuples.len(), need: n });
        }
        Ok(self.tuples.iter().skip(self.tuples.len() - n).copied().collect())
    }
}
