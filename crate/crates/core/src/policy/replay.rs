use std::collections::VecDeque;

use rand::Rng;

use super::Transition;

/// Bounded transition store; the oldest entry is evicted first.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<S> {
    capacity: usize,
    items: VecDeque<Transition<S>>,
}

impl<S: Copy> ReplayBuffer<S> {
    pub fn new(capacity: usize) -> Self {
        let capacity = capacity.max(1);
        Self { capacity, items: VecDeque::with_capacity(capacity.min(1 << 16)) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition<S>) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn extend<I: IntoIterator<Item = Transition<S>>>(&mut self, it: I) {
        for t in it {
            self.push(t);
        }
    }

    pub fn get(&self, i: usize) -> Option<&Transition<S>> {
        self.items.get(i)
    }

    /// `n` entries drawn uniformly with replacement; empty when the buffer is.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Transition<S>> {
        if self.items.is_empty() {
            return Vec::new();
        }
        (0..n).map(|_| self.items[rng.gen_range(0..self.items.len())]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{MdpState, PolicyAction};
    use crate::sim::{Pose2D, Vec2};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(tag: f64) -> Transition<f64> {
        let s = MdpState { object: Pose2D::new(tag, 0.0, 0.0), pusher: Vec2::zero(), goal: Pose2D::default() };
        Transition { state: s, action: PolicyAction::zero(), reward: -1.0, next_state: s, done: false, achieved_goal: s.object }
    }

    proptest! {
        #[test]
        fn fifo_within_capacity(cap in 1usize..20, n in 0usize..60) {
            let mut b = ReplayBuffer::new(cap);
            for i in 0..n {
                b.push(t(i as f64));
                prop_assert!(b.len() <= cap);
            }
            let kept = n.min(cap);
            prop_assert_eq!(b.len(), kept);
            for j in 0..kept {
                prop_assert_eq!(b.get(j).unwrap().state.object.x, (n - kept + j) as f64);
            }
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let mut b = ReplayBuffer::new(10);
        b.extend((0..10).map(|i| t(i as f64)));
        let a = b.sample(5, &mut ChaCha8Rng::seed_from_u64(3));
        let c = b.sample(5, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, c);
        assert!(ReplayBuffer::<f64>::new(3).sample(4, &mut ChaCha8Rng::seed_from_u64(0)).is_empty());
    }
}
