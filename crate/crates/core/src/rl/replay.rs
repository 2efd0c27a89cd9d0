use rand::seq::index;
use rand::Rng;

/// One step of experience. The next state is stored as the feature vectors
/// of its available actions, which is all the Q-target needs.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub features: Vec<f64>,
    pub reward: f64,
    pub next_actions: Vec<Vec<f64>>,
    pub terminal: bool,
}

/// Fixed-capacity ring; the oldest transition is overwritten first.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    head: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            items: Vec::new(),
            head: 0,
        }
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

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.head] = t;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    /// Transitions from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        let (newer, older) = self.items.split_at(self.head);
        older.iter().chain(newer)
    }

    /// Up to `batch` distinct transitions, uniformly at random.
    pub fn sample<R: Rng>(&self, rng: &mut R, batch: usize) -> Vec<&Transition> {
        let amount = batch.min(self.items.len());
        index::sample(rng, self.items.len(), amount)
            .into_iter()
            .map(|i| &self.items[i])
            .collect()
    }
}
