use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Horizon in fairness windows when `max_events` is not set.
pub const DEFAULT_HORIZON_WINDOWS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActivationPolicy {
    /// Ascending over active components, staleness sampled per read.
    RoundRobin,
    /// Uniform random component, forced by earliest deadline when a
    /// fairness window would otherwise be missed.
    RandomFair,
    /// Random-fair activation, every delayed read takes the oldest
    /// admissible version.
    AdversarialStale,
}

impl ActivationPolicy {
    pub fn name(self) -> &'static str {
        match self {
            ActivationPolicy::RoundRobin => "round-robin",
            ActivationPolicy::RandomFair => "random-fair",
            ActivationPolicy::AdversarialStale => "adversarial-stale",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsyncSchedule {
    pub policy: ActivationPolicy,
    pub seed: u64,
    pub delay_bound: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_events: Option<usize>,
}

impl AsyncSchedule {
    pub fn new(policy: ActivationPolicy, seed: u64, delay_bound: usize) -> Self {
        AsyncSchedule {
            policy,
            seed,
            delay_bound,
            max_events: None,
        }
    }

    /// Zero-delay round-robin: one event per active component per sweep.
    pub fn full_sweep() -> Self {
        AsyncSchedule::new(ActivationPolicy::RoundRobin, 0, 0)
    }

    pub fn with_max_events(mut self, max_events: usize) -> Self {
        self.max_events = Some(max_events);
        self
    }

    /// `W = active·(D+1)`.
    pub fn window(&self, active: usize) -> usize {
        active * (self.delay_bound + 1)
    }

    pub fn horizon(&self, active: usize) -> usize {
        self.max_events
            .unwrap_or(DEFAULT_HORIZON_WINDOWS * self.window(active))
    }
}

pub(crate) struct Scheduler {
    policy: ActivationPolicy,
    delay_bound: usize,
    window: usize,
    active: Vec<usize>,
    last_fire: Vec<Option<usize>>,
    cursor: usize,
    rng: ChaCha8Rng,
}

impl Scheduler {
    pub(crate) fn new(schedule: &AsyncSchedule, active: Vec<usize>) -> Self {
        Scheduler {
            policy: schedule.policy,
            delay_bound: schedule.delay_bound,
            window: schedule.window(active.len()),
            last_fire: vec![None; active.len()],
            active,
            cursor: 0,
            rng: ChaCha8Rng::seed_from_u64(schedule.seed),
        }
    }

    pub(crate) fn next_component(&mut self, event: usize) -> usize {
        let n = self.active.len();
        let pos = match self.policy {
            ActivationPolicy::RoundRobin => {
                let pos = self.cursor;
                self.cursor = (self.cursor + 1) % n;
                pos
            }
            ActivationPolicy::RandomFair | ActivationPolicy::AdversarialStale => self
                .forced(event)
                .unwrap_or_else(|| self.rng.random_range(0..n)),
        };
        self.last_fire[pos] = Some(event);
        self.active[pos]
    }

    /// Earliest-deadline pick when some `j` components must all fire within
    /// the next `j` events.
    fn forced(&self, event: usize) -> Option<usize> {
        let mut deadlines: Vec<(usize, usize)> = self
            .last_fire
            .iter()
            .enumerate()
            .map(|(pos, last)| (last.map_or(self.window - 1, |e| e + self.window), pos))
            .collect();
        deadlines.sort_unstable();
        let tight = deadlines
            .iter()
            .enumerate()
            .any(|(j, &(d, _))| d <= event + j);
        tight.then(|| deadlines[0].1)
    }

    pub(crate) fn staleness(&mut self) -> usize {
        match self.policy {
            ActivationPolicy::AdversarialStale => self.delay_bound,
            _ if self.delay_bound == 0 => 0,
            _ => self.rng.random_range(0..=self.delay_bound),
        }
    }
}
