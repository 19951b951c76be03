//! Event-driven engine for the sleep/wake broadcast scheme.

use super::result::{SimResult, Tally};
use super::world::{EpidemicState, Event, World};
use super::SimOptions;
use crate::channel::LinkSampler;
use crate::geometry::fold_offset;

/// What a single transmission event did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub time: f64,
    pub transmitter: usize,
    pub receivers: usize,
    pub newly_informed: usize,
}

/// Steps the efficient scheme one transmission at a time.
pub struct EfficientRun {
    world: World,
    sampler: LinkSampler,
    tally: Tally,
    max_time: f64,
    truncated: bool,
    threshold: f64,
    scratch: Vec<usize>,
}

impl EfficientRun {
    pub fn new(world: World, options: &SimOptions) -> Self {
        let max_time = options.max_time_for(world.params());
        let tally = Tally::new(world.params().n, &options.fractions, options.coverage_target);
        Self {
            sampler: LinkSampler::new(world.params().channel),
            threshold: world.params().scheme.percolation_threshold,
            world,
            tally,
            max_time,
            truncated: false,
            scratch: Vec::new(),
        }
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn transmissions(&self) -> u64 {
        self.tally.transmissions()
    }

    /// Processes the next transmission. `None` once no infectious node is
    /// left or the time limit is hit.
    pub fn step(&mut self) -> Option<StepInfo> {
        let Event { time, node } = *self.world.queue.peek()?;
        if time > self.max_time {
            self.truncated = true;
            self.world.queue.clear();
            return None;
        }
        self.world.queue.pop();
        debug_assert!(time >= self.world.clock);
        self.world.clock = time;

        let side = self.world.params.side;
        let (tx, ty) = self.world.nodes[node].raw_position(time);
        let (tx, ty) = (tx.rem_euclid(side), ty.rem_euclid(side));

        self.scratch.clear();
        let mut receivers = 0;
        for (j, other) in self.world.nodes.iter().enumerate() {
            if j == node {
                continue;
            }
            let (x, y) = other.raw_position(time);
            let dx = fold_offset(x.rem_euclid(side) - tx, side);
            let dy = fold_offset(y.rem_euclid(side) - ty, side);
            if self.sampler.connected_sq(&mut self.world.rng, dx * dx + dy * dy) {
                receivers += 1;
                if other.state.is_susceptible() {
                    self.scratch.push(j);
                }
            }
        }

        self.tally.transmit(receivers);
        let newly = std::mem::take(&mut self.scratch);
        for &j in &newly {
            let delay = self.world.next_interval();
            self.world.infect(j, delay);
            self.tally.inform(time);
        }
        self.tally.check_coverage();
        let newly_informed = newly.len();
        self.scratch = newly;

        let state = &mut self.world.nodes[node].state;
        let remaining = match *state {
            EpidemicState::Infectious { remaining_tx, .. } => remaining_tx - 1,
            _ => unreachable!("only infectious nodes are scheduled"),
        };
        if remaining == 0 {
            *state = EpidemicState::Recovered;
        } else {
            let next = time + self.world.next_interval();
            self.world.nodes[node].state = EpidemicState::Infectious {
                remaining_tx: remaining,
                next_tx_time: next,
            };
            self.world.queue.push(Event { time: next, node });
        }

        Some(StepInfo {
            time,
            transmitter: node,
            receivers,
            newly_informed,
        })
    }

    pub fn finish(mut self) -> SimResult {
        while self.step().is_some() {}
        let replicate = self.world.replicate;
        let end = self.world.clock;
        self.tally.finish(replicate, self.threshold, end, self.truncated)
    }
}

/// Runs the efficient scheme to completion.
pub fn run_efficient(world: World, options: &SimOptions) -> SimResult {
    EfficientRun::new(world, options).finish()
}
