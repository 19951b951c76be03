use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{torus_distance_sq, wrap_coordinate, TorusPoint};
use crate::params::NetworkParams;
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EpidemicState {
    Susceptible,
    Infectious { remaining_tx: u32, next_tx_time: f64 },
    Recovered,
}

impl EpidemicState {
    pub fn is_susceptible(&self) -> bool {
        matches!(self, EpidemicState::Susceptible)
    }
}

/// A node moving in a straight line from `origin` since time 0.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub origin: TorusPoint,
    pub heading: f64,
    pub(crate) vx: f64,
    pub(crate) vy: f64,
    pub state: EpidemicState,
}

impl Node {
    pub(crate) fn new(origin: TorusPoint, heading: f64, speed: f64) -> Self {
        Self {
            origin,
            heading,
            vx: speed * heading.cos(),
            vy: speed * heading.sin(),
            state: EpidemicState::Susceptible,
        }
    }

    /// Unwrapped coordinates at time `t`; reduce with [`Node::position`] or
    /// feed straight into a torus distance.
    #[inline]
    pub(crate) fn raw_position(&self, t: f64) -> (f64, f64) {
        (self.origin.x() + self.vx * t, self.origin.y() + self.vy * t)
    }

    pub fn position(&self, t: f64, side: f64) -> TorusPoint {
        let (x, y) = self.raw_position(t);
        TorusPoint::wrapped(x, y, side)
    }
}

/// A pending transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Event {
    pub time: f64,
    pub node: usize,
}

impl Eq for Event {}

impl Ord for Event {
    // Reversed so the max-heap pops the earliest event, ties by node index.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Simulation state: nodes, clock, event queue and random stream.
#[derive(Debug, Clone)]
pub struct World {
    pub(crate) params: NetworkParams,
    pub(crate) nodes: Vec<Node>,
    pub(crate) clock: f64,
    pub(crate) queue: BinaryHeap<Event>,
    pub(crate) rng: SimRng,
    pub(crate) source: usize,
    pub(crate) replicate: u64,
}

/// Uniform coordinate in `(0, side]`.
fn coordinate(rng: &mut SimRng, side: f64) -> f64 {
    wrap_coordinate(side * (1.0 - rng.random::<f64>()), side)
}

impl World {
    /// Deploys `params.n` nodes uniformly with uniform headings and makes one
    /// uniformly chosen node the source.
    pub fn new(params: NetworkParams, seed: u64) -> crate::Result<Self> {
        Self::replicate(params, seed, 0)
    }

    /// The world for replication `replicate` under master seed `seed`.
    pub fn replicate(params: NetworkParams, seed: u64, replicate: u64) -> crate::Result<Self> {
        params.validate()?;
        let mut rng = rng::stream(seed, replicate);
        let side = params.side;
        let nodes = (0..params.n)
            .map(|_| {
                let x = coordinate(&mut rng, side);
                let y = coordinate(&mut rng, side);
                let heading = rng.random_range(0.0..TAU);
                Node::new(TorusPoint::wrapped(x, y, side), heading, params.speed)
            })
            .collect();
        let source = rng.random_range(0..params.n);
        let mut world = Self {
            params,
            nodes,
            clock: 0.0,
            queue: BinaryHeap::new(),
            rng,
            source,
            replicate,
        };
        let first = world.next_interval();
        world.infect(source, first);
        Ok(world)
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    /// Counts of susceptible, infectious and recovered nodes.
    pub fn counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for n in &self.nodes {
            match n.state {
                EpidemicState::Susceptible => c.0 += 1,
                EpidemicState::Infectious { .. } => c.1 += 1,
                EpidemicState::Recovered => c.2 += 1,
            }
        }
        c
    }

    pub(crate) fn next_interval(&mut self) -> f64 {
        self.params.scheme.tau_s + self.params.scheme.tau_r.sample(&mut self.rng)
    }

    /// Makes `node` infectious with a full budget and its first transmission
    /// `delay` from now.
    pub(crate) fn infect(&mut self, node: usize, delay: f64) {
        let time = self.clock + delay;
        self.nodes[node].state = EpidemicState::Infectious {
            remaining_tx: self.params.scheme.beta,
            next_tx_time: time,
        };
        self.queue.push(Event { time, node });
    }

    /// Squared torus distance between nodes `a` and `b` at time `t`.
    #[inline]
    pub fn distance_sq(&self, a: usize, b: usize, t: f64) -> f64 {
        let (ax, ay) = self.nodes[a].raw_position(t);
        let (bx, by) = self.nodes[b].raw_position(t);
        // per-axis offsets must be reduced before folding
        let side = self.params.side;
        torus_distance_sq(
            ax.rem_euclid(side),
            ay.rem_euclid(side),
            bx.rem_euclid(side),
            by.rem_euclid(side),
            side,
        )
    }
}
