//! Time-stepped SI and SIR baselines.
//!
//! Both check contacts on a fixed grid of times `k * dt`. Under the unit disk
//! model neighbours come from a uniform cell grid; otherwise every pair gets
//! one quasi-static radio range at the start of the run and contacts are
//! found by a full scan.

use super::result::{SimResult, Tally};
use super::world::{EpidemicState, World};
use super::SimOptions;
use crate::channel::LinkSampler;
use crate::error::{Error, Result};
use crate::geometry::fold_offset;

enum Links {
    Disk { r_sq: f64 },
    /// Squared range per unordered pair, row-major upper triangle.
    Pairs { r_sq: Vec<f32> },
}

struct Contacts {
    side: f64,
    links: Links,
    x: Vec<f64>,
    y: Vec<f64>,
    // cell grid, only used for disk links
    cells: usize,
    cell_size: f64,
    starts: Vec<usize>,
    members: Vec<usize>,
}

impl Contacts {
    fn new(world: &mut World) -> Self {
        let p = *world.params();
        let n = p.n;
        let links = if p.channel.is_udm() {
            Links::Disk {
                r_sq: p.channel.r0 * p.channel.r0,
            }
        } else {
            let sampler = LinkSampler::new(p.channel);
            let mut r_sq = Vec::with_capacity(n * (n - 1) / 2);
            for _ in 0..n * (n - 1) / 2 {
                r_sq.push(sampler.range_sq(&mut world.rng) as f32);
            }
            Links::Pairs { r_sq }
        };
        let cells = ((p.side / p.channel.r0).floor() as usize).max(1);
        Self {
            side: p.side,
            links,
            x: vec![0.0; n],
            y: vec![0.0; n],
            cells,
            cell_size: p.side / cells as f64,
            starts: Vec::new(),
            members: Vec::new(),
        }
    }

    fn use_grid(&self) -> bool {
        matches!(self.links, Links::Disk { .. }) && self.cells >= 3
    }

    fn cell_of(&self, v: f64) -> usize {
        ((v / self.cell_size) as usize).min(self.cells - 1)
    }

    fn update(&mut self, world: &World, t: f64) {
        for (i, node) in world.nodes.iter().enumerate() {
            let (x, y) = node.raw_position(t);
            self.x[i] = x.rem_euclid(self.side);
            self.y[i] = y.rem_euclid(self.side);
        }
        if !self.use_grid() {
            return;
        }
        let c = self.cells;
        let n = self.x.len();
        let mut counts = vec![0usize; c * c + 1];
        let ids: Vec<usize> = (0..n)
            .map(|i| self.cell_of(self.y[i]) * c + self.cell_of(self.x[i]))
            .collect();
        for &id in &ids {
            counts[id + 1] += 1;
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        self.starts = counts.clone();
        self.members = vec![0; n];
        for (i, &id) in ids.iter().enumerate() {
            self.members[counts[id]] = i;
            counts[id] += 1;
        }
    }

    fn pair_r_sq(&self, i: usize, j: usize) -> f64 {
        match &self.links {
            Links::Disk { r_sq } => *r_sq,
            Links::Pairs { r_sq } => {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                let n = self.x.len();
                // offset of row a in the packed upper triangle
                let row = a * (2 * n - a - 1) / 2;
                r_sq[row + (b - a - 1)] as f64
            }
        }
    }

    fn in_range(&self, i: usize, j: usize) -> bool {
        let dx = fold_offset(self.x[j] - self.x[i], self.side);
        let dy = fold_offset(self.y[j] - self.y[i], self.side);
        dx * dx + dy * dy <= self.pair_r_sq(i, j)
    }

    /// Sorted neighbours of `i` at the last update.
    fn neighbours(&self, i: usize, out: &mut Vec<usize>) {
        out.clear();
        if self.use_grid() {
            let c = self.cells as isize;
            let cx = self.cell_of(self.x[i]) as isize;
            let cy = self.cell_of(self.y[i]) as isize;
            for oy in -1..=1 {
                for ox in -1..=1 {
                    let id = ((cy + oy).rem_euclid(c) * c + (cx + ox).rem_euclid(c)) as usize;
                    for &j in &self.members[self.starts[id]..self.starts[id + 1]] {
                        if j != i && self.in_range(i, j) {
                            out.push(j);
                        }
                    }
                }
            }
            out.sort_unstable();
        } else {
            out.extend((0..self.x.len()).filter(|&j| j != i && self.in_range(i, j)));
        }
    }
}

fn check_step(world: &World, dt: f64) -> Result<()> {
    let p = world.params();
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidInput(format!("time step must be > 0, got {dt}")));
    }
    if p.speed * dt > p.channel.r0 / 4.0 {
        return Err(Error::Guard(format!(
            "V*dt = {} exceeds r0/4 = {}; contacts would be missed",
            p.speed * dt,
            p.channel.r0 / 4.0
        )));
    }
    Ok(())
}

/// Baseline state shared by SI and SIR.
struct Stepper {
    world: World,
    contacts: Contacts,
    tally: Tally,
    dt: f64,
    max_steps: u64,
    buf: Vec<usize>,
}

impl Stepper {
    fn new(mut world: World, options: &SimOptions) -> Result<Self> {
        check_step(&world, options.dt)?;
        // baselines do not use the efficient scheme's event queue
        world.queue.clear();
        let source = world.source;
        world.nodes[source].state = EpidemicState::Susceptible;
        let max_time = options.max_time_for(world.params());
        let mut contacts = Contacts::new(&mut world);
        contacts.update(&world, 0.0);
        let tally = Tally::new(world.params().n, &options.fractions, options.coverage_target);
        Ok(Self {
            world,
            contacts,
            tally,
            dt: options.dt,
            max_steps: (max_time / options.dt).floor() as u64,
            buf: Vec::new(),
        })
    }

    fn finish(self, end_time: f64, truncated: bool) -> SimResult {
        let threshold = self.world.params().scheme.percolation_threshold;
        self.tally
            .finish(self.world.replicate, threshold, end_time, truncated)
    }
}

struct SirState {
    prev: Vec<Vec<usize>>,
    recover_step: Vec<u64>,
    /// Step of the initial broadcast, `u64::MAX` once it is done.
    first_step: Vec<u64>,
    active: Vec<usize>,
    period_steps: u64,
}

impl SirState {
    /// Marks `j` infectious at `step`; its initial broadcast goes out at
    /// `first`.
    fn infect(&mut self, s: &mut Stepper, j: usize, step: u64, first: u64) {
        s.world.nodes[j].state = EpidemicState::Infectious {
            remaining_tx: 1,
            next_tx_time: first as f64 * s.dt,
        };
        self.recover_step[j] = step + self.period_steps;
        self.first_step[j] = first;
        self.active.push(j);
    }
}

/// Ideal-discovery SIR. A newly infected node broadcasts once to its whole
/// neighbourhood at the next step. Until it recovers it then wakes up once
/// for every node, informed or not, that comes into range. Every
/// transmission is charged as a broadcast overheard by all nodes in range.
pub fn run_sir_baseline(world: World, options: &SimOptions) -> Result<SimResult> {
    let mut s = Stepper::new(world, options)?;
    let n = s.world.params().n;
    let period = s.world.params().scheme.active_period();
    let period_steps = (period / s.dt).round().max(1.0) as u64;
    let source = s.world.source;

    let mut st = SirState {
        prev: vec![Vec::new(); n],
        recover_step: vec![u64::MAX; n],
        first_step: vec![u64::MAX; n],
        active: Vec::new(),
        period_steps,
    };
    st.infect(&mut s, source, 0, 0);

    let mut step = 0u64;
    let mut truncated = false;
    let mut current = Vec::new();
    while !st.active.is_empty() {
        if step > s.max_steps {
            truncated = true;
            break;
        }
        let t = step as f64 * s.dt;
        if step > 0 {
            s.contacts.update(&s.world, t);
        }
        st.active.sort_unstable();
        let snapshot = std::mem::take(&mut st.active);
        let mut still = Vec::with_capacity(snapshot.len());
        for &i in &snapshot {
            if step >= st.recover_step[i] {
                s.world.nodes[i].state = EpidemicState::Recovered;
                st.prev[i] = Vec::new();
                continue;
            }
            still.push(i);
            s.contacts.neighbours(i, &mut current);
            if st.first_step[i] == step {
                st.first_step[i] = u64::MAX;
                s.tally.transmit(current.len());
                for &j in &current {
                    if s.world.nodes[j].state.is_susceptible() {
                        st.infect(&mut s, j, step, step + 1);
                        s.tally.inform(t);
                    }
                }
                s.tally.check_coverage();
            } else if st.first_step[i] == u64::MAX {
                let mut newcomers = std::mem::take(&mut s.buf);
                newcomers.clear();
                newcomers.extend(
                    current
                        .iter()
                        .copied()
                        .filter(|j| st.prev[i].binary_search(j).is_err()),
                );
                for &j in &newcomers {
                    s.tally.transmit(current.len());
                    if s.world.nodes[j].state.is_susceptible() {
                        st.infect(&mut s, j, step, step + 1);
                        s.tally.inform(t);
                        s.tally.check_coverage();
                    }
                }
                s.buf = newcomers;
            }
            std::mem::swap(&mut st.prev[i], &mut current);
        }
        still.append(&mut st.active);
        st.active = still;
        step += 1;
    }
    let end = step.saturating_sub(1) as f64 * s.dt;
    Ok(s.finish(end, truncated))
}

/// SI with periodic rebroadcast: every informed node broadcasts to its whole
/// neighbourhood every `si_interval` seconds, starting one interval after it
/// was informed, until the coverage target is met.
pub fn run_si_baseline(world: World, options: &SimOptions) -> Result<SimResult> {
    let mut s = Stepper::new(world, options)?;
    let n = s.world.params().n;
    let interval = s.world.params().scheme.si_interval.unwrap_or(s.dt);
    let every = (interval / s.dt).round().max(1.0) as u64;
    let source = s.world.source;

    let mut next_step = vec![u64::MAX; n];
    let mut active: Vec<usize> = Vec::new();
    let mut current = Vec::new();

    let broadcast = |s: &mut Stepper,
                     i: usize,
                     step: u64,
                     current: &mut Vec<usize>,
                     next_step: &mut Vec<u64>,
                     active: &mut Vec<usize>| {
        s.contacts.neighbours(i, current);
        s.tally.transmit(current.len());
        let t = step as f64 * s.dt;
        for &j in current.iter() {
            if s.world.nodes[j].state.is_susceptible() {
                s.world.nodes[j].state = EpidemicState::Infectious {
                    remaining_tx: 1,
                    next_tx_time: t + interval,
                };
                next_step[j] = step + every;
                active.push(j);
                s.tally.inform(t);
            }
        }
        s.tally.check_coverage();
    };

    s.world.nodes[source].state = EpidemicState::Infectious {
        remaining_tx: 1,
        next_tx_time: 0.0,
    };
    active.push(source);
    broadcast(&mut s, source, 0, &mut current, &mut next_step, &mut active);
    next_step[source] = every;

    let mut step = 0u64;
    let mut truncated = false;
    while !s.tally.covered() && s.tally.informed() < n {
        step += 1;
        if step > s.max_steps {
            truncated = true;
            step -= 1;
            break;
        }
        s.contacts.update(&s.world, step as f64 * s.dt);
        active.sort_unstable();
        let snapshot = active.clone();
        for &i in &snapshot {
            if next_step[i] > step {
                continue;
            }
            broadcast(&mut s, i, step, &mut current, &mut next_step, &mut active);
            next_step[i] = step + every;
            if s.tally.covered() {
                break;
            }
        }
    }
    let end = step as f64 * s.dt;
    Ok(s.finish(end, truncated))
}
