//! Monte Carlo simulation of the broadcast schemes.

mod baseline;
mod batch;
mod efficient;
mod measure;
mod result;
mod world;

use serde::{Deserialize, Serialize};

pub use baseline::{run_si_baseline, run_sir_baseline};
pub use batch::{estimate_percolation, run_batch, run_one};
pub use efficient::{run_efficient, EfficientRun, StepInfo};
pub use measure::{measure_clustering, measure_effective_degree};
pub use result::{FractionDelay, SimResult};
pub use world::{EpidemicState, Node, World};
pub(crate) use result::Tally;
pub(crate) use world::Event;

use crate::params::{GuardMode, NetworkParams};

/// Run controls that are not part of the network model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Baseline contact-detection step, seconds.
    pub dt: f64,
    /// Hard stop; `None` picks a generous multiple of the longest causal chain.
    pub max_time: Option<f64>,
    /// Informed fractions whose first-passage times are recorded.
    pub fractions: Vec<f64>,
    /// Coverage at which energy is read off (and SI stops).
    pub coverage_target: f64,
    pub guard: GuardMode,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            dt: 0.1,
            max_time: None,
            fractions: vec![0.1, 0.5, 0.9, 0.99],
            coverage_target: 0.99,
            guard: GuardMode::Refuse,
        }
    }
}

impl SimOptions {
    /// `10 (beta (tau_s + E[tau_r]) + L / V)`, dropping `L / V` for static
    /// networks.
    pub fn max_time_for(&self, params: &NetworkParams) -> f64 {
        self.max_time.unwrap_or_else(|| {
            let s = &params.scheme;
            let chain = s.beta as f64 * s.mean_interval();
            let crossing = if params.speed > 0.0 {
                params.side / params.speed
            } else {
                0.0
            };
            10.0 * (chain + crossing).max(s.active_period())
        })
    }
}
