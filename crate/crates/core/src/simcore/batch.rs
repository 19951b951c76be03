//! Seeded replications, run in parallel with ordered output.

use rayon::prelude::*;

use super::{run_efficient, run_si_baseline, run_sir_baseline, SimOptions, SimResult, World};
use crate::error::{Error, Result};
use crate::params::{NetworkParams, SchemeKind};
use crate::stats::{proportion, Estimate};

/// Runs replication `replicate` of the configured scheme.
pub fn run_one(params: &NetworkParams, seed: u64, replicate: u64, options: &SimOptions) -> Result<SimResult> {
    let world = World::replicate(*params, seed, replicate)?;
    match params.scheme.kind {
        SchemeKind::Efficient => Ok(run_efficient(world, options)),
        SchemeKind::Sir => run_sir_baseline(world, options),
        SchemeKind::Si => run_si_baseline(world, options),
    }
}

/// `runs` independent replications, returned in replicate order whatever the
/// thread count.
pub fn run_batch(params: &NetworkParams, runs: u64, seed: u64, options: &SimOptions) -> Result<Vec<SimResult>> {
    if runs == 0 {
        return Err(Error::InvalidInput("runs must be at least 1".into()));
    }
    params.check(options.guard)?;
    (0..runs)
        .into_par_iter()
        .map(|i| run_one(params, seed, i, options))
        .collect()
}

/// Fraction of runs that reached the percolation threshold, with its
/// binomial standard error.
pub fn estimate_percolation(params: &NetworkParams, runs: u64, seed: u64, options: &SimOptions) -> Result<Estimate> {
    let results = run_batch(params, runs, seed, options)?;
    let hits = results.iter().filter(|r| r.percolated).count();
    Ok(proportion(hits, results.len()).expect("runs >= 1"))
}
