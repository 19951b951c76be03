//! Direct measurement of the effective degree and the clustering factor.
//!
//! Each trial deploys a fresh population of `n` passive nodes plus one tagged
//! transmitter, so the expected number of nodes in any region of area `A` is
//! exactly `lambda A`. The transmitter fires at time 0 and then after every
//! sleep interval, and each transmission gets fresh channel draws.

use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;

use crate::channel::LinkSampler;
use crate::error::{Error, Result};
use crate::geometry::fold_offset;
use crate::params::NetworkParams;
use crate::rng;
use crate::stats::{estimate, Estimate};

const DEGREE_FAMILY: u64 = 0xDE6;
const CLUSTER_FAMILY: u64 = 0xC7A;

/// For one trial, which passive nodes heard each of `transmissions` rounds.
fn trial(params: &NetworkParams, sampler: &LinkSampler, transmissions: u32, seed: u64, family: u64, index: u64) -> Vec<Vec<bool>> {
    let mut rng = rng::substream(seed, family, index);
    let side = params.side;
    let speed = params.speed;
    let draw_node = |rng: &mut rng::SimRng| {
        let x = side * rng.random::<f64>();
        let y = side * rng.random::<f64>();
        let h = rng.random_range(0.0..TAU);
        (x, y, speed * h.cos(), speed * h.sin())
    };
    let tagged = draw_node(&mut rng);
    let others: Vec<_> = (0..params.n).map(|_| draw_node(&mut rng)).collect();

    let mut heard = Vec::with_capacity(transmissions as usize);
    let mut t = 0.0;
    for k in 0..transmissions {
        if k > 0 {
            t += params.scheme.tau_s + params.scheme.tau_r.sample(&mut rng);
        }
        let tx = (tagged.0 + tagged.2 * t).rem_euclid(side);
        let ty = (tagged.1 + tagged.3 * t).rem_euclid(side);
        let round: Vec<bool> = others
            .iter()
            .map(|o| {
                let dx = fold_offset((o.0 + o.2 * t).rem_euclid(side) - tx, side);
                let dy = fold_offset((o.1 + o.3 * t).rem_euclid(side) - ty, side);
                sampler.connected_sq(&mut rng, dx * dx + dy * dy)
            })
            .collect();
        heard.push(round);
    }
    heard
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        Err(Error::InvalidInput("need at least one trial".into()))
    } else {
        Ok(())
    }
}

/// Mean number of distinct nodes reached over the `beta` transmissions of one
/// node.
pub fn measure_effective_degree(params: &NetworkParams, trials: u64, seed: u64) -> Result<Estimate> {
    check_trials(trials)?;
    params.validate()?;
    let sampler = LinkSampler::new(params.channel);
    let counts: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let heard = trial(params, &sampler, params.scheme.beta, seed, DEGREE_FAMILY, i);
            (0..params.n)
                .filter(|&j| heard.iter().any(|round| round[j]))
                .count() as f64
        })
        .collect();
    Ok(estimate(&counts).expect("non-empty"))
}

/// Mean number of nodes reached by both of two consecutive transmissions.
pub fn measure_clustering(params: &NetworkParams, trials: u64, seed: u64) -> Result<Estimate> {
    check_trials(trials)?;
    params.validate()?;
    let sampler = LinkSampler::new(params.channel);
    let counts: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let heard = trial(params, &sampler, 2, seed, CLUSTER_FAMILY, i);
            (0..params.n).filter(|&j| heard[0][j] && heard[1][j]).count() as f64
        })
        .collect();
    Ok(estimate(&counts).expect("non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelModel;
    use crate::params::SchemeConfig;
    use std::f64::consts::PI;

    fn params(speed: f64, beta: u32) -> NetworkParams {
        NetworkParams {
            n: 1280,
            side: 800.0,
            speed,
            channel: ChannelModel::udm(20.0),
            scheme: SchemeConfig::efficient(beta, 10.0),
        }
    }

    #[test]
    fn single_transmission_degree() {
        let e = measure_effective_degree(&params(10.0, 1), 4000, 1).unwrap();
        let expected = 0.002 * PI * 400.0;
        assert!((e.mean - expected).abs() <= 3.0 * e.se.unwrap(), "{e:?}");
    }

    #[test]
    fn static_clustering_is_full_disk() {
        let e = measure_clustering(&params(0.0, 2), 4000, 2).unwrap();
        let expected = 0.002 * PI * 400.0;
        assert!((e.mean - expected).abs() <= 3.0 * e.se.unwrap(), "{e:?}");
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(measure_clustering(&params(0.0, 2), 0, 2).is_err());
    }
}
