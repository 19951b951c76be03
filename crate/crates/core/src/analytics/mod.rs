//! Closed-form performance bounds.

pub mod clustering;
pub mod quadrature;
pub mod special;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use clustering::{clustering_factor, clustering_factor_mc, ClusteringEstimate, ClusteringMethod};
pub use special::{fading_gain, lambert_w0, shadowing_gain};

use crate::channel::ChannelModel;
use crate::error::{Error, Result};
use crate::params::NetworkParams;

/// Energy to transmit one 1 KB broadcast packet, microjoules.
pub const TX_ENERGY_UJ: f64 = 482.0;
/// Energy to receive one broadcast packet, microjoules.
pub const RX_ENERGY_UJ: f64 = 76.0;

/// Mean node degree for a single transmission: `lambda pi r0^2` scaled by
/// both channel gains.
pub fn mean_degree(lambda: f64, channel: &ChannelModel) -> f64 {
    lambda
        * PI
        * channel.r0
        * channel.r0
        * shadowing_gain(channel.sigma, channel.eta)
        * fading_gain(channel.fading, channel.eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeBound {
    pub value: f64,
    /// True for `beta <= 2`, where inclusion-exclusion is not truncated and
    /// the expression is the effective degree itself.
    pub exact: bool,
}

/// `beta * lambda pi r0^2 g_s g_f - (beta - 1) phi`.
pub fn effective_degree_bound(params: &NetworkParams, phi: f64) -> DegreeBound {
    let beta = params.scheme.beta as f64;
    DegreeBound {
        value: beta * mean_degree(params.lambda(), &params.channel) - (beta - 1.0) * phi,
        exact: params.scheme.beta <= 2,
    }
}

fn check_r0(r0: f64) -> Result<()> {
    if r0.is_finite() && r0 > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("effective degree must be > 0, got {r0}")))
    }
}

/// Upper bound on the percolation probability, `1 + W(-R0 e^-R0)/R0`;
/// zero at and below criticality.
pub fn percolation_bound(r0: f64) -> Result<f64> {
    check_r0(r0)?;
    if r0 <= 1.0 {
        return Ok(0.0);
    }
    let w = lambert_w0(-r0 * (-r0).exp())?;
    Ok((1.0 + w / r0).max(0.0))
}

/// Upper bound on the steady-state informed fraction. Same expression as
/// [`percolation_bound`].
pub fn informed_fraction_bound(r0: f64) -> Result<f64> {
    percolation_bound(r0)
}

/// Lower bound on the time to inform a fraction `z` of `n` nodes.
pub fn delay_lower_bound(n: usize, z: f64, r0: f64, beta: u32, tau_s: f64) -> Result<f64> {
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::InvalidInput(format!("fraction must lie in (0, 1), got {z}")));
    }
    check_r0(r0)?;
    if beta == 0 {
        return Err(Error::InvalidInput("beta must be at least 1".into()));
    }
    let nz = n as f64 * z;
    if nz < 1.0 {
        return Err(Error::InvalidInput(format!("N z must be >= 1, got {nz}")));
    }
    let generations = (1.0 + nz.ln() / (r0 / beta as f64).ln_1p()).floor();
    Ok(tau_s * generations)
}

/// Effective degree per transmission of the proposed scheme.
pub fn efficiency(r0: f64, beta: u32) -> Result<f64> {
    if beta == 0 {
        return Err(Error::InvalidInput("beta must be at least 1".into()));
    }
    Ok(r0 / beta as f64)
}

/// Effective degree per transmission of ideal-discovery SIR, which spends
/// one broadcast on the initial neighbourhood and one per newcomer.
pub fn efficiency_sir(r0: f64, lambda: f64, radio_range: f64) -> Result<f64> {
    let denom = r0 - lambda * PI * radio_range * radio_range + 1.0;
    if !(denom > 0.0) {
        return Err(Error::Domain(format!(
            "SIR efficiency denominator must be positive, got {denom}"
        )));
    }
    Ok(r0 / denom)
}

/// Energy one broadcast costs the network: one transmission plus one
/// reception per neighbour.
pub fn energy_per_broadcast(mean_degree: f64) -> Result<f64> {
    if !(mean_degree.is_finite() && mean_degree >= 0.0) {
        return Err(Error::InvalidInput(format!("mean degree must be >= 0, got {mean_degree}")));
    }
    Ok(TX_ENERGY_UJ + RX_ENERGY_UJ * mean_degree)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayBound {
    pub fraction: f64,
    /// `None` when the bound is undefined (N z < 1).
    pub seconds: Option<f64>,
}

/// Every closed-form quantity for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub lambda: f64,
    pub mean_degree: f64,
    pub shadowing_gain: f64,
    pub fading_gain: f64,
    pub phi: f64,
    pub phi_se: Option<f64>,
    pub r0_bound: f64,
    /// False for `beta >= 3`, where `r0_bound` is only an upper bound.
    pub r0_exact: bool,
    pub pc_bound: f64,
    pub z0_bound: f64,
    pub y: f64,
    /// `None` when the SIR denominator is not positive.
    pub y_sir: Option<f64>,
    pub ec_uj: f64,
    pub delay_bounds: Vec<DelayBound>,
    pub warnings: Vec<String>,
}

impl AnalyticReport {
    pub fn delay_bound(&self, fraction: f64) -> Option<f64> {
        self.delay_bounds
            .iter()
            .find(|d| d.fraction == fraction)
            .and_then(|d| d.seconds)
    }
}

/// Evaluates every bound for `params`.
pub fn analyze(
    params: &NetworkParams,
    method: ClusteringMethod,
    delay_fractions: &[f64],
) -> Result<AnalyticReport> {
    params.validate()?;
    let lambda = params.lambda();
    let mut warnings = Vec::new();
    let phi = clustering_factor(params, method)?;
    let bound = effective_degree_bound(params, phi.phi);
    let positive = bound.value > 0.0;
    if !positive {
        warnings.push(format!(
            "effective degree bound {} is not positive; percolation and delay bounds are vacuous",
            bound.value
        ));
    }
    let pc = if positive { percolation_bound(bound.value)? } else { 0.0 };
    let mut delay_bounds = Vec::with_capacity(delay_fractions.len());
    for &z in delay_fractions {
        let seconds = if positive {
            delay_lower_bound(params.n, z, bound.value, params.scheme.beta, params.scheme.tau_s).ok()
        } else {
            None
        };
        delay_bounds.push(DelayBound { fraction: z, seconds });
    }
    let degree = mean_degree(lambda, &params.channel);
    let y_sir = efficiency_sir(bound.value, lambda, params.channel.r0).ok();
    if !bound.exact {
        warnings.push(format!(
            "beta = {}: effective degree is an upper bound",
            params.scheme.beta
        ));
    }
    Ok(AnalyticReport {
        lambda,
        mean_degree: degree,
        shadowing_gain: shadowing_gain(params.channel.sigma, params.channel.eta),
        fading_gain: fading_gain(params.channel.fading, params.channel.eta),
        phi: phi.phi,
        phi_se: phi.se,
        r0_bound: bound.value,
        r0_exact: bound.exact,
        pc_bound: pc,
        z0_bound: pc,
        y: efficiency(bound.value, params.scheme.beta)?,
        y_sir,
        ec_uj: energy_per_broadcast(degree)?,
        delay_bounds,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Fading;
    use crate::params::SchemeConfig;

    fn fixed_point(r0: f64) -> f64 {
        // extinction probability q = exp(-R0 (1 - q)), smallest root
        let mut q = 0.0f64;
        for _ in 0..100_000 {
            let next = (-r0 * (1.0 - q)).exp();
            if (next - q).abs() < 1e-15 {
                break;
            }
            q = next;
        }
        1.0 - q
    }

    #[test]
    fn percolation_examples() {
        assert_eq!(percolation_bound(0.5).unwrap(), 0.0);
        assert_eq!(percolation_bound(1.0).unwrap(), 0.0);
        assert!((percolation_bound(2.0).unwrap() - 0.7968).abs() < 1e-4);
        for r0 in [1.1, 1.5, 2.0, 3.0, 5.0] {
            assert!((percolation_bound(r0).unwrap() - fixed_point(r0)).abs() < 1e-9, "R0 {r0}");
        }
        assert!(percolation_bound(0.0).is_err());
        assert_eq!(informed_fraction_bound(2.5).unwrap(), percolation_bound(2.5).unwrap());
    }

    #[test]
    fn percolation_is_continuous_and_increasing() {
        assert!(percolation_bound(1.0 + 1e-6).unwrap() < 1e-4);
        let mut prev = 0.0;
        for i in 1..200 {
            let p = percolation_bound(1.0 + 0.05 * i as f64).unwrap();
            assert!(p > prev && p < 1.0);
            prev = p;
        }
    }

    #[test]
    fn delay_examples() {
        assert_eq!(delay_lower_bound(2, 0.5, 2.0, 2, 10.0).unwrap(), 10.0);
        assert_eq!(delay_lower_bound(1280, 0.5, 2.5, 2, 10.0).unwrap(), 80.0);
        assert_eq!(delay_lower_bound(1280, 0.5, 2.5, 2, 20.0).unwrap(), 160.0);
        assert!(delay_lower_bound(10, 0.05, 2.0, 2, 1.0).is_err());
        assert!(delay_lower_bound(10, 1.0, 2.0, 2, 1.0).is_err());
    }

    #[test]
    fn delay_monotonicity() {
        let b = |n, z, r0| delay_lower_bound(n, z, r0, 2, 10.0).unwrap();
        assert!(b(1000, 0.5, 2.0) <= b(2000, 0.5, 2.0));
        assert!(b(1000, 0.2, 2.0) <= b(1000, 0.8, 2.0));
        assert!(b(1000, 0.5, 2.0) >= b(1000, 0.5, 4.0));
    }

    #[test]
    fn efficiency_examples() {
        assert_eq!(efficiency(3.0, 1).unwrap(), 3.0);
        let lpr = 0.002 * PI * 400.0;
        assert!((efficiency_sir(lpr, 0.002, 20.0).unwrap() - lpr).abs() < 1e-12);
        assert!(efficiency_sir(0.5, 0.002, 20.0).is_err());
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy_per_broadcast(0.0).unwrap(), 482.0);
        let udm = mean_degree(0.002, &ChannelModel::udm(20.0));
        assert!((energy_per_broadcast(udm).unwrap() - 673.0).abs() < 0.05);
        let lsm = ChannelModel::new(2.0, 4.0, Fading::None, 20.0).unwrap();
        let e = energy_per_broadcast(mean_degree(0.002, &lsm)).unwrap();
        assert!((e - 774.0).abs() < 0.1, "{e}");
    }

    #[test]
    fn default_report() {
        let p = NetworkParams {
            n: 1280,
            side: 800.0,
            speed: 10.0,
            channel: ChannelModel::udm(20.0),
            scheme: SchemeConfig::efficient(2, 10.0),
        };
        let r = analyze(&p, ClusteringMethod::default(), &[0.5]).unwrap();
        assert!(r.r0_exact);
        assert!(r.r0_bound <= 2.0 * r.mean_degree);
        assert_eq!(r.pc_bound, r.z0_bound);
        assert!(r.y > r.y_sir.unwrap());
        assert!(r.delay_bound(0.5).is_some());
    }
}
