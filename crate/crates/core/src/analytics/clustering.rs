//! The clustering factor: expected number of nodes reached by both of two
//! consecutive transmissions of the same node.
//!
//! Between the two transmissions the transmitter and a receiver move apart by
//! `psi = 2 tau V sin(theta/2)` where `theta ~ U[0, pi)` is their relative
//! heading, so the common receivers are the Poisson points in the overlap of
//! two disks whose radii are drawn independently from the channel.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::quadrature::{discrete_gauss, gauss_hermite, gauss_laguerre, gauss_legendre, integrate_adaptive, Rule};
use crate::channel::{radio_range, ChannelDraw, ChannelModel, Fading, LinkSampler};
use crate::error::{Error, Result};
use crate::geometry::lens_area;
use crate::params::{NetworkParams, TauLaw};
use crate::rng;
use crate::stats::Accumulator;

/// How to evaluate the clustering integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ClusteringMethod {
    /// Tensor Gauss rules over the channel factors, adaptive quadrature over
    /// the heading, piecewise Gauss-Legendre over a random interval.
    Quadrature { order: usize },
    MonteCarlo { samples: u64, seed: u64 },
}

impl Default for ClusteringMethod {
    fn default() -> Self {
        ClusteringMethod::Quadrature { order: 32 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringEstimate {
    pub phi: f64,
    /// Monte Carlo standard error; `None` for quadrature.
    pub se: Option<f64>,
}

/// Law of the full interval `tau_s + tau_r` between two transmissions.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Interval {
    Point(f64),
    Uniform(f64, f64),
    Exp { start: f64, rate: f64 },
}

impl Interval {
    fn new(tau_s: f64, law: TauLaw) -> Self {
        match law {
            TauLaw::Constant { value } => Interval::Point(tau_s + value),
            TauLaw::Uniform { low, high } if low == high => Interval::Point(tau_s + low),
            TauLaw::Uniform { low, high } => Interval::Uniform(tau_s + low, tau_s + high),
            TauLaw::Exponential { rate } => Interval::Exp { start: tau_s, rate },
        }
    }

    /// Interval values at which the heading integrand can have a kink.
    fn edges(&self) -> Vec<f64> {
        match *self {
            Interval::Point(t) => vec![t],
            Interval::Uniform(a, b) => vec![a, b],
            Interval::Exp { start, .. } => vec![start],
        }
    }
}

/// Expected overlap area over the interval law, for a separation growing at
/// `s` meters per second.
fn interval_average(s: f64, r1: f64, r2: f64, law: Interval, legendre: &Rule) -> f64 {
    let full = PI * r1.min(r2).powi(2);
    if s <= 0.0 {
        return full;
    }
    let t1 = (r1 - r2).abs() / s;
    let t2 = (r1 + r2) / s;
    match law {
        Interval::Point(t) => lens_area(s * t, r1, r2),
        Interval::Uniform(a, b) => {
            let width = b - a;
            let contained = (t1.clamp(a, b) - a) / width * full;
            let (lo, hi) = (a.max(t1), b.min(t2));
            let partial = if hi > lo {
                super::quadrature::integrate_fixed(legendre, lo, hi, |t| lens_area(s * t, r1, r2))
                    / width
            } else {
                0.0
            };
            contained + partial
        }
        Interval::Exp { start, rate } => {
            let cdf = |t: f64| {
                if t <= start {
                    0.0
                } else {
                    -(-rate * (t - start)).exp_m1()
                }
            };
            let contained = cdf(t1) * full;
            let lo = start.max(t1);
            let partial = if t2 > lo {
                super::quadrature::integrate_fixed(legendre, lo, t2, |t| {
                    rate * (-rate * (t - start)).exp() * lens_area(s * t, r1, r2)
                })
            } else {
                0.0
            };
            contained + partial
        }
    }
}

/// `E_theta E_tau [A_p(psi, r1, r2)]` for fixed radii.
fn mean_overlap(r1: f64, r2: f64, speed: f64, law: Interval, legendre: &Rule) -> f64 {
    let full = PI * r1.min(r2).powi(2);
    if full == 0.0 {
        return 0.0;
    }
    if speed == 0.0 {
        return full;
    }
    let mut breaks = Vec::with_capacity(6);
    for d in [(r1 - r2).abs(), r1 + r2] {
        for edge in law.edges() {
            if edge > 0.0 {
                let ratio = d / (2.0 * speed * edge);
                if ratio < 1.0 {
                    breaks.push(2.0 * ratio.asin());
                }
            }
        }
    }
    let tol = 1e-10 * full;
    integrate_adaptive(
        |theta| interval_average(2.0 * speed * (0.5 * theta).sin(), r1, r2, law, legendre),
        0.0,
        PI,
        &breaks,
        tol,
    ) / PI
}

/// Tensor rule over `(z, omega)` for one link: nodes `r_N(z, omega)` and
/// their probabilities.
fn tensor_rule(channel: &ChannelModel, order: usize) -> Result<Vec<(f64, f64)>> {
    let shadow: Vec<(f64, f64)> = if channel.sigma > 0.0 {
        let r = gauss_hermite(order)?;
        r.nodes
            .iter()
            .zip(&r.weights)
            .map(|(&x, &w)| (channel.sigma * x, w))
            .collect()
    } else {
        vec![(0.0, 1.0)]
    };
    let fade: Vec<(f64, f64)> = match channel.fading {
        Fading::None => vec![(1.0, 1.0)],
        Fading::Nakagami { m } => {
            let r = gauss_laguerre(order, m - 1.0)?;
            r.nodes
                .iter()
                .zip(&r.weights)
                .map(|(&x, &w)| (x / m, w))
                .collect()
        }
    };
    let mut out = Vec::with_capacity(shadow.len() * fade.len());
    for &(z, wz) in &shadow {
        for &(omega, wo) in &fade {
            let w = wz * wo;
            if w > 1e-14 {
                out.push((radio_range(channel, ChannelDraw { z, omega }), w));
            }
        }
    }
    let total: f64 = out.iter().map(|p| p.1).sum();
    for p in &mut out {
        p.1 /= total;
    }
    Ok(out)
}

/// Radius rule for one link with at most `order` nodes.
fn radius_rule(channel: &ChannelModel, order: usize) -> Result<Vec<(f64, f64)>> {
    let out = tensor_rule(channel, order)?;
    if out.len() <= order {
        return Ok(out);
    }
    // Shadowing and fading together: the overlap depends on the channel only
    // through the range, so collapse the tensor rule onto `order` nodes in
    // log-range.
    let logs: Vec<(f64, f64)> = out.iter().map(|&(r, w)| (r.ln(), w)).collect();
    let rule = discrete_gauss(&logs, order)?;
    Ok(rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| (x.exp(), w))
        .collect())
}

fn quadrature(params: &NetworkParams, order: usize) -> Result<f64> {
    if order == 0 {
        return Err(Error::InvalidInput("quadrature order must be at least 1".into()));
    }
    phi_over(params, &radius_rule(&params.channel, order)?)
}

fn phi_over(params: &NetworkParams, radii: &[(f64, f64)]) -> Result<f64> {
    let law = Interval::new(params.scheme.tau_s, params.scheme.tau_r);
    let legendre = gauss_legendre(20)?;
    let mut acc = 0.0;
    for (i, &(r1, w1)) in radii.iter().enumerate() {
        for &(r2, w2) in &radii[i..] {
            let mut w = w1 * w2;
            if r1 != r2 {
                w *= 2.0;
            }
            if w < 1e-15 {
                continue;
            }
            acc += w * mean_overlap(r1, r2, params.speed, law, &legendre);
        }
    }
    Ok(params.lambda() * acc)
}

/// Plain Monte Carlo over heading, interval and both channel draws.
pub fn clustering_factor_mc<R: Rng + ?Sized>(
    params: &NetworkParams,
    samples: u64,
    rng: &mut R,
) -> Result<ClusteringEstimate> {
    if samples == 0 {
        return Err(Error::InvalidInput("Monte Carlo budget must be positive".into()));
    }
    params.validate()?;
    let sampler = LinkSampler::new(params.channel);
    let mut acc = Accumulator::new();
    for _ in 0..samples {
        let theta = rng.random_range(0.0..PI);
        let tau = params.scheme.tau_s + params.scheme.tau_r.sample(rng);
        let r1 = sampler.range_sq(rng).sqrt();
        let r2 = sampler.range_sq(rng).sqrt();
        let d = 2.0 * tau * params.speed * (0.5 * theta).sin();
        acc.push(lens_area(d, r1, r2));
    }
    let lambda = params.lambda();
    Ok(ClusteringEstimate {
        phi: lambda * acc.mean(),
        se: acc.variance().map(|v| lambda * (v / samples as f64).sqrt()),
    })
}

/// Clustering factor for the configured scheme interval and channel.
pub fn clustering_factor(params: &NetworkParams, method: ClusteringMethod) -> Result<ClusteringEstimate> {
    params.validate()?;
    match method {
        ClusteringMethod::Quadrature { order } => Ok(ClusteringEstimate {
            phi: quadrature(params, order)?,
            se: None,
        }),
        ClusteringMethod::MonteCarlo { samples, seed } => {
            let mut r = rng::substream(seed, 0xC1, 0);
            clustering_factor_mc(params, samples, &mut r)
        }
    }
}
