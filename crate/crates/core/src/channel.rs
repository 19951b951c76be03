//! The general connection model: log-normal shadowing with optional
//! Nakagami-m fading on top of distance path loss.
//!
//! Every link draw is a pair `(z, omega)`: the shadowing offset in dB and the
//! fading power factor. Given a draw, a transmitter reaches exactly the
//! receivers inside the disk of radius
//! `r0 * omega^(1/eta) * exp(z ln10 / (10 eta))`.

use std::f64::consts::LN_10;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Small-scale fading law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fading {
    None,
    /// Nakagami-m; the power factor is Gamma(shape m, mean 1).
    Nakagami { m: f64 },
}

impl Fading {
    pub fn shape(&self) -> Option<f64> {
        match self {
            Fading::None => None,
            Fading::Nakagami { m } => Some(*m),
        }
    }
}

/// Channel parameters. The transmit power, receiver threshold and path-loss
/// constant only ever enter through the reference range `r0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    /// Path-loss exponent.
    pub eta: f64,
    /// Shadowing standard deviation in dB.
    pub sigma: f64,
    pub fading: Fading,
    /// Radio range under the unit disk model, meters.
    pub r0: f64,
}

impl ChannelModel {
    pub fn new(eta: f64, sigma: f64, fading: Fading, r0: f64) -> Result<Self> {
        let model = Self {
            eta,
            sigma,
            fading,
            r0,
        };
        model.validate()?;
        Ok(model)
    }

    /// Unit disk model: no shadowing, no fading.
    pub fn udm(r0: f64) -> Self {
        Self {
            eta: 2.0,
            sigma: 0.0,
            fading: Fading::None,
            r0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::InvalidInput(format!("eta must be > 0, got {}", self.eta)));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::InvalidInput(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if !(self.r0.is_finite() && self.r0 > 0.0) {
            return Err(Error::InvalidInput(format!("r0 must be > 0, got {}", self.r0)));
        }
        if let Fading::Nakagami { m } = self.fading {
            if !(m.is_finite() && m >= 0.5) {
                return Err(Error::InvalidInput(format!(
                    "Nakagami shape must be >= 0.5, got {m}"
                )));
            }
        }
        Ok(())
    }

    /// True when every link has radius exactly `r0`.
    pub fn is_udm(&self) -> bool {
        self.sigma == 0.0 && self.fading == Fading::None
    }
}

/// Channel factors for one transmitter-receiver-transmission triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelDraw {
    /// Shadowing offset, dB.
    pub z: f64,
    /// Fading power factor.
    pub omega: f64,
}

impl ChannelDraw {
    /// The draw under the unit disk model.
    pub const NEUTRAL: ChannelDraw = ChannelDraw { z: 0.0, omega: 1.0 };
}

/// Zero-mean Gaussian shadowing offset. With `sigma == 0` returns exactly 0
/// without consuming randomness.
pub fn sample_shadowing<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma)
        .expect("sigma validated non-negative and finite")
        .sample(rng)
}

/// Fading power factor: Gamma(m, 1/m) for Nakagami-m, exactly 1 otherwise.
pub fn sample_fading<R: Rng + ?Sized>(rng: &mut R, fading: Fading) -> f64 {
    match fading {
        Fading::None => 1.0,
        Fading::Nakagami { m } => Gamma::new(m, 1.0 / m)
            .expect("Nakagami shape validated")
            .sample(rng),
    }
}

/// Radio range conditional on the channel factors.
pub fn radio_range(model: &ChannelModel, draw: ChannelDraw) -> f64 {
    model.r0 * draw.omega.powf(1.0 / model.eta) * (draw.z * LN_10 / (10.0 * model.eta)).exp()
}

/// Samples a fresh draw and reports whether a receiver at `distance` hears
/// the transmission.
pub fn is_connected<R: Rng + ?Sized>(model: &ChannelModel, rng: &mut R, distance: f64) -> bool {
    let draw = ChannelDraw {
        z: sample_shadowing(rng, model.sigma),
        omega: sample_fading(rng, model.fading),
    };
    distance <= radio_range(model, draw)
}

/// Pre-built samplers for repeated link draws on a hot path. Produces the
/// same stream of draws as [`sample_shadowing`] followed by [`sample_fading`].
#[derive(Debug, Clone)]
pub struct LinkSampler {
    model: ChannelModel,
    normal: Option<Normal<f64>>,
    gamma: Option<Gamma<f64>>,
    r0_sq: f64,
    // ln(r_N^2 / r0^2) = z * shadow_coef + ln(omega) * fade_coef
    shadow_coef: f64,
    fade_coef: f64,
}

impl LinkSampler {
    pub fn new(model: ChannelModel) -> Self {
        let normal = (model.sigma > 0.0).then(|| Normal::new(0.0, model.sigma).unwrap());
        let gamma = model.fading.shape().map(|m| Gamma::new(m, 1.0 / m).unwrap());
        Self {
            model,
            normal,
            gamma,
            r0_sq: model.r0 * model.r0,
            shadow_coef: LN_10 / (5.0 * model.eta),
            fade_coef: 2.0 / model.eta,
        }
    }

    pub fn model(&self) -> &ChannelModel {
        &self.model
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelDraw {
        let z = self.normal.map_or(0.0, |n| n.sample(rng));
        let omega = self.gamma.map_or(1.0, |g| g.sample(rng));
        ChannelDraw { z, omega }
    }

    /// Samples a draw and compares against a squared distance.
    #[inline]
    pub fn connected_sq<R: Rng + ?Sized>(&self, rng: &mut R, dist_sq: f64) -> bool {
        if self.normal.is_none() && self.gamma.is_none() {
            return dist_sq <= self.r0_sq;
        }
        let draw = self.draw(rng);
        let mut log_gain = draw.z * self.shadow_coef;
        if self.gamma.is_some() {
            if draw.omega <= 0.0 {
                return dist_sq == 0.0;
            }
            log_gain += draw.omega.ln() * self.fade_coef;
        }
        dist_sq <= self.r0_sq * log_gain.exp()
    }

    /// Squared radio range for a fresh draw.
    pub fn range_sq<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let r = radio_range(&self.model, self.draw(rng));
        r * r
    }
}
