//! Network and scheme parameters shared by the simulator and the analysis.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::channel::ChannelModel;
use crate::error::{Error, Result};

/// Law of the random extra wait added to the sleep interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum TauLaw {
    Constant { value: f64 },
    Uniform { low: f64, high: f64 },
    Exponential { rate: f64 },
}

impl Default for TauLaw {
    fn default() -> Self {
        TauLaw::Constant { value: 0.0 }
    }
}

impl TauLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TauLaw::Constant { value } => value.is_finite() && value >= 0.0,
            TauLaw::Uniform { low, high } => {
                low.is_finite() && high.is_finite() && low >= 0.0 && high >= low
            }
            TauLaw::Exponential { rate } => rate.is_finite() && rate > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid tau_r law {self:?}")))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            TauLaw::Constant { value } => value,
            TauLaw::Uniform { low, high } => 0.5 * (low + high),
            TauLaw::Exponential { rate } => 1.0 / rate,
        }
    }

    /// Largest wait used by the network-size guard. The exponential law is
    /// unbounded; its 0.999 quantile stands in.
    pub fn practical_max(&self) -> f64 {
        match *self {
            TauLaw::Constant { value } => value,
            TauLaw::Uniform { high, .. } => high,
            TauLaw::Exponential { rate } => -(1e-3f64).ln() / rate,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, TauLaw::Constant { .. })
            || matches!(self, TauLaw::Uniform { low, high } if low == high)
    }

    /// Draws one wait. Constant laws consume no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            TauLaw::Constant { value } => value,
            TauLaw::Uniform { low, high } => {
                if high > low {
                    rng.random_range(low..high)
                } else {
                    low
                }
            }
            TauLaw::Exponential { rate } => Exp::new(rate).expect("rate validated").sample(rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    /// Sleep, wake, transmit; repeated `beta` times.
    Efficient,
    /// Ideal-discovery SIR with a fixed active period.
    Sir,
    /// Periodic rebroadcast, never recovers.
    Si,
}

/// What to do when the large-network assumption fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardMode {
    #[default]
    Refuse,
    Warn,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    /// Transmissions per informed node.
    pub beta: u32,
    pub tau_s: f64,
    pub tau_r: TauLaw,
    /// SIR only. `None` means `beta * (tau_s + E[tau_r])`, the time the
    /// efficient scheme keeps a node active.
    pub sir_active_period: Option<f64>,
    /// SI only. `None` means one rebroadcast per simulation step.
    pub si_interval: Option<f64>,
    pub percolation_threshold: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            kind: SchemeKind::Efficient,
            beta: 2,
            tau_s: 10.0,
            tau_r: TauLaw::default(),
            sir_active_period: None,
            si_interval: None,
            percolation_threshold: 0.10,
        }
    }
}

impl SchemeConfig {
    pub fn efficient(beta: u32, tau_s: f64) -> Self {
        Self {
            beta,
            tau_s,
            ..Self::default()
        }
    }

    /// Mean time between two transmissions of the same node.
    pub fn mean_interval(&self) -> f64 {
        self.tau_s + self.tau_r.mean()
    }

    pub fn active_period(&self) -> f64 {
        self.sir_active_period
            .unwrap_or(self.beta as f64 * self.mean_interval())
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta == 0 {
            return Err(Error::InvalidInput("beta must be at least 1".into()));
        }
        if !(self.tau_s.is_finite() && self.tau_s >= 0.0) {
            return Err(Error::InvalidInput(format!("tau_s must be >= 0, got {}", self.tau_s)));
        }
        self.tau_r.validate()?;
        if let Some(p) = self.sir_active_period {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidInput(format!("sir_active_period must be > 0, got {p}")));
            }
        }
        if let Some(p) = self.si_interval {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidInput(format!("si_interval must be > 0, got {p}")));
            }
        }
        let t = self.percolation_threshold;
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "percolation_threshold must lie in (0, 1], got {t}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// Node count.
    pub n: usize,
    /// Torus side, meters.
    pub side: f64,
    /// Node speed, m/s.
    pub speed: f64,
    pub channel: ChannelModel,
    pub scheme: SchemeConfig,
}

impl NetworkParams {
    /// Nodes per square meter.
    pub fn lambda(&self) -> f64 {
        self.n as f64 / (self.side * self.side)
    }

    /// Side length that gives `n` nodes at density `lambda`.
    pub fn side_for(n: usize, lambda: f64) -> f64 {
        (n as f64 / lambda).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 nodes, got {}", self.n)));
        }
        if !(self.side.is_finite() && self.side > 0.0) {
            return Err(Error::InvalidInput(format!("side must be > 0, got {}", self.side)));
        }
        if !(self.speed.is_finite() && self.speed >= 0.0) {
            return Err(Error::InvalidInput(format!("speed must be >= 0, got {}", self.speed)));
        }
        self.channel.validate()?;
        self.scheme.validate()
    }

    /// Distance a node can travel while still informing others. The analysis
    /// needs this to be well below the side length.
    pub fn travel_span(&self) -> f64 {
        let s = &self.scheme;
        s.beta as f64 * (s.tau_s + s.tau_r.practical_max()) * self.speed
    }

    /// `Some(reason)` when the network is too small for the bounds to apply.
    pub fn guard_violation(&self) -> Option<String> {
        let span = self.travel_span();
        (span >= self.side).then(|| {
            format!(
                "beta*(tau_s + max tau_r)*V = {span:.4} m is not small against the side \
                 L = {:.4} m; the large-network assumption fails",
                self.side
            )
        })
    }

    /// Validates and applies the guard according to `mode`. Returns the
    /// warning text when `mode` is [`GuardMode::Warn`] and the guard trips.
    pub fn check(&self, mode: GuardMode) -> Result<Option<String>> {
        self.validate()?;
        match (mode, self.guard_violation()) {
            (GuardMode::Refuse, Some(msg)) => Err(Error::Guard(msg)),
            (GuardMode::Warn, Some(msg)) => Ok(Some(msg)),
            _ => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(beta: u32, tau_s: f64) -> NetworkParams {
        NetworkParams {
            n: 1280,
            side: 800.0,
            speed: 10.0,
            channel: ChannelModel::udm(20.0),
            scheme: SchemeConfig::efficient(beta, tau_s),
        }
    }

    #[test]
    fn density() {
        assert!((params(2, 10.0).lambda() - 0.002).abs() < 1e-15);
        assert!((NetworkParams::side_for(1280, 0.002) - 800.0).abs() < 1e-9);
    }

    #[test]
    fn guard() {
        assert!(params(2, 10.0).guard_violation().is_none());
        let p = params(4, 60.0);
        assert!(p.guard_violation().is_some());
        assert!(matches!(p.check(GuardMode::Refuse), Err(Error::Guard(_))));
        assert!(p.check(GuardMode::Warn).unwrap().is_some());
        assert!(p.check(GuardMode::Off).unwrap().is_none());
    }

    #[test]
    fn tau_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = TauLaw::Uniform { low: 1.0, high: 3.0 };
        for _ in 0..1000 {
            let t = u.sample(&mut rng);
            assert!((1.0..3.0).contains(&t));
        }
        assert_eq!(u.mean(), 2.0);
        let e = TauLaw::Exponential { rate: 2.0 };
        let m: f64 = (0..50_000).map(|_| e.sample(&mut rng)).sum::<f64>() / 50_000.0;
        assert!((m - 0.5).abs() < 0.01);
        assert!(TauLaw::Uniform { low: 2.0, high: 1.0 }.validate().is_err());
        assert!(TauLaw::Uniform { low: 2.0, high: 2.0 }.is_constant());
    }

    #[test]
    fn rejects_bad_values() {
        let mut p = params(2, 10.0);
        p.scheme.beta = 0;
        assert!(p.validate().is_err());
        let mut p = params(2, 10.0);
        p.n = 1;
        assert!(p.validate().is_err());
        let mut p = params(2, 10.0);
        p.scheme.percolation_threshold = 0.0;
        assert!(p.validate().is_err());
    }
}
