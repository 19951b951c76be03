use serde::{Deserialize, Serialize};

/// First time a given informed fraction was reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionDelay {
    pub fraction: f64,
    /// `None` if the run never reached the fraction.
    pub seconds: Option<f64>,
}

/// Outcome of one simulated broadcast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub replicate: u64,
    /// Nodes eligible for the informed fraction.
    pub n: usize,
    pub informed: usize,
    pub informed_fraction: f64,
    pub total_transmissions: u64,
    pub total_receptions: u64,
    pub total_energy_uj: f64,
    /// `(time, informed count)`, starting with the source at time 0.
    pub informed_history: Vec<(f64, usize)>,
    pub delay_to_fraction: Vec<FractionDelay>,
    /// Energy spent when the coverage target was first met.
    pub energy_to_coverage: Option<f64>,
    pub percolated: bool,
    pub end_time: f64,
    /// True when the run was cut off by the time limit.
    pub truncated: bool,
}

impl SimResult {
    pub fn delay(&self, fraction: f64) -> Option<f64> {
        self.delay_to_fraction
            .iter()
            .find(|d| d.fraction == fraction)
            .and_then(|d| d.seconds)
    }
}

/// Bookkeeping shared by all engines.
#[derive(Debug, Clone)]
pub(crate) struct Tally {
    n: usize,
    informed: usize,
    transmissions: u64,
    receptions: u64,
    energy: f64,
    history: Vec<(f64, usize)>,
    delays: Vec<FractionDelay>,
    coverage_target: f64,
    energy_to_coverage: Option<f64>,
}

impl Tally {
    pub(crate) fn new(n: usize, fractions: &[f64], coverage_target: f64) -> Self {
        let mut t = Self {
            n,
            informed: 0,
            transmissions: 0,
            receptions: 0,
            energy: 0.0,
            history: Vec::new(),
            delays: fractions
                .iter()
                .map(|&fraction| FractionDelay { fraction, seconds: None })
                .collect(),
            coverage_target,
            energy_to_coverage: None,
        };
        t.inform(0.0);
        t
    }

    pub(crate) fn informed(&self) -> usize {
        self.informed
    }

    pub(crate) fn fraction(&self) -> f64 {
        self.informed as f64 / self.n as f64
    }

    pub(crate) fn covered(&self) -> bool {
        self.fraction() >= self.coverage_target
    }

    pub(crate) fn transmissions(&self) -> u64 {
        self.transmissions
    }

    pub(crate) fn inform(&mut self, t: f64) {
        self.informed += 1;
        match self.history.last_mut() {
            Some(last) if last.0 == t => last.1 = self.informed,
            _ => self.history.push((t, self.informed)),
        }
        let f = self.fraction();
        for d in &mut self.delays {
            if d.seconds.is_none() && f >= d.fraction {
                d.seconds = Some(t);
            }
        }
    }

    /// Charges one transmission heard by `receivers` nodes.
    pub(crate) fn transmit(&mut self, receivers: usize) {
        self.transmissions += 1;
        self.receptions += receivers as u64;
        self.energy += crate::analytics::TX_ENERGY_UJ
            + crate::analytics::RX_ENERGY_UJ * receivers as f64;
    }

    /// Records the coverage energy once the target is met. Call after all
    /// receptions of a transmission are charged.
    pub(crate) fn check_coverage(&mut self) {
        if self.energy_to_coverage.is_none() && self.covered() {
            self.energy_to_coverage = Some(self.energy);
        }
    }

    pub(crate) fn finish(
        self,
        replicate: u64,
        threshold: f64,
        end_time: f64,
        truncated: bool,
    ) -> SimResult {
        let informed_fraction = self.fraction();
        SimResult {
            replicate,
            n: self.n,
            informed: self.informed,
            informed_fraction,
            total_transmissions: self.transmissions,
            total_receptions: self.receptions,
            total_energy_uj: self.energy,
            informed_history: self.history,
            delay_to_fraction: self.delays,
            energy_to_coverage: self.energy_to_coverage,
            percolated: informed_fraction >= threshold,
            end_time,
            truncated,
        }
    }
}
