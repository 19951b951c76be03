//! Tabular output: one summary row per parameter point, plus per-run rows.
//!
//! CSV floats are written with 6 significant digits; absent values are empty
//! fields. The header carries a schema version column so downstream scripts
//! can detect layout changes.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analytics::AnalyticReport;
use crate::channel::Fading;
use crate::error::Result;
use crate::params::{NetworkParams, SchemeKind, TauLaw};
use crate::simcore::SimResult;
use crate::stats::{estimate, proportion, Estimate};

pub const SCHEMA_VERSION: u32 = 1;

/// `%g`-style formatting with 6 significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig6).unwrap_or_default()
}

pub fn tau_law_label(law: &TauLaw) -> String {
    match *law {
        TauLaw::Constant { value } => format!("const:{}", format_sig6(value)),
        TauLaw::Uniform { low, high } => format!("uniform:{},{}", format_sig6(low), format_sig6(high)),
        TauLaw::Exponential { rate } => format!("exp:{}", format_sig6(rate)),
    }
}

pub fn kind_label(kind: SchemeKind) -> &'static str {
    match kind {
        SchemeKind::Efficient => "efficient",
        SchemeKind::Sir => "sir",
        SchemeKind::Si => "si",
    }
}

/// Parameter values, analytic bounds and simulated statistics for one grid
/// point. Simulated columns share units with their analytic counterparts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub axis: String,
    pub value: String,
    pub params: NetworkParams,
    pub runs: u64,
    pub seed: u64,
    pub analytic: Option<AnalyticReport>,
    pub delay_z: f64,
    pub percolation: Option<Estimate>,
    pub fraction: Option<Estimate>,
    /// Informed fraction over percolated runs only.
    pub percolated_fraction: Option<Estimate>,
    pub transmissions: Option<Estimate>,
    pub energy_uj: Option<Estimate>,
    /// Over runs that met the coverage target.
    pub coverage_energy_uj: Option<Estimate>,
    pub coverage_reached: Option<usize>,
    /// Time to `delay_z`, over runs that reached it.
    pub delay: Option<Estimate>,
    pub delay_reached: Option<usize>,
    /// Share of those runs whose delay is at least the analytic bound.
    pub delay_valid_fraction: Option<f64>,
    pub effective_degree: Option<Estimate>,
    pub truncated_runs: Option<usize>,
}

const HEADER: &[&str] = &[
    "schema_version",
    "axis",
    "value",
    "kind",
    "n",
    "side",
    "lambda",
    "speed",
    "eta",
    "sigma",
    "fading_m",
    "r0",
    "beta",
    "tau_s",
    "tau_r",
    "runs",
    "seed",
    "phi",
    "r0_bound",
    "r0_exact",
    "pc_bound",
    "z0_bound",
    "y",
    "y_sir",
    "ec_uj",
    "delay_z",
    "delay_bound",
    "perc_mean",
    "perc_se",
    "fraction_mean",
    "fraction_se",
    "perc_fraction_mean",
    "perc_fraction_se",
    "tx_mean",
    "tx_se",
    "energy_mean",
    "energy_se",
    "coverage_energy_mean",
    "coverage_energy_se",
    "coverage_reached",
    "delay_mean",
    "delay_se",
    "delay_reached",
    "delay_valid_fraction",
    "eff_degree_mean",
    "eff_degree_se",
    "truncated_runs",
];

impl ResultRow {
    /// A row with parameters only; fill in the statistics afterwards.
    pub fn new(axis: &str, value: &str, params: NetworkParams, runs: u64, seed: u64, delay_z: f64) -> Self {
        Self {
            axis: axis.into(),
            value: value.into(),
            params,
            runs,
            seed,
            analytic: None,
            delay_z,
            percolation: None,
            fraction: None,
            percolated_fraction: None,
            transmissions: None,
            energy_uj: None,
            coverage_energy_uj: None,
            coverage_reached: None,
            delay: None,
            delay_reached: None,
            delay_valid_fraction: None,
            effective_degree: None,
            truncated_runs: None,
        }
    }

    pub fn header() -> &'static [&'static str] {
        HEADER
    }

    /// Aggregates a batch of runs into the simulated columns.
    pub fn absorb(&mut self, results: &[SimResult]) {
        if results.is_empty() {
            return;
        }
        let col = |f: &dyn Fn(&SimResult) -> f64| estimate(&results.iter().map(f).collect::<Vec<_>>());
        let hits = results.iter().filter(|r| r.percolated).count();
        self.percolation = proportion(hits, results.len());
        self.fraction = col(&|r| r.informed_fraction);
        let perc: Vec<f64> = results
            .iter()
            .filter(|r| r.percolated)
            .map(|r| r.informed_fraction)
            .collect();
        self.percolated_fraction = estimate(&perc);
        self.transmissions = col(&|r| r.total_transmissions as f64);
        self.energy_uj = col(&|r| r.total_energy_uj);
        let cov: Vec<f64> = results.iter().filter_map(|r| r.energy_to_coverage).collect();
        self.coverage_reached = Some(cov.len());
        self.coverage_energy_uj = estimate(&cov);
        let delays: Vec<f64> = results.iter().filter_map(|r| r.delay(self.delay_z)).collect();
        self.delay_reached = Some(delays.len());
        self.delay = estimate(&delays);
        let bound = self.analytic.as_ref().and_then(|a| a.delay_bound(self.delay_z));
        self.delay_valid_fraction = match bound {
            Some(b) if !delays.is_empty() => {
                Some(delays.iter().filter(|&&d| d >= b).count() as f64 / delays.len() as f64)
            }
            _ => None,
        };
        self.truncated_runs = Some(results.iter().filter(|r| r.truncated).count());
    }

    pub fn record(&self) -> Vec<String> {
        let p = &self.params;
        let a = self.analytic.as_ref();
        let mean = |e: &Option<Estimate>| opt(e.map(|e| e.mean));
        let se = |e: &Option<Estimate>| opt(e.and_then(|e| e.se));
        let count = |c: Option<usize>| c.map(|c| c.to_string()).unwrap_or_default();
        vec![
            SCHEMA_VERSION.to_string(),
            self.axis.clone(),
            self.value.clone(),
            kind_label(p.scheme.kind).into(),
            p.n.to_string(),
            format_sig6(p.side),
            format_sig6(p.lambda()),
            format_sig6(p.speed),
            format_sig6(p.channel.eta),
            format_sig6(p.channel.sigma),
            match p.channel.fading {
                Fading::None => String::new(),
                Fading::Nakagami { m } => format_sig6(m),
            },
            format_sig6(p.channel.r0),
            p.scheme.beta.to_string(),
            format_sig6(p.scheme.tau_s),
            tau_law_label(&p.scheme.tau_r),
            self.runs.to_string(),
            self.seed.to_string(),
            opt(a.map(|a| a.phi)),
            opt(a.map(|a| a.r0_bound)),
            a.map(|a| a.r0_exact.to_string()).unwrap_or_default(),
            opt(a.map(|a| a.pc_bound)),
            opt(a.map(|a| a.z0_bound)),
            opt(a.map(|a| a.y)),
            opt(a.and_then(|a| a.y_sir)),
            opt(a.map(|a| a.ec_uj)),
            format_sig6(self.delay_z),
            opt(a.and_then(|a| a.delay_bound(self.delay_z))),
            mean(&self.percolation),
            se(&self.percolation),
            mean(&self.fraction),
            se(&self.fraction),
            mean(&self.percolated_fraction),
            se(&self.percolated_fraction),
            mean(&self.transmissions),
            se(&self.transmissions),
            mean(&self.energy_uj),
            se(&self.energy_uj),
            mean(&self.coverage_energy_uj),
            se(&self.coverage_energy_uj),
            count(self.coverage_reached),
            mean(&self.delay),
            se(&self.delay),
            count(self.delay_reached),
            opt(self.delay_valid_fraction),
            mean(&self.effective_degree),
            se(&self.effective_degree),
            count(self.truncated_runs),
        ]
    }
}

/// Writes summary rows as CSV.
pub fn write_rows_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.record()).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

const RUN_HEADER: &[&str] = &[
    "schema_version",
    "point",
    "replicate",
    "n",
    "informed",
    "informed_fraction",
    "transmissions",
    "receptions",
    "energy_uj",
    "energy_to_coverage",
    "percolated",
    "end_time",
    "truncated",
];

/// Writes one CSV row per run; `point` indexes the grid point.
pub fn write_runs_csv<W: Write>(runs: &[(usize, SimResult)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUN_HEADER).map_err(csv_err)?;
    for (point, r) in runs {
        w.write_record([
            SCHEMA_VERSION.to_string(),
            point.to_string(),
            r.replicate.to_string(),
            r.n.to_string(),
            r.informed.to_string(),
            format_sig6(r.informed_fraction),
            r.total_transmissions.to_string(),
            r.total_receptions.to_string(),
            format_sig6(r.total_energy_uj),
            opt(r.energy_to_coverage),
            r.percolated.to_string(),
            format_sig6(r.end_time),
            r.truncated.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Io(std::io::Error::other(e.to_string()))
}
