use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use epibroadcast::analytics::analyze;
use epibroadcast::report::{write_rows_csv, write_runs_csv, ResultRow, SCHEMA_VERSION};
use epibroadcast::simcore::{measure_effective_degree, run_batch, SimResult};
use epibroadcast::trace::{load_trace_dir, present_at, project_equirectangular, run_trace_broadcast, Projection};
use epibroadcast::{Error, GuardMode, NetworkParams, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, OutputFormat, RawConfig, SweepSpec, TraceConfig};

/// Rows and raw runs produced by one command.
#[derive(Debug, Default, Serialize)]
pub struct Outcome {
    pub schema_version: u32,
    pub command: String,
    pub rows: Vec<ResultRow>,
    pub runs: Vec<RunRecord>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub point: usize,
    pub result: SimResult,
}

impl Outcome {
    fn new(command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            ..Default::default()
        }
    }

    fn push(&mut self, row: ResultRow, results: Vec<SimResult>) {
        let point = self.rows.len();
        self.rows.push(row);
        self.runs
            .extend(results.into_iter().map(|result| RunRecord { point, result }));
    }

    fn warn(&mut self, msg: String) {
        if !self.warnings.contains(&msg) {
            self.warnings.push(msg);
        }
    }

    /// Writes the outcome to `path` (stdout when `None`). CSV output also
    /// writes per-run rows to `<stem>_runs.csv` next to a file target.
    pub fn write(&self, format: OutputFormat, path: Option<&Path>) -> Result<()> {
        match path {
            None => self.write_to(format, io::stdout().lock()),
            Some(p) => {
                self.write_to(format, BufWriter::new(File::create(p)?))?;
                if format == OutputFormat::Csv && !self.runs.is_empty() {
                    let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
                    let runs_path = p.with_file_name(format!("{stem}_runs.csv"));
                    let runs: Vec<(usize, SimResult)> =
                        self.runs.iter().map(|r| (r.point, r.result.clone())).collect();
                    write_runs_csv(&runs, BufWriter::new(File::create(runs_path)?))?;
                }
                Ok(())
            }
        }
    }

    fn write_to<W: Write>(&self, format: OutputFormat, mut out: W) -> Result<()> {
        match format {
            OutputFormat::Csv => write_rows_csv(&self.rows, out),
            OutputFormat::Json => {
                serde_json::to_writer_pretty(&mut out, self)
                    .map_err(|e| Error::Io(io::Error::other(e)))?;
                writeln!(out)?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

fn analytic_row(cfg: &ExperimentConfig, axis: &str, value: &str) -> Result<ResultRow> {
    let mut row = ResultRow::new(axis, value, cfg.params, cfg.runs, cfg.seed, cfg.delay_z);
    row.analytic = Some(analyze(&cfg.params, cfg.clustering, &cfg.options.fractions)?);
    Ok(row)
}

fn check_guard(params: &NetworkParams, mode: GuardMode, out: &mut Outcome) -> Result<()> {
    if let Some(msg) = params.check(mode)? {
        out.warn(msg);
    }
    Ok(())
}

fn simulate_point(cfg: &ExperimentConfig, axis: &str, value: &str, out: &mut Outcome) -> Result<()> {
    check_guard(&cfg.params, cfg.options.guard, out)?;
    let mut row = analytic_row(cfg, axis, value)?;
    if let Some(a) = &row.analytic {
        for w in &a.warnings {
            out.warn(w.clone());
        }
    }
    let results = run_batch(&cfg.params, cfg.runs, cfg.seed, &cfg.options)?;
    row.absorb(&results);
    if cfg.degree_trials > 0 {
        row.effective_degree = Some(measure_effective_degree(&cfg.params, cfg.degree_trials, cfg.seed)?);
    }
    out.push(row, results);
    Ok(())
}

pub fn analyze_cmd(raw: &RawConfig) -> Result<(Outcome, ExperimentConfig)> {
    let cfg = ExperimentConfig::from_raw(raw)?;
    let mut out = Outcome::new("analyze");
    if let Some(msg) = cfg.params.guard_violation() {
        out.warn(msg);
    }
    let row = analytic_row(&cfg, "", "")?;
    for w in &row.analytic.as_ref().expect("analytic row").warnings {
        out.warn(w.clone());
    }
    out.rows.push(row);
    Ok((out, cfg))
}

pub fn simulate_cmd(raw: &RawConfig) -> Result<(Outcome, ExperimentConfig)> {
    let cfg = ExperimentConfig::from_raw(raw)?;
    let mut out = Outcome::new("simulate");
    simulate_point(&cfg, "", "", &mut out)?;
    Ok((out, cfg))
}

pub fn sweep_cmd(raw: &RawConfig) -> Result<(Outcome, ExperimentConfig)> {
    let base = ExperimentConfig::from_raw(raw)?;
    let spec = SweepSpec::from_raw(raw)?;
    // Validate the whole grid before spending any simulation time.
    let points = spec
        .values
        .iter()
        .map(|v| Ok((v.as_str(), ExperimentConfig::from_raw(&spec.apply(raw, v)?)?)))
        .collect::<Result<Vec<_>>>()?;
    for (_, cfg) in &points {
        cfg.params.check(cfg.options.guard)?;
    }
    let mut out = Outcome::new("sweep");
    for (value, cfg) in &points {
        simulate_point(cfg, &spec.axis, value, &mut out)?;
    }
    Ok((out, base))
}

pub fn trace_cmd(raw: &RawConfig) -> Result<(Outcome, ExperimentConfig)> {
    let base = ExperimentConfig::from_raw(raw)?;
    let tc = TraceConfig::from_raw(raw)?;
    let spec = if raw.is_set("sweep.axis") {
        Some(SweepSpec::from_raw(raw)?)
    } else {
        None
    };
    let set = load_trace_dir(&tc.dir)?;
    let mut out = Outcome::new("trace");
    if set.skipped_files > 0 || set.skipped_records > 0 {
        out.warn(format!(
            "skipped {} files and {} records while loading {}",
            set.skipped_files,
            set.skipped_records,
            tc.dir.display()
        ));
    }
    let planar: Vec<_> = set
        .tracks
        .iter()
        .map(|t| project_equirectangular(t, tc.ref_lat, tc.ref_lon))
        .collect();
    let region = tc.bbox.project(&Projection::new(tc.ref_lat, tc.ref_lon));
    let area = (region.x_max - region.x_min) * (region.y_max - region.y_min);

    let grid: Vec<(String, String, ExperimentConfig)> = match &spec {
        None => vec![(String::new(), String::new(), base.clone())],
        Some(s) => s
            .values
            .iter()
            .map(|v| Ok((s.axis.clone(), v.clone(), ExperimentConfig::from_raw(&s.apply(raw, v)?)?)))
            .collect::<Result<_>>()?,
    };
    for (axis, value, cfg) in &grid {
        for &t0 in &tc.t_start {
            let present = present_at(&planar, &region, t0).len();
            if present == 0 {
                return Err(Error::Ingestion(format!(
                    "no cab inside the bounding box at t_start = {t0}"
                )));
            }
            let results = (0..cfg.runs)
                .into_par_iter()
                .map(|rep| {
                    run_trace_broadcast(
                        &planar,
                        &region,
                        &cfg.params.channel,
                        &cfg.params.scheme,
                        t0,
                        cfg.seed,
                        rep,
                        &cfg.options,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            // The grid point is described by the cabs present at t_start
            // spread over the bounding box.
            let params = NetworkParams {
                n: present,
                side: area.sqrt(),
                speed: 0.0,
                ..cfg.params
            };
            let label = if axis.is_empty() {
                ("trace.t_start".to_string(), t0.to_string())
            } else {
                (format!("{axis}@{t0}"), value.clone())
            };
            let mut row = ResultRow::new(&label.0, &label.1, params, cfg.runs, cfg.seed, cfg.delay_z);
            row.absorb(&results);
            out.push(row, results);
        }
    }
    Ok((out, base))
}
