//! Flat `key = value` experiment configuration with dotted keys.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use epibroadcast::analytics::ClusteringMethod;
use epibroadcast::simcore::SimOptions;
use epibroadcast::trace::BoundingBox;
use epibroadcast::{ChannelModel, Error, Fading, GuardMode, NetworkParams, Result, SchemeConfig, SchemeKind, TauLaw};

/// Every key the configuration understands, with its default (empty when
/// there is none).
pub const KEYS: &[(&str, &str)] = &[
    ("network.n", ""),
    ("network.side", ""),
    ("network.lambda", ""),
    ("network.speed", "10"),
    ("channel.eta", "4"),
    ("channel.sigma", "0"),
    ("channel.fading", "none"),
    ("channel.r0", "20"),
    ("scheme.kind", "efficient"),
    ("scheme.beta", "2"),
    ("scheme.tau_s", "10"),
    ("scheme.tau_r", "const:0"),
    ("scheme.sir_active_period", ""),
    ("scheme.si_interval", ""),
    ("scheme.percolation_threshold", "0.1"),
    ("sim.dt", "0.1"),
    ("sim.max_time", ""),
    ("sim.fractions", "0.1,0.5,0.9,0.99"),
    ("sim.coverage_target", "0.99"),
    ("sim.guard", "refuse"),
    ("sim.degree_trials", "0"),
    ("analysis.delay_z", "0.5"),
    ("analysis.quadrature_order", "32"),
    ("analysis.clustering", "quadrature"),
    ("analysis.mc_samples", "200000"),
    ("run.count", "10"),
    ("run.seed", "1"),
    ("output.path", ""),
    ("output.format", "csv"),
    ("sweep.axis", ""),
    ("sweep.values", ""),
    ("sweep.jitter_mean", "2"),
    ("trace.dir", ""),
    ("trace.ref_lat", ""),
    ("trace.ref_lon", ""),
    ("trace.bbox", ""),
    ("trace.t_start", ""),
];

/// Pseudo-axis for the interval-jitter experiment: the value is the
/// half-width of a uniform interval centred on `sweep.jitter_mean`.
pub const JITTER_AXIS: &str = "scheme.jitter";

/// Raw key/value pairs, later entries overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value, got {line:?}", lineno + 1))
            })?;
            raw.values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies one `KEY=VALUE` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {pair:?}")))?;
        self.set(k.trim(), v.trim());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn unset(&mut self, key: &str) {
        self.values.remove(key);
    }

    /// Errors listing every key that is not recognised.
    pub fn check_keys(&self) -> Result<()> {
        let unknown: Vec<&str> = self
            .values
            .keys()
            .map(String::as_str)
            .filter(|k| !known(k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!("unknown configuration keys: {}", unknown.join(", "))))
        }
    }

    /// Explicit value or default; `None` if neither is set.
    pub fn get(&self, key: &str) -> Option<&str> {
        debug_assert!(known(key), "unregistered key {key}");
        let v = self
            .values
            .get(key)
            .map(String::as_str)
            .or_else(|| KEYS.iter().find(|(k, _)| *k == key).map(|(_, d)| *d))?;
        (!v.is_empty()).then_some(v)
    }

    pub fn is_set(&self, key: &str) -> bool {
        self.values.get(key).is_some_and(|v| !v.is_empty())
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Config(format!("missing required key {key}")))
    }

    fn num(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_f64(key, v)).transpose()
    }

    fn num_or(&self, key: &str) -> Result<f64> {
        Ok(self.num(key)?.expect("key has a default"))
    }

    fn int(&self, key: &str) -> Result<u64> {
        let v = self.get(key).expect("key has a default");
        v.parse()
            .map_err(|_| Error::Config(format!("{key}: expected a non-negative integer, got {v:?}")))
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Config(format!("{key}: expected a number, got {v:?}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| parse_f64(key, s.trim())).collect()
}

/// Splits a sweep grid. Values containing commas (interval laws) must be
/// separated by `;`.
pub fn split_values(v: &str) -> Vec<String> {
    let sep = if v.contains(';') { ';' } else { ',' };
    v.split(sep)
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

pub fn parse_tau_law(key: &str, v: &str) -> Result<TauLaw> {
    let bad = || Error::Config(format!("{key}: expected const:X, uniform:A,B or exp:R, got {v:?}"));
    let law = match v.split_once(':') {
        None => TauLaw::Constant { value: parse_f64(key, v)? },
        Some(("const", x)) => TauLaw::Constant { value: parse_f64(key, x)? },
        Some(("uniform", ab)) => {
            let (a, b) = ab.split_once(',').ok_or_else(bad)?;
            TauLaw::Uniform {
                low: parse_f64(key, a.trim())?,
                high: parse_f64(key, b.trim())?,
            }
        }
        Some(("exp", r)) => TauLaw::Exponential { rate: parse_f64(key, r)? },
        _ => return Err(bad()),
    };
    law.validate().map_err(|e| Error::Config(format!("{key}: {e}")))?;
    Ok(law)
}

fn parse_fading(v: &str) -> Result<Fading> {
    match v {
        "none" => Ok(Fading::None),
        "rayleigh" => Ok(Fading::Nakagami { m: 1.0 }),
        m => Ok(Fading::Nakagami {
            m: parse_f64("channel.fading", m)?,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceConfig {
    pub dir: PathBuf,
    pub ref_lat: f64,
    pub ref_lon: f64,
    pub bbox: BoundingBox,
    pub t_start: Vec<f64>,
}

/// A fully validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: NetworkParams,
    pub options: SimOptions,
    pub runs: u64,
    pub seed: u64,
    pub delay_z: f64,
    pub clustering: ClusteringMethod,
    pub degree_trials: u64,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
}

fn config_err(e: Error) -> Error {
    match e {
        Error::InvalidInput(m) => Error::Config(m),
        other => other,
    }
}

fn network(raw: &RawConfig, channel: ChannelModel, scheme: SchemeConfig) -> Result<NetworkParams> {
    let n = raw.num("network.n")?;
    let side = raw.num("network.side")?;
    let lambda = raw.num("network.lambda")?;
    let as_count = |x: f64| -> Result<usize> {
        if x >= 0.0 && x.fract() == 0.0 {
            Ok(x as usize)
        } else {
            Err(Error::Config(format!("network.n must be a whole number, got {x}")))
        }
    };
    let (n, side) = match (n, side, lambda) {
        (Some(n), Some(side), Some(l)) => {
            let n = as_count(n)?;
            let implied = n as f64 / (side * side);
            if (implied - l).abs() > 1e-9 * l.max(implied) {
                return Err(Error::Config(format!(
                    "network.n, network.side and network.lambda disagree (N/L^2 = {implied})"
                )));
            }
            (n, side)
        }
        (Some(n), None, Some(l)) => {
            let n = as_count(n)?;
            (n, NetworkParams::side_for(n, l))
        }
        (None, Some(side), Some(l)) => ((l * side * side).round() as usize, side),
        (None, None, Some(l)) => (1280, NetworkParams::side_for(1280, l)),
        (n, side, None) => (as_count(n.unwrap_or(1280.0))?, side.unwrap_or(800.0)),
    };
    let params = NetworkParams {
        n,
        side,
        speed: raw.num_or("network.speed")?,
        channel,
        scheme,
    };
    params.validate().map_err(config_err)?;
    Ok(params)
}

impl ExperimentConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        raw.check_keys()?;
        let channel = ChannelModel::new(
            raw.num_or("channel.eta")?,
            raw.num_or("channel.sigma")?,
            parse_fading(raw.require("channel.fading")?)?,
            raw.num_or("channel.r0")?,
        )
        .map_err(config_err)?;

        let kind = match raw.require("scheme.kind")? {
            "efficient" => SchemeKind::Efficient,
            "sir" => SchemeKind::Sir,
            "si" => SchemeKind::Si,
            other => return Err(Error::Config(format!("scheme.kind: unknown scheme {other:?}"))),
        };
        let beta = raw.int("scheme.beta")?;
        let scheme = SchemeConfig {
            kind,
            beta: u32::try_from(beta).map_err(|_| Error::Config("scheme.beta too large".into()))?,
            tau_s: raw.num_or("scheme.tau_s")?,
            tau_r: parse_tau_law("scheme.tau_r", raw.require("scheme.tau_r")?)?,
            sir_active_period: raw.num("scheme.sir_active_period")?,
            si_interval: raw.num("scheme.si_interval")?,
            percolation_threshold: raw.num_or("scheme.percolation_threshold")?,
        };
        let params = network(raw, channel, scheme)?;

        let guard = match raw.require("sim.guard")? {
            "refuse" => GuardMode::Refuse,
            "warn" => GuardMode::Warn,
            "off" => GuardMode::Off,
            other => return Err(Error::Config(format!("sim.guard: expected refuse, warn or off, got {other:?}"))),
        };
        let fractions = parse_list("sim.fractions", raw.require("sim.fractions")?)?;
        let delay_z = raw.num_or("analysis.delay_z")?;
        if !(delay_z > 0.0 && delay_z < 1.0) {
            return Err(Error::Config(format!("analysis.delay_z must lie in (0, 1), got {delay_z}")));
        }
        let mut fractions = fractions;
        if !fractions.contains(&delay_z) {
            fractions.push(delay_z);
        }
        let options = SimOptions {
            dt: raw.num_or("sim.dt")?,
            max_time: raw.num("sim.max_time")?,
            fractions,
            coverage_target: raw.num_or("sim.coverage_target")?,
            guard,
        };
        if !(options.dt > 0.0) {
            return Err(Error::Config(format!("sim.dt must be > 0, got {}", options.dt)));
        }

        let seed = raw.int("run.seed")?;
        let clustering = match raw.require("analysis.clustering")? {
            "quadrature" => ClusteringMethod::Quadrature {
                order: raw.int("analysis.quadrature_order")? as usize,
            },
            "montecarlo" => ClusteringMethod::MonteCarlo {
                samples: raw.int("analysis.mc_samples")?,
                seed,
            },
            other => {
                return Err(Error::Config(format!(
                    "analysis.clustering: expected quadrature or montecarlo, got {other:?}"
                )))
            }
        };
        let runs = raw.int("run.count")?;
        if runs == 0 {
            return Err(Error::Config("run.count must be at least 1".into()));
        }
        let format = match raw.require("output.format")? {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => return Err(Error::Config(format!("output.format: expected csv or json, got {other:?}"))),
        };
        Ok(Self {
            params,
            options,
            runs,
            seed,
            delay_z,
            clustering,
            degree_trials: raw.int("sim.degree_trials")?,
            output_path: raw.get("output.path").map(PathBuf::from),
            format,
        })
    }
}

impl SweepSpec {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let axis = raw.require("sweep.axis")?.to_string();
        if axis != JITTER_AXIS && (!known(&axis) || axis.starts_with("sweep.") || axis.starts_with("output.")) {
            return Err(Error::Config(format!("sweep.axis: unknown parameter {axis:?}")));
        }
        let values = split_values(raw.require("sweep.values")?);
        if values.is_empty() {
            return Err(Error::Config("sweep.values: empty grid".into()));
        }
        Ok(Self { axis, values })
    }

    /// The raw configuration for grid point `value`.
    pub fn apply(&self, raw: &RawConfig, value: &str) -> Result<RawConfig> {
        let mut point = raw.clone();
        if self.axis == JITTER_AXIS {
            let half = parse_f64(JITTER_AXIS, value)?;
            let mean = raw.num_or("sweep.jitter_mean")?;
            if !(half >= 0.0 && half <= mean) {
                return Err(Error::Config(format!(
                    "jitter half-width must lie in [0, {mean}], got {half}"
                )));
            }
            point.set("scheme.tau_s", &(mean - half).to_string());
            let law = if half == 0.0 {
                "const:0".to_string()
            } else {
                format!("uniform:0,{}", 2.0 * half)
            };
            point.set("scheme.tau_r", &law);
        } else {
            point.set(&self.axis, value);
        }
        Ok(point)
    }
}

impl TraceConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let dir = PathBuf::from(raw.require("trace.dir")?);
        let ref_lat = parse_f64("trace.ref_lat", raw.require("trace.ref_lat")?)?;
        let ref_lon = parse_f64("trace.ref_lon", raw.require("trace.ref_lon")?)?;
        let b = parse_list("trace.bbox", raw.require("trace.bbox")?)?;
        if b.len() != 4 {
            return Err(Error::Config("trace.bbox: expected lat0,lon0,lat1,lon1".into()));
        }
        let t_start = parse_list("trace.t_start", raw.require("trace.t_start")?)?;
        Ok(Self {
            dir,
            ref_lat,
            ref_lon,
            bbox: BoundingBox {
                lat0: b[0],
                lon0: b[1],
                lat1: b[2],
                lon1: b[3],
            },
            t_start,
        })
    }
}
