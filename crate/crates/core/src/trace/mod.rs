//! GPS trace ingestion and trace-driven broadcast replay.
//!
//! Input files hold one record per line, `lat lon flag epoch`, as in the
//! public San Francisco cab traces. Files may be newest-first or oldest-first.

use std::collections::BinaryHeap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelModel, LinkSampler};
use crate::error::{Error, Result};
use crate::params::SchemeConfig;
use crate::rng::{self, SimRng};
use crate::simcore::{SimOptions, SimResult};
use crate::simcore::{Event, Tally};

/// Mean Earth radius, meters.
pub const EARTH_RADIUS: f64 = 6_371_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    /// Unix seconds.
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceTrack {
    pub vehicle_id: String,
    /// Strictly increasing in `t`.
    pub samples: Vec<TraceSample>,
}

/// A parsed file and the number of records that could not be read.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTrack {
    pub track: TraceTrack,
    pub skipped: usize,
}

fn parse_record(line: &str) -> Option<TraceSample> {
    let mut fields = line.split_whitespace();
    let lat: f64 = fields.next()?.parse().ok()?;
    let lon: f64 = fields.next()?.parse().ok()?;
    let _flag = fields.next()?;
    let t: f64 = fields.next()?.parse().ok()?;
    if fields.next().is_some() {
        return None;
    }
    let valid = lat.is_finite()
        && lon.is_finite()
        && t.is_finite()
        && (-90.0..=90.0).contains(&lat)
        && (-180.0..=180.0).contains(&lon);
    valid.then_some(TraceSample { t, lat, lon })
}

/// Parses one vehicle's file. Malformed lines are skipped and counted;
/// records are sorted by time and repeated timestamps keep the first record
/// in file order.
pub fn parse_trace_file(vehicle_id: &str, text: &str) -> Result<ParsedTrack> {
    let mut skipped = 0;
    let mut samples = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(line) {
            Some(s) => samples.push(s),
            None => skipped += 1,
        }
    }
    samples.sort_by(|a, b| a.t.total_cmp(&b.t));
    samples.dedup_by(|later, first| later.t == first.t);
    if samples.is_empty() {
        return Err(Error::Ingestion(format!("{vehicle_id}: no usable records")));
    }
    Ok(ParsedTrack {
        track: TraceTrack {
            vehicle_id: vehicle_id.to_string(),
            samples,
        },
        skipped,
    })
}

/// Vehicle id from a file name: the stem without a leading `new_`.
pub fn vehicle_id_from_path(path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    stem.strip_prefix("new_").map(str::to_string).unwrap_or(stem)
}

/// Everything read from a trace directory.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    pub tracks: Vec<TraceTrack>,
    pub skipped_records: usize,
    /// Files with fewer than two usable samples.
    pub skipped_files: usize,
}

/// Loads every regular, non-hidden file in `dir`, in file-name order.
pub fn load_trace_dir(dir: &Path) -> Result<TraceSet> {
    let entries = fs::read_dir(dir)
        .map_err(|e| Error::Ingestion(format!("cannot read trace directory {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let entry = entry?;
        let path = entry.path();
        let hidden = path
            .file_name()
            .is_some_and(|n| n.to_string_lossy().starts_with('.'));
        if entry.file_type()?.is_file() && !hidden {
            paths.push(path);
        }
    }
    paths.sort();
    let parsed: Vec<Result<ParsedTrack>> = paths
        .par_iter()
        .map(|p| {
            let bytes = fs::read(p)?;
            parse_trace_file(&vehicle_id_from_path(p), &String::from_utf8_lossy(&bytes))
        })
        .collect();
    let mut set = TraceSet {
        tracks: Vec::new(),
        skipped_records: 0,
        skipped_files: 0,
    };
    for p in parsed {
        match p {
            Ok(p) if p.track.samples.len() >= 2 => {
                set.skipped_records += p.skipped;
                set.tracks.push(p.track);
            }
            Ok(p) => {
                set.skipped_records += p.skipped;
                set.skipped_files += 1;
            }
            Err(Error::Ingestion(_)) => set.skipped_files += 1,
            Err(e) => return Err(e),
        }
    }
    if set.tracks.is_empty() {
        return Err(Error::Ingestion(format!("no usable tracks in {}", dir.display())));
    }
    Ok(set)
}

/// Equirectangular projection about a reference point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub ref_lat: f64,
    pub ref_lon: f64,
}

impl Projection {
    pub fn new(ref_lat: f64, ref_lon: f64) -> Self {
        Self { ref_lat, ref_lon }
    }

    pub fn forward(&self, lat: f64, lon: f64) -> (f64, f64) {
        let x = EARTH_RADIUS * self.ref_lat.to_radians().cos() * (lon - self.ref_lon).to_radians();
        let y = EARTH_RADIUS * (lat - self.ref_lat).to_radians();
        (x, y)
    }

    pub fn inverse(&self, x: f64, y: f64) -> (f64, f64) {
        let lat = self.ref_lat + (y / EARTH_RADIUS).to_degrees();
        let lon = self.ref_lon + (x / (EARTH_RADIUS * self.ref_lat.to_radians().cos())).to_degrees();
        (lat, lon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarTrack {
    pub vehicle_id: String,
    pub samples: Vec<PlanarSample>,
}

pub fn project_equirectangular(track: &TraceTrack, ref_lat: f64, ref_lon: f64) -> PlanarTrack {
    let proj = Projection::new(ref_lat, ref_lon);
    PlanarTrack {
        vehicle_id: track.vehicle_id.clone(),
        samples: track
            .samples
            .iter()
            .map(|s| {
                let (x, y) = proj.forward(s.lat, s.lon);
                PlanarSample { t: s.t, x, y }
            })
            .collect(),
    }
}

/// Linearly interpolated position, `None` outside the track's time span.
pub fn position_at(track: &PlanarTrack, t: f64) -> Option<(f64, f64)> {
    let s = &track.samples;
    let first = s.first()?;
    let last = s.last()?;
    if !(t >= first.t && t <= last.t) {
        return None;
    }
    let k = s.partition_point(|p| p.t <= t);
    if k == 0 {
        return Some((first.x, first.y));
    }
    let a = &s[k - 1];
    if a.t == t || k == s.len() {
        return Some((a.x, a.y));
    }
    let b = &s[k];
    let w = (t - a.t) / (b.t - a.t);
    Some((a.x + w * (b.x - a.x), a.y + w * (b.y - a.y)))
}

/// Geographic bounding box given by two opposite corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lat0: f64,
    pub lon0: f64,
    pub lat1: f64,
    pub lon1: f64,
}

/// Axis-aligned planar region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl PlanarBox {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }
}

impl BoundingBox {
    pub fn project(&self, proj: &Projection) -> PlanarBox {
        let (x0, y0) = proj.forward(self.lat0, self.lon0);
        let (x1, y1) = proj.forward(self.lat1, self.lon1);
        PlanarBox {
            x_min: x0.min(x1),
            x_max: x0.max(x1),
            y_min: y0.min(y1),
            y_max: y0.max(y1),
        }
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.lat0 + self.lat1), 0.5 * (self.lon0 + self.lon1))
    }
}

fn present(track: &PlanarTrack, region: &PlanarBox, t: f64) -> Option<(f64, f64)> {
    position_at(track, t).filter(|&(x, y)| region.contains(x, y))
}

/// Cabs inside `region` at time `t`.
pub fn present_at(tracks: &[PlanarTrack], region: &PlanarBox, t: f64) -> Vec<usize> {
    (0..tracks.len())
        .filter(|&i| present(&tracks[i], region, t).is_some())
        .collect()
}

/// Replays the efficient scheme on trace positions.
///
/// The source is drawn uniformly from the cabs inside `region` at `t_start`.
/// A transmitter outside its track's time span loses that cycle; receivers
/// must be inside the region. Distances are planar. The informed fraction is
/// taken over cabs inside the region when the broadcast ends, and all times
/// in the result are relative to `t_start`.
pub fn run_trace_broadcast(
    tracks: &[PlanarTrack],
    region: &PlanarBox,
    channel: &ChannelModel,
    scheme: &SchemeConfig,
    t_start: f64,
    seed: u64,
    replicate: u64,
    options: &SimOptions,
) -> Result<SimResult> {
    channel.validate()?;
    scheme.validate()?;
    let eligible = present_at(tracks, region, t_start);
    if eligible.is_empty() {
        return Err(Error::Ingestion(format!(
            "no cab inside the region at t = {t_start}"
        )));
    }
    let mut rng: SimRng = rng::stream(seed, replicate);
    let source = eligible[rng.random_range(0..eligible.len())];
    let sampler = LinkSampler::new(*channel);
    let r_max_sq = if channel.is_udm() { channel.r0 * channel.r0 } else { f64::INFINITY };

    let n = tracks.len();
    let mut remaining = vec![0u32; n];
    let mut informed = vec![false; n];
    let mut queue = BinaryHeap::new();
    let mut tally = Tally::new(eligible.len(), &options.fractions, options.coverage_target);
    let interval = |rng: &mut SimRng| scheme.tau_s + scheme.tau_r.sample(rng);

    informed[source] = true;
    remaining[source] = scheme.beta;
    queue.push(Event { time: t_start + interval(&mut rng), node: source });

    let max_time = options
        .max_time
        .unwrap_or(10.0 * scheme.beta as f64 * scheme.mean_interval().max(1.0));
    let mut clock = t_start;
    let mut truncated = false;
    while let Some(ev) = queue.pop() {
        if ev.time - t_start > max_time {
            truncated = true;
            break;
        }
        clock = ev.time;
        let i = ev.node;
        if let Some((tx, ty)) = position_at(&tracks[i], clock) {
            let mut receivers = 0;
            let mut newly = Vec::new();
            for j in 0..n {
                if j == i {
                    continue;
                }
                let Some((x, y)) = present(&tracks[j], region, clock) else {
                    continue;
                };
                let d_sq = (x - tx).powi(2) + (y - ty).powi(2);
                if d_sq > r_max_sq {
                    continue;
                }
                if sampler.connected_sq(&mut rng, d_sq) {
                    receivers += 1;
                    if !informed[j] {
                        newly.push(j);
                    }
                }
            }
            tally.transmit(receivers);
            for j in newly {
                informed[j] = true;
                remaining[j] = scheme.beta;
                queue.push(Event { time: clock + interval(&mut rng), node: j });
                tally.inform(clock - t_start);
            }
            tally.check_coverage();
        }
        remaining[i] -= 1;
        if remaining[i] > 0 {
            queue.push(Event { time: clock + interval(&mut rng), node: i });
        }
    }

    let mut result = tally.finish(replicate, scheme.percolation_threshold, clock - t_start, truncated);
    let final_set = present_at(tracks, region, clock);
    result.n = final_set.len();
    result.informed = final_set.iter().filter(|&&j| informed[j]).count();
    result.informed_fraction = if final_set.is_empty() {
        0.0
    } else {
        result.informed as f64 / final_set.len() as f64
    };
    result.percolated = result.informed_fraction >= scheme.percolation_threshold;
    Ok(result)
}

/// Writes a track in the cab-trace line format, newest record first.
pub fn write_trace_file(track: &TraceTrack, path: &Path) -> Result<()> {
    let mut out = String::new();
    for s in track.samples.iter().rev() {
        out.push_str(&format!("{:.6} {:.6} 0 {}\n", s.lat, s.lon, s.t as i64));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Random-waypoint style synthetic cabs inside `bbox`, sampled every
/// `period` seconds over `[t0, t0 + duration]`.
pub fn synthetic_tracks(
    count: usize,
    bbox: &BoundingBox,
    t0: f64,
    duration: f64,
    period: f64,
    speed: f64,
    seed: u64,
) -> Vec<TraceTrack> {
    let (clat, clon) = bbox.center();
    let proj = Projection::new(clat, clon);
    let region = bbox.project(&proj);
    (0..count)
        .map(|k| {
            let mut rng = rng::substream(seed, 0x7AC, k as u64);
            let pick = |rng: &mut SimRng| {
                (
                    rng.random_range(region.x_min..region.x_max),
                    rng.random_range(region.y_min..region.y_max),
                )
            };
            let mut pos = pick(&mut rng);
            let mut target = pick(&mut rng);
            let mut samples = Vec::new();
            let mut t = t0;
            while t <= t0 + duration {
                let (lat, lon) = proj.inverse(pos.0, pos.1);
                samples.push(TraceSample { t: t.round(), lat, lon });
                let mut budget = speed * period;
                while budget > 0.0 {
                    let (dx, dy) = (target.0 - pos.0, target.1 - pos.1);
                    let d = dx.hypot(dy);
                    if d <= budget {
                        pos = target;
                        budget -= d;
                        target = pick(&mut rng);
                    } else {
                        pos = (pos.0 + dx / d * budget, pos.1 + dy / d * budget);
                        budget = 0.0;
                    }
                }
                t += period;
            }
            TraceTrack {
                vehicle_id: format!("cab{k:04}"),
                samples,
            }
        })
        .collect()
}
