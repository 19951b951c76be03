//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. `ACCEPTANCE_ONLY=3,5` runs a subset.

use std::f64::consts::E;
use std::process::Command;
use std::time::Instant;

use epibroadcast::analytics::{
    analyze, clustering_factor, effective_degree_bound, fading_gain, lambert_w0, percolation_bound, shadowing_gain,
    AnalyticReport, ClusteringMethod,
};
use epibroadcast::channel::{is_connected, radio_range, sample_fading, sample_shadowing, LinkSampler};
use epibroadcast::rng;
use epibroadcast::simcore::{measure_clustering, measure_effective_degree, run_batch, SimOptions, SimResult};
use epibroadcast::stats::{estimate, proportion, Accumulator, Estimate};
use epibroadcast::{ChannelDraw, ChannelModel, Fading, GuardMode, NetworkParams, SchemeConfig, SchemeKind, TauLaw};
use rand::Rng;

type Check = Result<String, String>;

fn quad() -> ClusteringMethod {
    ClusteringMethod::Quadrature { order: 32 }
}

fn network(n: usize, side: f64, channel: ChannelModel, beta: u32, tau_s: f64) -> NetworkParams {
    NetworkParams {
        n,
        side,
        speed: 10.0,
        channel,
        scheme: SchemeConfig::efficient(beta, tau_s),
    }
}

fn udm_step() -> Check {
    let mut rng = rng::stream(1, 1);
    let mut violations = 0usize;
    for eta in [2.0, 3.0, 4.0] {
        let model = ChannelModel::new(eta, 0.0, Fading::None, 20.0).map_err(|e| e.to_string())?;
        let sampler = LinkSampler::new(model);
        for _ in 0..100_000 {
            let draw = ChannelDraw {
                z: sample_shadowing(&mut rng, 0.0),
                omega: sample_fading(&mut rng, Fading::None),
            };
            if radio_range(&model, draw) != 20.0 {
                violations += 1;
            }
            let d: f64 = rng.random_range(0.0..40.0);
            let inside = d <= 20.0;
            if is_connected(&model, &mut rng, d) != inside || sampler.connected_sq(&mut rng, d * d) != inside {
                violations += 1;
            }
        }
        // the boundary itself
        if !is_connected(&model, &mut rng, 20.0) || is_connected(&model, &mut rng, 20.0 + 1e-9) {
            violations += 1;
        }
    }
    if violations == 0 {
        Ok("3 x 1e5 draws: range == r0 and link == (d <= r0), 0 violations".into())
    } else {
        Err(format!("{violations} violations"))
    }
}

fn special_functions() -> Check {
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        // denser near the branch point
        let u = i as f64 / 999.0;
        let x = -1.0 / E + u * u * (10.0 + 1.0 / E);
        let w = lambert_w0(x).map_err(|e| e.to_string())?;
        worst = worst.max((w * w.exp() - x).abs());
    }
    if worst > 1e-12 {
        return Err(format!("lambert residual {worst:e}"));
    }
    let mut gap: f64 = 0.0;
    for r0 in [1.1, 1.5, 2.0, 3.0, 5.0] {
        // extinction probability by fixed-point iteration from q = 0
        let mut q = 0.0f64;
        for _ in 0..100_000 {
            let next = (-r0 * (1.0 - q)).exp();
            if (next - q).abs() < 1e-16 {
                break;
            }
            q = next;
        }
        let pb = percolation_bound(r0).map_err(|e| e.to_string())?;
        gap = gap.max((pb - (1.0 - q)).abs());
    }
    let p2 = percolation_bound(2.0).map_err(|e| e.to_string())?;
    if gap > 1e-9 || (p2 - 0.7968).abs() > 1e-4 {
        return Err(format!("fixed-point gap {gap:e}, p(2) = {p2}"));
    }
    Ok(format!("max residual {worst:.1e}, fixed-point gap {gap:.1e}, p(2) = {p2:.6}"))
}

fn moment_identity() -> Check {
    let mut worst: f64 = 0.0;
    let mut idx = 0;
    for sigma in [0.0, 4.0, 8.0] {
        for fading in [Fading::None, Fading::Nakagami { m: 1.0 }, Fading::Nakagami { m: 4.0 }] {
            for eta in [2.0, 4.0] {
                let model = ChannelModel::new(eta, sigma, fading, 1.0).map_err(|e| e.to_string())?;
                let mut rng = rng::substream(3, 0x30, idx);
                idx += 1;
                let mut acc = Accumulator::new();
                for _ in 0..1_000_000 {
                    let d = ChannelDraw {
                        z: sample_shadowing(&mut rng, sigma),
                        omega: sample_fading(&mut rng, fading),
                    };
                    acc.push(radio_range(&model, d).powi(2));
                }
                let e = acc.estimate().expect("samples");
                let expected = shadowing_gain(sigma, eta) * fading_gain(fading, eta);
                let se = e.se_or_zero();
                let z = if se > 0.0 {
                    (e.mean - expected).abs() / se
                } else if (e.mean - expected).abs() < 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                };
                if z > 3.0 {
                    return Err(format!(
                        "sigma={sigma} {fading:?} eta={eta}: mean {} vs {expected} ({z:.2} s.e.)",
                        e.mean
                    ));
                }
                worst = worst.max(z);
            }
        }
    }
    Ok(format!("18 channel settings x 1e6 draws, worst deviation {worst:.2} s.e."))
}

fn clustering_equivalence() -> Check {
    let mut sets = Vec::new();
    for channel in [
        ChannelModel::udm(20.0),
        ChannelModel::new(3.0, 4.0, Fading::None, 20.0).expect("valid"),
    ] {
        for tau in [0.5, 1.0, 2.0, 4.0, 8.0] {
            sets.push(network(320, 400.0, channel, 2, tau));
        }
    }
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for (k, p) in sets.iter().enumerate() {
        let q = clustering_factor(p, quad()).map_err(|e| e.to_string())?;
        let mc = clustering_factor(p, ClusteringMethod::MonteCarlo { samples: 400_000, seed: 40 + k as u64 })
            .map_err(|e| e.to_string())?;
        let sim = measure_clustering(p, 40_000, 400 + k as u64).map_err(|e| e.to_string())?;
        let se_q = q.se.unwrap_or(0.0);
        let se_mc = mc.se.unwrap_or(0.0);
        let se_sim = sim.se_or_zero();
        let pairs = [
            ("quad/mc", q.phi, mc.phi, se_q.hypot(se_mc)),
            ("quad/sim", q.phi, sim.mean, se_q.hypot(se_sim)),
            ("mc/sim", mc.phi, sim.mean, se_mc.hypot(se_sim)),
        ];
        for (name, a, b, se) in pairs {
            let z = (a - b).abs() / se;
            worst = worst.max(z);
            if z > 3.0 {
                return Err(format!(
                    "set {k} (sigma={}, tau_s={}): {name} {a} vs {b}, {z:.2} s.e.",
                    p.channel.sigma, p.scheme.tau_s
                ));
            }
        }
        lines.push(format!("{:.3}", q.phi));
    }
    Ok(format!("{} sets, phi = [{}], worst {worst:.2} s.e.", sets.len(), lines.join(", ")))
}

fn effective_degree() -> Check {
    let channels = [
        ChannelModel::udm(20.0),
        ChannelModel::new(3.0, 4.0, Fading::None, 20.0).expect("valid"),
        ChannelModel::new(3.0, 0.0, Fading::Nakagami { m: 1.0 }, 20.0).expect("valid"),
    ];
    let mut worst_eq: f64 = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut count = 0;
    let mut seed = 500;
    for channel in channels {
        for tau in [1.0, 5.0] {
            for beta in [1, 2, 4] {
                let p = network(1280, 800.0, channel, beta, tau);
                let phi = clustering_factor(&p, quad()).map_err(|e| e.to_string())?.phi;
                let bound = effective_degree_bound(&p, phi);
                seed += 1;
                let m = measure_effective_degree(&p, 20_000, seed).map_err(|e| e.to_string())?;
                let se = m.se_or_zero();
                let tag = format!("sigma={} fading={:?} tau_s={tau} beta={beta}", channel.sigma, channel.fading);
                count += 1;
                if beta <= 2 {
                    let z = (m.mean - bound.value).abs() / se;
                    worst_eq = worst_eq.max(z);
                    if z > 3.0 || !bound.exact {
                        return Err(format!("{tag}: measured {} vs Eq. {} ({z:.2} s.e.)", m.mean, bound.value));
                    }
                } else {
                    let excess = (m.mean - bound.value) / se;
                    worst_excess = worst_excess.max(excess);
                    if excess > 3.0 {
                        return Err(format!("{tag}: measured {} above bound {} ({excess:.2} s.e.)", m.mean, bound.value));
                    }
                }
            }
        }
    }
    Ok(format!(
        "{count} sets; beta<=2 worst |dev| {worst_eq:.2} s.e.; beta=4 worst excess {worst_excess:.2} s.e."
    ))
}

/// One cell of the paper-scale campaign.
struct Cell {
    beta: u32,
    sigma: f64,
    fading: Fading,
    tau_s: f64,
    report: AnalyticReport,
    perc: Estimate,
    fraction: Estimate,
    results: Vec<SimResult>,
}

const CAMPAIGN_RUNS: u64 = 100;

fn campaign() -> Result<Vec<Cell>, String> {
    let options = SimOptions {
        guard: GuardMode::Warn,
        ..SimOptions::default()
    };
    let mut cells = Vec::new();
    for beta in [2u32, 4] {
        for fading in [Fading::None, Fading::Nakagami { m: 1.0 }] {
            for sigma in [0.0, 4.0] {
                for tau_s in [10.0, 30.0, 60.0] {
                    let channel = ChannelModel::new(4.0, sigma, fading, 10.0).map_err(|e| e.to_string())?;
                    let p = network(1280, 800.0, channel, beta, tau_s);
                    let report = analyze(&p, quad(), &options.fractions).map_err(|e| e.to_string())?;
                    let results = run_batch(&p, CAMPAIGN_RUNS, 7, &options).map_err(|e| e.to_string())?;
                    let hits = results.iter().filter(|r| r.percolated).count();
                    let perc = proportion(hits, results.len()).expect("runs");
                    let fr: Vec<f64> = results.iter().map(|r| r.informed_fraction).collect();
                    let fraction = estimate(&fr).expect("runs");
                    cells.push(Cell {
                        beta,
                        sigma,
                        fading,
                        tau_s,
                        report,
                        perc,
                        fraction,
                        results,
                    });
                }
            }
        }
    }
    Ok(cells)
}

fn find<'a>(cells: &'a [Cell], beta: u32, fading: Fading, sigma: f64, tau_s: f64) -> &'a Cell {
    cells
        .iter()
        .find(|c| c.beta == beta && c.fading == fading && c.sigma == sigma && c.tau_s == tau_s)
        .expect("cell in grid")
}

/// `later` may fall below `earlier` by at most 3 combined standard errors.
fn non_decreasing(earlier: &Estimate, later: &Estimate) -> (bool, f64) {
    let se = earlier.se_or_zero().hypot(later.se_or_zero());
    let drop = earlier.mean - later.mean;
    let z = if se > 0.0 { drop / se } else if drop > 0.0 { f64::INFINITY } else { 0.0 };
    (z <= 3.0, z)
}

fn paper_scale(cells: &[Cell]) -> Check {
    let mut issues = Vec::new();
    let mut worst_drop = f64::NEG_INFINITY;
    let mut worst_excess = f64::NEG_INFINITY;
    let none = Fading::None;
    for beta in [2, 4] {
        for sigma in [0.0, 4.0] {
            for pair in [10.0, 30.0, 60.0].windows(2) {
                let a = find(cells, beta, none, sigma, pair[0]);
                let b = find(cells, beta, none, sigma, pair[1]);
                for (name, x, y) in [("perc", &a.perc, &b.perc), ("fraction", &a.fraction, &b.fraction)] {
                    let (ok, z) = non_decreasing(x, y);
                    worst_drop = worst_drop.max(z);
                    if !ok {
                        issues.push(format!("(a) beta={beta} sigma={sigma} {name} drops tau_s {}->{}", pair[0], pair[1]));
                    }
                }
            }
        }
        for tau in [10.0, 30.0, 60.0] {
            let a = find(cells, beta, none, 0.0, tau);
            let b = find(cells, beta, none, 4.0, tau);
            for (name, x, y) in [("perc", &a.perc, &b.perc), ("fraction", &a.fraction, &b.fraction)] {
                let (ok, z) = non_decreasing(x, y);
                worst_drop = worst_drop.max(z);
                if !ok {
                    issues.push(format!("(a) beta={beta} tau_s={tau} {name} drops sigma 0->4"));
                }
            }
        }
    }
    for c in cells.iter().filter(|c| c.fading == none) {
        let n = CAMPAIGN_RUNS as f64;
        let slack = |p: f64| 2.0 * (p * (1.0 - p) / n).sqrt();
        let pc = c.report.pc_bound;
        let z0 = c.report.z0_bound;
        // excess over the bound in binomial standard errors
        let excess = (2.0 * (c.perc.mean - pc) / slack(pc)).max(2.0 * (c.fraction.mean - z0) / slack(z0));
        worst_excess = worst_excess.max(excess);
        if c.perc.mean > pc + slack(pc) || c.fraction.mean > z0 + slack(z0) {
            issues.push(format!(
                "(b) beta={} sigma={} tau_s={}: perc {} (bound {pc}), fraction {} (bound {z0})",
                c.beta, c.sigma, c.tau_s, c.perc.mean, c.fraction.mean
            ));
        }
    }
    let rayleigh = Fading::Nakagami { m: 1.0 };
    let mut pooled = Vec::new();
    for sigma in [0.0, 4.0] {
        let mean = |fading: Fading, f: &dyn Fn(&Cell) -> f64| {
            let sel: Vec<&Cell> = cells.iter().filter(|c| c.fading == fading && c.sigma == sigma).collect();
            sel.iter().map(|c| f(c)).sum::<f64>() / sel.len() as f64
        };
        let (pn, pr) = (mean(none, &|c| c.perc.mean), mean(rayleigh, &|c| c.perc.mean));
        let (fnn, fr) = (mean(none, &|c| c.fraction.mean), mean(rayleigh, &|c| c.fraction.mean));
        pooled.push(format!("sigma={sigma}: perc {pn:.3}->{pr:.3}, fraction {fnn:.3}->{fr:.3}"));
        if !(pr < pn && fr < fnn) {
            issues.push(format!("(c) Rayleigh does not degrade at sigma={sigma}: perc {pn} vs {pr}, fraction {fnn} vs {fr}"));
        }
    }
    if issues.is_empty() {
        Ok(format!(
            "24 cells x {CAMPAIGN_RUNS} runs; worst trend drop {worst_drop:.2} s.e.; worst bound excess {worst_excess:.2} binomial s.e.; Rayleigh pooled {}",
            pooled.join("; ")
        ))
    } else {
        Err(issues.join("; "))
    }
}

fn delay_validity(cells: &[Cell]) -> Check {
    let mut reached = 0usize;
    let mut valid = 0usize;
    let mut worst_cell = (1.0f64, String::new());
    for c in cells.iter().filter(|c| c.report.r0_bound > 1.0) {
        let Some(bound) = c.report.delay_bound(0.5) else { continue };
        let delays: Vec<f64> = c.results.iter().filter_map(|r| r.delay(0.5)).collect();
        let ok = delays.iter().filter(|&&d| d >= bound).count();
        reached += delays.len();
        valid += ok;
        if !delays.is_empty() {
            let share = ok as f64 / delays.len() as f64;
            if share < worst_cell.0 {
                worst_cell = (share, format!("beta={} sigma={} {:?} tau_s={}", c.beta, c.sigma, c.fading, c.tau_s));
            }
        }
    }
    if reached == 0 {
        return Err("no supercritical run reached 50%".into());
    }
    let share = valid as f64 / reached as f64;
    let msg = format!(
        "{valid}/{reached} runs reaching 50% respect the bound ({:.1}%); lowest cell {:.1}% ({})",
        100.0 * share,
        100.0 * worst_cell.0,
        worst_cell.1
    );
    if share >= 0.95 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn constant_interval_optimal() -> Check {
    let mut measured = Vec::new();
    let mut phis = Vec::new();
    for (k, half) in [0.0, 1.0, 2.0].into_iter().enumerate() {
        let mut p = network(1280, 800.0, ChannelModel::udm(20.0), 2, 2.0 - half);
        if half > 0.0 {
            p.scheme.tau_r = TauLaw::Uniform {
                low: 0.0,
                high: 2.0 * half,
            };
        }
        phis.push(clustering_factor(&p, quad()).map_err(|e| e.to_string())?.phi);
        measured.push(measure_effective_degree(&p, 40_000, 800 + k as u64).map_err(|e| e.to_string())?);
    }
    let c = &measured[0];
    for (j, m) in measured.iter().enumerate().skip(1) {
        let se = c.se_or_zero().hypot(m.se_or_zero());
        if c.mean < m.mean - 3.0 * se {
            return Err(format!("measured degree {} at constant interval < {} at jitter {j}", c.mean, m.mean));
        }
        if phis[0] > phis[j] {
            return Err(format!("phi(constant) = {} > phi(jitter {j}) = {}", phis[0], phis[j]));
        }
    }
    Ok(format!(
        "degree {:.4}/{:.4}/{:.4} (se {:.4}); phi {:.5} <= {:.5}, {:.5}",
        measured[0].mean,
        measured[1].mean,
        measured[2].mean,
        measured[0].se_or_zero(),
        phis[0],
        phis[1],
        phis[2]
    ))
}

fn energy_ordering() -> Check {
    let options = SimOptions::default();
    let mut lines = Vec::new();
    for lambda in [0.001, 0.002, 0.004] {
        let n = (lambda * 800.0 * 800.0) as usize;
        let mut means = Vec::new();
        for kind in [SchemeKind::Efficient, SchemeKind::Sir, SchemeKind::Si] {
            let mut p = network(n, 800.0, ChannelModel::udm(40.0), 2, 10.0);
            p.scheme.kind = kind;
            let results = run_batch(&p, 50, 9, &options).map_err(|e| e.to_string())?;
            let energies: Vec<f64> = results.iter().filter_map(|r| r.energy_to_coverage).collect();
            if energies.len() * 2 < results.len() {
                return Err(format!(
                    "lambda={lambda} {kind:?}: only {}/{} runs reach 99% coverage",
                    energies.len(),
                    results.len()
                ));
            }
            means.push(estimate(&energies).expect("runs").mean);
        }
        lines.push(format!("lambda={lambda}: {:.3e} < {:.3e} < {:.3e}", means[0], means[1], means[2]));
        if !(means[0] < means[1] && means[1] < means[2]) {
            return Err(format!("ordering fails: {}", lines.last().expect("line")));
        }
    }
    Ok(lines.join("; "))
}

fn determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_epibroadcast");
    let args = [
        "sweep", "--runs", "8", "--seed", "2024", "--set", "network.n=400", "--set", "network.side=500",
        "--set", "channel.sigma=4", "--set", "channel.fading=1", "--set", "scheme.tau_r=uniform:0,2",
        "--set", "sweep.axis=scheme.tau_s", "--set", "sweep.values=2,8",
    ];
    let run = |threads: &str| {
        Command::new(bin)
            .args(args)
            .env("EPIBROADCAST_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())
    };
    let outs = [run("1")?, run("1")?, run("2")?, run("4")?];
    if let Some(bad) = outs.iter().find(|o| !o.status.success()) {
        return Err(String::from_utf8_lossy(&bad.stderr).into_owned());
    }
    if outs.iter().any(|o| o.stdout != outs[0].stdout) {
        return Err("CSV differs between runs or thread counts".into());
    }
    let text = String::from_utf8_lossy(&outs[0].stdout);
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let width = header.split(',').count();
    if !header.starts_with("schema_version,") || lines.clone().count() != 2 {
        return Err(format!("unexpected layout: {header}"));
    }
    let ragged = csv::Reader::from_reader(text.as_bytes())
        .records()
        .any(|r| r.map_or(true, |r| r.len() != width));
    if ragged {
        return Err("ragged CSV rows".into());
    }
    Ok(format!("{} bytes identical across 2 repeats and 1/2/4 threads, {width} columns", outs[0].stdout.len()))
}

fn main() {
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let wanted = |id: u32| only.as_ref().is_none_or(|o| o.contains(&id));

    // (id, name, time limit in seconds, check)
    type Entry<'a> = (u32, &'a str, f64, Box<dyn Fn() -> Check + 'a>);
    let cells: std::cell::OnceCell<Result<Vec<Cell>, String>> = std::cell::OnceCell::new();
    let campaign_cells = || cells.get_or_init(campaign).as_ref().map_err(Clone::clone);
    let entries: Vec<Entry> = vec![
        (1, "UDM reduction", 1.0, Box::new(udm_step)),
        (2, "special functions", 1.0, Box::new(special_functions)),
        (3, "squared-range moment identity", 30.0, Box::new(moment_identity)),
        (4, "clustering factor: quadrature / Monte Carlo / simulation", 300.0, Box::new(clustering_equivalence)),
        (5, "effective degree vs closed form", 300.0, Box::new(effective_degree)),
        (6, "paper-scale trends and bounds", 1800.0, Box::new(|| paper_scale(campaign_cells()?))),
        (7, "delay lower bound validity", 1800.0, Box::new(|| delay_validity(campaign_cells()?))),
        (8, "constant interval optimality", 300.0, Box::new(constant_interval_optimal)),
        (9, "energy ordering Efficient < SIR < SI", 1800.0, Box::new(energy_ordering)),
        (10, "determinism and schema", 60.0, Box::new(determinism)),
    ];
    let mut failed = 0;
    for (id, name, limit, check) in &entries {
        if !wanted(*id) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(msg) if secs > *limit => Err(format!("{msg}; took {secs:.1} s, limit {limit} s")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS [{id}] {name} ({secs:.1} s): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL [{id}] {name} ({secs:.1} s): {msg}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
