use std::path::Path;
use std::time::Instant;

use contrarian_core::limit_orbit::regression_window_start;
use contrarian_core::mixed_model::MixedSpectrum;
use contrarian_core::spectrum::speed_lower_bound;
use contrarian_core::{
    attractor_dimension, attractor_sample, build_orbit_model, dependence_scan,
    discrepancy_report, find_transition_q, full_spectrum, init_random, mixed_run, mixed_spectrum,
    monotonicity_scan, ratio_decay_check, regularity, run_scaled, system_approximation_error,
    ConvolutionSet, Engine, GroupParams, MixedOrbitModel, MixtureSpec, OutputSet,
    RotationVector, RunManifest, Scaling, SimConfig, Trajectory,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::{CliError, RunConfig};

pub const DEFAULT_D: usize = 2;
pub const DEFAULT_STEPS: u64 = 500;
pub const DEFAULT_ORBIT_STEPS: u64 = 200;
pub const DEFAULT_RESOLUTION: usize = 256;
pub const DEFAULT_T_GRID: [usize; 3] = [100, 1000, 10_000];
pub const DEFAULT_L: u32 = 20;
pub const DEFAULT_L_MAX: u32 = 100;
pub const DEPENDENCE_TOL: f64 = 1e-9;

/// Writes `manifest.json` next to the outputs.
pub(crate) fn finish<S: Serialize>(
    command: &str,
    cfg: &RunConfig,
    summary: &S,
    outputs: &OutputSet,
    started: Instant,
) -> Result<(), CliError> {
    RunManifest::new(command, cfg, cfg.seed, summary, outputs, started)?.write_to(outputs.dir())?;
    Ok(())
}

fn coords(g: &GroupParams, idx: &[usize]) -> Vec<Vec<i64>> {
    idx.iter().map(|&v| g.signed_coords(&g.point_at(v))).collect()
}

fn written(outputs: &OutputSet) -> String {
    let names: Vec<String> = outputs.entries().into_iter().map(|e| e.file).collect();
    format!(
        "wrote {} + manifest.json to {}",
        names.join(", "),
        outputs.dir().display()
    )
}

pub fn spectrum(cfg: RunConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let started = Instant::now();
    let (g, c) = cfg.system()?;
    let p = RunConfig::require(&cfg.p, "p")?;
    let cfg = RunConfig {
        n: Some(g.n()),
        m: Some(g.m()),
        c: Some(c.to_text(&g)),
        p: Some(p),
        p_grid: cfg.p_grid,
        ..RunConfig::default()
    };
    let report = full_spectrum(&c, p, &g)?;
    let verdict = regularity(&c, p, &g)?;
    let mut outputs = OutputSet::create(out)?;
    outputs.write("spectrum.csv", |buf| report.write_csv(buf))?;
    let mut summary = json!({
        "spectrum": report.summary(Some(&verdict)),
        "attractor_dimension": attractor_dimension(&report),
        "excluded_p_count": verdict.excluded_p.len(),
    });
    let mut lines = vec![format!(
        "lambda = {}, |W| = {}, vartheta = {:?}, regular = {}",
        report.lambda_sub,
        report.w.len(),
        report.vartheta,
        verdict.is_regular
    )];
    if let Some(grid) = &cfg.p_grid {
        let scan = monotonicity_scan(&c, &g, grid)?;
        let mut bounds = Vec::new();
        for &(q, _) in &scan.points {
            let b = speed_lower_bound(&full_spectrum(&c, q, &g)?)?;
            bounds.push(json!({"p": q, "log_alpha": b.log_alpha, "log_bound": b.log_bound, "holds": b.holds}));
        }
        outputs.write("monotonicity.csv", |buf| {
            let mut wtr = csv::Writer::from_writer(buf);
            wtr.write_record(["p", "rotation_number"])?;
            for (q, a) in &scan.points {
                wtr.write_record([q.to_string(), a.to_string()])?;
            }
            wtr.flush()?;
            Ok(())
        })?;
        let flagged: Vec<Value> = scan
            .flagged
            .iter()
            .map(|(q, f)| json!({"p": q, "flag": format!("{f:?}")}))
            .collect();
        lines.push(format!(
            "rotation number nonincreasing over {} usable p values: {}",
            scan.points.len(),
            scan.nonincreasing
        ));
        summary["monotonicity"] = json!({
            "nonincreasing": scan.nonincreasing,
            "flagged": flagged,
            "speed_bounds": bounds,
        });
    }
    finish("spectrum", &cfg, &summary, &outputs, started)?;
    lines.push(written(&outputs));
    Ok(lines)
}

fn sim_config(cfg: &RunConfig, default_d: usize, default_steps: u64) -> Result<(SimConfig, RunConfig), CliError> {
    let (g, c) = cfg.system()?;
    let p = RunConfig::require(&cfg.p, "p")?;
    let mut sim = SimConfig::new(g, c.clone(), p, cfg.d.unwrap_or(default_d), cfg.seed.unwrap_or(0))?;
    sim.steps = cfg.steps.unwrap_or(default_steps);
    sim.scaling = cfg.scaling.unwrap_or(Scaling::None);
    sim.stride = cfg.stride();
    sim.engine = cfg.engine.unwrap_or(Engine::Direct);
    let resolved = RunConfig {
        n: Some(g.n()),
        m: Some(g.m()),
        c: Some(c.to_text(&g)),
        p: Some(p),
        d: Some(sim.d),
        seed: Some(sim.seed),
        steps: Some(sim.steps),
        stride: cfg.stride,
        ..RunConfig::default()
    };
    Ok((sim, resolved))
}

fn mass_drift(traj: &Trajectory) -> f64 {
    let start = traj.snapshots[0].state.column_sums();
    traj.snapshots
        .iter()
        .flat_map(|s| {
            s.state
                .column_sums()
                .into_iter()
                .zip(start.clone())
                .map(|(a, b)| (a - b).abs())
        })
        .fold(0.0, f64::max)
}

pub fn simulate(cfg: RunConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let started = Instant::now();
    let (sim, mut resolved) = sim_config(&cfg, DEFAULT_D, DEFAULT_STEPS)?;
    resolved.scaling = Some(sim.scaling);
    resolved.engine = Some(sim.engine);
    let traj = run_scaled(&sim)?;
    let mut outputs = OutputSet::create(out)?;
    outputs.write("trajectory.csv", |buf| traj.write_csv(buf))?;
    let last = traj.last();
    let mut summary = json!({
        "final_t": last.t,
        "final_norm": last.state.norm(),
        "log_scale": last.log_scale,
        "xi": traj.xi,
        "mass_center_drift": mass_drift(&traj),
    });
    let mut lines = vec![format!("ran {} steps, final norm {}", last.t, last.state.norm())];
    if sim.scaling == Scaling::InverseLambda {
        let report = full_spectrum(&sim.set, sim.p, &sim.group)?;
        let model = build_orbit_model(&traj.snapshots[0].state, &report)?;
        let err = system_approximation_error(&traj, &model)?;
        outputs.write("error.csv", |buf| err.write_csv(buf))?;
        if let Some(mu) = report.mu {
            let lo = regression_window_start(mu, sim.d, sim.group.order());
            let slope = err.slope(lo, sim.steps);
            summary["error"] = json!({
                "log_mu": mu.ln(),
                "window": [lo, sim.steps],
                "slope": slope,
                "skipped": err.skipped,
            });
            lines.push(match slope {
                Some(s) => format!(
                    "log-error slope over [{lo}, {}] = {s}, log mu = {}",
                    sim.steps,
                    mu.ln()
                ),
                None => format!(
                    "regression window starts at t = {lo}; run at least that many steps for a slope"
                ),
            });
        }
    }
    finish("simulate", &resolved, &summary, &outputs, started)?;
    lines.push(written(&outputs));
    Ok(lines)
}

pub fn attractor(cfg: RunConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let started = Instant::now();
    let (sim, mut resolved) = sim_config(&cfg, 3, DEFAULT_ORBIT_STEPS)?;
    let agent = cfg.agent.unwrap_or(0);
    let resolution = cfg.resolution.unwrap_or(DEFAULT_RESOLUTION);
    resolved.agent = Some(agent);
    resolved.resolution = Some(resolution);
    if agent >= sim.group.order() {
        return Err(CliError::Config(format!("agent {agent} out of range")));
    }
    let report = full_spectrum(&sim.set, sim.p, &sim.group)?;
    let x0 = init_random(&sim);
    let model = build_orbit_model(&x0, &report)?;
    let sample = attractor_sample(&model, resolution)?;
    let mut outputs = OutputSet::create(out)?;
    outputs.write("attractor.csv", |buf| sample.write_csv(buf))?;
    let times: Vec<u64> = (0..=sim.steps).collect();
    outputs.write("orbit.csv", |buf| model.write_orbit_csv(agent, &times, buf))?;
    let (constant, alternating, rotating) = model.term_magnitudes();
    let summary = json!({
        "spectrum": report.summary(None),
        "attractor_dimension": attractor_dimension(&report),
        "ellipse_count": sample.ellipse_count,
        "resolution": sample.resolution,
        "points": sample.len(),
        "terms": {"constant": constant, "alternating": alternating, "rotating": rotating},
    });
    finish("attractor", &resolved, &summary, &outputs, started)?;
    Ok(vec![
        format!(
            "attractor dimension {}, {} sample points",
            attractor_dimension(&report),
            sample.len()
        ),
        written(&outputs),
    ])
}

fn write_mixed_spectrum(outputs: &mut OutputSet, ms: &MixedSpectrum) -> Result<(), CliError> {
    outputs.write("mixed_spectrum.csv", |buf| ms.write_csv(buf))?;
    Ok(())
}

pub fn mixed(cfg: RunConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let started = Instant::now();
    let (sim, mut resolved) = sim_config(&cfg, DEFAULT_D, DEFAULT_STEPS)?;
    let g = sim.group;
    let c1 = sim.set.clone();
    let c2 = ConvolutionSet::parse(&g, &RunConfig::require(&cfg.c2, "C2")?)?;
    let q = cfg.q.unwrap_or(0.5);
    resolved.c2 = Some(c2.to_text(&g));
    resolved.q = Some(q);
    let spec = MixtureSpec::two_set(g, c1.clone(), c2.clone(), q, sim.p, sim.seed)?;
    let ms = mixed_spectrum(&spec)?;
    let x0 = init_random(&sim);
    let run = mixed_run(&spec, &ms, &x0, sim.steps, sim.stride)?;
    let model = MixedOrbitModel::new(&ms, &x0)?;

    let mut outputs = OutputSet::create(out)?;
    write_mixed_spectrum(&mut outputs, &ms)?;
    outputs.write("trajectory.csv", |buf| run.trajectory.write_csv(buf))?;
    outputs.write("sequence.csv", |buf| {
        let mut wtr = csv::Writer::from_writer(buf);
        wtr.write_record(["t", "set"])?;
        for (t, k) in run.sequence.one_based().iter().enumerate() {
            wtr.write_record([(t + 1).to_string(), k.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    })?;
    let mut deviation = Vec::new();
    for snap in &run.trajectory.snapshots {
        let pred = model.predict_all(&ms, &run.sequence, snap.t as usize)?;
        let y = snap.state.values();
        let num = pred.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        if den >= 1e-12 {
            deviation.push((snap.t, num / den));
        }
    }
    outputs.write("deviation.csv", |buf| {
        let mut wtr = csv::Writer::from_writer(buf);
        wtr.write_record(["t", "rel_deviation"])?;
        for (t, e) in &deviation {
            wtr.write_record([t.to_string(), e.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    })?;

    let pure1 = full_spectrum(&c1, sim.p, &g)?;
    let pure2 = full_spectrum(&c2, sim.p, &g)?;
    let mut summary = json!({
        "lambda": ms.lambda,
        "W": coords(&g, &ms.w),
        "attractor_dimension": ms.attractor_dimension(),
        "pure_dimensions": [attractor_dimension(&pure1), attractor_dimension(&pure2)],
        "sequence_digest": run.sequence.digest(),
        "final_deviation": deviation.last().map(|d| d.1),
    });
    let mut lines = vec![format!(
        "mixture dimension {} (pure {} and {}), |W| = {}",
        ms.attractor_dimension(),
        attractor_dimension(&pure1),
        attractor_dimension(&pure2),
        ms.w.len()
    )];
    if let Ok(rd) = ratio_decay_check(&ms, &run.sequence) {
        outputs.write("ratio.csv", |buf| {
            let mut wtr = csv::Writer::from_writer(buf);
            wtr.write_record(["t", "log_ratio"])?;
            for (t, r) in &rd.log_ratio {
                wtr.write_record([t.to_string(), r.to_string()])?;
            }
            wtr.flush()?;
            Ok(())
        })?;
        summary["ratio"] = json!({"slope": rd.slope, "log_c_star": rd.log_c_star});
    }
    if cfg.find_q == Some(true) {
        let (lo, hi) = (cfg.q_lo.unwrap_or(0.0), cfg.q_hi.unwrap_or(1.0));
        resolved.find_q = Some(true);
        resolved.q_lo = Some(lo);
        resolved.q_hi = Some(hi);
        let t = find_transition_q(&c1, &c2, sim.p, &g, lo, hi)?;
        lines.push(format!(
            "transition at q* = {:.6}: |W| {} -> {}",
            t.q,
            t.w_before.len(),
            t.w_at.len()
        ));
        summary["transition"] = json!({
            "q": t.q,
            "W_before": coords(&g, &t.w_before),
            "W_at": coords(&g, &t.w_at),
        });
    }
    finish("mixed", &resolved, &summary, &outputs, started)?;
    lines.push(written(&outputs));
    Ok(lines)
}

pub fn equidist(cfg: RunConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let started = Instant::now();
    let seed = cfg.seed.unwrap_or(0);
    let t_grid = cfg.t_grid.clone().unwrap_or(DEFAULT_T_GRID.to_vec());
    let big_l = cfg.big_l.unwrap_or(DEFAULT_L);
    let l_max = cfg.l_max.unwrap_or(DEFAULT_L_MAX);
    let mut resolved = RunConfig {
        seed: Some(seed),
        t_grid: Some(t_grid.clone()),
        big_l: Some(big_l),
        l_max: Some(l_max),
        ..RunConfig::default()
    };
    let alpha = match &cfg.alpha {
        Some(a) => {
            resolved.alpha = Some(a.clone());
            RotationVector::new(a.clone())?
        }
        None => {
            let (g, c) = cfg.system()?;
            let p = RunConfig::require(&cfg.p, "p")?;
            resolved.n = Some(g.n());
            resolved.m = Some(g.m());
            resolved.c = Some(c.to_text(&g));
            resolved.p = Some(p);
            RotationVector::from_report(&full_spectrum(&c, p, &g)?)?
        }
    };
    let report = discrepancy_report(&alpha, &t_grid, big_l, seed)?;
    let dep = dependence_scan(&alpha, l_max, DEPENDENCE_TOL)?;
    let mut outputs = OutputSet::create(out)?;
    outputs.write("discrepancy.csv", |buf| report.write_csv(buf))?;
    outputs.write_json("dependence.json", &dep)?;
    let decreasing = report
        .rows
        .windows(2)
        .all(|w| w[1].empirical < w[0].empirical);
    let dominated = report.rows.iter().all(|r| r.etk_bound >= r.empirical);
    let summary = json!({
        "alpha": alpha.alpha(),
        "kind": report.kind,
        "rows": report.rows,
        "decreasing": decreasing,
        "etk_dominates": dominated,
        "flagged_frequencies": report.flagged.len(),
        "relations_found": dep.relations.len(),
    });
    finish("equidist", &resolved, &summary, &outputs, started)?;
    let mut lines: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("t = {}: D = {}, ETK bound = {}", r.t, r.empirical, r.etk_bound))
        .collect();
    lines.push(format!(
        "{} rational relation(s) with |l| <= {l_max}",
        dep.relations.len()
    ));
    lines.push(written(&outputs));
    Ok(lines)
}
