//! Forward simulation of `x(t+1) = p x_v(t) + (1-p)/|C| sum_{w in v+C} x_w(t)`,
//! optionally rescaled each step.

use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fft::TorusFft;
use crate::lattice::{spans, ConvolutionSet, GroupParams, Stencil};
use crate::spectrum::{all_eigenvalues, check_p, full_spectrum};

/// Agents per step above which the direct update runs in parallel.
const PAR_THRESHOLD: usize = 1 << 14;

/// `N x d` opinions, row-major, rows in lexicographic agent order.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionState {
    pub t: u64,
    d: usize,
    values: Vec<f64>,
}

impl OpinionState {
    pub fn new(t: u64, d: usize, values: Vec<f64>) -> Result<Self> {
        if d == 0 || values.len() % d != 0 {
            return Err(invalid("state length is not a multiple of d"));
        }
        Ok(OpinionState { t, d, values })
    }

    pub fn zeros(g: &GroupParams, d: usize) -> Self {
        OpinionState {
            t: 0,
            d,
            values: vec![0.0; g.order() * d],
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn agents(&self) -> usize {
        self.values.len() / self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.values[v * self.d..(v + 1) * self.d]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values
            .iter()
            .skip(j)
            .step_by(self.d)
            .copied()
            .collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.d];
        for row in self.values.chunks(self.d) {
            for (s, x) in sums.iter_mut().zip(row) {
                *s += x;
            }
        }
        sums
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest Euclidean distance between two agents.
    pub fn diameter(&self) -> f64 {
        let rows: Vec<&[f64]> = self.values.chunks(self.d).collect();
        let mut best: f64 = 0.0;
        for (i, a) in rows.iter().enumerate() {
            for b in &rows[i + 1..] {
                let d2: f64 = a.iter().zip(*b).map(|(x, y)| (x - y) * (x - y)).sum();
                best = best.max(d2);
            }
        }
        best.sqrt()
    }

    fn check(&self, g: &GroupParams) -> Result<()> {
        if self.agents() != g.order() {
            return Err(invalid(format!(
                "state has {} rows, group has {} points",
                self.agents(),
                g.order()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scaling {
    #[default]
    None,
    InverseLambda,
    DiameterNormalized,
}

impl std::str::FromStr for Scaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Scaling::None),
            "inverse-lambda" => Ok(Scaling::InverseLambda),
            "diameter-normalized" => Ok(Scaling::DiameterNormalized),
            other => Err(invalid(format!("unknown scaling mode {other:?}"))),
        }
    }
}

/// Which snapshots a run keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stride {
    /// Every step up to `t = 1000`, every 10th step after that.
    #[default]
    Default,
    Every(u64),
}

impl Stride {
    pub fn records(self, t: u64) -> bool {
        match self {
            Stride::Default => t <= 1000 || t % 10 == 0,
            Stride::Every(k) => t % k.max(1) == 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    #[default]
    Direct,
    Fft,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub group: GroupParams,
    pub set: ConvolutionSet,
    pub p: f64,
    pub d: usize,
    pub seed: u64,
    pub steps: u64,
    pub scaling: Scaling,
    pub stride: Stride,
    pub engine: Engine,
}

impl SimConfig {
    pub fn new(
        group: GroupParams,
        set: ConvolutionSet,
        p: f64,
        d: usize,
        seed: u64,
    ) -> Result<Self> {
        let cfg = SimConfig {
            group,
            set,
            p,
            d,
            seed,
            steps: 0,
            scaling: Scaling::None,
            stride: Stride::Default,
            engine: Engine::Direct,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_p(self.p, &self.group)?;
        if self.d == 0 {
            return Err(invalid("opinion dimension d must be at least 1"));
        }
        if let Stride::Every(0) = self.stride {
            return Err(invalid("stride must be at least 1"));
        }
        if !spans(&self.set, &self.group) {
            return Err(Error::NotSpanning);
        }
        Ok(())
    }
}

/// `N x d` standard-normal draws from ChaCha8 seeded with `seed`, row-major,
/// then each column shifted to mean zero.
pub fn init_random(cfg: &SimConfig) -> OpinionState {
    random_centered(cfg.group.order(), cfg.d, cfg.seed)
}

pub(crate) fn random_centered(rows: usize, d: usize, seed: u64) -> OpinionState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<f64> = (0..rows * d)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    center_columns(&mut values, d);
    OpinionState { t: 0, d, values }
}

pub fn center_columns(values: &mut [f64], d: usize) {
    let rows = values.len() / d;
    let mut mean = vec![0.0; d];
    for row in values.chunks(d) {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= rows as f64;
    }
    for row in values.chunks_mut(d) {
        for (x, m) in row.iter_mut().zip(&mean) {
            *x -= m;
        }
    }
}

/// Direct-path operator: neighbour table plus weights.
#[derive(Debug, Clone)]
pub struct Stepper {
    stencil: Stencil,
    p: f64,
    q: f64,
    inv_width: f64,
}

impl Stepper {
    pub fn new(c: &ConvolutionSet, p: f64, g: &GroupParams) -> Self {
        let stencil = Stencil::new(c, g);
        Stepper {
            inv_width: 1.0 / stencil.width() as f64,
            stencil,
            p,
            q: 1.0 - p,
        }
    }

    /// `out = F_C x` for a row-major `N x d` matrix. Each neighbourhood is
    /// summed in the set's sorted order, so the result does not depend on
    /// whether rows are processed in parallel.
    pub fn apply(&self, x: &[f64], d: usize, out: &mut [f64]) {
        let row = |(v, dst): (usize, &mut [f64])| {
            for j in 0..d {
                let mut acc = 0.0;
                for &w in self.stencil.neighbours(v) {
                    acc += x[w * d + j];
                }
                dst[j] = self.p * x[v * d + j] + self.q * (acc * self.inv_width);
            }
        };
        if out.len() / d >= PAR_THRESHOLD {
            out.par_chunks_mut(d).enumerate().for_each(row);
        } else {
            out.chunks_mut(d).enumerate().for_each(row);
        }
    }
}

/// Spectral-path operator: multiply each Fourier mode by its eigenvalue.
#[derive(Debug, Clone)]
pub struct FftStepper {
    fft: TorusFft,
    lambdas: Vec<Complex64>,
}

impl FftStepper {
    pub fn new(c: &ConvolutionSet, p: f64, g: &GroupParams) -> Self {
        FftStepper {
            fft: TorusFft::new(g),
            lambdas: all_eigenvalues(c, p, g),
        }
    }

    pub fn apply(&self, x: &[f64], d: usize, out: &mut [f64]) {
        let order = self.lambdas.len();
        let scale = 1.0 / order as f64;
        let mut buf = vec![Complex64::default(); order];
        for j in 0..d {
            for (b, v) in buf.iter_mut().zip(x.iter().skip(j).step_by(d)) {
                *b = Complex64::new(*v, 0.0);
            }
            self.fft.forward(&mut buf);
            for (b, l) in buf.iter_mut().zip(&self.lambdas) {
                *b *= l;
            }
            self.fft.inverse(&mut buf);
            for (o, b) in out.iter_mut().skip(j).step_by(d).zip(&buf) {
                *o = b.re * scale;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum Operator {
    Direct(Stepper),
    Fft(FftStepper),
}

impl Operator {
    pub fn new(engine: Engine, c: &ConvolutionSet, p: f64, g: &GroupParams) -> Self {
        match engine {
            Engine::Direct => Operator::Direct(Stepper::new(c, p, g)),
            Engine::Fft => Operator::Fft(FftStepper::new(c, p, g)),
        }
    }

    pub fn apply(&self, x: &[f64], d: usize, out: &mut [f64]) {
        match self {
            Operator::Direct(s) => s.apply(x, d, out),
            Operator::Fft(s) => s.apply(x, d, out),
        }
    }
}

fn checked_step(
    state: &OpinionState,
    c: &ConvolutionSet,
    p: f64,
    g: &GroupParams,
    engine: Engine,
) -> Result<OpinionState> {
    check_p(p, g)?;
    state.check(g)?;
    if !spans(c, g) {
        return Err(Error::NotSpanning);
    }
    let mut out = vec![0.0; state.values.len()];
    Operator::new(engine, c, p, g).apply(&state.values, state.d, &mut out);
    Ok(OpinionState {
        t: state.t + 1,
        d: state.d,
        values: out,
    })
}

/// One synchronous update of every agent.
pub fn step(
    state: &OpinionState,
    c: &ConvolutionSet,
    p: f64,
    g: &GroupParams,
) -> Result<OpinionState> {
    checked_step(state, c, p, g, Engine::Direct)
}

/// Same update computed through the torus DFT.
pub fn step_fft(
    state: &OpinionState,
    c: &ConvolutionSet,
    p: f64,
    g: &GroupParams,
) -> Result<OpinionState> {
    checked_step(state, c, p, g, Engine::Fft)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: u64,
    /// Sum of `ln xi` over the steps applied so far.
    pub log_scale: f64,
    pub state: OpinionState,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub scaling: Scaling,
    /// The `xi` used by inverse-lambda scaling, `1/lambda`.
    pub xi: Option<f64>,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn at(&self, t: u64) -> Option<&Snapshot> {
        self.snapshots
            .binary_search_by_key(&t, |s| s.t)
            .ok()
            .map(|i| &self.snapshots[i])
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory holds t = 0")
    }

    /// `t, agent_index, y_1..y_d` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let d = self.snapshots.first().map_or(1, |s| s.state.d);
        let mut header = vec!["t".to_string(), "agent_index".to_string()];
        header.extend((1..=d).map(|j| format!("y_{j}")));
        wtr.write_record(&header)?;
        for snap in &self.snapshots {
            for (v, row) in snap.state.values.chunks(d).enumerate() {
                let mut rec = vec![snap.t.to_string(), v.to_string()];
                rec.extend(row.iter().map(|x| x.to_string()));
                wtr.write_record(&rec)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Runs `cfg.steps` scaled steps from a seeded random start.
pub fn run_scaled(cfg: &SimConfig) -> Result<Trajectory> {
    run_scaled_from(cfg, init_random(cfg))
}

/// Runs `cfg.steps` scaled steps from the given state.
pub fn run_scaled_from(cfg: &SimConfig, x0: OpinionState) -> Result<Trajectory> {
    cfg.validate()?;
    x0.check(&cfg.group)?;
    if x0.d != cfg.d {
        return Err(invalid("initial state dimension differs from d"));
    }
    let xi = match cfg.scaling {
        Scaling::InverseLambda => {
            Some(1.0 / full_spectrum(&cfg.set, cfg.p, &cfg.group)?.lambda_sub)
        }
        _ => None,
    };
    let op = Operator::new(cfg.engine, &cfg.set, cfg.p, &cfg.group);
    Ok(iterate(
        &x0,
        cfg.steps,
        cfg.stride,
        cfg.scaling,
        xi,
        |_, x, out| op.apply(x, cfg.d, out),
    ))
}

/// Shared stepping loop. `apply(t, x, out)` writes the unscaled update for
/// step `t -> t+1`; scaling is applied afterwards.
pub(crate) fn iterate(
    x0: &OpinionState,
    steps: u64,
    stride: Stride,
    scaling: Scaling,
    xi: Option<f64>,
    mut apply: impl FnMut(u64, &[f64], &mut [f64]),
) -> Trajectory {
    let d = x0.d;
    let mut cur = x0.values.clone();
    let mut next = vec![0.0; cur.len()];
    let mut log_scale = 0.0;
    let mut snapshots = vec![Snapshot {
        t: x0.t,
        log_scale,
        state: x0.clone(),
    }];
    for t in x0.t..x0.t + steps {
        apply(t, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
        if scaling != Scaling::None {
            // The mass center is invariant and zero, but roundoff puts ~1e-17
            // into it and any rescaling by more than 1 per step amplifies that.
            center_columns(&mut cur, d);
        }
        let factor = match scaling {
            Scaling::None => None,
            Scaling::InverseLambda => xi,
            Scaling::DiameterNormalized => {
                let diam = OpinionState {
                    t: 0,
                    d,
                    values: std::mem::take(&mut cur),
                };
                let dm = diam.diameter();
                cur = diam.values;
                (dm > 0.0).then(|| 1.0 / dm)
            }
        };
        if let Some(f) = factor {
            for x in &mut cur {
                *x *= f;
            }
            log_scale += f.ln();
        }
        let t1 = t + 1;
        if stride.records(t1) || t1 == x0.t + steps {
            snapshots.push(Snapshot {
                t: t1,
                log_scale,
                state: OpinionState {
                    t: t1,
                    d,
                    values: cur.clone(),
                },
            });
        }
    }
    Trajectory {
        scaling,
        xi,
        snapshots,
    }
}

/// One Hegselmann-Krause step: every point moves to the mean of the points
/// within its own radius (itself included).
pub fn hk_step(points: &[Vec<f64>], radii: &[f64]) -> Result<Vec<Vec<f64>>> {
    if points.len() != radii.len() {
        return Err(invalid("one radius per point is required"));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(invalid("radii must be positive"));
    }
    let dim = points.first().map_or(0, Vec::len);
    if points.iter().any(|p| p.len() != dim) {
        return Err(invalid("points must share one dimension"));
    }
    Ok(points
        .iter()
        .zip(radii)
        .map(|(x, &r)| {
            let mut mean = vec![0.0; dim];
            let mut count = 0usize;
            for y in points {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                if d2 <= r * r {
                    count += 1;
                    for (m, v) in mean.iter_mut().zip(y) {
                        *m += v;
                    }
                }
            }
            mean.iter_mut().for_each(|m| *m /= count as f64);
            mean
        })
        .collect())
}
