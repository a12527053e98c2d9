//! Randomly switching networks: each step applies `F_{C_k}` with `k` drawn
//! i.i.d. from a fixed distribution over `s` convolution sets. Subdominance
//! is governed by the weighted geometric means
//! `lambda_v^x = prod_j |lambda_{j,v}|^{w_j}`.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dynamics::{iterate, OpinionState, Scaling, Stepper, Stride, Trajectory};
use crate::error::{invalid, Error, Result};
use crate::lattice::{pairing, spans, ConvolutionSet, GroupParams};
use crate::limit_orbit::{fourier_rows, least_squares_slope};
use crate::roots::RootTable;
use crate::spectrum::{all_eigenvalues, angle, check_p, EPS_EQ, REAL_TOL};

/// Eigenvalues with modulus at or below this are treated as exactly zero.
pub const ZERO_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct MixtureSpec {
    pub group: GroupParams,
    pub sets: Vec<ConvolutionSet>,
    pub weights: Vec<f64>,
    pub p: f64,
    pub seed: u64,
}

impl MixtureSpec {
    pub fn new(
        group: GroupParams,
        sets: Vec<ConvolutionSet>,
        weights: Vec<f64>,
        p: f64,
        seed: u64,
    ) -> Result<Self> {
        check_p(p, &group)?;
        if sets.is_empty() {
            return Err(invalid("a mixture needs at least one convolution set"));
        }
        if weights.len() != sets.len() {
            return Err(invalid("one weight per convolution set is required"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(invalid("mixture weights must be nonnegative"));
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(invalid("mixture weights must sum to 1"));
        }
        if sets.iter().any(|c| !spans(c, &group)) {
            return Err(Error::NotSpanning);
        }
        Ok(MixtureSpec {
            group,
            sets,
            weights,
            p,
            seed,
        })
    }

    pub fn uniform(
        group: GroupParams,
        sets: Vec<ConvolutionSet>,
        p: f64,
        seed: u64,
    ) -> Result<Self> {
        let s = sets.len().max(1);
        Self::new(group, sets, vec![1.0 / s as f64; s], p, seed)
    }

    /// `C_1` with probability `1 - q`, `C_2` with probability `q`.
    pub fn two_set(
        group: GroupParams,
        c1: ConvolutionSet,
        c2: ConvolutionSet,
        q: f64,
        p: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(invalid(format!(
                "mixture probability q = {q} outside [0, 1]"
            )));
        }
        Self::new(group, vec![c1, c2], vec![1.0 - q, q], p, seed)
    }

    pub fn s(&self) -> usize {
        self.sets.len()
    }
}

/// `sum_j w_j ln|lambda_j|`, skipping zero weights so `0 * ln 0` never arises.
fn weighted_log(weights: &[f64], logs: impl Iterator<Item = f64>) -> f64 {
    weights
        .iter()
        .zip(logs)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, l)| w * l)
        .sum()
}

fn log_abs(z: Complex64) -> f64 {
    let r = z.norm();
    if r <= ZERO_TOL {
        f64::NEG_INFINITY
    } else {
        r.ln()
    }
}

#[derive(Debug, Clone)]
pub struct MixedSpectrum {
    pub group: GroupParams,
    pub weights: Vec<f64>,
    /// `eigen[j][v]`.
    pub eigen: Vec<Vec<Complex64>>,
    log_abs: Vec<Vec<f64>>,
    theta: Vec<Vec<f64>>,
    /// `ln lambda_v^x`, `-inf` when some weighted factor vanishes.
    pub log_moduli: Vec<f64>,
    pub moduli: Vec<f64>,
    pub lambda: f64,
    pub w: Vec<usize>,
    pub w_prime: Vec<usize>,
}

pub fn mixed_spectrum(spec: &MixtureSpec) -> Result<MixedSpectrum> {
    let g = spec.group;
    let n = g.n();
    let eigen: Vec<Vec<Complex64>> = spec
        .sets
        .iter()
        .map(|c| all_eigenvalues(c, spec.p, &g))
        .collect();
    let log_abs_t: Vec<Vec<f64>> = eigen
        .iter()
        .map(|e| e.iter().map(|&z| log_abs(z)).collect())
        .collect();
    let theta: Vec<Vec<f64>> = eigen
        .iter()
        .map(|e| e.iter().map(|&z| angle(z, n)).collect())
        .collect();

    let single = spec.weights.iter().position(|&w| w == 1.0);
    let order = g.order();
    let mut log_moduli = Vec::with_capacity(order);
    let mut moduli = Vec::with_capacity(order);
    for v in 0..order {
        if let Some(j) = single {
            // A point mass is the pure system; keep its moduli bit-exact.
            let r = eigen[j][v].norm();
            moduli.push(r);
            log_moduli.push(log_abs(eigen[j][v]));
        } else {
            let l = weighted_log(&spec.weights, log_abs_t.iter().map(|t| t[v]));
            log_moduli.push(l);
            moduli.push(l.exp());
        }
    }
    let lambda = moduli[1..].iter().copied().fold(0.0, f64::max);
    if lambda <= 0.0 {
        return Err(Error::DegenerateMixture);
    }
    let cut = lambda.ln() + (1.0 - EPS_EQ).ln();
    let (w, w_prime): (Vec<usize>, Vec<usize>) = (1..order).partition(|&v| log_moduli[v] >= cut);
    Ok(MixedSpectrum {
        group: g,
        weights: spec.weights.clone(),
        eigen,
        log_abs: log_abs_t,
        theta,
        log_moduli,
        moduli,
        lambda,
        w,
        w_prime,
    })
}

impl MixedSpectrum {
    /// Number of +-pairs in `W` that rotate under at least one set drawn
    /// with positive probability.
    pub fn attractor_dimension(&self) -> usize {
        let rotating = self
            .w
            .iter()
            .filter(|&&v| {
                self.eigen.iter().zip(&self.weights).any(|(e, &wt)| {
                    let z = e[v];
                    wt > 0.0 && z.im.abs() > REAL_TOL * z.norm()
                })
            })
            .count();
        rotating / 2
    }

    /// `ln c* = max over w, w' of (ln lambda_{w'}^x - ln lambda_w^x) / 2`;
    /// none when `W'` is empty.
    pub fn log_c_star(&self) -> Option<f64> {
        let top = self
            .w_prime
            .iter()
            .map(|&v| self.log_moduli[v])
            .reduce(f64::max)?;
        let low = self
            .w
            .iter()
            .map(|&v| self.log_moduli[v])
            .fold(f64::INFINITY, f64::min);
        Some(0.5 * (top - low))
    }

    /// `v_1..v_m, log_modulus, modulus, in_W, in_W_prime` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let g = &self.group;
        let mut wtr = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=g.m()).map(|i| format!("v_{i}")).collect();
        header.extend(["log_modulus", "modulus", "in_W", "in_W_prime"].map(String::from));
        wtr.write_record(&header)?;
        for v in 0..g.order() {
            let mut rec: Vec<String> = g
                .point_at(v)
                .coords()
                .iter()
                .map(|c| c.to_string())
                .collect();
            rec.push(self.log_moduli[v].to_string());
            rec.push(self.moduli[v].to_string());
            rec.push(u8::from(self.w.contains(&v)).to_string());
            rec.push(u8::from(self.w_prime.contains(&v)).to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Realized draws, stored 0-based; exported 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexSequence {
    pub indices: Vec<usize>,
}

impl IndexSequence {
    /// Draws `len` indices from ChaCha8 seeded with `spec.seed`, stream 1
    /// (stream 0 is left for initial states).
    pub fn draw(spec: &MixtureSpec, len: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(1);
        let dist = WeightedIndex::new(&spec.weights)
            .map_err(|e| invalid(format!("mixture weights: {e}")))?;
        Ok(IndexSequence {
            indices: (0..len).map(|_| dist.sample(&mut rng)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|k| k + 1).collect()
    }

    /// Hex SHA-256 of the 1-based indices joined by commas.
    pub fn digest(&self) -> String {
        let text: Vec<String> = self.one_based().iter().map(|k| k.to_string()).collect();
        hex::encode(Sha256::digest(text.join(",").as_bytes()))
    }
}

/// `Lambda_v(I_t) = prod_{k in I_t} lambda_{k,v}` in polar form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulativeEigen {
    pub log_modulus: f64,
    /// Accumulated angle in units of `2 pi / n`, reduced mod `n`.
    pub angle: f64,
}

impl CumulativeEigen {
    pub fn to_complex(self, n: u32) -> Complex64 {
        if self.log_modulus == f64::NEG_INFINITY {
            return Complex64::default();
        }
        Complex64::from_polar(self.log_modulus.exp(), TAU * self.angle / n as f64)
    }
}

pub fn cumulative_eigen(
    ms: &MixedSpectrum,
    seq: &IndexSequence,
    v: usize,
    t: usize,
) -> Result<CumulativeEigen> {
    if t > seq.len() {
        return Err(invalid(format!(
            "t = {t} exceeds the drawn sequence length {}",
            seq.len()
        )));
    }
    if v >= ms.group.order() {
        return Err(invalid(format!("mode index {v} out of range")));
    }
    let n = ms.group.n() as f64;
    let mut log_modulus = 0.0;
    let mut ang = 0.0;
    for &k in &seq.indices[..t] {
        log_modulus += ms.log_abs[k][v];
        ang = (ang + ms.theta[k][v]).rem_euclid(n);
    }
    Ok(CumulativeEigen {
        log_modulus,
        angle: ang,
    })
}

/// First `t` at which `Lambda_v(I_t)` becomes zero.
pub fn zero_hitting_time(ms: &MixedSpectrum, seq: &IndexSequence, v: usize) -> Option<usize> {
    seq.indices
        .iter()
        .position(|&k| ms.log_abs[k][v] == f64::NEG_INFINITY)
        .map(|i| i + 1)
}

#[derive(Debug, Clone)]
pub struct RatioDecay {
    /// `(t, ln(max_{w'} |Lambda_{w'}| / min_w |Lambda_w|))` for `t = 1..`.
    pub log_ratio: Vec<(u64, f64)>,
    /// Least-squares slope of the log ratio; `-inf` once the ratio hits 0.
    pub slope: f64,
    pub log_c_star: f64,
}

pub fn ratio_decay_check(ms: &MixedSpectrum, seq: &IndexSequence) -> Result<RatioDecay> {
    let log_c_star = ms
        .log_c_star()
        .ok_or_else(|| Error::NotApplicable("W' is empty".into()))?;
    let mut acc = vec![0.0; ms.group.order()];
    let mut log_ratio = Vec::with_capacity(seq.len());
    for (t, &k) in seq.indices.iter().enumerate() {
        for v in ms.w.iter().chain(&ms.w_prime) {
            acc[*v] += ms.log_abs[k][*v];
        }
        let top = ms
            .w_prime
            .iter()
            .map(|&v| acc[v])
            .fold(f64::NEG_INFINITY, f64::max);
        let low = ms.w.iter().map(|&v| acc[v]).fold(f64::INFINITY, f64::min);
        log_ratio.push((t as u64 + 1, top - low));
    }
    let slope = if log_ratio.iter().any(|p| p.1 == f64::NEG_INFINITY) {
        f64::NEG_INFINITY
    } else {
        let pts: Vec<(f64, f64)> = log_ratio.iter().map(|&(t, r)| (t as f64, r)).collect();
        least_squares_slope(&pts).unwrap_or(f64::NAN)
    };
    Ok(RatioDecay {
        log_ratio,
        slope,
        log_c_star,
    })
}

#[derive(Debug, Clone)]
pub struct MixedRun {
    pub trajectory: Trajectory,
    pub sequence: IndexSequence,
}

/// Simulates `t_max` switching steps from `x0`, scaling by `1/lambda_mix`
/// each step. The index sequence is drawn from `spec.seed`.
pub fn mixed_run(
    spec: &MixtureSpec,
    ms: &MixedSpectrum,
    x0: &OpinionState,
    t_max: u64,
    stride: Stride,
) -> Result<MixedRun> {
    let sequence = IndexSequence::draw(spec, t_max as usize)?;
    let trajectory = mixed_run_with(spec, ms, x0, &sequence, stride)?;
    Ok(MixedRun {
        trajectory,
        sequence,
    })
}

/// As [`mixed_run`] with a given sequence; runs for its full length.
pub fn mixed_run_with(
    spec: &MixtureSpec,
    ms: &MixedSpectrum,
    x0: &OpinionState,
    seq: &IndexSequence,
    stride: Stride,
) -> Result<Trajectory> {
    if x0.agents() != spec.group.order() {
        return Err(invalid(
            "initial state row count differs from the group order",
        ));
    }
    if seq.indices.iter().any(|&k| k >= spec.s()) {
        return Err(invalid("index sequence refers to a missing set"));
    }
    let ops: Vec<Stepper> = spec
        .sets
        .iter()
        .map(|c| Stepper::new(c, spec.p, &spec.group))
        .collect();
    let d = x0.d();
    let start = x0.t;
    Ok(iterate(
        x0,
        seq.len() as u64,
        stride,
        Scaling::InverseLambda,
        Some(1.0 / ms.lambda),
        |t, x, out| ops[seq.indices[(t - start) as usize]].apply(x, d, out),
    ))
}

#[derive(Debug, Clone)]
struct MixedMode {
    index: usize,
    z: Vec<Complex64>,
}

/// Closed-form prediction
/// `y*_v(t) = (1/N) sum_{h in W} (prod_k |lambda_{k,h}| / lambda) Re(z_h e^{i X_h})`
/// with `X_h = (2 pi / n)(<h,v> + sum_k theta_{k,h})`.
#[derive(Debug, Clone)]
pub struct MixedOrbitModel {
    group: GroupParams,
    d: usize,
    modes: Vec<MixedMode>,
}

impl MixedOrbitModel {
    pub fn new(ms: &MixedSpectrum, x0: &OpinionState) -> Result<Self> {
        let rows = fourier_rows(x0, &ms.group)?;
        Ok(MixedOrbitModel {
            group: ms.group,
            d: x0.d(),
            modes: ms
                .w
                .iter()
                .map(|&h| MixedMode {
                    index: h,
                    z: rows.row(h).to_vec(),
                })
                .collect(),
        })
    }

    fn factors(&self, ms: &MixedSpectrum, seq: &IndexSequence, t: usize) -> Result<Vec<Complex64>> {
        let shift = t as f64 * ms.lambda.ln();
        self.modes
            .iter()
            .map(|m| {
                let c = cumulative_eigen(ms, seq, m.index, t)?;
                Ok(CumulativeEigen {
                    log_modulus: c.log_modulus - shift,
                    angle: c.angle,
                }
                .to_complex(self.group.n()))
            })
            .collect()
    }

    pub fn predict(
        &self,
        ms: &MixedSpectrum,
        seq: &IndexSequence,
        v: usize,
        t: usize,
    ) -> Result<Vec<f64>> {
        let f = self.factors(ms, seq, t)?;
        Ok(self.assemble(&f, v, &RootTable::new(self.group.n())))
    }

    pub fn predict_all(
        &self,
        ms: &MixedSpectrum,
        seq: &IndexSequence,
        t: usize,
    ) -> Result<Vec<f64>> {
        let f = self.factors(ms, seq, t)?;
        let roots = RootTable::new(self.group.n());
        Ok((0..self.group.order())
            .flat_map(|v| self.assemble(&f, v, &roots))
            .collect())
    }

    fn assemble(&self, factors: &[Complex64], v: usize, roots: &RootTable) -> Vec<f64> {
        let g = &self.group;
        let point = g.point_at(v);
        let inv = 1.0 / g.order() as f64;
        let mut y = vec![0.0; self.d];
        for (m, f) in self.modes.iter().zip(factors) {
            let h = g.point_at(m.index);
            let e = pairing(point.coords(), h.coords(), g.n());
            let w = Complex64::new(roots.cos(e), roots.sin(e)) * f * inv;
            for (yi, z) in y.iter_mut().zip(&m.z) {
                *yi += (z * w).re;
            }
        }
        y
    }
}

#[derive(Debug, Clone)]
pub struct Transition {
    pub q: f64,
    /// `W(q_lo)`.
    pub w_before: Vec<usize>,
    /// `W(q*)`, which contains `w_before` and the newly tied modes.
    pub w_at: Vec<usize>,
}

fn argmax_two(a: &[f64], b: &[f64], q: f64) -> Vec<usize> {
    let l: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| weighted_log(&[1.0 - q, q], [x, y].into_iter()))
        .collect();
    let top = l[1..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (1..l.len()).filter(|&v| l[v] >= top - EPS_EQ).collect()
}

/// Smallest `q` in `[q_lo, q_hi]` at which the argmax set of
/// `lambda_v^x(q) = |lambda_{1,v}|^{1-q} |lambda_{2,v}|^q` changes.
///
/// Bisection on the argmax set locates the crossing to `1e-6`; because
/// `ln lambda_v^x(q)` is affine in `q`, the crossing of an old and a new
/// maximiser is then solved exactly.
pub fn find_transition_q(
    c1: &ConvolutionSet,
    c2: &ConvolutionSet,
    p: f64,
    g: &GroupParams,
    q_lo: f64,
    q_hi: f64,
) -> Result<Transition> {
    check_p(p, g)?;
    if !spans(c1, g) || !spans(c2, g) {
        return Err(Error::NotSpanning);
    }
    if !(0.0..=1.0).contains(&q_lo) || !(0.0..=1.0).contains(&q_hi) {
        return Err(invalid("q range must lie in [0, 1]"));
    }
    if q_lo >= q_hi {
        return Err(Error::NotFound("empty q range".into()));
    }
    let a: Vec<f64> = all_eigenvalues(c1, p, g).into_iter().map(log_abs).collect();
    let b: Vec<f64> = all_eigenvalues(c2, p, g).into_iter().map(log_abs).collect();
    let w_before = argmax_two(&a, &b, q_lo);
    if argmax_two(&a, &b, q_hi) == w_before {
        return Err(Error::NotFound(format!(
            "argmax set is the same at q = {q_lo} and q = {q_hi}"
        )));
    }
    let (mut lo, mut hi) = (q_lo, q_hi);
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if argmax_two(&a, &b, mid) == w_before {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w_hi = argmax_two(&a, &b, hi);
    let new = w_hi.iter().find(|v| !w_before.contains(v));
    let q = match (new, w_before.first()) {
        (Some(&u), Some(&w)) => {
            let da = a[w] - a[u];
            let db = b[w] - b[u];
            let q = da / (da - db);
            if q.is_finite() && q >= lo - 1e-7 && q <= hi + 1e-7 {
                q
            } else {
                hi
            }
        }
        _ => hi,
    };
    Ok(Transition {
        q,
        w_at: argmax_two(&a, &b, q),
        w_before,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{random_centered, run_scaled_from, SimConfig};
    use crate::spectrum::full_spectrum;

    fn set(g: &GroupParams, s: &str) -> ConvolutionSet {
        ConvolutionSet::parse(g, s).unwrap()
    }

    fn collapse_pair(n: u32) -> (GroupParams, ConvolutionSet, ConvolutionSet) {
        let g = GroupParams::new(n, 2).unwrap();
        (g, set(&g, "(1,0);(0,1)"), set(&g, "(1,0);(0,2)"))
    }

    #[test]
    fn single_set_is_the_pure_spectrum() {
        let (g, c1, _) = collapse_pair(11);
        let spec = MixtureSpec::uniform(g, vec![c1.clone()], 0.4, 0).unwrap();
        let ms = mixed_spectrum(&spec).unwrap();
        let r = full_spectrum(&c1, 0.4, &g).unwrap();
        for (a, e) in ms.moduli.iter().zip(&r.pairs) {
            assert_eq!(*a, e.modulus);
        }
        assert_eq!(ms.lambda, r.lambda_sub);
        assert_eq!(ms.w, r.w);
    }

    #[test]
    fn collapse_example_w_and_dimensions() {
        let (g, c1, c2) = collapse_pair(29);
        let spec = MixtureSpec::uniform(g, vec![c1, c2], 0.5, 0).unwrap();
        let ms = mixed_spectrum(&spec).unwrap();
        let w: Vec<_> =
            ms.w.iter()
                .map(|&v| g.signed_coords(&g.point_at(v)))
                .collect();
        assert_eq!(w, vec![vec![1, 0], vec![-1, 0]]);
        assert_eq!(ms.attractor_dimension(), 1);
    }

    #[test]
    fn two_set_half_equals_uniform() {
        let (g, c1, c2) = collapse_pair(13);
        let a =
            mixed_spectrum(&MixtureSpec::two_set(g, c1.clone(), c2.clone(), 0.5, 0.6, 0).unwrap())
                .unwrap();
        let b = mixed_spectrum(&MixtureSpec::uniform(g, vec![c1, c2], 0.6, 0).unwrap()).unwrap();
        assert_eq!(a.moduli, b.moduli);
    }

    #[test]
    fn endpoints_match_pure_systems() {
        let (g, c1, c2) = collapse_pair(29);
        for (q, c) in [(0.0, &c1), (1.0, &c2)] {
            let spec = MixtureSpec::two_set(g, c1.clone(), c2.clone(), q, 0.9, 0).unwrap();
            let ms = mixed_spectrum(&spec).unwrap();
            assert_eq!(ms.w, full_spectrum(c, 0.9, &g).unwrap().w);
        }
    }

    #[test]
    fn cumulative_products() {
        let (g, c1, c2) = collapse_pair(7);
        let spec = MixtureSpec::uniform(g, vec![c1.clone()], 0.4, 3).unwrap();
        let ms = mixed_spectrum(&spec).unwrap();
        let seq = IndexSequence::draw(&spec, 50).unwrap();
        let c0 = cumulative_eigen(&ms, &seq, 0, 50).unwrap();
        assert_eq!(c0.to_complex(7), Complex64::new(1.0, 0.0));
        let lam = ms.eigen[0][9];
        let c = cumulative_eigen(&ms, &seq, 9, 50).unwrap().to_complex(7);
        assert!((c - lam.powu(50)).norm() < 1e-12 * lam.norm().powi(50));
        assert!(cumulative_eigen(&ms, &seq, 9, 51).is_err());

        let spec = MixtureSpec::uniform(g, vec![c1, c2], 0.4, 3).unwrap();
        let ms = mixed_spectrum(&spec).unwrap();
        let seq = IndexSequence::draw(&spec, 60).unwrap();
        let mut direct = Complex64::new(1.0, 0.0);
        for &k in &seq.indices {
            direct *= ms.eigen[k][10];
        }
        let c = cumulative_eigen(&ms, &seq, 10, 60).unwrap().to_complex(7);
        assert!((c - direct).norm() < 1e-12 * direct.norm());
    }

    #[test]
    fn zero_eigenvalue_is_absorbing() {
        let g = GroupParams::new(2, 2).unwrap();
        let c1 = set(&g, "(1,0);(0,1)");
        let c2 = set(&g, "(1,0);(0,1);(1,1)");
        let spec = MixtureSpec::uniform(g, vec![c1, c2], 0.5, 4).unwrap();
        let ms = mixed_spectrum(&spec).unwrap();
        let v = g.index_of(&g.point(&[1, 1]).unwrap());
        assert_eq!(ms.eigen[0][v], Complex64::new(0.0, 0.0));
        let seq = IndexSequence::draw(&spec, 40).unwrap();
        let hit = zero_hitting_time(&ms, &seq, v).unwrap();
        for t in hit..=40 {
            assert_eq!(
                cumulative_eigen(&ms, &seq, v, t).unwrap().to_complex(2),
                Complex64::default()
            );
        }
    }

    #[test]
    fn degenerate_mixture_is_reported() {
        // n = 2, p = 1/2: each set has a zero eigenvalue on a different mode,
        // so every geometric mean vanishes.
        let g = GroupParams::new(2, 2).unwrap();
        let sets = ["(1,0);(0,1)", "(1,0);(1,1)", "(0,1);(1,1)"]
            .iter()
            .map(|s| set(&g, s))
            .collect();
        let spec = MixtureSpec::uniform(g, sets, 0.5, 0).unwrap();
        assert!(matches!(
            mixed_spectrum(&spec),
            Err(Error::DegenerateMixture)
        ));
    }

    #[test]
    fn pure_ratio_is_exact_power() {
        let (g, c1, _) = collapse_pair(7);
        let spec = MixtureSpec::uniform(g, vec![c1], 0.4, 0).unwrap();
        let ms = mixed_spectrum(&spec).unwrap();
        let seq = IndexSequence::draw(&spec, 100).unwrap();
        let rd = ratio_decay_check(&ms, &seq).unwrap();
        let top = ms
            .w_prime
            .iter()
            .map(|&v| ms.log_moduli[v])
            .fold(f64::NEG_INFINITY, f64::max);
        let per_step = top - ms.lambda.ln();
        for &(t, r) in &rd.log_ratio {
            assert!((r - t as f64 * per_step).abs() < 1e-10);
        }
        assert!((rd.slope - per_step).abs() < 1e-10);
        assert!((rd.log_c_star - per_step / 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_set_run_matches_pure_run() {
        let (g, c1, _) = collapse_pair(7);
        let spec = MixtureSpec::uniform(g, vec![c1.clone()], 0.3, 9).unwrap();
        let ms = mixed_spectrum(&spec).unwrap();
        let x0 = random_centered(g.order(), 2, 9);
        let run = mixed_run(&spec, &ms, &x0, 150, Stride::Default).unwrap();
        let mut cfg = SimConfig::new(g, c1, 0.3, 2, 9).unwrap();
        cfg.steps = 150;
        cfg.scaling = Scaling::InverseLambda;
        let pure = run_scaled_from(&cfg, x0).unwrap();
        assert_eq!(run.trajectory.snapshots, pure.snapshots);
    }

    #[test]
    fn zero_start_stays_zero() {
        let (g, c1, c2) = collapse_pair(7);
        let spec = MixtureSpec::uniform(g, vec![c1, c2], 0.3, 9).unwrap();
        let ms = mixed_spectrum(&spec).unwrap();
        let run = mixed_run(&spec, &ms, &OpinionState::zeros(&g, 3), 40, Stride::Default).unwrap();
        assert!(run
            .trajectory
            .last()
            .state
            .values()
            .iter()
            .all(|&x| x == 0.0));
    }

    #[test]
    fn single_set_orbit_matches_pure_orbit() {
        let (g, c1, _) = collapse_pair(11);
        let spec = MixtureSpec::uniform(g, vec![c1.clone()], 0.5, 2).unwrap();
        let ms = mixed_spectrum(&spec).unwrap();
        let x0 = random_centered(g.order(), 2, 2);
        let seq = IndexSequence::draw(&spec, 80).unwrap();
        let mixed = MixedOrbitModel::new(&ms, &x0).unwrap();
        let r = full_spectrum(&c1, 0.5, &g).unwrap();
        let pure = crate::limit_orbit::build_orbit_model(&x0, &r).unwrap();
        for t in [0usize, 1, 33, 80] {
            for v in [0, 5, 100] {
                let a = mixed.predict(&ms, &seq, v, t).unwrap();
                let b = pure.predicted(v, t as u64);
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn sequence_is_reproducible() {
        let (g, c1, c2) = collapse_pair(7);
        let spec = MixtureSpec::two_set(g, c1, c2, 0.3, 0.5, 77).unwrap();
        let a = IndexSequence::draw(&spec, 500).unwrap();
        let b = IndexSequence::draw(&spec, 500).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.digest(), b.digest());
        let ones = a.indices.iter().filter(|&&k| k == 1).count();
        assert!((100..200).contains(&ones));
    }

    #[test]
    fn transition_in_doubled_basis_mixture() {
        let (g, c1, _) = collapse_pair(29);
        let c2 = set(&g, "(2,0);(0,2)");
        let tr = find_transition_q(&c2, &c1, 0.9, &g, 0.0, 1.0).unwrap();
        assert!(tr.w_at.len() > tr.w_before.len());
        assert!(tr.w_before.iter().all(|v| tr.w_at.contains(v)));
        assert!(tr.q > 0.0 && tr.q < 0.1);
        let tr = find_transition_q(&c1, &c2, 0.5, &g, 0.0, 1.0).unwrap();
        assert!(tr.q > 0.0 && tr.q < 1.0);
        assert!(matches!(
            find_transition_q(&c1, &c2, 0.5, &g, 0.3, 0.3),
            Err(Error::NotFound(_))
        ));
    }
}
