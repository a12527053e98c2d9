//! Equidistribution of the rotating phases: the Kronecker sequence
//! `p_k = k alpha mod 1`, the Erdos-Turan-Koksma upper bound on its box
//! discrepancy, the empirical discrepancy itself, and a bounded scan for
//! integer relations among the rotation numbers.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::spectrum::SpectrumReport;

/// Default tolerance for [`dependence_scan`].
pub const DEPENDENCE_TOL: f64 = 1e-9;
/// Boxes drawn by the randomized estimator used for `s >= 3`.
pub const RANDOM_BOXES: usize = 100_000;
/// Fractional parts within this distance of an integer count as `gamma = 1`.
const UNIT_PHASE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationVector {
    alpha: Vec<f64>,
}

impl RotationVector {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(invalid("rotation vector must have at least one entry"));
        }
        if alpha.iter().any(|a| !(*a > 0.0 && *a <= 0.5)) {
            return Err(invalid("rotation numbers must lie in (0, 1/2]"));
        }
        Ok(RotationVector { alpha })
    }

    pub fn from_report(report: &SpectrumReport) -> Result<Self> {
        if report.rotation_numbers.is_empty() {
            return Err(Error::NotApplicable("no rotating subdominant mode".into()));
        }
        Self::new(report.rotation_numbers.clone())
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn s(&self) -> usize {
        self.alpha.len()
    }
}

/// `t` points of `[0,1)^s`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSequence {
    s: usize,
    points: Vec<f64>,
}

impl PhaseSequence {
    pub fn from_points(s: usize, points: Vec<f64>) -> Result<Self> {
        if s == 0 || points.is_empty() || points.len() % s != 0 {
            return Err(invalid(
                "point buffer must hold a positive number of s-vectors",
            ));
        }
        if points.iter().any(|x| !(0.0..1.0).contains(x)) {
            return Err(invalid("points must lie in [0, 1)"));
        }
        Ok(PhaseSequence { s, points })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.s
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.s..(k + 1) * self.s]
    }

    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.points
            .iter()
            .skip(j)
            .step_by(self.s)
            .copied()
            .collect()
    }
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// `p_k = k alpha mod 1` for `k = 1..=t`.
pub fn phase_sequence(alpha: &RotationVector, t: usize) -> Result<PhaseSequence> {
    if t == 0 {
        return Err(invalid("t must be at least 1"));
    }
    let s = alpha.s();
    let mut points = Vec::with_capacity(t * s);
    for k in 1..=t {
        for a in &alpha.alpha {
            points.push(frac(k as f64 * a));
        }
    }
    Ok(PhaseSequence { s, points })
}

#[derive(Debug, Clone, Serialize)]
pub struct EtkBound {
    pub value: f64,
    /// Frequencies `l` with `<l, alpha>` an integer; their exponential sums
    /// are exactly 1 and do not decay with `t`.
    pub flagged: Vec<Vec<i64>>,
}

/// `2 s^2 3^(s+1)`.
pub fn etk_constant(s: usize) -> f64 {
    2.0 * (s * s) as f64 * 3f64.powi(s as i32 + 1)
}

/// Visits every `l` with `0 < ||l||_inf <= big_l` whose first nonzero entry
/// is positive (`l` and `-l` give equal moduli).
fn for_each_half_frequency(s: usize, big_l: i64, mut f: impl FnMut(&[i64])) {
    let mut l = vec![-big_l; s];
    loop {
        if let Some(first) = l.iter().find(|&&c| c != 0) {
            if *first > 0 {
                f(&l);
            }
        }
        let mut i = s;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if l[i] < big_l {
                l[i] += 1;
                break;
            }
            l[i] = -big_l;
        }
    }
}

fn frequency_phase(l: &[i64], alpha: &[f64]) -> f64 {
    frac(l.iter().zip(alpha).map(|(&c, a)| c as f64 * a).sum::<f64>())
}

fn is_unit_phase(phi: f64) -> bool {
    phi < UNIT_PHASE_TOL || phi > 1.0 - UNIT_PHASE_TOL
}

fn r_weight(l: &[i64]) -> f64 {
    l.iter()
        .map(|&c| (c.unsigned_abs().max(1)) as f64)
        .product()
}

/// `|(1/t) sum_{k=1}^t e^{2 pi i k phi}| = |sin(pi t phi) / (t sin(pi phi))|`.
fn mean_exponential_sum(phi: f64, t: usize) -> f64 {
    if is_unit_phase(phi) {
        return 1.0;
    }
    let num = (PI * (t as f64 * phi).rem_euclid(2.0)).sin().abs();
    (num / (PI * phi).sin().abs() / t as f64).min(1.0)
}

/// `2 s^2 3^(s+1) (1/L + sum_{0 < ||l||_inf <= L} |(1/t) sum_k e^{2 pi i <l, p_k>}| / r(l))`
/// with the exponential sums evaluated in closed form.
pub fn etk_bound(alpha: &RotationVector, t: usize, big_l: u32) -> Result<EtkBound> {
    etk_with(alpha, t, big_l, mean_exponential_sum)
}

/// As [`etk_bound`], with each exponential sum replaced by the geometric
/// series estimate `min(1, 2 / (t |1 - gamma|))`.
pub fn etk_bound_geometric(alpha: &RotationVector, t: usize, big_l: u32) -> Result<EtkBound> {
    etk_with(alpha, t, big_l, |phi, t| {
        if is_unit_phase(phi) {
            1.0
        } else {
            (1.0 / ((PI * phi).sin().abs() * t as f64)).min(1.0)
        }
    })
}

fn etk_with(
    alpha: &RotationVector,
    t: usize,
    big_l: u32,
    sum: impl Fn(f64, usize) -> f64,
) -> Result<EtkBound> {
    if t == 0 || big_l == 0 {
        return Err(invalid("t and L must be at least 1"));
    }
    let s = alpha.s();
    let mut total = 0.0;
    let mut flagged = Vec::new();
    for_each_half_frequency(s, big_l as i64, |l| {
        let phi = frequency_phase(l, &alpha.alpha);
        if is_unit_phase(phi) {
            flagged.push(l.to_vec());
        }
        total += 2.0 * sum(phi, t) / r_weight(l);
    });
    Ok(EtkBound {
        value: etk_constant(s) * (1.0 / big_l as f64 + total),
        flagged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtkTarget {
    pub l: u32,
    /// Smallest `t` for which the sufficient condition holds.
    pub t: f64,
}

/// `L = ceil(4 s^2 3^(s+1) / delta)` and
/// `t >= (8 / delta) s^2 3^(s+1) sum_{0 < ||l||_inf <= L} |1 - gamma_l|^(-1)`,
/// which together force the bound below `delta`.
pub fn etk_targeting(alpha: &RotationVector, delta: f64) -> Result<EtkTarget> {
    if !(delta > 0.0) {
        return Err(invalid("delta must be positive"));
    }
    let s = alpha.s();
    let c = (s * s) as f64 * 3f64.powi(s as i32 + 1);
    let big_l = (4.0 * c / delta).ceil();
    if big_l > u32::MAX as f64 || (2.0 * big_l + 1.0).powi(s as i32) > 1e9 {
        return Err(invalid(
            "delta too small: frequency range too large to enumerate",
        ));
    }
    let big_l = big_l as u32;
    let mut sum = 0.0;
    let mut dependent = false;
    for_each_half_frequency(s, big_l as i64, |l| {
        let phi = frequency_phase(l, &alpha.alpha);
        if is_unit_phase(phi) {
            dependent = true;
        }
        // |1 - gamma| = 2 |sin(pi phi)|, and l, -l both contribute
        sum += 2.0 / (2.0 * (PI * phi).sin().abs());
    });
    if dependent {
        return Err(Error::NotApplicable(
            "rotation numbers are rationally dependent within the frequency range".into(),
        ));
    }
    Ok(EtkTarget {
        l: big_l,
        t: (8.0 / delta) * c * sum,
    })
}

/// How an empirical discrepancy value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscrepancyKind {
    Exact,
    /// Maximum over sampled boxes; never exceeds the true value.
    RandomizedLowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Discrepancy {
    pub value: f64,
    pub kind: DiscrepancyKind,
}

/// `sup_B |A(B; t)/t - vol(B)|` over all boxes `B = prod [a_i, b_i)` in
/// `[0,1)^s`. Exact for `s <= 2`; for `s >= 3` a randomized lower bound
/// over [`RANDOM_BOXES`] boxes drawn from `seed`.
pub fn empirical_discrepancy(seq: &PhaseSequence, seed: u64) -> Discrepancy {
    match seq.s {
        1 => Discrepancy {
            value: exact_1d(&seq.points),
            kind: DiscrepancyKind::Exact,
        },
        2 => Discrepancy {
            value: exact_2d(&seq.coordinate(0), &seq.coordinate(1)),
            kind: DiscrepancyKind::Exact,
        },
        _ => Discrepancy {
            value: randomized_discrepancy(seq, RANDOM_BOXES, seed),
            kind: DiscrepancyKind::RandomizedLowerBound,
        },
    }
}

/// `max` for operands that are never NaN; a single compare-select.
#[inline(always)]
fn fmax(a: f64, b: f64) -> f64 {
    if a > b {
        a
    } else {
        b
    }
}

/// Largest `count/t - h (x_j - x_i)` over closed runs of consecutive points
/// (sorted `xs`). A run from position `r` to `s` holds `s - r + 1` points,
/// so the value splits into a term in `s` plus a running maximum over `r`.
fn kadane_closed(xs: impl Iterator<Item = f64>, h: f64, inv_t: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let mut left = f64::NEG_INFINITY;
    for (i, x) in xs.enumerate() {
        let fi = i as f64 * inv_t;
        left = fmax(left, h * x - fi);
        best = fmax(best, fi + inv_t - h * x + left);
    }
    best
}

/// Largest `h (b - a) - count/t` over open intervals `(a, b)` with ends in
/// `{0, 1}` or at points (sorted `xs`); `count` is the number of points
/// strictly inside.
fn kadane_open(xs: impl Iterator<Item = f64>, h: f64, inv_t: f64) -> f64 {
    // boundary j (0 = origin) contributes h b_j - (j - 1)/t on the right and
    // j/t - h b_j on the left
    let mut best = f64::NEG_INFINITY;
    let mut left = 0.0;
    let mut j = 0usize;
    for b in xs.chain(std::iter::once(1.0)) {
        j += 1;
        best = fmax(best, h * b - (j - 1) as f64 * inv_t + left);
        left = fmax(left, j as f64 * inv_t - h * b);
    }
    best
}

fn exact_1d(points: &[f64]) -> f64 {
    let mut xs = points.to_vec();
    xs.sort_by(f64::total_cmp);
    let inv_t = 1.0 / xs.len() as f64;
    kadane_closed(xs.iter().copied(), 1.0, inv_t).max(kadane_open(xs.iter().copied(), 1.0, inv_t))
}

/// `sup_b |A([0, b); t)/t - b|` for `s = 1`.
pub fn star_discrepancy_1d(points: &[f64]) -> f64 {
    let mut xs = points.to_vec();
    xs.sort_by(f64::total_cmp);
    let t = xs.len() as f64;
    let mut best: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        // [0, b) with b just above x holds i+1 points, with b = x it holds i
        best = best.max((i + 1) as f64 / t - x).max(x - i as f64 / t);
    }
    best
}

/// Active x-ranks as a bitset, iterated in rank order.
struct RankSet {
    words: Vec<u64>,
}

impl RankSet {
    fn new(t: usize, members: impl Iterator<Item = usize>) -> Self {
        let mut words = vec![0u64; t.div_ceil(64)];
        for r in members {
            words[r / 64] |= 1 << (r % 64);
        }
        RankSet { words }
    }

    fn remove(&mut self, r: usize) {
        self.words[r / 64] &= !(1 << (r % 64));
    }

    fn iter<'a>(&'a self, xs: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        self.words.iter().enumerate().flat_map(move |(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let r = k * 64 + w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(xs[r])
                }
            })
        })
    }
}

fn insert_sorted(v: &mut Vec<f64>, x: f64) {
    let at = v.partition_point(|&y| y < x);
    v.insert(at, x);
}

/// Which half of the supremum a sweep handles.
#[derive(Clone, Copy, PartialEq)]
enum Side {
    /// `count/t - area` over closed boxes with edges at point coordinates.
    Over,
    /// `area - count/t` over open boxes with edges at point coordinates or 0, 1.
    Under,
}

/// Points of the plane indexed for the strip sweeps of [`exact_2d`].
struct Plane {
    t: usize,
    inv_t: f64,
    x_sorted: Vec<f64>,
    /// Distinct y values, ascending.
    levels: Vec<f64>,
    /// x-ranks of the points on each level.
    members: Vec<Vec<usize>>,
    level_by_rank: Vec<usize>,
}

impl Plane {
    fn new(xs: &[f64], ys: &[f64]) -> Self {
        let t = xs.len();
        let mut by_x: Vec<usize> = (0..t).collect();
        by_x.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        let x_sorted: Vec<f64> = by_x.iter().map(|&i| xs[i]).collect();
        let mut levels: Vec<f64> = ys.to_vec();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let level_by_rank: Vec<usize> = by_x
            .iter()
            .map(|&i| levels.partition_point(|l| *l < ys[i]))
            .collect();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); levels.len()];
        for (r, &l) in level_by_rank.iter().enumerate() {
            members[l].push(r);
        }
        Plane {
            t,
            inv_t: 1.0 / t as f64,
            x_sorted,
            levels,
            members,
            level_by_rank,
        }
    }

    /// Bottom edges: each level for closed boxes; 0 and each level for open
    /// boxes. Paired with the lowest level strictly inside the strip.
    fn bottoms(&self, side: Side) -> Vec<(f64, usize)> {
        match side {
            Side::Over => self
                .levels
                .iter()
                .enumerate()
                .map(|(b, &y)| (y, b))
                .collect(),
            Side::Under => std::iter::once((0.0, usize::from(self.levels[0] <= 0.0)))
                .chain(self.levels.iter().enumerate().map(|(b, &y)| (y, b + 1)))
                .filter(|&(_, l)| l < self.levels.len())
                .collect(),
        }
    }

    /// Raises `best` to the largest value over all boxes with this bottom
    /// edge, or leaves it if none beats it.
    fn sweep(
        &self,
        side: Side,
        bottom: f64,
        first_level: usize,
        best: &mut f64,
        pending: &mut Vec<f64>,
    ) {
        let inv_t = self.inv_t;
        let top_levels = first_level..self.levels.len();
        let mut set = RankSet::new(
            self.t,
            (0..self.t).filter(|&r| self.level_by_rank[r] >= first_level),
        );
        // Top positions from high to low. Closed boxes put the top on a level
        // (inclusive) and drop its points after use; open boxes start at 1
        // and then sit on each level (exclusive), dropping its points first.
        let tops = match side {
            Side::Over => top_levels
                .clone()
                .rev()
                .map(|l| (self.levels[l], Some(l), None))
                .collect::<Vec<_>>(),
            Side::Under => std::iter::once((1.0, None, None))
                .chain(
                    top_levels
                        .clone()
                        .rev()
                        .map(|l| (self.levels[l], None, Some(l))),
                )
                .collect(),
        };
        let mut exact = f64::NEG_INFINITY;
        let mut exact_h = 0.0;
        // bound on the removed-point term, valid at height `known_h`
        let mut known = 0.0;
        let mut known_h = 0.0;
        // points removed since `known` was computed
        let mut fresh = 0usize;
        // points in the strip, and refresh work since the last full scan
        let mut active = (first_level..self.levels.len())
            .map(|l| self.members[l].len())
            .sum::<usize>();
        let mut spent = 0usize;
        let mut scanned = false;
        pending.clear();
        for &(top, after, before) in &tops {
            if let Some(l) = before {
                for &r in &self.members[l] {
                    set.remove(r);
                    insert_sorted(pending, self.x_sorted[r]);
                    fresh += 1;
                    active -= 1;
                }
            }
            let h = top - bottom;
            // Over: the removed-point term grows by at most the height lost
            // and new removals only lower it. Under: it shrinks as the height
            // drops and each new removal adds at most 1/t.
            let bound = |known: f64, known_h: f64, fresh: usize| match side {
                Side::Over => known + (known_h - h),
                Side::Under => known + fresh as f64 * inv_t,
            };
            let mut evaluate = !scanned || exact + bound(known, known_h, fresh) > *best;
            // Refresh the removed-point bound unless that has already cost
            // as much as a full scan.
            if scanned && evaluate && spent < active {
                spent += pending.len();
                let dh = exact_h - h;
                known = match side {
                    Side::Over => kadane_open(pending.iter().copied(), dh, inv_t),
                    Side::Under => kadane_closed(pending.iter().copied(), dh, inv_t).max(0.0),
                };
                known_h = h;
                fresh = 0;
                evaluate = exact + known > *best;
            }
            if evaluate {
                exact = match side {
                    Side::Over => kadane_closed(set.iter(&self.x_sorted), h, inv_t),
                    Side::Under => kadane_open(set.iter(&self.x_sorted), h, inv_t),
                };
                *best = best.max(exact);
                exact_h = h;
                known = 0.0;
                known_h = h;
                fresh = 0;
                spent = 0;
                scanned = true;
                pending.clear();
            }
            if let Some(l) = after {
                for &r in &self.members[l] {
                    set.remove(r);
                    insert_sorted(pending, self.x_sorted[r]);
                }
                active -= self.members[l].len();
            }
        }
    }
}

/// Exact all-box discrepancy in the plane.
///
/// For every bottom edge the top edge sweeps downwards over the points of
/// the strip, kept as a bitset over x-ranks. A full x-scan (Kadane) is only
/// run when a bound on the strip value can beat the best value so far: after
/// the last scan the value of any x-interval changes only through the points
/// removed since and the height lost, and that change is bounded by a scan
/// over the removed points alone, plus `1/t` or the height decrement for
/// each further removal. A first pass over a sample of bottom edges raises
/// the best value early so the full pass prunes well.
fn exact_2d(xs: &[f64], ys: &[f64]) -> f64 {
    let plane = Plane::new(xs, ys);
    // A box spanning the full height (or width) is a 1-D box.
    let mut best = exact_1d(xs).max(exact_1d(ys));
    let mut pending = Vec::new();
    let sides = [Side::Over, Side::Under];
    let stride = (plane.t / 64).max(1);
    for pass in [true, false] {
        for side in sides {
            for (i, (bottom, first)) in plane.bottoms(side).into_iter().enumerate() {
                if (i % stride == 0) == pass {
                    plane.sweep(side, bottom, first, &mut best, &mut pending);
                }
            }
        }
    }
    best
}

/// Maximum of `|A/t - vol|` over randomly drawn closed and open boxes whose
/// edges sit at point coordinates or at 0 and 1. Work is split into 64 fixed
/// blocks, block `i` drawing from ChaCha8 stream `i`, so the result does not
/// depend on the thread count.
pub fn randomized_discrepancy(seq: &PhaseSequence, boxes: usize, seed: u64) -> f64 {
    const BLOCKS: usize = 64;
    let s = seq.s;
    let t = seq.len();
    let inv_t = 1.0 / t as f64;
    let coords: Vec<Vec<f64>> = (0..s)
        .map(|j| {
            let mut c = seq.coordinate(j);
            c.push(0.0);
            c.push(1.0);
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        })
        .collect();
    (0..BLOCKS)
        .into_par_iter()
        .map(|block| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block as u64);
            let count = boxes / BLOCKS + usize::from(block < boxes % BLOCKS);
            let mut lo = vec![0.0; s];
            let mut hi = vec![0.0; s];
            let mut best: f64 = 0.0;
            for _ in 0..count {
                for j in 0..s {
                    let c = &coords[j];
                    let a = c[rng.random_range(0..c.len())];
                    let b = c[rng.random_range(0..c.len())];
                    lo[j] = a.min(b);
                    hi[j] = a.max(b);
                }
                let (mut closed, mut open) = (0usize, 0usize);
                for k in 0..t {
                    let p = seq.point(k);
                    let mut inside_closed = true;
                    let mut inside_open = true;
                    for j in 0..s {
                        if p[j] < lo[j] || p[j] > hi[j] {
                            inside_closed = false;
                            inside_open = false;
                            break;
                        }
                        if p[j] == lo[j] || p[j] == hi[j] {
                            inside_open = false;
                        }
                    }
                    closed += usize::from(inside_closed);
                    open += usize::from(inside_open);
                }
                let vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
                best = best
                    .max(closed as f64 * inv_t - vol)
                    .max(vol - open as f64 * inv_t);
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyRow {
    pub t: usize,
    pub empirical: f64,
    pub etk_bound: f64,
    pub l: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyReport {
    pub alpha: Vec<f64>,
    pub kind: DiscrepancyKind,
    pub rows: Vec<DiscrepancyRow>,
    /// Frequencies at which the bound met `gamma = 1`.
    pub flagged: Vec<Vec<i64>>,
}

impl DiscrepancyReport {
    /// `t, empirical_D, etk_bound, L` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["t", "empirical_D", "etk_bound", "L"])?;
        for r in &self.rows {
            wtr.write_record([
                r.t.to_string(),
                r.empirical.to_string(),
                r.etk_bound.to_string(),
                r.l.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn discrepancy_report(
    alpha: &RotationVector,
    t_grid: &[usize],
    big_l: u32,
    seed: u64,
) -> Result<DiscrepancyReport> {
    let mut rows = Vec::with_capacity(t_grid.len());
    let mut flagged = Vec::new();
    let mut kind = DiscrepancyKind::Exact;
    for &t in t_grid {
        let seq = phase_sequence(alpha, t)?;
        let d = empirical_discrepancy(&seq, seed);
        kind = d.kind;
        let etk = etk_bound(alpha, t, big_l)?;
        flagged = etk.flagged;
        rows.push(DiscrepancyRow {
            t,
            empirical: d.value,
            etk_bound: etk.value,
            l: big_l,
        });
    }
    Ok(DiscrepancyReport {
        alpha: alpha.alpha.clone(),
        kind,
        rows,
        flagged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Relation {
    pub l: Vec<i64>,
    pub l0: i64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DependenceReport {
    pub alpha: Vec<f64>,
    pub l_max: u32,
    pub tol: f64,
    /// Near-relations `<l, alpha> ~ l0`, one per `+-l`. Empty means none was
    /// found up to `l_max`, not that none exists.
    pub relations: Vec<Relation>,
}

/// Tests every `0 < ||l||_inf <= l_max` (up to sign) for `|<l, alpha> - l0| < tol`
/// with `l0` the nearest integer.
pub fn dependence_scan(alpha: &RotationVector, l_max: u32, tol: f64) -> Result<DependenceReport> {
    if l_max == 0 {
        return Err(invalid("L_max must be at least 1"));
    }
    let s = alpha.s();
    if (2.0 * l_max as f64 + 1.0).powi(s as i32) > 1e10 {
        return Err(invalid("frequency range too large to enumerate"));
    }
    let bound = l_max as i64 * s as i64;
    let mut relations = Vec::new();
    for_each_half_frequency(s, l_max as i64, |l| {
        let dot: f64 = l.iter().zip(&alpha.alpha).map(|(&c, a)| c as f64 * a).sum();
        let l0 = dot.round() as i64;
        let residual = (dot - l0 as f64).abs();
        if residual < tol && l0.abs() <= bound {
            relations.push(Relation {
                l: l.to_vec(),
                l0,
                residual,
            });
        }
    });
    Ok(DependenceReport {
        alpha: alpha.alpha.clone(),
        l_max,
        tol,
        relations,
    })
}
