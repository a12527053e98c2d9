//! Closed-form spectrum of the convolution operator
//! `F_C = p I + (1 - p)/|C| sum_{h in C} S_h` on `(Z/nZ)^m`.
//!
//! The characters `psi^v_u = omega^<u,v>` diagonalise every such operator, so
//! each eigenvalue is a short sum of roots of unity. Nothing here builds
//! the `N x N` matrix.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::lattice::{pairing, spans, ConvolutionSet, GroupParams, LatticePoint};
use crate::roots::RootTable;

/// Relative tolerance for modulus equality (membership in `W`, angle
/// de-duplication, multiplicity grouping).
pub const EPS_EQ: f64 = 1e-9;

/// Absolute margin on `p` below which a system counts as irregular.
pub const EPS_REG: f64 = 1e-6;

/// `|Im lambda| / |lambda|` below which an eigenvalue is treated as real and
/// its angle snapped to `0` or `n/2`.
pub const REAL_TOL: f64 = 1e-12;

/// Moduli within this distance of 1 are treated as dominant.
const UNIT_TOL: f64 = 1e-12;

/// Checks `1/N < p < 1`.
pub fn check_p(p: f64, g: &GroupParams) -> Result<()> {
    let lo = 1.0 / g.order() as f64;
    if !(p > lo && p < 1.0) {
        return Err(invalid(format!(
            "self-confidence p = {p} outside ({lo}, 1)"
        )));
    }
    Ok(())
}

fn check_p_extended(p: f64) -> Result<()> {
    if !(0.0..1.0).contains(&p) {
        return Err(invalid(format!("self-confidence p = {p} outside [0, 1)")));
    }
    Ok(())
}

fn check_spans(c: &ConvolutionSet, g: &GroupParams) -> Result<()> {
    if c.elements().iter().any(|h| h.dim() != g.m() as usize) {
        return Err(invalid(
            "convolution set dimension does not match the group",
        ));
    }
    if !spans(c, g) {
        return Err(Error::NotSpanning);
    }
    Ok(())
}

/// `(1/|C|) sum_{h in C} omega^<v,h>` for every `v`, in lexicographic order.
pub(crate) fn normalized_sums(c: &ConvolutionSet, g: &GroupParams) -> Vec<Complex64> {
    let roots = RootTable::new(g.n());
    let scale = 1.0 / c.len() as f64;
    g.points()
        .map(|v| {
            let (mut re, mut im) = (0.0, 0.0);
            for h in c.elements() {
                let k = pairing(v.coords(), h.coords(), g.n());
                re += roots.cos(k);
                im += roots.sin(k);
            }
            Complex64::new(re * scale, im * scale)
        })
        .collect()
}

fn eigenvalue_from_sum(is_origin: bool, sum: Complex64, p: f64) -> Complex64 {
    if is_origin {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(p, 0.0) + sum * (1.0 - p)
    }
}

/// `lambda_v = p + (1-p)/|C| sum_{h in C} omega^<v,h>`.
pub fn eigenvalue(
    v: &LatticePoint,
    c: &ConvolutionSet,
    p: f64,
    g: &GroupParams,
) -> Result<Complex64> {
    check_p(p, g)?;
    if v.dim() != g.m() as usize || v.coords().iter().any(|&x| x >= g.n()) {
        return Err(invalid(format!("{v} is not a point of the group")));
    }
    let roots = RootTable::new(g.n());
    let (mut re, mut im) = (0.0, 0.0);
    for h in c.elements() {
        let k = pairing(v.coords(), h.coords(), g.n());
        re += roots.cos(k);
        im += roots.sin(k);
    }
    let sum = Complex64::new(re, im) / c.len() as f64;
    Ok(eigenvalue_from_sum(v.is_origin(), sum, p))
}

/// Eigenvalues for every `v` in lexicographic order, for `p` in `[0, 1)`.
pub(crate) fn all_eigenvalues(c: &ConvolutionSet, p: f64, g: &GroupParams) -> Vec<Complex64> {
    normalized_sums(c, g)
        .into_iter()
        .enumerate()
        .map(|(i, s)| eigenvalue_from_sum(i == 0, s, p))
        .collect()
}

/// Angle `theta` with `lambda = |lambda| omega^theta`, in `(-n/2, n/2]`.
/// Real eigenvalues get exactly `0` or `n/2`.
pub fn angle(lambda: Complex64, n: u32) -> f64 {
    let modulus = lambda.norm();
    if modulus == 0.0 {
        return 0.0;
    }
    let half = n as f64 / 2.0;
    if lambda.im.abs() <= REAL_TOL * modulus {
        return if lambda.re >= 0.0 { 0.0 } else { half };
    }
    let theta = lambda.im.atan2(lambda.re) * n as f64 / TAU;
    if theta <= -half {
        half
    } else {
        theta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eigenpair {
    pub v: LatticePoint,
    #[serde(serialize_with = "ser_complex")]
    pub lambda: Complex64,
    pub modulus: f64,
    pub theta: f64,
}

impl Eigenpair {
    pub fn is_real(&self) -> bool {
        self.lambda.im.abs() <= REAL_TOL * self.modulus
    }
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Multiplicity {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    pub count: usize,
}

/// Full spectral picture of one convolution system.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub group: GroupParams,
    pub p: f64,
    pub set_size: usize,
    /// All `N` eigenpairs in lexicographic order of `v`.
    pub pairs: Vec<Eigenpair>,
    /// Subdominant modulus `lambda = max{|lambda_v| < 1}`.
    pub lambda_sub: f64,
    /// Indices (into `pairs`) of the subdominant set `W`.
    pub w: Vec<usize>,
    /// Largest ratio `|lambda_v| / lambda` strictly below 1, if any mode
    /// outside `W` and the origin exists.
    pub mu: Option<f64>,
    /// Distinct positive angles of nonreal subdominant eigenvalues, ascending.
    pub vartheta: Vec<f64>,
    /// `vartheta / n`.
    pub rotation_numbers: Vec<f64>,
    pub multiplicities: Vec<Multiplicity>,
}

/// Result of [`rotation_angle`].
#[derive(Debug, Clone, PartialEq)]
pub enum RotationAngle {
    None,
    Single(f64),
    Multiple(Vec<f64>),
}

impl SpectrumReport {
    pub fn w_points(&self) -> Vec<LatticePoint> {
        self.w.iter().map(|&i| self.pairs[i].v.clone()).collect()
    }

    pub fn in_w(&self, index: usize) -> bool {
        self.w.binary_search(&index).is_ok()
    }

    /// Distinct eigenvalues carried by `W`.
    pub fn w_eigenvalues(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = Vec::new();
        for &i in &self.w {
            let l = self.pairs[i].lambda;
            if !out
                .iter()
                .any(|&o| (o - l).norm() <= EPS_EQ * self.lambda_sub)
            {
                out.push(l);
            }
        }
        out
    }

    /// Writes `v_1..v_m, re, im, modulus, theta, in_W` rows in lexicographic order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let m = self.group.m() as usize;
        let mut header: Vec<String> = (1..=m).map(|i| format!("v_{i}")).collect();
        header.extend(["re", "im", "modulus", "theta", "in_W"].map(String::from));
        wtr.write_record(&header)?;
        for (i, pair) in self.pairs.iter().enumerate() {
            let mut row: Vec<String> = pair.v.coords().iter().map(|c| c.to_string()).collect();
            row.push(pair.lambda.re.to_string());
            row.push(pair.lambda.im.to_string());
            row.push(pair.modulus.to_string());
            row.push(pair.theta.to_string());
            row.push(u8::from(self.in_w(i)).to_string());
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn summary(&self, verdict: Option<&RegularityVerdict>) -> SpectrumSummary {
        SpectrumSummary {
            n: self.group.n(),
            m: self.group.m(),
            order: self.group.order(),
            p: self.p,
            lambda: self.lambda_sub,
            mu: self.mu,
            w: self
                .w
                .iter()
                .map(|&i| self.group.signed_coords(&self.pairs[i].v))
                .collect(),
            vartheta: self.vartheta.clone(),
            rotation_numbers: self.rotation_numbers.clone(),
            regular: verdict.map(|v| v.is_regular),
            nearest_excluded: verdict.and_then(|v| v.nearest_excluded),
        }
    }
}

/// JSON summary of a [`SpectrumReport`].
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    pub n: u32,
    pub m: u32,
    #[serde(rename = "N")]
    pub order: usize,
    pub p: f64,
    pub lambda: f64,
    pub mu: Option<f64>,
    #[serde(rename = "W")]
    pub w: Vec<Vec<i64>>,
    pub vartheta: Vec<f64>,
    pub rotation_numbers: Vec<f64>,
    pub regular: Option<bool>,
    pub nearest_excluded: Option<f64>,
}

/// Computes all eigenpairs and the derived quantities `lambda`, `W`, `mu`,
/// `vartheta` and the multiplicity map. Requires `1/N < p < 1` and a spanning set.
pub fn full_spectrum(c: &ConvolutionSet, p: f64, g: &GroupParams) -> Result<SpectrumReport> {
    check_p(p, g)?;
    check_spans(c, g)?;
    build_report(c, p, g)
}

/// Same as [`full_spectrum`] but accepts any `p` in `[0, 1)`.
///
/// At the boundary `p <= 1/N` the operator may lose primitivity and further
/// modes can sit on the unit circle; those are treated like the dominant one
/// and excluded from `lambda`. Used for limiting cases such as `p = 0`.
pub fn full_spectrum_extended(
    c: &ConvolutionSet,
    p: f64,
    g: &GroupParams,
) -> Result<SpectrumReport> {
    check_p_extended(p)?;
    check_spans(c, g)?;
    build_report(c, p, g)
}

fn build_report(c: &ConvolutionSet, p: f64, g: &GroupParams) -> Result<SpectrumReport> {
    let n = g.n();
    let pairs: Vec<Eigenpair> = all_eigenvalues(c, p, g)
        .into_iter()
        .zip(g.points())
        .map(|(lambda, v)| Eigenpair {
            v,
            lambda,
            modulus: lambda.norm(),
            theta: angle(lambda, n),
        })
        .collect();

    let lambda_sub = pairs
        .iter()
        .skip(1)
        .map(|e| e.modulus)
        .filter(|&r| r < 1.0 - UNIT_TOL)
        .fold(f64::NEG_INFINITY, f64::max);
    if !lambda_sub.is_finite() {
        return Err(Error::NotApplicable(
            "no eigenvalue strictly inside the unit circle".into(),
        ));
    }
    if lambda_sub <= 0.0 {
        return Err(Error::NotApplicable(
            "every nonzero mode has eigenvalue 0".into(),
        ));
    }

    let in_w = |r: f64| r < 1.0 - UNIT_TOL && (r - lambda_sub).abs() <= EPS_EQ * lambda_sub;
    let w: Vec<usize> = (1..pairs.len())
        .filter(|&i| in_w(pairs[i].modulus))
        .collect();

    let mu = pairs
        .iter()
        .skip(1)
        .map(|e| e.modulus)
        .filter(|&r| r < 1.0 - UNIT_TOL && !in_w(r))
        .map(|r| r / lambda_sub)
        .reduce(f64::max);

    let half = n as f64 / 2.0;
    let mut thetas: Vec<f64> = w
        .iter()
        .map(|&i| pairs[i].theta)
        .filter(|&t| t > 0.0 && t < half)
        .collect();
    thetas.sort_by(f64::total_cmp);
    let mut vartheta: Vec<f64> = Vec::new();
    for t in thetas {
        match vartheta.last() {
            Some(&last) if (t - last).abs() <= EPS_EQ * last.max(1.0) => {}
            _ => vartheta.push(t),
        }
    }
    let rotation_numbers = vartheta.iter().map(|t| t / n as f64).collect();

    let multiplicities = multiplicity_map(pairs.iter().map(|e| e.lambda));

    Ok(SpectrumReport {
        group: *g,
        p,
        set_size: c.len(),
        pairs,
        lambda_sub,
        w,
        mu,
        vartheta,
        rotation_numbers,
        multiplicities,
    })
}

fn multiplicity_map(values: impl Iterator<Item = Complex64>) -> Vec<Multiplicity> {
    let mut vals: Vec<Complex64> = values.collect();
    vals.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out: Vec<Multiplicity> = Vec::new();
    'outer: for z in vals {
        // Clusters are tiny and sorted by real part; scan back over the ones
        // whose real part is still within tolerance.
        for m in out.iter_mut().rev() {
            if z.re - m.value.re > EPS_EQ {
                break;
            }
            if (z - m.value).norm() <= EPS_EQ {
                m.count += 1;
                continue 'outer;
            }
        }
        out.push(Multiplicity { value: z, count: 1 });
    }
    out
}

/// `theta / n` for the unique angle, none when `vartheta` is empty.
pub fn rotation_angle(report: &SpectrumReport) -> RotationAngle {
    match report.rotation_numbers.as_slice() {
        [] => RotationAngle::None,
        [a] => RotationAngle::Single(*a),
        many => RotationAngle::Multiple(many.to_vec()),
    }
}

/// The finite set of self-confidence values at which two non-conjugate
/// eigenvalues can share a modulus, and where the given `p` sits relative
/// to it.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityVerdict {
    /// Excluded values inside `(1/N, 1)`, ascending and de-duplicated.
    pub excluded_p: Vec<f64>,
    pub is_regular: bool,
    /// Distance from `p` to the nearest excluded value, none if the set is empty.
    pub nearest_excluded: Option<f64>,
}

/// Enumerates `p_{u,v} = (|a|^2 - |b|^2) / (2 Re(b - a) + |a|^2 - |b|^2)` over
/// pairs of modes, where `a`, `b` are the normalised character sums. Pairs
/// with equal or conjugate sums give a zero denominator and contribute
/// nothing.
pub fn regularity(c: &ConvolutionSet, p: f64, g: &GroupParams) -> Result<RegularityVerdict> {
    check_p(p, g)?;
    check_spans(c, g)?;
    let sums = normalized_sums(c, g);

    // p_{u,v} depends only on (Re a, |Im a|); collapse modes to those classes.
    let mut classes: Vec<(f64, f64)> = sums[1..].iter().map(|s| (s.re, s.im.abs())).collect();
    classes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    classes.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-12 && (a.1 - b.1).abs() <= 1e-12);

    let lo = 1.0 / g.order() as f64;
    let mut excluded = Vec::new();
    for (i, &(ar, ai)) in classes.iter().enumerate() {
        let a2 = ar * ar + ai * ai;
        for &(br, bi) in &classes[i + 1..] {
            let b2 = br * br + bi * bi;
            let num = a2 - b2;
            let den = 2.0 * (br - ar) + num;
            if den.abs() <= 1e-12 {
                continue;
            }
            let puv = num / den;
            if puv > lo && puv < 1.0 {
                excluded.push(puv);
            }
        }
    }
    excluded.sort_by(f64::total_cmp);
    excluded.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);

    let nearest_excluded = excluded.iter().map(|&q| (q - p).abs()).reduce(f64::min);
    Ok(RegularityVerdict {
        is_regular: nearest_excluded.is_none_or(|d| d > EPS_REG),
        excluded_p: excluded,
        nearest_excluded,
    })
}

/// Outcome of checking the basis prediction against the computed spectrum.
#[derive(Debug, Clone)]
pub struct CbasisCheck {
    /// `p + ((1-p)/m)(m - 1 + omega) = 1 + ((1-p)/m)(omega - 1)`; its conjugate
    /// is the other predicted value.
    pub predicted: Complex64,
    /// `p + ((1-p)/m)(omega - 1)`, kept for comparison; it is not an
    /// eigenvalue of the operator in general.
    pub alternative_form: Complex64,
    pub w_size: usize,
    /// `|W| = 2m` and every eigenvalue carried by `W` equals the prediction
    /// or its conjugate.
    pub agrees: bool,
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// For a basis `C` of `V` with `n` prime, predicts the subdominant pair and
/// compares with [`full_spectrum`].
///
/// The prediction is only the subdominant one for large enough `p`
/// (`p > 1/(m+1)` suffices for the all-ones competitor); below that
/// `agrees` comes back false.
pub fn cbasis_eigencheck(c: &ConvolutionSet, p: f64, g: &GroupParams) -> Result<CbasisCheck> {
    let m = g.m() as usize;
    if !is_prime(g.n()) {
        return Err(Error::PreconditionViolation(format!(
            "modulus {} is not prime",
            g.n()
        )));
    }
    if c.len() != m || !spans(c, g) {
        return Err(Error::PreconditionViolation(
            "convolution set is not a basis".into(),
        ));
    }
    let report = full_spectrum(c, p, g)?;
    let omega = Complex64::from_polar(1.0, TAU / g.n() as f64);
    let step = (1.0 - p) / m as f64;
    let predicted = Complex64::new(1.0, 0.0) + (omega - 1.0) * step;
    let alternative_form = Complex64::new(p, 0.0) + (omega - 1.0) * step;
    let tol = EPS_EQ.max(1e-12);
    let agrees = report.w.len() == 2 * m
        && report.w.iter().all(|&i| {
            let l = report.pairs[i].lambda;
            (l - predicted).norm() <= tol || (l - predicted.conj()).norm() <= tol
        });
    Ok(CbasisCheck {
        predicted,
        alternative_form,
        w_size: report.w.len(),
        agrees,
    })
}

/// `ln((1-p)/n) + N ln(1/(2N))`, the log of the rotation-number lower bound.
pub fn speed_bound_log(p: f64, g: &GroupParams) -> f64 {
    let order = g.order() as f64;
    (1.0 - p).ln() - (g.n() as f64).ln() - order * (2.0 * order).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedBound {
    pub log_bound: f64,
    /// Log of the smallest rotation number in the report.
    pub log_alpha: f64,
    pub holds: bool,
}

pub fn speed_lower_bound(report: &SpectrumReport) -> Result<SpeedBound> {
    let alpha = report
        .rotation_numbers
        .first()
        .copied()
        .ok_or_else(|| Error::NotApplicable("no rotating subdominant mode".into()))?;
    let log_bound = speed_bound_log(report.p, &report.group);
    let log_alpha = alpha.ln();
    Ok(SpeedBound {
        log_bound,
        log_alpha,
        holds: log_alpha >= log_bound,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScanFlag {
    /// `p` outside `(1/N, 1)`.
    OutOfRange,
    /// Within `EPS_REG` of an excluded value.
    Irregular,
    /// Regular, but `vartheta` does not hold exactly one angle.
    AngleCount(usize),
}

#[derive(Debug, Clone)]
pub struct MonotonicityScan {
    /// `(p, rotation number)` for every usable grid point.
    pub points: Vec<(f64, f64)>,
    pub flagged: Vec<(f64, ScanFlag)>,
    pub nonincreasing: bool,
}

/// Rotation number across an ascending grid of `p` values.
pub fn monotonicity_scan(
    c: &ConvolutionSet,
    g: &GroupParams,
    p_grid: &[f64],
) -> Result<MonotonicityScan> {
    if p_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("p grid must be strictly ascending"));
    }
    check_spans(c, g)?;
    let mut points = Vec::new();
    let mut flagged = Vec::new();
    for &p in p_grid {
        if check_p(p, g).is_err() {
            flagged.push((p, ScanFlag::OutOfRange));
            continue;
        }
        if !regularity(c, p, g)?.is_regular {
            flagged.push((p, ScanFlag::Irregular));
            continue;
        }
        let report = full_spectrum(c, p, g)?;
        match rotation_angle(&report) {
            RotationAngle::Single(alpha) => points.push((p, alpha)),
            RotationAngle::None => flagged.push((p, ScanFlag::AngleCount(0))),
            RotationAngle::Multiple(v) => flagged.push((p, ScanFlag::AngleCount(v.len()))),
        }
    }
    let nonincreasing = points.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
    Ok(MonotonicityScan {
        points,
        flagged,
        nonincreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(n: u32, m: u32, c: &str) -> (GroupParams, ConvolutionSet) {
        let g = GroupParams::new(n, m).unwrap();
        let c = ConvolutionSet::parse(&g, c).unwrap();
        (g, c)
    }

    const FOUR_NEIGHBOURS: &str = "(1,0);(0,1);(-1,0);(0,-1)";

    #[test]
    fn origin_eigenvalue_is_exactly_one() {
        let (g, c) = setup(7, 2, "(1,0);(0,1);(2,3)");
        for p in [0.03, 0.3, 0.77, 0.999] {
            assert_eq!(
                eigenvalue(&g.origin(), &c, p, &g).unwrap(),
                Complex64::new(1.0, 0.0)
            );
        }
    }

    #[test]
    fn four_neighbour_closed_form() {
        let (g, c) = setup(5, 2, FOUR_NEIGHBOURS);
        let v = g.point(&[1, 0]).unwrap();
        let l = eigenvalue(&v, &c, 0.5, &g).unwrap();
        // 0.5 + 0.25 (cos 72deg + 1)
        assert!((l.re - 0.827_254_248_593_736_8).abs() < 1e-12);
        assert!(l.im.abs() < 1e-15);
        for v in g.points() {
            let c1 = (TAU * v.coords()[0] as f64 / 5.0).cos();
            let c2 = (TAU * v.coords()[1] as f64 / 5.0).cos();
            let expect = 0.3 + 0.35 * (c1 + c2);
            let l = eigenvalue(&v, &c, 0.3, &g).unwrap();
            assert!((l.re - expect).abs() < 1e-12 && l.im == 0.0);
        }
    }

    #[test]
    fn eigenvalue_rejects_p_outside_range() {
        let (g, c) = setup(5, 2, "(1,0);(0,1)");
        let v = g.point(&[1, 0]).unwrap();
        for p in [0.0, 1.0 / 25.0, 1.0, 1.5, f64::NAN] {
            assert!(matches!(
                eigenvalue(&v, &c, p, &g),
                Err(Error::InvalidArgument(_))
            ));
        }
    }

    #[test]
    fn example_one_w_is_the_convolution_set() {
        let (g, c) = setup(29, 2, FOUR_NEIGHBOURS);
        let r = full_spectrum(&c, 0.3, &g).unwrap();
        assert_eq!(r.w_points(), c.elements());
        assert!(r.vartheta.is_empty());
        assert_eq!(rotation_angle(&r), RotationAngle::None);
        let expect = 0.3 + 0.5 * 0.7 * (1.0 + (TAU / 29.0).cos());
        assert!((r.lambda_sub - expect).abs() < 1e-12);
    }

    #[test]
    fn example_two_subdominant_set_depends_on_p() {
        let (g, c) = setup(29, 2, "(1,0);(0,1)");
        // Above p = 1/3 the one-hot duals are subdominant.
        let r = full_spectrum(&c, 0.5, &g).unwrap();
        let w: Vec<_> = r.w_points().iter().map(|v| g.signed_coords(v)).collect();
        assert_eq!(w, vec![vec![0, 1], vec![0, -1], vec![1, 0], vec![-1, 0]]);
        assert_eq!(r.vartheta.len(), 1);
        // Below p = 1/3 the diagonal pair (1,1), (-1,-1) takes over.
        let r = full_spectrum(&c, 0.3, &g).unwrap();
        let w: Vec<_> = r.w_points().iter().map(|v| g.signed_coords(v)).collect();
        assert_eq!(w, vec![vec![1, 1], vec![-1, -1]]);
    }

    #[test]
    fn example_two_theta_formula() {
        let n = 29u32;
        let (g, c) = setup(n, 2, "(1,0);(0,1)");
        let nf = n as f64;
        for p in [0.35, 0.5, 0.7, 0.9] {
            let r = full_spectrum(&c, p, &g).unwrap();
            let s = (TAU / nf).sin();
            let co = (TAU / nf).cos();
            let theta = nf / TAU * ((1.0 - p) * s / (1.0 + p + (1.0 - p) * co)).atan();
            assert_eq!(r.vartheta.len(), 1);
            assert!((r.vartheta[0] - theta).abs() < 1e-12, "p={p}");
            let lam = 0.5 * Complex64::new(1.0 + p + (1.0 - p) * co, (1.0 - p) * s).norm();
            assert!((r.lambda_sub - lam).abs() < 1e-12);
        }
    }

    #[test]
    fn example_two_at_p_zero_gives_half_angle() {
        let n = 29;
        let (g, c) = setup(n, 2, "(1,0);(0,1)");
        assert!(full_spectrum(&c, 0.0, &g).is_err());
        let r = full_spectrum_extended(&c, 0.0, &g).unwrap();
        // |lambda_v| = |cos(pi (v_1 - v_2) / n)|, so every v with v_1 - v_2 = +-1
        // is subdominant, not only the basis duals.
        assert_eq!(r.w.len(), 2 * n as usize);
        assert!((r.lambda_sub - (std::f64::consts::PI / n as f64).cos()).abs() < 1e-12);
        for e in [[1, 0], [0, 1]] {
            let i = g.index_of(&g.point(&e).unwrap());
            assert!(r.in_w(i));
            assert!((r.pairs[i].theta - 0.5).abs() < 1e-12);
        }
        assert!(r.vartheta.len() > 1);
        assert!((r.rotation_numbers[0] - 1.0 / (2.0 * n as f64)).abs() < 1e-14);
    }

    #[test]
    fn example_three_subdominant_set() {
        let (g, c) = setup(29, 2, "(1,0);(0,1);(2,3)");
        let r = full_spectrum(&c, 0.25, &g).unwrap();
        let mut w: Vec<_> = r.w_points().iter().map(|v| g.signed_coords(v)).collect();
        w.sort();
        assert_eq!(w, vec![vec![-1, 0], vec![-1, 1], vec![1, -1], vec![1, 0]]);
        assert_eq!(r.vartheta.len(), 2);
        let nf = 29.0;
        let (s1, c1) = ((TAU / nf).sin(), (TAU / nf).cos());
        let (s2, c2) = ((2.0 * TAU / nf).sin(), (2.0 * TAU / nf).cos());
        let theta1 = nf / TAU * ((s1 + s2) / (2.0 + c1 + c2)).atan();
        let theta2 = (nf / TAU * (-s1 / (1.0 + 3.0 * c1)).atan()).abs();
        assert!((r.vartheta[1] - theta1).abs() < 1e-12);
        assert!((r.vartheta[0] - theta2).abs() < 1e-12);
    }

    #[test]
    fn w_closed_under_negation_and_angles_bounded() {
        for (n, m, cs, p) in [
            (7, 2, "(1,0);(0,1)", 0.3),
            (11, 2, "(1,0);(0,1);(2,3)", 0.6),
            (9, 1, "(1);(3)", 0.2),
            (6, 2, "(1,0);(0,1);(1,1)", 0.4),
        ] {
            let (g, c) = setup(n, m, cs);
            let r = full_spectrum(&c, p, &g).unwrap();
            for &i in &r.w {
                let neg = g.neg_index(i);
                assert!(r.in_w(neg));
            }
            for &t in &r.vartheta {
                assert!(t > 0.0 && t <= n as f64 / 2.0);
            }
            assert!(r.lambda_sub > 0.0 && r.lambda_sub < 1.0);
            if let Some(mu) = r.mu {
                assert!(mu < 1.0);
            }
        }
    }

    #[test]
    fn regularity_of_example_two() {
        let (g, c) = setup(7, 2, "(1,0);(0,1)");
        let v = regularity(&c, 0.3, &g).unwrap();
        assert!(v.is_regular);
        assert!(v.excluded_p.len() <= 49 * 48 / 2);
        assert!(v.excluded_p.iter().any(|&q| (q - 1.0 / 3.0).abs() < 1e-12));
        let r = full_spectrum(&c, 0.3, &g).unwrap();
        assert_eq!(r.vartheta.len(), 1);
    }

    #[test]
    fn excluded_value_is_irregular() {
        let (g, c) = setup(7, 2, "(1,0);(0,1)");
        let v = regularity(&c, 0.3, &g).unwrap();
        let q = v.excluded_p[v.excluded_p.len() / 2];
        let at = regularity(&c, q, &g).unwrap();
        assert!(!at.is_regular);
        assert_eq!(at.nearest_excluded, Some(0.0));
    }

    #[test]
    fn conjugate_pair_contributes_nothing() {
        // m = 1, C = {1}: every mode pairs only with its own conjugate or with
        // modes of a different modulus curve; the conjugate pair (1, n-1) has a
        // zero denominator.
        let (g, c) = setup(5, 1, "(1)");
        let sums = normalized_sums(&c, &g);
        let (a, b) = (sums[1], sums[4]);
        let den = 2.0 * (b.re - a.re) + a.norm_sqr() - b.norm_sqr();
        assert!(den.abs() < 1e-15);
    }

    #[test]
    fn cbasis_prediction() {
        let (g, c) = setup(5, 2, "(1,0);(0,1)");
        let chk = cbasis_eigencheck(&c, 0.5, &g).unwrap();
        assert!(chk.agrees);
        assert_eq!(chk.w_size, 4);
        // below p = 1/(m+1) the all-ones dual overtakes the basis duals
        let chk = cbasis_eigencheck(&c, 0.2, &g).unwrap();
        assert!(!chk.agrees);
        assert_eq!(chk.w_size, 2);

        let (g, c) = setup(29, 2, "(1,0);(0,2)");
        let chk = cbasis_eigencheck(&c, 0.5, &g).unwrap();
        assert!(chk.agrees);
        assert_eq!(chk.w_size, 4);

        let (g, c) = setup(6, 2, "(1,0);(0,1)");
        assert!(matches!(
            cbasis_eigencheck(&c, 0.5, &g),
            Err(Error::PreconditionViolation(_))
        ));
        let (g, c) = setup(5, 2, "(1,0);(0,1);(1,1)");
        assert!(matches!(
            cbasis_eigencheck(&c, 0.5, &g),
            Err(Error::PreconditionViolation(_))
        ));
    }

    #[test]
    fn speed_bound_examples() {
        let g = GroupParams::new(5, 1).unwrap();
        let lb = speed_bound_log(0.5, &g);
        assert!((lb - (-6.0 * 10f64.ln())).abs() < 1e-12);
        assert!(speed_bound_log(1.0 - 1e-300, &g) < -600.0);
        assert_eq!(speed_bound_log(1.0, &g), f64::NEG_INFINITY);

        let (g, c) = setup(7, 2, "(1,0);(0,1)");
        let r = full_spectrum(&c, 0.3, &g).unwrap();
        assert!(speed_lower_bound(&r).unwrap().holds);

        let (g, c) = setup(29, 2, FOUR_NEIGHBOURS);
        let r = full_spectrum(&c, 0.3, &g).unwrap();
        assert!(matches!(
            speed_lower_bound(&r),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn monotonicity_on_example_two() {
        let (g, c) = setup(7, 2, "(1,0);(0,1)");
        let grid: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
        let scan = monotonicity_scan(&c, &g, &grid).unwrap();
        assert!(scan.flagged.is_empty(), "{:?}", scan.flagged);
        assert_eq!(scan.points.len(), 9);
        assert!(scan.nonincreasing);
        assert!(scan.points.windows(2).all(|w| w[1].1 < w[0].1));

        let single = monotonicity_scan(&c, &g, &[0.5]).unwrap();
        assert!(single.nonincreasing);

        let with_zero = monotonicity_scan(&c, &g, &[0.0, 0.5]).unwrap();
        assert_eq!(with_zero.flagged, vec![(0.0, ScanFlag::OutOfRange)]);
        assert!(monotonicity_scan(&c, &g, &[0.5, 0.4]).is_err());
    }

    #[test]
    fn single_cycle_prime_modulus_has_simple_spectrum() {
        for (n, cs) in [(7, "(1);(2)"), (11, "(1);(3);(4)"), (13, "(2);(5)")] {
            let (g, c) = setup(n, 1, cs);
            let r = full_spectrum(&c, 0.4, &g).unwrap();
            assert!(r.multiplicities.iter().all(|m| m.count == 1));
        }
        // sum of offsets = 0 mod n: conjugate modes coincide
        let (g, c) = setup(7, 1, "(1);(6)");
        let r = full_spectrum(&c, 0.4, &g).unwrap();
        assert!(r.multiplicities.iter().any(|m| m.count == 2));
    }

    #[test]
    fn non_spanning_set_is_rejected() {
        let (g, c) = setup(4, 2, "(2,0);(0,2)");
        assert!(matches!(
            full_spectrum(&c, 0.5, &g),
            Err(Error::NotSpanning)
        ));
    }

    #[test]
    fn csv_layout() {
        let (g, c) = setup(3, 1, "(1)");
        let r = full_spectrum(&c, 0.5, &g).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "v_1,re,im,modulus,theta,in_W");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,1,0,1,0,0"));
        assert!(lines[2].ends_with(",1"));
    }
}
