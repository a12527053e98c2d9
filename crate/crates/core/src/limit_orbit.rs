//! Closed-form limiting orbits: Fourier coefficients of the initial state,
//! the constant / alternating / rotating decomposition, the attractor
//! (a Minkowski sum of origin-centred ellipses) and the approximation error
//! of a simulated run.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{OpinionState, Scaling, Trajectory};
use crate::error::{invalid, Error, Result};
use crate::fft::TorusFft;
use crate::lattice::{pairing, GroupParams};
use crate::roots::RootTable;
use crate::spectrum::{SpectrumReport, EPS_EQ};

/// Default samples per phase dimension in [`attractor_sample`].
pub const DEFAULT_GRID: usize = 256;
/// Largest number of points [`attractor_sample`] produces.
pub const MAX_ATTRACTOR_POINTS: usize = 1_000_000;

/// `z_v = sum_u omega^{-<v,u>} x_u` for every `v`, as complex `d`-vectors.
#[derive(Debug, Clone)]
pub struct FourierRows {
    group: GroupParams,
    d: usize,
    z: Vec<Complex64>,
}

impl FourierRows {
    pub fn row(&self, v: usize) -> &[Complex64] {
        &self.z[v * self.d..(v + 1) * self.d]
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `(1/N) sum_v omega^{<v,u>} z_v`, real part, row-major.
    pub fn reconstruct(&self) -> Vec<f64> {
        let fft = TorusFft::new(&self.group);
        let order = self.group.order();
        let mut out = vec![0.0; order * self.d];
        let mut buf = vec![Complex64::default(); order];
        for j in 0..self.d {
            for (b, z) in buf.iter_mut().zip(self.z.iter().skip(j).step_by(self.d)) {
                *b = *z;
            }
            fft.inverse(&mut buf);
            for (o, b) in out.iter_mut().skip(j).step_by(self.d).zip(&buf) {
                *o = b.re / order as f64;
            }
        }
        out
    }
}

pub fn fourier_rows(x: &OpinionState, g: &GroupParams) -> Result<FourierRows> {
    let order = g.order();
    if x.agents() != order {
        return Err(invalid("state row count differs from the group order"));
    }
    let d = x.d();
    let fft = TorusFft::new(g);
    let mut z = vec![Complex64::default(); order * d];
    let mut buf = vec![Complex64::default(); order];
    for j in 0..d {
        for (b, v) in buf.iter_mut().zip(x.values().iter().skip(j).step_by(d)) {
            *b = Complex64::new(*v, 0.0);
        }
        fft.forward(&mut buf);
        for (o, b) in z.iter_mut().skip(j).step_by(d).zip(&buf) {
            *o = *b;
        }
    }
    Ok(FourierRows { group: *g, d, z })
}

#[derive(Debug, Clone)]
struct Mode {
    index: usize,
    partner: usize,
    theta: f64,
    ratio: Complex64,
    z: Vec<Complex64>,
}

/// Per-agent coefficients of the limiting orbit
/// `y*_v(t) = c_v x + (-1)^t d_v x + sum_theta (a_{v,theta} x cos(2 pi t theta/n) + b_{v,theta} x sin(2 pi t theta/n))`.
#[derive(Debug, Clone)]
pub struct OrbitModel {
    group: GroupParams,
    d: usize,
    lambda: f64,
    vartheta: Vec<f64>,
    modes: Vec<Mode>,
    constant: Vec<f64>,
    alternating: Vec<f64>,
    /// `N x |vartheta| x d`; real part is `a_{v,theta} x`, minus the
    /// imaginary part is `b_{v,theta} x`.
    rotating: Vec<Complex64>,
}

pub fn build_orbit_model(x: &OpinionState, report: &SpectrumReport) -> Result<OrbitModel> {
    let g = report.group;
    let rows = fourier_rows(x, &g)?;
    let d = rows.d;
    let n = g.n();
    let half = n as f64 / 2.0;
    let order = g.order();
    let k = report.vartheta.len();

    let modes: Vec<Mode> = report
        .w
        .iter()
        .map(|&i| {
            let e = &report.pairs[i];
            Mode {
                index: i,
                partner: g.neg_index(i),
                theta: e.theta,
                ratio: e.lambda / report.lambda_sub,
                z: rows.row(i).to_vec(),
            }
        })
        .collect();

    // Which rotating slot each positive-angle mode feeds.
    let slot: Vec<Option<usize>> = modes
        .iter()
        .map(|m| {
            if m.theta <= 0.0 || m.theta >= half {
                return None;
            }
            report
                .vartheta
                .iter()
                .position(|&a| (a - m.theta).abs() <= EPS_EQ * a.max(1.0))
        })
        .collect();

    let roots = RootTable::new(n);
    let inv = 1.0 / order as f64;
    let mut constant = vec![0.0; order * d];
    let mut alternating = vec![0.0; order * d];
    let mut rotating = vec![Complex64::default(); order * k * d];
    for (v, point) in g.points().enumerate() {
        for (mode, s) in modes.iter().zip(&slot) {
            let h = report.pairs[mode.index].v.coords();
            let e = pairing(point.coords(), h, n);
            let w = Complex64::new(roots.cos(e), roots.sin(e)) * inv;
            if mode.theta == 0.0 {
                for j in 0..d {
                    constant[v * d + j] += (mode.z[j] * w).re;
                }
            } else if mode.theta == half {
                for j in 0..d {
                    alternating[v * d + j] += (mode.z[j] * w).re;
                }
            } else if let Some(s) = s {
                for j in 0..d {
                    rotating[(v * k + s) * d + j] += mode.z[j] * w * 2.0;
                }
            }
        }
    }

    Ok(OrbitModel {
        group: g,
        d,
        lambda: report.lambda_sub,
        vartheta: report.vartheta.clone(),
        modes,
        constant,
        alternating,
        rotating,
    })
}

impl OrbitModel {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn vartheta(&self) -> &[f64] {
        &self.vartheta
    }

    pub fn constant(&self, v: usize) -> &[f64] {
        &self.constant[v * self.d..(v + 1) * self.d]
    }

    pub fn alternating(&self, v: usize) -> &[f64] {
        &self.alternating[v * self.d..(v + 1) * self.d]
    }

    /// `(a_{v,theta} x, b_{v,theta} x)` for the `j`-th angle.
    pub fn rotating(&self, v: usize, j: usize) -> (Vec<f64>, Vec<f64>) {
        let e = self.rotating_raw(v, j);
        (
            e.iter().map(|c| c.re).collect(),
            e.iter().map(|c| -c.im).collect(),
        )
    }

    fn rotating_raw(&self, v: usize, j: usize) -> &[Complex64] {
        let k = self.vartheta.len();
        let start = (v * k + j) * self.d;
        &self.rotating[start..start + self.d]
    }

    /// Amplitude and phase of each coordinate of the `j`-th rotating term,
    /// so that coordinate `i` equals `amp_i cos(2 pi t theta / n + phase_i)`.
    pub fn polar(&self, v: usize, j: usize) -> Vec<(f64, f64)> {
        self.rotating_raw(v, j)
            .iter()
            .map(|e| (e.norm(), e.arg()))
            .collect()
    }

    /// Largest absolute entry of the constant, alternating and rotating parts.
    pub fn term_magnitudes(&self) -> (f64, f64, f64) {
        let max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
        (
            max(&mut self.constant.iter().map(|x| x.abs())),
            max(&mut self.alternating.iter().map(|x| x.abs())),
            max(&mut self.rotating.iter().map(|x| x.norm())),
        )
    }

    /// `y*_v(t)` from the trigonometric assembly.
    pub fn predicted(&self, v: usize, t: u64) -> Vec<f64> {
        let n = self.group.n() as f64;
        let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
        let mut y: Vec<f64> = self
            .constant(v)
            .iter()
            .zip(self.alternating(v))
            .map(|(c, a)| c + sign * a)
            .collect();
        for (j, &theta) in self.vartheta.iter().enumerate() {
            let angle = TAU * (t as f64 * theta).rem_euclid(n) / n;
            let rot = Complex64::new(angle.cos(), angle.sin());
            for (yi, e) in y.iter_mut().zip(self.rotating_raw(v, j)) {
                *yi += (e * rot).re;
            }
        }
        y
    }

    /// `y*(t)` for every agent, row-major.
    pub fn predicted_all(&self, t: u64) -> Vec<f64> {
        (0..self.group.order())
            .flat_map(|v| self.predicted(v, t))
            .collect()
    }

    /// `(1/N) sum_{h in W} (lambda_h/lambda)^t omega^{<h,v>} z_h`, evaluated
    /// as a complex vector. Independent of the coefficient assembly.
    pub fn projection(&self, v: usize, t: u64) -> Vec<Complex64> {
        let g = &self.group;
        let point = g.point_at(v);
        let inv = 1.0 / g.order() as f64;
        let mut out = vec![Complex64::default(); self.d];
        for mode in &self.modes {
            let h = g.point_at(mode.index);
            let e = pairing(point.coords(), h.coords(), g.n()) as f64;
            let w = Complex64::from_polar(inv, TAU * e / g.n() as f64) * mode.ratio.powu(t as u32);
            for (o, z) in out.iter_mut().zip(&mode.z) {
                *o += w * z;
            }
        }
        out
    }

    /// Phase `X_h` of each +-pair of subdominant modes along the orbit of `v`.
    pub fn phases(&self, v: usize, t: u64) -> Vec<f64> {
        let n = self.group.n() as f64;
        let point = self.group.point_at(v);
        self.pairs()
            .map(|m| {
                let h = self.group.point_at(m.index);
                let e = pairing(point.coords(), h.coords(), self.group.n()) as f64;
                TAU * (t as f64 * m.theta + e).rem_euclid(n) / n
            })
            .collect()
    }

    /// The attractor point for one phase per +-pair (same order as
    /// [`Self::phases`]).
    pub fn attractor_point(&self, phases: &[f64]) -> Vec<f64> {
        let inv = 1.0 / self.group.order() as f64;
        let mut y = vec![0.0; self.d];
        for (m, &x) in self.pairs().zip(phases) {
            let weight = if m.partner == m.index { inv } else { 2.0 * inv };
            let (c, s) = (x.cos(), x.sin());
            for (yi, z) in y.iter_mut().zip(&m.z) {
                *yi += weight * (z.re * c - z.im * s);
            }
        }
        y
    }

    /// One representative per +-pair: the member with positive angle, or the
    /// lower index when the pair is real.
    fn pairs(&self) -> impl Iterator<Item = &Mode> {
        self.modes.iter().filter(|m| {
            if m.theta > 0.0 && m.theta < self.group.n() as f64 / 2.0 {
                true
            } else if m.theta < 0.0 {
                false
            } else {
                m.index <= m.partner
            }
        })
    }

    pub fn pair_count(&self) -> usize {
        self.pairs().count()
    }

    /// Bound on how far any attractor point moves when each phase moves by
    /// at most `delta`.
    pub fn phase_lipschitz(&self) -> f64 {
        let inv = 1.0 / self.group.order() as f64;
        self.pairs()
            .map(|m| {
                let weight = if m.partner == m.index { inv } else { 2.0 * inv };
                weight * m.z.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
            })
            .sum()
    }

    /// `t, y_1..y_d` rows of the predicted orbit of agent `v`.
    pub fn write_orbit_csv<W: Write>(&self, v: usize, times: &[u64], out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.d).map(|j| format!("y_{j}")));
        wtr.write_record(&header)?;
        for &t in times {
            let mut rec = vec![t.to_string()];
            rec.extend(self.predicted(v, t).iter().map(|x| x.to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Relative error of the limiting orbit against a run, one point per snapshot.
#[derive(Debug, Clone, Default)]
pub struct ErrorSeries {
    pub points: Vec<(u64, f64)>,
    /// Snapshot times skipped because the simulated norm was below `1e-12`.
    pub skipped: Vec<u64>,
}

impl ErrorSeries {
    /// Least-squares slope of `ln(error)` against `t` over `lo <= t <= hi`.
    pub fn slope(&self, lo: u64, hi: u64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|(t, e)| *t >= lo && *t <= hi && *e > 0.0)
            .map(|&(t, e)| (t as f64, e.ln()))
            .collect();
        least_squares_slope(&pts)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["t", "rel_error"])?;
        for (t, e) in &self.points {
            wtr.write_record([t.to_string(), e.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn check_scaled(traj: &Trajectory, model: &OrbitModel) -> Result<()> {
    if traj.scaling != Scaling::InverseLambda {
        return Err(Error::PreconditionViolation(
            "approximation error needs an inverse-lambda scaled run".into(),
        ));
    }
    if let Some(xi) = traj.xi {
        if (xi * model.lambda - 1.0).abs() > 1e-12 {
            return Err(Error::PreconditionViolation(
                "run and model use different subdominant moduli".into(),
            ));
        }
    }
    Ok(())
}

/// `||y*_v(t) - y_v(t)|| / ||y_v(t)||` for one agent.
pub fn approximation_error(traj: &Trajectory, model: &OrbitModel, v: usize) -> Result<ErrorSeries> {
    check_scaled(traj, model)?;
    if v >= model.group.order() {
        return Err(invalid(format!("agent index {v} out of range")));
    }
    let mut series = ErrorSeries::default();
    for snap in &traj.snapshots {
        let y = snap.state.row(v);
        let pred = model.predicted(v, snap.t);
        push_ratio(&mut series, snap.t, y, &pred);
    }
    Ok(series)
}

/// Same ratio taken over the whole `N x d` state (Frobenius norms).
pub fn system_approximation_error(traj: &Trajectory, model: &OrbitModel) -> Result<ErrorSeries> {
    check_scaled(traj, model)?;
    let mut series = ErrorSeries::default();
    for snap in &traj.snapshots {
        let pred = model.predicted_all(snap.t);
        push_ratio(&mut series, snap.t, snap.state.values(), &pred);
    }
    Ok(series)
}

/// `||y*(t) - y(t)|| / ||y*(t)||` over the whole state: the deviation
/// measured against the limiting orbit instead of the simulated state.
pub fn system_deviation_from_limit(traj: &Trajectory, model: &OrbitModel) -> Result<ErrorSeries> {
    check_scaled(traj, model)?;
    let mut series = ErrorSeries::default();
    for snap in &traj.snapshots {
        let pred = model.predicted_all(snap.t);
        push_ratio_against(&mut series, snap.t, snap.state.values(), &pred, &pred);
    }
    Ok(series)
}

fn push_ratio(series: &mut ErrorSeries, t: u64, y: &[f64], pred: &[f64]) {
    push_ratio_against(series, t, y, pred, y);
}

fn push_ratio_against(series: &mut ErrorSeries, t: u64, y: &[f64], pred: &[f64], base: &[f64]) {
    let norm = base.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm < 1e-12 {
        series.skipped.push(t);
        return;
    }
    let diff = y
        .iter()
        .zip(pred)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    series.points.push((t, diff / norm));
}

/// `ceil(ln(dN) / ln(1/mu))`, the time after which the error bound is in force.
pub fn regression_window_start(mu: f64, d: usize, order: usize) -> u64 {
    ((d as f64 * order as f64).ln() / (1.0 / mu).ln()).ceil() as u64
}

/// Points of the attractor on a uniform phase grid.
#[derive(Debug, Clone)]
pub struct AttractorSample {
    /// Number of phase parameters (one per +-pair of subdominant modes).
    pub k: usize,
    pub resolution: usize,
    pub d: usize,
    /// Row-major `len x k` phases in `[0, 2 pi)`.
    pub phases: Vec<f64>,
    /// Row-major `len x d` points.
    pub points: Vec<f64>,
    pub ellipse_count: usize,
}

impl AttractorSample {
    pub fn len(&self) -> usize {
        self.points.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    /// `phase_1..phase_k, y_1..y_d` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.k).map(|j| format!("phase_{j}")).collect();
        header.extend((1..=self.d).map(|j| format!("y_{j}")));
        wtr.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.phases[i * self.k..(i + 1) * self.k]
                .iter()
                .map(|x| x.to_string())
                .collect();
            rec.extend(self.point(i).iter().map(|x| x.to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Samples the attractor on `resolution^k` grid phases, lowering the
/// resolution if that would exceed [`MAX_ATTRACTOR_POINTS`].
pub fn attractor_sample(model: &OrbitModel, resolution: usize) -> Result<AttractorSample> {
    if resolution == 0 {
        return Err(invalid("grid resolution must be positive"));
    }
    let k = model.pair_count();
    let mut r = resolution;
    while k > 0 && r > 1 && (r as f64).powi(k as i32) > MAX_ATTRACTOR_POINTS as f64 {
        r -= 1;
    }
    let count = if k == 0 { 1 } else { r.pow(k as u32) };
    let d = model.d;
    let mut phases = vec![0.0; count * k];
    let mut points = vec![0.0; count * d];
    phases
        .par_chunks_mut(k.max(1))
        .zip(points.par_chunks_mut(d))
        .enumerate()
        .for_each(|(i, (ph, pt))| {
            let mut rest = i;
            for x in ph.iter_mut().take(k).rev() {
                *x = TAU * (rest % r) as f64 / r as f64;
                rest /= r;
            }
            pt.copy_from_slice(&model.attractor_point(&ph[..k]));
        });
    if k == 0 {
        phases.clear();
    }
    Ok(AttractorSample {
        k,
        resolution: r,
        d,
        phases,
        points,
        ellipse_count: k,
    })
}

/// Number of independent rotating phases: nonreal subdominant eigenvalues,
/// counting `v` and `-v` once.
pub fn attractor_dimension(report: &SpectrumReport) -> usize {
    report
        .w
        .iter()
        .filter(|&&i| !report.pairs[i].is_real())
        .count()
        / 2
}
