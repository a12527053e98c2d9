//! Dense reference implementations. Everything here is `O(N^2)` or worse and
//! exists only so the test suites have an independent route to compare
//! against.

use contrarian_core::{ConvolutionSet, GroupParams};
use contrarian_core::lattice::spans;
use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The `N x N` row-stochastic matrix with `p` on the diagonal and
/// `(1-p)/|C|` at column `v + h` of row `v` for each `h` in `C`.
pub fn dense_operator(c: &ConvolutionSet, p: f64, g: &GroupParams) -> DMatrix<f64> {
    let order = g.order();
    let w = (1.0 - p) / c.len() as f64;
    let mut a = DMatrix::zeros(order, order);
    for (i, v) in g.points().enumerate() {
        a[(i, i)] += p;
        for h in c.elements() {
            let j = g.index_of(&g.add(&v, h));
            a[(i, j)] += w;
        }
    }
    a
}

/// Eigenvalues from a real Schur decomposition of [`dense_operator`].
/// Deflation at machine epsilon stalls on the heavily repeated spectra these
/// operators have, so the tolerance is `1e-14` (the matrices are normal, so
/// the eigenvalue error stays near that). As a fallback the decomposition is
/// retried on `Q^T A Q` for a random orthogonal `Q`.
pub fn dense_eigenvalues(c: &ConvolutionSet, p: f64, g: &GroupParams) -> Vec<Complex64> {
    let a = dense_operator(c, p, g);
    let order = a.nrows();
    let max_iter = 200 * order.max(10);
    let mut rng = ChaCha8Rng::seed_from_u64(order as u64);
    let mut m = a.clone();
    for _ in 0..8 {
        if let Some(schur) = Schur::try_new(m.clone(), 1e-14, max_iter) {
            return schur
                .complex_eigenvalues()
                .iter()
                .map(|z| Complex64::new(z.re, z.im))
                .collect();
        }
        let q = DMatrix::from_fn(order, order, |_, _| rng.random_range(-1.0..1.0))
            .qr()
            .q();
        m = q.transpose() * &a * q;
    }
    panic!("Schur iteration did not converge");
}

/// Greedy multiset matching: each value of `a` is paired with the nearest
/// unused value of `b`. Returns the largest paired distance, or infinity
/// when the lengths differ.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|u, v| u.1.total_cmp(&v.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Applies `a` to every column of the row-major `N x d` state `x`, `steps` times.
pub fn propagate(a: &DMatrix<f64>, x: &[f64], d: usize, steps: usize) -> Vec<f64> {
    let order = a.nrows();
    let mut m = DMatrix::from_row_slice(order, d, x);
    for _ in 0..steps {
        m = a * &m;
    }
    row_major(&m)
}

/// `F_{C_{k_t}} ... F_{C_{k_1}} x` for the given index sequence.
pub fn propagate_sequence(ops: &[DMatrix<f64>], seq: &[usize], x: &[f64], d: usize) -> Vec<f64> {
    let order = ops[0].nrows();
    let mut m = DMatrix::from_row_slice(order, d, x);
    for &k in seq {
        m = &ops[k] * &m;
    }
    row_major(&m)
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// `z_v = sum_u x_u omega^{-<u,v>}` computed term by term.
pub fn naive_dft(x: &[f64], g: &GroupParams) -> Vec<Complex64> {
    let n = g.n() as f64;
    let pts: Vec<_> = g.points().collect();
    pts.iter()
        .map(|v| {
            pts.iter()
                .zip(x)
                .map(|(u, &xu)| {
                    let k = contrarian_core::inner_product(u, v, g).unwrap() as f64;
                    Complex64::from_polar(xu, -std::f64::consts::TAU * k / n)
                })
                .sum()
        })
        .collect()
}

pub fn column(x: &[f64], d: usize, j: usize) -> Vec<f64> {
    x.iter().skip(j).step_by(d).copied().collect()
}

pub fn to_dvector(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

/// All-box discrepancy of `t` points in `[0,1)^s` (row-major), by trying every
/// box whose edges lie on point coordinates or on 0 and 1. Closed boxes give
/// the overcount side, open boxes the undercount side. `O(t^{2s+1})`.
pub fn brute_box_discrepancy(points: &[f64], s: usize) -> f64 {
    let t = points.len() / s;
    let inv = 1.0 / t as f64;
    let edges: Vec<Vec<f64>> = (0..s)
        .map(|j| {
            let mut e: Vec<f64> = (0..t).map(|k| points[k * s + j]).collect();
            e.push(0.0);
            e.push(1.0);
            e.sort_by(f64::total_cmp);
            e.dedup();
            e
        })
        .collect();
    let mut best: f64 = 0.0;
    let mut lo = vec![0.0; s];
    let mut hi = vec![0.0; s];
    let mut idx = vec![(0usize, 0usize); s];
    loop {
        let mut area = 1.0;
        for j in 0..s {
            lo[j] = edges[j][idx[j].0];
            hi[j] = edges[j][idx[j].1];
            area *= hi[j] - lo[j];
        }
        let (mut closed, mut open) = (0usize, 0usize);
        for k in 0..t {
            let p = &points[k * s..(k + 1) * s];
            if (0..s).all(|j| lo[j] <= p[j] && p[j] <= hi[j]) {
                closed += 1;
            }
            if (0..s).all(|j| lo[j] < p[j] && p[j] < hi[j]) {
                open += 1;
            }
        }
        best = best
            .max(closed as f64 * inv - area)
            .max(area - open as f64 * inv);
        // odometer over (lo <= hi) edge pairs in every coordinate
        let mut j = 0;
        loop {
            if j == s {
                return best;
            }
            let m = edges[j].len();
            let (a, b) = &mut idx[j];
            if *b + 1 < m {
                *b += 1;
                break;
            } else if *a + 1 < m {
                *a += 1;
                *b = *a;
                break;
            }
            idx[j] = (0, 0);
            j += 1;
        }
    }
}

/// A random spanning system with `N <= 196`: `m = 1` up to `n = 60`, `m = 2`
/// up to `n = 14`, `m = 3` up to `n = 5`, with `p` strictly inside `(1/N, 1)`.
/// Longer cycles are left out because the dense Schur iteration can stall
/// on them.
pub fn random_config(rng: &mut impl Rng) -> (GroupParams, ConvolutionSet, f64) {
    loop {
        let m = rng.random_range(1..=3u32);
        let n = match m {
            1 => rng.random_range(2..=60u32),
            2 => rng.random_range(2..=14u32),
            _ => rng.random_range(2..=5u32),
        };
        let g = GroupParams::new(n, m).unwrap();
        let size = rng.random_range(m as usize..=(m as usize + 3).min(g.order() - 1));
        let mut idx: Vec<usize> = Vec::new();
        while idx.len() < size {
            let i = rng.random_range(1..g.order());
            if !idx.contains(&i) {
                idx.push(i);
            }
        }
        let c = ConvolutionSet::new(&g, idx.iter().map(|&i| g.point_at(i)).collect()).unwrap();
        if !spans(&c, &g) {
            continue;
        }
        let lo = 1.0 / g.order() as f64;
        let p = lo + (1.0 - lo) * rng.random_range(0.02..0.98);
        return (g, c, p);
    }
}
