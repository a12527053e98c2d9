//! Multidimensional DFT on `(Z/nZ)^m` in lexicographic layout.
//!
//! `forward` computes `z_v = sum_u x_u omega^{-<u,v>}`; `inverse` computes
//! `sum_v z_v omega^{<u,v>}` without the `1/N` factor.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::lattice::GroupParams;

#[derive(Clone)]
pub struct TorusFft {
    n: usize,
    m: usize,
    order: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TorusFft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusFft")
            .field("n", &self.n)
            .field("m", &self.m)
            .finish()
    }
}

impl TorusFft {
    pub fn new(g: &GroupParams) -> Self {
        let n = g.n() as usize;
        let mut planner = FftPlanner::new();
        TorusFft {
            n,
            m: g.m() as usize,
            order: g.order(),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, self.forward.as_ref());
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, self.inverse.as_ref());
    }

    fn transform(&self, buf: &mut [Complex64], fft: &dyn Fft<f64>) {
        assert_eq!(
            buf.len(),
            self.order,
            "buffer length must equal the group order"
        );
        let n = self.n;
        let mut lines = vec![Complex64::default(); self.order];
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        for axis in 0..self.m {
            let stride = n.pow((self.m - 1 - axis) as u32);
            let blocks = self.order / (n * stride);
            // Gather every line along this axis into one contiguous buffer,
            // transform them in a single batched call, scatter back.
            let mut line = 0;
            for b in 0..blocks {
                for s in 0..stride {
                    let base = b * n * stride + s;
                    for k in 0..n {
                        lines[line * n + k] = buf[base + k * stride];
                    }
                    line += 1;
                }
            }
            fft.process_with_scratch(&mut lines, &mut scratch);
            let mut line = 0;
            for b in 0..blocks {
                for s in 0..stride {
                    let base = b * n * stride + s;
                    for k in 0..n {
                        buf[base + k * stride] = lines[line * n + k];
                    }
                    line += 1;
                }
            }
        }
    }
}
