use std::f64::consts::TAU;

/// Table of `omega^k = exp(2 pi i k / n)` for `k in [0, n)`, built so that
/// `omega^(n-k)` is the exact conjugate of `omega^k`.
#[derive(Debug, Clone)]
pub(crate) struct RootTable {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl RootTable {
    pub(crate) fn new(n: u32) -> Self {
        let n = n as usize;
        let mut cos = vec![0.0; n];
        let mut sin = vec![0.0; n];
        for k in 0..=n / 2 {
            let a = TAU * k as f64 / n as f64;
            cos[k] = a.cos();
            sin[k] = a.sin();
        }
        cos[0] = 1.0;
        sin[0] = 0.0;
        if n % 2 == 0 {
            cos[n / 2] = -1.0;
            sin[n / 2] = 0.0;
        }
        if n % 4 == 0 {
            cos[n / 4] = 0.0;
            sin[n / 4] = 1.0;
        }
        for k in n / 2 + 1..n {
            cos[k] = cos[n - k];
            sin[k] = -sin[n - k];
        }
        RootTable { cos, sin }
    }

    #[inline]
    pub(crate) fn cos(&self, k: u32) -> f64 {
        self.cos[k as usize]
    }

    #[inline]
    pub(crate) fn sin(&self, k: u32) -> f64 {
        self.sin[k as usize]
    }
}
