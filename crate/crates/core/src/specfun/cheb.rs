//! Piecewise Chebyshev interpolation on uniform panels.

use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct ChebTable {
    lo: f64,
    width: f64,
    coeffs: Vec<Vec<f64>>,
}

impl ChebTable {
    /// Interpolates `f` on `[lo, hi]` with `panels` panels of degree `deg`.
    pub fn build<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, panels: usize, deg: usize) -> Self {
        let width = (hi - lo) / panels as f64;
        let n = deg + 1;
        let nodes: Vec<f64> = (0..n).map(|k| (PI * (k as f64 + 0.5) / n as f64).cos()).collect();
        let mut coeffs = Vec::with_capacity(panels);
        for p in 0..panels {
            let a = lo + p as f64 * width;
            let vals: Vec<f64> = nodes.iter().map(|&t| f(a + 0.5 * width * (t + 1.0))).collect();
            let mut c = vec![0.0; n];
            for (j, cj) in c.iter_mut().enumerate() {
                let mut s = 0.0;
                for (k, v) in vals.iter().enumerate() {
                    s += v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos();
                }
                *cj = 2.0 * s / n as f64;
            }
            c[0] *= 0.5;
            coeffs.push(c);
        }
        ChebTable { lo, width, coeffs }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.width * self.coeffs.len() as f64
    }

    pub fn contains(&self, s: f64) -> bool {
        s >= self.lo && s <= self.hi()
    }

    pub fn eval(&self, s: f64) -> f64 {
        let u = (s - self.lo) / self.width;
        let p = (u.floor() as isize).clamp(0, self.coeffs.len() as isize - 1) as usize;
        let t = 2.0 * (u - p as f64) - 1.0;
        let c = &self.coeffs[p];
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in c.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + c[0]
    }
}
