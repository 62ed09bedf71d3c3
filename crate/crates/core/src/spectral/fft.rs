use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Square 2D complex FFT built from 1D row transforms and transposes.
///
/// Both directions are unnormalized; scaling is applied by the callers in
/// [`super::ScalarField`].
#[derive(Clone)]
pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(&*self.forward, data);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(&*self.inverse, data);
    }

    fn apply(&self, plan: &dyn Fft<f64>, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n * self.n);
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        transpose_in_place(data, self.n);
        plan.process_with_scratch(data, &mut scratch);
        transpose_in_place(data, self.n);
    }
}

fn transpose_in_place(data: &mut [Complex64], n: usize) {
    const TILE: usize = 16;
    for bi in (0..n).step_by(TILE) {
        for bj in (bi..n).step_by(TILE) {
            for i in bi..(bi + TILE).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + TILE).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpose_is_involution() {
        let n = 37;
        let orig: Vec<Complex64> = (0..n * n).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let mut data = orig.clone();
        transpose_in_place(&mut data, n);
        assert_eq!(data[1], orig[n]);
        assert_eq!(data[n * 3 + 5], orig[n * 5 + 3]);
        transpose_in_place(&mut data, n);
        assert_eq!(data, orig);
    }

    #[test]
    fn single_mode_lands_on_its_bin() {
        let n = 16;
        let fft = Fft2::new(n);
        let mut data: Vec<Complex64> = (0..n * n)
            .map(|idx| {
                let (i1, i2) = (idx / n, idx % n);
                let x1 = 2.0 * std::f64::consts::PI * i1 as f64 / n as f64;
                let x2 = 2.0 * std::f64::consts::PI * i2 as f64 / n as f64;
                Complex64::from_polar(1.0, 3.0 * x1 - 2.0 * x2)
            })
            .collect();
        fft.forward(&mut data);
        let bin = 3 * n + (n - 2);
        assert!((data[bin].re - (n * n) as f64).abs() < 1e-9);
        let rest: f64 = data
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != bin)
            .map(|(_, c)| c.norm())
            .sum();
        assert!(rest < 1e-9);
    }
}
