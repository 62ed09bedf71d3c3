use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use super::fft::Fft2;
use crate::error::{Error, Result};
use crate::littlewood_paley::DyadicFilter;

/// Uniform periodic grid on the torus `[0, 2π)²` with `n` points per axis.
///
/// Samples and spectral coefficients share the row-major layout
/// `idx = i1 * n + i2`, the first index running along `x1` (resp. `k1`).
/// Integer wavenumbers take values in `[-n/2, n/2)`.
pub struct Grid {
    n: usize,
    wavenumbers: Vec<i64>,
    retained: Vec<bool>,
    fft: Fft2,
    filter: OnceLock<DyadicFilter>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Grid {
    pub fn new(n: usize) -> Result<Arc<Grid>> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid { n });
        }
        let wavenumbers: Vec<i64> = (0..n)
            .map(|i| if i < n / 2 { i as i64 } else { i as i64 - n as i64 })
            .collect();
        let cutoff = (n / 3) as i64;
        let retained = (0..n * n)
            .map(|idx| {
                let (k1, k2) = (wavenumbers[idx / n], wavenumbers[idx % n]);
                k1.abs().max(k2.abs()) <= cutoff
            })
            .collect();
        Ok(Arc::new(Grid {
            n,
            wavenumbers,
            retained,
            fft: Fft2::new(n),
            filter: OnceLock::new(),
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of modes (equivalently, of physical samples).
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `2π/n`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Area element of the uniform quadrature, `(2π/n)²`.
    pub fn cell_area(&self) -> f64 {
        self.spacing() * self.spacing()
    }

    /// Largest retained wavenumber magnitude per axis under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> usize {
        self.n / 3
    }

    pub fn wavenumber(&self, i: usize) -> i64 {
        self.wavenumbers[i]
    }

    /// Wavenumber pair `(k1, k2)` of the mode stored at `idx`.
    #[inline]
    pub fn k(&self, idx: usize) -> (i64, i64) {
        (self.wavenumbers[idx / self.n], self.wavenumbers[idx % self.n])
    }

    #[inline]
    pub fn k_squared(&self, idx: usize) -> f64 {
        let (k1, k2) = self.k(idx);
        (k1 * k1 + k2 * k2) as f64
    }

    /// Index of the mode `-k`.
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let n = self.n;
        let (i1, i2) = (idx / n, idx % n);
        ((n - i1) % n) * n + (n - i2) % n
    }

    /// Mode index for a wavenumber pair; components are wrapped modulo `n`.
    pub fn index_of(&self, k1: i64, k2: i64) -> usize {
        let n = self.n as i64;
        (k1.rem_euclid(n) * n + k2.rem_euclid(n)) as usize
    }

    /// 2/3-rule mask: `max(|k1|, |k2|) <= ⌊n/3⌋`.
    #[inline]
    pub fn is_retained(&self, idx: usize) -> bool {
        self.retained[idx]
    }

    /// Wavenumber used by spectral derivatives along `axis`.
    ///
    /// The Nyquist wavenumber `-n/2` has no real-valued derivative and maps to 0.
    #[inline]
    pub fn derivative_wavenumber(&self, axis: Axis, idx: usize) -> f64 {
        let (k1, k2) = self.k(idx);
        let k = match axis {
            Axis::X1 => k1,
            Axis::X2 => k2,
        };
        if k == -(self.n as i64) / 2 {
            0.0
        } else {
            k as f64
        }
    }

    /// Physical coordinates of sample `idx`.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        let h = self.spacing();
        ((idx / self.n) as f64 * h, (idx % self.n) as f64 * h)
    }

    pub(crate) fn fft(&self) -> &Fft2 {
        &self.fft
    }

    /// Dyadic partition of unity for this grid, built on first use.
    pub fn filter(&self) -> &DyadicFilter {
        self.filter.get_or_init(|| DyadicFilter::build(self))
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.n,
                right: other.n,
            })
        }
    }
}

/// Coordinate direction on the torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}
