use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rustfft::num_complex::Complex64;

use super::grid::{Axis, Grid};
use super::norms::{lp_norm_samples, magnitude, Exponent};
use crate::error::{Error, Result};

/// Real scalar field on the periodic grid, stored by its Fourier coefficients.
///
/// Conventions: `f(x) = Σ_k f̂_k e^{ik·x}` and `f̂_k = n⁻² Σ_x f(x) e^{-ik·x}`,
/// so a constant `c` has `f̂_0 = c` and Parseval reads
/// `‖f‖²_{L²} = (2π)² Σ_k |f̂_k|²`.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        ScalarField {
            grid: Arc::clone(grid),
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coefficients(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(ScalarField {
            grid: Arc::clone(grid),
            coeffs,
        })
    }

    /// Forward transform of physical samples (`to_spectral`).
    pub fn from_physical(grid: &Arc<Grid>, samples: &[f64]) -> Result<Self> {
        check_len(grid, samples.len())?;
        let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        grid.fft().forward(&mut data);
        let scale = 1.0 / grid.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        Ok(ScalarField {
            grid: Arc::clone(grid),
            coeffs: data,
        })
    }

    /// Samples `f(x1, x2)` on the grid and transforms.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let samples: Vec<f64> = (0..grid.len())
            .map(|idx| {
                let (x1, x2) = grid.point(idx);
                f(x1, x2)
            })
            .collect();
        Self::from_physical(grid, &samples).expect("sample count matches grid")
    }

    /// Transforms two real sample arrays with a single complex FFT.
    pub fn from_physical_pair(grid: &Arc<Grid>, a: &[f64], b: &[f64]) -> Result<(Self, Self)> {
        check_len(grid, a.len())?;
        check_len(grid, b.len())?;
        let mut data: Vec<Complex64> = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| Complex64::new(x, y))
            .collect();
        grid.fft().forward(&mut data);
        let scale = 0.5 / grid.len() as f64;
        let mut fa = vec![Complex64::default(); grid.len()];
        let mut fb = vec![Complex64::default(); grid.len()];
        for idx in 0..grid.len() {
            let z = data[idx];
            let zc = data[grid.conjugate_index(idx)].conj();
            fa[idx] = (z + zc) * scale;
            // (z - zc) / (2i)
            let d = (z - zc) * scale;
            fb[idx] = Complex64::new(d.im, -d.re);
        }
        Ok((
            ScalarField {
                grid: Arc::clone(grid),
                coeffs: fa,
            },
            ScalarField {
                grid: Arc::clone(grid),
                coeffs: fb,
            },
        ))
    }

    /// Inverse transform to physical samples (`to_physical`); the imaginary
    /// part, which vanishes for Hermitian coefficients, is discarded.
    pub fn to_physical(&self) -> Vec<f64> {
        self.to_physical_complex().into_iter().map(|c| c.re).collect()
    }

    pub fn to_physical_complex(&self) -> Vec<Complex64> {
        let mut data = self.coeffs.clone();
        self.grid.fft().inverse(&mut data);
        data
    }

    /// Inverse transforms two real fields with one complex FFT.
    pub fn to_physical_pair(a: &ScalarField, b: &ScalarField) -> (Vec<f64>, Vec<f64>) {
        debug_assert_eq!(a.grid.n(), b.grid.n());
        let mut data: Vec<Complex64> = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| Complex64::new(x.re - y.im, x.im + y.re))
            .collect();
        a.grid.fft().inverse(&mut data);
        data.into_iter().map(|c| (c.re, c.im)).unzip()
    }

    /// Inverse transforms any number of real fields, two per FFT.
    pub fn to_physical_many(fields: &[&ScalarField]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(fields.len());
        for chunk in fields.chunks(2) {
            match chunk {
                [a, b] => {
                    let (pa, pb) = Self::to_physical_pair(a, b);
                    out.push(pa);
                    out.push(pb);
                }
                [a] => out.push(a.to_physical()),
                _ => unreachable!(),
            }
        }
        out
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coefficient(&self, k1: i64, k2: i64) -> Complex64 {
        self.coeffs[self.grid.index_of(k1, k2)]
    }

    /// Spatial mean, i.e. the `k = 0` coefficient.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Applies `mode ↦ g(idx, coefficient)` to every mode.
    pub fn map_modes(&self, g: impl Fn(usize, Complex64) -> Complex64) -> Self {
        ScalarField {
            grid: Arc::clone(&self.grid),
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(idx, &c)| g(idx, c))
                .collect(),
        }
    }

    /// Multiplies each mode by a real spectral multiplier.
    pub fn multiply_by(&self, multiplier: &[f64]) -> Self {
        debug_assert_eq!(multiplier.len(), self.coeffs.len());
        ScalarField {
            grid: Arc::clone(&self.grid),
            coeffs: self
                .coeffs
                .iter()
                .zip(multiplier)
                .map(|(c, m)| c * m)
                .collect(),
        }
    }

    /// Spectral derivative: mode `k` times `i k_axis`.
    pub fn partial(&self, axis: Axis) -> Self {
        let grid = &self.grid;
        self.map_modes(|idx, c| {
            let k = grid.derivative_wavenumber(axis, idx);
            Complex64::new(-k * c.im, k * c.re)
        })
    }

    pub fn laplacian(&self) -> Self {
        let grid = &self.grid;
        self.map_modes(|idx, c| c * -grid.k_squared(idx))
    }

    /// `e^{λΔ} f`: mode `k` scaled by `exp(-λ|k|²)`.
    pub fn heat_semigroup(&self, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) {
            return Err(Error::NegativeDiffusion(lambda));
        }
        let grid = &self.grid;
        Ok(self.map_modes(|idx, c| c * (-lambda * grid.k_squared(idx)).exp()))
    }

    /// Zeroes every mode outside the 2/3-rule mask.
    pub fn dealias_in_place(&mut self) {
        for (idx, c) in self.coeffs.iter_mut().enumerate() {
            if !self.grid.is_retained(idx) {
                *c = Complex64::default();
            }
        }
    }

    pub fn dealiased(mut self) -> Self {
        self.dealias_in_place();
        self
    }

    pub fn is_dealiased(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(idx, c)| self.grid.is_retained(idx) || *c == Complex64::default())
    }

    /// Removes the mean (zeroes the `k = 0` coefficient).
    pub fn without_mean(mut self) -> Self {
        self.coeffs[0] = Complex64::default();
        self
    }

    /// `‖f‖²_{L²}` by Parseval.
    pub fn l2_norm_squared(&self) -> f64 {
        4.0 * PI * PI * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_squared().sqrt()
    }

    /// `‖∇f‖²_{L²} = (2π)² Σ |k|² |f̂_k|²`.
    pub fn gradient_l2_squared(&self) -> f64 {
        4.0 * PI
            * PI
            * self
                .coeffs
                .iter()
                .enumerate()
                .map(|(idx, c)| self.grid.k_squared(idx) * c.norm_sqr())
                .sum::<f64>()
    }

    /// `(‖f‖²_{L²} + ‖∇f‖²_{L²})^{1/2}`.
    pub fn h1_norm(&self) -> f64 {
        (self.l2_norm_squared() + self.gradient_l2_squared()).sqrt()
    }

    /// `L^p` norm by uniform-grid quadrature.
    pub fn lp_norm(&self, p: Exponent) -> f64 {
        lp_norm_samples(&self.to_physical(), p, self.grid.cell_area())
    }

    /// `L²` inner product `∫ f g` (both real) by Parseval.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        4.0 * PI
            * PI
            * self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| (a * b.conj()).re)
                .sum::<f64>()
    }

    /// Largest `|f̂(-k) - conj f̂(k)|`, zero for a real field.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|idx| (self.coeffs[self.grid.conjugate_index(idx)] - self.coeffs[idx].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map_modes(|_, c| c * a)
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &ScalarField) -> Self {
        ScalarField {
            grid: Arc::clone(&self.grid),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x + y * a)
                .collect(),
        }
    }

    pub fn same_grid(&self, other: &ScalarField) -> Result<()> {
        self.grid.ensure_same(&other.grid)
    }
}

fn check_len(grid: &Grid, got: usize) -> Result<()> {
    if got == grid.len() {
        Ok(())
    } else {
        Err(Error::SizeMismatch {
            expected: grid.len(),
            got,
        })
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scaled(rhs)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scaled(-1.0)
    }
}

/// Velocity pair `(u¹, u²)` on a shared grid.
#[derive(Clone, Debug)]
pub struct VelocityField {
    pub u1: ScalarField,
    pub u2: ScalarField,
}

impl VelocityField {
    pub fn new(u1: ScalarField, u2: ScalarField) -> Result<Self> {
        u1.same_grid(&u2)?;
        Ok(VelocityField { u1, u2 })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        VelocityField {
            u1: ScalarField::zeros(grid),
            u2: ScalarField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u1.grid()
    }

    pub fn component(&self, axis: Axis) -> &ScalarField {
        match axis {
            Axis::X1 => &self.u1,
            Axis::X2 => &self.u2,
        }
    }

    pub fn divergence(&self) -> ScalarField {
        &self.u1.partial(Axis::X1) + &self.u2.partial(Axis::X2)
    }

    /// Scalar curl `∂₁u² − ∂₂u¹`.
    pub fn curl(&self) -> ScalarField {
        &self.u2.partial(Axis::X1) - &self.u1.partial(Axis::X2)
    }

    /// `max_k |k·û(k)| / max_k |k||û(k)|`, zero for a discretely divergence-free pair.
    pub fn divergence_residual(&self) -> f64 {
        let grid = self.grid();
        let mut num = 0.0_f64;
        let mut den = 0.0_f64;
        for idx in 0..grid.len() {
            let k1 = grid.derivative_wavenumber(Axis::X1, idx);
            let k2 = grid.derivative_wavenumber(Axis::X2, idx);
            let a = self.u1.coefficients()[idx];
            let b = self.u2.coefficients()[idx];
            num = num.max((a * k1 + b * k2).norm());
            den = den.max((k1 * k1 + k2 * k2).sqrt() * (a.norm_sqr() + b.norm_sqr()).sqrt());
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    pub fn to_physical(&self) -> [Vec<f64>; 2] {
        let (a, b) = ScalarField::to_physical_pair(&self.u1, &self.u2);
        [a, b]
    }

    pub fn l2_norm_squared(&self) -> f64 {
        self.u1.l2_norm_squared() + self.u2.l2_norm_squared()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_squared().sqrt()
    }

    /// `L^p` norm of the pointwise Euclidean magnitude `|u(x)|`.
    pub fn lp_norm(&self, p: Exponent) -> f64 {
        let [a, b] = self.to_physical();
        lp_norm_samples(&magnitude(&[&a, &b]), p, self.grid().cell_area())
    }

    /// Pointwise Frobenius magnitude of `∇u` on the grid.
    pub fn gradient_magnitude(&self) -> Vec<f64> {
        let parts = ScalarField::to_physical_many(&[
            &self.u1.partial(Axis::X1),
            &self.u1.partial(Axis::X2),
            &self.u2.partial(Axis::X1),
            &self.u2.partial(Axis::X2),
        ]);
        magnitude(&[&parts[0], &parts[1], &parts[2], &parts[3]])
    }

    pub fn dealiased(self) -> Self {
        VelocityField {
            u1: self.u1.dealiased(),
            u2: self.u2.dealiased(),
        }
    }

    pub fn axpy(&self, a: f64, other: &VelocityField) -> Self {
        VelocityField {
            u1: self.u1.axpy(a, &other.u1),
            u2: self.u2.axpy(a, &other.u2),
        }
    }
}
