use std::sync::Arc;

use rustfft::num_complex::Complex64;

use super::field::{ScalarField, VelocityField};
use super::grid::{Axis, Grid};
use super::norms::Exponent;
use crate::error::{Error, Result};

/// `|k|²` built from derivative wavenumbers, so that it agrees with
/// `∂₁∂₁ + ∂₂∂₂` on every mode including the Nyquist lines.
#[inline]
fn derivative_k_squared(grid: &Grid, idx: usize) -> f64 {
    let k1 = grid.derivative_wavenumber(Axis::X1, idx);
    let k2 = grid.derivative_wavenumber(Axis::X2, idx);
    k1 * k1 + k2 * k2
}

/// Velocity `u = Δ⁻¹∇^⊥ω` with `∇^⊥ = (−∂₂, ∂₁)`.
///
/// In Fourier variables `û¹ = i k₂ ω̂ / |k|²` and `û² = −i k₁ ω̂ / |k|²`.
/// Vorticity with a nonzero mean has no periodic velocity and is rejected.
pub fn biot_savart(omega: &ScalarField) -> Result<VelocityField> {
    let mean = omega.mean();
    let scale = omega.max_abs_coefficient();
    if mean.abs() > 1e-12 * scale || omega.coefficients()[0].im.abs() > 1e-12 * scale {
        return Err(Error::NonzeroMeanVorticity { mean });
    }
    let grid = omega.grid();
    let mut u1 = vec![Complex64::default(); grid.len()];
    let mut u2 = vec![Complex64::default(); grid.len()];
    for (idx, &w) in omega.coefficients().iter().enumerate() {
        let ksq = derivative_k_squared(grid, idx);
        if ksq == 0.0 {
            continue;
        }
        let k1 = grid.derivative_wavenumber(Axis::X1, idx);
        let k2 = grid.derivative_wavenumber(Axis::X2, idx);
        let iw = Complex64::new(-w.im, w.re) / ksq;
        u1[idx] = iw * k2;
        u2[idx] = -iw * k1;
    }
    VelocityField::new(
        ScalarField::from_coefficients(grid, u1)?,
        ScalarField::from_coefficients(grid, u2)?,
    )
}

/// Leray projection `v ↦ v − k(k·v̂)/|k|²` onto divergence-free fields.
///
/// The mean mode is left untouched.
pub fn leray_project(v: &VelocityField) -> VelocityField {
    let grid = v.grid();
    let a = v.u1.coefficients();
    let b = v.u2.coefficients();
    let mut p1 = a.to_vec();
    let mut p2 = b.to_vec();
    for idx in 0..grid.len() {
        let ksq = derivative_k_squared(grid, idx);
        if ksq == 0.0 {
            continue;
        }
        let k1 = grid.derivative_wavenumber(Axis::X1, idx);
        let k2 = grid.derivative_wavenumber(Axis::X2, idx);
        let dot = (a[idx] * k1 + b[idx] * k2) / ksq;
        p1[idx] -= dot * k1;
        p2[idx] -= dot * k2;
    }
    VelocityField {
        u1: ScalarField::from_coefficients(grid, p1).expect("same grid"),
        u2: ScalarField::from_coefficients(grid, p2).expect("same grid"),
    }
}

/// Solves `Δφ = f` for the zero-mean `φ`; the mean of `f` is ignored.
pub fn inverse_laplacian(f: &ScalarField) -> ScalarField {
    let grid = f.grid();
    f.map_modes(|idx, c| {
        let ksq = derivative_k_squared(grid, idx);
        if ksq == 0.0 {
            Complex64::default()
        } else {
            -c / ksq
        }
    })
}

/// Physical samples of a velocity field, reusable across several products.
#[derive(Clone, Debug)]
pub struct PhysicalVelocity {
    grid: Arc<Grid>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

impl PhysicalVelocity {
    pub fn new(u: &VelocityField) -> Self {
        let [u1, u2] = u.to_physical();
        PhysicalVelocity {
            grid: Arc::clone(u.grid()),
            u1,
            u2,
        }
    }

    pub fn max_speed(&self) -> f64 {
        self.u1
            .iter()
            .zip(&self.u2)
            .map(|(a, b)| a.hypot(*b))
            .fold(0.0, f64::max)
    }

    fn transport_samples(&self, f: &ScalarField) -> Vec<f64> {
        let (f1, f2) = ScalarField::to_physical_pair(&f.partial(Axis::X1), &f.partial(Axis::X2));
        (0..self.u1.len())
            .map(|i| self.u1[i] * f1[i] + self.u2[i] * f2[i])
            .collect()
    }

    /// `u·∇f`, dealiased.
    pub fn advect(&self, f: &ScalarField) -> Result<ScalarField> {
        self.grid.ensure_same(f.grid())?;
        let samples = self.transport_samples(f);
        Ok(ScalarField::from_physical(&self.grid, &samples)?.dealiased())
    }

    /// `(u·∇f, u·∇g)` with one forward transform shared by both products.
    pub fn advect_pair(&self, f: &ScalarField, g: &ScalarField) -> Result<(ScalarField, ScalarField)> {
        self.grid.ensure_same(f.grid())?;
        self.grid.ensure_same(g.grid())?;
        let a = self.transport_samples(f);
        let b = self.transport_samples(g);
        let (fa, fb) = ScalarField::from_physical_pair(&self.grid, &a, &b)?;
        Ok((fa.dealiased(), fb.dealiased()))
    }
}

/// Pseudo-spectral transport term `u¹∂₁f + u²∂₂f`, dealiased by the 2/3 rule.
pub fn advect(u: &VelocityField, f: &ScalarField) -> Result<ScalarField> {
    PhysicalVelocity::new(u).advect(f)
}

/// Pointwise product of two fields, dealiased.
pub fn product(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    f.same_grid(g)?;
    let (a, b) = ScalarField::to_physical_pair(f, g);
    let samples: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    Ok(ScalarField::from_physical(f.grid(), &samples)?.dealiased())
}

/// `L^p` norm by uniform-grid quadrature, validating `p ≥ 1`.
pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64> {
    Ok(f.lp_norm(Exponent::new(p)?))
}

/// Momentum tendency before projection, `θe₂ − u·∇u`.
pub fn unprojected_momentum_tendency(theta: &ScalarField, u: &VelocityField) -> Result<VelocityField> {
    let phys = PhysicalVelocity::new(u);
    let (n1, n2) = phys.advect_pair(&u.u1, &u.u2)?;
    VelocityField::new(-&n1, &theta.clone().dealiased() - &n2)
}

/// Pressure `Π` from `ΔΠ = ∂₂θ − div(u·∇u)`, normalized to zero mean.
pub fn recover_pressure(theta: &ScalarField, u: &VelocityField) -> Result<ScalarField> {
    theta.same_grid(&u.u1)?;
    let tendency = unprojected_momentum_tendency(theta, u)?;
    Ok(inverse_laplacian(&tendency.divergence()))
}

/// `∇f` as a velocity-shaped pair.
pub fn gradient(f: &ScalarField) -> VelocityField {
    VelocityField {
        u1: f.partial(Axis::X1),
        u2: f.partial(Axis::X2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: &Arc<Grid>, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField::from_physical(grid, &samples).unwrap().dealiased()
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn biot_savart_of_zero_is_zero() {
        let grid = Grid::new(16).unwrap();
        let u = biot_savart(&ScalarField::zeros(&grid)).unwrap();
        assert_eq!(u.l2_norm(), 0.0);
    }

    #[test]
    fn biot_savart_single_modes() {
        let grid = Grid::new(32).unwrap();
        let w = ScalarField::from_fn(&grid, |x1, _| x1.sin());
        let [u1, u2] = biot_savart(&w).unwrap().to_physical();
        let expect2: Vec<f64> = (0..grid.len()).map(|i| -grid.point(i).0.cos()).collect();
        assert!(u1.iter().all(|v| v.abs() < 1e-14));
        assert!(max_abs_diff(&u2, &expect2) < 1e-14);

        let w = ScalarField::from_fn(&grid, |_, x2| x2.cos());
        let [u1, u2] = biot_savart(&w).unwrap().to_physical();
        let expect1: Vec<f64> = (0..grid.len()).map(|i| -grid.point(i).1.sin()).collect();
        assert!(max_abs_diff(&u1, &expect1) < 1e-14);
        assert!(u2.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn biot_savart_rejects_mean() {
        let grid = Grid::new(16).unwrap();
        let w = ScalarField::from_fn(&grid, |x1, _| 0.3 + x1.sin());
        assert!(matches!(biot_savart(&w), Err(Error::NonzeroMeanVorticity { .. })));
    }

    #[test]
    fn leray_kills_gradients_and_keeps_solenoidal_part() {
        let grid = Grid::new(32).unwrap();
        let grad = gradient(&ScalarField::from_fn(&grid, |x1, _| x1.sin()));
        assert!(leray_project(&grad).l2_norm() < 1e-13);

        let w = biot_savart(&random_field(&grid, 7).without_mean()).unwrap();
        let phi = random_field(&grid, 8);
        let v = w.axpy(1.0, &gradient(&phi));
        let p = leray_project(&v);
        assert!(p.axpy(-1.0, &w).l2_norm() < 1e-12 * w.l2_norm());
        assert!(p.divergence_residual() < 1e-12);
    }

    #[test]
    fn advect_closed_form() {
        let grid = Grid::new(32).unwrap();
        let u = biot_savart(&ScalarField::from_fn(&grid, |x1, _| x1.sin())).unwrap();
        let f = ScalarField::from_fn(&grid, |_, x2| x2.sin());
        let out = advect(&u, &f).unwrap().to_physical();
        let expect: Vec<f64> = (0..grid.len())
            .map(|i| {
                let (x1, x2) = grid.point(i);
                -x1.cos() * x2.cos()
            })
            .collect();
        assert!(max_abs_diff(&out, &expect) < 1e-13);
    }

    #[test]
    fn advect_trivial_cases() {
        let grid = Grid::new(16).unwrap();
        let f = random_field(&grid, 3);
        assert_eq!(advect(&VelocityField::zeros(&grid), &f).unwrap().l2_norm(), 0.0);
        let u = biot_savart(&random_field(&grid, 4).without_mean()).unwrap();
        let c = ScalarField::from_fn(&grid, |_, _| 1.7);
        assert!(advect(&u, &c).unwrap().max_abs_coefficient() < 1e-15);
        let other = Grid::new(32).unwrap();
        assert!(matches!(
            advect(&u, &ScalarField::zeros(&other)),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn pressure_of_buoyancy_mode() {
        let grid = Grid::new(32).unwrap();
        let theta = ScalarField::from_fn(&grid, |_, x2| x2.sin());
        let pi = recover_pressure(&theta, &VelocityField::zeros(&grid)).unwrap();
        let expect = ScalarField::from_fn(&grid, |_, x2| -x2.cos());
        assert!((&pi - &expect).max_abs_coefficient() < 1e-15);
        assert_eq!(
            recover_pressure(&ScalarField::zeros(&grid), &VelocityField::zeros(&grid))
                .unwrap()
                .l2_norm(),
            0.0
        );
    }

    #[test]
    fn pressure_gradient_completes_projection() {
        let grid = Grid::new(32).unwrap();
        let theta = random_field(&grid, 11);
        let u = biot_savart(&random_field(&grid, 12).without_mean()).unwrap();
        let raw = unprojected_momentum_tendency(&theta, &u).unwrap();
        let pi = recover_pressure(&theta, &u).unwrap();
        let corrected = raw.axpy(-1.0, &gradient(&pi));
        let projected = leray_project(&raw);
        let err = corrected.axpy(-1.0, &projected).l2_norm();
        assert!(err < 1e-10 * raw.l2_norm(), "err {err}");
        assert!(pi.mean().abs() < 1e-16);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn curl_inverts_biot_savart(seed in any::<u64>()) {
            let grid = Grid::new(32).unwrap();
            let w = random_field(&grid, seed).without_mean();
            let u = biot_savart(&w).unwrap();
            prop_assert!((&u.curl() - &w).max_abs_coefficient() <= 1e-12 * w.max_abs_coefficient());
            prop_assert!(u.divergence_residual() < 1e-12);
        }

        #[test]
        fn leray_is_idempotent(seed in any::<u64>()) {
            let grid = Grid::new(16).unwrap();
            let v = VelocityField::new(random_field(&grid, seed), random_field(&grid, seed ^ 0xabc)).unwrap();
            let p = leray_project(&v);
            let pp = leray_project(&p);
            prop_assert!(pp.axpy(-1.0, &p).l2_norm() < 1e-12 * v.l2_norm());
            prop_assert!(p.divergence().max_abs_coefficient() < 1e-12);
        }

        #[test]
        fn transport_term_has_zero_mean(seed in any::<u64>()) {
            let grid = Grid::new(32).unwrap();
            let u = biot_savart(&random_field(&grid, seed).without_mean()).unwrap();
            let f = random_field(&grid, seed.wrapping_add(1));
            prop_assert!(advect(&u, &f).unwrap().mean().abs() < 1e-10);
        }
    }
}
