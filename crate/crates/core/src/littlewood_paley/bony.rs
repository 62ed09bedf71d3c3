use crate::error::{Error, Result};
use crate::spectral::{Axis, ScalarField, VelocityField};

/// Largest relative divergence residual accepted by [`bony_advection`].
pub const DIVERGENCE_TOLERANCE: f64 = 1e-10;

fn filtered(f: &ScalarField, weight: impl Fn(usize) -> f64) -> ScalarField {
    f.map_modes(|idx, c| c * weight(idx))
}

/// Sums `Σ a_i · b_i` in physical space and returns the dealiased result.
fn sum_of_products(pairs: Vec<(ScalarField, ScalarField)>, like: &ScalarField) -> ScalarField {
    let grid = like.grid();
    let mut acc = vec![0.0; grid.len()];
    for (a, b) in pairs {
        let (pa, pb) = ScalarField::to_physical_pair(&a, &b);
        for ((s, x), y) in acc.iter_mut().zip(&pa).zip(&pb) {
            *s += x * y;
        }
    }
    ScalarField::from_physical(grid, &acc)
        .expect("sample count matches grid")
        .dealiased()
}

/// Paraproduct `T_f g = Σ_{q ≥ 1} S_{q−1} f · Δ_q g`.
pub fn paraproduct(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    f.same_grid(g)?;
    let filter = f.grid().filter();
    let pairs = (1..=filter.q_max())
        .map(|q| {
            (
                filtered(f, |idx| filter.low_pass_weight(q - 1, idx)),
                filtered(g, |idx| filter.block_weight(q, idx)),
            )
        })
        .collect();
    Ok(sum_of_products(pairs, f))
}

/// Remainder `R(f, g) = Σ_{q ≥ −1} Δ_q f · (Δ_{q−1} + Δ_q + Δ_{q+1}) g`.
pub fn remainder(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    f.same_grid(g)?;
    let filter = f.grid().filter();
    let pairs = filter
        .blocks()
        .map(|q| {
            (
                filtered(f, |idx| filter.block_weight(q, idx)),
                filtered(g, |idx| {
                    filter.low_pass_weight(q + 2, idx) - filter.low_pass_weight(q - 1, idx)
                }),
            )
        })
        .collect();
    Ok(sum_of_products(pairs, f))
}

/// The three pieces of the transport term `u·∇θ` in Bony's decomposition.
#[derive(Clone, Debug)]
pub struct BonyAdvection {
    /// `Σ_j T_{∂_jθ} u_j`: low frequencies of the gradient against high velocity.
    pub paraproduct_gradient_low: ScalarField,
    /// `Σ_j T_{u_j} ∂_jθ`: low frequencies of the velocity against the high gradient.
    pub paraproduct_velocity_low: ScalarField,
    /// `div R(u, θ) = Σ_j ∂_j R(u_j, θ)`.
    pub remainder_divergence: ScalarField,
}

impl BonyAdvection {
    /// Sum of both paraproduct pieces.
    pub fn paraproduct_terms(&self) -> ScalarField {
        &self.paraproduct_gradient_low + &self.paraproduct_velocity_low
    }

    /// Reassembled `u·∇θ`.
    pub fn total(&self) -> ScalarField {
        &self.paraproduct_terms() + &self.remainder_divergence
    }
}

fn ensure_solenoidal(u: &VelocityField) -> Result<()> {
    let residual = u.divergence_residual();
    if residual > DIVERGENCE_TOLERANCE {
        Err(Error::NotDivergenceFree { residual })
    } else {
        Ok(())
    }
}

/// Bony decomposition `u·∇θ = div R(u, θ) + Σ_j (T_{∂_jθ} u_j + T_{u_j} ∂_jθ)`.
///
/// The remainder is written in divergence form, which needs `div u = 0`.
/// Inputs are expected to be dealiased, which makes the reassembly exact.
pub fn bony_advection(u: &VelocityField, theta: &ScalarField) -> Result<BonyAdvection> {
    theta.same_grid(&u.u1)?;
    ensure_solenoidal(u)?;
    let d1 = theta.partial(Axis::X1);
    let d2 = theta.partial(Axis::X2);
    let paraproduct_gradient_low = &paraproduct(&d1, &u.u1)? + &paraproduct(&d2, &u.u2)?;
    let paraproduct_velocity_low = &paraproduct(&u.u1, &d1)? + &paraproduct(&u.u2, &d2)?;
    let remainder_divergence = &remainder(&u.u1, theta)?.partial(Axis::X1)
        + &remainder(&u.u2, theta)?.partial(Axis::X2);
    Ok(BonyAdvection {
        paraproduct_gradient_low,
        paraproduct_velocity_low,
        remainder_divergence,
    })
}

/// Relative `L²` gap between `Σ_j R(u_j, ∂_jθ)` and `Σ_j ∂_j R(u_j, θ)`.
pub fn remainder_divergence_defect(u: &VelocityField, theta: &ScalarField) -> Result<f64> {
    theta.same_grid(&u.u1)?;
    ensure_solenoidal(u)?;
    let plain = &remainder(&u.u1, &theta.partial(Axis::X1))?
        + &remainder(&u.u2, &theta.partial(Axis::X2))?;
    let divergence = &remainder(&u.u1, theta)?.partial(Axis::X1)
        + &remainder(&u.u2, theta)?.partial(Axis::X2);
    let scale = plain.l2_norm().max(divergence.l2_norm());
    if scale == 0.0 {
        Ok(0.0)
    } else {
        Ok((&plain - &divergence).l2_norm() / scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::littlewood_paley::block;
    use crate::spectral::{advect, biot_savart, product, Grid};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn random_field(grid: &Arc<Grid>, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField::from_physical(grid, &s).unwrap().dealiased()
    }

    #[test]
    fn constant_arguments() {
        let grid = Grid::new(32).unwrap();
        let f = random_field(&grid, 1);
        let c = ScalarField::from_fn(&grid, |_, _| 3.0);
        assert!(paraproduct(&f, &c).unwrap().max_abs_coefficient() < 1e-14);
        let expect = (&(&f - &block(&f, -1).unwrap()) - &block(&f, 0).unwrap()).scaled(3.0);
        let got = paraproduct(&c, &f).unwrap();
        assert!((&got - &expect).max_abs_coefficient() < 1e-13);
    }

    #[test]
    fn trivial_advection_pieces() {
        let grid = Grid::new(32).unwrap();
        let theta = random_field(&grid, 2);
        let zero = bony_advection(&VelocityField::zeros(&grid), &theta).unwrap();
        assert!(zero.total().max_abs_coefficient() < 1e-14);
        let u = biot_savart(&random_field(&grid, 3).without_mean()).unwrap();
        let flat = bony_advection(&u, &ScalarField::from_fn(&grid, |_, _| 1.0)).unwrap();
        assert!(flat.paraproduct_terms().max_abs_coefficient() < 1e-14);
        assert!(flat.remainder_divergence.max_abs_coefficient() < 1e-14);
    }

    #[test]
    fn rejects_compressible_velocity() {
        let grid = Grid::new(16).unwrap();
        let v = VelocityField::new(ScalarField::from_fn(&grid, |x1, _| x1.sin()), ScalarField::zeros(&grid)).unwrap();
        assert!(matches!(
            bony_advection(&v, &random_field(&grid, 4)),
            Err(Error::NotDivergenceFree { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn bony_identity(seed in any::<u64>()) {
            let grid = Grid::new(32).unwrap();
            let f = random_field(&grid, seed);
            let g = random_field(&grid, seed ^ 0x5555);
            let fg = product(&f, &g).unwrap();
            let parts = &(&paraproduct(&f, &g).unwrap() + &paraproduct(&g, &f).unwrap())
                + &remainder(&f, &g).unwrap();
            prop_assert!((&parts - &fg).l2_norm() < 1e-10 * fg.l2_norm());
        }

        #[test]
        fn advection_reassembles(seed in any::<u64>()) {
            let grid = Grid::new(32).unwrap();
            let u = biot_savart(&random_field(&grid, seed).without_mean()).unwrap();
            let theta = random_field(&grid, seed.wrapping_mul(3));
            let direct = advect(&u, &theta).unwrap();
            let pieces = bony_advection(&u, &theta).unwrap();
            prop_assert!((&pieces.total() - &direct).l2_norm() < 1e-10 * direct.l2_norm());
            prop_assert!(remainder_divergence_defect(&u, &theta).unwrap() < 1e-10);
        }
    }
}
