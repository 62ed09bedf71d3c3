use crate::error::{Error, Result};
use crate::spectral::{lp_norm_samples, magnitude, Exponent, ScalarField, VelocityField};

/// Dyadic block `Δ_q f`; `q < −1` yields zero.
pub fn block(f: &ScalarField, q: i32) -> Result<ScalarField> {
    let filter = f.grid().filter();
    if q > filter.q_max() {
        return Err(Error::BlockOutOfRange {
            q,
            q_max: filter.q_max(),
        });
    }
    Ok(f.map_modes(|idx, c| c * filter.block_weight(q, idx)))
}

/// Low-frequency cutoff `S_p f = Σ_{p' ≤ p−1} Δ_{p'} f`.
pub fn low_cutoff(f: &ScalarField, p: i32) -> ScalarField {
    let filter = f.grid().filter();
    f.map_modes(|idx, c| c * filter.low_pass_weight(p, idx))
}

/// All blocks `Δ_{−1} f, …, Δ_{q_max} f` in spectral form.
pub fn spectral_blocks(f: &ScalarField) -> Vec<ScalarField> {
    let filter = f.grid().filter();
    filter
        .blocks()
        .map(|q| f.map_modes(|idx, c| c * filter.block_weight(q, idx)))
        .collect()
}

/// Physical samples of every block, two blocks per inverse transform.
pub fn physical_blocks(f: &ScalarField) -> Vec<Vec<f64>> {
    let blocks = spectral_blocks(f);
    let refs: Vec<&ScalarField> = blocks.iter().collect();
    ScalarField::to_physical_many(&refs)
}

/// `‖Δ_q f‖_{L^p}` for `q = −1..=q_max`, stored at offset `q + 1`.
pub fn block_norms(f: &ScalarField, p: Exponent) -> Vec<f64> {
    let area = f.grid().cell_area();
    physical_blocks(f)
        .iter()
        .map(|b| lp_norm_samples(b, p, area))
        .collect()
}

/// `‖|Δ_q u|‖_{L^p}` of the Euclidean magnitude, one entry per block.
pub fn velocity_block_norms(u: &VelocityField, p: Exponent) -> Vec<f64> {
    let area = u.grid().cell_area();
    let b1 = physical_blocks(&u.u1);
    let b2 = physical_blocks(&u.u2);
    b1.iter()
        .zip(&b2)
        .map(|(a, b)| lp_norm_samples(&magnitude(&[a, b]), p, area))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(n: usize, seed: u64) -> ScalarField {
        let grid = Grid::new(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField::from_physical(&grid, &s).unwrap()
    }

    #[test]
    fn single_mode_sits_in_one_block() {
        let grid = Grid::new(64).unwrap();
        let f = ScalarField::from_fn(&grid, |x1, _| (11.0 * x1).sin());
        for q in -1..=grid.filter().q_max() {
            let b = block(&f, q).unwrap();
            if q == 3 {
                assert!((&b - &f).max_abs_coefficient() < 1e-15);
            } else {
                assert!(b.max_abs_coefficient() < 1e-15, "q = {q}");
            }
        }
    }

    #[test]
    fn constant_lives_in_lowest_block() {
        let grid = Grid::new(32).unwrap();
        let f = ScalarField::from_fn(&grid, |_, _| 4.0);
        assert!((&block(&f, -1).unwrap() - &f).max_abs_coefficient() < 1e-15);
        for q in 0..=grid.filter().q_max() {
            assert_eq!(block(&f, q).unwrap().max_abs_coefficient(), 0.0);
        }
        assert_eq!(block(&f, -2).unwrap().max_abs_coefficient(), 0.0);
        assert!(matches!(block(&f, 9), Err(Error::BlockOutOfRange { q: 9, .. })));
    }

    #[test]
    fn low_cutoff_edges() {
        let f = random_field(32, 5);
        let q_max = f.grid().filter().q_max();
        assert_eq!(low_cutoff(&f, -1).max_abs_coefficient(), 0.0);
        assert!((&low_cutoff(&f, q_max + 1) - &f).max_abs_coefficient() < 1e-15);
        assert!((&low_cutoff(&f, q_max + 5) - &f).max_abs_coefficient() == 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn blocks_reconstruct_the_field(seed in any::<u64>()) {
            let f = random_field(32, seed);
            let mut sum = ScalarField::zeros(f.grid());
            for b in spectral_blocks(&f) {
                sum = &sum + &b;
            }
            prop_assert!((&sum - &f).max_abs_coefficient() < 1e-12);
        }

        #[test]
        fn low_cutoff_telescopes(seed in any::<u64>(), q in -1i32..5) {
            let f = random_field(32, seed);
            let diff = &low_cutoff(&f, q + 1) - &low_cutoff(&f, q);
            prop_assert!((&diff - &block(&f, q).unwrap()).max_abs_coefficient() < 1e-14);
        }

        #[test]
        fn block_support_is_the_annulus(seed in any::<u64>(), q in 0i32..=4) {
            let f = random_field(32, seed);
            let b = block(&f, q).unwrap();
            let grid = f.grid();
            let scale = 2f64.powi(q);
            for (idx, c) in b.coefficients().iter().enumerate() {
                let r = grid.k_squared(idx).sqrt() / scale;
                if r < 0.75 || r > 8.0 / 3.0 {
                    prop_assert!(c.norm() == 0.0);
                }
            }
        }
    }
}
