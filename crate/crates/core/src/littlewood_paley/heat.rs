use serde::Serialize;

use super::blocks::block;
use crate::error::{Error, Result};
use crate::spectral::{Axis, Exponent, ScalarField};

/// A block whose `L²` norm is below this fraction of the field's is treated as empty.
pub const ZERO_BLOCK_TOLERANCE: f64 = 1e-13;

/// Measured decay of one heat-smoothed dyadic block.
#[derive(Clone, Debug, Serialize)]
pub struct HeatBlockDecay {
    pub q: i32,
    pub lambdas: Vec<f64>,
    /// `‖e^{λΔ}Δ_q g‖_{L^∞} / ‖Δ_q g‖_{L^∞}`.
    pub linf_ratios: Vec<f64>,
    /// `‖e^{λΔ}Δ_q g‖_{L²} / ‖Δ_q g‖_{L²}`.
    pub l2_ratios: Vec<f64>,
    /// Spectral floor `exp(−λ (3/4)² 4^q)` for the `L²` ratio.
    pub l2_floor: Vec<f64>,
}

impl HeatBlockDecay {
    /// Rate `(3/4)² 4^q` below which no frequency of the block sits.
    pub fn floor_rate(&self) -> f64 {
        floor_rate(self.q)
    }

    /// Whether every `L²` ratio respects its floor, up to relative `tol`.
    pub fn l2_floor_holds(&self, tol: f64) -> bool {
        self.l2_ratios
            .iter()
            .zip(&self.l2_floor)
            .all(|(r, f)| *r <= f * (1.0 + tol))
    }
}

pub fn floor_rate(q: i32) -> f64 {
    0.5625 * 4f64.powi(q)
}

/// Measures `e^{λΔ}` acting on `Δ_q g` for each `λ` in `lambdas`.
pub fn heat_block_decay(g: &ScalarField, q: i32, lambdas: &[f64]) -> Result<HeatBlockDecay> {
    if q < 0 {
        return Err(Error::BlockOutOfRange {
            q,
            q_max: g.grid().filter().q_max(),
        });
    }
    let b = block(g, q)?;
    let linf0 = b.lp_norm(Exponent::Infinity);
    let l20 = b.l2_norm();
    if l20 <= ZERO_BLOCK_TOLERANCE * g.l2_norm() || linf0 == 0.0 {
        return Err(Error::ZeroBlock { q });
    }
    let mut linf_ratios = Vec::with_capacity(lambdas.len());
    let mut l2_ratios = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let smoothed = b.heat_semigroup(lambda)?;
        linf_ratios.push(smoothed.lp_norm(Exponent::Infinity) / linf0);
        l2_ratios.push(smoothed.l2_norm() / l20);
    }
    Ok(HeatBlockDecay {
        q,
        lambdas: lambdas.to_vec(),
        linf_ratios,
        l2_ratios,
        l2_floor: lambdas.iter().map(|l| (-l * floor_rate(q)).exp()).collect(),
    })
}

/// Bernstein ratio `max_j ‖∂_jΔ_q f‖_{L^∞} / ((8/3) 2^q ‖Δ_q f‖_{L^∞})` for `q ≥ 0`.
pub fn bernstein_ratio(f: &ScalarField, q: i32) -> Result<f64> {
    let b = block(f, q)?;
    let base = b.lp_norm(Exponent::Infinity);
    if b.l2_norm() <= ZERO_BLOCK_TOLERANCE * f.l2_norm() || base == 0.0 {
        return Err(Error::ZeroBlock { q });
    }
    let d = [Axis::X1, Axis::X2]
        .into_iter()
        .map(|axis| b.partial(axis).lp_norm(Exponent::Infinity))
        .fold(0.0, f64::max);
    Ok(d / (8.0 / 3.0 * 2f64.powi(q) * base))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_mode_decays_at_its_eigenvalue() {
        let grid = Grid::new(64).unwrap();
        let g = ScalarField::from_fn(&grid, |x1, _| (11.0 * x1).cos());
        let lambdas = [0.0, 0.001, 0.01, 0.02];
        let d = heat_block_decay(&g, 3, &lambdas).unwrap();
        assert_eq!(d.linf_ratios[0], 1.0);
        for (l, r) in lambdas.iter().zip(&d.linf_ratios) {
            assert!((r - (-121.0 * l).exp()).abs() < 1e-13);
        }
        assert!(d.l2_floor_holds(1e-12));
        assert_eq!(d.floor_rate(), 36.0);
    }

    #[test]
    fn multi_mode_block_respects_floor() {
        let grid = Grid::new(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = ScalarField::from_physical(&grid, &s).unwrap().dealiased();
        let lambdas: Vec<f64> = (0..10).map(|i| i as f64 * 0.005).collect();
        for q in 0..=grid.filter().q_max() {
            let d = heat_block_decay(&g, q, &lambdas).unwrap();
            assert!(d.l2_floor_holds(1e-12), "q = {q}");
        }
    }

    #[test]
    fn zero_block_is_rejected() {
        let grid = Grid::new(32).unwrap();
        let g = ScalarField::from_fn(&grid, |x1, _| x1.sin());
        assert!(matches!(heat_block_decay(&g, 3, &[0.1]), Err(Error::ZeroBlock { q: 3 })));
    }

    #[test]
    fn bernstein_ratio_is_moderate() {
        let grid = Grid::new(64).unwrap();
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = ScalarField::from_physical(&grid, &s).unwrap().dealiased();
            for q in 0..=4 {
                let r = bernstein_ratio(&f, q).unwrap();
                assert!(r > 0.0 && r < 2.0, "q = {q}, ratio {r}");
            }
        }
    }
}
