use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{lp_norm_samples, Exponent, VelocityField};

/// Grid-truncated Yudovich functional `sup_{r ≤ p < ∞} ‖∇u‖_{L^p}/p`.
///
/// The supremum is taken over `p ∈ {r, 2r, 4r, …} ∩ [r, p_max]`; when the
/// maximizer is the last grid point the true supremum may lie beyond it,
/// which [`YudovichNorm::truncated`] reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct YudovichNorm {
    pub value: f64,
    /// Exponent achieving the maximum.
    pub p_star: f64,
    pub r: f64,
    pub p_max: f64,
    /// `(p, ‖∇u‖_{L^p})` over the grid.
    pub samples: Vec<(f64, f64)>,
}

impl YudovichNorm {
    pub fn truncated(&self) -> bool {
        self.samples.len() > 1 && self.samples.last().map(|s| s.0) == Some(self.p_star)
    }
}

/// Geometric exponent grid `r, 2r, 4r, …` up to `p_max`.
pub fn yudovich_grid(r: f64, p_max: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut p = r;
    while p <= p_max * (1.0 + 1e-12) {
        grid.push(p);
        p *= 2.0;
    }
    grid
}

/// Evaluates the functional from samples of the Frobenius magnitude `|∇u|`.
pub fn yudovich_from_samples(gradient: &[f64], cell_area: f64, r: f64, p_max: f64) -> Result<YudovichNorm> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::InvalidExponent(r));
    }
    if !(p_max >= r && p_max.is_finite()) {
        return Err(Error::InvalidExponent(p_max));
    }
    let samples: Vec<(f64, f64)> = yudovich_grid(r, p_max)
        .into_iter()
        .map(|p| (p, lp_norm_samples(gradient, Exponent::Finite(p), cell_area)))
        .collect();
    let (p_star, value) = samples
        .iter()
        .map(|&(p, norm)| (p, norm / p))
        .fold((r, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(YudovichNorm {
        value,
        p_star,
        r,
        p_max,
        samples,
    })
}

/// `‖∇u‖_L` with `∇u` measured pointwise in the Frobenius norm.
pub fn yudovich_norm(u: &VelocityField, r: f64, p_max: f64) -> Result<YudovichNorm> {
    yudovich_from_samples(&u.gradient_magnitude(), u.grid().cell_area(), r, p_max)
}
