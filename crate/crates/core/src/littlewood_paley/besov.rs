use serde::{Deserialize, Serialize};

use super::blocks::{block_norms, velocity_block_norms};
use crate::error::{Error, Result};
use crate::spectral::{Exponent, ScalarField, VelocityField};

/// Index triple of the inhomogeneous Besov space `B^s_{p,r}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub s: f64,
    pub p: Exponent,
    pub r: Exponent,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidExponent(s));
        }
        Ok(BesovSpec {
            s,
            p: Exponent::new(p)?,
            r: Exponent::new(r)?,
        })
    }

    /// `B^s_{∞,1}`, the space used by most diagnostics.
    pub fn sup_summable(s: f64) -> Self {
        BesovSpec {
            s,
            p: Exponent::Infinity,
            r: Exponent::Finite(1.0),
        }
    }
}

/// `ℓ^r` aggregation of `2^{qs} a_q`, with `norms[i]` the block norm for `q = i − 1`.
pub fn besov_from_block_norms(norms: &[f64], s: f64, r: Exponent) -> f64 {
    let weighted = norms
        .iter()
        .enumerate()
        .map(|(i, a)| 2f64.powf(s * (i as f64 - 1.0)) * a);
    match r {
        Exponent::Infinity => weighted.fold(0.0, f64::max),
        Exponent::Finite(r) if r == 1.0 => weighted.sum(),
        Exponent::Finite(r) => weighted.map(|v| v.powf(r)).sum::<f64>().powf(1.0 / r),
    }
}

/// Grid-truncated Besov norm: blocks `q = −1..=q_max` only.
pub fn besov_norm(f: &ScalarField, spec: BesovSpec) -> f64 {
    besov_from_block_norms(&block_norms(f, spec.p), spec.s, spec.r)
}

/// Besov norm of a velocity field, blocks measured on `|Δ_q u|`.
pub fn velocity_besov_norm(u: &VelocityField, spec: BesovSpec) -> f64 {
    besov_from_block_norms(&velocity_block_norms(u, spec.p), spec.s, spec.r)
}
