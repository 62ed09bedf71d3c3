use std::collections::HashMap;
use std::sync::OnceLock;

use crate::spectral::Grid;

/// Inner radius of the transition annulus: `χ = 1` on `B(0, 3/4)`.
pub const INNER_RADIUS: f64 = 0.75;
/// Outer radius: `χ = 0` outside `B(0, 4/3)`.
pub const OUTER_RADIUS: f64 = 4.0 / 3.0;

/// Unnormalized bump `exp(−1/(t(1−t)))` on `(0, 1)`, zero elsewhere.
pub fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (-1.0 / (t * (1.0 - t))).exp()
    }
}

fn bump_integral(a: f64, b: f64) -> f64 {
    quadrature::integrate(bump, a, b, 1e-18).integral
}

fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| 2.0 * bump_integral(0.0, 0.5))
}

/// `C^∞` step from 0 (for `t ≤ 0`) to 1 (for `t ≥ 1`): the normalized
/// primitive of [`bump`].
///
/// The integral is always taken over the shorter side, so `H(t) + H(1 − t) = 1`
/// up to rounding.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else if t <= 0.5 {
        bump_integral(0.0, t) / bump_mass()
    } else {
        1.0 - bump_integral(t, 1.0) / bump_mass()
    }
}

/// Radial low-pass profile `χ(r)`.
pub fn chi(r: f64) -> f64 {
    1.0 - smooth_step((r - INNER_RADIUS) / (OUTER_RADIUS - INNER_RADIUS))
}

/// Annulus profile `φ(r) = χ(r/2) − χ(r)`.
pub fn phi(r: f64) -> f64 {
    chi(r / 2.0) - chi(r)
}

/// Dyadic partition of unity sampled on the modes of one grid.
///
/// Stores `S_p` multipliers `χ(2^{−p}|k|)` for `p = 0..=q_max+1`; every block
/// multiplier is a difference of two of them, so reconstruction telescopes
/// exactly.
pub struct DyadicFilter {
    q_max: i32,
    low_pass: Vec<Vec<f64>>,
}

impl std::fmt::Debug for DyadicFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DyadicFilter").field("q_max", &self.q_max).finish()
    }
}

impl DyadicFilter {
    /// Samples the profiles on `grid`. Prefer [`Grid::filter`], which caches.
    pub fn build(grid: &Grid) -> Self {
        let q_max = max_block_index(grid.n());
        let mut low_pass = Vec::with_capacity(q_max as usize + 2);
        for p in 0..=q_max + 1 {
            let scale = 0.5f64.powi(p);
            let mut cache: HashMap<i64, f64> = HashMap::new();
            let table = (0..grid.len())
                .map(|idx| {
                    let (k1, k2) = grid.k(idx);
                    let ksq = k1 * k1 + k2 * k2;
                    *cache
                        .entry(ksq)
                        .or_insert_with(|| chi((ksq as f64).sqrt() * scale))
                })
                .collect();
            low_pass.push(table);
        }
        DyadicFilter { q_max, low_pass }
    }

    /// Smallest block index, always −1.
    pub fn q_min(&self) -> i32 {
        -1
    }

    pub fn q_max(&self) -> i32 {
        self.q_max
    }

    /// Block indices `−1..=q_max`.
    pub fn blocks(&self) -> std::ops::RangeInclusive<i32> {
        -1..=self.q_max
    }

    /// Multiplier of `S_p` at mode `idx`: 0 for `p ≤ −1`, `χ(2^{−p}|k|)`
    /// otherwise (identically 1 once `p > q_max + 1`).
    #[inline]
    pub fn low_pass_weight(&self, p: i32, idx: usize) -> f64 {
        if p < 0 {
            0.0
        } else if p as usize >= self.low_pass.len() {
            1.0
        } else {
            self.low_pass[p as usize][idx]
        }
    }

    /// Multiplier of `Δ_q` at mode `idx`: `S_{q+1} − S_q`.
    #[inline]
    pub fn block_weight(&self, q: i32, idx: usize) -> f64 {
        if q < -1 {
            0.0
        } else {
            self.low_pass_weight(q + 1, idx) - self.low_pass_weight(q, idx)
        }
    }

    pub fn low_pass_multiplier(&self, p: i32) -> Vec<f64> {
        let len = self.low_pass[0].len();
        (0..len).map(|idx| self.low_pass_weight(p, idx)).collect()
    }

    pub fn block_multiplier(&self, q: i32) -> Vec<f64> {
        let len = self.low_pass[0].len();
        (0..len).map(|idx| self.block_weight(q, idx)).collect()
    }

    /// Multiplier of `Δ_{q−1} + Δ_q + Δ_{q+1} = S_{q+2} − S_{q−1}`.
    pub fn widened_block_multiplier(&self, q: i32) -> Vec<f64> {
        let len = self.low_pass[0].len();
        (0..len)
            .map(|idx| self.low_pass_weight(q + 2, idx) - self.low_pass_weight(q - 1, idx))
            .collect()
    }
}

/// `⌈log₂⌊n/3⌋⌉`: the last block whose annulus meets the retained modes.
pub fn max_block_index(n: usize) -> i32 {
    let cutoff = (n / 3).max(1);
    cutoff.next_power_of_two().trailing_zeros() as i32
}
