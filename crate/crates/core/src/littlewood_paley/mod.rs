//! Dyadic (Littlewood–Paley) calculus on the periodic grid.
//!
//! Blocks are Fourier multipliers built from a radial profile `χ` equal to 1
//! on `B(0, 3/4)` and 0 outside `B(0, 4/3)`; the annulus profile is
//! `φ(ξ) = χ(ξ/2) − χ(ξ)`. Norms are truncated at the last block that meets
//! the dealiased modes, `q_max = ⌈log₂⌊n/3⌋⌉`.

mod besov;
mod blocks;
mod bony;
mod filter;
mod heat;

pub use besov::{besov_from_block_norms, besov_norm, velocity_besov_norm, BesovSpec};
pub use blocks::{block, block_norms, low_cutoff, physical_blocks, spectral_blocks, velocity_block_norms};
pub use bony::{
    bony_advection, paraproduct, remainder, remainder_divergence_defect, BonyAdvection,
    DIVERGENCE_TOLERANCE,
};
pub use filter::{bump, chi, max_block_index, phi, smooth_step, DyadicFilter, INNER_RADIUS, OUTER_RADIUS};
pub use heat::{bernstein_ratio, floor_rate, heat_block_decay, HeatBlockDecay};

use crate::spectral::Grid;

/// Builds the partition of unity for `grid` (cached on the grid itself).
pub fn build_filter(grid: &Grid) -> &DyadicFilter {
    grid.filter()
}
