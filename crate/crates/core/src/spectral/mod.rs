//! Periodic grid, spectral fields and the exact Fourier-multiplier operators.

mod fft;
mod field;
mod grid;
mod norms;
mod ops;
mod snapshot;

pub use field::{ScalarField, VelocityField};
pub use grid::{Axis, Grid};
pub use norms::{lp_norm_samples, magnitude, Exponent};
pub use ops::{
    advect, biot_savart, gradient, inverse_laplacian, leray_project, lp_norm, product,
    recover_pressure, unprojected_momentum_tendency, PhysicalVelocity,
};
pub use snapshot::{load_field, read_snapshot, write_snapshot, SnapshotHeader};
