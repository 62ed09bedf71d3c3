//! Initial fields for runs and the analytic stationary flows `σ`.

mod generators;
mod sigma;

pub use generators::{
    default_transition, gaussian_bump_theta, mollified_vortex_patch, random_band_limited,
    single_mode, InitialData,
};
pub use sigma::{
    point_vortex_field, sigma_field, spiral_points, verify_sigma_stationary, RadialProfile,
    SigmaReport,
};
