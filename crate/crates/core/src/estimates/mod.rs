//! Both sides of the a priori estimates, evaluated along trajectories and on sampled fields.

mod derivative;
mod report;
mod samples;
mod suite;
mod trajectory;
mod twin;
mod yudovich;

pub use derivative::time_derivative;
pub use report::{
    empirical_constant, EstimateClass, EstimateReport, Trajectory, CONSTANT_CEILING,
    IDENTITY_TOLERANCE, INEQUALITY_SLACK,
};
pub use samples::{
    check_heat_block_appendix, check_interpolation_split, check_l2_embedding, forced_heat,
    frequency_split, interpolation_split, low_block_sup, random_samples, sample_table,
    FrequencySplit, DECAY_RATE_FRACTION, SPLIT_BALANCE,
};
pub use trajectory::{
    check_advection_besov, check_benard_energy, check_biot_savart_constant, check_energy_identity,
    check_gronwall_chain, check_interpolations, check_smoothing, check_velocity_besov,
    check_velocity_l2, check_vishik_propagation, check_vorticity_transport,
};
pub use yudovich::{yudovich_from_samples, yudovich_grid, yudovich_norm, YudovichNorm};
pub use twin::{
    check_twin_compatible, check_twin_table, separation_bound, twin_columns, twin_run, twin_run_pair,
    Perturbation, TwinOutput, SEPARATION_GUARD, TWIN_EXPONENTS,
};
pub use suite::{
    hard_failures, resolution_stability, stability_table, summary_table, verify_samples,
    verify_trajectory, write_report, SampleOptions, StabilityRow, STABILITY_TOLERANCE,
};
