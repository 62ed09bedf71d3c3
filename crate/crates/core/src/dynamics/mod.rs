//! Time integration of the vorticity–temperature system and its diagnostics.
//!
//! The temperature obeys `∂ₜθ + u·∇θ − κΔθ = 0` (plus `u₂` on the right in
//! the Bénard variant) and the vorticity `∂ₜω + u·∇ω = ∂₁θ`, with `u`
//! recovered from `ω` by Biot–Savart.

mod config;
mod diagnostics;
mod run;
mod state;
mod stepper;
mod table;

pub use config::{parse_override, RunConfig, System, DEFAULT_CFL};
pub use diagnostics::{DiagnosticPlan, Recorder};
pub use run::{
    initial_state, mollify, run, run_to_dir, RunOutput, Simulation, CONFIG_FILE, DIAGNOSTICS_FILE,
    SNAPSHOT_DIR,
};
pub use state::{SolverState, TimeIntegrals};
pub use stepper::{cfl_limit, step, tendency, Stepper, Tendency, SPEED_FLOOR};
pub use table::ChannelTable;
