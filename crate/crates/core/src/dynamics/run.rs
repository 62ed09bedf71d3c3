use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::config::RunConfig;
use super::diagnostics::{DiagnosticPlan, Recorder};
use super::state::SolverState;
use super::stepper::Stepper;
use super::table::ChannelTable;
use crate::error::{Error, Result};
use crate::littlewood_paley::low_cutoff;
use crate::spectral::{write_snapshot, Grid, ScalarField};

/// Name of the diagnostics file inside a run directory.
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
/// Name of the resolved configuration inside a run directory.
pub const CONFIG_FILE: &str = "config.json";
/// Subdirectory holding field snapshots.
pub const SNAPSHOT_DIR: &str = "snapshots";

/// Spectral cutoff `S_level f`.
pub fn mollify(f: &ScalarField, level: i32) -> Result<ScalarField> {
    if level < 0 {
        return Err(Error::BlockOutOfRange {
            q: level,
            q_max: f.grid().filter().q_max(),
        });
    }
    Ok(low_cutoff(f, level))
}

/// Samples the configured initial data, mollified and with zero-mean vorticity.
pub fn initial_state(config: &RunConfig) -> Result<SolverState> {
    config.validate()?;
    let grid = Grid::new(config.n)?;
    let mut theta = config.theta0.build(&grid, config.seed)?;
    let mut omega = config.omega0.build(&grid, config.seed.wrapping_add(1))?.without_mean();
    if let Some(level) = config.mollify_level {
        theta = mollify(&theta, level)?;
        omega = mollify(&omega, level)?;
    }
    SolverState::new(theta, omega)
}

#[derive(Clone, Copy, Debug)]
enum Schedule {
    Fixed { dt: f64, steps: usize, last_dt: f64 },
    Adaptive,
}

fn fixed_schedule(dt: f64, t_end: f64) -> Schedule {
    if t_end == 0.0 {
        return Schedule::Fixed { dt, steps: 0, last_dt: dt };
    }
    let ratio = t_end / dt;
    let rounded = ratio.round();
    if rounded >= 1.0 && (rounded - ratio).abs() <= 1e-9 * ratio.max(1.0) {
        Schedule::Fixed { dt, steps: rounded as usize, last_dt: dt }
    } else {
        let steps = ratio.ceil() as usize;
        let last_dt = t_end - (steps - 1) as f64 * dt;
        Schedule::Fixed { dt, steps, last_dt }
    }
}

/// A run in progress: owns its state, stepper and diagnostics.
#[derive(Debug)]
pub struct Simulation {
    config: RunConfig,
    stepper: Stepper,
    state: SolverState,
    recorder: Recorder,
    schedule: Schedule,
    step: usize,
    last_dt: f64,
}

/// Everything a finished run produces.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: RunConfig,
    pub config_hash: String,
    pub table: ChannelTable,
    pub initial_state: SolverState,
    pub final_state: SolverState,
}

impl Simulation {
    pub fn new(config: &RunConfig) -> Result<Self> {
        let state = initial_state(config)?;
        Self::from_state(config, state)
    }

    /// Starts from an explicit state, which must live on the config's grid.
    pub fn from_state(config: &RunConfig, mut state: SolverState) -> Result<Self> {
        config.validate()?;
        if state.grid().n() != config.n {
            return Err(Error::GridMismatch {
                left: config.n,
                right: state.grid().n(),
            });
        }
        let grid: Arc<Grid> = Arc::clone(state.grid());
        let stepper = Stepper::new(&grid, config.kappa, config.system, config.cfl_number())?;
        let schedule = match config.dt {
            Some(dt) => fixed_schedule(dt, config.t_end),
            None => Schedule::Adaptive,
        };
        let initial_dt = match schedule {
            Schedule::Fixed { dt, .. } => dt,
            Schedule::Adaptive => stepper.adaptive_dt(&state)?.min(config.t_end.max(f64::MIN_POSITIVE)),
        };
        let mut recorder = Recorder::new(DiagnosticPlan::from_config(config));
        state.time = 0.0;
        recorder.record(&mut state, 0, initial_dt)?;
        Ok(Simulation {
            config: config.clone(),
            stepper,
            state,
            recorder,
            schedule,
            step: 0,
            last_dt: initial_dt,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn table(&self) -> &ChannelTable {
        self.recorder.table()
    }

    pub fn step_count(&self) -> usize {
        self.step
    }

    pub fn last_dt(&self) -> f64 {
        self.last_dt
    }

    pub fn is_finished(&self) -> bool {
        match self.schedule {
            Schedule::Fixed { steps, .. } => self.step >= steps,
            Schedule::Adaptive => self.state.time >= self.config.t_end,
        }
    }

    /// Whether the most recent step produced a diagnostics row.
    pub fn just_recorded(&self) -> bool {
        self.step == 0 || self.step % self.config.diag_every == 0 || self.is_finished()
    }

    /// Takes one step; records a row on the cadence and at the final time.
    pub fn advance(&mut self) -> Result<()> {
        if self.is_finished() {
            return Ok(());
        }
        let (dt, time) = match self.schedule {
            Schedule::Fixed { dt, steps, last_dt } => {
                if self.step + 1 == steps && last_dt != dt {
                    (last_dt, self.config.t_end)
                } else {
                    (dt, (self.step + 1) as f64 * dt)
                }
            }
            Schedule::Adaptive => {
                let remaining = self.config.t_end - self.state.time;
                let dt = self.stepper.adaptive_dt(&self.state)?;
                if dt >= remaining {
                    (remaining, self.config.t_end)
                } else {
                    (dt, self.state.time + dt)
                }
            }
        };
        let mut next = self.stepper.step(&self.state, dt)?;
        next.time = time;
        self.state = next;
        self.step += 1;
        self.last_dt = dt;
        if self.just_recorded() {
            self.recorder.record(&mut self.state, self.step, dt)?;
        }
        Ok(())
    }

    pub fn finish(self, initial_state: SolverState) -> RunOutput {
        RunOutput {
            config_hash: self.config.config_hash(),
            config: self.config,
            table: self.recorder.into_table(),
            initial_state,
            final_state: self.state,
        }
    }
}

/// Runs `config` to completion in memory.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let mut sim = Simulation::new(config)?;
    let initial = sim.state().clone();
    while !sim.is_finished() {
        sim.advance()?;
    }
    Ok(sim.finish(initial))
}

fn snapshot_path(dir: &Path, name: &str, step: usize) -> PathBuf {
    dir.join(SNAPSHOT_DIR).join(format!("{name}_{step:07}.bin"))
}

fn write_fields(dir: &Path, state: &SolverState, step: usize) -> Result<()> {
    write_snapshot(&snapshot_path(dir, "theta", step), &state.theta, state.time, "theta")?;
    write_snapshot(&snapshot_path(dir, "omega", step), &state.omega, state.time, "omega")
}

/// Runs `config` and writes `config.json`, `diagnostics.csv` and snapshots into `dir`.
///
/// Diagnostics gathered before a numerical abort are still written.
pub fn run_to_dir(config: &RunConfig, dir: &Path) -> Result<RunOutput> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(CONFIG_FILE), config.to_json_pretty())?;
    let mut sim = Simulation::new(config)?;
    let initial = sim.state().clone();
    let snapshots = config.snapshot_every > 0;
    if snapshots {
        std::fs::create_dir_all(dir.join(SNAPSHOT_DIR))?;
        write_fields(dir, sim.state(), 0)?;
    }
    while !sim.is_finished() {
        if let Err(err) = sim.advance() {
            sim.table().write_csv(&dir.join(DIAGNOSTICS_FILE))?;
            return Err(err);
        }
        let step = sim.step_count();
        if snapshots && (step % config.snapshot_every == 0 || sim.is_finished()) {
            write_fields(dir, sim.state(), step)?;
        }
    }
    sim.table().write_csv(&dir.join(DIAGNOSTICS_FILE))?;
    Ok(sim.finish(initial))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::InitialData;
    use std::f64::consts::PI;

    #[test]
    fn schedule_rounds_or_shortens() {
        match fixed_schedule(1e-3, 1.0) {
            Schedule::Fixed { steps, last_dt, .. } => {
                assert_eq!(steps, 1000);
                assert_eq!(last_dt, 1e-3);
            }
            _ => unreachable!(),
        }
        match fixed_schedule(0.3, 1.0) {
            Schedule::Fixed { steps, last_dt, .. } => {
                assert_eq!(steps, 4);
                assert!((last_dt - 0.1).abs() < 1e-12);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn zero_horizon_records_initial_row_only() {
        let mut c = RunConfig::new(16, 0.1, 0.01, 0.0);
        c.theta0 = InitialData::Mode { k: [1, 0], amplitude: 1.0, phase: 0.0 };
        let out = run(&c).unwrap();
        assert_eq!(out.table.len(), 1);
    }

    #[test]
    fn pure_heat_norm_decay() {
        let mut c = RunConfig::new(32, 0.2, 0.01, 0.5);
        c.theta0 = InitialData::Mode { k: [1, 0], amplitude: 1.0, phase: 0.0 };
        c.diag_every = 5;
        let out = run(&c).unwrap();
        let times = out.table.times().unwrap();
        let l2 = out.table.column("theta_l2").unwrap();
        assert_eq!(times.len(), 11);
        for (t, v) in times.iter().zip(&l2) {
            let exact = (-0.2 * t).exp() * PI * 2f64.sqrt();
            assert!((v - exact).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn benard_rest_state_stays_at_rest() {
        let mut c = RunConfig::new(16, 0.1, 0.01, 0.2);
        c.system = crate::dynamics::System::Benard;
        let out = run(&c).unwrap();
        assert_eq!(out.final_state.theta.l2_norm(), 0.0);
        assert_eq!(out.final_state.omega.l2_norm(), 0.0);
    }

    #[test]
    fn mollify_levels() {
        let grid = Grid::new(64).unwrap();
        let f = ScalarField::from_fn(&grid, |x1, x2| (x1 + 7.0 * x2).sin() + (20.0 * x1).cos() + 0.3)
            .dealiased();
        let q_max = grid.filter().q_max();
        assert!((&mollify(&f, q_max + 1).unwrap() - &f).l2_norm() < 1e-14);
        let low = mollify(&f, 0).unwrap();
        let expected = crate::littlewood_paley::block(&f, -1).unwrap();
        assert!((&low - &expected).l2_norm() < 1e-14);
        let mut prev = f64::INFINITY;
        for level in 0..=q_max + 1 {
            let gap = (&f - &mollify(&f, level).unwrap()).l2_norm();
            assert!(gap <= prev + 1e-14);
            prev = gap;
        }
        assert!(mollify(&f, -1).is_err());
    }

    #[test]
    fn adaptive_run_reaches_end_time() {
        let mut c = RunConfig::new(32, 0.05, 0.01, 0.3);
        c.dt = None;
        c.cfl = Some(0.5);
        c.omega0 = InitialData::Mode { k: [1, 1], amplitude: 1.0, phase: 0.0 };
        c.theta0 = InitialData::Mode { k: [2, 0], amplitude: 1.0, phase: 0.0 };
        c.diag_every = 3;
        let out = run(&c).unwrap();
        let times = out.table.times().unwrap();
        assert_eq!(*times.last().unwrap(), 0.3);
        let dts = out.table.column("dt").unwrap();
        let slowest = out.table.column("u_linf").unwrap().into_iter().fold(f64::INFINITY, f64::min);
        assert!(dts.iter().all(|dt| *dt > 0.0 && *dt * slowest <= 0.5 * 2.0 * PI / 32.0 + 1e-15));
    }

    #[test]
    fn run_directory_contents() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::new(16, 0.1, 0.01, 0.05);
        c.theta0 = InitialData::Mode { k: [1, 2], amplitude: 1.0, phase: 0.0 };
        c.snapshot_every = 2;
        run_to_dir(&c, dir.path()).unwrap();
        let back = RunConfig::from_path(&dir.path().join(CONFIG_FILE)).unwrap();
        assert_eq!(back, c);
        let table = ChannelTable::read_csv(&dir.path().join(DIAGNOSTICS_FILE)).unwrap();
        assert_eq!(table.len(), 2);
        let snaps = std::fs::read_dir(dir.path().join(SNAPSHOT_DIR)).unwrap().count();
        assert_eq!(snaps, 8);
    }
}
