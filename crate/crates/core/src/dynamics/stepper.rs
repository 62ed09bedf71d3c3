use std::sync::Arc;

use super::config::System;
use super::state::SolverState;
use crate::error::{Error, Result};
use crate::spectral::{biot_savart, Axis, Grid, PhysicalVelocity, ScalarField};

/// Guards the CFL division for states at rest.
pub const SPEED_FLOOR: f64 = 1e-12;

/// Advective right-hand sides; diffusion is left to the integrating factor.
#[derive(Clone, Debug)]
pub struct Tendency {
    pub theta: ScalarField,
    pub omega: ScalarField,
    /// `max |u|` over the grid at the evaluated state.
    pub max_speed: f64,
}

/// `dθ = −u·∇θ (+u₂)`, `dω = −u·∇ω + ∂₁θ` with `u` from Biot–Savart.
pub fn tendency(theta: &ScalarField, omega: &ScalarField, system: System) -> Result<Tendency> {
    theta.same_grid(omega)?;
    let u = biot_savart(omega)?;
    let phys = PhysicalVelocity::new(&u);
    let max_speed = phys.max_speed();
    let (d_theta, mut d_omega) = match system {
        System::Euler => (ScalarField::zeros(theta.grid()), -&phys.advect(omega)?),
        System::Boussinesq | System::Benard => {
            let (a_theta, a_omega) = phys.advect_pair(theta, omega)?;
            let mut d_theta = -&a_theta;
            if system == System::Benard {
                d_theta = &d_theta + &u.u2;
            }
            (d_theta, &theta.partial(Axis::X1) - &a_omega)
        }
    };
    // ∫u·∇ω vanishes; drop the roundoff so the mean stays exactly zero.
    d_omega.coefficients_mut()[0] = Default::default();
    Ok(Tendency {
        theta: d_theta,
        omega: d_omega,
        max_speed,
    })
}

/// Largest step allowed by `dt ≤ cfl · (2π/n) / max(‖u‖_{L^∞}, floor)`.
pub fn cfl_limit(grid: &Grid, max_speed: f64, cfl: f64) -> f64 {
    cfl * grid.spacing() / max_speed.max(SPEED_FLOOR)
}

/// Integrating-factor RK4 stepper.
///
/// `θ` is advanced in the variable `e^{−κtΔ}θ`, which turns the diffusion
/// into exact multiplications by `e^{κhΔ}` and `e^{κhΔ/2}`; `ω` uses plain RK4.
/// The dissipation `2κ∫‖∇θ‖²` rides along as an extra RK4 component.
#[derive(Clone, Debug)]
pub struct Stepper {
    grid: Arc<Grid>,
    kappa: f64,
    system: System,
    cfl: f64,
    factors: Option<(f64, Vec<f64>, Vec<f64>)>,
}

impl Stepper {
    pub fn new(grid: &Arc<Grid>, kappa: f64, system: System, cfl: f64) -> Result<Self> {
        if kappa < 0.0 || !kappa.is_finite() {
            return Err(Error::NegativeDiffusion(kappa));
        }
        Ok(Stepper {
            grid: Arc::clone(grid),
            kappa,
            system,
            cfl,
            factors: None,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn system(&self) -> System {
        self.system
    }

    pub fn cfl(&self) -> f64 {
        self.cfl
    }

    fn heat_factors(&mut self, dt: f64) -> (&[f64], &[f64]) {
        if self.factors.as_ref().map(|f| f.0) != Some(dt) {
            let grid = &self.grid;
            let rates: Vec<f64> = (0..grid.len())
                .map(|idx| {
                    let k1 = grid.derivative_wavenumber(Axis::X1, idx);
                    let k2 = grid.derivative_wavenumber(Axis::X2, idx);
                    self.kappa * (k1 * k1 + k2 * k2)
                })
                .collect();
            let half = rates.iter().map(|r| (-0.5 * dt * r).exp()).collect();
            let full = rates.iter().map(|r| (-dt * r).exp()).collect();
            self.factors = Some((dt, half, full));
        }
        let (_, half, full) = self.factors.as_ref().expect("factors just set");
        (half, full)
    }

    fn dissipation_rate(&self, theta: &ScalarField) -> f64 {
        2.0 * self.kappa * theta.gradient_l2_squared()
    }

    /// Adaptive step at the current state: the CFL limit itself.
    pub fn adaptive_dt(&self, state: &SolverState) -> Result<f64> {
        let speed = PhysicalVelocity::new(&state.velocity()?).max_speed();
        Ok(cfl_limit(&self.grid, speed, self.cfl))
    }

    /// Advances `state` by `dt`, refusing steps above the CFL limit.
    pub fn step(&mut self, state: &SolverState, dt: f64) -> Result<SolverState> {
        self.grid.ensure_same(state.grid())?;
        let h = dt;
        let (theta, omega) = (&state.theta, &state.omega);

        let k1 = tendency(theta, omega, self.system)?;
        let limit = cfl_limit(&self.grid, k1.max_speed, self.cfl);
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation {
                time: state.time,
                dt,
                limit,
                u_max: k1.max_speed,
            });
        }
        let system = self.system;
        let (half, full) = self.heat_factors(dt);
        let (half, full) = (half.to_vec(), full.to_vec());

        let theta_a = theta.axpy(0.5 * h, &k1.theta).multiply_by(&half);
        let omega_a = omega.axpy(0.5 * h, &k1.omega);
        let k2 = tendency(&theta_a, &omega_a, system)?;

        let theta_half = theta.multiply_by(&half);
        let theta_b = theta_half.axpy(0.5 * h, &k2.theta);
        let omega_b = omega.axpy(0.5 * h, &k2.omega);
        let k3 = tendency(&theta_b, &omega_b, system)?;

        let theta_full = theta.multiply_by(&full);
        let theta_c = theta_full.axpy(h, &k3.theta.multiply_by(&half));
        let omega_c = omega.axpy(h, &k3.omega);
        let k4 = tendency(&theta_c, &omega_c, system)?;

        let mid = (&k2.theta + &k3.theta).multiply_by(&half);
        let theta_incr = &(&k1.theta.multiply_by(&full) + &mid.scaled(2.0)) + &k4.theta;
        let new_theta = theta_full.axpy(h / 6.0, &theta_incr);
        let omega_incr = &(&k1.omega + &(&k2.omega + &k3.omega).scaled(2.0)) + &k4.omega;
        let new_omega = omega.axpy(h / 6.0, &omega_incr);

        let dissipation = state.dissipation
            + h / 6.0
                * (self.dissipation_rate(theta)
                    + 2.0 * self.dissipation_rate(&theta_a)
                    + 2.0 * self.dissipation_rate(&theta_b)
                    + self.dissipation_rate(&theta_c));

        let next = SolverState {
            time: state.time + dt,
            theta: new_theta,
            omega: new_omega,
            dissipation,
            integrals: state.integrals.clone(),
        };
        if !next.is_finite() {
            return Err(Error::NonFinite { time: next.time });
        }
        Ok(next)
    }
}

/// One step with a fresh [`Stepper`] at the default CFL number.
pub fn step(state: &SolverState, dt: f64, kappa: f64, system: System) -> Result<SolverState> {
    Stepper::new(state.grid(), kappa, system, super::config::DEFAULT_CFL)?.step(state, dt)
}
