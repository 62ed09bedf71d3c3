use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{biot_savart, recover_pressure, Grid, ScalarField, VelocityField};

/// Running trapezoid-rule integrals of named integrands.
///
/// Each call to [`TimeIntegrals::record`] closes the interval since the
/// previous sample; the first call only sets the left endpoint.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeIntegrals {
    names: Vec<String>,
    values: Vec<f64>,
    last: Option<(f64, Vec<f64>)>,
}

impl TimeIntegrals {
    pub fn new(names: Vec<String>) -> Self {
        let values = vec![0.0; names.len()];
        TimeIntegrals {
            names,
            values,
            last: None,
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    /// Adds the trapezoid for `[t_last, time]` and remembers this sample.
    pub fn record(&mut self, time: f64, integrands: &[f64]) {
        assert_eq!(integrands.len(), self.names.len(), "one integrand per integral");
        if let Some((t0, prev)) = &self.last {
            let h = time - t0;
            for ((acc, a), b) in self.values.iter_mut().zip(prev).zip(integrands) {
                *acc += 0.5 * h * (a + b);
            }
        }
        self.last = Some((time, integrands.to_vec()));
    }
}

/// Temperature and vorticity at one instant, plus the quantities
/// accumulated along the way.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub time: f64,
    pub theta: ScalarField,
    /// Zero-mean vorticity.
    pub omega: ScalarField,
    /// `2κ∫₀ᵗ‖∇θ‖²_{L²}`, integrated with the same Runge–Kutta stages as the fields.
    pub dissipation: f64,
    /// Integrals sampled on the diagnostic cadence.
    pub integrals: TimeIntegrals,
}

impl SolverState {
    pub fn new(theta: ScalarField, omega: ScalarField) -> Result<Self> {
        theta.same_grid(&omega)?;
        let scale = omega.max_abs_coefficient();
        if omega.mean().abs() > 1e-12 * scale {
            return Err(Error::NonzeroMeanVorticity { mean: omega.mean() });
        }
        Ok(SolverState {
            time: 0.0,
            theta,
            omega,
            dissipation: 0.0,
            integrals: TimeIntegrals::default(),
        })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        SolverState::new(ScalarField::zeros(grid), ScalarField::zeros(grid))
            .expect("zero state is valid")
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.theta.grid()
    }

    pub fn velocity(&self) -> Result<VelocityField> {
        biot_savart(&self.omega)
    }

    /// Zero-mean pressure consistent with the current state.
    pub fn pressure(&self) -> Result<ScalarField> {
        recover_pressure(&self.theta, &self.velocity()?)
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.omega.is_finite() && self.dissipation.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_is_exact_for_linear_integrands() {
        let mut acc = TimeIntegrals::new(vec!["a".into(), "b".into()]);
        for i in 0..=10 {
            let t = 0.1 * i as f64;
            acc.record(t, &[1.0, 2.0 * t]);
        }
        assert!((acc.get("a").unwrap() - 1.0).abs() < 1e-14);
        assert!((acc.get("b").unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(acc.get("c"), None);
    }

    #[test]
    fn state_rejects_mean_vorticity() {
        let grid = Grid::new(16).unwrap();
        let omega = ScalarField::from_fn(&grid, |x1, _| 1.0 + x1.sin());
        assert!(SolverState::new(ScalarField::zeros(&grid), omega).is_err());
    }
}
