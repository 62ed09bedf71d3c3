use std::path::Path;

use serde::{Deserialize, Serialize};

use super::derivative::time_derivative;
use super::report::{EstimateReport, INEQUALITY_SLACK};
use super::yudovich::yudovich_norm;
use crate::dynamics::{initial_state, mollify, ChannelTable, RunConfig, Simulation, SolverState, TimeIntegrals};
use crate::error::{Error, Result};
use crate::initial_data::InitialData;
use crate::spectral::{biot_savart, Axis, Exponent, ScalarField};

/// Exponents at which the velocity-difference inequality is checked.
pub const TWIN_EXPONENTS: [f64; 3] = [2.0, 4.0, 8.0];
/// Stand-in for an exactly vanishing separation where a ratio needs a denominator.
pub const SEPARATION_GUARD: f64 = 1e-300;

/// Vorticity perturbation added to the second run of a twin pair.
///
/// The shape is rescaled so that the velocity it induces has sup norm `amplitude`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub omega: InitialData,
    pub amplitude: f64,
}

impl Perturbation {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::config("<perturbation>", e.to_string()))
    }

    /// The vorticity increment on the grid of `base`.
    pub fn build(&self, config: &RunConfig, base: &SolverState) -> Result<ScalarField> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::config("amplitude", "must be finite and nonnegative"));
        }
        let grid = base.grid();
        let mut shape = self.omega.build(grid, config.seed.wrapping_add(2))?.without_mean();
        if let Some(level) = config.mollify_level {
            shape = mollify(&shape, level)?;
        }
        let sup = biot_savart(&shape)?.lp_norm(Exponent::Infinity);
        if sup == 0.0 || self.amplitude == 0.0 {
            return Ok(ScalarField::zeros(grid));
        }
        Ok(shape.scaled(self.amplitude / sup))
    }
}

/// Rejects pairs of configurations whose numerics differ.
pub fn check_twin_compatible(a: &RunConfig, b: &RunConfig) -> Result<()> {
    let mismatch = |field: &str, x: String, y: String| {
        Err(Error::TwinMismatch(format!("`{field}` differs ({x} vs {y})")))
    };
    if a.n != b.n {
        return mismatch("n", a.n.to_string(), b.n.to_string());
    }
    if a.kappa != b.kappa {
        return mismatch("kappa", a.kappa.to_string(), b.kappa.to_string());
    }
    if a.dt != b.dt {
        return mismatch("dt", format!("{:?}", a.dt), format!("{:?}", b.dt));
    }
    if a.t_end != b.t_end {
        return mismatch("t_end", a.t_end.to_string(), b.t_end.to_string());
    }
    if a.system != b.system {
        return mismatch("system", format!("{:?}", a.system), format!("{:?}", b.system));
    }
    if a.diag_every != b.diag_every {
        return mismatch("diag_every", a.diag_every.to_string(), b.diag_every.to_string());
    }
    if a.dt.is_none() {
        return Err(Error::TwinMismatch(
            "adaptive time steps would desynchronize the pair; set `dt`".into(),
        ));
    }
    Ok(())
}

/// Separation channels and the checks built on them.
#[derive(Clone, Debug)]
pub struct TwinOutput {
    pub table: ChannelTable,
    pub reports: Vec<EstimateReport>,
    pub config_hash: String,
}

fn exponent_label(p: f64) -> String {
    Exponent::Finite(p).label()
}

/// Column names of the separation table.
pub fn twin_columns() -> Vec<String> {
    let mut c: Vec<String> = [
        "time",
        "delta_theta_l2",
        "delta_u_l2",
        "delta_u_linf",
        "grad_theta1_linf",
        "yudovich1",
        "gamma",
        "Gamma",
        "X",
        "Y",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for p in TWIN_EXPONENTS {
        c.push(format!("X_bound_p{}", exponent_label(p)));
    }
    c
}

/// Running quantities of the separation between two states.
struct SeparationRecorder {
    r: f64,
    p_max: f64,
    gamma_integral: TimeIntegrals,
    /// `∫ L M^{2/p} e^{−(2/p)Γ}` for each exponent.
    forcing: TimeIntegrals,
    initial_x: Option<f64>,
    table: ChannelTable,
}

impl SeparationRecorder {
    fn new(config: &RunConfig) -> Self {
        let names = TWIN_EXPONENTS.iter().map(|p| exponent_label(*p)).collect();
        SeparationRecorder {
            r: config.yudovich_r,
            p_max: config.yudovich_p_max,
            gamma_integral: TimeIntegrals::new(vec!["gamma".into()]),
            forcing: TimeIntegrals::new(names),
            initial_x: None,
            table: ChannelTable::new(twin_columns()),
        }
    }

    fn record(&mut self, first: &SolverState, second: &SolverState) -> Result<()> {
        let time = first.time;
        let delta_theta = &second.theta - &first.theta;
        let delta_u = biot_savart(&(&second.omega - &first.omega))?;
        let u1 = first.velocity()?;
        let a = delta_u.l2_norm();
        let b = delta_theta.l2_norm();
        let m = delta_u.lp_norm(Exponent::Infinity);
        let grad_theta = {
            let d1 = first.theta.partial(Axis::X1);
            let d2 = first.theta.partial(Axis::X2);
            crate::spectral::VelocityField::new(d1, d2)?.lp_norm(Exponent::Infinity)
        };
        let yudovich = yudovich_norm(&u1, self.r, self.p_max)?.value;
        let gamma = 0.5 * (1.0 + grad_theta);

        self.gamma_integral.record(time, &[gamma]);
        let big_gamma = self.gamma_integral.values()[0];
        let integrands: Vec<f64> = TWIN_EXPONENTS
            .iter()
            .map(|p| yudovich * m.powf(2.0 / p) * (-(2.0 / p) * big_gamma).exp())
            .collect();
        self.forcing.record(time, &integrands);

        let x = a * a + b * b;
        let x0 = *self.initial_x.get_or_insert(x);
        let mut row = vec![
            time,
            b,
            a,
            m,
            grad_theta,
            yudovich,
            gamma,
            big_gamma,
            x,
            (-2.0 * big_gamma).exp() * x,
        ];
        for (p, integral) in TWIN_EXPONENTS.iter().zip(self.forcing.values()) {
            row.push(separation_bound(x0, *p, big_gamma, *integral));
        }
        self.table.push(row);
        Ok(())
    }
}

/// `e^{2Γ}(X₀^{1/p} + 2F)^p`, the integrated separation bound.
pub fn separation_bound(x0: f64, p: f64, big_gamma: f64, forcing_integral: f64) -> f64 {
    (2.0 * big_gamma).exp() * (x0.powf(1.0 / p) + 2.0 * forcing_integral).powf(p)
}

/// Runs the configured data and its perturbation side by side.
pub fn twin_run(config: &RunConfig, perturbation: &Perturbation) -> Result<TwinOutput> {
    twin_run_pair(config, config, perturbation)
}

/// Twin run where the perturbed member has its own (compatible) configuration.
pub fn twin_run_pair(config: &RunConfig, partner: &RunConfig, perturbation: &Perturbation) -> Result<TwinOutput> {
    config.validate()?;
    partner.validate()?;
    check_twin_compatible(config, partner)?;
    let base = initial_state(config)?;
    let delta = perturbation.build(config, &base)?;
    let mut other = initial_state(partner)?;
    other.omega = &other.omega + &delta;
    let mut first = Simulation::from_state(config, base)?;
    let mut second = Simulation::from_state(partner, other)?;
    let mut separation = SeparationRecorder::new(config);
    separation.record(first.state(), second.state())?;
    while !first.is_finished() {
        std::thread::scope(|s| -> Result<()> {
            let handle = s.spawn(|| advance_to_output(&mut second));
            advance_to_output(&mut first)?;
            handle.join().expect("twin worker panicked")
        })?;
        if first.state().time != second.state().time {
            return Err(Error::TwinMismatch(format!(
                "members drifted apart in time ({} vs {})",
                first.state().time,
                second.state().time
            )));
        }
        separation.record(first.state(), second.state())?;
    }
    let table = separation.table;
    let reports = check_twin_table(&table)?
        .into_iter()
        .map(|r| r.with_hash(Some(&config.config_hash())))
        .collect();
    Ok(TwinOutput {
        table,
        reports,
        config_hash: config.config_hash(),
    })
}

fn advance_to_output(sim: &mut Simulation) -> Result<()> {
    loop {
        sim.advance()?;
        if sim.just_recorded() {
            return Ok(());
        }
    }
}

/// The two differential inequalities and the integrated bound, read from a separation table.
pub fn check_twin_table(table: &ChannelTable) -> Result<Vec<EstimateReport>> {
    let columns = twin_columns();
    let names: Vec<&str> = columns.iter().map(String::as_str).collect();
    table.require(&names)?;
    let col = |n: &str| table.column(n).expect("presence checked");
    let t = col("time");
    let (a, b, m, g, l, x) = (
        col("delta_u_l2"),
        col("delta_theta_l2"),
        col("delta_u_linf"),
        col("grad_theta1_linf"),
        col("yudovich1"),
        col("X"),
    );
    // ½ d/dt ‖·‖² = ‖·‖ d/dt ‖·‖
    let half_derivative = |v: &[f64]| -> Vec<f64> {
        v.iter().zip(time_derivative(&t, v)).map(|(s, d)| s * d).collect()
    };
    let du = half_derivative(&a);
    let dtheta = half_derivative(&b);
    let mut out = Vec::new();
    for p in TWIN_EXPONENTS {
        let rhs = (0..t.len())
            .map(|i| p * l[i] * m[i].powf(2.0 / p) * a[i].powf(2.0 - 2.0 / p) + a[i] * b[i])
            .collect();
        out.push(
            EstimateReport::inequality(
                &format!("twin_velocity_difference_p{}", exponent_label(p)),
                t.clone(),
                du.clone(),
                rhs,
                INEQUALITY_SLACK,
            )
            .with_truncation("log-Lipschitz functional over a dyadic exponent grid")
            .with_note("norm times the three-point difference quotient of the recorded norm"),
        );
    }
    let rhs = (0..t.len()).map(|i| g[i] * a[i] * b[i]).collect();
    out.push(
        EstimateReport::inequality("twin_temperature_difference", t.clone(), dtheta, rhs, INEQUALITY_SLACK)
            .with_note("norm times the three-point difference quotient of the recorded norm"),
    );
    for p in TWIN_EXPONENTS {
        let label = exponent_label(p);
        let bound = col(&format!("X_bound_p{label}"));
        let mut report = EstimateReport::inequality(
            &format!("twin_separation_bound_p{label}"),
            t.clone(),
            x.clone(),
            bound.clone(),
            INEQUALITY_SLACK,
        );
        if let (Some(xe), Some(be)) = (x.last(), bound.last()) {
            report = report.with_note(format!("bound / measured at the final time: {:.6e}", be / xe.max(SEPARATION_GUARD)));
        }
        out.push(report);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// RK4 on `X' = 2pL M^{2/p} X^{1−1/p} + 2γX` with smooth coefficient functions.
    fn majorant_ode(
        p: f64,
        x0: f64,
        t_end: f64,
        steps: usize,
        l: impl Fn(f64) -> f64,
        m: impl Fn(f64) -> f64,
        gamma: impl Fn(f64) -> f64,
    ) -> f64 {
        let rhs = |t: f64, x: f64| 2.0 * p * l(t) * m(t).powf(2.0 / p) * x.max(0.0).powf(1.0 - 1.0 / p) + 2.0 * gamma(t) * x;
        let h = t_end / steps as f64;
        let mut x = x0;
        for k in 0..steps {
            let t = k as f64 * h;
            let k1 = rhs(t, x);
            let k2 = rhs(t + h / 2.0, x + h / 2.0 * k1);
            let k3 = rhs(t + h / 2.0, x + h / 2.0 * k2);
            let k4 = rhs(t + h, x + h * k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        x
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn closed_form_bound_solves_the_majorant_equation() {
        let l = |t: f64| 1.0 + 0.5 * (3.0 * t).sin();
        let m = |t: f64| 1e-3 * (1.0 + t);
        let gamma = |t: f64| 0.5 * (1.0 + 2.0 + (2.0 * t).cos());
        let big_gamma = |t: f64| simpson(gamma, 0.0, t, 2000);
        let t_end = 0.5;
        for p in TWIN_EXPONENTS {
            for x0 in [1e-8, 1e-4, 0.3] {
                let forcing = simpson(
                    |s| l(s) * m(s).powf(2.0 / p) * (-(2.0 / p) * big_gamma(s)).exp(),
                    0.0,
                    t_end,
                    400,
                );
                let closed = separation_bound(x0, p, big_gamma(t_end), forcing);
                let brute = majorant_ode(p, x0, t_end, 20_000, l, m, gamma);
                assert!(
                    ((closed - brute) / brute).abs() < 1e-7,
                    "p = {p}, x0 = {x0}: {closed} vs {brute}"
                );
            }
        }
    }

    #[test]
    fn incompatible_pairs_are_rejected() {
        let a = RunConfig::new(32, 0.1, 1e-3, 0.1);
        let mut b = a.clone();
        b.n = 64;
        match check_twin_compatible(&a, &b) {
            Err(Error::TwinMismatch(m)) => assert!(m.contains("`n`")),
            other => panic!("{other:?}"),
        }
        let mut adaptive = a.clone();
        adaptive.dt = None;
        adaptive.cfl = Some(0.5);
        assert!(check_twin_compatible(&adaptive, &adaptive).is_err());
    }

    #[test]
    fn zero_perturbation_gives_zero_separation() {
        let mut config = RunConfig::new(32, 0.1, 1e-2, 0.05);
        config.diag_every = 1;
        config.theta0 = InitialData::Mode { k: [1, 2], amplitude: 1.0, phase: 0.0 };
        config.omega0 = InitialData::Mode { k: [2, 0], amplitude: 1.0, phase: 0.3 };
        let perturbation = Perturbation {
            omega: InitialData::Mode { k: [1, 1], amplitude: 1.0, phase: 0.0 },
            amplitude: 0.0,
        };
        let out = twin_run(&config, &perturbation).unwrap();
        assert_eq!(out.table.len(), 6);
        for name in ["delta_theta_l2", "delta_u_l2", "X"] {
            assert!(out.table.column(name).unwrap().iter().all(|v| *v == 0.0));
        }
        assert!(out.reports.iter().all(|r| r.pass), "{:?}", out.reports.iter().filter(|r| !r.pass).map(|r| &r.name).collect::<Vec<_>>());
    }

    #[test]
    fn perturbation_has_requested_velocity_sup() {
        let config = RunConfig::new(32, 0.1, 1e-2, 0.0);
        let base = SolverState::zeros(&crate::spectral::Grid::new(32).unwrap());
        let p = Perturbation {
            omega: InitialData::Mode { k: [1, 2], amplitude: 3.0, phase: 0.0 },
            amplitude: 1e-4,
        };
        let delta = p.build(&config, &base).unwrap();
        let sup = biot_savart(&delta).unwrap().lp_norm(Exponent::Infinity);
        assert!((sup - 1e-4).abs() < 1e-16);
    }
}
