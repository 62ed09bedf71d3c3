use super::config::{RunConfig, System};
use super::state::{SolverState, TimeIntegrals};
use super::table::ChannelTable;
use crate::error::Result;
use crate::estimates::{yudovich_from_samples, yudovich_grid};
use crate::littlewood_paley::{
    besov_from_block_norms, block_norms, bony_advection, remainder, velocity_block_norms,
};
use crate::spectral::{
    biot_savart, lp_norm_samples, magnitude, Axis, Exponent, PhysicalVelocity, ScalarField,
    VelocityField,
};

const SUMMABLE: Exponent = Exponent::Finite(1.0);

/// Which channels a run records and how they are computed.
///
/// The column order is fixed by the plan, so two runs of the same config
/// produce identical headers.
#[derive(Clone, Debug)]
pub struct DiagnosticPlan {
    pub kappa: f64,
    pub system: System,
    pub p_grid: Vec<Exponent>,
    pub alpha_grid: Vec<Exponent>,
    pub gradient_grid: Vec<Exponent>,
    pub yudovich_r: f64,
    pub yudovich_p_max: f64,
    pub bony: bool,
}

fn besov_alpha_regularity(alpha: Exponent) -> f64 {
    match alpha {
        Exponent::Finite(a) => -1.0 + 2.0 / a,
        Exponent::Infinity => -1.0,
    }
}

impl DiagnosticPlan {
    pub fn from_config(config: &RunConfig) -> Self {
        let mut gradient_grid: Vec<Exponent> = config.p_grid.clone();
        for p in yudovich_grid(config.yudovich_r, config.yudovich_p_max) {
            gradient_grid.push(Exponent::Finite(p));
        }
        gradient_grid.push(Exponent::Infinity);
        gradient_grid.sort_by(|a, b| a.value().total_cmp(&b.value()));
        gradient_grid.dedup();
        DiagnosticPlan {
            kappa: config.kappa,
            system: config.system,
            p_grid: config.p_grid.clone(),
            alpha_grid: config.alpha_grid.clone(),
            gradient_grid,
            yudovich_r: config.yudovich_r,
            yudovich_p_max: config.yudovich_p_max,
            bony: config.bony_diagnostics,
        }
    }

    fn finite_alphas(&self) -> impl Iterator<Item = Exponent> + '_ {
        self.alpha_grid.iter().copied().filter(|a| a.finite().is_some())
    }

    /// Channels evaluated from the state at a single instant.
    pub fn instant_columns(&self) -> Vec<String> {
        let mut c: Vec<String> = [
            "time", "step", "dt", "theta_mean", "omega_mean", "theta_l2", "grad_theta_l2",
            "theta_h1", "grad_theta_linf", "u_l2", "u_linf", "u1_linf", "u2_linf",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        c.extend(self.p_grid.iter().map(|p| format!("omega_l{p}")));
        c.extend(self.p_grid.iter().map(|p| format!("d1theta_l{p}")));
        c.extend(self.gradient_grid.iter().map(|p| format!("grad_u_l{p}")));
        c.extend(
            [
                "yudovich", "yudovich_p", "theta_besov_m1", "theta_besov_0", "theta_besov_1",
                "theta_besov_0_inf",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        c.extend(self.alpha_grid.iter().map(|a| format!("theta_besov_alpha{a}")));
        c.extend(
            [
                "d1theta_besov_0", "d1theta_besov_m1", "d2theta_besov_m1", "omega_besov_0",
                "u_besov_1_inf", "adv_besov_m1",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        if self.bony {
            c.extend(
                [
                    "bony_remainder_div_besov_m1",
                    "bony_para_grad_low_besov_m1",
                    "bony_para_vel_low_besov_m1",
                    "remainder_besov_1_inf",
                ]
                .iter()
                .map(|s| s.to_string()),
            );
        }
        c.extend(
            ["theta_u2", "dissipation_rate", "g_core"]
                .iter()
                .map(|s| s.to_string()),
        );
        c
    }

    /// Trapezoid integrals, in the order of [`DiagnosticPlan::integrands`].
    pub fn integral_columns(&self) -> Vec<String> {
        let mut c: Vec<String> = self.p_grid.iter().map(|p| format!("int_d1theta_l{p}")).collect();
        c.extend(
            [
                "int_d1theta_besov_0", "int_adv_besov_m1", "int_grad_u_linf", "int_theta_h1_u_l2",
                "int_g_core", "int_theta_u2",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        c.extend(self.finite_alphas().map(|a| format!("int_theta_besov_alpha{a}_pow")));
        c
    }

    /// Channels derived from instants and integrals.
    pub fn derived_columns(&self) -> Vec<String> {
        let mut c = vec!["int_dissipation".to_owned()];
        c.extend(self.alpha_grid.iter().map(|a| format!("Theta_alpha{a}")));
        c.push("Theta".into());
        c.push("f_core".into());
        c
    }

    pub fn columns(&self) -> Vec<String> {
        let mut c = self.instant_columns();
        c.extend(self.integral_columns());
        c.extend(self.derived_columns());
        c
    }

    pub fn empty_table(&self) -> ChannelTable {
        ChannelTable::new(self.columns())
    }

    /// Instantaneous channels, in [`DiagnosticPlan::instant_columns`] order.
    pub fn evaluate(&self, state: &SolverState, step: usize, dt: f64) -> Result<Vec<(String, f64)>> {
        let grid = state.grid();
        let area = grid.cell_area();
        let (theta, omega) = (&state.theta, &state.omega);
        let u = biot_savart(omega)?;
        let phys = PhysicalVelocity::new(&u);
        let mut out: Vec<(String, f64)> = Vec::with_capacity(96);
        let mut put = |name: &str, v: f64| out.push((name.to_owned(), v));

        put("time", state.time);
        put("step", step as f64);
        put("dt", dt);
        put("theta_mean", theta.mean());
        put("omega_mean", omega.mean());
        let theta_l2 = theta.l2_norm();
        let grad_theta_sq = theta.gradient_l2_squared();
        let theta_h1 = (theta_l2 * theta_l2 + grad_theta_sq).sqrt();
        put("theta_l2", theta_l2);
        put("grad_theta_l2", grad_theta_sq.sqrt());
        put("theta_h1", theta_h1);

        let d1 = theta.partial(Axis::X1);
        let d2 = theta.partial(Axis::X2);
        let (d1p, d2p) = ScalarField::to_physical_pair(&d1, &d2);
        put(
            "grad_theta_linf",
            lp_norm_samples(&magnitude(&[&d1p, &d2p]), Exponent::Infinity, area),
        );
        let u_l2 = u.l2_norm();
        let u_linf = phys.max_speed();
        put("u_l2", u_l2);
        put("u_linf", u_linf);
        put("u1_linf", lp_norm_samples(&phys.u1, Exponent::Infinity, area));
        put("u2_linf", lp_norm_samples(&phys.u2, Exponent::Infinity, area));

        let omega_p = omega.to_physical();
        for p in &self.p_grid {
            put(&format!("omega_l{p}"), lp_norm_samples(&omega_p, *p, area));
        }
        for p in &self.p_grid {
            put(&format!("d1theta_l{p}"), lp_norm_samples(&d1p, *p, area));
        }
        let grad_u = u.gradient_magnitude();
        for p in &self.gradient_grid {
            put(&format!("grad_u_l{p}"), lp_norm_samples(&grad_u, *p, area));
        }
        let yudovich = yudovich_from_samples(&grad_u, area, self.yudovich_r, self.yudovich_p_max)?;
        put("yudovich", yudovich.value);
        put("yudovich_p", yudovich.p_star);

        let theta_blocks = block_norms(theta, Exponent::Infinity);
        put("theta_besov_m1", besov_from_block_norms(&theta_blocks, -1.0, SUMMABLE));
        put("theta_besov_0", besov_from_block_norms(&theta_blocks, 0.0, SUMMABLE));
        put("theta_besov_1", besov_from_block_norms(&theta_blocks, 1.0, SUMMABLE));
        put(
            "theta_besov_0_inf",
            besov_from_block_norms(&theta_blocks, 0.0, Exponent::Infinity),
        );
        for a in &self.alpha_grid {
            put(
                &format!("theta_besov_alpha{a}"),
                besov_from_block_norms(&theta_blocks, besov_alpha_regularity(*a), SUMMABLE),
            );
        }
        let d1_blocks = block_norms(&d1, Exponent::Infinity);
        put("d1theta_besov_0", besov_from_block_norms(&d1_blocks, 0.0, SUMMABLE));
        put("d1theta_besov_m1", besov_from_block_norms(&d1_blocks, -1.0, SUMMABLE));
        let d2_blocks = block_norms(&d2, Exponent::Infinity);
        put("d2theta_besov_m1", besov_from_block_norms(&d2_blocks, -1.0, SUMMABLE));
        let omega_blocks = block_norms(omega, Exponent::Infinity);
        put("omega_besov_0", besov_from_block_norms(&omega_blocks, 0.0, SUMMABLE));
        let u_blocks = velocity_block_norms(&u, Exponent::Infinity);
        put("u_besov_1_inf", besov_from_block_norms(&u_blocks, 1.0, Exponent::Infinity));
        let advection = phys.advect(theta)?;
        let m1 = |f: &ScalarField| besov_from_block_norms(&block_norms(f, Exponent::Infinity), -1.0, SUMMABLE);
        put("adv_besov_m1", m1(&advection));

        if self.bony {
            if theta_l2 == 0.0 || u_l2 == 0.0 {
                for name in [
                    "bony_remainder_div_besov_m1",
                    "bony_para_grad_low_besov_m1",
                    "bony_para_vel_low_besov_m1",
                    "remainder_besov_1_inf",
                ] {
                    put(name, 0.0);
                }
            } else {
                let pieces = bony_advection(&u, theta)?;
                put("bony_remainder_div_besov_m1", m1(&pieces.remainder_divergence));
                put("bony_para_grad_low_besov_m1", m1(&pieces.paraproduct_gradient_low));
                put("bony_para_vel_low_besov_m1", m1(&pieces.paraproduct_velocity_low));
                let rem = VelocityField::new(remainder(&u.u1, theta)?, remainder(&u.u2, theta)?)?;
                put(
                    "remainder_besov_1_inf",
                    besov_from_block_norms(
                        &velocity_block_norms(&rem, Exponent::Infinity),
                        1.0,
                        Exponent::Infinity,
                    ),
                );
            }
        }

        put("theta_u2", theta.inner(&u.u2));
        put("dissipation_rate", 2.0 * self.kappa * grad_theta_sq);
        let g_core = if self.kappa > 0.0 {
            theta_h1 + u_l2 * theta_l2 / self.kappa
        } else {
            f64::NAN
        };
        put("g_core", g_core);
        Ok(out)
    }

    /// Integrands for [`DiagnosticPlan::integral_columns`], read from an instant row.
    pub fn integrands(&self, instant: &[(String, f64)]) -> Vec<f64> {
        let get = |name: &str| -> f64 {
            instant
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, v)| *v)
                .unwrap_or_else(|| panic!("instant channel `{name}` is planned"))
        };
        let mut v: Vec<f64> = self.p_grid.iter().map(|p| get(&format!("d1theta_l{p}"))).collect();
        v.push(get("d1theta_besov_0"));
        v.push(get("adv_besov_m1"));
        v.push(get("grad_u_linf"));
        v.push(get("theta_h1") * get("u_l2"));
        v.push(get("g_core"));
        v.push(get("theta_u2"));
        for a in self.finite_alphas() {
            let alpha = a.value();
            v.push(get(&format!("theta_besov_alpha{a}")).powf(alpha));
        }
        v
    }
}

/// Turns states into table rows, keeping the running integrals and maxima.
#[derive(Clone, Debug)]
pub struct Recorder {
    plan: DiagnosticPlan,
    table: ChannelTable,
    initial_besov_m1: Option<f64>,
    running_sup: f64,
}

impl Recorder {
    pub fn new(plan: DiagnosticPlan) -> Self {
        let table = plan.empty_table();
        Recorder {
            plan,
            table,
            initial_besov_m1: None,
            running_sup: 0.0,
        }
    }

    pub fn plan(&self) -> &DiagnosticPlan {
        &self.plan
    }

    pub fn table(&self) -> &ChannelTable {
        &self.table
    }

    pub fn into_table(self) -> ChannelTable {
        self.table
    }

    /// Evaluates `state`, closes the integration interval and appends a row.
    pub fn record(&mut self, state: &mut SolverState, step: usize, dt: f64) -> Result<()> {
        if state.integrals.names().is_empty() {
            state.integrals = TimeIntegrals::new(self.plan.integral_columns());
        }
        let mut row = self.plan.evaluate(state, step, dt)?;
        let integrands = self.plan.integrands(&row);
        state.integrals.record(state.time, &integrands);
        for (name, value) in state.integrals.names().iter().zip(state.integrals.values()) {
            row.push((name.clone(), *value));
        }

        let get = |row: &[(String, f64)], name: &str| -> f64 {
            row.iter().find(|(n, _)| n == name).map(|(_, v)| *v).unwrap_or(f64::NAN)
        };
        let besov_m1 = get(&row, "theta_besov_m1");
        let initial = *self.initial_besov_m1.get_or_insert(besov_m1);
        self.running_sup = self.running_sup.max(besov_m1);
        row.push(("int_dissipation".into(), state.dissipation));
        let kappa = self.plan.kappa;
        let mut theta_max = 0.0_f64;
        for a in self.plan.alpha_grid.clone() {
            let value = match a {
                Exponent::Infinity => self.running_sup,
                Exponent::Finite(alpha) => {
                    let integral = get(&row, &format!("int_theta_besov_alpha{a}_pow"));
                    kappa.powf(1.0 / alpha) * integral.powf(1.0 / alpha)
                }
            };
            theta_max = theta_max.max(value);
            row.push((format!("Theta_alpha{a}"), value));
        }
        row.push(("Theta".into(), theta_max));
        let f_core = (1.0 + kappa * state.time) * (initial + get(&row, "int_theta_h1_u_l2"));
        row.push(("f_core".into(), f_core));
        self.table.push_named(&row);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn columns_are_unique_and_complete() {
        let plan = DiagnosticPlan::from_config(&RunConfig::new(32, 0.1, 0.01, 0.1));
        let cols = plan.columns();
        let mut sorted = cols.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), cols.len());
        for name in ["theta_l2", "omega_linf", "grad_u_l64", "grad_u_linf", "Theta", "int_dissipation"] {
            assert!(cols.iter().any(|c| c == name), "{name}");
        }
    }

    #[test]
    fn zero_state_has_zero_channels() {
        let grid = Grid::new(32).unwrap();
        let plan = DiagnosticPlan::from_config(&RunConfig::new(32, 0.1, 0.01, 0.1));
        let mut rec = Recorder::new(plan);
        let mut state = SolverState::zeros(&grid);
        rec.record(&mut state, 0, 0.01).unwrap();
        let row = rec.table().last_row().unwrap();
        for (name, v) in rec.table().columns().iter().zip(row) {
            if name != "dt" && name != "yudovich_p" {
                assert_eq!(*v, 0.0, "{name}");
            }
        }
    }

    #[test]
    fn single_mode_channels_match_closed_forms() {
        let grid = Grid::new(64).unwrap();
        let theta = ScalarField::from_fn(&grid, |x1, _| x1.sin());
        let omega = ScalarField::from_fn(&grid, |_, x2| (2.0 * x2).cos());
        let state = SolverState::new(theta, omega).unwrap();
        let plan = DiagnosticPlan::from_config(&RunConfig::new(64, 0.1, 0.01, 0.1));
        let row = plan.evaluate(&state, 0, 0.01).unwrap();
        let get = |n: &str| row.iter().find(|(k, _)| k == n).unwrap().1;
        let norm = PI * 2f64.sqrt();
        assert!((get("theta_l2") - norm).abs() < 1e-12);
        assert!((get("grad_theta_l2") - norm).abs() < 1e-12);
        assert!((get("omega_linf") - 1.0).abs() < 1e-12);
        // u = (sin(2x₂)/2, 0).
        assert!((get("u_linf") - 0.5).abs() < 1e-12);
        assert!((get("u_l2") - norm / 2.0).abs() < 1e-12);
        assert!((get("d1theta_linf") - 1.0).abs() < 1e-12);
        assert!((get("theta_u2")).abs() < 1e-12);
        // |k| = 1 is shared by Δ₋₁ and Δ₀ with weights summing to one.
        assert!((get("theta_besov_0") - 1.0).abs() < 1e-12);
        assert!((get("dissipation_rate") - 0.2 * norm * norm).abs() < 1e-10);
    }
}
