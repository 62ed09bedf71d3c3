use super::derivative::time_derivative;
use super::report::{
    EstimateReport, Trajectory, CONSTANT_CEILING, IDENTITY_TOLERANCE, INEQUALITY_SLACK,
};
use crate::dynamics::ChannelTable;
use crate::error::{Error, Result};
use crate::spectral::Exponent;

/// Reads several channels at once, reporting every missing name together.
fn channels<const N: usize>(table: &ChannelTable, names: [&str; N]) -> Result<[Vec<f64>; N]> {
    table.require(&names)?;
    Ok(names.map(|n| table.column(n).expect("presence checked")))
}

fn zip_map(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()
}

fn sup_truncation(traj: &Trajectory) -> String {
    let q_max = crate::littlewood_paley::max_block_index(traj.config.n);
    format!("dyadic blocks q <= {q_max} (n = {})", traj.config.n)
}

/// `‖θ(t)‖²_{L²} + 2κ∫₀ᵗ‖∇θ‖²_{L²} = ‖θ₀‖²_{L²}`.
pub fn check_energy_identity(traj: &Trajectory) -> Result<EstimateReport> {
    let [t, l2, diss] = channels(&traj.table, ["time", "theta_l2", "int_dissipation"])?;
    let initial = l2.first().copied().unwrap_or(0.0).powi(2);
    let lhs = zip_map(&l2, &diss, |a, d| a * a + d);
    let rhs = vec![initial; t.len()];
    Ok(EstimateReport::identity("energy_identity", t, lhs, rhs, None, IDENTITY_TOLERANCE)
        .with_hash(traj.hash()))
}

/// `‖u(t)‖_{L²} ≤ ‖u₀‖_{L²} + t‖θ₀‖_{L²}`.
pub fn check_velocity_l2(traj: &Trajectory) -> Result<EstimateReport> {
    let [t, u, theta] = channels(&traj.table, ["time", "u_l2", "theta_l2"])?;
    let (u0, th0) = (u.first().copied().unwrap_or(0.0), theta.first().copied().unwrap_or(0.0));
    let rhs = t.iter().map(|s| u0 + s * th0).collect();
    Ok(EstimateReport::inequality("velocity_l2", t, u, rhs, INEQUALITY_SLACK).with_hash(traj.hash()))
}

/// `‖ω(t)‖_{L^p} ≤ ‖ω₀‖_{L^p} + ∫₀ᵗ‖∂₁θ‖_{L^p}`, one report per `p`.
pub fn check_vorticity_transport(traj: &Trajectory, p_grid: &[Exponent]) -> Result<Vec<EstimateReport>> {
    let mut names = vec!["time".to_owned()];
    for p in p_grid {
        names.push(format!("omega_l{p}"));
        names.push(format!("int_d1theta_l{p}"));
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    traj.table.require(&refs)?;
    let t = traj.table.times()?;
    p_grid
        .iter()
        .map(|p| {
            let omega = traj.table.column(&format!("omega_l{p}"))?;
            let forcing = traj.table.column(&format!("int_d1theta_l{p}"))?;
            let w0 = omega.first().copied().unwrap_or(0.0);
            let rhs = forcing.iter().map(|f| w0 + f).collect();
            Ok(EstimateReport::inequality(
                &format!("vorticity_transport_l{p}"),
                t.clone(),
                omega,
                rhs,
                INEQUALITY_SLACK,
            )
            .with_hash(traj.hash())
            .with_note("time integral by trapezoid rule on the diagnostic cadence"))
        })
        .collect()
}

/// Bénard energy balance: two differential identities and the `e^{2t}` bound.
///
/// Derivatives of recorded norms come from three-point stencils; the
/// identity defects are measured against the largest term of each balance.
pub fn check_benard_energy(traj: &Trajectory, tolerance: f64) -> Result<Vec<EstimateReport>> {
    let [t, theta, u, coupling, rate, diss] = channels(
        &traj.table,
        ["time", "theta_l2", "u_l2", "theta_u2", "dissipation_rate", "int_dissipation"],
    )?;
    let theta_sq: Vec<f64> = theta.iter().map(|v| v * v).collect();
    let u_sq: Vec<f64> = u.iter().map(|v| v * v).collect();
    let d_theta = time_derivative(&t, &theta_sq);
    let d_u = time_derivative(&t, &u_sq);

    let lhs_theta: Vec<f64> = zip_map(&d_theta, &rate, |d, r| 0.5 * d + 0.5 * r);
    let scale_theta = (0..t.len())
        .map(|i| (0.5 * d_theta[i]).abs() + (0.5 * rate[i]).abs() + coupling[i].abs())
        .fold(0.0, f64::max);
    let temperature = EstimateReport::identity(
        "benard_temperature_balance",
        t.clone(),
        lhs_theta,
        coupling.clone(),
        Some(scale_theta),
        tolerance,
    );

    let lhs_u: Vec<f64> = d_u.iter().map(|d| 0.5 * d).collect();
    let scale_u = (0..t.len())
        .map(|i| (0.5 * d_u[i]).abs() + coupling[i].abs())
        .fold(0.0, f64::max);
    let velocity = EstimateReport::identity(
        "benard_velocity_balance",
        t.clone(),
        lhs_u,
        coupling,
        Some(scale_u),
        tolerance,
    );

    let initial = theta_sq.first().copied().unwrap_or(0.0) + u_sq.first().copied().unwrap_or(0.0);
    let lhs: Vec<f64> = (0..t.len()).map(|i| theta_sq[i] + u_sq[i] + diss[i]).collect();
    let rhs = t.iter().map(|s| initial * (2.0 * s).exp()).collect();
    let bound = EstimateReport::inequality("benard_growth_bound", t, lhs, rhs, INEQUALITY_SLACK);
    Ok(vec![
        temperature.with_hash(traj.hash()).with_note("derivatives by three-point differences"),
        velocity.with_hash(traj.hash()).with_note("derivatives by three-point differences"),
        bound.with_hash(traj.hash()),
    ])
}

/// Transport term in `B^{−1}_{∞,1}` and the three Bony pieces against their own bounds.
pub fn check_advection_besov(traj: &Trajectory) -> Result<Vec<EstimateReport>> {
    let table = &traj.table;
    let [t, adv, u_inf, w_inf, h1, b0] = channels(
        table,
        ["time", "adv_besov_m1", "u_linf", "omega_linf", "theta_h1", "theta_besov_0"],
    )?;
    let truncation = sup_truncation(traj);
    let core: Vec<f64> = (0..t.len())
        .map(|i| (u_inf[i] + w_inf[i]) * h1[i] + u_inf[i] * b0[i])
        .collect();
    let mut reports = vec![EstimateReport::empirical("advection_besov", t.clone(), adv, core, CONSTANT_CEILING)];

    if table.has("bony_remainder_div_besov_m1") {
        let [rem, rem_div, para_grad, para_vel, b0_inf, u_b1, u1, u2, d1, d2] = channels(
            table,
            [
                "remainder_besov_1_inf",
                "bony_remainder_div_besov_m1",
                "bony_para_grad_low_besov_m1",
                "bony_para_vel_low_besov_m1",
                "theta_besov_0_inf",
                "u_besov_1_inf",
                "u1_linf",
                "u2_linf",
                "d1theta_besov_m1",
                "d2theta_besov_m1",
            ],
        )?;
        let remainder_core = zip_map(&b0_inf, &u_b1, |a, b| a * b);
        reports.push(EstimateReport::empirical("remainder_besov", t.clone(), rem, remainder_core, CONSTANT_CEILING));
        let div_core: Vec<f64> = (0..t.len()).map(|i| h1[i] * (u_inf[i] + w_inf[i])).collect();
        reports.push(EstimateReport::empirical(
            "remainder_divergence_besov",
            t.clone(),
            rem_div,
            div_core,
            CONSTANT_CEILING,
        ));
        let para_core: Vec<f64> = (0..t.len()).map(|i| u1[i] * d1[i] + u2[i] * d2[i]).collect();
        reports.push(EstimateReport::empirical(
            "paraproduct_gradient_low",
            t.clone(),
            para_grad,
            para_core.clone(),
            CONSTANT_CEILING,
        ));
        reports.push(EstimateReport::empirical(
            "paraproduct_velocity_low",
            t,
            para_vel,
            para_core,
            CONSTANT_CEILING,
        ));
    }
    Ok(reports
        .into_iter()
        .map(|r| r.with_truncation(truncation.clone()).with_hash(traj.hash()))
        .collect())
}

/// Parabolic smoothing: `Θ_α(t) ≤ C(1+κt)^{1/α}(‖θ₀‖_{B^{−1}_{∞,1}} + ∫‖u·∇θ‖_{B^{−1}_{∞,1}})`.
pub fn check_smoothing(traj: &Trajectory) -> Result<Vec<EstimateReport>> {
    require_diffusion(traj, "smoothing")?;
    let [t, b_m1, adv] = channels(&traj.table, ["time", "theta_besov_m1", "int_adv_besov_m1"])?;
    let kappa = traj.config.kappa;
    let initial = b_m1.first().copied().unwrap_or(0.0);
    let truncation = format!(
        "alpha grid {:?}; {}",
        traj.config.alpha_grid.iter().map(|a| a.label()).collect::<Vec<_>>(),
        sup_truncation(traj)
    );
    traj.config
        .alpha_grid
        .iter()
        .map(|a| {
            let lhs = traj.table.column(&format!("Theta_alpha{a}"))?;
            let inv = match a {
                Exponent::Finite(alpha) => 1.0 / alpha,
                Exponent::Infinity => 0.0,
            };
            let core = (0..t.len())
                .map(|i| (1.0 + kappa * t[i]).powf(inv) * (initial + adv[i]))
                .collect();
            Ok(EstimateReport::empirical(&format!("smoothing_alpha{a}"), t.clone(), lhs, core, CONSTANT_CEILING)
                .with_truncation(truncation.clone())
                .with_hash(traj.hash()))
        })
        .collect()
}

fn require_diffusion(traj: &Trajectory, what: &str) -> Result<()> {
    if traj.config.kappa > 0.0 {
        Ok(())
    } else {
        Err(Error::config("kappa", format!("the {what} check needs kappa > 0")))
    }
}

/// Right side of the integrated Gronwall bound for a trial constant `c`.
fn gronwall_rhs(c: f64, kappa: f64, t: f64, f_core: f64, int_g: f64, omega0: f64) -> f64 {
    let growth = (1.0 + kappa * t).powi(2);
    (c * f_core + growth * omega0 * c * int_g) * (c * c / kappa * growth * int_g).exp()
}

/// Smallest `C ≥ 0` with `Θ(t) ≤ gronwall_rhs(C, …)` at every sample, by bisection.
fn smallest_gronwall_constant(
    kappa: f64,
    t: &[f64],
    theta: &[f64],
    f_core: &[f64],
    int_g: &[f64],
    omega0: f64,
) -> f64 {
    let holds = |c: f64| {
        (0..t.len()).all(|i| theta[i] <= gronwall_rhs(c, kappa, t[i], f_core[i], int_g[i], omega0))
    };
    if holds(0.0) {
        return 0.0;
    }
    let mut hi = 1.0;
    while !holds(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    hi
}

/// Gronwall chain: the integrated bound on `Θ` with a single fitted constant,
/// and the vorticity bound `‖ω(t)‖_{L^∞} ≤ ‖ω₀‖_{L^∞} + Cκ^{−1}Θ(t)`.
pub fn check_gronwall_chain(traj: &Trajectory) -> Result<Vec<EstimateReport>> {
    require_diffusion(traj, "Gronwall chain")?;
    let [t, theta, f_core, int_g, w_inf] =
        channels(&traj.table, ["time", "Theta", "f_core", "int_g_core", "omega_linf"])?;
    let kappa = traj.config.kappa;
    let omega0 = w_inf.first().copied().unwrap_or(0.0);
    let c = smallest_gronwall_constant(kappa, &t, &theta, &f_core, &int_g, omega0);
    let rhs: Vec<f64> = (0..t.len())
        .map(|i| gronwall_rhs(c, kappa, t[i], f_core[i], int_g[i], omega0))
        .collect();
    let mut chain = EstimateReport::inequality("gronwall_chain", t.clone(), theta.clone(), rhs, INEQUALITY_SLACK);
    chain.class = super::report::EstimateClass::EmpiricalConstant;
    chain.empirical_constant = Some(c);
    chain.tolerance = CONSTANT_CEILING;
    chain.pass = c.is_finite() && c < CONSTANT_CEILING;

    let lhs: Vec<f64> = w_inf.iter().map(|w| w - omega0).collect();
    let core: Vec<f64> = theta.iter().map(|th| th / kappa).collect();
    let vorticity = EstimateReport::empirical("vorticity_from_theta", t, lhs, core, CONSTANT_CEILING);
    let truncation = format!("sup over alpha in {:?}", traj.config.alpha_grid.iter().map(|a| a.label()).collect::<Vec<_>>());
    Ok(vec![
        chain
            .with_truncation(truncation.clone())
            .with_hash(traj.hash())
            .with_note("one constant shared by both auxiliary functions, found by bisection"),
        vorticity.with_truncation(truncation).with_hash(traj.hash()),
    ])
}

/// Propagation of `B^0_{∞,1}` vorticity and the log-Lipschitz companion bound.
pub fn check_vishik_propagation(traj: &Trajectory) -> Result<Vec<EstimateReport>> {
    let [t, w_b0, int_grad, int_d1, grad_inf, u_l2] = channels(
        &traj.table,
        ["time", "omega_besov_0", "int_grad_u_linf", "int_d1theta_besov_0", "grad_u_linf", "u_l2"],
    )?;
    let w0 = w_b0.first().copied().unwrap_or(0.0);
    let core = (0..t.len()).map(|i| (1.0 + int_grad[i]) * (w0 + int_d1[i])).collect();
    let truncation = sup_truncation(traj);
    let propagation = EstimateReport::empirical("besov_vorticity_propagation", t.clone(), w_b0.clone(), core, CONSTANT_CEILING);
    let companion_core = zip_map(&u_l2, &w_b0, |a, b| a + b);
    let companion = EstimateReport::empirical("gradient_from_besov_vorticity", t, grad_inf, companion_core, CONSTANT_CEILING);
    Ok(vec![
        propagation.with_truncation(truncation.clone()).with_hash(traj.hash()),
        companion.with_truncation(truncation).with_hash(traj.hash()),
    ])
}

/// `‖∇u‖_{L^p} ≤ C p²/(p−1) ‖ω‖_{L^p}` for every finite `p > 1` with both channels present.
pub fn check_biot_savart_constant(table: &ChannelTable, p_grid: &[Exponent]) -> Result<Vec<EstimateReport>> {
    let t = table.times()?;
    let mut out = Vec::new();
    for p in p_grid {
        let Some(pv) = p.finite().filter(|v| *v > 1.0) else { continue };
        let [grad, omega] = channels(table, [&format!("grad_u_l{p}") as &str, &format!("omega_l{p}")])?;
        let core = omega.iter().map(|w| pv * pv / (pv - 1.0) * w).collect();
        out.push(
            EstimateReport::empirical(&format!("biot_savart_l{p}"), t.clone(), grad, core, CONSTANT_CEILING)
                .with_note("gradient measured pointwise in the Frobenius norm"),
        );
    }
    Ok(out)
}

/// `‖u‖_{L^∞} ≤ C‖u‖^{1/2}_{L²}‖ω‖^{1/2}_{L^∞}` and `‖θ‖_{B^0_{∞,1}} ≤ C‖θ‖^{1/2}_{L²}‖θ‖^{1/2}_{B^1_{∞,1}}`.
pub fn check_interpolations(table: &ChannelTable) -> Result<Vec<EstimateReport>> {
    let [t, u_inf, u_l2, w_inf, b0, th_l2, b1] = channels(
        table,
        ["time", "u_linf", "u_l2", "omega_linf", "theta_besov_0", "theta_l2", "theta_besov_1"],
    )?;
    let velocity_core = zip_map(&u_l2, &w_inf, |a, b| (a * b).sqrt());
    let theta_core = zip_map(&th_l2, &b1, |a, b| (a * b).sqrt());
    Ok(vec![
        EstimateReport::empirical("interpolation_velocity", t.clone(), u_inf, velocity_core, CONSTANT_CEILING),
        EstimateReport::empirical("interpolation_besov", t, b0, theta_core, CONSTANT_CEILING),
    ])
}

/// `‖u‖_{B^1_{∞,∞}} ≤ C(‖u‖_{L^∞} + ‖ω‖_{L^∞})`.
pub fn check_velocity_besov(table: &ChannelTable) -> Result<EstimateReport> {
    let [t, b1, u_inf, w_inf] = channels(table, ["time", "u_besov_1_inf", "u_linf", "omega_linf"])?;
    let core = zip_map(&u_inf, &w_inf, |a, b| a + b);
    Ok(EstimateReport::empirical("velocity_besov", t, b1, core, CONSTANT_CEILING))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gronwall_bisection_finds_the_tight_constant() {
        let kappa = 0.5;
        let t = [0.0, 0.5, 1.0];
        let f = [1.0, 1.2, 1.5];
        let g = [0.0, 0.3, 0.7];
        let c_true = 1.7;
        let theta: Vec<f64> = (0..3).map(|i| gronwall_rhs(c_true, kappa, t[i], f[i], g[i], 2.0)).collect();
        let c = smallest_gronwall_constant(kappa, &t, &theta, &f, &g, 2.0);
        assert!((c - c_true).abs() < 1e-10, "{c}");
        assert_eq!(smallest_gronwall_constant(kappa, &t, &[0.0; 3], &f, &g, 2.0), 0.0);
    }

    #[test]
    fn missing_channels_are_listed_together() {
        let table = ChannelTable::new(vec!["time".into(), "u_l2".into()]);
        match check_interpolations(&table) {
            Err(Error::MissingChannels(m)) => {
                assert!(m.contains(&"omega_linf".to_owned()) && m.contains(&"theta_besov_1".to_owned()))
            }
            other => panic!("{other:?}"),
        }
    }
}
