use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::report::{EstimateClass, EstimateReport, Trajectory};
use super::samples::{
    check_heat_block_appendix, check_interpolation_split, check_l2_embedding, random_samples, sample_table,
};
use super::trajectory::*;
use crate::dynamics::{DiagnosticPlan, RunConfig, System};
use crate::error::Result;
use crate::spectral::Grid;

/// Largest relative change of an empirical constant between two resolutions.
pub const STABILITY_TOLERANCE: f64 = 0.25;

/// Settings of the sample-based part of a verification.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleOptions {
    pub count: usize,
    pub seed: u64,
    /// Smoothing times for the heat-block checks (scaled by `4^{−q}` per block).
    pub heat_lambdas: Vec<f64>,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            count: 100,
            seed: 20_240_601,
            heat_lambdas: vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0],
        }
    }
}

/// Every trajectory check that applies to the run's system.
pub fn verify_trajectory(traj: &Trajectory) -> Result<Vec<EstimateReport>> {
    let config = &traj.config;
    let diffusive = config.kappa > 0.0;
    let mut out = Vec::new();
    match config.system {
        System::Boussinesq => {
            out.push(check_energy_identity(traj)?);
            out.push(check_velocity_l2(traj)?);
            out.extend(check_vorticity_transport(traj, &config.p_grid)?);
            out.extend(check_advection_besov(traj)?);
            if diffusive {
                out.extend(check_smoothing(traj)?);
                out.extend(check_gronwall_chain(traj)?);
            }
            out.extend(check_vishik_propagation(traj)?);
        }
        System::Benard => {
            out.extend(check_benard_energy(traj, 1e-4)?);
            out.extend(check_vorticity_transport(traj, &config.p_grid)?);
        }
        System::Euler => {
            out.push(check_velocity_l2(traj)?);
            out.extend(check_vorticity_transport(traj, &config.p_grid)?);
            out.extend(check_vishik_propagation(traj)?);
        }
    }
    out.extend(check_biot_savart_constant(&traj.table, &config.p_grid)?);
    out.extend(check_interpolations(&traj.table)?);
    out.push(check_velocity_besov(&traj.table)?);
    Ok(out
        .into_iter()
        .map(|r| if r.config_hash.is_none() { r.with_hash(traj.hash()) } else { r })
        .collect())
}

/// Checks on random band-limited samples at the resolution of `config`.
pub fn verify_samples(config: &RunConfig, options: &SampleOptions) -> Result<Vec<EstimateReport>> {
    let grid = Grid::new(config.n)?;
    let samples = random_samples(&grid, options.count, options.seed)?;
    let table = sample_table(&samples, &DiagnosticPlan::from_config(config))?;
    let rename = |r: EstimateReport| EstimateReport {
        name: format!("samples_{}", r.name),
        ..r
    };
    let mut out: Vec<EstimateReport> = check_biot_savart_constant(&table, &config.p_grid)?
        .into_iter()
        .chain(check_interpolations(&table)?)
        .chain(std::iter::once(check_velocity_besov(&table)?))
        .map(rename)
        .collect();
    out.extend(check_interpolation_split(&samples)?);
    out.push(check_l2_embedding(&samples));
    out.extend(check_heat_block_appendix(&samples, &options.heat_lambdas)?);
    Ok(out)
}

/// Names of the failed checks whose class makes a verification fail.
pub fn hard_failures(reports: &[EstimateReport]) -> Vec<&str> {
    reports
        .iter()
        .filter(|r| r.class.is_hard() && !r.pass)
        .map(|r| r.name.as_str())
        .collect()
}

/// Fixed-width summary, one line per report.
pub fn summary_table(reports: &[EstimateReport]) -> String {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<width$}  {:<18}  {:<4}  {:>12}  {:>12}",
        "name", "class", "pass", "margin", "constant"
    );
    for r in reports {
        let class = match r.class {
            EstimateClass::Identity => "identity",
            EstimateClass::ConstantFree => "constant-free",
            EstimateClass::EmpiricalConstant => "empirical",
        };
        let constant = r
            .empirical_constant
            .or(r.max_defect)
            .map(|c| format!("{c:.4e}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:<width$}  {:<18}  {:<4}  {:>12.4e}  {:>12}",
            r.name,
            class,
            if r.pass { "ok" } else { "FAIL" },
            r.margin,
            constant
        );
    }
    s
}

/// Writes the verification report: a JSON array with one object per check.
pub fn write_report(path: &Path, reports: &[EstimateReport]) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(reports)?)?;
    Ok(())
}

/// One empirical constant measured at two resolutions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityRow {
    pub name: String,
    pub coarse: f64,
    pub fine: f64,
    /// `|coarse − fine| / min(coarse, fine)`.
    pub relative_change: f64,
    pub pass: bool,
}

/// Compares the empirical constants that appear in both report sets.
///
/// Constants that are zero at both resolutions count as stable.
pub fn resolution_stability(coarse: &[EstimateReport], fine: &[EstimateReport]) -> Vec<StabilityRow> {
    coarse
        .iter()
        .filter(|r| r.class == EstimateClass::EmpiricalConstant)
        .filter_map(|c| {
            let f = fine.iter().find(|f| f.name == c.name)?;
            let (a, b) = (c.empirical_constant?, f.empirical_constant?);
            let relative_change = if a == b {
                0.0
            } else {
                (a - b).abs() / a.min(b)
            };
            Some(StabilityRow {
                name: c.name.clone(),
                coarse: a,
                fine: b,
                relative_change,
                pass: a.is_finite() && b.is_finite() && relative_change < STABILITY_TOLERANCE,
            })
        })
        .collect()
}

/// Text table of a stability comparison.
pub fn stability_table(rows: &[StabilityRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let mut s = String::new();
    let _ = writeln!(s, "{:<width$}  {:>12}  {:>12}  {:>10}  pass", "name", "coarse", "fine", "change");
    for r in rows {
        let _ = writeln!(
            s,
            "{:<width$}  {:>12.4e}  {:>12.4e}  {:>9.2}%  {}",
            r.name,
            r.coarse,
            r.fine,
            100.0 * r.relative_change,
            if r.pass { "ok" } else { "FAIL" }
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empirical(name: &str, c: f64) -> EstimateReport {
        EstimateReport::empirical(name, vec![0.0], vec![c], vec![1.0], 10.0)
    }

    #[test]
    fn stability_uses_the_smaller_constant() {
        let rows = resolution_stability(&[empirical("a", 1.0), empirical("b", 0.0)], &[empirical("a", 1.2), empirical("b", 0.0)]);
        assert_eq!(rows.len(), 2);
        assert!((rows[0].relative_change - 0.2).abs() < 1e-12);
        assert!(rows[0].pass);
        assert_eq!(rows[1].relative_change, 0.0);
        let rows = resolution_stability(&[empirical("a", 1.0)], &[empirical("a", 0.7)]);
        assert!(!rows[0].pass);
    }

    #[test]
    fn only_hard_classes_fail_a_verification() {
        let soft = EstimateReport::empirical("soft", vec![0.0], vec![100.0], vec![1.0], 10.0);
        let hard = EstimateReport::inequality("hard", vec![0.0], vec![2.0], vec![1.0], 1e-8);
        assert_eq!(hard_failures(&[soft.clone()]), Vec::<&str>::new());
        assert_eq!(hard_failures(&[soft, hard]), vec!["hard"]);
    }

    #[test]
    fn summary_lists_every_report() {
        let text = summary_table(&[empirical("alpha", 2.0), empirical("beta", 20.0)]);
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("FAIL"));
    }
}
