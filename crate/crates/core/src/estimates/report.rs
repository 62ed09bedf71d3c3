use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{ChannelTable, RunConfig, CONFIG_FILE, DIAGNOSTICS_FILE};
use crate::error::Result;

/// How a check is judged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateClass {
    /// Both sides agree up to a relative tolerance.
    Identity,
    /// An inequality without unknown constants; must hold up to a small slack.
    ConstantFree,
    /// An inequality with an unknown constant, which is measured.
    EmpiricalConstant,
}

impl EstimateClass {
    /// Whether failures of this class make a verification fail.
    pub fn is_hard(self) -> bool {
        !matches!(self, EstimateClass::EmpiricalConstant)
    }
}

/// Default relative tolerance for identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-5;
/// Default slack for constant-free inequalities, relative to the largest right-hand side.
pub const INEQUALITY_SLACK: f64 = 1e-8;
/// Default ceiling for empirical constants.
pub const CONSTANT_CEILING: f64 = 10.0;

/// Both sides of one estimate along a series of times or samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub class: EstimateClass,
    pub pass: bool,
    /// `min(rhs − lhs)`.
    pub margin: f64,
    /// Largest `lhs / rhs` where the right-hand side is the constant-free core.
    pub empirical_constant: Option<f64>,
    /// Largest `|lhs − rhs| / scale` for identities.
    pub max_defect: Option<f64>,
    /// Threshold the pass decision used.
    pub tolerance: f64,
    /// How suprema over exponents or frequencies were cut off.
    pub truncation: String,
    pub config_hash: Option<String>,
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn min_gap(lhs: &[f64], rhs: &[f64]) -> f64 {
    lhs.iter()
        .zip(rhs)
        .map(|(l, r)| r - l)
        .fold(f64::INFINITY, |m, v| if v.is_nan() { f64::NAN } else { m.min(v) })
}

fn all_finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

impl EstimateReport {
    fn base(name: &str, class: EstimateClass, times: Vec<f64>, lhs: Vec<f64>, rhs: Vec<f64>) -> Self {
        assert_eq!(times.len(), lhs.len());
        assert_eq!(times.len(), rhs.len());
        EstimateReport {
            name: name.to_owned(),
            class,
            pass: false,
            margin: min_gap(&lhs, &rhs),
            empirical_constant: None,
            max_defect: None,
            tolerance: 0.0,
            truncation: String::new(),
            config_hash: None,
            times,
            lhs,
            rhs,
            note: None,
        }
    }

    /// `lhs = rhs`, judged by `max |lhs − rhs| / scale < tolerance`.
    ///
    /// `scale` defaults to `|rhs|` pointwise; pass `Some` for a global scale
    /// when the sides can vanish together.
    pub fn identity(
        name: &str,
        times: Vec<f64>,
        lhs: Vec<f64>,
        rhs: Vec<f64>,
        scale: Option<f64>,
        tolerance: f64,
    ) -> Self {
        let mut r = Self::base(name, EstimateClass::Identity, times, lhs, rhs);
        let defect = r
            .lhs
            .iter()
            .zip(&r.rhs)
            .map(|(l, rr)| {
                let s = scale.unwrap_or(rr.abs());
                let gap = (l - rr).abs();
                if gap == 0.0 {
                    0.0
                } else if s > 0.0 {
                    gap / s
                } else {
                    gap
                }
            })
            .fold(0.0_f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v) });
        r.max_defect = Some(defect);
        r.tolerance = tolerance;
        r.pass = all_finite(&r.lhs) && all_finite(&r.rhs) && defect < tolerance;
        r
    }

    /// `lhs ≤ rhs` up to `slack · max |rhs|`.
    pub fn inequality(name: &str, times: Vec<f64>, lhs: Vec<f64>, rhs: Vec<f64>, slack: f64) -> Self {
        let mut r = Self::base(name, EstimateClass::ConstantFree, times, lhs, rhs);
        let scale = r.rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        r.tolerance = slack;
        r.pass = all_finite(&r.lhs)
            && all_finite(&r.rhs)
            && (r.lhs.is_empty() || r.margin >= -slack * scale);
        r
    }

    /// `lhs ≤ C · core`, reporting the smallest such `C`.
    ///
    /// Entries where both sides vanish carry no information and are skipped.
    pub fn empirical(name: &str, times: Vec<f64>, lhs: Vec<f64>, core: Vec<f64>, ceiling: f64) -> Self {
        let mut r = Self::base(name, EstimateClass::EmpiricalConstant, times, lhs, core);
        let constant = empirical_constant(&r.lhs, &r.rhs);
        r.empirical_constant = Some(constant);
        r.tolerance = ceiling;
        r.pass = constant.is_finite() && constant < ceiling;
        r
    }

    pub fn with_truncation(mut self, truncation: impl Into<String>) -> Self {
        self.truncation = truncation.into();
        self
    }

    pub fn with_hash(mut self, hash: Option<&str>) -> Self {
        self.config_hash = hash.map(str::to_owned);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// `rhs / lhs` at the last entry, for bounds that are expected to be loose.
    pub fn final_ratio(&self) -> Option<f64> {
        match (self.lhs.last(), self.rhs.last()) {
            (Some(l), Some(r)) if *l > 0.0 => Some(r / l),
            _ => None,
        }
    }
}

/// `max lhs/core` over entries with information; `0` when none has any.
pub fn empirical_constant(lhs: &[f64], core: &[f64]) -> f64 {
    let mut best = 0.0_f64;
    for (l, c) in lhs.iter().zip(core) {
        if !l.is_finite() || !c.is_finite() {
            return f64::NAN;
        }
        if *l <= 0.0 {
            continue;
        }
        if *c <= 0.0 {
            return f64::INFINITY;
        }
        best = best.max(l / c);
    }
    best
}

/// A recorded run: resolved config plus its diagnostics table.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: RunConfig,
    pub config_hash: String,
    pub table: ChannelTable,
}

impl Trajectory {
    pub fn new(config: RunConfig, table: ChannelTable) -> Self {
        Trajectory {
            config_hash: config.config_hash(),
            config,
            table,
        }
    }

    /// Loads `config.json` and `diagnostics.csv` from a run directory.
    pub fn load(dir: &Path) -> Result<Self> {
        let config = RunConfig::from_path(&dir.join(CONFIG_FILE))?;
        let table = ChannelTable::read_csv(&dir.join(DIAGNOSTICS_FILE))?;
        Ok(Trajectory::new(config, table))
    }

    pub fn hash(&self) -> Option<&str> {
        Some(&self.config_hash)
    }
}
