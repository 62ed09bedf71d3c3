use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::initial_data::InitialData;
use crate::spectral::Exponent;

/// Which evolution equations to integrate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    /// Buoyancy-driven Euler flow with a diffusive temperature.
    #[default]
    Boussinesq,
    /// Boussinesq with the extra temperature source `+u₂`.
    Benard,
    /// Two-dimensional Euler: temperature identically zero.
    Euler,
}

/// Default CFL number used both for the adaptive step and as the safety
/// bound on fixed steps.
pub const DEFAULT_CFL: f64 = 0.5;

fn default_diag_every() -> usize {
    10
}

fn default_p_grid() -> Vec<Exponent> {
    vec![
        Exponent::Finite(2.0),
        Exponent::Finite(4.0),
        Exponent::Finite(8.0),
        Exponent::Infinity,
    ]
}

fn default_alpha_grid() -> Vec<Exponent> {
    vec![
        Exponent::Finite(1.0),
        Exponent::Finite(2.0),
        Exponent::Finite(4.0),
        Exponent::Infinity,
    ]
}

fn default_yudovich_r() -> f64 {
    2.0
}

fn default_yudovich_p_max() -> f64 {
    64.0
}

fn default_true() -> bool {
    true
}

/// Complete description of one simulation.
///
/// Serialized as a single JSON document; `schema/run_config.schema.json`
/// in the repository mirrors this structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Grid points per direction (power of two, at least 16).
    pub n: usize,
    /// Thermal diffusivity.
    pub kappa: f64,
    /// Fixed time step. When absent, `cfl` selects an adaptive step.
    #[serde(default)]
    pub dt: Option<f64>,
    /// CFL number in `(0, 1]`.
    #[serde(default)]
    pub cfl: Option<f64>,
    pub t_end: f64,
    #[serde(default)]
    pub system: System,
    #[serde(default = "zero_data")]
    pub theta0: InitialData,
    /// Initial vorticity; shifted to zero mean after sampling.
    #[serde(default = "zero_data")]
    pub omega0: InitialData,
    /// Spectral cutoff `S_ℓ` applied to both initial fields.
    #[serde(default)]
    pub mollify_level: Option<i32>,
    /// Steps between diagnostic rows.
    #[serde(default = "default_diag_every")]
    pub diag_every: usize,
    #[serde(default = "default_p_grid")]
    pub p_grid: Vec<Exponent>,
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: Vec<Exponent>,
    #[serde(default = "default_yudovich_r")]
    pub yudovich_r: f64,
    #[serde(default = "default_yudovich_p_max")]
    pub yudovich_p_max: f64,
    /// Evaluate the Bony-decomposition channels at each diagnostic row.
    #[serde(default = "default_true")]
    pub bony_diagnostics: bool,
    /// Steps between field snapshots; 0 writes none.
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Seed for random initial data without an explicit seed.
    #[serde(default)]
    pub seed: u64,
}

fn zero_data() -> InitialData {
    InitialData::Zero
}

impl RunConfig {
    /// Minimal valid config; everything else takes its default.
    pub fn new(n: usize, kappa: f64, dt: f64, t_end: f64) -> Self {
        RunConfig {
            n,
            kappa,
            dt: Some(dt),
            cfl: None,
            t_end,
            system: System::Boussinesq,
            theta0: InitialData::Zero,
            omega0: InitialData::Zero,
            mollify_level: None,
            diag_every: default_diag_every(),
            p_grid: default_p_grid(),
            alpha_grid: default_alpha_grid(),
            yudovich_r: default_yudovich_r(),
            yudovich_p_max: default_yudovich_p_max(),
            bony_diagnostics: true,
            snapshot_every: 0,
            output_dir: None,
            seed: 0,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let config: RunConfig = serde_json::from_value(value)
            .map_err(|e| Error::config(field_of_message(&e.to_string()), e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Applies dotted-key overrides (`theta0.amplitude=0.5`) and revalidates.
    ///
    /// Values are parsed as JSON when possible and kept as strings otherwise.
    pub fn with_overrides(&self, overrides: &[(String, String)]) -> Result<Self> {
        let mut value = serde_json::to_value(self)?;
        for (key, raw) in overrides {
            let parsed: Value =
                serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.clone()));
            set_dotted(&mut value, key, parsed)?;
            serde_json::from_value::<RunConfig>(value.clone())
                .map_err(|e| Error::config(key.clone(), e.to_string()))?;
        }
        Self::from_value(value)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 16 || !self.n.is_power_of_two() {
            return Err(Error::config(
                "n",
                format!("must be a power of two and at least 16, got {}", self.n),
            ));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::config("kappa", format!("must be finite and >= 0, got {}", self.kappa)));
        }
        match (self.dt, self.cfl) {
            (None, None) => return Err(Error::config("dt", "either dt or cfl must be given")),
            (Some(dt), _) if !(dt > 0.0 && dt.is_finite()) => {
                return Err(Error::config("dt", format!("must be positive, got {dt}")))
            }
            _ => {}
        }
        if let Some(cfl) = self.cfl {
            if !(cfl > 0.0 && cfl <= 1.0) {
                return Err(Error::config("cfl", format!("must lie in (0, 1], got {cfl}")));
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::config("t_end", format!("must be finite and >= 0, got {}", self.t_end)));
        }
        if self.diag_every == 0 {
            return Err(Error::config("diag_every", "must be at least 1"));
        }
        if self.p_grid.is_empty() {
            return Err(Error::config("p_grid", "must not be empty"));
        }
        if self.alpha_grid.is_empty() {
            return Err(Error::config("alpha_grid", "must not be empty"));
        }
        if !(self.yudovich_r >= 1.0 && self.yudovich_r.is_finite()) {
            return Err(Error::config("yudovich_r", "must be finite and >= 1"));
        }
        if !(self.yudovich_p_max >= self.yudovich_r && self.yudovich_p_max.is_finite()) {
            return Err(Error::config("yudovich_p_max", "must be finite and >= yudovich_r"));
        }
        if let Some(level) = self.mollify_level {
            if level < 0 {
                return Err(Error::config("mollify_level", "must be >= 0"));
            }
        }
        if self.system == System::Euler && !self.theta0.is_zero() {
            return Err(Error::config("theta0", "must be zero for the euler system"));
        }
        Ok(())
    }

    /// CFL number in force: the configured one or [`DEFAULT_CFL`].
    pub fn cfl_number(&self) -> f64 {
        self.cfl.unwrap_or(DEFAULT_CFL)
    }

    pub fn is_adaptive(&self) -> bool {
        self.dt.is_none()
    }

    /// Hex SHA-256 of the canonical JSON serialization.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn field_of_message(message: &str) -> String {
    for marker in ["unknown field `", "missing field `"] {
        if let Some(start) = message.find(marker) {
            let rest = &message[start + marker.len()..];
            if let Some(end) = rest.find('`') {
                return rest[..end].to_owned();
            }
        }
    }
    "<document>".to_owned()
}

fn set_dotted(root: &mut Value, key: &str, new: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(key, "empty path segment"));
    }
    let mut cursor = root;
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        cursor = match cursor {
            Value::Object(map) => {
                if last {
                    map.insert((*part).to_owned(), new);
                    return Ok(());
                }
                map.entry((*part).to_owned())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| Error::config(key, format!("`{part}` is not an array index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| Error::config(key, format!("index {idx} out of range ({len})")))?;
                if last {
                    *slot = new;
                    return Ok(());
                }
                slot
            }
            _ => return Err(Error::config(key, format!("`{part}` is not inside an object"))),
        };
    }
    Ok(())
}

/// Splits `key=value` override strings.
pub fn parse_override(text: &str) -> Result<(String, String)> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| Error::config(text, "override must have the form key=value"))?;
    Ok((key.trim().to_owned(), value.trim().to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let c = RunConfig::from_json_str(r#"{"n": 32, "kappa": 0.1, "dt": 0.01, "t_end": 0.1}"#).unwrap();
        assert_eq!(c.diag_every, 10);
        assert_eq!(c.system, System::Boussinesq);
        assert_eq!(c.p_grid.len(), 4);
        assert_eq!(c.theta0, InitialData::Zero);
    }

    #[test]
    fn bad_grid_names_n() {
        let err = RunConfig::from_json_str(r#"{"n": 100, "kappa": 0.1, "dt": 0.01, "t_end": 0.1}"#)
            .unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "n"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_and_missing_fields_are_named() {
        let err = RunConfig::from_json_str(r#"{"n": 32, "kappa": 0.1, "dt": 0.01, "t_end": 0.1, "nu": 1}"#)
            .unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "nu"));
        let err = RunConfig::from_json_str(r#"{"n": 32, "dt": 0.01, "t_end": 0.1}"#).unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "kappa"));
    }

    #[test]
    fn overrides_are_typed_and_dotted() {
        let base = RunConfig::from_json_str(
            r#"{"n": 32, "kappa": 0.1, "dt": 0.01, "t_end": 0.1,
                "theta0": {"kind": "gaussian", "center": [3.0, 3.0], "width": 0.5, "amplitude": 1.0}}"#,
        )
        .unwrap();
        let c = base
            .with_overrides(&[
                ("n".into(), "64".into()),
                ("theta0.amplitude".into(), "0.25".into()),
                ("theta0.center.1".into(), "2.0".into()),
                ("system".into(), "benard".into()),
            ])
            .unwrap();
        assert_eq!(c.n, 64);
        assert_eq!(c.system, System::Benard);
        assert_eq!(
            c.theta0,
            InitialData::Gaussian { center: [3.0, 2.0], width: 0.5, amplitude: 0.25 }
        );
        assert!(base.with_overrides(&[("n".into(), "\"big\"".into())]).is_err());
        assert!(base.with_overrides(&[("n".into(), "48".into())]).is_err());
        assert!(parse_override("n").is_err());
        assert_eq!(parse_override("dt = 1e-3").unwrap(), ("dt".into(), "1e-3".into()));
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::new(32, 0.1, 0.01, 1.0);
        let mut b = a.clone();
        assert_eq!(a.config_hash(), b.config_hash());
        b.kappa = 0.2;
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }

    #[test]
    fn euler_rejects_temperature() {
        let mut c = RunConfig::new(32, 0.0, 0.01, 1.0);
        c.system = System::Euler;
        c.theta0 = InitialData::Mode { k: [1, 0], amplitude: 1.0, phase: 0.0 };
        assert!(c.validate().is_err());
    }

    #[test]
    fn step_selection() {
        let mut c = RunConfig::new(32, 0.1, 0.01, 1.0);
        c.dt = None;
        assert!(c.validate().is_err());
        c.cfl = Some(0.4);
        assert!(c.validate().is_ok());
        assert!(c.is_adaptive());
        c.cfl = Some(1.5);
        assert!(c.validate().is_err());
    }
}
