use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Lebesgue (or summation) exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            Err(Error::InvalidExponent(p))
        } else if p.is_infinite() {
            Ok(Exponent::Infinity)
        } else {
            Ok(Exponent::Finite(p))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(p) => Some(p),
            Exponent::Infinity => None,
        }
    }

    /// Short label used in channel names: `2`, `4.5`, `inf`.
    pub fn label(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => serializer.serialize_f64(*p),
            Exponent::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        let p = match Raw::deserialize(deserializer)? {
            Raw::Number(p) => p,
            Raw::Text(s) => match s.as_str() {
                "inf" | "infinity" | "Inf" | "∞" => f64::INFINITY,
                other => other
                    .parse()
                    .map_err(|_| serde::de::Error::custom(format!("bad exponent `{other}`")))?,
            },
        };
        Exponent::new(p).map_err(serde::de::Error::custom)
    }
}

/// Uniform-grid quadrature of `(∫|f|^p)^{1/p}` given samples and the cell area.
///
/// `p = ∞` returns the largest sample magnitude. The sum is scaled by the
/// maximum first so that large exponents do not overflow.
pub fn lp_norm_samples(samples: &[f64], p: Exponent, cell_area: f64) -> f64 {
    let max = samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    match p {
        Exponent::Infinity => max,
        Exponent::Finite(p) => {
            if max == 0.0 {
                return 0.0;
            }
            let sum: f64 = if p == 2.0 {
                samples.iter().map(|v| (v / max) * (v / max)).sum()
            } else {
                samples.iter().map(|v| (v.abs() / max).powf(p)).sum()
            };
            max * (sum * cell_area).powf(1.0 / p)
        }
    }
}

/// Pointwise Euclidean magnitude of a family of component sample arrays.
pub fn magnitude(components: &[&[f64]]) -> Vec<f64> {
    let len = components.first().map_or(0, |c| c.len());
    (0..len)
        .map(|i| components.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
        .collect()
}
