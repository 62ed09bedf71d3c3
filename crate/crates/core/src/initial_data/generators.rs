use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::littlewood_paley::{smooth_step, INNER_RADIUS, OUTER_RADIUS};
use crate::spectral::{Exponent, Grid, ScalarField};

const TWO_PI: f64 = 2.0 * PI;

/// Signed periodic offset of `x` from `c`, wrapped into `[−π, π)`.
fn periodic_offset(x: f64, c: f64) -> f64 {
    (x - c + PI).rem_euclid(TWO_PI) - PI
}

fn ensure_in_box(center: [f64; 2]) -> Result<()> {
    for (i, c) in center.iter().enumerate() {
        if !(0.0..TWO_PI).contains(c) {
            return Err(Error::config(
                format!("center[{i}]"),
                format!("must lie in [0, 2π), got {c}"),
            ));
        }
    }
    Ok(())
}

fn ensure_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(name, format!("must be positive, got {v}")))
    }
}

/// Periodized Gaussian `A Σ_m exp(−|x − c − 2πm|² / (2w²))` over the 3×3
/// nearest images, dealiased.
pub fn gaussian_bump_theta(
    center: [f64; 2],
    width: f64,
    amplitude: f64,
    grid: &Arc<Grid>,
) -> Result<ScalarField> {
    ensure_in_box(center)?;
    ensure_positive("width", width)?;
    let f = ScalarField::from_fn(grid, |x1, x2| {
        let mut sum = 0.0;
        for m1 in -1..=1 {
            for m2 in -1..=1 {
                let d1 = x1 - center[0] - TWO_PI * m1 as f64;
                let d2 = x2 - center[1] - TWO_PI * m2 as f64;
                sum += (-(d1 * d1 + d2 * d2) / (2.0 * width * width)).exp();
            }
        }
        amplitude * sum
    });
    Ok(f.dealiased())
}

/// Default patch transition width: four grid cells.
pub fn default_transition(grid: &Grid) -> f64 {
    4.0 * grid.spacing()
}

/// Smoothed indicator of a disc, `A (1 − H((r − (R − w/2)) / w))`, with the
/// `C^∞` step `H`; dealiased and shifted to zero mean.
///
/// Before the mean shift the profile lies in `[0, A]`.
pub fn mollified_vortex_patch(
    center: [f64; 2],
    radius: f64,
    transition: f64,
    amplitude: f64,
    grid: &Arc<Grid>,
) -> Result<ScalarField> {
    ensure_in_box(center)?;
    ensure_positive("radius", radius)?;
    ensure_positive("transition", transition)?;
    if transition > 2.0 * radius {
        return Err(Error::config(
            "transition",
            format!("must not exceed twice the radius ({})", 2.0 * radius),
        ));
    }
    if radius + transition / 2.0 >= PI {
        return Err(Error::config("radius", "patch does not fit in the periodic box"));
    }
    let inner = radius - transition / 2.0;
    let f = ScalarField::from_fn(grid, |x1, x2| {
        let r = periodic_offset(x1, center[0]).hypot(periodic_offset(x2, center[1]));
        amplitude * (1.0 - smooth_step((r - inner) / transition))
    });
    Ok(f.dealiased().without_mean())
}

/// Radial window of modes whose blocks all lie in `[lo, hi]`.
fn band_window(lo: i32, hi: i32) -> (f64, f64) {
    let lower = if lo < 0 {
        0.0
    } else {
        OUTER_RADIUS * 2f64.powi(lo)
    };
    let upper = 2.0 * INNER_RADIUS * 2f64.powi(hi);
    (lower, upper)
}

/// Random real field with Littlewood–Paley blocks only in `band = [lo, hi]`.
///
/// Modes are drawn only where `(4/3) 2^lo ≤ |k| ≤ (3/2) 2^hi`, so blocks
/// outside the band vanish identically. Coefficients are drawn in a fixed
/// order over the half plane `k1 > 0 ∨ (k1 = 0 ∧ k2 ≥ 0)` that does not depend
/// on `n`: the same seed gives the same field on every grid resolving it.
/// `amplitude` is the root-mean-square value `‖f‖_{L²} / 2π`.
pub fn random_band_limited(
    seed: u64,
    band: [i32; 2],
    amplitude: f64,
    grid: &Arc<Grid>,
) -> Result<ScalarField> {
    let [lo, hi] = band;
    let q_max = grid.filter().q_max();
    if lo < -1 || hi > q_max || lo > hi {
        return Err(Error::InvalidBand { lo, hi, q_max });
    }
    let (lower, upper) = band_window(lo, hi);
    let reach = upper.floor() as i64;
    let cutoff = grid.dealias_cutoff() as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::default(); grid.len()];
    for k1 in 0..=reach {
        for k2 in -reach..=reach {
            if k1 == 0 && k2 < 0 {
                continue;
            }
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = rng.gen_range(-1.0..1.0);
            let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
            if r < lower || r > upper || k1.abs().max(k2.abs()) > cutoff {
                continue;
            }
            if k1 == 0 && k2 == 0 {
                coeffs[0] = Complex64::new(re, 0.0);
                continue;
            }
            let c = Complex64::new(re, im);
            coeffs[grid.index_of(k1, k2)] = c;
            coeffs[grid.index_of(-k1, -k2)] = c.conj();
        }
    }
    let f = ScalarField::from_coefficients(grid, coeffs)?;
    let rms = f.l2_norm() / TWO_PI;
    if rms == 0.0 || amplitude == 0.0 {
        return Ok(ScalarField::zeros(grid));
    }
    Ok(f.scaled(amplitude / rms))
}

/// `A sin(k1 x1 + k2 x2 + phase)`, dealiased.
pub fn single_mode(k: [i64; 2], amplitude: f64, phase: f64, grid: &Arc<Grid>) -> ScalarField {
    let (k1, k2) = (k[0] as f64, k[1] as f64);
    ScalarField::from_fn(grid, |x1, x2| amplitude * (k1 * x1 + k2 * x2 + phase).sin()).dealiased()
}

/// Tagged description of an initial field, as stored in run configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Zero,
    Gaussian {
        center: [f64; 2],
        width: f64,
        amplitude: f64,
    },
    Patch {
        center: [f64; 2],
        radius: f64,
        /// Width of the smooth edge; defaults to four grid cells.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        transition: Option<f64>,
        amplitude: f64,
        /// Rescale after mean removal so that the grid maximum of `|f|` equals `amplitude`.
        #[serde(default)]
        normalize_linf: bool,
    },
    RandomBand {
        /// Falls back to the run-level seed when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        band: [i32; 2],
        amplitude: f64,
    },
    Mode {
        k: [i64; 2],
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    Sum {
        terms: Vec<InitialData>,
    },
}

impl InitialData {
    /// Samples the described field on `grid`; `default_seed` feeds random
    /// descriptors that carry no seed of their own.
    pub fn build(&self, grid: &Arc<Grid>, default_seed: u64) -> Result<ScalarField> {
        match self {
            InitialData::Zero => Ok(ScalarField::zeros(grid)),
            InitialData::Gaussian {
                center,
                width,
                amplitude,
            } => gaussian_bump_theta(*center, *width, *amplitude, grid),
            InitialData::Patch {
                center,
                radius,
                transition,
                amplitude,
                normalize_linf,
            } => {
                let w = transition.unwrap_or_else(|| default_transition(grid));
                let f = mollified_vortex_patch(*center, *radius, w, *amplitude, grid)?;
                if *normalize_linf {
                    let sup = f.lp_norm(Exponent::Infinity);
                    if sup == 0.0 {
                        Ok(f)
                    } else {
                        Ok(f.scaled(amplitude.abs() / sup))
                    }
                } else {
                    Ok(f)
                }
            }
            InitialData::RandomBand {
                seed,
                band,
                amplitude,
            } => random_band_limited(seed.unwrap_or(default_seed), *band, *amplitude, grid),
            InitialData::Mode {
                k,
                amplitude,
                phase,
            } => Ok(single_mode(*k, *amplitude, *phase, grid)),
            InitialData::Sum { terms } => {
                let mut acc = ScalarField::zeros(grid);
                for t in terms {
                    acc = &acc + &t.build(grid, default_seed)?;
                }
                Ok(acc)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            InitialData::Zero => true,
            InitialData::Sum { terms } => terms.iter().all(InitialData::is_zero),
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::littlewood_paley::block;

    #[test]
    fn zero_amplitude_gives_zero() {
        let grid = Grid::new(32).unwrap();
        assert_eq!(gaussian_bump_theta([1.0, 1.0], 0.5, 0.0, &grid).unwrap().l2_norm(), 0.0);
        assert_eq!(mollified_vortex_patch([PI, PI], 1.0, 0.3, 0.0, &grid).unwrap().l2_norm(), 0.0);
        assert_eq!(random_band_limited(1, [1, 2], 0.0, &grid).unwrap().l2_norm(), 0.0);
    }

    #[test]
    fn patch_has_zero_mean_and_shifted_peak() {
        let grid = Grid::new(128).unwrap();
        let (radius, w, amp) = (1.0, 0.6, 2.0);
        let inner = radius - w / 2.0;
        let raw: Vec<f64> = (0..grid.len())
            .map(|idx| {
                let (x1, x2) = grid.point(idx);
                let r = periodic_offset(x1, PI).hypot(periodic_offset(x2, PI));
                amp * (1.0 - smooth_step((r - inner) / w))
            })
            .collect();
        assert!(raw.iter().all(|v| (0.0..=amp).contains(v)));
        let raw_mean = raw.iter().sum::<f64>() / grid.len() as f64;
        let f = mollified_vortex_patch([PI, PI], radius, w, amp, &grid).unwrap();
        assert!(f.mean().abs() < 1e-14);
        let sup = f.lp_norm(Exponent::Infinity);
        assert!((sup - (amp - raw_mean)).abs() < 1e-3 * amp, "sup {sup} expect {}", amp - raw_mean);
    }

    #[test]
    fn patch_validation() {
        let grid = Grid::new(32).unwrap();
        assert!(mollified_vortex_patch([PI, PI], 3.2, 0.3, 1.0, &grid).is_err());
        assert!(mollified_vortex_patch([7.0, PI], 1.0, 0.3, 1.0, &grid).is_err());
        assert!(mollified_vortex_patch([PI, PI], 0.1, 0.3, 1.0, &grid).is_err());
    }

    #[test]
    fn random_band_blocks_vanish_outside_band() {
        let grid = Grid::new(64).unwrap();
        let f = random_band_limited(42, [2, 4], 1.0, &grid).unwrap();
        assert!((f.l2_norm() / TWO_PI - 1.0).abs() < 1e-12);
        assert!(f.hermitian_defect() < 1e-15);
        for q in -1..=grid.filter().q_max() {
            let b = block(&f, q).unwrap().l2_norm();
            if (2..=4).contains(&q) {
                assert!(b > 0.0);
            } else {
                assert!(b < 1e-12 * f.l2_norm(), "q = {q}: {b}");
            }
        }
    }

    #[test]
    fn random_band_is_resolution_independent() {
        let coarse = Grid::new(32).unwrap();
        let fine = Grid::new(64).unwrap();
        let a = random_band_limited(5, [0, 2], 1.0, &coarse).unwrap();
        let b = random_band_limited(5, [0, 2], 1.0, &fine).unwrap();
        for k1 in -6..=6 {
            for k2 in -6..=6 {
                assert!((a.coefficient(k1, k2) - b.coefficient(k1, k2)).norm() < 1e-15);
            }
        }
        let again = random_band_limited(5, [0, 2], 1.0, &coarse).unwrap();
        assert_eq!(a.coefficients(), again.coefficients());
    }

    #[test]
    fn band_errors() {
        let grid = Grid::new(32).unwrap();
        assert!(matches!(
            random_band_limited(1, [2, 9], 1.0, &grid),
            Err(Error::InvalidBand { .. })
        ));
        assert!(random_band_limited(1, [3, 2], 1.0, &grid).is_err());
    }

    #[test]
    fn descriptors_round_trip_through_json() {
        let d: InitialData = serde_json::from_str(
            r#"{"kind":"sum","terms":[{"kind":"patch","center":[3.0,3.0],"radius":1.0,"amplitude":1.0,"normalize_linf":true},{"kind":"mode","k":[1,0],"amplitude":0.1}]}"#,
        )
        .unwrap();
        let back: InitialData = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(d, back);
        let grid = Grid::new(64).unwrap();
        let f = InitialData::Patch {
            center: [PI, PI],
            radius: 1.0,
            transition: Some(0.5),
            amplitude: 1.0,
            normalize_linf: true,
        }
        .build(&grid, 0)
        .unwrap();
        assert!((f.lp_norm(Exponent::Infinity) - 1.0).abs() < 1e-14);
        assert!(serde_json::from_str::<InitialData>(r#"{"kind":"blob"}"#).is_err());
    }
}
