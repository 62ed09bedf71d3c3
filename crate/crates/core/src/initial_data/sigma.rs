use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::littlewood_paley::bump;

const MESH_INTERVALS: usize = 256;

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    quadrature::integrate(f, a, b, 1e-16).integral
}

/// Smooth radial vorticity profile `g(ρ) = c · bump((ρ − ρ₀)/(ρ₁ − ρ₀))`
/// supported in `[ρ₀, ρ₁]`, with `c` chosen so that `∫_{ℝ²} g(|x|) dx = m`.
///
/// The primitive `I(r) = ∫₀^r ρ g(ρ) dρ` is tabulated once on a uniform mesh
/// of the support; evaluations add one short quadrature from the nearest node.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    inner: f64,
    outer: f64,
    mass: f64,
    scale: f64,
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Default for RadialProfile {
    fn default() -> Self {
        RadialProfile::new(0.5, 1.5, 1.0).expect("default profile is valid")
    }
}

impl RadialProfile {
    pub fn new(inner: f64, outer: f64, mass: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner && outer.is_finite()) {
            return Err(Error::InvalidProfile(format!(
                "support must satisfy 0 < inner < outer, got [{inner}, {outer}]"
            )));
        }
        if !mass.is_finite() {
            return Err(Error::InvalidProfile(format!("mass must be finite, got {mass}")));
        }
        let mut profile = RadialProfile {
            inner,
            outer,
            mass,
            scale: 1.0,
            nodes: Vec::new(),
            cumulative: Vec::new(),
        };
        let unit = integrate(|rho| rho * profile.value(rho), inner, outer);
        profile.scale = mass / (2.0 * PI * unit);
        let h = (outer - inner) / MESH_INTERVALS as f64;
        profile.nodes = (0..=MESH_INTERVALS).map(|i| inner + i as f64 * h).collect();
        let mut acc = 0.0;
        profile.cumulative.push(0.0);
        for w in profile.nodes.windows(2) {
            acc += integrate(|rho| rho * profile.value(rho), w[0], w[1]);
            profile.cumulative.push(acc);
        }
        Ok(profile)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.inner, self.outer)
    }

    pub fn declared_mass(&self) -> f64 {
        self.mass
    }

    /// `g(ρ)`.
    pub fn value(&self, rho: f64) -> f64 {
        self.scale * bump((rho - self.inner) / (self.outer - self.inner))
    }

    /// `2π ∫ ρ g(ρ) dρ` by a fresh adaptive quadrature over the support.
    pub fn quadrature_mass(&self) -> f64 {
        2.0 * PI * integrate(|rho| rho * self.value(rho), self.inner, self.outer)
    }

    /// `I(r) = ∫₀^r ρ g(ρ) dρ`.
    pub fn radial_integral(&self, r: f64) -> f64 {
        if r <= self.inner {
            return 0.0;
        }
        if r >= self.outer {
            return *self.cumulative.last().expect("mesh is nonempty");
        }
        let h = (self.outer - self.inner) / MESH_INTERVALS as f64;
        let j = (((r - self.inner) / h).floor() as usize).min(MESH_INTERVALS - 1);
        self.cumulative[j] + integrate(|rho| rho * self.value(rho), self.nodes[j], r)
    }
}

/// Stationary Euler velocity `σ(x) = x^⊥/|x|² · I(|x|)` with `x^⊥ = (−x₂, x₁)`.
///
/// Zero inside the inner radius, where the profile has no mass yet.
pub fn sigma_field(profile: &RadialProfile, x: [f64; 2]) -> [f64; 2] {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2.sqrt() <= profile.inner {
        return [0.0, 0.0];
    }
    let s = profile.radial_integral(r2.sqrt()) / r2;
    [-x[1] * s, x[0] * s]
}

/// Point-vortex far field `(m/2π) x^⊥/|x|²`.
pub fn point_vortex_field(mass: f64, x: [f64; 2]) -> [f64; 2] {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let s = mass / (2.0 * PI * r2);
    [-x[1] * s, x[0] * s]
}

fn centered(f: &impl Fn([f64; 2]) -> [f64; 2], x: [f64; 2], axis: usize, h: f64) -> [f64; 2] {
    let mut p = x;
    let mut m = x;
    p[axis] += h;
    m[axis] -= h;
    let (fp, fm) = (f(p), f(m));
    [(fp[0] - fm[0]) / (2.0 * h), (fp[1] - fm[1]) / (2.0 * h)]
}

fn divergence(f: &impl Fn([f64; 2]) -> [f64; 2], x: [f64; 2], h: f64) -> f64 {
    centered(f, x, 0, h)[0] + centered(f, x, 1, h)[1]
}

fn curl(f: &impl Fn([f64; 2]) -> [f64; 2], x: [f64; 2], h: f64) -> f64 {
    centered(f, x, 0, h)[1] - centered(f, x, 1, h)[0]
}

/// Finite-difference residuals of the stationarity checks at sampled points.
#[derive(Clone, Debug, Serialize)]
pub struct SigmaReport {
    pub points: usize,
    pub step: f64,
    /// `max |div σ|`.
    pub max_divergence: f64,
    /// `max |curl(σ·∇σ)|`; zero means `σ·∇σ` is a gradient.
    pub max_transport_curl: f64,
    /// `max |curl σ − g(|x|)|`.
    pub max_vorticity_error: f64,
    /// Largest relative deviation from the point-vortex field over points with `|x| ≥ ρ₁`.
    pub max_far_field_error: Option<f64>,
}

impl SigmaReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_divergence < tol && self.max_transport_curl < tol && self.max_vorticity_error < tol
    }
}

/// Checks `div σ = 0`, `curl(σ·∇σ) = 0` and `curl σ = g` by centered
/// differences with step `h`; the transport term is itself differenced, so
/// its curl is a nested difference.
pub fn verify_sigma_stationary(profile: &RadialProfile, points: &[[f64; 2]], h: f64) -> SigmaReport {
    let sigma = |x: [f64; 2]| sigma_field(profile, x);
    let transport = |x: [f64; 2]| {
        let s = sigma(x);
        let d1 = centered(&sigma, x, 0, h);
        let d2 = centered(&sigma, x, 1, h);
        [s[0] * d1[0] + s[1] * d2[0], s[0] * d1[1] + s[1] * d2[1]]
    };
    let mut report = SigmaReport {
        points: points.len(),
        step: h,
        max_divergence: 0.0,
        max_transport_curl: 0.0,
        max_vorticity_error: 0.0,
        max_far_field_error: None,
    };
    for &x in points {
        report.max_divergence = report.max_divergence.max(divergence(&sigma, x, h).abs());
        report.max_transport_curl = report.max_transport_curl.max(curl(&transport, x, h).abs());
        let g = profile.value(x[0].hypot(x[1]));
        report.max_vorticity_error = report.max_vorticity_error.max((curl(&sigma, x, h) - g).abs());
        if x[0].hypot(x[1]) >= profile.outer {
            let s = sigma(x);
            let p = point_vortex_field(profile.mass, x);
            let scale = p[0].hypot(p[1]);
            let err = if scale == 0.0 {
                s[0].hypot(s[1])
            } else {
                (s[0] - p[0]).hypot(s[1] - p[1]) / scale
            };
            report.max_far_field_error = Some(report.max_far_field_error.unwrap_or(0.0).max(err));
        }
    }
    report
}

/// Deterministic sample points spread over radii `[r_min, r_max]` along a
/// golden-angle spiral.
pub fn spiral_points(count: usize, r_min: f64, r_max: f64) -> Vec<[f64; 2]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let t = if count > 1 {
                i as f64 / (count - 1) as f64
            } else {
                0.5
            };
            let r = r_min + t * (r_max - r_min);
            let a = i as f64 * golden;
            [r * a.cos(), r * a.sin()]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_inside_inner_radius() {
        let p = RadialProfile::default();
        assert_eq!(sigma_field(&p, [0.0, 0.0]), [0.0, 0.0]);
        assert_eq!(sigma_field(&p, [0.3, -0.2]), [0.0, 0.0]);
    }

    #[test]
    fn far_field_is_point_vortex() {
        let p = RadialProfile::new(0.5, 1.5, 2.0).unwrap();
        for x in [[2.0, 0.0], [-1.0, 3.0], [1.2, -1.3]] {
            let s = sigma_field(&p, x);
            let q = point_vortex_field(2.0, x);
            let err = (s[0] - q[0]).hypot(s[1] - q[1]) / q[0].hypot(q[1]);
            assert!(err < 1e-12, "{err}");
        }
    }

    #[test]
    fn rotation_equivariance() {
        let p = RadialProfile::default();
        for (i, x) in spiral_points(20, 0.4, 2.0).into_iter().enumerate() {
            let a = 0.37 * i as f64;
            let (c, s) = (a.cos(), a.sin());
            let rx = [c * x[0] - s * x[1], s * x[0] + c * x[1]];
            let sx = sigma_field(&p, x);
            let srx = sigma_field(&p, rx);
            let rsx = [c * sx[0] - s * sx[1], s * sx[0] + c * sx[1]];
            assert!((srx[0] - rsx[0]).abs() < 1e-10 && (srx[1] - rsx[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_profile_has_zero_residuals() {
        let p = RadialProfile::new(0.5, 1.5, 0.0).unwrap();
        let r = verify_sigma_stationary(&p, &spiral_points(16, 0.1, 3.0), 1e-4);
        assert_eq!(r.max_divergence, 0.0);
        assert_eq!(r.max_transport_curl, 0.0);
        assert_eq!(r.max_vorticity_error, 0.0);
    }

    #[test]
    fn invalid_profiles() {
        assert!(RadialProfile::new(0.0, 1.0, 1.0).is_err());
        assert!(RadialProfile::new(1.0, 0.5, 1.0).is_err());
        assert!(RadialProfile::new(0.5, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn tabulated_primitive_matches_direct_quadrature() {
        let p = RadialProfile::default();
        for r in [0.6, 0.77, 1.0, 1.234, 1.49] {
            let direct = integrate(|rho| rho * p.value(rho), 0.5, r);
            assert!((p.radial_integral(r) - direct).abs() < 1e-13 * p.radial_integral(2.0));
        }
    }
}
