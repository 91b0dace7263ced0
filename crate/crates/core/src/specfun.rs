//! Sphere areas, ball volumes in the round sphere and in hyperbolic space,
//! and the incomplete beta function `B(x; k/2, 1/2)`.
//!
//! Everything here is evaluated in closed form where one exists. The
//! half-integer incomplete beta is built by descending recursion in the first
//! parameter down to one of three elementary base cases:
//!
//! ```text
//! B(x; 1/2, 1/2) = 2 asin(√x)
//! B(x; 1,   1/2) = 2 − 2√(1−x)
//! B(x; 3/2, 1/2) = asin(√x) − √(x(1−x))
//! ```
//!
//! and the reduction `∫₀^r sin^{k−1}t dt = ½·B(sin²r; k/2, ½)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::{integrate, QuadOptions};

pub const MAX_DIM: usize = 16;

/// Ambient dimension, restricted to `1..=16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dim(usize);

impl Dim {
    pub fn new(n: usize) -> Result<Self> {
        if (1..=MAX_DIM).contains(&n) {
            Ok(Self(n))
        } else {
            domain(format!("dimension {n} outside [1, {MAX_DIM}]"))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for Dim {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        Dim::new(n)
    }
}

impl From<Dim> for usize {
    fn from(d: Dim) -> usize {
        d.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Hyperbolic,
    Spherical,
}

/// `Γ(j/2)` for integer `j ≥ 1`, exact up to rounding.
pub fn gamma_half(j: u32) -> f64 {
    assert!(j >= 1, "gamma_half needs j >= 1");
    let mut g = if j.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    // Γ(s+1) = sΓ(s), starting from Γ(1) or Γ(1/2).
    let mut s = if j.is_multiple_of(2) { 1.0 } else { 0.5 };
    while s + 0.25 < j as f64 / 2.0 {
        g *= s;
        s += 1.0;
    }
    g
}

/// Complete beta `B(k/2, 1/2)`.
pub fn beta_half(k: u32) -> f64 {
    assert!(k >= 1);
    gamma_half(k) * PI.sqrt() / gamma_half(k + 1)
}

/// `ω_k`, the area of the unit `k`-sphere in `ℝ^{k+1}`.
pub fn sphere_area(k: usize) -> Result<f64> {
    if k > MAX_DIM {
        return domain(format!("sphere dimension {k} outside [0, {MAX_DIM}]"));
    }
    let k = k as u32;
    Ok(2.0 * PI.powf((k + 1) as f64 / 2.0) / gamma_half(k + 1))
}

/// Arguments of `B(x; k/2, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaHalfParams {
    x: f64,
    k: u32,
}

impl BetaHalfParams {
    pub fn new(x: f64, k: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return domain(format!("beta argument x = {x} outside [0, 1]"));
        }
        if k < 1 {
            return domain("beta parameter k must be >= 1");
        }
        Ok(Self { x, k })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn eval(&self) -> f64 {
        let (x, k) = (self.x, self.k);
        if k == 1 {
            return 2.0 * x.sqrt().asin();
        }
        if x < SERIES_CUTOFF && k >= 3 {
            return beta_half_series(x, k);
        }
        beta_half_recursion(x, k)
    }
}

/// `B(x; k/2, 1/2)`, nondecreasing in `x` and nonincreasing in `k`.
pub fn incomplete_beta_half(x: f64, k: u32) -> Result<f64> {
    Ok(BetaHalfParams::new(x, k)?.eval())
}

// Below this the descending recursion subtracts nearly equal quantities.
const SERIES_CUTOFF: f64 = 0.25;

fn beta_base(x: f64, k: u32) -> (f64, u32) {
    if k.is_multiple_of(2) {
        // 2 − 2√(1−x), written without the cancellation at small x.
        (2.0 * x / (1.0 + (1.0 - x).sqrt()), 2)
    } else {
        (x.sqrt().asin() - (x * (1.0 - x)).sqrt(), 3)
    }
}

/// Descending recursion in the first parameter:
///
/// `B(x;a,½) = B(a,½)·[ I_x(a₀,½) − Σ_{j=1}^{a−a₀} x^{a−j}(1−x)^{½} / ((a−j)·B(a−j,½)) ]`
/// with `a₀ ∈ {1, 3/2}` matching the parity of `k`.
pub(crate) fn beta_half_recursion(x: f64, k: u32) -> f64 {
    debug_assert!(k >= 2);
    let (base, k0) = beta_base(x, k);
    let mut reg = base / beta_half(k0);
    let a = k as f64 / 2.0;
    let sqrt_1mx = (1.0 - x).sqrt();
    let steps = (k - k0) / 2;
    for j in 1..=steps {
        let aj = a - j as f64;
        let kj = k - 2 * j;
        reg -= x.powf(aj) * sqrt_1mx / (aj * beta_half(kj));
    }
    (beta_half(k) * reg).max(0.0)
}

/// `x^a Σ_m (½)_m/m! · x^m/(a+m)`, the binomial series of `(1−u)^{−½}` integrated termwise.
pub(crate) fn beta_half_series(x: f64, k: u32) -> f64 {
    let a = k as f64 / 2.0;
    let mut coef = 1.0;
    let mut xm = 1.0;
    let mut acc = 0.0;
    for m in 0..200 {
        let term = coef * xm / (a + m as f64);
        acc += term;
        if term < acc * 1e-17 {
            break;
        }
        coef *= (m as f64 + 0.5) / (m as f64 + 1.0);
        xm *= x;
    }
    x.powf(a) * acc
}

/// `∫₀^r sin^{k−1}t dt` for `0 ≤ r ≤ π/2`.
fn sin_power_integral(k: u32, r: f64) -> f64 {
    let s = r.sin();
    0.5 * BetaHalfParams { x: (s * s).min(1.0), k }.eval()
}

/// `V^S_n(r)`: volume of a ball of radius `r` in the unit `n`-sphere.
pub fn spherical_ball_volume(n: Dim, r: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&r) {
        return domain(format!("spherical radius {r} outside [0, π]"));
    }
    let k = n.get() as u32;
    let omega = sphere_area(n.get() - 1)?;
    if r <= PI / 2.0 {
        Ok(omega * sin_power_integral(k, r))
    } else {
        let total = omega * beta_half(k);
        Ok(total - omega * sin_power_integral(k, PI - r))
    }
}

/// Total measure of the unit `n`-sphere as reached by `V^S_n(π)`.
pub fn spherical_total(n: Dim) -> Result<f64> {
    Ok(sphere_area(n.get() - 1)? * beta_half(n.get() as u32))
}

/// `V^H_n(r)`: volume of a ball of radius `r` in `ℍ^n`.
pub fn hyperbolic_ball_volume(n: Dim, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return domain(format!("hyperbolic radius {r} must be >= 0"));
    }
    let omega = sphere_area(n.get() - 1)?;
    let integral = match n.get() {
        1 => r,
        2 => 2.0 * (0.5 * r).sinh().powi(2),
        3 if r < 0.5 => {
            // (sinh 2r − 2r)/4 by its Taylor series.
            let z = 2.0 * r;
            let mut term = z;
            let mut acc = 0.0;
            let mut m = 1;
            loop {
                term *= z * z / ((2 * m) as f64 * (2 * m + 1) as f64);
                acc += term;
                if term <= 1e-18 * acc {
                    break;
                }
                m += 1;
            }
            acc / 4.0
        }
        3 => ((2.0 * r).sinh() - 2.0 * r) / 4.0,
        4 => {
            let h = 2.0 * (0.5 * r).sinh().powi(2);
            h * h + h * h * h / 3.0
        }
        m => {
            let p = (m - 1) as i32;
            integrate(
                |t: f64| t.sinh().powi(p),
                0.0,
                r,
                QuadOptions {
                    abs_tol: 1e-12,
                    rel_tol: 1e-13,
                    max_intervals: 500,
                },
            )?
            .value
        }
    };
    Ok(omega * integral)
}

/// Area of a geodesic sphere of radius `r`: `ω_n sinh^n r` or `ω_n sin^n r`.
pub fn sphere_surface_area(n: Dim, r: f64, geometry: Geometry) -> Result<f64> {
    if !(r >= 0.0) {
        return domain(format!("radius {r} must be >= 0"));
    }
    let omega = sphere_area(n.get())?;
    let p = n.get() as i32;
    match geometry {
        Geometry::Hyperbolic => Ok(omega * r.sinh().powi(p)),
        Geometry::Spherical => {
            if r > PI {
                return domain(format!("spherical radius {r} exceeds π"));
            }
            Ok(omega * r.sin().powi(p))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n: usize) -> Dim {
        Dim::new(n).unwrap()
    }

    #[test]
    fn gamma_at_half_integers() {
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(2), 1.0);
        assert!((gamma_half(3) - PI.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(gamma_half(8), 6.0);
        assert!((gamma_half(7) - 15.0 / 8.0 * PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(0).unwrap() - 2.0).abs() < 1e-15);
        assert!((sphere_area(1).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(2).unwrap() - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3).unwrap() - 2.0 * PI * PI).abs() < 1e-13);
        assert!(sphere_area(17).is_err());
    }

    #[test]
    fn dim_range() {
        assert!(Dim::new(0).is_err());
        assert!(Dim::new(17).is_err());
        assert_eq!(Dim::new(16).unwrap().get(), 16);
    }

    #[test]
    fn listed_beta_values() {
        assert!((incomplete_beta_half(1.0, 2).unwrap() - 2.0).abs() < 1e-15);
        assert!((incomplete_beta_half(1.0, 3).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((incomplete_beta_half(1.0, 1).unwrap() - PI).abs() < 1e-15);
        for k in 1..=16 {
            assert_eq!(incomplete_beta_half(0.0, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn base_case_regression_two_minus_two_sqrt() {
        // B(x;1,1/2) = 2 − 2√(1−x); the "1 − 2√(1−x)" form would give −1 at x=0.
        for &x in &[0.0, 0.1, 0.5, 0.9, 1.0] {
            let b = incomplete_beta_half(x, 2).unwrap();
            assert!((b - (2.0 - 2.0 * (1.0 - x).sqrt())).abs() < 1e-15);
        }
    }

    #[test]
    fn full_beta_matches_complete_beta() {
        for k in 1..=16 {
            let b = incomplete_beta_half(1.0, k).unwrap();
            assert!((b - beta_half(k)).abs() < 1e-13 * beta_half(k), "k={k}");
        }
    }

    #[test]
    fn series_and_recursion_agree_on_overlap() {
        for k in 3..=16 {
            for &x in &[0.2, 0.24, 0.3, 0.45] {
                let s = beta_half_series(x, k);
                let r = beta_half_recursion(x, k);
                assert!((s - r).abs() <= 1e-12 * s.max(1e-300) + 1e-15, "k={k} x={x}: {s} vs {r}");
            }
        }
    }

    #[test]
    fn beta_domain_errors() {
        assert!(incomplete_beta_half(-0.1, 2).is_err());
        assert!(incomplete_beta_half(1.1, 2).is_err());
        assert!(incomplete_beta_half(0.5, 0).is_err());
    }

    #[test]
    fn spherical_volume_examples() {
        for &r in &[0.1, 0.7, 1.5, 2.0, 3.0] {
            let v = spherical_ball_volume(dim(2), r).unwrap();
            assert!((v - 2.0 * PI * (1.0 - r.cos())).abs() < 1e-13, "r={r}");
        }
        assert!((spherical_ball_volume(dim(2), PI / 2.0).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((spherical_ball_volume(dim(1), 1.2).unwrap() - 2.4).abs() < 1e-14);
        assert!(spherical_ball_volume(dim(2), -0.1).is_err());
        assert!(spherical_ball_volume(dim(2), 3.2).is_err());
    }

    #[test]
    fn spherical_cap_complement() {
        for n in 1..=8 {
            let total = spherical_total(dim(n)).unwrap();
            for &r in &[0.2, 0.9, 1.3] {
                let v = spherical_ball_volume(dim(n), r).unwrap() + spherical_ball_volume(dim(n), PI - r).unwrap();
                assert!((v - total).abs() < 1e-12 * total, "n={n} r={r}");
            }
            let full = spherical_ball_volume(dim(n), PI).unwrap();
            assert!((full - sphere_area(n).unwrap()).abs() < 1e-12 * full, "n={n}");
        }
    }

    #[test]
    fn hyperbolic_volume_examples() {
        for n in 1..=8 {
            assert_eq!(hyperbolic_ball_volume(dim(n), 0.0).unwrap(), 0.0);
        }
        for &r in &[0.01, 0.5, 2.0] {
            let v = hyperbolic_ball_volume(dim(2), r).unwrap();
            assert!((v - 2.0 * PI * (r.cosh() - 1.0)).abs() < 1e-12 * v.max(1.0));
        }
        assert!(hyperbolic_ball_volume(dim(3), -1.0).is_err());
    }

    #[test]
    fn hyperbolic_closed_forms_are_continuous_across_branches() {
        let below = hyperbolic_ball_volume(dim(3), 0.5 - 1e-12).unwrap();
        let above = hyperbolic_ball_volume(dim(3), 0.5).unwrap();
        assert!((below - above).abs() < 1e-10);
    }

    #[test]
    fn sphere_surfaces() {
        assert_eq!(sphere_surface_area(dim(2), 0.0, Geometry::Hyperbolic).unwrap(), 0.0);
        let s = sphere_surface_area(dim(2), PI / 2.0, Geometry::Spherical).unwrap();
        assert!((s - 4.0 * PI).abs() < 1e-13);
        let h = sphere_surface_area(dim(2), 1.0, Geometry::Hyperbolic).unwrap();
        assert!((h - 4.0 * PI * 1f64.sinh().powi(2)).abs() < 1e-13);
        assert!(sphere_surface_area(dim(2), 4.0, Geometry::Spherical).is_err());
    }
}
