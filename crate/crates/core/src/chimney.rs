//! Integrals of `g(d(x, Π₁))` over the chimney, the convex hull of two
//! disjoint hyperplanes `Π₁, Π₂` at distance `d`.
//!
//! Placed symmetrically about the origin with normals `±v`, the chimney in the
//! Klein ball is the Euclidean cylinder `|α| ≤ tanh(d/2)`, `r ≤ sech(d/2)`
//! (α along `v`, r orthogonal to it), whose rim circles lie on the unit
//! sphere. In cylindrical coordinates
//!
//! ```text
//! I(g, d) = ω_{n−2} ∫dα ∫dr  r^{n−2} g(d(x, Π₁)) / (1 − α² − r²)^{(n+1)/2}
//! d(x, Π₁) = asinh((1 − tα) / (√(t²−1) √(1 − α² − r²))),   t = coth(d/2)
//! ```
//!
//! The quadrature substitutes `α = a sin φ`, `r = b sin ψ` with
//! `a = tanh(d/2)`, `b = sech(d/2)`, so that `1 − α² − r² = a²cos²φ + b²cos²ψ`
//! and the rim singularity becomes a point singularity at the corners. Near a
//! rim point the integrand grows like `ρ^{1−n}` in the distance `ρ` to the
//! corner of the `(α, r)` rectangle, which is integrable for `n = 2` and
//! logarithmically divergent for `n ≥ 3` unless `g` vanishes at that rim.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::klein::{dist_point_plane, planes_at_distance, Hyperplane, KleinPoint};
use crate::quad::{integrate_2d, QuadOptions};
use crate::shadows::cap_volume;
use crate::specfun::{sphere_area, Dim};
use crate::sum::NeumaierSum;

/// Functions of the distance to `Π₁` available by name.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Integrand {
    Zero,
    One,
    /// `V_{n−1}(asin sech ·)`, the shadow cap area.
    Basmajian,
    /// `e^{−λ·}`.
    ExpDecay(f64),
}

impl Integrand {
    pub fn eval(&self, dist: f64, n: Dim) -> f64 {
        match *self {
            Integrand::Zero => 0.0,
            Integrand::One => 1.0,
            Integrand::Basmajian => cap_volume(dist.max(0.0), n).unwrap_or(f64::NAN),
            Integrand::ExpDecay(lambda) => (-lambda * dist).exp(),
        }
    }
}

impl fmt::Display for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Integrand::Zero => write!(f, "zero"),
            Integrand::One => write!(f, "one"),
            Integrand::Basmajian => write!(f, "basmajian"),
            Integrand::ExpDecay(l) => write!(f, "exp-decay:{l}"),
        }
    }
}

impl FromStr for Integrand {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Integrand::Zero),
            "one" => Ok(Integrand::One),
            "basmajian" => Ok(Integrand::Basmajian),
            _ => {
                let rate = s
                    .strip_prefix("exp-decay:")
                    .ok_or_else(|| Error::Input(format!("unknown integrand {s:?}")))?;
                let lambda: f64 = rate
                    .parse()
                    .map_err(|_| Error::Input(format!("bad decay rate {rate:?}")))?;
                if !(lambda >= 0.0) || !lambda.is_finite() {
                    return Err(Error::Input(format!("decay rate {lambda} must be nonnegative")));
                }
                Ok(Integrand::ExpDecay(lambda))
            }
        }
    }
}

impl From<Integrand> for String {
    fn from(g: Integrand) -> Self {
        g.to_string()
    }
}

impl TryFrom<String> for Integrand {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChimneyConfig {
    /// Distance between the two planes.
    pub d: f64,
    pub n: Dim,
    pub g: Integrand,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl ChimneyConfig {
    pub fn new(d: f64, n: Dim, g: Integrand) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() {
            return domain(format!("plane distance {d} must be positive"));
        }
        if n.get() < 2 {
            return domain("chimneys need dimension n >= 2");
        }
        Ok(Self {
            d,
            n,
            g,
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_intervals: 400,
        })
    }

    /// The symmetric plane pair `Π₁: v·x < tanh(d/2)`, `Π₂: −v·x < tanh(d/2)`.
    pub fn planes(&self) -> Result<(Hyperplane, Hyperplane)> {
        planes_at_distance(self.d, self.n.get())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChimneyIntegral {
    pub value: f64,
    pub error_estimate: f64,
    pub outer_intervals: usize,
}

/// `I(g, d)` by nested adaptive quadrature. A divergent integral surfaces as
/// [`Error::NonConvergence`].
pub fn chimney_integral(cfg: &ChimneyConfig) -> Result<ChimneyIntegral> {
    let g = cfg.g;
    let n = cfg.n;
    chimney_integral_with(|dist| g.eval(dist, n), cfg)
}

/// [`chimney_integral`] with an arbitrary `g`; `cfg.g` is ignored.
pub fn chimney_integral_with<G: Fn(f64) -> f64>(g: G, cfg: &ChimneyConfig) -> Result<ChimneyIntegral> {
    let n = cfg.n.get();
    let a = (0.5 * cfg.d).tanh();
    let b = 1.0 / (0.5 * cfg.d).cosh();
    let omega = sphere_area(n - 2)?;
    let integrand = |phi: f64, psi: f64| -> f64 {
        let (sp, cp) = phi.sin_cos();
        let (sq, cq) = psi.sin_cos();
        let q = a * a * cp * cp + b * b * cq * cq;
        if q < 1e-300 {
            return 0.0;
        }
        // 1 − tα = 1 − sin φ, and √(t²−1) = b/a.
        let one_minus = cp * cp / (1.0 + sp);
        let dist = (a * one_minus / (b * q.sqrt())).asinh();
        let r = b * sq;
        let jac = a * cp * b * cq;
        let gv = g(dist);
        if gv == 0.0 {
            return 0.0;
        }
        gv * r.powi(n as i32 - 2) * jac / q.powf(0.5 * (n as f64 + 1.0))
    };
    let opts = QuadOptions {
        abs_tol: cfg.abs_tol,
        rel_tol: cfg.rel_tol,
        max_intervals: cfg.max_intervals,
    };
    let r = integrate_2d(integrand, -PI / 2.0, PI / 2.0, |_| 0.0, |_| PI / 2.0, opts).map_err(|e| match e {
        Error::NonConvergence(m) => Error::NonConvergence(format!(
            "chimney integral (n={n}, d={}) did not converge; the integrand is not integrable near the rim circles: {m}",
            cfg.d
        )),
        other => other,
    })?;
    Ok(ChimneyIntegral {
        value: omega * r.value,
        error_estimate: omega * r.error,
        outer_intervals: r.intervals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub samples: u64,
    /// Samples that fell inside the chimney.
    pub accepted: u64,
    pub seed: u64,
}

const CHUNK: u64 = 8192;

/// Convex-hull membership for two planes whose normals are opposite, so
/// that both rim disks are centred on one axis through the origin.
struct HullTest {
    axis: Vec<f64>,
    lo: f64,
    hi: f64,
    r_lo: f64,
    r_hi: f64,
}

impl HullTest {
    fn new(p1: &Hyperplane, p2: &Hyperplane) -> Result<Self> {
        let anti = p1.normal().iter().zip(p2.normal()).all(|(a, b)| (a + b).abs() < 1e-12);
        if !anti {
            return Err(Error::Input(
                "Monte Carlo chimney needs plane normals that are exact opposites".into(),
            ));
        }
        let (c1, c2) = (p1.offset(), p2.offset());
        if c1 + c2 <= 0.0 {
            return domain("the two half-spaces do not overlap");
        }
        Ok(Self {
            axis: p1.normal().to_vec(),
            lo: -c2,
            hi: c1,
            r_lo: (1.0 - c2 * c2).sqrt(),
            r_hi: (1.0 - c1 * c1).sqrt(),
        })
    }

    fn contains(&self, x: &[f64], xx: f64) -> bool {
        let alpha: f64 = self.axis.iter().zip(x).map(|(u, v)| u * v).sum();
        if alpha <= self.lo || alpha >= self.hi {
            return false;
        }
        let lambda = (alpha - self.lo) / (self.hi - self.lo);
        let radius = lambda * self.r_hi + (1.0 - lambda) * self.r_lo;
        xx - alpha * alpha <= radius * radius
    }
}

fn unit_ball_volume(n: usize) -> Result<f64> {
    Ok(sphere_area(n - 1)? / n as f64)
}

/// Monte Carlo oracle for [`chimney_integral`] on the symmetric plane pair.
pub fn monte_carlo_chimney(cfg: &ChimneyConfig, samples: u64, seed: u64) -> Result<McEstimate> {
    let (p1, p2) = cfg.planes()?;
    monte_carlo_chimney_planes(&p1, &p2, cfg.g, samples, seed)
}

/// Uniform samples in the Klein ball, kept when inside the hull of the two
/// planes, weighted by `(1 − |x|²)^{−(n+1)/2} · g(d(x, Π₁))` with the
/// distance taken directly from the plane. Sample `i` draws from its own
/// ChaCha stream block, so the result does not depend on the thread count.
pub fn monte_carlo_chimney_planes(
    p1: &Hyperplane,
    p2: &Hyperplane,
    g: Integrand,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if samples < 1000 {
        return Err(Error::Input(format!("{samples} samples requested; at least 1000 are required")));
    }
    let n = p1.dim();
    if p2.dim() != n {
        return Err(Error::Input("plane dimensions differ".into()));
    }
    let dim = Dim::new(n)?;
    let hull = HullTest::new(p1, p2)?;
    let vol = unit_ball_volume(n)?;
    let chunks = samples.div_ceil(CHUNK);
    let partials: Vec<Result<(NeumaierSum, NeumaierSum, u64)>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = CHUNK.min(samples - chunk * CHUNK);
            let mut sum = NeumaierSum::new();
            let mut sq = NeumaierSum::new();
            let mut accepted = 0;
            let mut x = vec![0.0; n];
            for _ in 0..count {
                sample_ball(&mut rng, &mut x);
                let xx: f64 = x.iter().map(|c| c * c).sum();
                if !hull.contains(&x, xx) {
                    continue;
                }
                accepted += 1;
                let Ok(point) = KleinPoint::new(x.clone()) else {
                    continue;
                };
                let dist = dist_point_plane(&point, p1)?;
                let gv = g.eval(dist, dim);
                if gv == 0.0 {
                    continue;
                }
                let w = vol * gv / (1.0 - xx).powf(0.5 * (n as f64 + 1.0));
                sum.add(w);
                sq.add(w * w);
            }
            Ok((sum, sq, accepted))
        })
        .collect();
    let mut sum = NeumaierSum::new();
    let mut sq = NeumaierSum::new();
    let mut accepted = 0;
    for part in partials {
        let (s, q, a) = part?;
        sum.add(s.value());
        sq.add(q.value());
        accepted += a;
    }
    if accepted == 0 {
        return Err(Error::NonConvergence("no Monte Carlo sample landed in the chimney".into()));
    }
    let m = samples as f64;
    let mean = sum.value() / m;
    let var = ((sq.value() / m - mean * mean) * m / (m - 1.0)).max(0.0);
    Ok(McEstimate {
        estimate: mean,
        standard_error: (var / m).sqrt(),
        samples,
        accepted,
        seed,
    })
}

/// Uniform point in the unit ball: Gaussian direction, radius `U^{1/n}`.
fn sample_ball<R: Rng>(rng: &mut R, x: &mut [f64]) {
    let n = x.len();
    loop {
        let mut len2 = 0.0;
        for c in x.iter_mut() {
            *c = StandardNormal.sample(rng);
            len2 += *c * *c;
        }
        if len2 > 0.0 {
            let u: f64 = rng.random();
            let scale = u.powf(1.0 / n as f64) / len2.sqrt();
            x.iter_mut().for_each(|c| *c *= scale);
            return;
        }
    }
}

/// A rotation of `ℝⁿ` drawn from Gram–Schmidt on a Gaussian matrix; rows
/// form an orthonormal basis.
pub fn random_rotation(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    while rows.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        for r in &rows {
            let p: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(r).for_each(|(a, b)| *a -= p * b);
        }
        let len = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if len > 1e-8 {
            rows.push(v.iter().map(|c| c / len).collect());
        }
    }
    rows
}

/// Apply a rotation (given by rows) to a plane.
pub fn rotate_plane(rot: &[Vec<f64>], p: &Hyperplane) -> Result<Hyperplane> {
    let u: Vec<f64> = rot
        .iter()
        .map(|row| row.iter().zip(p.normal()).map(|(a, b)| a * b).sum())
        .collect();
    Hyperplane::from_equation(&u, p.offset())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(d: f64, n: usize, g: Integrand) -> ChimneyConfig {
        ChimneyConfig::new(d, Dim::new(n).unwrap(), g).unwrap()
    }

    #[test]
    fn integrand_names_round_trip() {
        for s in ["zero", "one", "basmajian", "exp-decay:0.5"] {
            assert_eq!(s.parse::<Integrand>().unwrap().to_string(), s);
        }
        assert!("sqrt".parse::<Integrand>().is_err());
        assert!("exp-decay:-1".parse::<Integrand>().is_err());
    }

    #[test]
    fn zero_integrand() {
        assert_eq!(chimney_integral(&cfg(1.0, 3, Integrand::Zero)).unwrap().value, 0.0);
        let mc = monte_carlo_chimney(&cfg(1.0, 3, Integrand::Zero), 2000, 1).unwrap();
        assert_eq!((mc.estimate, mc.standard_error), (0.0, 0.0));
    }

    #[test]
    fn planar_chimney_is_an_ideal_quadrilateral() {
        for &d in &[0.5, 1.0, 2.0] {
            let r = chimney_integral(&cfg(d, 2, Integrand::One)).unwrap();
            assert!((r.value - 2.0 * PI).abs() < 1e-7, "d={d}: {}", r.value);
        }
    }

    #[test]
    fn three_dimensional_volume_diverges() {
        let r = chimney_integral(&cfg(1.0, 3, Integrand::One));
        assert!(matches!(r, Err(Error::NonConvergence(_))));
    }

    #[test]
    fn mc_is_reproducible() {
        let c = cfg(1.0, 2, Integrand::Basmajian);
        let a = monte_carlo_chimney(&c, 20_000, 9).unwrap();
        let b = monte_carlo_chimney(&c, 20_000, 9).unwrap();
        assert_eq!(a, b);
        assert!(monte_carlo_chimney(&c, 999, 9).is_err());
    }

    #[test]
    fn basmajian_weight_decreases_with_separation() {
        let v: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&d| chimney_integral(&cfg(d, 2, Integrand::Basmajian)).unwrap().value)
            .collect();
        assert!(v[0] > v[1] && v[1] > v[2], "{v:?}");
    }

    #[test]
    fn rotated_planes_keep_their_separation() {
        let c = cfg(1.3, 3, Integrand::One);
        let (a, b) = c.planes().unwrap();
        let rot = random_rotation(3, 11);
        let (ra, rb) = (rotate_plane(&rot, &a).unwrap(), rotate_plane(&rot, &b).unwrap());
        let d = crate::klein::dist_planes(&ra, &rb).unwrap().distance();
        assert!((d - 1.3).abs() < 1e-12);
        let x = KleinPoint::new(vec![0.1, -0.2, 0.3]).unwrap();
        let rx = KleinPoint::new((0..3).map(|i| (0..3).map(|j| rot[i][j] * x.coords()[j]).sum()).collect()).unwrap();
        let da = crate::klein::dist_point_plane(&x, &a).unwrap();
        assert!((crate::klein::dist_point_plane(&rx, &ra).unwrap() - da).abs() < 1e-12);
    }

    #[test]
    fn rotation_is_orthogonal() {
        let q = random_rotation(4, 3);
        for i in 0..4 {
            for j in 0..4 {
                let p: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
                assert!((p - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }
}
