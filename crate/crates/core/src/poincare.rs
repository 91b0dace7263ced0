//! Orbits of the reflection group of the regular right-angled pentagon and
//! the Poincaré series `Σ_γ exp(−s·d(γx, y))` over them.
//!
//! Group elements are stored as 3×3 Lorentz matrices acting on the
//! hyperboloid. Tiles are explored breadth first by right multiplication
//! with the side reflections (tile `M(P)` is adjacent to `M R_j(P)`), and a
//! tile is expanded only while its centre is close enough to `y` that some
//! orbit point within the requested radius could still lie beyond it.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::klein::{
    ball_visual_half_angle, dist_planes, dist_points, lorentz_distance, minkowski,
    visual_angle_between, Endpoint, Hyperplane, KleinPoint, PlaneRelation,
};
use crate::report::{BoundCheck, Relation, SeriesReport, Verdict, DEFAULT_TOLERANCE};
use crate::search::bisect;
use crate::sum::compensated_sum;

/// Largest orbit radius accepted.
pub const MAX_RADIUS: f64 = 12.0;

/// Relative quantization step for orbit-point deduplication.
const DEDUP_STEP: f64 = 1e-9;

type Mat = [[f64; 3]; 3];

const IDENTITY: Mat = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn mat_vec(a: &Mat, v: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (i, row) in a.iter().enumerate() {
        out[i] = row.iter().zip(v).map(|(p, q)| p * q).sum();
    }
    out
}

/// Matrix of `X ↦ X − 2⟨X,e⟩e`.
fn reflection_matrix(e: &[f64]) -> Mat {
    let je = [-e[0], e[1], e[2]];
    let mut m = IDENTITY;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] -= 2.0 * e[i] * je[j];
        }
    }
    m
}

/// Reflection group of a regular right-angled pentagon centred at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocompactGroup {
    /// Euclidean radius of the vertices in the Klein disk.
    pub vertex_radius: f64,
    pub vertices: Vec<[f64; 2]>,
    /// Side lines, oriented with the pentagon on the interior side.
    pub sides: Vec<Hyperplane>,
    /// Hyperbolic distance from the centre to a vertex.
    pub circumradius: f64,
    /// Largest distance between two points of the pentagon.
    pub diameter: f64,
    /// Interior angles, which should all be `π/2`.
    pub vertex_angles: Vec<f64>,
    #[serde(skip)]
    reflections: Vec<Mat>,
}

fn pentagon_vertices(rho: f64) -> Vec<[f64; 2]> {
    (0..5)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 5.0;
            [rho * t.cos(), rho * t.sin()]
        })
        .collect()
}

fn vertex_angle(vertices: &[[f64; 2]], k: usize) -> Result<f64> {
    let at = KleinPoint::new(vertices[k].to_vec())?;
    let prev = KleinPoint::new(vertices[(k + 4) % 5].to_vec())?;
    let next = KleinPoint::new(vertices[(k + 1) % 5].to_vec())?;
    visual_angle_between(&at, &Endpoint::Finite(prev), &Endpoint::Finite(next))
}

/// Build the group, solving for the vertex radius by bisection on the
/// interior angle.
pub fn build_pentagon_group() -> Result<CocompactGroup> {
    let angle_gap = |rho: f64| vertex_angle(&pentagon_vertices(rho), 0).map(|a| a - PI / 2.0).unwrap_or(f64::NAN);
    let rho = bisect(angle_gap, 1e-6, 1.0 - 1e-9, 1e-16);
    let vertices = pentagon_vertices(rho);
    let sides = (0..5)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 5.0 + PI / 5.0;
            Hyperplane::new(vec![t.cos(), t.sin()], rho * (PI / 5.0).cos())
        })
        .collect::<Result<Vec<_>>>()?;
    let vertex_angles = (0..5).map(|k| vertex_angle(&vertices, k)).collect::<Result<Vec<_>>>()?;
    let points: Vec<KleinPoint> = vertices.iter().map(|v| KleinPoint::new(v.to_vec())).collect::<Result<_>>()?;
    let mut diameter: f64 = 0.0;
    for a in &points {
        for b in &points {
            diameter = diameter.max(dist_points(a, b)?);
        }
    }
    let circumradius = dist_points(&KleinPoint::origin(2), &points[0])?;
    let reflections = sides.iter().map(|s| reflection_matrix(s.lorentz())).collect();
    Ok(CocompactGroup {
        vertex_radius: rho,
        vertices,
        sides,
        circumradius,
        diameter,
        vertex_angles,
        reflections,
    })
}

impl CocompactGroup {
    /// Relations between sides `i` and `j`.
    pub fn side_relation(&self, i: usize, j: usize) -> Result<PlaneRelation> {
        dist_planes(&self.sides[i], &self.sides[j])
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.sides.iter().all(|s| s.side(x) >= 0.0)
    }

    /// Distance from `x` to the farthest vertex: a ball of this radius about
    /// `x` contains the pentagon, so its translates cover the plane.
    pub fn covering_radius(&self, x: &KleinPoint) -> Result<f64> {
        let mut r: f64 = 0.0;
        for v in &self.vertices {
            r = r.max(dist_points(x, &KleinPoint::new(v.to_vec())?)?);
        }
        Ok(r)
    }
}

/// One point `γ(x)` of the orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitPoint {
    pub point: KleinPoint,
    /// `d(γ(x), y)`.
    pub distance: f64,
    /// Length of the word that first reached this point.
    pub word_length: usize,
}

/// Relative grid on Klein coordinates with neighbour-cell lookup.
#[derive(Default)]
struct PointSet {
    cells: HashMap<[i64; 2], Vec<[f64; 2]>>,
}

impl PointSet {
    fn insert(&mut self, lift: &[f64; 3]) -> bool {
        let p = [lift[1] / lift[0], lift[2] / lift[0]];
        let key = [(p[0] / DEDUP_STEP).round() as i64, (p[1] / DEDUP_STEP).round() as i64];
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = self.cells.get(&[key[0] + dx, key[1] + dy]) {
                    if list
                        .iter()
                        .any(|q| (q[0] - p[0]).abs() <= DEDUP_STEP && (q[1] - p[1]).abs() <= DEDUP_STEP)
                    {
                        return false;
                    }
                }
            }
        }
        self.cells.entry(key).or_default().push(p);
        true
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return domain(format!("orbit radius {r} must be positive"));
    }
    if r > MAX_RADIUS {
        return Err(Error::Refused(format!(
            "orbit radius {r} exceeds the cap {MAX_RADIUS}; the orbit grows like e^R"
        )));
    }
    Ok(())
}

/// All distinct orbit points `γ(x)` with `d(γ(x), y) ≤ radius`, sorted by
/// distance.
pub fn enumerate_orbit(g: &CocompactGroup, x: &KleinPoint, y: &KleinPoint, radius: f64) -> Result<Vec<OrbitPoint>> {
    check_radius(radius)?;
    if x.dim() != 2 || y.dim() != 2 {
        return Err(Error::Input("the pentagon group acts on the hyperbolic plane".into()));
    }
    let centre = KleinPoint::origin(2);
    let offset = dist_points(x, &centre)?;
    let reach = g.circumradius + dist_points(&centre, y)?.max(radius + offset);
    let (xl, yl) = (x.lift(), y.lift());

    let mut tiles = PointSet::default();
    let mut points = PointSet::default();
    let mut queue = VecDeque::from([(IDENTITY, 0usize)]);
    tiles.insert(&[1.0, 0.0, 0.0]);
    let mut out = Vec::new();
    while let Some((m, len)) = queue.pop_front() {
        let c = [m[0][0], m[1][0], m[2][0]];
        if lorentz_distance(&c, yl) > reach {
            continue;
        }
        let gx = mat_vec(&m, xl);
        let d = lorentz_distance(&gx, yl);
        if d <= radius && points.insert(&gx) {
            out.push(OrbitPoint {
                point: KleinPoint::from_lorentz(&gx)?,
                distance: d,
                word_length: len,
            });
        }
        for r in &g.reflections {
            let next = mat_mul(&m, r);
            if tiles.insert(&[next[0][0], next[1][0], next[2][0]]) {
                queue.push_back((next, len + 1));
            }
        }
    }
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    Ok(out)
}

/// `Σ exp(−s·d)` over sorted distances up to `radius`.
fn partial_sum(distances: &[f64], s: f64, radius: f64) -> f64 {
    compensated_sum(distances.iter().take_while(|&&d| d <= radius).map(|d| (-s * d).exp()))
}

/// `Σ_{d(γx, y) ≤ R} exp(−s·d(γx, y))`.
pub fn poincare_partial_sum(g: &CocompactGroup, x: &KleinPoint, y: &KleinPoint, s: f64, radius: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return domain(format!("exponent {s} must be nonnegative"));
    }
    let orbit = enumerate_orbit(g, x, y, radius)?;
    let d: Vec<f64> = orbit.iter().map(|p| p.distance).collect();
    Ok(partial_sum(&d, s, radius))
}

fn radius_grid(r_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return domain("radius step must be positive");
    }
    let count = (r_max / step + 1e-9).floor() as usize;
    Ok((1..=count).map(|i| i as f64 * step).collect())
}

/// Orbit counts and partial sums at `s = 1` and `s = 2` on the grid
/// `step, 2·step, …, r_max`, as columns `(R, orbit_count, partial_sum_s1,
/// partial_sum_s2)`.
pub fn poincare_series(g: &CocompactGroup, x: &KleinPoint, y: &KleinPoint, r_max: f64, step: f64) -> Result<SeriesReport> {
    let orbit = enumerate_orbit(g, x, y, r_max)?;
    let d: Vec<f64> = orbit.iter().map(|p| p.distance).collect();
    let mut report = SeriesReport::new(&["R", "orbit_count", "partial_sum_s1", "partial_sum_s2"]);
    for r in radius_grid(r_max, step)? {
        let count = d.iter().take_while(|&&v| v <= r).count();
        report.push_row(vec![r, count as f64, partial_sum(&d, 1.0, r), partial_sum(&d, 2.0, r)]);
    }
    let s1 = report.column("partial_sum_s1").expect("column exists");
    let increasing = s1.windows(2).all(|w| w[1] >= w[0]);
    report.push_check(BoundCheck::new(
        "partial sums nondecreasing in R",
        if increasing { 1.0 } else { 0.0 },
        Relation::Equal,
        1.0,
        0.0,
    ));
    Ok(report)
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Parameters of the growth analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthOptions {
    pub r_lo: f64,
    pub r_hi: f64,
    pub step: f64,
    /// Radius from which `s = 2` increments are compared.
    pub ratio_from: f64,
    /// Number of nearest orbit points removed in the finite-subset test.
    pub removed: usize,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        Self {
            r_lo: 4.0,
            r_hi: 10.0,
            step: 0.25,
            ratio_from: 6.0,
            removed: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub options: GrowthOptions,
    pub orbit_size: usize,
    /// Least-squares slope of the `s = 1` partial sums over `[r_lo, r_hi]`.
    pub slope_s1: f64,
    pub slope_first_half: f64,
    pub slope_second_half: f64,
    /// Same slope after removing the nearest orbit points.
    pub slope_s1_reduced: f64,
    /// Ratios of consecutive unit-step increments of the `s = 2` sums.
    pub increment_ratios_s2: Vec<f64>,
    pub checks: Vec<BoundCheck>,
    pub verdict: Verdict,
}

/// Divergence at `s = 1` (partial sums growing linearly in `R`) and
/// convergence at `s = 2` (increments decaying geometrically).
pub fn poincare_growth(g: &CocompactGroup, x: &KleinPoint, y: &KleinPoint, opts: GrowthOptions) -> Result<GrowthReport> {
    if !(opts.r_lo < opts.r_hi) {
        return domain("growth range must satisfy r_lo < r_hi");
    }
    let orbit = enumerate_orbit(g, x, y, opts.r_hi)?;
    let d: Vec<f64> = orbit.iter().map(|p| p.distance).collect();
    let count = ((opts.r_hi - opts.r_lo) / opts.step + 1e-9).floor() as usize;
    let radii: Vec<f64> = (0..=count).map(|i| opts.r_lo + i as f64 * opts.step).collect();
    let sums = |dist: &[f64]| -> Vec<f64> { radii.iter().map(|&r| partial_sum(dist, 1.0, r)).collect() };
    let s1 = sums(&d);
    let slope = ls_slope(&radii, &s1);
    let mid = radii.len() / 2;
    let first = ls_slope(&radii[..=mid], &s1[..=mid]);
    let second = ls_slope(&radii[mid..], &s1[mid..]);
    let reduced_d: Vec<f64> = d.iter().skip(opts.removed.min(d.len())).copied().collect();
    let slope_reduced = ls_slope(&radii, &sums(&reduced_d));

    let mut ratios = Vec::new();
    let mut r = opts.ratio_from;
    while r + 2.0 <= opts.r_hi + 1e-9 {
        let inc = |a: f64| partial_sum(&d, 2.0, a + 1.0) - partial_sum(&d, 2.0, a);
        ratios.push(inc(r + 1.0) / inc(r));
        r += 1.0;
    }

    let drift = (first - second).abs() / slope.abs();
    let mut checks = vec![
        BoundCheck::new("s=1 slope > 0", slope, Relation::Greater, 0.0, DEFAULT_TOLERANCE),
        BoundCheck::new("s=1 slope drift between halves < 0.2", drift, Relation::Less, 0.2, DEFAULT_TOLERANCE),
        BoundCheck::new(
            "s=1 slope change after removing nearest points < 0.05",
            (slope_reduced - slope).abs() / slope.abs(),
            Relation::Less,
            0.05,
            DEFAULT_TOLERANCE,
        ),
    ];
    for (i, q) in ratios.iter().enumerate() {
        checks.push(BoundCheck::new(
            format!("s=2 increment ratio at R={} < 0.7", opts.ratio_from + i as f64),
            *q,
            Relation::Less,
            0.7,
            DEFAULT_TOLERANCE,
        ));
    }
    let verdict = Verdict::combine(checks.iter().map(|c| c.verdict));
    Ok(GrowthReport {
        options: opts,
        orbit_size: d.len(),
        slope_s1: slope,
        slope_first_half: first,
        slope_second_half: second,
        slope_s1_reduced: slope_reduced,
        increment_ratios_s2: ratios,
        checks,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowCoverReport {
    pub radius: f64,
    /// Radius of the balls about the orbit points.
    pub ball_radius: f64,
    pub balls_used: usize,
    /// Balls containing `y`, which have no shadow and are left out.
    pub balls_skipped: usize,
    /// `Σ 2·asin(sinh ρ / sinh D)` over the balls used.
    pub total: f64,
    /// Fraction of the visual circle at `y` covered by the union of the arcs.
    pub covered_fraction: f64,
    pub checks: Vec<BoundCheck>,
    pub verdict: Verdict,
}

/// Shadows of the balls `B(γx, ρ)` with `ρ` the covering radius of the
/// pentagon about `x`: once the translates within `R` cover every direction
/// from `y`, their visual arcs add up to at least `ω₁ = 2π`.
pub fn shadow_lower_bound_check(g: &CocompactGroup, x: &KleinPoint, y: &KleinPoint, radius: f64) -> Result<ShadowCoverReport> {
    let orbit = enumerate_orbit(g, x, y, radius)?;
    let rho = g.covering_radius(x)?;
    let mut arcs = Vec::new();
    let mut skipped = 0;
    let mut halves = Vec::new();
    for p in &orbit {
        if p.distance <= rho {
            skipped += 1;
            continue;
        }
        let half = ball_visual_half_angle(rho, p.distance)?;
        halves.push(half);
        let (gl, yl) = (p.point.lift(), y.lift());
        let t: Vec<f64> = gl.iter().zip(yl).map(|(a, b)| a + minkowski(gl, yl) * b).collect();
        let theta = tangent_angle(yl, &t);
        arcs.push((theta - half, theta + half));
    }
    let total = compensated_sum(halves.iter().map(|h| 2.0 * h));
    let covered = arc_union_length(&arcs) / (2.0 * PI);
    let checks = vec![BoundCheck::new(
        "Σ ball shadow arcs >= ω₁",
        total,
        Relation::GreaterEq,
        2.0 * PI,
        DEFAULT_TOLERANCE,
    )];
    let verdict = Verdict::combine(checks.iter().map(|c| c.verdict));
    Ok(ShadowCoverReport {
        radius,
        ball_radius: rho,
        balls_used: halves.len(),
        balls_skipped: skipped,
        total,
        covered_fraction: covered,
        checks,
        verdict,
    })
}

/// Angle of a tangent vector at `y`, in the frame obtained by boosting the
/// Euclidean axes from the origin to `y`.
fn tangent_angle(yl: &[f64], t: &[f64]) -> f64 {
    let (y0, ys) = (yl[0], [yl[1], yl[2]]);
    let frame = |w: [f64; 2]| -> [f64; 3] {
        let yw = ys[0] * w[0] + ys[1] * w[1];
        [yw, w[0] + yw / (y0 + 1.0) * ys[0], w[1] + yw / (y0 + 1.0) * ys[1]]
    };
    let (e1, e2) = (frame([1.0, 0.0]), frame([0.0, 1.0]));
    minkowski(t, &e2).atan2(minkowski(t, &e1))
}

/// Length of the union of arcs `(a, b)` on the circle, `b − a ≤ π`.
fn arc_union_length(arcs: &[(f64, f64)]) -> f64 {
    let tau = 2.0 * PI;
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    for &(a, b) in arcs {
        let len = (b - a).clamp(0.0, tau);
        let a = a.rem_euclid(tau);
        let b = a + len;
        if b > tau {
            pieces.push((a, tau));
            pieces.push((0.0, b - tau));
        } else {
            pieces.push((a, b));
        }
    }
    pieces.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (a, b) in pieces {
        match cur {
            Some((ca, cb)) if a <= cb => cur = Some((ca, cb.max(b))),
            Some((ca, cb)) => {
                total += cb - ca;
                cur = Some((a, b));
            }
            None => cur = Some((a, b)),
        }
    }
    if let Some((ca, cb)) = cur {
        total += cb - ca;
    }
    total.min(tau)
}

/// Fit of `log(2·asin(sinh ρ / sinh D))` against `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rho: f64,
    pub slope: f64,
    pub intercept: f64,
    /// `log(4 sinh ρ)`, the intercept of the exact asymptotics.
    pub asymptotic_intercept: f64,
    /// `log(4 tanh ρ)`, for comparison.
    pub tanh_intercept: f64,
}

/// Visual diameter `2·asin(sinh ρ / sinh D)` of a ball of radius `ρ` at
/// distance `D`, sampled on `[d_lo, d_hi]` and fitted on a log scale.
pub fn visual_diameter_decay(rho: f64, d_lo: f64, d_hi: f64, samples: usize) -> Result<DecayFit> {
    if samples < 2 || !(d_lo < d_hi) || !(d_lo > rho) {
        return domain("need at least 2 samples on an interval beyond the ball radius");
    }
    let ds: Vec<f64> = (0..samples)
        .map(|i| d_lo + (d_hi - d_lo) * i as f64 / (samples - 1) as f64)
        .collect();
    let ys = ds
        .iter()
        .map(|&d| ball_visual_half_angle(rho, d).map(|a| (2.0 * a).ln()))
        .collect::<Result<Vec<_>>>()?;
    let slope = ls_slope(&ds, &ys);
    let mean_d = ds.iter().sum::<f64>() / ds.len() as f64;
    let mean_y = ys.iter().sum::<f64>() / ys.len() as f64;
    Ok(DecayFit {
        rho,
        slope,
        intercept: mean_y - slope * mean_d,
        asymptotic_intercept: (4.0 * rho.sinh()).ln(),
        tanh_intercept: (4.0 * rho.tanh()).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pentagon_geometry() {
        let g = build_pentagon_group().unwrap();
        for a in &g.vertex_angles {
            assert!((a - PI / 2.0).abs() < 1e-10);
        }
        // cosh R = cot(π/5)·cot(π/4) for the circumradius.
        let expected = (1.0 / (PI / 5.0).tan()).acosh();
        assert!((g.circumradius - expected).abs() < 1e-10);
        for i in 0..5 {
            assert!(matches!(g.side_relation(i, (i + 1) % 5).unwrap(), PlaneRelation::Intersecting { .. }));
            assert!(g.side_relation(i, (i + 2) % 5).unwrap().is_disjoint());
        }
    }

    #[test]
    fn reflections_are_involutions() {
        let g = build_pentagon_group().unwrap();
        for r in &g.reflections {
            let sq = mat_mul(r, r);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((sq[i][j] - IDENTITY[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn small_radius_orbit() {
        let g = build_pentagon_group().unwrap();
        let x = KleinPoint::new(vec![0.05, 0.02]).unwrap();
        let o = enumerate_orbit(&g, &x, &x, 0.1).unwrap();
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].word_length, 0);
        assert!(matches!(enumerate_orbit(&g, &x, &x, 12.5), Err(Error::Refused(_))));
    }

    #[test]
    fn arc_union() {
        assert!((arc_union_length(&[(0.0, 1.0), (0.5, 1.5)]) - 1.5).abs() < 1e-15);
        assert!((arc_union_length(&[(-0.5, 0.5), (6.0, 6.2), (1.0, 1.2)]) - 1.2).abs() < 1e-12);
        let full: Vec<(f64, f64)> = (0..8).map(|k| (k as f64, k as f64 + 1.0)).collect();
        assert!((arc_union_length(&full) - 2.0 * PI).abs() < 1e-12);
    }
}
