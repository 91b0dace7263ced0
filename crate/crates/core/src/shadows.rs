//! Shadow sums: each hyperplane at distance `d` from a viewpoint projects to
//! a cap of angular radius `asin sech d` on the visual sphere. Disjoint
//! planes give disjoint caps, and planes bounding a region around the viewer
//! cover the sphere, which turns cap areas into identities and inequalities.
//!
//! Distances are always to the full hyperplane of a facet (or the full
//! geodesic line of an edge), even when the foot of the perpendicular falls
//! outside the face itself.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::klein::{
    dist_planes, dist_point_plane, dist_point_segment, minkowski, visual_angle_between,
    visual_half_angle, Endpoint, GeodesicSegment, Hyperplane, KleinPoint, PlaneRelation,
};
use crate::report::{retighten, BoundCheck, Relation, Verdict, DEFAULT_TOLERANCE};
use crate::search::bisect;
use crate::specfun::{incomplete_beta_half, sphere_area, Dim};
use crate::sum::compensated_sum;

/// Below this a viewpoint counts as lying on a plane.
const ON_PLANE: f64 = 1e-14;

/// `V_{n−1}(asin sech d)`: area of the shadow of a hyperplane at distance `d`
/// on the visual `(n−1)`-sphere, `(ω_{n−2}/2)·B(sech²d; (n−1)/2, ½)`.
pub fn shadow_cap_volume(d: f64, n: Dim) -> Result<f64> {
    if !(d > 0.0) {
        return domain(format!("distance {d} must be positive"));
    }
    cap_volume(d, n)
}

// Same formula, extended to d = 0 (a hemisphere).
pub(crate) fn cap_volume(d: f64, n: Dim) -> Result<f64> {
    let n = n.get();
    if n < 2 {
        return domain("shadow caps need dimension n >= 2");
    }
    if n == 2 {
        return Ok(2.0 * visual_half_angle(d));
    }
    let sech = 1.0 / d.cosh();
    let b = incomplete_beta_half((sech * sech).min(1.0), (n - 1) as u32)?;
    Ok(0.5 * sphere_area(n - 2)? * b)
}

/// Area `ω_{n−1}` of the visual sphere of `ℍ^n`.
pub fn visual_sphere_area(n: Dim) -> Result<f64> {
    sphere_area(n.get() - 1)
}

/// Per-plane distances and cap areas from one viewpoint, and the checks made
/// on their total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowReport {
    pub dim: usize,
    pub point: Vec<f64>,
    /// Signed distances, positive on each plane's interior side.
    pub distances: Vec<f64>,
    pub caps: Vec<f64>,
    pub total: f64,
    /// `ω_{n−1}`.
    pub reference: f64,
    /// `total / ω_{n−1}`; in dimension 3 this is `Σ 1/(e^{2d}+1)`.
    pub normalized: f64,
    pub checks: Vec<BoundCheck>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage: Option<CoverageEstimate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ShadowReport {
    fn compute(x: &KleinPoint, planes: &[Hyperplane]) -> Result<Self> {
        let n = Dim::new(x.dim())?;
        if planes.is_empty() {
            return Err(Error::Input("no planes given".into()));
        }
        let mut distances = Vec::with_capacity(planes.len());
        let mut caps = Vec::with_capacity(planes.len());
        for (i, p) in planes.iter().enumerate() {
            let d = dist_point_plane(x, p)?;
            if d.abs() < ON_PLANE {
                return Err(Error::Degenerate(format!("viewpoint lies on plane {i}")));
            }
            distances.push(d);
            caps.push(cap_volume(d.abs(), n)?);
        }
        let total = compensated_sum(caps.iter().copied());
        let reference = visual_sphere_area(n)?;
        Ok(Self {
            dim: n.get(),
            point: x.coords().to_vec(),
            distances,
            caps,
            total,
            reference,
            normalized: total / reference,
            checks: Vec::new(),
            verdict: Verdict::Inconclusive,
            coverage: None,
            notes: Vec::new(),
        })
    }

    fn check(&mut self, label: &str, value: f64, relation: Relation, bound: f64) {
        self.checks.push(BoundCheck::new(label, value, relation, bound, DEFAULT_TOLERANCE));
        self.verdict = Verdict::combine(self.checks.iter().map(|c| c.verdict));
    }

    /// Sum over a subset of the planes.
    pub fn partial_total(&self, indices: &[usize]) -> f64 {
        compensated_sum(indices.iter().map(|&i| self.caps[i]))
    }

    /// Re-evaluate every check at a tighter tolerance.
    pub fn tightened(mut self, tolerance: f64) -> Result<Self> {
        self.checks = retighten(&self.checks, tolerance)?;
        self.verdict = Verdict::combine(self.checks.iter().map(|c| c.verdict));
        Ok(self)
    }

    pub fn passed(&self) -> bool {
        self.verdict.is_pass()
    }
}

/// What the caller asserts about a family of planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FamilyFlags {
    /// The planes bound a region containing the viewpoint, so every ray from
    /// it crosses at least one of them.
    pub covering: bool,
}

/// Pairwise relation check: every pair disjoint (ultraparallel).
pub fn pairwise_disjoint(planes: &[Hyperplane]) -> Result<bool> {
    for (i, a) in planes.iter().enumerate() {
        for b in &planes[i + 1..] {
            if !dist_planes(a, b)?.is_disjoint() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Sum of shadow caps of `planes` seen from `x`, classified against `ω_{n−1}`:
/// equality for a disjoint covering family, `≤` for a disjoint family and
/// `≥` for a covering one.
pub fn basmajian_sum(x: &KleinPoint, planes: &[Hyperplane], flags: FamilyFlags) -> Result<ShadowReport> {
    let mut report = ShadowReport::compute(x, planes)?;
    let disjoint = pairwise_disjoint(planes)?;
    let (total, omega) = (report.total, report.reference);
    match (disjoint, flags.covering) {
        (true, true) => report.check("shadow sum = ω", total, Relation::Equal, omega),
        (true, false) => report.check("shadow sum <= ω", total, Relation::LessEq, omega),
        (false, true) => report.check("shadow sum >= ω", total, Relation::GreaterEq, omega),
        (false, false) => report
            .notes
            .push("planes are neither pairwise disjoint nor declared covering; no relation asserted".into()),
    }
    Ok(report)
}

/// Monte Carlo estimate of the fraction of the visual sphere covered by the
/// shadows of `planes`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageEstimate {
    pub samples: usize,
    pub seed: u64,
    pub covered_fraction: f64,
    /// Largest number of planes hit by a single ray.
    pub max_multiplicity: usize,
}

/// Shoot `samples` uniformly distributed rays from `x` and count those that
/// cross at least one plane. A diagnostic, not a proof of covering.
pub fn coverage_estimate(x: &KleinPoint, planes: &[Hyperplane], samples: usize, seed: u64) -> Result<CoverageEstimate> {
    if samples == 0 {
        return Err(Error::Input("sample count must be positive".into()));
    }
    let n = x.dim();
    let lift = x.lift();
    let (x0, xs) = (lift[0], &lift[1..]);
    let sides: Vec<f64> = planes.iter().map(|p| minkowski(lift, p.lorentz())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hit = 0usize;
    let mut max_mult = 0usize;
    let mut w = vec![0.0; n];
    let mut ideal = vec![0.0; n + 1];
    for _ in 0..samples {
        for c in w.iter_mut() {
            *c = StandardNormal.sample(&mut rng);
        }
        let len = w.iter().map(|c| c * c).sum::<f64>().sqrt();
        // Boost the Euclidean unit vector w into the tangent space at X; the
        // ray then ends at the lightlike vector X + V.
        let xw: f64 = xs.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / len;
        ideal[0] = x0 + xw;
        for i in 0..n {
            ideal[i + 1] = xs[i] + w[i] / len + xw / (x0 + 1.0) * xs[i];
        }
        let mult = planes
            .iter()
            .zip(&sides)
            .filter(|(p, s)| {
                let t = minkowski(&ideal, p.lorentz());
                t != 0.0 && (t > 0.0) != (**s > 0.0)
            })
            .count();
        if mult > 0 {
            hit += 1;
        }
        max_mult = max_mult.max(mult);
    }
    Ok(CoverageEstimate {
        samples,
        seed,
        covered_fraction: hit as f64 / samples as f64,
        max_multiplicity: max_mult,
    })
}

/// A convex ideal polygon given by the angular positions of its vertices on
/// the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolygonRepr", into = "PolygonRepr")]
pub struct IdealPolygon {
    angles: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PolygonRepr {
    angles: Vec<f64>,
}

impl TryFrom<PolygonRepr> for IdealPolygon {
    type Error = Error;
    fn try_from(r: PolygonRepr) -> Result<Self> {
        IdealPolygon::new(r.angles)
    }
}

impl From<IdealPolygon> for PolygonRepr {
    fn from(p: IdealPolygon) -> Self {
        PolygonRepr { angles: p.angles }
    }
}

impl IdealPolygon {
    /// Angles must be strictly increasing in `[0, 2π)`, at least three.
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.len() < 3 {
            return domain("an ideal polygon needs at least 3 vertices");
        }
        if angles.iter().any(|a| !(0.0..2.0 * PI).contains(a)) {
            return domain("vertex angles must lie in [0, 2π)");
        }
        if angles.windows(2).any(|w| w[1] <= w[0]) {
            return domain("vertex angles must be strictly increasing");
        }
        Ok(Self { angles })
    }

    /// Regular ideal `k`-gon with a vertex at angle 0.
    pub fn regular(k: usize) -> Result<Self> {
        Self::new((0..k).map(|i| 2.0 * PI * i as f64 / k as f64).collect())
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn vertices(&self) -> Vec<[f64; 2]> {
        self.angles.iter().map(|a| [a.cos(), a.sin()]).collect()
    }

    /// Side lines, oriented with the polygon on their interior side.
    pub fn sides(&self) -> Vec<Hyperplane> {
        let k = self.angles.len();
        (0..k)
            .map(|i| {
                let a = self.angles[i];
                let b = if i + 1 < k { self.angles[i + 1] } else { self.angles[0] + 2.0 * PI };
                let mid = 0.5 * (a + b);
                Hyperplane::new(vec![mid.cos(), mid.sin()], (0.5 * (b - a)).cos())
                    .expect("chord between distinct ideal points")
            })
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.sides().iter().all(|s| s.side(x) > 0.0)
    }
}

fn require_interior(x: &KleinPoint, sides: &[Hyperplane], what: &str) -> Result<()> {
    for (i, s) in sides.iter().enumerate() {
        check_dim(x, s)?;
        if s.side(x.coords()) <= 0.0 {
            return domain(format!("point is not inside the {what} (side {i})"));
        }
    }
    Ok(())
}

fn check_dim(x: &KleinPoint, p: &Hyperplane) -> Result<()> {
    if x.dim() != p.dim() {
        return Err(Error::Input(format!("dimension mismatch: point {} vs plane {}", x.dim(), p.dim())));
    }
    Ok(())
}

/// `Σ asin sech dᵢ(x) = π` over the sides of an ideal polygon.
pub fn verify_ideal_polygon(polygon: &IdealPolygon, x: &KleinPoint) -> Result<ShadowReport> {
    if x.dim() != 2 {
        return Err(Error::Input("ideal polygons live in dimension 2".into()));
    }
    let sides = polygon.sides();
    require_interior(x, &sides, "polygon")?;
    let mut report = ShadowReport::compute(x, &sides)?;
    let angle_sum = 0.5 * report.total;
    report.check("sum of asin sech d = π", angle_sum, Relation::Equal, PI);
    Ok(report)
}

/// How two consecutive sides of a polygon meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Finite,
    Ideal,
    Hyperideal,
}

/// Classify the vertices of a polygon given by its sides in cyclic order;
/// vertex `i` joins side `i` to side `i+1`.
pub fn classify_vertices(sides: &[Hyperplane]) -> Result<Vec<VertexKind>> {
    let k = sides.len();
    (0..k)
        .map(|i| {
            Ok(match dist_planes(&sides[i], &sides[(i + 1) % k])? {
                PlaneRelation::Intersecting { .. } => VertexKind::Finite,
                PlaneRelation::Asymptotic => VertexKind::Ideal,
                PlaneRelation::Disjoint { .. } => VertexKind::Hyperideal,
                PlaneRelation::Coincident => {
                    return Err(Error::Degenerate(format!("sides {i} and {} coincide", (i + 1) % k)))
                }
            })
        })
        .collect()
}

/// Sides of the regular `k`-gon with Klein vertices at radius `r` on the
/// rays at angles `2πj/k`. Vertices are finite for `r < 1`, ideal for
/// `r = 1` and hyperideal beyond, as long as every side still crosses the
/// disk.
pub fn regular_polygon(k: usize, r: f64) -> Result<Vec<Hyperplane>> {
    if k < 3 {
        return domain("a polygon needs at least 3 sides");
    }
    let c = r * (PI / k as f64).cos();
    if !(r > 0.0) || !(c < 1.0) {
        return domain(format!("vertex radius {r} leaves a side outside the disk"));
    }
    (0..k)
        .map(|j| {
            let t = PI * (2 * j + 1) as f64 / k as f64;
            Hyperplane::new(vec![t.cos(), t.sin()], c)
        })
        .collect()
}

/// Regular `k`-gon with hyperideal vertices at radius `r > 1`, each vertex
/// cut off by its polar line. Sides alternate between the original sides
/// and the truncating lines, which meet them at right angles.
pub fn truncated_polygon(k: usize, r: f64) -> Result<Vec<Hyperplane>> {
    if !(r > 1.0) {
        return domain(format!("vertex radius {r} is not hyperideal"));
    }
    let sides = regular_polygon(k, r)?;
    let mut out = Vec::with_capacity(2 * k);
    for (j, side) in sides.into_iter().enumerate() {
        out.push(side);
        let t = 2.0 * PI * (j + 1) as f64 / k as f64;
        out.push(Hyperplane::new(vec![t.cos(), t.sin()], 1.0 / r)?);
    }
    Ok(out)
}

/// Polygon shadow sums with vertex types read off the sides.
///
/// Consecutive sides meeting at a finite vertex have overlapping shadows,
/// so a polygon with a finite vertex and no untruncated hyperideal one gives
/// `Σ asin sech dᵢ > π`. Sides meeting beyond infinity have disjoint shadows
/// separated by a gap, so a polygon whose vertices are all ideal or
/// hyperideal, with at least one hyperideal, gives `Σ < π`. All ideal gives
/// equality. Mixed finite and hyperideal vertices carry no claim.
pub fn verify_polygon_inequality(sides: &[Hyperplane], x: &KleinPoint) -> Result<PolygonReport> {
    if x.dim() != 2 {
        return Err(Error::Input("polygons live in dimension 2".into()));
    }
    if sides.len() < 3 {
        return domain("a polygon needs at least 3 sides");
    }
    require_interior(x, sides, "polygon")?;
    let vertices = classify_vertices(sides)?;
    let mut shadows = ShadowReport::compute(x, sides)?;
    let angle_sum = 0.5 * shadows.total;
    let finite = vertices.contains(&VertexKind::Finite);
    let hyper = vertices.contains(&VertexKind::Hyperideal);
    let label = "sum of asin sech d vs π";
    match (finite, hyper) {
        (false, false) => shadows.check(label, angle_sum, Relation::Equal, PI),
        (true, false) => shadows.check(label, angle_sum, Relation::Greater, PI),
        (false, true) => shadows.check(label, angle_sum, Relation::Less, PI),
        (true, true) => shadows
            .notes
            .push("finite and hyperideal vertices together; no relation asserted".into()),
    }
    Ok(PolygonReport {
        angle_sum,
        vertices,
        shadows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonReport {
    /// `Σ asin sech dᵢ(x)`.
    pub angle_sum: f64,
    pub vertices: Vec<VertexKind>,
    pub shadows: ShadowReport,
}

/// Optional structural claims attached to a polytope.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PolytopeFlags {
    pub ideal: bool,
    pub acute_angled: bool,
    pub right_angled_ideal: bool,
    /// Two-colouring of the facets (0 or 1 per facet).
    pub facet_families: Option<Vec<u8>>,
}

/// A convex polytope as an intersection of half-spaces `uᵢ·x < cᵢ`, with
/// optional vertex and edge data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeRepr", into = "PolytopeRepr")]
pub struct PolytopeSpec {
    dim: Dim,
    facets: Vec<Hyperplane>,
    vertices: Option<Vec<Endpoint>>,
    edges: Option<Vec<[usize; 2]>>,
    flags: PolytopeFlags,
    witness: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PolytopeRepr {
    dim: Dim,
    facets: Vec<Hyperplane>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<[usize; 2]>>,
    #[serde(default)]
    flags: PolytopeFlags,
}

impl TryFrom<PolytopeRepr> for PolytopeSpec {
    type Error = Error;
    fn try_from(r: PolytopeRepr) -> Result<Self> {
        let vertices = r
            .vertices
            .map(|vs| vs.into_iter().map(endpoint_from_coords).collect::<Result<Vec<_>>>())
            .transpose()?;
        PolytopeSpec::new(r.dim, r.facets, vertices, r.edges, r.flags)
    }
}

impl From<PolytopeSpec> for PolytopeRepr {
    fn from(p: PolytopeSpec) -> Self {
        PolytopeRepr {
            dim: p.dim,
            facets: p.facets,
            vertices: p.vertices.map(|vs| vs.iter().map(|v| v.coords().to_vec()).collect()),
            edges: p.edges,
            flags: p.flags,
        }
    }
}

/// Coordinates of norm 1 (to 1e-12) are ideal points, anything inside is finite.
fn endpoint_from_coords(v: Vec<f64>) -> Result<Endpoint> {
    let r = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (r - 1.0).abs() <= 1e-12 {
        Endpoint::ideal(v)
    } else {
        Ok(Endpoint::Finite(KleinPoint::new(v)?))
    }
}

/// Find a point strictly inside all half-spaces and the unit ball by cyclic
/// projections; `None` if none turns up.
pub(crate) fn find_interior_point(facets: &[Hyperplane], n: usize) -> Option<Vec<f64>> {
    const MARGIN: f64 = 1e-9;
    let mut x = vec![0.0; n];
    for _ in 0..20_000 {
        let mut moved = false;
        for f in facets {
            let s = f.side(&x) - MARGIN;
            if s <= 0.0 {
                for (xi, ui) in x.iter_mut().zip(f.normal()) {
                    *xi += (s - MARGIN) * ui;
                }
                moved = true;
            }
        }
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r > 1.0 - 1e-6 {
            let k = (1.0 - 1e-6) / r;
            x.iter_mut().for_each(|c| *c *= k);
            moved = true;
        }
        if !moved {
            return Some(x);
        }
    }
    None
}

impl PolytopeSpec {
    pub fn new(
        dim: Dim,
        facets: Vec<Hyperplane>,
        vertices: Option<Vec<Endpoint>>,
        edges: Option<Vec<[usize; 2]>>,
        flags: PolytopeFlags,
    ) -> Result<Self> {
        let n = dim.get();
        if n < 2 {
            return domain("polytopes need dimension n >= 2");
        }
        if facets.len() < 2 {
            return domain("a polytope needs at least 2 facets");
        }
        if let Some(f) = facets.iter().find(|f| f.dim() != n) {
            return Err(Error::Input(format!("facet of dimension {} in a {n}-dimensional polytope", f.dim())));
        }
        if let Some(vs) = &vertices {
            if vs.iter().any(|v| v.dim() != n) {
                return Err(Error::Input("vertex dimension mismatch".into()));
            }
            if flags.ideal && vs.iter().any(|v| matches!(v, Endpoint::Finite(_))) {
                return domain("polytope flagged ideal has a vertex off the unit sphere");
            }
            if let Some(es) = &edges {
                if let Some(e) = es.iter().find(|e| e[0] >= vs.len() || e[1] >= vs.len() || e[0] == e[1]) {
                    return Err(Error::Input(format!("invalid edge {e:?}")));
                }
            }
        } else if edges.is_some() {
            return Err(Error::Input("edges given without vertices".into()));
        }
        if let Some(fam) = &flags.facet_families {
            if fam.len() != facets.len() || fam.iter().any(|&c| c > 1) {
                return Err(Error::Input("facet_families must assign 0 or 1 to every facet".into()));
            }
        }
        let witness = find_interior_point(&facets, n)
            .ok_or_else(|| Error::Domain("no interior point found; the half-spaces may not meet".into()))?;
        Ok(Self {
            dim,
            facets,
            vertices,
            edges,
            flags,
            witness,
        })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn facets(&self) -> &[Hyperplane] {
        &self.facets
    }

    pub fn vertices(&self) -> Option<&[Endpoint]> {
        self.vertices.as_deref()
    }

    pub fn edges(&self) -> Option<&[[usize; 2]]> {
        self.edges.as_deref()
    }

    pub fn flags(&self) -> &PolytopeFlags {
        &self.flags
    }

    /// A point strictly inside, found at construction.
    pub fn witness(&self) -> &[f64] {
        &self.witness
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.facets.iter().all(|f| f.side(x) > 0.0)
    }

    /// The regular ideal octahedron with vertices `±eᵢ`; facets `s·x < 1`
    /// for sign vectors `s`, coloured by the parity of their minus signs.
    pub fn ideal_octahedron() -> Self {
        let c = 1.0 / 3f64.sqrt();
        let mut facets = Vec::new();
        let mut families = Vec::new();
        for mask in 0..8u8 {
            let s: Vec<f64> = (0..3).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
            facets.push(Hyperplane::new(s.iter().map(|v| v * c).collect(), c).expect("unit normal"));
            families.push((mask.count_ones() % 2) as u8);
        }
        let mut vertices = Vec::new();
        for i in 0..3 {
            for sign in [1.0, -1.0] {
                let mut v = vec![0.0; 3];
                v[i] = sign;
                vertices.push(Endpoint::Ideal(v));
            }
        }
        let mut edges = Vec::new();
        for a in 0..6 {
            for b in a + 1..6 {
                if a / 2 != b / 2 {
                    edges.push([a, b]);
                }
            }
        }
        let flags = PolytopeFlags {
            ideal: true,
            acute_angled: false,
            right_angled_ideal: true,
            facet_families: Some(families),
        };
        Self::new(Dim::new(3).expect("valid dimension"), facets, Some(vertices), Some(edges), flags).expect("octahedron is valid")
    }

    /// The Klein-coordinate cube `[−ε, ε]ⁿ`, acute-angled for small `ε`.
    pub fn small_cube(eps: f64, n: Dim) -> Result<Self> {
        let k = n.get();
        if !(eps > 0.0) || eps * (k as f64).sqrt() >= 1.0 {
            return domain(format!("cube half-width {eps} must be positive with corners inside the ball"));
        }
        let mut facets = Vec::new();
        for i in 0..k {
            for sign in [1.0, -1.0] {
                let mut u = vec![0.0; k];
                u[i] = sign;
                facets.push(Hyperplane::new(u, eps)?);
            }
        }
        let mut vertices = Vec::new();
        for mask in 0..1usize << k {
            let v: Vec<f64> = (0..k).map(|i| if mask >> i & 1 == 1 { -eps } else { eps }).collect();
            vertices.push(Endpoint::Finite(KleinPoint::new(v)?));
        }
        let mut edges = Vec::new();
        for a in 0..vertices.len() {
            for i in 0..k {
                let b = a ^ (1 << i);
                if a < b {
                    edges.push([a, b]);
                }
            }
        }
        let flags = PolytopeFlags {
            acute_angled: true,
            ..PolytopeFlags::default()
        };
        Self::new(n, facets, Some(vertices), Some(edges), flags)
    }
}

/// Facet shadow sums of a polytope without hyperideal vertices.
///
/// Always checks `Σ > ω_{n−1}` (the facets cover the visual sphere and
/// overlap). Acute-angled polytopes add `Σ ≤ n·ω_{n−1}`; right-angled ideal
/// ones with a facet colouring add `Σ < 2ω` and `< ω` for each colour class.
pub fn verify_polytope(p: &PolytopeSpec, x: &KleinPoint) -> Result<ShadowReport> {
    if x.dim() != p.dim.get() {
        return Err(Error::Input("point and polytope dimensions differ".into()));
    }
    for (i, f) in p.facets.iter().enumerate() {
        if f.side(x.coords()) <= 0.0 {
            return domain(format!("point is not inside the polytope (facet {i})"));
        }
    }
    let mut report = match ShadowReport::compute(x, &p.facets) {
        Err(Error::Degenerate(m)) => return domain(m),
        other => other?,
    };
    let (total, omega, n) = (report.total, report.reference, p.dim.get());
    report.check("facet shadow sum > ω", total, Relation::Greater, omega);
    if n == 3 {
        report.check("Σ 1/(e^{2d}+1) > 1", report.normalized, Relation::Greater, 1.0);
    }
    if p.flags.acute_angled {
        report.check("acute-angled: facet shadow sum <= n·ω", total, Relation::LessEq, n as f64 * omega);
    }
    if p.flags.right_angled_ideal {
        if let Some(fam) = &p.flags.facet_families {
            report.check("right-angled ideal: facet shadow sum < 2ω", total, Relation::Less, 2.0 * omega);
            for colour in 0..2u8 {
                let idx: Vec<usize> = (0..fam.len()).filter(|&i| fam[i] == colour).collect();
                let sub = report.partial_total(&idx);
                report.check(&format!("family {colour} shadow sum < ω"), sub, Relation::Less, omega);
            }
        }
    }
    Ok(report)
}

/// One edge's contribution to the skeleton estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeTerm {
    pub edge: [usize; 2],
    /// Visual angle subtended by the edge itself.
    pub visual_angle: f64,
    /// Distance to the full geodesic line carrying the edge.
    pub line_distance: f64,
    /// `2·asin sech(line_distance)`.
    pub line_shadow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonReport {
    pub point: Vec<f64>,
    pub edges: Vec<EdgeTerm>,
    /// Total visual length of the projected 1-skeleton.
    pub mu1: f64,
    /// `Σ_edges 2·asin sech d`.
    pub line_shadow_total: f64,
    /// `2ω₁ = 4π`.
    pub lower_bound: f64,
    pub checks: Vec<BoundCheck>,
    pub verdict: Verdict,
}

impl SkeletonReport {
    pub fn tightened(mut self, tolerance: f64) -> Result<Self> {
        self.checks = retighten(&self.checks, tolerance)?;
        self.verdict = Verdict::combine(self.checks.iter().map(|c| c.verdict));
        Ok(self)
    }
}

/// `4π ≤ μ₁ ≤ Σ_edges 2·asin sech d(x, edge line)` for a 3-polytope, where
/// `μ₁` adds up visual edge lengths with no multiplicity correction.
pub fn skeleton_estimate(p: &PolytopeSpec, x: &KleinPoint) -> Result<SkeletonReport> {
    if p.dim.get() != 3 || x.dim() != 3 {
        return Err(Error::Input("skeleton estimates are implemented for dimension 3 only".into()));
    }
    let (vertices, edges) = match (p.vertices(), p.edges()) {
        (Some(v), Some(e)) if !e.is_empty() => (v, e),
        _ => return Err(Error::Input("skeleton estimate needs vertices and edges".into())),
    };
    if !p.contains(x.coords()) {
        return domain("point is not inside the polytope");
    }
    let mut terms = Vec::with_capacity(edges.len());
    for &[a, b] in edges {
        let seg = GeodesicSegment::new(vertices[a].clone(), vertices[b].clone())?;
        let d = dist_point_segment(x, &seg)?;
        if d < 1e-12 {
            return Err(Error::Degenerate(format!("viewpoint lies on the line of edge {a}-{b}")));
        }
        terms.push(EdgeTerm {
            edge: [a, b],
            visual_angle: visual_angle_between(x, &vertices[a], &vertices[b])?,
            line_distance: d,
            line_shadow: 2.0 * visual_half_angle(d),
        });
    }
    let mu1 = compensated_sum(terms.iter().map(|t| t.visual_angle));
    let rhs = compensated_sum(terms.iter().map(|t| t.line_shadow));
    let lower = 2.0 * sphere_area(1)?;
    let checks = vec![
        BoundCheck::new("μ₁ >= 2ω₁", mu1, Relation::GreaterEq, lower, DEFAULT_TOLERANCE),
        BoundCheck::new("μ₁ <= Σ 2 asin sech d", mu1, Relation::LessEq, rhs, DEFAULT_TOLERANCE),
    ];
    let verdict = Verdict::combine(checks.iter().map(|c| c.verdict));
    Ok(SkeletonReport {
        point: x.coords().to_vec(),
        edges: terms,
        mu1,
        line_shadow_total: rhs,
        lower_bound: lower,
        checks,
        verdict,
    })
}

/// Largest inradius a polytope with `faces` facets can have in `ℍ^n`: the
/// root of `N·V_{n−1}(asin sech r) = ω_{n−1}`, by bisection.
pub fn inradius_upper_bound(faces: u64, n: Dim) -> Result<f64> {
    if faces < 2 {
        return domain("at least 2 facets are needed to bound a region");
    }
    if n.get() < 2 {
        return domain("dimension must be >= 2");
    }
    let omega = visual_sphere_area(n)?;
    let big_n = faces as f64;
    let f = |r: f64| big_n * cap_volume(r, n).unwrap_or(0.0) - omega;
    if f(0.0) <= 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::NonConvergence("inradius bound bracket exceeded 1e4".into()));
        }
    }
    Ok(bisect(f, 0.0, hi, 1e-13))
}

/// Closed form `½ log(N − 1)` of the bound in dimension 3.
pub fn inradius_upper_bound_3d(faces: u64) -> Result<f64> {
    if faces < 2 {
        return domain("at least 2 facets are needed to bound a region");
    }
    Ok(0.5 * ((faces - 1) as f64).ln())
}

/// Inradius bound for a 3-polytope with `vertices` vertices, from the
/// skeleton estimate: `E` edges, `E ≤ V(V−1)/2`, and
/// `4π ≤ μ₁ ≤ E·2 asin sech r`.
pub fn inradius_upper_bound_vertices(vertices: u64) -> Result<f64> {
    if vertices < 4 {
        return domain("a 3-polytope has at least 4 vertices");
    }
    let edges = (vertices as f64) * (vertices as f64 - 1.0) / 2.0;
    let half_angle = 2.0 * PI / edges;
    if half_angle >= PI / 2.0 {
        return Ok(0.0);
    }
    // asin sech r = θ  ⇔  r = acosh(1/sin θ).
    Ok((1.0 / half_angle.sin()).acosh())
}

/// Smallest facet count whose inradius bound reaches `r`.
pub fn min_faces_for_inradius(r: f64, n: Dim) -> Result<u64> {
    if !(r > 0.0) || !r.is_finite() {
        return domain(format!("radius {r} must be positive"));
    }
    let reaches = |k: u64| inradius_upper_bound(k, n).map(|b| b >= r);
    let mut hi = 3u64;
    while !reaches(hi)? {
        hi = hi
            .checked_mul(2)
            .filter(|&h| h <= 1 << 53)
            .ok_or_else(|| Error::NonConvergence(format!("facet count for radius {r} exceeds 2^53")))?;
    }
    let mut lo = 2u64;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if reaches(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
