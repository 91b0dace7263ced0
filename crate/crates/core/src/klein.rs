//! Klein-model points and hyperplanes with their hyperboloid (Lorentz) lifts.
//!
//! A point `x` of the open unit ball lifts to the unit timelike vector
//! `X = (1, x)/√(1−|x|²)`. An oriented hyperplane `{u·x = c}` with unit `u`
//! lifts to the unit spacelike normal `e = (c, u)/√(1−c²)`, and its interior
//! side is `{u·x < c}`. Distances are evaluated on the lifts with the bilinear
//! form `⟨a,b⟩ = −a₀b₀ + Σ aᵢbᵢ`; the Klein-coordinate formulas serve as
//! cross-checks in the tests.
//!
//! Signed point-to-plane distance is positive on the interior side and
//! negative beyond the plane (on the polar's side when `c > 0`).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::search::golden_section_min;

/// Points with `1 − |x|²` below this are rejected.
pub const BOUNDARY_GUARD: f64 = 1e-14;

const UNIT_TOL: f64 = 1e-12;

/// Lorentzian inner product `−a₀b₀ + Σ aᵢbᵢ`.
pub fn minkowski(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    -a[0] * b[0] + a[1..].iter().zip(&b[1..]).map(|(x, y)| x * y).sum::<f64>()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Hyperbolic distance between two unit timelike vectors, in the form
/// `2 asinh(|X−Y|/2)`, which keeps full precision for nearby points.
pub(crate) fn lorentz_distance(x: &[f64], y: &[f64]) -> f64 {
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let q = minkowski(&diff, &diff).max(0.0);
    2.0 * (0.5 * q.sqrt()).asinh()
}

fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Input(format!("dimension mismatch: {a} vs {b}")));
    }
    Ok(())
}

/// A point of the open unit ball, with its cached hyperboloid lift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub struct KleinPoint {
    coords: Vec<f64>,
    lift: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    coords: Vec<f64>,
}

impl TryFrom<PointRepr> for KleinPoint {
    type Error = Error;
    fn try_from(r: PointRepr) -> Result<Self> {
        KleinPoint::new(r.coords)
    }
}

impl From<KleinPoint> for PointRepr {
    fn from(p: KleinPoint) -> Self {
        PointRepr { coords: p.coords }
    }
}

impl KleinPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Input("empty coordinate vector".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return domain("non-finite coordinate");
        }
        let gap = 1.0 - dot(&coords, &coords);
        if gap < BOUNDARY_GUARD {
            return domain(format!(
                "point with |x|² = {} is not strictly inside the unit ball",
                1.0 - gap
            ));
        }
        let s = 1.0 / gap.sqrt();
        let mut lift = Vec::with_capacity(coords.len() + 1);
        lift.push(s);
        lift.extend(coords.iter().map(|c| c * s));
        Ok(Self { coords, lift })
    }

    pub fn origin(n: usize) -> Self {
        Self::new(vec![0.0; n]).expect("origin is interior")
    }

    /// Build from a future-pointing timelike vector (normalized here).
    pub fn from_lorentz(v: &[f64]) -> Result<Self> {
        let q = -minkowski(v, v);
        if !(q > 0.0) || v[0] <= 0.0 {
            return domain("vector is not future timelike");
        }
        let s = q.sqrt();
        let lift: Vec<f64> = v.iter().map(|c| c / s).collect();
        let coords: Vec<f64> = lift[1..].iter().map(|c| c / lift[0]).collect();
        let gap = 1.0 / (lift[0] * lift[0]);
        if gap < BOUNDARY_GUARD {
            return domain("point too close to the ideal boundary");
        }
        Ok(Self { coords, lift })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn lift(&self) -> &[f64] {
        &self.lift
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Oriented hyperplane `{x : u·x = c}`; interior side `u·x < c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlaneRepr", into = "PlaneRepr")]
pub struct Hyperplane {
    normal: Vec<f64>,
    offset: f64,
    lorentz: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PlaneRepr {
    normal: Vec<f64>,
    offset: f64,
}

impl TryFrom<PlaneRepr> for Hyperplane {
    type Error = Error;
    fn try_from(r: PlaneRepr) -> Result<Self> {
        Hyperplane::new(r.normal, r.offset)
    }
}

impl From<Hyperplane> for PlaneRepr {
    fn from(h: Hyperplane) -> Self {
        PlaneRepr {
            normal: h.normal,
            offset: h.offset,
        }
    }
}

/// Unit spacelike normal of a hyperplane in the hyperboloid model.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzNormal(Vec<f64>);

impl LorentzNormal {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl Hyperplane {
    /// `normal` must be a unit vector (to 1e-12) and `|offset| < 1`.
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let len = norm(&normal);
        if normal.is_empty() || !len.is_finite() || (len - 1.0).abs() > UNIT_TOL {
            return domain(format!("hyperplane normal has length {len}, expected 1"));
        }
        let normal: Vec<f64> = normal.iter().map(|c| c / len).collect();
        Self::from_unit(normal, offset)
    }

    /// The plane `{a·x = b}` for any nonzero `a`, interior side `a·x < b`.
    pub fn from_equation(a: &[f64], b: f64) -> Result<Self> {
        let len = norm(a);
        if !(len > 0.0) || !len.is_finite() {
            return domain("hyperplane normal must be nonzero");
        }
        Self::from_unit(a.iter().map(|c| c / len).collect(), b / len)
    }

    /// The polar hyperplane `{p·x = 1}` of a point with `|p| > 1`.
    pub fn from_polar(p: &[f64]) -> Result<Self> {
        if dot(p, p) <= 1.0 {
            return domain("polar point must lie outside the closed unit ball");
        }
        Self::from_equation(p, 1.0)
    }

    /// Rebuild from a spacelike normal (normalized here).
    pub fn from_lorentz(e: &[f64]) -> Result<Self> {
        let q = minkowski(e, e);
        if !(q > 0.0) {
            return domain("vector is not spacelike");
        }
        let s = q.sqrt();
        Ok(Self::from_unit_lorentz(e.iter().map(|c| c / s).collect()))
    }

    /// Trust `e` to be a unit spacelike vector. Far from the origin the
    /// Klein offset rounds towards ±1 while the Lorentz normal stays exact,
    /// so images under isometries are kept in this form.
    pub(crate) fn from_unit_lorentz(lorentz: Vec<f64>) -> Self {
        let spatial = norm(&lorentz[1..]);
        let normal: Vec<f64> = lorentz[1..].iter().map(|c| c / spatial).collect();
        let offset = lorentz[0] / spatial;
        Self {
            normal,
            offset,
            lorentz,
        }
    }

    fn from_unit(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if !(offset.abs() < 1.0) {
            return domain(format!("hyperplane offset {offset} does not meet the open ball"));
        }
        let s = 1.0 / (1.0 - offset * offset).sqrt();
        let mut lorentz = Vec::with_capacity(normal.len() + 1);
        lorentz.push(offset * s);
        lorentz.extend(normal.iter().map(|c| c * s));
        Ok(Self {
            normal,
            offset,
            lorentz,
        })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn lorentz_normal(&self) -> LorentzNormal {
        LorentzNormal(self.lorentz.clone())
    }

    pub(crate) fn lorentz(&self) -> &[f64] {
        &self.lorentz
    }

    /// The polar point `u/c`; `None` for planes through the origin.
    pub fn polar(&self) -> Option<Vec<f64>> {
        (self.offset != 0.0).then(|| self.normal.iter().map(|u| u / self.offset).collect())
    }

    /// Same plane, opposite interior side.
    pub fn flipped(&self) -> Self {
        Self {
            normal: self.normal.iter().map(|u| -u).collect(),
            offset: -self.offset,
            lorentz: self.lorentz.iter().map(|e| -e).collect(),
        }
    }

    /// `c − u·x`, positive on the interior side.
    pub fn side(&self, x: &[f64]) -> f64 {
        self.offset - dot(&self.normal, x)
    }
}

/// Hyperbolic distance between interior points.
pub fn dist_points(p: &KleinPoint, q: &KleinPoint) -> Result<f64> {
    check_same_dim(p.dim(), q.dim())?;
    Ok(lorentz_distance(p.lift(), q.lift()))
}

/// Signed distance from `q` to `plane`: positive on the interior side.
pub fn dist_point_plane(q: &KleinPoint, plane: &Hyperplane) -> Result<f64> {
    check_same_dim(q.dim(), plane.dim())?;
    Ok((-minkowski(q.lift(), plane.lorentz())).asinh())
}

/// How two hyperplanes sit relative to each other.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "relation", rename_all = "snake_case")]
pub enum PlaneRelation {
    /// Ultraparallel, with a common perpendicular of this length.
    Disjoint { distance: f64 },
    /// Meeting only at a point of the ideal boundary.
    Asymptotic,
    /// Crossing inside the ball; `angle` is between the normals, in `[0, π]`.
    Intersecting { angle: f64 },
    Coincident,
}

impl PlaneRelation {
    pub fn distance(&self) -> f64 {
        match self {
            PlaneRelation::Disjoint { distance } => *distance,
            _ => 0.0,
        }
    }

    pub fn is_disjoint(&self) -> bool {
        matches!(self, PlaneRelation::Disjoint { .. })
    }
}

/// `|⟨e₁,e₂⟩| > 1` means disjoint at distance `acosh|⟨e₁,e₂⟩|`. In Klein
/// terms `⟨e₁,e₂⟩ = (u₁·u₂ − c₁c₂)/(√(1−c₁²)√(1−c₂²))`.
pub fn dist_planes(a: &Hyperplane, b: &Hyperplane) -> Result<PlaneRelation> {
    check_same_dim(a.dim(), b.dim())?;
    let ea = a.lorentz();
    let eb = b.lorentz();
    let same = ea.iter().zip(eb).all(|(x, y)| (x - y).abs() < 1e-12);
    let opposite = ea.iter().zip(eb).all(|(x, y)| (x + y).abs() < 1e-12);
    if same || opposite {
        return Ok(PlaneRelation::Coincident);
    }
    let g = minkowski(ea, eb);
    let ag = g.abs();
    Ok(if ag > 1.0 + 1e-12 {
        PlaneRelation::Disjoint { distance: ag.acosh() }
    } else if ag >= 1.0 - 1e-12 {
        PlaneRelation::Asymptotic
    } else {
        PlaneRelation::Intersecting { angle: g.acos() }
    })
}

/// `coth(d/2) = √((cosh d + 1)/(cosh d − 1))`: the polar distance for a
/// symmetric pair of planes at distance `d`.
pub fn symmetric_polar_parameter(d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return domain(format!("plane distance {d} must be positive"));
    }
    Ok(1.0 / (0.5 * d).tanh())
}

/// Two planes at distance `d`, polars at `±t·e₁`, each facing the origin.
pub fn planes_at_distance(d: f64, n: usize) -> Result<(Hyperplane, Hyperplane)> {
    let t = symmetric_polar_parameter(d)?;
    if n < 1 {
        return domain("dimension must be >= 1");
    }
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let c = 1.0 / t;
    let first = Hyperplane::from_unit(e1.clone(), c)?;
    let second = Hyperplane::from_unit(e1.iter().map(|v| -v).collect(), c)?;
    Ok((first, second))
}

/// Angle of parallelism `asin(sech d) = acos(tanh d) = 2·atan(e^{−|d|})`.
pub fn visual_half_angle(d: f64) -> f64 {
    2.0 * (-d.abs()).exp().atan()
}

/// Hyperbolic radius of the orthogonal projection of one plane onto another
/// at distance `d`: `acosh(coth d) = −log tanh(d/2)`.
pub fn projection_radius(d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return domain(format!("plane distance {d} must be positive"));
    }
    Ok(-(0.5 * d).tanh().ln())
}

/// Reflection in a hyperplane: `X ↦ X − 2⟨X,e⟩e` on the hyperboloid.
pub trait Reflect: Sized {
    fn reflected(&self, mirror: &Hyperplane) -> Self;
}

pub(crate) fn reflect_vector(v: &[f64], e: &[f64]) -> Vec<f64> {
    let k = 2.0 * minkowski(v, e);
    v.iter().zip(e).map(|(a, b)| a - k * b).collect()
}

impl Reflect for KleinPoint {
    fn reflected(&self, mirror: &Hyperplane) -> Self {
        let v = reflect_vector(self.lift(), mirror.lorentz());
        KleinPoint::from_lorentz(&v).expect("reflection of an interior point stays interior")
    }
}

impl Reflect for Hyperplane {
    fn reflected(&self, mirror: &Hyperplane) -> Self {
        Hyperplane::from_unit_lorentz(reflect_vector(self.lorentz(), mirror.lorentz()))
    }
}

/// Convenience wrapper over [`Reflect`].
pub fn reflect<T: Reflect>(x: &T, mirror: &Hyperplane) -> T {
    x.reflected(mirror)
}

/// Endpoint of a geodesic: an interior point or a point of the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Endpoint {
    Finite(KleinPoint),
    Ideal(Vec<f64>),
}

impl Endpoint {
    pub fn ideal(v: Vec<f64>) -> Result<Self> {
        let len = norm(&v);
        if (len - 1.0).abs() > UNIT_TOL {
            return domain(format!("ideal point has norm {len}, expected 1"));
        }
        Ok(Endpoint::Ideal(v.iter().map(|c| c / len).collect()))
    }

    /// Klein coordinates, which for ideal points lie on the unit sphere.
    pub fn coords(&self) -> &[f64] {
        match self {
            Endpoint::Finite(p) => p.coords(),
            Endpoint::Ideal(v) => v,
        }
    }

    pub fn dim(&self) -> usize {
        self.coords().len()
    }

    /// Unit timelike lift, or the lightlike `(1, ξ)` for ideal points.
    pub(crate) fn lorentz(&self) -> Vec<f64> {
        match self {
            Endpoint::Finite(p) => p.lift().to_vec(),
            Endpoint::Ideal(v) => std::iter::once(1.0).chain(v.iter().copied()).collect(),
        }
    }
}

impl From<KleinPoint> for Endpoint {
    fn from(p: KleinPoint) -> Self {
        Endpoint::Finite(p)
    }
}

/// Unit tangent at `x` of the geodesic from `x` towards `target`.
fn unit_tangent_towards(x: &[f64], target: &[f64]) -> Option<Vec<f64>> {
    let g = minkowski(target, x);
    let t: Vec<f64> = target.iter().zip(x).map(|(a, b)| a + g * b).collect();
    let q = minkowski(&t, &t);
    if !(q > 1e-28) {
        return None;
    }
    let s = q.sqrt();
    Some(t.iter().map(|c| c / s).collect())
}

/// Angle at `x` between the geodesics towards `a` and `b`.
pub fn visual_angle_between(x: &KleinPoint, a: &Endpoint, b: &Endpoint) -> Result<f64> {
    check_same_dim(x.dim(), a.dim())?;
    check_same_dim(x.dim(), b.dim())?;
    let ta = unit_tangent_towards(x.lift(), &a.lorentz())
        .ok_or_else(|| Error::Degenerate("first endpoint coincides with the viewpoint".into()))?;
    let tb = unit_tangent_towards(x.lift(), &b.lorentz())
        .ok_or_else(|| Error::Degenerate("second endpoint coincides with the viewpoint".into()))?;
    let diff: Vec<f64> = ta.iter().zip(&tb).map(|(p, q)| p - q).collect();
    let sum: Vec<f64> = ta.iter().zip(&tb).map(|(p, q)| p + q).collect();
    let dn = minkowski(&diff, &diff).max(0.0).sqrt();
    let sn = minkowski(&sum, &sum).max(0.0).sqrt();
    Ok(2.0 * dn.atan2(sn))
}

/// A geodesic through two distinct endpoints; distance computations use the
/// full line through them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSegment {
    a: Endpoint,
    b: Endpoint,
}

impl GeodesicSegment {
    pub fn new(a: Endpoint, b: Endpoint) -> Result<Self> {
        check_same_dim(a.dim(), b.dim())?;
        let gap: f64 = a
            .coords()
            .iter()
            .zip(b.coords())
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt();
        if gap < 1e-14 {
            return Err(Error::Degenerate("segment endpoints coincide".into()));
        }
        Ok(Self { a, b })
    }

    pub fn start(&self) -> &Endpoint {
        &self.a
    }

    pub fn end(&self) -> &Endpoint {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// Arclength parametrization `t ↦ cosh t·P + sinh t·V` of the full line.
    fn frame(&self) -> (Vec<f64>, Vec<f64>) {
        let la = self.a.lorentz();
        let lb = self.b.lorentz();
        let w: Vec<f64> = la.iter().zip(&lb).map(|(p, q)| p + q).collect();
        let s = (-minkowski(&w, &w)).sqrt();
        let base: Vec<f64> = w.iter().map(|c| c / s).collect();
        let v: Vec<f64> = lb.iter().zip(&la).map(|(p, q)| p - q).collect();
        let g = minkowski(&v, &base);
        let v: Vec<f64> = v.iter().zip(&base).map(|(p, q)| p + g * q).collect();
        let s = minkowski(&v, &v).sqrt();
        (base, v.iter().map(|c| c / s).collect())
    }
}

/// Distance from `x` to the full geodesic line carrying `seg`, by
/// golden-section search over arclength along the line.
pub fn dist_point_segment(x: &KleinPoint, seg: &GeodesicSegment) -> Result<f64> {
    check_same_dim(x.dim(), seg.dim())?;
    let (base, dir) = seg.frame();
    let xl = x.lift();
    let along = |t: f64| -> Vec<f64> {
        let (c, s) = (t.cosh(), t.sinh());
        base.iter().zip(&dir).map(|(p, v)| c * p + s * v).collect()
    };
    // −⟨X, γ(t)⟩ = a cosh t + b sinh t with a² − b² ≥ 1, so |t*| ≤ asinh|b|.
    let b = -minkowski(xl, &dir);
    let reach = b.abs().asinh() + 1.0;
    let (t, _) = golden_section_min(|t| -minkowski(xl, &along(t)), -reach, reach, 1e-12);
    Ok(lorentz_distance(xl, &along(t)))
}

/// Exact visual half-angle of a ball of radius `rho` whose centre is at
/// distance `dist > rho`: `asin(sinh ρ / sinh D)`.
pub fn ball_visual_half_angle(rho: f64, dist: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return domain(format!("ball radius {rho} must be positive"));
    }
    if !(dist > rho) {
        return domain(format!("viewer at distance {dist} is inside the ball of radius {rho}"));
    }
    // sinh ρ / sinh D without overflowing sinh D.
    let ratio = rho.sinh() * 2.0 * (-dist).exp() / (-(-2.0 * dist).exp_m1());
    Ok(ratio.min(1.0).asin())
}
