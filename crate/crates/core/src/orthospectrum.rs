//! Boundary lifts of a reflection orbifold and the shadow series over them.
//!
//! Reflections in `m` pairwise disjoint mirrors generate a free product of
//! `m` copies of `ℤ/2`; the complement `D` of the mirrors' outer half-spaces
//! is a fundamental domain. A reduced word `j₁ … j_L` (consecutive letters
//! distinct) applied to a base plane `B` gives the image
//! `r_{j₁} ∘ … ∘ r_{j_L}(B)`, and every image lies beyond mirror `j₁`.
//!
//! Images of the mirrors themselves are nested behind one another, so their
//! shadows overlap. The planes whose shadows tile the visual circle are the
//! lifts of the boundary of the convex core: in the plane, with `m ≥ 3`
//! mirrors in cyclic order around the disk, the common perpendiculars of
//! consecutive mirrors cut `D` down to a right-angled `2m`-gon, and the
//! orbit of those perpendiculars is the boundary of the convex hull of the
//! limit set. Seen from any point of the `2m`-gon their shadows are disjoint
//! and miss only the limit set, which has measure zero, so the caps add up
//! to `2π`.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::klein::{dist_planes, dist_point_plane, minkowski, Hyperplane, KleinPoint, Reflect};
use crate::report::{BoundCheck, Relation, SeriesReport, DEFAULT_TOLERANCE};
use crate::shadows::{cap_volume, find_interior_point, visual_sphere_area};
use crate::specfun::Dim;
use crate::sum::{compensated_sum, NeumaierSum};

/// A level contributing less than this ends an automatic sweep.
pub const LEVEL_EPSILON: f64 = 1e-10;

/// Agreement required between the converged series and `ω_{n−1}`.
pub const SERIES_TOLERANCE: f64 = 1e-6;

/// Hard cap on the number of lifts held at once.
pub const MAX_RECORDS: usize = 5_000_000;

const MAX_AUTO_DEPTH: usize = 400;

/// Quantization step for the duplicate check on Lorentz normals.
const DEDUP_STEP: f64 = 1e-9;

/// Pairwise disjoint mirrors, each oriented with the fundamental domain on
/// its interior side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MirrorRepr", into = "MirrorRepr")]
pub struct MirrorSystem {
    dim: Dim,
    mirrors: Vec<Hyperplane>,
}

#[derive(Serialize, Deserialize)]
struct MirrorRepr {
    dim: Dim,
    mirrors: Vec<Hyperplane>,
}

impl TryFrom<MirrorRepr> for MirrorSystem {
    type Error = Error;
    fn try_from(r: MirrorRepr) -> Result<Self> {
        MirrorSystem::new(r.dim, r.mirrors)
    }
}

impl From<MirrorSystem> for MirrorRepr {
    fn from(s: MirrorSystem) -> Self {
        MirrorRepr {
            dim: s.dim,
            mirrors: s.mirrors,
        }
    }
}

impl MirrorSystem {
    pub fn new(dim: Dim, mirrors: Vec<Hyperplane>) -> Result<Self> {
        if mirrors.len() < 2 {
            return domain("a mirror system needs at least 2 mirrors");
        }
        if mirrors.iter().any(|p| p.dim() != dim.get()) {
            return Err(Error::Input("mirror dimension mismatch".into()));
        }
        for i in 0..mirrors.len() {
            for j in i + 1..mirrors.len() {
                let rel = dist_planes(&mirrors[i], &mirrors[j])?;
                if !(rel.is_disjoint() && rel.distance() > 1e-10) {
                    return domain(format!("mirrors {i} and {j} are not disjoint ({rel:?})"));
                }
            }
        }
        if find_interior_point(&mirrors, dim.get()).is_none() {
            return domain("the mirrors' interior half-spaces have empty intersection");
        }
        Ok(Self { dim, mirrors })
    }

    /// Two mirrors at distance `d`, symmetric about the origin.
    pub fn two_mirrors(d: f64, n: Dim) -> Result<Self> {
        let (a, b) = crate::klein::planes_at_distance(d, n.get())?;
        Self::new(n, vec![a, b])
    }

    /// `m` lines in the disk with normals at angles `2πk/m` and common offset
    /// `c`; pairwise disjoint when `c > cos(π/m)`.
    pub fn regular_mirrors(m: usize, c: f64) -> Result<Self> {
        let mirrors = (0..m)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / m as f64;
                Hyperplane::new(vec![t.cos(), t.sin()], c)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(Dim::new(2)?, mirrors)
    }

    /// Three mirrors at 120° spacing; disjoint for `c > 1/2`.
    pub fn three_mirrors(c: f64) -> Result<Self> {
        Self::regular_mirrors(3, c)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn mirrors(&self) -> &[Hyperplane] {
        &self.mirrors
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.mirrors.iter().all(|p| p.side(x) > 0.0)
    }

    /// Boundary of the convex core inside the fundamental domain: for each
    /// pair of cyclically consecutive mirrors, their common perpendicular,
    /// oriented towards the core. Returns the lines and the mirror pairs.
    pub fn core_boundary(&self) -> Result<Vec<(Hyperplane, [usize; 2])>> {
        if self.dim.get() != 2 {
            return Err(Error::Input(
                "the convex core boundary is built for mirror systems in the plane only".into(),
            ));
        }
        let m = self.mirrors.len();
        if m < 3 {
            return domain(format!(
                "{m} mirrors leave a convex core with empty interior, so there is no geodesic boundary to lift"
            ));
        }
        let mut order: Vec<usize> = (0..m).collect();
        let angle = |i: usize| {
            let u = self.mirrors[i].normal();
            u[1].atan2(u[0])
        };
        order.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
        let mut out = Vec::with_capacity(m);
        for k in 0..m {
            let (i, j) = (order[k], order[(k + 1) % m]);
            let (a, b) = (self.mirrors[i].lorentz(), self.mirrors[j].lorentz());
            // Lorentz cross product: orthogonal to both normals.
            let p = [
                -(a[1] * b[2] - a[2] * b[1]),
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ];
            debug_assert!(minkowski(&p, a).abs() < 1e-9 && minkowski(&p, b).abs() < 1e-9);
            let mut line = Hyperplane::from_lorentz(&p)?;
            // Any third mirror is a non-adjacent side of the core polygon,
            // so it lies wholly on the core side of this line.
            let k = order[(k + 2) % m];
            let foot: Vec<f64> = self.mirrors[k].normal().iter().map(|u| u * self.mirrors[k].offset()).collect();
            if line.side(&foot) < 0.0 {
                line = line.flipped();
            }
            out.push((line, [i, j]));
        }
        Ok(out)
    }
}

/// One image plane. `word = [j₁, …, j_L]` are the reflections applied to the
/// base plane, outermost first; the plane is `r_{j₁} ∘ … ∘ r_{j_L}(B)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftRecord {
    pub word: Vec<usize>,
    /// Index of the base plane (a mirror or a core boundary line).
    pub base: usize,
    pub plane: Hyperplane,
    pub distance: f64,
    pub term: f64,
}

impl LiftRecord {
    /// Number of reflections applied.
    pub fn level(&self) -> usize {
        self.word.len()
    }
}

type Key = Vec<i128>;

/// Grid of quantized Lorentz normals; a plane is a duplicate when a
/// neighbouring cell holds one within the step in every coordinate.
#[derive(Default)]
struct Seen {
    cells: HashMap<Key, Vec<Vec<f64>>>,
}

impl Seen {
    fn insert(&mut self, plane: &Hyperplane) -> bool {
        let normal = plane.lorentz_normal().as_slice().to_vec();
        let key: Key = normal.iter().map(|c| (c / DEDUP_STEP).round() as i128).collect();
        let dims = key.len();
        let mut offsets = vec![-1i128; dims];
        loop {
            let probe: Key = key.iter().zip(&offsets).map(|(k, o)| k + o).collect();
            if let Some(list) = self.cells.get(&probe) {
                let dup = list
                    .iter()
                    .any(|other| other.iter().zip(&normal).all(|(a, b)| (a - b).abs() <= DEDUP_STEP));
                if dup {
                    return false;
                }
            }
            // Odometer over {−1, 0, 1}^dims.
            let mut i = 0;
            while i < dims {
                offsets[i] += 1;
                if offsets[i] <= 1 {
                    break;
                }
                offsets[i] = -1;
                i += 1;
            }
            if i == dims {
                break;
            }
        }
        self.cells.entry(key).or_default().push(normal);
        true
    }
}

/// Base planes and, for each, the reflections that fix it (and so may not
/// be the innermost letter of a word).
struct Orbit<'a> {
    sys: &'a MirrorSystem,
    bases: Vec<Hyperplane>,
    stabilizers: Vec<Vec<usize>>,
}

impl<'a> Orbit<'a> {
    fn mirrors(sys: &'a MirrorSystem) -> Self {
        Self {
            sys,
            bases: sys.mirrors.clone(),
            stabilizers: (0..sys.mirrors.len()).map(|i| vec![i]).collect(),
        }
    }

    fn core_boundary(sys: &'a MirrorSystem) -> Result<Self> {
        let lines = sys.core_boundary()?;
        Ok(Self {
            sys,
            bases: lines.iter().map(|(l, _)| l.clone()).collect(),
            stabilizers: lines.iter().map(|(_, p)| p.to_vec()).collect(),
        })
    }
}

fn require_fundamental(sys: &MirrorSystem, x: &KleinPoint) -> Result<()> {
    if x.dim() != sys.dim.get() {
        return Err(Error::Input("point and mirror system dimensions differ".into()));
    }
    if !sys.contains(x.coords()) {
        return domain("basepoint is not strictly inside the fundamental domain");
    }
    Ok(())
}

fn record(word: Vec<usize>, base: usize, plane: Hyperplane, x: &KleinPoint, n: Dim) -> Result<LiftRecord> {
    let distance = dist_point_plane(x, &plane)?.abs();
    let term = cap_volume(distance, n)?;
    Ok(LiftRecord {
        word,
        base,
        plane,
        distance,
        term,
    })
}

/// Breadth-first enumeration, one level at a time.
struct LiftWalker<'a> {
    orbit: Orbit<'a>,
    x: &'a KleinPoint,
    frontier: Vec<LiftRecord>,
    seen: Seen,
}

impl<'a> LiftWalker<'a> {
    fn new(orbit: Orbit<'a>, x: &'a KleinPoint) -> Result<Self> {
        let mut seen = Seen::default();
        let mut frontier = Vec::new();
        for (i, b) in orbit.bases.iter().enumerate() {
            if seen.insert(b) {
                frontier.push(record(Vec::new(), i, b.clone(), x, orbit.sys.dim)?);
            }
        }
        Ok(Self {
            orbit,
            x,
            frontier,
            seen,
        })
    }

    fn allowed(&self, parent: &LiftRecord, j: usize) -> bool {
        match parent.word.first() {
            Some(&first) => j != first,
            None => !self.orbit.stabilizers[parent.base].contains(&j),
        }
    }

    /// Replace the frontier by the next level, sorted by (base, word).
    fn advance(&mut self) -> Result<()> {
        let m = self.orbit.sys.mirrors.len();
        let next_count: usize = self.frontier.len() * (m - 1);
        if next_count > MAX_RECORDS {
            return Err(Error::Refused(format!("a lift level would exceed {MAX_RECORDS} records")));
        }
        let (mirrors, x, dim) = (&self.orbit.sys.mirrors, self.x, self.orbit.sys.dim);
        let this = &*self;
        let children: Vec<Result<Vec<LiftRecord>>> = self
            .frontier
            .par_iter()
            .map(|parent| {
                (0..m)
                    .filter(|&j| this.allowed(parent, j))
                    .map(|j| {
                        let plane = parent.plane.reflected(&mirrors[j]);
                        let mut word = Vec::with_capacity(parent.word.len() + 1);
                        word.push(j);
                        word.extend_from_slice(&parent.word);
                        record(word, parent.base, plane, x, dim)
                    })
                    .collect()
            })
            .collect();
        let mut level = Vec::with_capacity(next_count);
        for batch in children {
            level.extend(batch?);
        }
        level.sort_by(|a, b| (a.base, &a.word).cmp(&(b.base, &b.word)));
        level.retain(|r| self.seen.insert(&r.plane));
        self.frontier = level;
        Ok(())
    }
}

fn collect_levels(mut walker: LiftWalker<'_>, depth: usize) -> Result<Vec<LiftRecord>> {
    let mut out = walker.frontier.clone();
    for _ in 0..depth {
        walker.advance()?;
        out.extend(walker.frontier.iter().cloned());
        if out.len() > MAX_RECORDS {
            return Err(Error::Refused(format!("lift enumeration exceeded {MAX_RECORDS} records")));
        }
    }
    Ok(out)
}

/// Images of the mirrors under words of length at most `depth`.
pub fn enumerate_lifts(sys: &MirrorSystem, x: &KleinPoint, depth: usize) -> Result<Vec<LiftRecord>> {
    require_fundamental(sys, x)?;
    collect_levels(LiftWalker::new(Orbit::mirrors(sys), x)?, depth)
}

/// Images of the convex-core boundary lines under words of length at most
/// `depth`; `x` must lie in the core.
pub fn enumerate_boundary_lifts(sys: &MirrorSystem, x: &KleinPoint, depth: usize) -> Result<Vec<LiftRecord>> {
    let orbit = core_orbit(sys, x)?;
    collect_levels(LiftWalker::new(orbit, x)?, depth)
}

fn core_orbit<'a>(sys: &'a MirrorSystem, x: &KleinPoint) -> Result<Orbit<'a>> {
    require_fundamental(sys, x)?;
    let orbit = Orbit::core_boundary(sys)?;
    if orbit.bases.iter().any(|b| b.side(x.coords()) <= 0.0) {
        return domain("basepoint lies outside the convex core of the mirror system");
    }
    Ok(orbit)
}

/// Number of mirror images at a given level: `m(m−1)^level`.
pub fn reduced_word_count(m: usize, level: usize) -> u128 {
    m as u128 * (m as u128 - 1).pow(level as u32)
}

/// Number of boundary lifts at a given level: `m` at level 0, then
/// `m(m−2)(m−1)^{level−1}`.
pub fn boundary_lift_count(m: usize, level: usize) -> u128 {
    if level == 0 {
        m as u128
    } else {
        m as u128 * (m as u128 - 2) * (m as u128 - 1).pow(level as u32 - 1)
    }
}

/// Geometric tail `L_K ρ/(1−ρ)` with `ρ = √(L_K / L_{K−2})`; infinite when
/// the last levels are not decaying.
fn remainder_estimate(levels: &[f64]) -> f64 {
    let k = levels.len();
    if k < 3 {
        return f64::NAN;
    }
    let (a, c) = (levels[k - 3], levels[k - 1]);
    if c == 0.0 {
        return 0.0;
    }
    if !(a > 0.0) {
        return f64::INFINITY;
    }
    let rho = (c / a).sqrt();
    if rho >= 1.0 {
        f64::INFINITY
    } else {
        c * rho / (1.0 - rho)
    }
}

/// Partial sums of `Σ V_{n−1}(asin sech ℓ)` over the lifts of the core
/// boundary, level by level.
///
/// With `depth = None` the sweep runs until a whole level contributes less
/// than [`LEVEL_EPSILON`] and then checks the total against `ω_{n−1}`. Rows
/// are `(depth, level_sum, partial_sum, remainder_estimate)`.
pub fn orthoseries_partial_sum(sys: &MirrorSystem, x: &KleinPoint, depth: Option<usize>) -> Result<SeriesReport> {
    let orbit = core_orbit(sys, x)?;
    let mut walker = LiftWalker::new(orbit, x)?;
    let omega = visual_sphere_area(sys.dim)?;
    let mut report = SeriesReport::new(&["depth", "level_sum", "partial_sum", "remainder_estimate"]);
    let mut levels = Vec::new();
    let mut partial = NeumaierSum::new();
    let mut previous = f64::NEG_INFINITY;
    let mut monotone = true;
    let max_depth = depth.unwrap_or(MAX_AUTO_DEPTH);
    let mut converged = false;
    for k in 0..=max_depth {
        if k > 0 {
            walker.advance()?;
        }
        let level_sum = compensated_sum(walker.frontier.iter().map(|r| r.term));
        levels.push(level_sum);
        partial.add(level_sum);
        let sum = partial.value();
        if !walker.frontier.is_empty() && sum <= previous {
            monotone = false;
        }
        previous = sum;
        report.push_row(vec![k as f64, level_sum, sum, remainder_estimate(&levels)]);
        if depth.is_none() && level_sum < LEVEL_EPSILON {
            converged = true;
            break;
        }
    }
    if depth.is_none() && !converged {
        return Err(Error::NonConvergence(format!(
            "level sums still above {LEVEL_EPSILON} after {MAX_AUTO_DEPTH} levels"
        )));
    }
    let final_sum = partial.value();
    report.push_check(BoundCheck::new(
        "partial sums strictly increasing",
        if monotone { 1.0 } else { 0.0 },
        Relation::Equal,
        1.0,
        0.0,
    ));
    report.push_check(BoundCheck::new("partial sum <= ω", final_sum, Relation::LessEq, omega, DEFAULT_TOLERANCE));
    if converged {
        report.push_check(BoundCheck::new(
            "converged partial sum = ω",
            final_sum,
            Relation::Equal,
            omega,
            SERIES_TOLERANCE,
        ));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_counts() {
        assert_eq!(reduced_word_count(2, 5), 2);
        assert_eq!(reduced_word_count(3, 4), 48);
        let sys = MirrorSystem::three_mirrors(0.9).unwrap();
        let lifts = enumerate_lifts(&sys, &KleinPoint::origin(2), 5).unwrap();
        for level in 0..=5 {
            let c = lifts.iter().filter(|r| r.level() == level).count() as u128;
            assert_eq!(c, reduced_word_count(3, level));
        }
        for r in &lifts {
            assert!(r.word.windows(2).all(|w| w[0] != w[1]));
            assert!(r.word.last() != Some(&r.base));
        }
        let b = enumerate_boundary_lifts(&sys, &KleinPoint::origin(2), 4).unwrap();
        for level in 0..=4 {
            let c = b.iter().filter(|r| r.level() == level).count() as u128;
            assert_eq!(c, boundary_lift_count(3, level));
        }
    }

    #[test]
    fn dihedral_lift_distances() {
        let sys = MirrorSystem::two_mirrors(1.0, Dim::new(2).unwrap()).unwrap();
        let lifts = enumerate_lifts(&sys, &KleinPoint::origin(2), 6).unwrap();
        assert_eq!(lifts.len(), 14);
        for r in &lifts {
            assert!((r.distance - (0.5 + r.level() as f64)).abs() < 1e-9, "{:?}", r.word);
        }
    }

    #[test]
    fn core_boundary_is_perpendicular() {
        let sys = MirrorSystem::three_mirrors(0.9).unwrap();
        let lines = sys.core_boundary().unwrap();
        assert_eq!(lines.len(), 3);
        for (line, [i, j]) in &lines {
            for k in [*i, *j] {
                match dist_planes(line, &sys.mirrors()[k]).unwrap() {
                    crate::klein::PlaneRelation::Intersecting { angle } => {
                        assert!((angle - PI / 2.0).abs() < 1e-12)
                    }
                    other => panic!("{other:?}"),
                }
            }
            assert!(line.side(&[0.0, 0.0]) > 0.0);
        }
    }

    #[test]
    fn rejects_bad_systems() {
        assert!(MirrorSystem::three_mirrors(0.4).is_err());
        let a = Hyperplane::new(vec![1.0, 0.0], 0.5).unwrap();
        assert!(MirrorSystem::new(Dim::new(2).unwrap(), vec![a]).is_err());
        let sys = MirrorSystem::three_mirrors(0.9).unwrap();
        let outside = KleinPoint::new(vec![0.95, 0.0]).unwrap();
        assert!(matches!(enumerate_lifts(&sys, &outside, 1), Err(Error::Domain(_))));
        let two = MirrorSystem::two_mirrors(1.0, Dim::new(2).unwrap()).unwrap();
        assert!(matches!(
            orthoseries_partial_sum(&two, &KleinPoint::origin(2), None),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn three_mirror_series_reaches_two_pi() {
        let sys = MirrorSystem::three_mirrors(0.9).unwrap();
        let r = orthoseries_partial_sum(&sys, &KleinPoint::origin(2), None).unwrap();
        let last = r.rows.last().unwrap();
        assert!((last[2] - 2.0 * PI).abs() < 1e-6, "{}", last[2]);
        assert!(r.verdict.is_pass(), "{:?}", r.checks);
    }

    #[test]
    fn remainder_of_geometric_levels() {
        let levels = [1.0, 0.5, 0.25];
        assert!((remainder_estimate(&levels) - 0.25).abs() < 1e-15);
        assert!(remainder_estimate(&[1.0, 1.0, 1.0]).is_infinite());
    }
}
