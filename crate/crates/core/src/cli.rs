//! Command-line front end. Every command prints one report on standard
//! output: JSON by default, CSV for the series sweeps.
//!
//! Exit codes: 0 when all checks pass or the command only computes values,
//! 1 when a check fails or a computation does not converge, 2 on bad input.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::chimney::{
    chimney_integral, monte_carlo_chimney, monte_carlo_chimney_planes, random_rotation, rotate_plane,
    ChimneyConfig, Integrand,
};
use crate::error::{Error, Result};
use crate::klein::{
    dist_point_plane, dist_points, projection_radius, symmetric_polar_parameter, visual_half_angle,
    Hyperplane, KleinPoint,
};
use crate::orthospectrum::{orthoseries_partial_sum, MirrorSystem};
use crate::poincare::{
    build_pentagon_group, poincare_growth, poincare_series, shadow_lower_bound_check, GrowthOptions,
};
use crate::report::{check_tightening, retighten, BoundCheck, Relation, SeriesReport, Verdict, DEFAULT_TOLERANCE};
use crate::shadows::{
    inradius_upper_bound, inradius_upper_bound_3d, inradius_upper_bound_vertices, min_faces_for_inradius,
    regular_polygon, skeleton_estimate, truncated_polygon, verify_ideal_polygon, verify_polygon_inequality,
    verify_polytope, IdealPolygon, PolytopeSpec,
};
use crate::specfun::{
    hyperbolic_ball_volume, incomplete_beta_half, sphere_area, spherical_ball_volume, Dim,
};

/// Seed used when neither `--seed` nor the environment sets one.
pub const DEFAULT_SEED: u64 = 42;

/// Environment variable overriding [`DEFAULT_SEED`].
pub const SEED_ENV: &str = "HYPERSHADOW_SEED";

#[derive(Debug, Parser)]
#[command(name = "hypershadow", version, about = "Shadow identities and inequalities in hyperbolic space")]
pub struct Cli {
    /// Output format; CSV is available for series sweeps only.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Random seed [default: $HYPERSHADOW_SEED, else 42].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Tighter tolerance for every check in the report, at most 1e-9.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Special functions.
    #[command(subcommand)]
    Specfun(SpecfunCmd),
    /// Distances and visual angles in the Klein model.
    #[command(subcommand)]
    Klein(KleinCmd),
    /// Shadow sums of polygons.
    #[command(subcommand)]
    Polygon(PolygonCmd),
    /// Shadow sums, skeleta and inradius bounds of polytopes.
    #[command(subcommand)]
    Polytope(PolytopeCmd),
    /// Integrals over the convex hull of two disjoint planes.
    #[command(subcommand)]
    Chimney(ChimneyCmd),
    /// Orthospectrum series of reflection groups.
    #[command(subcommand)]
    Ortho(OrthoCmd),
    /// Orbits of the right-angled pentagon group.
    #[command(subcommand)]
    Poincare(PoincareCmd),
}

#[derive(Debug, Subcommand)]
pub enum SpecfunCmd {
    /// `B(x; k/2, 1/2)`.
    Beta {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        k: u32,
    },
    /// Ball volumes of radius `r` in dimension `n`.
    Volume {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: f64,
        #[arg(long, value_enum, default_value_t = GeometryArg::Hyperbolic)]
        geometry: GeometryArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeometryArg {
    Hyperbolic,
    Spherical,
}

#[derive(Debug, Subcommand)]
pub enum KleinCmd {
    /// Distance from `--p` to the point `--q` or to the plane `--normal`/`--offset`.
    Dist {
        #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
        p: Vec<f64>,
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        q: Option<Vec<f64>>,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, requires = "offset", conflicts_with = "q")]
        normal: Option<Vec<f64>>,
        #[arg(long, allow_negative_numbers = true)]
        offset: Option<f64>,
    },
    /// Angle of parallelism at distance `d`.
    Parallelism {
        #[arg(long)]
        d: f64,
    },
    /// Radius of the shadow disk cast by a plane at distance `d` from the origin.
    Projection {
        #[arg(long)]
        d: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolygonBuiltin {
    /// Regular polygon with finite vertices at Klein radius 0.5.
    CompactSquare,
    /// Regular triangle with hyperideal vertices at Klein radius 1.5, truncated.
    TruncatedTriangle,
}

#[derive(Debug, Subcommand)]
pub enum PolygonCmd {
    /// Shadow sum of the sides seen from `--point`.
    Verify {
        #[command(flatten)]
        source: PolygonSource,
        #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [0.0, 0.0])]
        point: Vec<f64>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct PolygonSource {
    /// Regular ideal polygon with this many vertices.
    #[arg(long)]
    regular_ideal: Option<usize>,
    /// Ideal polygon with vertices at these angles.
    #[arg(long, num_args = 3.., allow_negative_numbers = true)]
    angles: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    builtin: Option<PolygonBuiltin>,
    /// JSON file holding `{"angles": [...]}` or `{"sides": [{"normal", "offset"}, ...]}`.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolytopeBuiltin {
    IdealOctahedron,
    TinyCube,
}

#[derive(Debug, Args)]
pub struct PolytopeSource {
    #[arg(long, value_enum, conflicts_with = "input", required_unless_present = "input")]
    builtin: Option<PolytopeBuiltin>,
    /// JSON polytope description.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Scale of the tiny cube.
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    /// Dimension of the tiny cube.
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Base point [default: the polytope's interior witness].
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    point: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
pub enum PolytopeCmd {
    /// Facet shadow sum with the bounds implied by the polytope's flags.
    Verify {
        #[command(flatten)]
        source: PolytopeSource,
    },
    /// One-skeleton shadow estimate.
    Skeleton {
        #[command(flatten)]
        source: PolytopeSource,
    },
    /// Upper bounds on the inradius from the face or vertex count.
    RadiusBound {
        #[arg(long, conflicts_with_all = ["vertices", "radius"], required_unless_present_any = ["vertices", "radius"])]
        faces: Option<u64>,
        #[arg(long, conflicts_with = "radius")]
        vertices: Option<u64>,
        /// Smallest face count compatible with this inradius.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 3)]
        dim: usize,
    },
}

#[derive(Debug, Args)]
pub struct ChimneyArgs {
    /// Distance between the planes.
    #[arg(long)]
    d: f64,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// One of `zero`, `one`, `basmajian`, `exp-decay:λ`.
    #[arg(long, default_value = "one")]
    g: Integrand,
}

#[derive(Debug, Subcommand)]
pub enum ChimneyCmd {
    /// Adaptive quadrature.
    Integrate {
        #[command(flatten)]
        args: ChimneyArgs,
    },
    /// Monte Carlo with explicit planes.
    Mc {
        #[command(flatten)]
        args: ChimneyArgs,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Apply a random rotation, drawn from the seed, to both planes.
        #[arg(long)]
        rotated: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MirrorBuiltin {
    TwoMirror,
    ThreeMirror,
    Regular,
}

#[derive(Debug, Subcommand)]
pub enum OrthoCmd {
    /// Partial sums of the orthospectrum series by word length.
    Series {
        #[arg(long, value_enum, conflicts_with = "input", required_unless_present = "input")]
        builtin: Option<MirrorBuiltin>,
        /// JSON mirror system `{"dim", "mirrors"}`.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Mirror distance for the two-mirror system.
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        /// Common mirror offset for the three-mirror and regular systems.
        #[arg(long, default_value_t = 0.9)]
        c: f64,
        /// Mirror count for the regular system.
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        point: Option<Vec<f64>>,
        /// Fixed depth instead of the automatic stopping rule.
        #[arg(long)]
        depth: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [0.0, 0.0])]
    x: Vec<f64>,
    #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [0.0, 0.0])]
    y: Vec<f64>,
}

#[derive(Debug, Subcommand)]
pub enum PoincareCmd {
    /// Construct the group and check its angles.
    Build,
    /// Orbit counts and partial sums on a grid of radii.
    Series {
        #[command(flatten)]
        orbit: OrbitArgs,
        #[arg(long, default_value_t = 10.0)]
        r_max: f64,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
    },
    /// Growth of the partial sums at `s = 1` and `s = 2`.
    Growth {
        #[command(flatten)]
        orbit: OrbitArgs,
        #[arg(long, default_value_t = 4.0)]
        r_lo: f64,
        #[arg(long, default_value_t = 10.0)]
        r_hi: f64,
        #[arg(long, default_value_t = 0.25)]
        step: f64,
        #[arg(long, default_value_t = 10)]
        removed: usize,
    },
    /// Visual shadows of the covering balls about the orbit points.
    Cover {
        #[command(flatten)]
        orbit: OrbitArgs,
        #[arg(long, default_value_t = 8.0)]
        radius: f64,
    },
}

enum Output {
    Json { command: &'static str, report: Value },
    Series { command: &'static str, report: SeriesReport },
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn point(coords: Vec<f64>) -> Result<KleinPoint> {
    KleinPoint::new(coords)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("malformed JSON in {}: {e}", path.display())))
}

/// Resolve the seed: flag, then environment, then [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Retighten every `checks` list in the report and collect the verdicts.
fn settle(value: &mut Value, tolerance: Option<f64>) -> Result<Option<Verdict>> {
    let mut verdicts = Vec::new();
    visit(value, tolerance, &mut verdicts)?;
    Ok(if verdicts.is_empty() {
        None
    } else {
        Some(Verdict::combine(verdicts))
    })
}

fn visit(value: &mut Value, tolerance: Option<f64>, verdicts: &mut Vec<Verdict>) -> Result<()> {
    match value {
        Value::Object(map) => {
            if let Some(raw) = map.get("checks") {
                let mut checks: Vec<BoundCheck> =
                    serde_json::from_value(raw.clone()).map_err(|e| Error::Input(e.to_string()))?;
                if !checks.is_empty() {
                    if let Some(t) = tolerance {
                        checks = retighten(&checks, t)?;
                    }
                    let v = Verdict::combine(checks.iter().map(|c| c.verdict));
                    map.insert("checks".into(), to_value(&checks));
                    map.insert("verdict".into(), to_value(&v));
                    verdicts.push(v);
                }
            }
            for (k, v) in map.iter_mut() {
                if k != "checks" {
                    visit(v, tolerance, verdicts)?;
                }
            }
        }
        Value::Array(items) => {
            for v in items {
                visit(v, tolerance, verdicts)?;
            }
        }
        _ => {}
    }
    Ok(())
}

fn polytope(source: PolytopeSource) -> Result<(PolytopeSpec, KleinPoint)> {
    let spec = match (source.builtin, source.input) {
        (Some(PolytopeBuiltin::IdealOctahedron), _) => PolytopeSpec::ideal_octahedron(),
        (Some(PolytopeBuiltin::TinyCube), _) => PolytopeSpec::small_cube(source.eps, Dim::new(source.dim)?)?,
        (None, Some(path)) => read_json(&path)?,
        (None, None) => return Err(Error::Input("give --builtin or --input".into())),
    };
    let x = point(source.point.unwrap_or_else(|| spec.witness().to_vec()))?;
    Ok((spec, x))
}

#[derive(serde::Deserialize)]
#[serde(untagged)]
enum PolygonFile {
    Ideal(IdealPolygon),
    Sides { sides: Vec<Hyperplane> },
}

fn polygon_verify(source: PolygonSource, coords: Vec<f64>) -> Result<Value> {
    let x = point(coords)?;
    let ideal = |p: IdealPolygon| verify_ideal_polygon(&p, &x).map(|r| to_value(&r));
    let sides = |s: Vec<Hyperplane>| verify_polygon_inequality(&s, &x).map(|r| to_value(&r));
    if let Some(k) = source.regular_ideal {
        ideal(IdealPolygon::regular(k)?)
    } else if let Some(a) = source.angles {
        ideal(IdealPolygon::new(a)?)
    } else if let Some(b) = source.builtin {
        sides(match b {
            PolygonBuiltin::CompactSquare => regular_polygon(4, 0.5)?,
            PolygonBuiltin::TruncatedTriangle => truncated_polygon(3, 1.5)?,
        })
    } else if let Some(path) = source.input {
        match read_json(&path)? {
            PolygonFile::Ideal(p) => ideal(p),
            PolygonFile::Sides { sides: s } => sides(s),
        }
    } else {
        Err(Error::Input("no polygon given".into()))
    }
}

fn radius_bound(faces: Option<u64>, vertices: Option<u64>, radius: Option<f64>, dim: usize) -> Result<Value> {
    let n = Dim::new(dim)?;
    if let Some(f) = faces {
        let bisected = inradius_upper_bound(f, n)?;
        let closed = if dim == 3 { Some(inradius_upper_bound_3d(f)?) } else { None };
        let mut report = json!({ "faces": f, "dim": dim, "bound": bisected, "closed_form": closed });
        if let Some(c) = closed {
            let check = BoundCheck::new("bisection = ½log(N−1)", bisected, Relation::Equal, c, 1e-10);
            report["checks"] = to_value(&[check]);
        }
        Ok(report)
    } else if let Some(v) = vertices {
        if dim != 3 {
            return Err(Error::Input("the vertex-count bound is for dimension 3".into()));
        }
        Ok(json!({ "vertices": v, "dim": dim, "bound": inradius_upper_bound_vertices(v)? }))
    } else if let Some(r) = radius {
        Ok(json!({ "radius": r, "dim": dim, "min_faces": min_faces_for_inradius(r, n)? }))
    } else {
        Err(Error::Input("give --faces, --vertices or --radius".into()))
    }
}

fn mirror_system(builtin: Option<MirrorBuiltin>, input: Option<PathBuf>, d: f64, c: f64, m: usize) -> Result<MirrorSystem> {
    match (builtin, input) {
        (Some(MirrorBuiltin::TwoMirror), _) => MirrorSystem::two_mirrors(d, Dim::new(2)?),
        (Some(MirrorBuiltin::ThreeMirror), _) => MirrorSystem::three_mirrors(c),
        (Some(MirrorBuiltin::Regular), _) => MirrorSystem::regular_mirrors(m, c),
        (None, Some(path)) => read_json(&path),
        (None, None) => Err(Error::Input("give --builtin or --input".into())),
    }
}

fn execute(cli: Cli) -> Result<Output> {
    let seed = resolve_seed(cli.seed)?;
    let json_out = |command: &'static str, report: Value| Ok(Output::Json { command, report });
    match cli.command {
        Command::Specfun(SpecfunCmd::Beta { x, k }) => {
            json_out("specfun beta", json!({ "x": x, "k": k, "value": incomplete_beta_half(x, k)? }))
        }
        Command::Specfun(SpecfunCmd::Volume { n, r, geometry }) => {
            let dim = Dim::new(n)?;
            let volume = match geometry {
                GeometryArg::Hyperbolic => hyperbolic_ball_volume(dim, r)?,
                GeometryArg::Spherical => spherical_ball_volume(dim, r)?,
            };
            json_out(
                "specfun volume",
                json!({ "n": n, "r": r, "geometry": geometry_name(geometry), "volume": volume,
                        "unit_sphere_area": sphere_area(n - 1)? }),
            )
        }
        Command::Klein(KleinCmd::Dist { p, q, normal, offset }) => {
            let x = point(p)?;
            if let Some(q) = q {
                json_out("klein dist", json!({ "distance": dist_points(&x, &point(q)?)? }))
            } else if let (Some(u), Some(c)) = (normal, offset) {
                let plane = Hyperplane::new(u, c)?;
                json_out("klein dist", json!({ "signed_distance": dist_point_plane(&x, &plane)? }))
            } else {
                Err(Error::Input("give --q or --normal with --offset".into()))
            }
        }
        Command::Klein(KleinCmd::Parallelism { d }) => {
            if !d.is_finite() {
                return Err(Error::Input(format!("distance {d} must be finite")));
            }
            json_out(
                "klein parallelism",
                json!({ "d": d, "half_angle": visual_half_angle(d), "asin_sech": (1.0 / d.cosh()).asin(),
                        "acos_tanh": d.abs().tanh().acos() }),
            )
        }
        Command::Klein(KleinCmd::Projection { d }) => json_out(
            "klein projection",
            json!({ "d": d, "radius": projection_radius(d)?, "polar_parameter": symmetric_polar_parameter(d)? }),
        ),
        Command::Polygon(PolygonCmd::Verify { source, point }) => json_out("polygon verify", polygon_verify(source, point)?),
        Command::Polytope(PolytopeCmd::Verify { source }) => {
            let (spec, x) = polytope(source)?;
            json_out("polytope verify", to_value(&verify_polytope(&spec, &x)?))
        }
        Command::Polytope(PolytopeCmd::Skeleton { source }) => {
            let (spec, x) = polytope(source)?;
            json_out("polytope skeleton", to_value(&skeleton_estimate(&spec, &x)?))
        }
        Command::Polytope(PolytopeCmd::RadiusBound { faces, vertices, radius, dim }) => {
            json_out("polytope radius-bound", radius_bound(faces, vertices, radius, dim)?)
        }
        Command::Chimney(ChimneyCmd::Integrate { args }) => {
            let cfg = ChimneyConfig::new(args.d, Dim::new(args.n)?, args.g)?;
            json_out("chimney integrate", json!({ "config": to_value(&cfg), "integral": to_value(&chimney_integral(&cfg)?) }))
        }
        Command::Chimney(ChimneyCmd::Mc { args, samples, rotated }) => {
            let cfg = ChimneyConfig::new(args.d, Dim::new(args.n)?, args.g)?;
            let estimate = if rotated {
                let rot = random_rotation(args.n, seed);
                let (a, b) = cfg.planes()?;
                let (a, b) = (rotate_plane(&rot, &a)?, rotate_plane(&rot, &b)?);
                monte_carlo_chimney_planes(&a, &b, cfg.g, samples, seed)?
            } else {
                monte_carlo_chimney(&cfg, samples, seed)?
            };
            json_out("chimney mc", json!({ "config": to_value(&cfg), "rotated": rotated, "estimate": to_value(&estimate) }))
        }
        Command::Ortho(OrthoCmd::Series { builtin, input, d, c, m, point: p, depth }) => {
            let sys = mirror_system(builtin, input, d, c, m)?;
            let x = point(p.unwrap_or_else(|| vec![0.0; sys.dim().get()]))?;
            Ok(Output::Series { command: "ortho series", report: orthoseries_partial_sum(&sys, &x, depth)? })
        }
        Command::Poincare(PoincareCmd::Build) => {
            let g = build_pentagon_group()?;
            let checks: Vec<BoundCheck> = g
                .vertex_angles
                .iter()
                .enumerate()
                .map(|(k, a)| BoundCheck::new(format!("vertex {k} angle = π/2"), *a, Relation::Equal, std::f64::consts::FRAC_PI_2, 1e-10))
                .collect();
            let mut report = to_value(&g);
            report["checks"] = to_value(&checks);
            json_out("poincare build", report)
        }
        Command::Poincare(PoincareCmd::Series { orbit, r_max, step }) => {
            let g = build_pentagon_group()?;
            let report = poincare_series(&g, &point(orbit.x)?, &point(orbit.y)?, r_max, step)?;
            Ok(Output::Series { command: "poincare series", report })
        }
        Command::Poincare(PoincareCmd::Growth { orbit, r_lo, r_hi, step, removed }) => {
            let g = build_pentagon_group()?;
            let opts = GrowthOptions { r_lo, r_hi, step, removed, ..GrowthOptions::default() };
            json_out("poincare growth", to_value(&poincare_growth(&g, &point(orbit.x)?, &point(orbit.y)?, opts)?))
        }
        Command::Poincare(PoincareCmd::Cover { orbit, radius }) => {
            let g = build_pentagon_group()?;
            json_out("poincare cover", to_value(&shadow_lower_bound_check(&g, &point(orbit.x)?, &point(orbit.y)?, radius)?))
        }
    }
}

fn geometry_name(g: GeometryArg) -> &'static str {
    match g {
        GeometryArg::Hyperbolic => "hyperbolic",
        GeometryArg::Spherical => "spherical",
    }
}

fn status(verdict: Option<Verdict>) -> (&'static str, i32) {
    match verdict {
        None => ("COMPUTED", 0),
        Some(v) if v.is_pass() => ("PASS", 0),
        Some(_) => ("FAIL", 1),
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::NonConvergence(_) => 1,
        _ => 2,
    }
}

/// Parse `args` (including the program name), run the command and write
/// the report to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let format = cli.format;
    let tolerance = cli.tolerance;
    let result = (|| -> Result<(String, i32)> {
        if let Some(t) = tolerance {
            check_tightening(t, DEFAULT_TOLERANCE)?;
        }
        let (command, mut report) = match execute(cli)? {
            Output::Series { report, .. } if format == Format::Csv => {
                let report = match tolerance {
                    Some(t) => report.tightened(t)?,
                    None => report,
                };
                let verdict = (!report.checks.is_empty()).then_some(report.verdict);
                return Ok((report.to_csv(), status(verdict).1));
            }
            Output::Series { command, report } => (command, to_value(&report)),
            Output::Json { command, report } => (command, report),
        };
        if format == Format::Csv {
            return Err(Error::Input(format!("`{command}` has no CSV output")));
        }
        let verdict = settle(&mut report, tolerance)?;
        let (label, code) = status(verdict);
        let doc = json!({ "command": command, "status": label, "report": report });
        Ok((serde_json::to_string_pretty(&doc).expect("json") + "\n", code))
    })();
    match result {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.to_string().replace('\n', " "));
            exit_code_for(&e)
        }
    }
}
