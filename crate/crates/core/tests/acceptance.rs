//! Acceptance suite: one PASS/FAIL line per criterion, each with pinned
//! tolerances. Exits nonzero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use hypershadow::chimney::{
    chimney_integral, monte_carlo_chimney, monte_carlo_chimney_planes, random_rotation, rotate_plane,
    ChimneyConfig, Integrand,
};
use hypershadow::klein::{dist_points, projection_radius, visual_half_angle, KleinPoint};
use hypershadow::orthospectrum::{orthoseries_partial_sum, MirrorSystem};
use hypershadow::poincare::{build_pentagon_group, poincare_growth, visual_diameter_decay, GrowthOptions};
use hypershadow::shadows::{
    inradius_upper_bound, inradius_upper_bound_3d, regular_polygon, skeleton_estimate, truncated_polygon,
    verify_ideal_polygon, verify_polygon_inequality, verify_polytope, IdealPolygon, PolytopeSpec,
};
use hypershadow::specfun::{incomplete_beta_half, sphere_area, Dim};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{disk_point, klein_distance, simpson};

const SEED: u64 = 42;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn dim(n: usize) -> Dim {
    Dim::new(n).expect("valid dimension")
}

fn ideal_polygon_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for k in 3..=8 {
        let poly = IdealPolygon::regular(k).unwrap();
        let mut done = 0;
        while done < 100 {
            let p = disk_point(&mut rng, 1.0);
            if !poly.contains(&p) {
                continue;
            }
            let x = KleinPoint::new(p.to_vec()).unwrap();
            let r = verify_ideal_polygon(&poly, &x).unwrap();
            worst = worst.max((0.5 * r.total - PI).abs());
            done += 1;
        }
        points += done;
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-9 && secs < 1.0,
        format!("{points} points, max |Σ − π| = {worst:.2e} (< 1e-9), {secs:.3} s (< 1 s)"),
    )
}

fn polygon_inequalities() -> Outcome {
    let o = KleinPoint::origin(2);
    let square = verify_polygon_inequality(&regular_polygon(4, 0.5).unwrap(), &o).unwrap();
    let cut = verify_polygon_inequality(&truncated_polygon(3, 1.5).unwrap(), &o).unwrap();
    let square_ok = square.angle_sum < PI - 1e-3;
    let cut_ok = cut.angle_sum > PI + 1e-3;
    outcome(
        square_ok && cut_ok,
        format!(
            "compact square Σ = {:.6} vs π − 1e-3 ({}); truncated triangle Σ = {:.6} vs π + 1e-3 ({})",
            square.angle_sum,
            if square_ok { "ok" } else { "not below: shadows of a closed polygon cover the circle" },
            cut.angle_sum,
            if cut_ok { "ok" } else { "not above" },
        ),
    )
}

fn beta_layer() -> Outcome {
    let b1 = incomplete_beta_half(1.0, 2).unwrap();
    let b2 = incomplete_beta_half(1.0, 3).unwrap();
    let listed = (b1 - 2.0).abs().max((b2 - PI / 2.0).abs());
    let mut worst: f64 = 0.0;
    for k in 1..=7u32 {
        for &r in &[0.3, 0.9, 1.4] {
            let lhs = simpson(|t: f64| t.sin().powi(k as i32 - 1), 0.0, r, 4000);
            let rhs = 0.5 * incomplete_beta_half(r.sin().powi(2), k).unwrap();
            worst = worst.max((lhs - rhs).abs());
        }
    }
    outcome(
        listed < 1e-12 && worst < 1e-10,
        format!("listed values off by {listed:.1e} (< 1e-12); sine-power identity max error {worst:.1e} (< 1e-10)"),
    )
}

fn octahedron_bounds() -> Outcome {
    let oct = PolytopeSpec::ideal_octahedron();
    let x = KleinPoint::origin(3);
    let r = verify_polytope(&oct, &x).unwrap();
    let exact = 16.0 * PI * (1.0 - 1.0 / 3f64.sqrt());
    let families = oct.flags().facet_families.clone().unwrap();
    let fam: Vec<f64> = (0..2u8)
        .map(|c| {
            let idx: Vec<usize> = (0..families.len()).filter(|&i| families[i] == c).collect();
            r.partial_total(&idx)
        })
        .collect();
    let norm_exact = 8.0 / (3.0 + 3f64.sqrt());
    let ok = (r.total - exact).abs() < 1e-9
        && r.total > 4.0 * PI
        && r.total < 8.0 * PI
        && fam.iter().all(|&f| f < 4.0 * PI)
        && (r.normalized - norm_exact).abs() < 1e-9
        && r.normalized > 1.0
        && r.normalized < 2.0
        && r.passed();
    outcome(
        ok,
        format!(
            "Σ = {:.12} (exact {:.12}), families {:.6}/{:.6} < 4π, normalized {:.12} (exact {:.12})",
            r.total, exact, fam[0], fam[1], r.normalized, norm_exact
        ),
    )
}

fn euclidean_limit() -> Outcome {
    let cube = PolytopeSpec::small_cube(1e-4, dim(3)).unwrap();
    let r = verify_polytope(&cube, &KleinPoint::origin(3)).unwrap();
    let omega = sphere_area(2).unwrap();
    let gap = (r.total - 3.0 * omega).abs();
    outcome(
        gap < 1e-3 * omega && r.passed(),
        format!("Σ = {:.9}, |Σ − 3ω₂| = {gap:.2e} (< {:.2e})", r.total, 1e-3 * omega),
    )
}

fn skeleton() -> Outcome {
    let oct = PolytopeSpec::ideal_octahedron();
    let s = skeleton_estimate(&oct, &KleinPoint::origin(3)).unwrap();
    let lower = s.mu1 - 4.0 * PI;
    let upper = s.line_shadow_total - s.mu1;
    outcome(
        lower > 1e-6 && upper > 1e-6,
        format!(
            "μ₁ = {:.12}, μ₁ − 4π = {lower:.3e}, Σ 2 asin sech d − μ₁ = {upper:.3e} (both need > 1e-6)",
            s.mu1
        ),
    )
}

fn radius_bound() -> Outcome {
    let mut worst: f64 = 0.0;
    for &n in &[2u64, 5, 100, 1_000_000] {
        let a = inradius_upper_bound(n, dim(3)).unwrap();
        let b = inradius_upper_bound_3d(n).unwrap();
        let c = 0.5 * ((n - 1) as f64).ln();
        worst = worst.max((a - b).abs()).max((b - c).abs());
    }
    let ratio = inradius_upper_bound(1_000_000, dim(3)).unwrap() / 1e6f64.ln();
    outcome(
        worst < 1e-10 && (0.45..=0.55).contains(&ratio),
        format!("bisection vs ½log(N−1) max gap {worst:.1e} (< 1e-10); bound/log N at 10⁶ = {ratio:.6}"),
    )
}

fn klein_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut e1, mut e2, mut e3): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let x: f64 = rng.random_range(1e-6..10.0);
        // acosh(coth x) = log((cosh x + 1)/sinh x).
        let lhs = ((x.cosh() + 1.0) / x.sinh()).ln();
        e1 = e1.max((projection_radius(x).unwrap() - lhs).abs()).max((lhs + (0.5 * x).tanh().ln()).abs());
        // acos(tanh x) = 2 asin √((1 − tanh x)/2) with 1 − tanh x = 2/(e^{2x} + 1).
        let acos_tanh = 2.0 * (1.0 / ((2.0 * x).exp() + 1.0)).sqrt().asin();
        let asin_sech = (1.0 / x.cosh()).asin();
        e2 = e2.max((asin_sech - acos_tanh).abs()).max((visual_half_angle(x) - asin_sech).abs());
    }
    for _ in 0..1000 {
        let mut p = || loop {
            let v: Vec<f64> = (0..3).map(|_| rng.random_range(-0.95..0.95)).collect();
            if v.iter().map(|a| a * a).sum::<f64>() < 0.9 {
                return v;
            }
        };
        let (a, b) = (p(), p());
        let lorentz = dist_points(&KleinPoint::new(a.clone()).unwrap(), &KleinPoint::new(b.clone()).unwrap()).unwrap();
        let klein = klein_distance(&a, &b);
        e3 = e3.max((lorentz - klein).abs() / klein.max(1.0));
    }
    outcome(
        e1 < 1e-12 && e2 < 1e-12 && e3 < 1e-12,
        format!("acosh coth vs −log tanh {e1:.1e}; asin sech vs acos tanh {e2:.1e}; Lorentz vs Klein distance {e3:.1e} (all < 1e-12)"),
    )
}

fn chimney() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in [2usize, 3] {
        for d in [0.5, 1.0, 2.0] {
            for g in [Integrand::One, Integrand::Basmajian] {
                cases += 1;
                let cfg = ChimneyConfig::new(d, dim(n), g).unwrap();
                let mc = monte_carlo_chimney(&cfg, 1_000_000, SEED).unwrap();
                match chimney_integral(&cfg) {
                    Ok(q) => {
                        let z = (q.value - mc.estimate).abs() / mc.standard_error;
                        worst = worst.max(z);
                        if z >= 3.0 {
                            failures.push(format!("n={n} d={d} g={g}: {z:.2}σ"));
                        }
                    }
                    Err(_) => failures.push(format!("n={n} d={d} g={g}: quadrature diverges")),
                }
            }
        }
    }
    let mut rot_z: f64 = 0.0;
    for d in [0.5, 1.0, 2.0] {
        let cfg = ChimneyConfig::new(d, dim(2), Integrand::Basmajian).unwrap();
        let q = chimney_integral(&cfg).unwrap();
        let rot = random_rotation(2, SEED);
        let (a, b) = cfg.planes().unwrap();
        let (a, b) = (rotate_plane(&rot, &a).unwrap(), rotate_plane(&rot, &b).unwrap());
        let mc = monte_carlo_chimney_planes(&a, &b, cfg.g, 1_000_000, SEED).unwrap();
        rot_z = rot_z.max((q.value - mc.estimate).abs() / mc.standard_error);
    }
    if rot_z >= 3.0 {
        failures.push(format!("rotated n=2: {rot_z:.2}σ"));
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        failures.push(format!("runtime {secs:.1} s"));
    }
    let detail = format!(
        "{cases} cases, worst converged gap {worst:.2}σ, rotated worst {rot_z:.2}σ, {secs:.1} s; {}",
        if failures.is_empty() { "all within 3σ".to_string() } else { failures.join("; ") }
    );
    outcome(failures.is_empty(), detail)
}

fn orthospectrum() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    match MirrorSystem::two_mirrors(1.0, dim(2)).and_then(|s| orthoseries_partial_sum(&s, &KleinPoint::origin(2), None)) {
        Ok(r) => {
            let last = *r.column("partial_sum").unwrap().last().unwrap();
            ok &= (last - 2.0 * PI).abs() < 1e-6;
            notes.push(format!("m=2 limit {last:.9}"));
        }
        Err(e) => {
            ok = false;
            notes.push(format!("m=2: {e}"));
        }
    }
    let sys = MirrorSystem::three_mirrors(0.9).unwrap();
    let mut limits = Vec::new();
    for p in [[0.0, 0.0], [0.2, -0.1], [-0.3, 0.25]] {
        let r = orthoseries_partial_sum(&sys, &KleinPoint::new(p.to_vec()).unwrap(), None).unwrap();
        let sums = r.column("partial_sum").unwrap();
        let last = *sums.last().unwrap();
        let monotone = sums.windows(2).all(|w| w[1] > w[0]);
        ok &= monotone && (last - 2.0 * PI).abs() < 1e-6;
        limits.push(last);
    }
    let spread = limits.iter().cloned().fold(f64::MIN, f64::max) - limits.iter().cloned().fold(f64::MAX, f64::min);
    ok &= spread < 2e-6;
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 30.0;
    notes.push(format!(
        "m=3 max |S − 2π| = {:.1e}, basepoint spread {spread:.1e}, {secs:.2} s",
        limits.iter().map(|l| (l - 2.0 * PI).abs()).fold(0.0, f64::max)
    ));
    outcome(ok, notes.join("; "))
}

fn poincare() -> Outcome {
    let start = Instant::now();
    let g = build_pentagon_group().unwrap();
    let x = KleinPoint::new(vec![0.1, 0.05]).unwrap();
    let y = KleinPoint::new(vec![-0.2, 0.1]).unwrap();
    let r = poincare_growth(&g, &x, &y, GrowthOptions::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let drift = (r.slope_first_half - r.slope_second_half).abs() / r.slope_s1;
    let removal = (r.slope_s1_reduced - r.slope_s1).abs() / r.slope_s1;
    let max_ratio = r.increment_ratios_s2.iter().cloned().fold(0.0, f64::max);
    let ok = r.slope_s1 > 0.0 && drift < 0.2 && removal < 0.05 && max_ratio < 0.7 && secs < 120.0;
    outcome(
        ok,
        format!(
            "orbit {} points, s=1 slope {:.4} (drift {drift:.3}, removal change {removal:.1e}), s=2 max increment ratio {max_ratio:.3}, {secs:.1} s",
            r.orbit_size, r.slope_s1
        ),
    )
}

fn visual_decay() -> Outcome {
    let fit = visual_diameter_decay(0.5, 10.0, 20.0, 101).unwrap();
    outcome(
        (fit.slope + 1.0).abs() < 0.01,
        format!(
            "slope {:.8} (−1 ± 0.01); intercept {:.6}, log(4 sinh ρ) = {:.6}, log(4 tanh ρ) = {:.6}",
            fit.slope, fit.intercept, fit.asymptotic_intercept, fit.tanh_intercept
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("ideal polygon identity", ideal_polygon_identity),
        ("polygon inequalities", polygon_inequalities),
        ("beta layer", beta_layer),
        ("octahedron bounds", octahedron_bounds),
        ("Euclidean limit", euclidean_limit),
        ("skeleton estimate", skeleton),
        ("radius bound", radius_bound),
        ("Klein identities", klein_identities),
        ("chimney integral", chimney),
        ("orthospectrum series", orthospectrum),
        ("Poincaré growth", poincare),
        ("visual diameter decay", visual_decay),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
