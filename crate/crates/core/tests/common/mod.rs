//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `cosh d(x, y)` read off Klein coordinates.
pub fn klein_cosh_distance(x: &[f64], y: &[f64]) -> f64 {
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let nx: f64 = x.iter().map(|a| a * a).sum();
    let ny: f64 = y.iter().map(|a| a * a).sum();
    (1.0 - dot) / ((1.0 - nx) * (1.0 - ny)).sqrt()
}

/// Distance from Klein coordinates, in a form that stays accurate for
/// nearby points: `sinh(d/2)² = (cosh d − 1)/2` with the numerator
/// expanded as `|x−y|² − |x|²|y|² + (x·y)²` over the denominator.
pub fn klein_distance(x: &[f64], y: &[f64]) -> f64 {
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let nx: f64 = x.iter().map(|a| a * a).sum();
    let ny: f64 = y.iter().map(|a| a * a).sum();
    let diff: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    let root = ((1.0 - nx) * (1.0 - ny)).sqrt();
    // cosh d − 1 = (1 − x·y − root)/root and (1 − x·y)² − root² = diff − nx·ny + dot².
    let num = (diff - nx * ny + dot * dot) / (1.0 - dot + root);
    2.0 * (num / root / 2.0).sqrt().asinh()
}

/// Visual arcs of the sides of an ideal polygon, seen from `x`: move `x` to
/// the centre of the Poincaré disk by a Möbius map and measure the
/// arguments of the images of the vertices.
pub fn ideal_side_arcs(angles: &[f64], x: [f64; 2]) -> Vec<f64> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let s = 1.0 / (1.0 + (1.0 - r2).sqrt());
    let p = (x[0] * s, x[1] * s);
    let image = |t: f64| {
        let z = (t.cos(), t.sin());
        let num = (z.0 - p.0, z.1 - p.1);
        // 1 − conj(p)·z
        let den = (1.0 - (p.0 * z.0 + p.1 * z.1), -(p.0 * z.1 - p.1 * z.0));
        let d2 = den.0 * den.0 + den.1 * den.1;
        let w = ((num.0 * den.0 + num.1 * den.1) / d2, (num.1 * den.0 - num.0 * den.1) / d2);
        w.1.atan2(w.0)
    };
    let k = angles.len();
    (0..k)
        .map(|i| (image(angles[(i + 1) % k]) - image(angles[i])).rem_euclid(2.0 * PI))
        .collect()
}

/// Uniform point of the disk of radius `r`.
pub fn disk_point<R: Rng>(rng: &mut R, r: f64) -> [f64; 2] {
    loop {
        let p = [rng.random_range(-r..r), rng.random_range(-r..r)];
        if p[0] * p[0] + p[1] * p[1] < r * r {
            return p;
        }
    }
}
