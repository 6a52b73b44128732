#![allow(dead_code)]

use derivzeros::sampler::{sample_roots, RootDistribution, SeedSpec};
use derivzeros::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn gaussian_roots(n: usize, seed: u64, stream: u64) -> Vec<Complex64> {
    sample_roots(
        &RootDistribution::complex_gaussian(c(0.0, 0.0), 1.0),
        n,
        SeedSpec::new(seed, stream),
    )
    .unwrap()
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    let d = (a - b).norm();
    if d == 0.0 {
        0.0
    } else {
        d / a.norm().max(b.norm())
    }
}

/// `e_k` by summing over every k-subset.
pub fn brute_elem_sym(v: &[Complex64], k: usize) -> Complex64 {
    fn go(v: &[Complex64], k: usize, start: usize, acc: Complex64, out: &mut Complex64) {
        if k == 0 {
            *out += acc;
            return;
        }
        for i in start..=v.len() - k {
            go(v, k - 1, i + 1, acc * v[i], out);
        }
    }
    let mut out = c(0.0, 0.0);
    if k <= v.len() {
        go(v, k, 0, c(1.0, 0.0), &mut out);
    }
    out
}

/// `e_0..=e_n` from power sums by Newton's identities.
pub fn newton_elem_sym(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    let p: Vec<Complex64> = (0..=n)
        .map(|j| v.iter().map(|y| y.powu(j as u32)).sum())
        .collect();
    let mut e = vec![c(0.0, 0.0); n + 1];
    e[0] = c(1.0, 0.0);
    for k in 1..=n {
        let mut s = c(0.0, 0.0);
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            s += sign * e[k - i] * p[i];
        }
        e[k] = s / k as f64;
    }
    e
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Vertices of the convex hull, counter-clockwise (Andrew's monotone chain).
pub fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut hull: Vec<Complex64> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Complex64>> = if pass == 0 {
            Box::new(p.iter())
        } else {
            Box::new(p.iter().rev())
        };
        for &q in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0
            {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

/// Distance from `z` to the convex polygon `hull` (0 inside).
pub fn hull_distance(hull: &[Complex64], z: Complex64) -> f64 {
    match hull.len() {
        0 => f64::INFINITY,
        1 => (z - hull[0]).norm(),
        2 => segment_distance(z, hull[0], hull[1]),
        m => {
            let inside = (0..m).all(|i| cross(hull[i], hull[(i + 1) % m], z) >= 0.0);
            if inside {
                0.0
            } else {
                (0..m)
                    .map(|i| segment_distance(z, hull[i], hull[(i + 1) % m]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}
