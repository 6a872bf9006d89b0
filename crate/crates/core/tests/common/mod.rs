#![allow(dead_code)]

use std::path::PathBuf;

use expamoeba::cli::InputDocument;
use expamoeba::{ExponentialSum, IntMatrix, LatticeIso, Term};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn inputs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../inputs")
}

pub fn input_path(name: &str) -> PathBuf {
    inputs_dir().join(format!("{name}.json"))
}

/// Sum and isomorphism of a shipped input document.
pub fn load(name: &str) -> (ExponentialSum, LatticeIso) {
    let doc = InputDocument::from_path(&input_path(name)).expect("shipped input parses");
    let f = doc.to_sum().unwrap();
    let iso = doc.lattice_iso(&f).unwrap();
    (f, iso)
}

pub const EXAMPLES: [&str; 5] = ["ex1", "ex2", "ex3", "ex4", "ex5"];

/// Random sum on ℝ¹ with generators √2, √3 (rank 2), at most 8 terms,
/// exponents in [−3, 3]² and nonzero coefficients.
pub fn random_sum(rng: &mut ChaCha8Rng) -> ExponentialSum {
    loop {
        let len = rng.gen_range(3..=8);
        let mut exps: Vec<Vec<i64>> = Vec::new();
        while exps.len() < len {
            let e = vec![rng.gen_range(-3..=3), rng.gen_range(-3..=3)];
            if !exps.contains(&e) {
                exps.push(e);
            }
        }
        let terms = exps
            .into_iter()
            .map(|exponent| {
                let modulus = rng.gen_range(-2.0f64..2.0).exp();
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                Term {
                    exponent,
                    coeff: Complex64::from_polar(modulus, phase),
                }
            })
            .collect();
        let f = ExponentialSum::new(vec![vec![2f64.sqrt()], vec![3f64.sqrt()]], terms).unwrap();
        if f.lattice_iso().map(|iso| iso.rank() == 2).unwrap_or(false) {
            return f;
        }
    }
}

/// Random element of GL_r(ℤ) as a product of elementary matrices.
pub fn random_unimodular(r: usize, rng: &mut ChaCha8Rng) -> IntMatrix {
    let mut m: Vec<Vec<i64>> = (0..r)
        .map(|i| (0..r).map(|j| (i == j) as i64).collect())
        .collect();
    for _ in 0..6 {
        let a = rng.gen_range(0..r);
        let b = rng.gen_range(0..r);
        match rng.gen_range(0..3) {
            0 if a != b => {
                let k = rng.gen_range(-2..=2);
                let row = m[b].clone();
                for (x, y) in m[a].iter_mut().zip(row) {
                    *x += k * y;
                }
            }
            1 => m.swap(a, b),
            _ => m[a].iter_mut().for_each(|v| *v = -*v),
        }
    }
    IntMatrix::from_i64_rows(&m, r).unwrap()
}

/// Lattice points of a convex polygon by brute force over its bounding box,
/// using the sign of cross products along the counter-clockwise hull.
pub fn polygon_lattice_count(points: &[Vec<i64>]) -> usize {
    let hull = ccw_hull(points);
    let (x0, x1) = (
        hull.iter().map(|p| p[0]).min().unwrap(),
        hull.iter().map(|p| p[0]).max().unwrap(),
    );
    let (y0, y1) = (
        hull.iter().map(|p| p[1]).min().unwrap(),
        hull.iter().map(|p| p[1]).max().unwrap(),
    );
    let mut count = 0;
    for x in x0..=x1 {
        for y in y0..=y1 {
            let inside = (0..hull.len()).all(|i| {
                let a = &hull[i];
                let b = &hull[(i + 1) % hull.len()];
                (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]) >= 0
            });
            count += inside as usize;
        }
    }
    count
}

/// Gift wrapping; the points must not be collinear.
fn ccw_hull(points: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let start = points.iter().min().unwrap().clone();
    let mut hull = vec![start.clone()];
    let mut cur = start.clone();
    loop {
        let mut next = points.iter().find(|p| **p != cur).unwrap().clone();
        for p in points {
            let cross = (next[0] - cur[0]) * (p[1] - cur[1]) - (next[1] - cur[1]) * (p[0] - cur[0]);
            let further = (p[0] - cur[0]).pow(2) + (p[1] - cur[1]).pow(2)
                > (next[0] - cur[0]).pow(2) + (next[1] - cur[1]).pow(2);
            if cross < 0 || (cross == 0 && further) {
                next = p.clone();
            }
        }
        if next == start {
            return hull;
        }
        hull.push(next.clone());
        cur = next;
    }
}
