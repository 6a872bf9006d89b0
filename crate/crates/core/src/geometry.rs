//! Exact lattice polytopes in ℤʳ (r ≤ 3): hulls, half-spaces, lattice points
//! and the order set `Λ_f`.

use num_integer::Integer;

use crate::exposum::{check_iso, ExponentialSum};
use crate::lattice::{lattice_rank, IntMatrix, LatticeIso};
use crate::lp::max_separation;
use crate::{Error, Result};

/// Default cap on the number of bounding-box points visited by
/// [`lattice_points`].
pub const DEFAULT_BOX_CAP: u128 = 100_000_000;

/// `{y : ⟨normal, y⟩ ≤ offset}` with a primitive integer normal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfSpace {
    pub normal: Vec<i64>,
    pub offset: i64,
}

impl HalfSpace {
    pub fn contains(&self, y: &[i64]) -> bool {
        dot_i(&self.normal, y) <= self.offset as i128
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticePolytope {
    dim: usize,
    affine_dim: usize,
    /// Extreme points; counter-clockwise when the hull is a polygon in ℤ².
    vertices: Vec<Vec<i64>>,
    /// Equalities of lower-dimensional hulls appear as opposite pairs.
    halfspaces: Vec<HalfSpace>,
}

impl LatticePolytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn affine_dim(&self) -> usize {
        self.affine_dim
    }

    pub fn vertices(&self) -> &[Vec<i64>] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn contains(&self, y: &[i64]) -> bool {
        y.len() == self.dim && self.halfspaces.iter().all(|h| h.contains(y))
    }
}

fn dot_i(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn cross(a: &[i64], b: &[i64]) -> Vec<i64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn primitive(v: Vec<i64>) -> Vec<i64> {
    let g = v.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    if g <= 1 {
        v
    } else {
        v.into_iter().map(|x| x / g).collect()
    }
}

fn is_zero(v: &[i64]) -> bool {
    v.iter().all(|&x| x == 0)
}

/// Half-space with normal `normal` through the extreme point in that direction.
fn supporting(normal: Vec<i64>, pts: &[Vec<i64>]) -> HalfSpace {
    let normal = primitive(normal);
    let offset = pts.iter().map(|p| dot_i(&normal, p)).max().unwrap_or(0);
    HalfSpace {
        normal,
        offset: offset as i64,
    }
}

fn equality_pair(normal: Vec<i64>, p: &[i64]) -> [HalfSpace; 2] {
    let normal = primitive(normal);
    let offset = dot_i(&normal, p) as i64;
    let neg: Vec<i64> = normal.iter().map(|x| -x).collect();
    [
        HalfSpace { normal, offset },
        HalfSpace {
            normal: neg,
            offset: -offset,
        },
    ]
}

/// Andrew's monotone chain on 2-d points; strictly convex, counter-clockwise.
fn hull_2d(pts: &[[i64; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by_key(|&i| pts[i]);
    idx.dedup_by_key(|i| pts[*i]);
    if idx.len() < 3 {
        return idx;
    }
    let turn = |o: usize, a: usize, b: usize| -> i128 {
        let (o, a, b) = (pts[o], pts[a], pts[b]);
        (a[0] - o[0]) as i128 * (b[1] - o[1]) as i128
            - (a[1] - o[1]) as i128 * (b[0] - o[0]) as i128
    };
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for &i in &idx {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], i) <= 0 {
            hull.pop();
        }
        hull.push(i);
    }
    let lower = hull.len() + 1;
    for &i in idx.iter().rev().skip(1) {
        while hull.len() >= lower && turn(hull[hull.len() - 2], hull[hull.len() - 1], i) <= 0 {
            hull.pop();
        }
        hull.push(i);
    }
    hull.pop();
    hull
}

/// Exact convex hull of integer points in ℤʳ, `1 ≤ r ≤ 3`.
pub fn convex_hull(points: &[Vec<i64>]) -> Result<LatticePolytope> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidSum("convex hull of an empty set".into()))?;
    let r = first.len();
    if !(1..=3).contains(&r) {
        return Err(Error::UnsupportedRank(r));
    }
    if let Some(p) = points.iter().find(|p| p.len() != r) {
        return Err(Error::DimensionMismatch {
            expected: r,
            got: p.len(),
        });
    }
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    let base = pts[0].clone();
    let diffs: Vec<Vec<i64>> = pts.iter().skip(1).map(|p| sub(p, &base)).collect();
    let affine_dim = lattice_rank(&IntMatrix::from_i64_rows(&diffs, r)?);

    let (vertices, halfspaces) = match affine_dim {
        0 => {
            let mut hs = Vec::new();
            for i in 0..r {
                let mut e = vec![0; r];
                e[i] = 1;
                hs.extend(equality_pair(e, &base));
            }
            (vec![base.clone()], hs)
        }
        1 => segment(&pts, &diffs, r),
        2 => polygon(&pts, &diffs, r),
        _ => polyhedron(&pts),
    };
    let mut halfspaces = halfspaces;
    halfspaces.sort();
    halfspaces.dedup();
    Ok(LatticePolytope {
        dim: r,
        affine_dim,
        vertices,
        halfspaces,
    })
}

fn segment(pts: &[Vec<i64>], diffs: &[Vec<i64>], r: usize) -> (Vec<Vec<i64>>, Vec<HalfSpace>) {
    let dir = primitive(diffs.iter().find(|d| !is_zero(d)).cloned().unwrap());
    let lo = pts.iter().min_by_key(|p| dot_i(&dir, p)).unwrap().clone();
    let hi = pts.iter().max_by_key(|p| dot_i(&dir, p)).unwrap().clone();
    let mut hs = vec![
        supporting(dir.clone(), pts),
        supporting(dir.iter().map(|x| -x).collect(), pts),
    ];
    match r {
        1 => {}
        2 => hs.extend(equality_pair(vec![-dir[1], dir[0]], &lo)),
        _ => {
            let mut normals: Vec<Vec<i64>> = Vec::new();
            for i in 0..3 {
                let mut e = vec![0; 3];
                e[i] = 1;
                let c = primitive(cross(&dir, &e));
                if is_zero(&c) {
                    continue;
                }
                if normals.iter().all(|n| !is_zero(&cross(n, &c))) {
                    normals.push(c);
                }
                if normals.len() == 2 {
                    break;
                }
            }
            for n in normals {
                hs.extend(equality_pair(n, &lo));
            }
        }
    }
    (vec![lo, hi], hs)
}

fn polygon(pts: &[Vec<i64>], diffs: &[Vec<i64>], r: usize) -> (Vec<Vec<i64>>, Vec<HalfSpace>) {
    if r == 2 {
        let flat: Vec<[i64; 2]> = pts.iter().map(|p| [p[0], p[1]]).collect();
        let hull = hull_2d(&flat);
        let verts: Vec<Vec<i64>> = hull.iter().map(|&i| pts[i].clone()).collect();
        let hs = (0..verts.len())
            .map(|i| {
                let a = &verts[i];
                let b = &verts[(i + 1) % verts.len()];
                // outward normal of a counter-clockwise edge
                supporting(vec![b[1] - a[1], a[0] - b[0]], pts)
            })
            .collect();
        return (verts, hs);
    }
    // planar set in ℤ³
    let d1 = diffs.iter().find(|d| !is_zero(d)).unwrap();
    let plane = diffs
        .iter()
        .map(|d| cross(d1, d))
        .find(|c| !is_zero(c))
        .map(primitive)
        .unwrap();
    let drop = (0..3).max_by_key(|&i| plane[i].abs()).unwrap();
    let keep: Vec<usize> = (0..3).filter(|&i| i != drop).collect();
    let flat: Vec<[i64; 2]> = pts.iter().map(|p| [p[keep[0]], p[keep[1]]]).collect();
    let hull = hull_2d(&flat);
    let verts: Vec<Vec<i64>> = hull.iter().map(|&i| pts[i].clone()).collect();
    let mut hs: Vec<HalfSpace> = equality_pair(plane.clone(), &verts[0]).to_vec();
    for i in 0..verts.len() {
        let a = &verts[i];
        let b = &verts[(i + 1) % verts.len()];
        let mut n = primitive(cross(&sub(b, a), &plane));
        // orient outward
        if pts.iter().any(|p| dot_i(&n, p) > dot_i(&n, a)) {
            n = n.iter().map(|x| -x).collect();
        }
        hs.push(supporting(n, pts));
    }
    (verts, hs)
}

fn polyhedron(pts: &[Vec<i64>]) -> (Vec<Vec<i64>>, Vec<HalfSpace>) {
    let mut facets: Vec<HalfSpace> = Vec::new();
    let k = pts.len();
    for i in 0..k {
        for j in (i + 1)..k {
            for l in (j + 1)..k {
                let n = cross(&sub(&pts[j], &pts[i]), &sub(&pts[l], &pts[i]));
                if is_zero(&n) {
                    continue;
                }
                let n = primitive(n);
                let off = dot_i(&n, &pts[i]);
                let above = pts.iter().any(|p| dot_i(&n, p) > off);
                let below = pts.iter().any(|p| dot_i(&n, p) < off);
                match (above, below) {
                    (false, _) => facets.push(HalfSpace {
                        normal: n,
                        offset: off as i64,
                    }),
                    (true, false) => facets.push(HalfSpace {
                        normal: n.iter().map(|x| -x).collect(),
                        offset: -off as i64,
                    }),
                    _ => {}
                }
            }
        }
    }
    facets.sort();
    facets.dedup();
    let verts = pts
        .iter()
        .filter(|p| {
            let tight: Vec<Vec<i64>> = facets
                .iter()
                .filter(|h| dot_i(&h.normal, p) == h.offset as i128)
                .map(|h| h.normal.clone())
                .collect();
            !tight.is_empty()
                && lattice_rank(&IntMatrix::from_i64_rows(&tight, 3).expect("3 columns")) == 3
        })
        .cloned()
        .collect();
    (verts, facets)
}

/// All integer points of the polytope, sorted lexicographically.
pub fn lattice_points(poly: &LatticePolytope) -> Result<Vec<Vec<i64>>> {
    lattice_points_capped(poly, DEFAULT_BOX_CAP)
}

pub fn lattice_points_capped(poly: &LatticePolytope, cap: u128) -> Result<Vec<Vec<i64>>> {
    let r = poly.dim;
    let lo: Vec<i64> = (0..r)
        .map(|i| poly.vertices.iter().map(|v| v[i]).min().unwrap())
        .collect();
    let hi: Vec<i64> = (0..r)
        .map(|i| poly.vertices.iter().map(|v| v[i]).max().unwrap())
        .collect();
    let volume = lo
        .iter()
        .zip(&hi)
        .try_fold(1u128, |acc, (a, b)| acc.checked_mul((b - a) as u128 + 1))
        .unwrap_or(u128::MAX);
    if volume > cap {
        return Err(Error::BoxTooLarge { volume, cap });
    }
    let mut out = Vec::new();
    let mut y = lo.clone();
    loop {
        if poly.contains(&y) {
            out.push(y.clone());
        }
        // odometer, last coordinate fastest, gives lexicographic order
        let mut i = r;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if y[i] < hi[i] {
                y[i] += 1;
                break;
            }
            y[i] = lo[i];
        }
    }
}

/// `h(y) = max_v ⟨y, v⟩` over the vertices.
pub fn support_function(poly: &LatticePolytope, y: &[f64]) -> f64 {
    poly.vertices
        .iter()
        .map(|v| v.iter().zip(y).map(|(&a, b)| a as f64 * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `Λ_f` in γ-coordinates together with the real points `γ⁻¹(k)`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct LambdaSet {
    pub points_gamma: Vec<Vec<i64>>,
    pub points_spectrum: Vec<Vec<f64>>,
}

impl LambdaSet {
    pub fn len(&self) -> usize {
        self.points_gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points_gamma.is_empty()
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        self.points_gamma
            .binary_search_by(|p| p.as_slice().cmp(k))
            .is_ok()
    }
}

/// `Γ_P = conv(γ(Sp f))`.
pub fn gamma_polytope(iso: &LatticeIso) -> Result<LatticePolytope> {
    convex_hull(iso.images())
}

pub fn lambda_set(f: &ExponentialSum, iso: &LatticeIso) -> Result<LambdaSet> {
    check_iso(f, iso)?;
    let poly = gamma_polytope(iso)?;
    let points_gamma = lattice_points(&poly)?;
    let points_spectrum = points_gamma.iter().map(|k| iso.gamma_to_real(k)).collect();
    Ok(LambdaSet {
        points_gamma,
        points_spectrum,
    })
}

/// `card(Γ_f ∩ ℤⁿ)` when the spectrum lies in ℤⁿ, otherwise `None`.
pub fn integer_newton_lattice_count(f: &ExponentialSum) -> Result<Option<usize>> {
    let mut pts = Vec::with_capacity(f.len());
    for lambda in f.spectrum() {
        let rounded: Vec<f64> = lambda.iter().map(|v| v.round()).collect();
        if lambda
            .iter()
            .zip(&rounded)
            .any(|(a, b)| (a - b).abs() > 1e-9)
        {
            return Ok(None);
        }
        pts.push(rounded.iter().map(|&v| v as i64).collect::<Vec<i64>>());
    }
    let poly = convex_hull(&pts)?;
    Ok(Some(lattice_points(&poly)?.len()))
}

/// Separation margin of `p` from `conv(points)`: positive iff `p` is outside.
pub fn hull_separation(p: &[f64], points: &[Vec<f64>]) -> f64 {
    let refs: Vec<&[f64]> = points.iter().map(Vec::as_slice).collect();
    max_separation(p, &refs).margin
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exposum::fixtures::*;

    fn pts(v: &[&[i64]]) -> Vec<Vec<i64>> {
        v.iter().map(|p| p.to_vec()).collect()
    }

    /// Independent lattice-point oracle for polygons: a point is inside iff
    /// it is not strictly separated by any direction in a dense set.
    fn inside_bruteforce(p: &[i64], verts: &[Vec<i64>]) -> bool {
        let pf: Vec<f64> = p.iter().map(|&v| v as f64).collect();
        let vf: Vec<Vec<f64>> = verts
            .iter()
            .map(|v| v.iter().map(|&x| x as f64).collect())
            .collect();
        hull_separation(&pf, &vf) <= 1e-9
    }

    #[test]
    fn triangle() {
        let poly = convex_hull(&pts(&[&[0, 0], &[1, 0], &[0, 1]])).unwrap();
        assert_eq!(poly.vertices().len(), 3);
        let mut hs: Vec<_> = poly.halfspaces().to_vec();
        hs.sort();
        assert_eq!(
            hs,
            vec![
                HalfSpace {
                    normal: vec![-1, 0],
                    offset: 0
                },
                HalfSpace {
                    normal: vec![0, -1],
                    offset: 0
                },
                HalfSpace {
                    normal: vec![1, 1],
                    offset: 1
                },
            ]
        );
    }

    #[test]
    fn example5_quadrilateral() {
        let poly = convex_hull(&pts(&[&[0, 0], &[1, 0], &[-1, 2], &[0, 2], &[0, 1]])).unwrap();
        let mut v = poly.vertices().to_vec();
        v.sort();
        assert_eq!(v, pts(&[&[-1, 2], &[0, 0], &[0, 2], &[1, 0]]));
        let lp = lattice_points(&poly).unwrap();
        assert_eq!(lp, pts(&[&[-1, 2], &[0, 0], &[0, 1], &[0, 2], &[1, 0]]));
        assert_eq!(support_function(&poly, &[1.0, 0.0]), 1.0);
        assert_eq!(support_function(&poly, &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn collinear_points() {
        let poly = convex_hull(&pts(&[&[0, 0], &[2, 0], &[1, 0]])).unwrap();
        assert_eq!(poly.affine_dim(), 1);
        let mut v = poly.vertices().to_vec();
        v.sort();
        assert_eq!(v, pts(&[&[0, 0], &[2, 0]]));
        assert_eq!(lattice_points(&poly).unwrap().len(), 3);
        let unit = convex_hull(&pts(&[&[0, 0], &[1, 0]])).unwrap();
        assert_eq!(lattice_points(&unit).unwrap().len(), 2);
        let diag = convex_hull(&pts(&[&[0, 0], &[4, 6]])).unwrap();
        assert_eq!(
            lattice_points(&diag).unwrap(),
            pts(&[&[0, 0], &[2, 3], &[4, 6]])
        );
    }

    #[test]
    fn example3_triangle_has_ten_points() {
        let poly = convex_hull(&pts(&[
            &[0, 0],
            &[1, 0],
            &[2, 0],
            &[3, 0],
            &[0, 1],
            &[0, 2],
            &[0, 3],
            &[1, 2],
            &[2, 1],
            &[1, 1],
        ]))
        .unwrap();
        assert_eq!(poly.vertices().len(), 3);
        assert_eq!(lattice_points(&poly).unwrap().len(), 10);
    }

    #[test]
    fn unit_square_support() {
        let poly = convex_hull(&pts(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]])).unwrap();
        assert_eq!(support_function(&poly, &[1.0, 1.0]), 2.0);
    }

    #[test]
    fn one_dimensional_and_point() {
        let poly = convex_hull(&pts(&[&[3], &[-2], &[0]])).unwrap();
        assert_eq!(lattice_points(&poly).unwrap().len(), 6);
        let poly = convex_hull(&pts(&[&[4, 4]])).unwrap();
        assert_eq!(poly.affine_dim(), 0);
        assert_eq!(lattice_points(&poly).unwrap(), pts(&[&[4, 4]]));
    }

    #[test]
    fn three_dimensional_hulls() {
        let cube: Vec<Vec<i64>> = (0..8)
            .map(|i| vec![i & 1, (i >> 1) & 1, (i >> 2) & 1])
            .collect();
        let mut with_center = cube.clone();
        with_center.push(vec![0, 0, 0]);
        let poly = convex_hull(&with_center).unwrap();
        assert_eq!(poly.vertices().len(), 8);
        assert_eq!(poly.halfspaces().len(), 6);
        assert_eq!(lattice_points(&poly).unwrap().len(), 8);

        let simplex = convex_hull(&pts(&[&[0, 0, 0], &[2, 0, 0], &[0, 2, 0], &[0, 0, 2]])).unwrap();
        assert_eq!(lattice_points(&simplex).unwrap().len(), 10);

        let planar = convex_hull(&pts(&[&[0, 0, 0], &[2, 0, 2], &[0, 2, 0], &[1, 1, 1]])).unwrap();
        assert_eq!(planar.affine_dim(), 2);
        assert_eq!(planar.vertices().len(), 3);
        // triangle (0,0,0),(2,0,2),(0,2,0) in the plane x = z: points (a,b,a), a+b ≤ 2
        assert_eq!(lattice_points(&planar).unwrap().len(), 6);

        let line = convex_hull(&pts(&[&[0, 0, 0], &[3, 3, 3]])).unwrap();
        assert_eq!(lattice_points(&line).unwrap().len(), 4);
    }

    #[test]
    fn rank_four_rejected() {
        assert!(matches!(
            convex_hull(&pts(&[&[0, 0, 0, 0]])),
            Err(Error::UnsupportedRank(4))
        ));
    }

    #[test]
    fn box_cap() {
        let poly = convex_hull(&pts(&[&[0, 0], &[1000, 0], &[0, 1000]])).unwrap();
        assert!(matches!(
            lattice_points_capped(&poly, 1000),
            Err(Error::BoxTooLarge { .. })
        ));
    }

    #[test]
    fn lambda_sets_of_examples() {
        let f = example1();
        let iso = f.lattice_iso().unwrap();
        assert_eq!(lambda_set(&f, &iso).unwrap().len(), 3);

        let f = example5();
        let iso = f.lattice_iso().unwrap();
        let lam = lambda_set(&f, &iso).unwrap();
        assert_eq!(lam.len(), 5);
        assert_eq!(integer_newton_lattice_count(&f).unwrap(), Some(15));
    }

    #[test]
    fn intro_example_counts() {
        let f = sum(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            &[
                (&[0, 0], 2.0),
                (&[2, 0], 1.0),
                (&[0, 2], 1.0),
                (&[4, 4], 1.0),
            ],
        );
        let iso = f.lattice_iso().unwrap();
        assert_eq!(lambda_set(&f, &iso).unwrap().len(), 5);
        // Pick: area 8, 8 boundary points, 5 interior points
        assert_eq!(integer_newton_lattice_count(&f).unwrap(), Some(13));
        assert_eq!(integer_newton_lattice_count(&example1()).unwrap(), None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn hull_contains_inputs_and_matches_lp_oracle(
                raw in proptest::collection::vec((-4i64..5, -4i64..5), 1..8)
            ) {
                let p: Vec<Vec<i64>> = raw.iter().map(|&(a, b)| vec![a, b]).collect();
                let poly = convex_hull(&p).unwrap();
                for q in &p {
                    prop_assert!(poly.contains(q));
                }
                let again = convex_hull(poly.vertices()).unwrap();
                let (mut a, mut b) = (again.vertices().to_vec(), poly.vertices().to_vec());
                a.sort();
                b.sort();
                prop_assert_eq!(a, b);
                let lp = lattice_points(&poly).unwrap();
                for x in -5i64..6 {
                    for y in -5i64..6 {
                        let inside = inside_bruteforce(&[x, y], &p);
                        prop_assert_eq!(inside, lp.contains(&vec![x, y]), "point ({}, {})", x, y);
                    }
                }
            }
        }
    }
}
