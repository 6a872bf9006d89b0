//! Exact integer linear algebra: Hermite normal form, lattice rank and the
//! group isomorphism `γ : Ξ_f → ℤʳ` with its associated real basis `ω`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Dense row-major matrix of arbitrary-precision integers.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from `i64` rows. `cols` is needed when `rows` is empty.
    pub fn from_i64_rows(rows: &[Vec<i64>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            data.extend(row.iter().map(|&v| BigInt::from(v)));
        }
        Ok(IntMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Leading `n` rows as a new matrix.
    pub fn top_rows(&self, n: usize) -> IntMatrix {
        IntMatrix {
            rows: n,
            cols: self.cols,
            data: self.data[..n * self.cols].to_vec(),
        }
    }

    pub fn to_i64_rows(&self) -> Result<Vec<Vec<i64>>> {
        (0..self.rows).map(|i| to_i64_vec(self.row(i))).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for v in &mut self.data[i * self.cols..(i + 1) * self.cols] {
            *v = -&*v;
        }
    }

    /// `row[i] -= q * row[p]`
    fn sub_multiple(&mut self, i: usize, p: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let delta = q * &self.data[p * self.cols + j];
            self.data[i * self.cols + j] -= delta;
        }
    }

    /// Replaces rows `(p, i)` by `(x·p + y·i, u·p + v·i)`.
    fn combine_rows(&mut self, p: usize, i: usize, coef: [&BigInt; 4]) {
        let [x, y, u, v] = coef;
        for j in 0..self.cols {
            let a = self.data[p * self.cols + j].clone();
            let b = self.data[i * self.cols + j].clone();
            self.data[p * self.cols + j] = x * &a + y * &b;
            self.data[i * self.cols + j] = u * &a + v * &b;
        }
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.to_string()).collect())
            .collect();
        write!(f, "IntMatrix{rows:?}")
    }
}

pub(crate) fn to_i64_vec(v: &[BigInt]) -> Result<Vec<i64>> {
    v.iter()
        .map(|x| {
            x.to_i64()
                .ok_or_else(|| Error::Overflow(format!("{x} does not fit in i64")))
        })
        .collect()
}

/// Extended gcd with `g >= 0` and `x·a + y·b = g`.
fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    let (mut old_t, mut t) = (BigInt::zero(), BigInt::one());
    while !r.is_zero() {
        let q = old_r.div_floor(&r);
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
        let next_t = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, next_t);
    }
    if old_r.is_negative() {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Row-style Hermite normal form.
///
/// Returns `(H, U)` with `U` unimodular and `U·K = H`. Nonzero rows of `H`
/// come first, pivots are positive and the entries above each pivot lie in
/// `[0, pivot)`.
pub fn hermite_normal_form(k: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = k.clone();
    let mut u = IntMatrix::identity(k.rows);
    let mut p = 0;
    for col in 0..k.cols {
        if p == k.rows {
            break;
        }
        for i in (p + 1)..k.rows {
            if h.get(i, col).is_zero() {
                continue;
            }
            let a = h.get(p, col).clone();
            let b = h.get(i, col).clone();
            let (g, x, y) = ext_gcd(&a, &b);
            let ua = -(&b / &g);
            let va = &a / &g;
            h.combine_rows(p, i, [&x, &y, &ua, &va]);
            u.combine_rows(p, i, [&x, &y, &ua, &va]);
        }
        if h.get(p, col).is_zero() {
            // whole column below p is zero; look for a later nonzero to swap in
            match ((p + 1)..k.rows).find(|&i| !h.get(i, col).is_zero()) {
                Some(i) => {
                    h.swap_rows(p, i);
                    u.swap_rows(p, i);
                }
                None => continue,
            }
        }
        if h.get(p, col).is_negative() {
            h.negate_row(p);
            u.negate_row(p);
        }
        let pivot = h.get(p, col).clone();
        for i in 0..p {
            let q = h.get(i, col).div_floor(&pivot);
            h.sub_multiple(i, p, &q);
            u.sub_multiple(i, p, &q);
        }
        p += 1;
    }
    (h, u)
}

/// Rank of the row lattice of `k`.
pub fn lattice_rank(k: &IntMatrix) -> usize {
    let (h, _) = hermite_normal_form(k);
    (0..h.rows)
        .filter(|&i| h.row(i).iter().any(|v| !v.is_zero()))
        .count()
}

/// Solves `target = Σ c_ℓ · echelon_row_ℓ` exactly; `None` when no integer
/// solution exists.
fn solve_echelon(echelon: &IntMatrix, target: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut rest: Vec<BigInt> = target.to_vec();
    let mut coeffs = Vec::with_capacity(echelon.rows);
    for l in 0..echelon.rows {
        let row = echelon.row(l);
        let pivot_col = row.iter().position(|v| !v.is_zero())?;
        let (q, r) = rest[pivot_col].div_rem(&row[pivot_col]);
        if !r.is_zero() {
            return None;
        }
        for (dst, v) in rest.iter_mut().zip(row) {
            *dst -= &q * v;
        }
        coeffs.push(q);
    }
    rest.iter().all(Zero::is_zero).then_some(coeffs)
}

/// Group isomorphism `γ : Ξ_f → ℤʳ` realized by an integer basis of the row
/// lattice of the exponent matrix.
#[derive(Clone, Debug)]
pub struct LatticeIso {
    rank: usize,
    /// r × m: basis rows over the declared generators.
    basis: IntMatrix,
    /// r × r echelon form of `basis` and the transform with `T·basis = echelon`.
    echelon: IntMatrix,
    transform: IntMatrix,
    generators: Vec<Vec<f64>>,
    omega: Vec<Vec<f64>>,
    images: Vec<Vec<i64>>,
}

impl LatticeIso {
    /// Canonical isomorphism: the basis is the nonzero part of the HNF.
    pub fn build(exponents: &IntMatrix, generators: &[Vec<f64>]) -> Result<Self> {
        let (h, _) = hermite_normal_form(exponents);
        let rank = (0..h.rows)
            .filter(|&i| h.row(i).iter().any(|v| !v.is_zero()))
            .count();
        Self::from_basis(exponents, h.top_rows(rank), generators)
    }

    /// Isomorphism whose basis rows are supplied by the caller. The rows must
    /// generate exactly the row lattice of `exponents`.
    pub fn with_basis(
        exponents: &IntMatrix,
        basis: IntMatrix,
        generators: &[Vec<f64>],
    ) -> Result<Self> {
        if basis.cols != exponents.cols {
            return Err(Error::DimensionMismatch {
                expected: exponents.cols,
                got: basis.cols,
            });
        }
        let rank = lattice_rank(exponents);
        let (hk, _) = hermite_normal_form(exponents);
        let (hb, _) = hermite_normal_form(&basis);
        if basis.rows != rank || hb.top_rows(rank) != hk.top_rows(rank) || !hb.is_zero_below(rank) {
            return Err(Error::InvalidSum(
                "basis does not generate the lattice spanned by the exponents".into(),
            ));
        }
        Self::from_basis(exponents, basis, generators)
    }

    fn from_basis(
        exponents: &IntMatrix,
        basis: IntMatrix,
        generators: &[Vec<f64>],
    ) -> Result<Self> {
        if generators.len() != exponents.cols {
            return Err(Error::DimensionMismatch {
                expected: exponents.cols,
                got: generators.len(),
            });
        }
        check_generators(generators)?;
        let (echelon, transform) = hermite_normal_form(&basis);
        let rank = basis.rows;
        let mut iso = LatticeIso {
            rank,
            omega: Vec::new(),
            images: Vec::new(),
            basis,
            echelon,
            transform,
            generators: generators.to_vec(),
        };
        iso.omega = iso.compute_omega();
        iso.images = (0..exponents.rows)
            .map(|i| {
                let g = iso
                    .to_gamma(exponents.row(i))
                    .ok_or(Error::NonIntegralSolve { row: i })?;
                to_i64_vec(&g)
            })
            .collect::<Result<_>>()?;
        Ok(iso)
    }

    fn compute_omega(&self) -> Vec<Vec<f64>> {
        let n = self.generators.first().map_or(0, Vec::len);
        (0..self.rank)
            .map(|l| {
                let mut w = vec![0.0; n];
                for (c, g) in self.basis.row(l).iter().zip(&self.generators) {
                    let c = c.to_f64().unwrap_or(f64::NAN);
                    for (wj, gj) in w.iter_mut().zip(g) {
                        *wj += c * gj;
                    }
                }
                w
            })
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ambient_dim(&self) -> usize {
        self.generators.first().map_or(0, Vec::len)
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    /// `ω_ℓ = γ⁻¹(e_ℓ)` as real vectors in ℝⁿ.
    pub fn omega(&self) -> &[Vec<f64>] {
        &self.omega
    }

    /// `γ` of each exponent row the isomorphism was built from, in input order.
    pub fn images(&self) -> &[Vec<i64>] {
        &self.images
    }

    /// `γ(k)` for an exponent vector over the generators; `None` if `k ∉ Ξ_f`.
    pub fn to_gamma(&self, k: &[BigInt]) -> Option<Vec<BigInt>> {
        if k.len() != self.basis.cols {
            return None;
        }
        let c = solve_echelon(&self.echelon, k)?;
        // k = cᵀ·E = cᵀ·T·B  ⇒  γ(k) = Tᵀ·c
        Some(
            (0..self.rank)
                .map(|l| {
                    (0..self.rank)
                        .map(|i| self.transform.get(i, l) * &c[i])
                        .sum()
                })
                .collect(),
        )
    }

    /// `γ⁻¹(g)` as an exponent vector over the generators.
    pub fn from_gamma(&self, g: &[i64]) -> Vec<BigInt> {
        let mut k = vec![BigInt::zero(); self.basis.cols];
        for (l, &gl) in g.iter().enumerate() {
            for (kj, b) in k.iter_mut().zip(self.basis.row(l)) {
                *kj += b * gl;
            }
        }
        k
    }

    /// `γ⁻¹(g)` as a real point of ℝⁿ: `Σ g_ℓ ω_ℓ`.
    pub fn gamma_to_real(&self, g: &[i64]) -> Vec<f64> {
        let mut x = vec![0.0; self.ambient_dim()];
        for (gl, w) in g.iter().zip(&self.omega) {
            for (xj, wj) in x.iter_mut().zip(w) {
                *xj += *gl as f64 * wj;
            }
        }
        x
    }

    /// Same group, isomorphism replaced by `U∘γ` for a unimodular `U`.
    pub fn reparameterize(&self, u: &IntMatrix) -> Result<LatticeIso> {
        if u.rows != self.rank || u.cols != self.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                got: u.rows,
            });
        }
        let (h, v) = hermite_normal_form(u);
        if h != IntMatrix::identity(self.rank) {
            return Err(Error::InvalidSum(
                "reparameterization is not unimodular".into(),
            ));
        }
        // γ' = Uγ  ⇒  k = Bᵀγ = Bᵀ U⁻¹ γ'  ⇒  B' = U⁻ᵀ B
        let basis = v.transpose().mul(&self.basis)?;
        let (echelon, transform) = hermite_normal_form(&basis);
        let mut iso = LatticeIso {
            rank: self.rank,
            basis,
            echelon,
            transform,
            generators: self.generators.clone(),
            omega: Vec::new(),
            images: Vec::new(),
        };
        iso.omega = iso.compute_omega();
        let imgs = IntMatrix::from_i64_rows(&self.images, self.rank)?;
        iso.images = imgs.mul(&u.transpose())?.to_i64_rows()?;
        Ok(iso)
    }
}

impl IntMatrix {
    fn is_zero_below(&self, r: usize) -> bool {
        self.data[r * self.cols..].iter().all(Zero::is_zero)
    }
}

/// Budget of integer vectors visited by the Z-independence search.
const INDEPENDENCE_SEARCH_BUDGET: u64 = 5_000_000;

/// Rejects generator matrices with a small integer relation `vᵀG ≈ 0`.
///
/// Searches `‖v‖∞ ≤ 10`, shrinking the radius when `21^m` exceeds the search
/// budget. Only half of the box is visited since `v` and `-v` are equivalent.
pub fn check_generators(generators: &[Vec<f64>]) -> Result<()> {
    let m = generators.len();
    if m == 0 {
        return Ok(());
    }
    let n = generators[0].len();
    if generators.iter().any(|g| g.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: generators
                .iter()
                .map(Vec::len)
                .find(|&l| l != n)
                .unwrap_or(0),
        });
    }
    if generators.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateGenerators("non-finite entry".into()));
    }
    let scale = generators
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::DegenerateGenerators(
            "all generators are zero".into(),
        ));
    }
    let tol = 1e-9 * scale;
    let mut radius: i64 = 10;
    while radius > 1
        && ((2 * radius + 1) as u64)
            .checked_pow(m as u32)
            .is_none_or(|c| c > INDEPENDENCE_SEARCH_BUDGET)
    {
        radius -= 1;
    }
    let side = 2 * radius + 1;
    let mut v = vec![-radius; m];
    loop {
        // lexicographically positive vectors only
        if let Some(first) = v.iter().find(|&&c| c != 0) {
            if *first > 0 {
                let combo_small = (0..n).all(|j| {
                    let s: f64 = v
                        .iter()
                        .zip(generators)
                        .map(|(&c, g)| c as f64 * g[j])
                        .sum();
                    s.abs() < tol
                });
                if combo_small {
                    return Err(Error::DegenerateGenerators(format!(
                        "integer relation {v:?} annihilates the generators"
                    )));
                }
            }
        }
        // odometer
        let mut i = 0;
        loop {
            if i == m {
                return Ok(());
            }
            v[i] += 1;
            if v[i] - (-radius) < side {
                break;
            }
            v[i] = -radius;
            i += 1;
        }
    }
}
