//! The Laurent polynomial `P` attached to `f`, the embedding `L`, torus
//! quadrature of the Ronkin function and component orders.
//!
//! `N_P(y)` is the mean of `ln|P|` over the torus `Log⁻¹(y)`; it is computed
//! with the tensor-product trapezoid rule, which converges geometrically for
//! `y` off the amoeba. On a complement component `N_P` is affine and its
//! gradient is the component order, an integer point of `Γ_P`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::exposum::{check_iso, dot, ExponentialSum};
use crate::lattice::LatticeIso;
use crate::{Error, Result};

/// Default quadrature nodes per torus axis.
pub const DEFAULT_QUADRATURE_NODES: usize = 64;
/// Central-difference step for gradients of `N_P`.
pub const GRADIENT_STEP: f64 = 1e-3;
/// Largest accepted distance between the gradient and its rounding.
pub const ORDER_TOLERANCE: f64 = 0.1;
/// Nodes with `|P|` below this fraction of the largest term modulus are singular.
pub const SINGULAR_MODULUS: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly {
    r: usize,
    terms: Vec<(Vec<i64>, Complex64)>,
}

impl LaurentPoly {
    pub fn new(r: usize, terms: Vec<(Vec<i64>, Complex64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidSum("Laurent polynomial without terms".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for (k, c) in &terms {
            if k.len() != r {
                return Err(Error::DimensionMismatch {
                    expected: r,
                    got: k.len(),
                });
            }
            if c.norm() == 0.0 {
                return Err(Error::InvalidSum("zero coefficient".into()));
            }
            if !seen.insert(k.clone()) {
                return Err(Error::InvalidSum(format!("duplicate exponent {k:?}")));
            }
        }
        Ok(LaurentPoly { r, terms })
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn terms(&self) -> &[(Vec<i64>, Complex64)] {
        &self.terms
    }

    /// `P(e^{y + iθ})`.
    pub fn eval(&self, y: &[f64], theta: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(k, c)| {
                let (re, im) = k
                    .iter()
                    .zip(y.iter().zip(theta))
                    .fold((0.0, 0.0), |(a, b), (&kl, (yl, tl))| {
                        (a + kl as f64 * yl, b + kl as f64 * tl)
                    });
                c * Complex64::from_polar(re.exp(), im)
            })
            .sum()
    }

    /// `|a_k| e^{⟨k,y⟩}` per term.
    pub fn term_moduli(&self, y: &[f64]) -> Vec<f64> {
        self.terms
            .iter()
            .map(|(k, c)| c.norm() * exp_dot(k, y))
            .collect()
    }

    /// Coefficients scaled to the torus `Log⁻¹(y)`: `a_k e^{⟨k,y⟩}`.
    pub(crate) fn scaled_coeffs(&self, y: &[f64]) -> Vec<Complex64> {
        self.terms.iter().map(|(k, c)| c * exp_dot(k, y)).collect()
    }

    fn check_point(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.r {
            return Err(Error::DimensionMismatch {
                expected: self.r,
                got: y.len(),
            });
        }
        Ok(())
    }
}

fn exp_dot(k: &[i64], y: &[f64]) -> f64 {
    k.iter()
        .zip(y)
        .map(|(&a, b)| a as f64 * b)
        .sum::<f64>()
        .exp()
}

/// `P(ζ) = Σ a(f,λ) ζ^{γ(λ)}`.
pub fn laurent_from(f: &ExponentialSum, iso: &LatticeIso) -> Result<LaurentPoly> {
    check_iso(f, iso)?;
    LaurentPoly::new(
        iso.rank(),
        f.terms()
            .iter()
            .zip(iso.images())
            .map(|(t, k)| (k.clone(), t.coeff))
            .collect(),
    )
}

/// `L(x) = (⟨x,ω_1⟩, …, ⟨x,ω_r⟩)`.
pub fn embed_l(iso: &LatticeIso, x: &[f64]) -> Vec<f64> {
    iso.omega().iter().map(|w| dot(x, w)).collect()
}

/// Phase tables `e^{i k_ℓ θ_j}` for a tensor grid on the r-torus. Nodes are
/// `θ_j = offset + 2πj/N`; the last axis varies fastest.
pub(crate) struct TorusGrid {
    nodes: usize,
    r: usize,
    /// `tables[t][ℓ][j]`
    tables: Vec<Vec<Vec<Complex64>>>,
}

impl TorusGrid {
    pub fn new(p: &LaurentPoly, nodes: usize, offset: f64) -> Self {
        let step = TAU / nodes as f64;
        let tables = p
            .terms
            .iter()
            .map(|(k, _)| {
                k.iter()
                    .map(|&kl| {
                        (0..nodes)
                            .map(|j| {
                                Complex64::from_polar(1.0, kl as f64 * (offset + step * j as f64))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        TorusGrid {
            nodes,
            r: p.r,
            tables,
        }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Number of rows (tuples of all axes but the last).
    pub fn rows(&self) -> usize {
        if self.r == 0 {
            1
        } else {
            self.nodes.pow(self.r as u32 - 1)
        }
    }

    pub fn row_len(&self) -> usize {
        if self.r == 0 {
            1
        } else {
            self.nodes
        }
    }

    /// Angles of node `(row, j)`.
    pub fn angles(&self, row: usize, j: usize, offset: f64) -> Vec<f64> {
        let step = TAU / self.nodes as f64;
        let mut idx = vec![0usize; self.r];
        let mut rem = row;
        for l in (0..self.r.saturating_sub(1)).rev() {
            idx[l] = rem % self.nodes;
            rem /= self.nodes;
        }
        if self.r > 0 {
            idx[self.r - 1] = j;
        }
        idx.iter().map(|&i| offset + step * i as f64).collect()
    }

    /// Values of `P` along one row, given the scaled coefficients.
    pub fn eval_row(&self, scaled: &[Complex64], row: usize, out: &mut Vec<Complex64>) {
        out.clear();
        out.resize(self.row_len(), Complex64::new(0.0, 0.0));
        let mut idx = vec![0usize; self.r.saturating_sub(1)];
        let mut rem = row;
        for l in (0..idx.len()).rev() {
            idx[l] = rem % self.nodes;
            rem /= self.nodes;
        }
        for (t, &a) in scaled.iter().enumerate() {
            let mut base = a;
            for (l, &j) in idx.iter().enumerate() {
                base *= self.tables[t][l][j];
            }
            if self.r == 0 {
                out[0] += base;
            } else {
                for (o, ph) in out.iter_mut().zip(&self.tables[t][self.r - 1]) {
                    *o += base * ph;
                }
            }
        }
    }
}

/// Pairwise summation; fixed association order.
pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n if n <= 8 => v.iter().sum(),
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

fn trapezoid_mean_log(
    p: &LaurentPoly,
    y: &[f64],
    nodes: usize,
    offset: f64,
) -> std::result::Result<f64, f64> {
    let grid = TorusGrid::new(p, nodes, offset);
    let scaled = p.scaled_coeffs(y);
    let scale = scaled.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let floor = SINGULAR_MODULUS * scale;
    let rows: Vec<std::result::Result<f64, f64>> = (0..grid.rows())
        .into_par_iter()
        .map_init(Vec::new, |buf, row| {
            grid.eval_row(&scaled, row, buf);
            let mut logs = Vec::with_capacity(buf.len());
            for v in buf.iter() {
                let m = v.norm();
                if m < floor {
                    return Err(m);
                }
                logs.push(m.ln());
            }
            Ok(pairwise_sum(&logs))
        })
        .collect();
    let mut sums = Vec::with_capacity(rows.len());
    for r in rows {
        sums.push(r?);
    }
    let count = (grid.rows() * grid.row_len()) as f64;
    Ok(pairwise_sum(&sums) / count)
}

/// Trapezoid estimate of `N_P(y)` with `nodes` points per torus axis.
///
/// A node hitting the zero set shifts the whole grid once by a fraction of
/// the spacing; a second hit is a [`Error::SingularSample`].
pub fn ronkin_np(p: &LaurentPoly, y: &[f64], nodes: usize) -> Result<f64> {
    p.check_point(y)?;
    if nodes < 8 {
        return Err(Error::InvalidSum(format!(
            "quadrature needs at least 8 nodes per axis, got {nodes}"
        )));
    }
    match trapezoid_mean_log(p, y, nodes, 0.0) {
        Ok(v) => Ok(v),
        Err(_) => {
            let jitter = 0.5 * (5f64.sqrt() - 1.0) * TAU / nodes as f64;
            trapezoid_mean_log(p, y, nodes, jitter).map_err(|modulus| Error::SingularSample {
                y: y.to_vec(),
                modulus,
            })
        }
    }
}

/// `N_P(y)` at `nodes` and `2·nodes`, with the difference as a convergence
/// diagnostic.
#[derive(Clone, Debug, Serialize)]
pub struct RonkinEstimate {
    pub value: f64,
    pub coarse: f64,
    pub difference: f64,
}

pub fn ronkin_np_checked(p: &LaurentPoly, y: &[f64], nodes: usize) -> Result<RonkinEstimate> {
    let coarse = ronkin_np(p, y, nodes)?;
    let value = ronkin_np(p, y, 2 * nodes)?;
    Ok(RonkinEstimate {
        value,
        coarse,
        difference: (value - coarse).abs(),
    })
}

/// `N_f(x) = N_P(L(x))`, which also equals the Jessen function `J_f(x)`.
pub fn ronkin_nf(f: &ExponentialSum, iso: &LatticeIso, x: &[f64], nodes: usize) -> Result<f64> {
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.len(),
        });
    }
    let p = laurent_from(f, iso)?;
    ronkin_np(&p, &embed_l(iso, x), nodes)
}

/// Central-difference gradient of `N_P` at `y`.
pub fn ronkin_gradient(p: &LaurentPoly, y: &[f64], nodes: usize) -> Result<Vec<f64>> {
    p.check_point(y)?;
    (0..p.r)
        .map(|l| {
            let mut up = y.to_vec();
            let mut down = y.to_vec();
            up[l] += GRADIENT_STEP;
            down[l] -= GRADIENT_STEP;
            Ok((ronkin_np(p, &up, nodes)? - ronkin_np(p, &down, nodes)?) / (2.0 * GRADIENT_STEP))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderResult {
    pub point: Vec<f64>,
    pub gradient_raw: Vec<f64>,
    pub order_gamma: Vec<i64>,
    pub order_spectrum: Vec<f64>,
    pub residual: f64,
}

/// Rounded gradient of `N_P` at `y` in γ-coordinates, with its residual.
pub(crate) fn order_at_y(
    p: &LaurentPoly,
    y: &[f64],
    nodes: usize,
) -> Result<(Vec<f64>, Vec<i64>, f64)> {
    let g = ronkin_gradient(p, y, nodes)?;
    let rounded: Vec<i64> = g.iter().map(|v| v.round() as i64).collect();
    let residual = g
        .iter()
        .zip(&rounded)
        .map(|(a, &b)| (a - b as f64).abs())
        .fold(0.0, f64::max);
    Ok((g, rounded, residual))
}

/// Order of the complement component containing `x`:
/// `grad N_f(x) = γ⁻¹(grad N_P(L(x)))`.
pub fn order_at(p: &LaurentPoly, iso: &LatticeIso, x: &[f64], nodes: usize) -> Result<OrderResult> {
    if p.rank() != iso.rank() {
        return Err(Error::DimensionMismatch {
            expected: iso.rank(),
            got: p.rank(),
        });
    }
    if x.len() != iso.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: iso.ambient_dim(),
            got: x.len(),
        });
    }
    let y = embed_l(iso, x);
    let (gradient_raw, order_gamma, residual) = order_at_y(p, &y, nodes)?;
    if residual.is_nan() || residual > ORDER_TOLERANCE {
        return Err(Error::OrderUnresolved {
            point: x.to_vec(),
            gradient: gradient_raw,
            residual,
        });
    }
    let order_spectrum = iso.gamma_to_real(&order_gamma);
    Ok(OrderResult {
        point: x.to_vec(),
        gradient_raw,
        order_gamma,
        order_spectrum,
        residual,
    })
}

/// Lebesgue measure of the unit ball in ℝʳ: `π^{r/2} / Γ(r/2 + 1)`.
pub fn unit_ball_volume(r: usize) -> f64 {
    let target = r as f64 / 2.0 + 1.0;
    let (mut x, mut gamma) = if r.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (0.5, PI.sqrt())
    };
    while x < target - 0.25 {
        gamma *= x;
        x += 1.0;
    }
    PI.powf(r as f64 / 2.0) / gamma
}

/// `υ(f,γ) = 2⁻ʳ κ_r (√r + 2r·max_k ‖k‖∞)ʳ` over `k ∈ γ(Sp f)`.
pub fn ronkin_bound(f: &ExponentialSum, iso: &LatticeIso) -> Result<f64> {
    check_iso(f, iso)?;
    Ok(ronkin_bound_of(iso))
}

pub(crate) fn ronkin_bound_of(iso: &LatticeIso) -> f64 {
    let r = iso.rank();
    let max_norm = iso
        .images()
        .iter()
        .flat_map(|k| k.iter().map(|v| v.unsigned_abs()))
        .max()
        .unwrap_or(0) as f64;
    let rf = r as f64;
    2f64.powi(-(r as i32)) * unit_ball_volume(r) * (rf.sqrt() + 2.0 * rf * max_norm).powi(r as i32)
}

/// Dominant-monomial certificate: `Some(k*)` when one term's modulus at `y`
/// exceeds the sum of all the others. `None` is inconclusive.
pub fn lopsided_order(p: &LaurentPoly, y: &[f64]) -> Option<Vec<i64>> {
    if y.len() != p.r {
        return None;
    }
    let moduli = p.term_moduli(y);
    let (best, &top) = moduli
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    let rest: f64 = moduli
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, m)| m)
        .sum();
    (top > rest).then(|| p.terms[best].0.clone())
}
