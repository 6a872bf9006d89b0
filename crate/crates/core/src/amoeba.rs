//! Amoeba membership along `L(ℝⁿ)`, complement-component scans, the `ρ(f)`
//! estimate and the bound-chain report.
//!
//! A point `x` lies in the amoeba of `f` iff some character perturbation
//! `f_χ` vanishes at `x`, i.e. iff `min_θ |P(e^{L(x)+iθ})| = 0`. Membership is
//! decided in three steps:
//!
//! 1. a dominant monomial at `L(x)` certifies the complement (and the order);
//! 2. otherwise `|P|` is sampled on a θ-grid; when a Lipschitz bound shows the
//!    grid minimum cannot fall below the threshold the point is complement;
//! 3. otherwise the best grid nodes are refined by Levenberg–Marquardt and the
//!    refined minimum is compared against the threshold.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exposum::{check_iso, newton_vertex_witnesses, ExponentialSum, TorusPoint};
use crate::geometry::{gamma_polytope, integer_newton_lattice_count, lambda_set, LambdaSet};
use crate::lattice::LatticeIso;
use crate::ronkin::{
    embed_l, laurent_from, lopsided_order, order_at, ronkin_bound_of, LaurentPoly, TorusGrid,
    DEFAULT_QUADRATURE_NODES,
};
use crate::unionfind::UnionFind;
use crate::{Error, Result};

pub const DEFAULT_RESOLUTION: usize = 400;
pub const DEFAULT_THETA_GRID: usize = 64;
/// `min_θ |f_χ(x)|` below this fraction of the largest term modulus is amoeba.
pub const DEFAULT_THRESHOLD: f64 = 1e-3;
pub const MIN_THETA_GRID: usize = 16;
/// Relative padding of the automatic scan box on each side.
pub const BOX_PADDING: f64 = 0.2;

const REFINE_STARTS: usize = 16;
const REFINE_ITERATIONS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipStatus {
    CertifiedComplement,
    LikelyAmoeba,
    LikelyComplement,
}

impl MembershipStatus {
    pub fn is_amoeba(self) -> bool {
        self == MembershipStatus::LikelyAmoeba
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipVerdict {
    pub point: Vec<f64>,
    pub status: MembershipStatus,
    /// `min |f_χ(x)|` relative to the largest term modulus. For certified
    /// points this is the lopsidedness lower bound `(top − rest)/top`.
    pub min_modulus: f64,
    pub order: Option<Vec<i64>>,
}

/// Reusable membership tester for one Laurent polynomial.
pub(crate) struct MembershipProbe<'a> {
    p: &'a LaurentPoly,
    grid: TorusGrid,
    threshold: f64,
    /// `‖k‖₂` per term, for the Lipschitz bound in θ.
    knorm: Vec<f64>,
}

impl<'a> MembershipProbe<'a> {
    pub fn new(p: &'a LaurentPoly, theta_grid: usize, threshold: f64) -> Result<Self> {
        if theta_grid < MIN_THETA_GRID {
            return Err(Error::InvalidSum(format!(
                "theta grid needs at least {MIN_THETA_GRID} nodes per axis, got {theta_grid}"
            )));
        }
        let knorm = p
            .terms()
            .iter()
            .map(|(k, _)| k.iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt())
            .collect();
        Ok(MembershipProbe {
            p,
            grid: TorusGrid::new(p, theta_grid, 0.0),
            threshold,
            knorm,
        })
    }

    pub fn classify(&self, y: &[f64]) -> (MembershipStatus, f64, Option<Vec<i64>>) {
        if let Some(order) = lopsided_order(self.p, y) {
            let m = self.p.term_moduli(y);
            let top = m.iter().cloned().fold(0.0, f64::max);
            let rest: f64 = m.iter().sum::<f64>() - top;
            return (
                MembershipStatus::CertifiedComplement,
                (top - rest) / top,
                Some(order),
            );
        }
        let ratio = self.min_modulus_ratio(y);
        let status = if ratio < self.threshold {
            MembershipStatus::LikelyAmoeba
        } else {
            MembershipStatus::LikelyComplement
        };
        (status, ratio, None)
    }

    /// `min_θ |P(e^{y+iθ})|` divided by the largest term modulus.
    pub fn min_modulus_ratio(&self, y: &[f64]) -> f64 {
        let scaled = self.p.scaled_coeffs(y);
        let top = scaled.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut values = Vec::with_capacity(self.grid.rows() * self.grid.row_len());
        let mut buf = Vec::new();
        for row in 0..self.grid.rows() {
            self.grid.eval_row(&scaled, row, &mut buf);
            values.extend(buf.iter().map(|v| v.norm()));
        }
        let grid_min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let r = self.p.rank();
        let lipschitz: f64 = scaled
            .iter()
            .zip(&self.knorm)
            .map(|(c, k)| c.norm() * k)
            .sum();
        let reach = lipschitz * PI / self.grid.nodes() as f64 * (r as f64).sqrt();
        let target = self.threshold * top;
        if r == 0 || grid_min - reach > target {
            return grid_min / top;
        }
        // a zero lies within half a cell diagonal of a node with |P| ≤ reach
        let mut starts: Vec<(f64, usize)> = (0..values.len())
            .filter(|&i| values[i] <= target + reach && self.is_local_min(&values, i))
            .map(|i| (values[i], i))
            .collect();
        starts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        starts.truncate(REFINE_STARTS);
        let mut min = grid_min;
        let n = self.grid.row_len();
        for (_, i) in starts {
            let theta = self.grid.angles(i / n, i % n, 0.0);
            min = min.min(refine_min(self.p, &scaled, theta));
            if min < target {
                break;
            }
        }
        min / top
    }

    /// Node `i` is no larger than its 2r periodic axis neighbours.
    fn is_local_min(&self, values: &[f64], i: usize) -> bool {
        let n = self.grid.nodes();
        let r = self.p.rank();
        let mut stride = 1;
        for _ in 0..r {
            let digit = (i / stride) % n;
            let up = i - digit * stride + ((digit + 1) % n) * stride;
            let down = i - digit * stride + ((digit + n - 1) % n) * stride;
            if values[up] < values[i] || values[down] < values[i] {
                return false;
            }
            stride *= n;
        }
        true
    }
}

/// Levenberg–Marquardt descent of `|P|²` over θ, treating `P` as a map
/// `ℝʳ → ℝ²`.
fn refine_min(p: &LaurentPoly, scaled: &[Complex64], mut theta: Vec<f64>) -> f64 {
    let r = theta.len();
    let eval = |th: &[f64]| -> (Complex64, Vec<Complex64>) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut d = vec![Complex64::new(0.0, 0.0); r];
        for ((k, _), a) in p.terms().iter().zip(scaled) {
            let phase: f64 = k.iter().zip(th).map(|(&kl, t)| kl as f64 * t).sum();
            let term = a * Complex64::from_polar(1.0, phase);
            v += term;
            for (dl, &kl) in d.iter_mut().zip(k) {
                *dl += Complex64::new(0.0, kl as f64) * term;
            }
        }
        (v, d)
    };
    let (mut value, mut deriv) = eval(&theta);
    let mut mu = 1e-3;
    for _ in 0..REFINE_ITERATIONS {
        // normal equations (JᵀJ + μ·tr(JᵀJ)/r·I) δ = −JᵀF
        let mut jtj = vec![0.0; r * r];
        let mut jtf = vec![0.0; r];
        for a in 0..r {
            for b in 0..r {
                jtj[a * r + b] = deriv[a].re * deriv[b].re + deriv[a].im * deriv[b].im;
            }
            jtf[a] = deriv[a].re * value.re + deriv[a].im * value.im;
        }
        let trace: f64 = (0..r).map(|a| jtj[a * r + a]).sum::<f64>() / r as f64;
        if trace == 0.0 {
            break;
        }
        let mut accepted = false;
        for _ in 0..12 {
            let mut m = jtj.clone();
            for a in 0..r {
                m[a * r + a] += mu * trace;
            }
            let Some(step) = solve_small(m, jtf.iter().map(|v| -v).collect()) else {
                mu *= 10.0;
                continue;
            };
            let cand: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + s).collect();
            let (cv, cd) = eval(&cand);
            if cv.norm() < value.norm() {
                theta = cand;
                value = cv;
                deriv = cd;
                mu = (mu * 0.1).max(1e-12);
                accepted = true;
                break;
            }
            mu *= 10.0;
        }
        if !accepted || value.norm() == 0.0 {
            break;
        }
    }
    value.norm()
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn solve_small(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv =
            (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        for i in (col + 1)..n {
            let f = a[i * n + col] / a[col * n + col];
            for k in col..n {
                a[i * n + k] -= f * a[col * n + k];
            }
            b[i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| a[i * n + k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i * n + i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Classifies `x ∈ ℝⁿ` as amoeba / complement of `f`.
pub fn membership(
    f: &ExponentialSum,
    iso: &LatticeIso,
    x: &[f64],
    theta_grid: usize,
    threshold: f64,
) -> Result<MembershipVerdict> {
    check_iso(f, iso)?;
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.len(),
        });
    }
    let p = laurent_from(f, iso)?;
    let probe = MembershipProbe::new(&p, theta_grid, threshold)?;
    let (status, min_modulus, order) = probe.classify(&embed_l(iso, x));
    Ok(MembershipVerdict {
        point: x.to_vec(),
        status,
        min_modulus,
        order,
    })
}

/// Axis-aligned box in ℝⁿ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ScanBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(a, b)| a >= b || !a.is_finite() || !b.is_finite())
        {
            return Err(Error::InvalidSum(format!(
                "degenerate box {lower:?} .. {upper:?}"
            )));
        }
        Ok(ScanBox { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    fn sample(&self, idx: &[usize], resolution: usize) -> Vec<f64> {
        idx.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&i, (lo, hi))| lo + (hi - lo) * i as f64 / (resolution - 1) as f64)
            .collect()
    }
}

/// Smallest `t ≥ 0` at which term `j` dominates along `t·direction`.
fn domination_time(spectrum: &[Vec<f64>], moduli: &[f64], j: usize, direction: &[f64]) -> f64 {
    let slopes: Vec<(f64, f64)> = (0..spectrum.len())
        .filter(|&k| k != j)
        .map(|k| {
            let gap: f64 = direction
                .iter()
                .zip(spectrum[j].iter().zip(&spectrum[k]))
                .map(|(d, (a, b))| d * (a - b))
                .sum();
            (moduli[k] / moduli[j], gap)
        })
        .collect();
    let excess = |t: f64| -> f64 { slopes.iter().map(|(c, g)| c * (-t * g).exp()).sum() };
    if excess(0.0) < 1.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while excess(hi) >= 1.0 && hi < 1e6 {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    if hi == 1.0 {
        lo = 0.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Box reaching the dominant-monomial region of every Newton vertex, padded
/// by [`BOX_PADDING`] on each side.
pub fn auto_box(f: &ExponentialSum) -> Result<ScanBox> {
    let spectrum = f.spectrum();
    let moduli: Vec<f64> = f.terms().iter().map(|t| t.coeff.norm()).collect();
    let n = f.dim();
    let mut lo = vec![0.0f64; n];
    let mut hi = vec![0.0f64; n];
    for w in newton_vertex_witnesses(f)? {
        if spectrum.len() == 1 {
            break;
        }
        let t = domination_time(&spectrum, &moduli, w.index, &w.direction);
        for i in 0..n {
            let v = t * w.direction[i];
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    for i in 0..n {
        let mut extent = hi[i] - lo[i];
        if extent < 1e-9 {
            lo[i] -= 0.5;
            hi[i] += 0.5;
            extent = 1.0;
        }
        lo[i] -= BOX_PADDING * extent;
        hi[i] += BOX_PADDING * extent;
    }
    ScanBox::new(lo, hi)
}

#[derive(Clone, Debug)]
pub struct ScanSettings {
    pub resolution: usize,
    pub theta_grid: usize,
    pub threshold: f64,
    pub quadrature_nodes: usize,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            resolution: DEFAULT_RESOLUTION,
            theta_grid: DEFAULT_THETA_GRID,
            threshold: DEFAULT_THRESHOLD,
            quadrature_nodes: DEFAULT_QUADRATURE_NODES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Component {
    /// Interior sample the order was computed at.
    pub sample_point: Vec<f64>,
    pub order_gamma: Vec<i64>,
    pub order_spectrum: Vec<f64>,
    /// Bounding box of the component's samples.
    pub extent: ScanBox,
    pub samples: usize,
    pub residual: f64,
    /// Some sample of the component carries a dominant-monomial certificate.
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentReport {
    pub components: Vec<Component>,
    pub rho_estimate: usize,
    pub scan_box: ScanBox,
    pub resolution: usize,
    pub theta_grid: usize,
}

/// 4-neighbourhood of a flat index into a row-major `rows × cols` grid.
fn neighbours(idx: usize, rows: usize, cols: usize) -> impl Iterator<Item = usize> {
    let (i, j) = (idx / cols, idx % cols);
    [
        (i > 0).then(|| idx - cols),
        (i + 1 < rows).then(|| idx + cols),
        (j > 0).then(|| idx - 1),
        (j + 1 < cols).then(|| idx + 1),
    ]
    .into_iter()
    .flatten()
}

/// Labels the complement samples of a grid into components.
///
/// Neighbouring complement samples are joined unless both carry dominant
/// monomial certificates with different orders (those lie in different
/// components). Returns component labels (`usize::MAX` for amoeba samples)
/// and, per component, its samples in increasing index order.
pub(crate) fn label_grid(
    statuses: &[(MembershipStatus, Option<Vec<i64>>)],
    rows: usize,
    cols: usize,
) -> (Vec<usize>, Vec<Vec<usize>>) {
    let total = statuses.len();
    let mut uf = UnionFind::new(total);
    for a in 0..total {
        if statuses[a].0.is_amoeba() {
            continue;
        }
        for b in neighbours(a, rows, cols).filter(|&b| b > a) {
            if statuses[b].0.is_amoeba() {
                continue;
            }
            if let (Some(oa), Some(ob)) = (&statuses[a].1, &statuses[b].1) {
                if oa != ob {
                    continue;
                }
            }
            uf.union(a, b);
        }
    }
    let mut label = vec![usize::MAX; total];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_label: BTreeMap<usize, usize> = BTreeMap::new();
    for a in 0..total {
        if statuses[a].0.is_amoeba() {
            continue;
        }
        let root = uf.find(a);
        let l = *root_label.entry(root).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        label[a] = l;
        groups[l].push(a);
    }
    (label, groups)
}

/// 4-neighbour grid distance of each sample to the nearest
/// sample with a different label.
pub(crate) fn depth_map(label: &[usize], rows: usize, cols: usize) -> Vec<usize> {
    let mut depth = vec![usize::MAX; label.len()];
    let mut queue = VecDeque::new();
    for a in 0..label.len() {
        if neighbours(a, rows, cols).any(|b| label[b] != label[a]) {
            depth[a] = 0;
            queue.push_back(a);
        }
    }
    while let Some(a) = queue.pop_front() {
        for b in neighbours(a, rows, cols) {
            if depth[b] == usize::MAX {
                depth[b] = depth[a] + 1;
                queue.push_back(b);
            }
        }
    }
    depth
}

/// Resolves the order at `x`, doubling the quadrature up to twice.
fn resolve_order(
    p: &LaurentPoly,
    iso: &LatticeIso,
    x: &[f64],
    nodes: usize,
) -> Result<crate::ronkin::OrderResult> {
    let mut last = None;
    for scale in [1, 2, 4] {
        match order_at(p, iso, x, nodes * scale) {
            Ok(o) => return Ok(o),
            Err(e @ (Error::OrderUnresolved { .. } | Error::SingularSample { .. })) => {
                last = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Samples `scan_box` and returns the amoeba-complement components met.
pub fn scan_components(
    f: &ExponentialSum,
    iso: &LatticeIso,
    scan_box: &ScanBox,
    settings: &ScanSettings,
) -> Result<ComponentReport> {
    check_iso(f, iso)?;
    let n = f.dim();
    if !(1..=2).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    if scan_box.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: scan_box.dim(),
        });
    }
    if iso.rank() == 0 {
        return Err(Error::UnsupportedRank(0));
    }
    let res = settings.resolution;
    if res < 2 {
        return Err(Error::InvalidSum("resolution must be at least 2".into()));
    }
    let p = laurent_from(f, iso)?;
    let probe = MembershipProbe::new(&p, settings.theta_grid, settings.threshold)?;
    let total = res.pow(n as u32);
    let index_of = |a: usize| -> Vec<usize> {
        if n == 1 {
            vec![a]
        } else {
            vec![a / res, a % res]
        }
    };
    let statuses: Vec<(MembershipStatus, Option<Vec<i64>>)> = (0..total)
        .into_par_iter()
        .map(|a| {
            let x = scan_box.sample(&index_of(a), res);
            let (status, _, order) = probe.classify(&embed_l(iso, &x));
            (status, order)
        })
        .collect();

    let cols = if n == 1 { 1 } else { res };
    let (label, groups) = label_grid(&statuses, res, cols);
    let depth = depth_map(&label, res, cols);
    let gamma_poly = gamma_polytope(iso)?;

    let mut merged: BTreeMap<Vec<i64>, (Component, usize)> = BTreeMap::new();
    for group in &groups {
        // deepest sample, lowest index on ties
        let &best = group
            .iter()
            .max_by(|&&a, &&b| depth[a].cmp(&depth[b]).then(b.cmp(&a)))
            .expect("non-empty group");
        let x = scan_box.sample(&index_of(best), res);
        let order = resolve_order(&p, iso, &x, settings.quadrature_nodes)
            .map_err(|e| e.context(format!("component of {} samples", group.len())))?;
        if let Some(cert) = &statuses[best].1 {
            if *cert != order.order_gamma {
                return Err(Error::OrderUnresolved {
                    point: x,
                    gradient: order.gradient_raw,
                    residual: order.residual,
                });
            }
        }
        if !gamma_poly.contains(&order.order_gamma) {
            return Err(Error::OrderUnresolved {
                point: x,
                gradient: order.gradient_raw,
                residual: order.residual,
            });
        }
        let mut lower = vec![f64::INFINITY; n];
        let mut upper = vec![f64::NEG_INFINITY; n];
        for &a in group {
            let s = scan_box.sample(&index_of(a), res);
            for i in 0..n {
                lower[i] = lower[i].min(s[i]);
                upper[i] = upper[i].max(s[i]);
            }
        }
        let certified = group.iter().any(|&a| statuses[a].1.is_some());
        let comp = Component {
            sample_point: x,
            order_gamma: order.order_gamma.clone(),
            order_spectrum: order.order_spectrum,
            extent: ScanBox { lower, upper },
            samples: group.len(),
            residual: order.residual,
            certified,
        };
        match merged.get_mut(&order.order_gamma) {
            None => {
                merged.insert(order.order_gamma, (comp, depth[best]));
            }
            Some((existing, d)) => {
                for i in 0..n {
                    existing.extent.lower[i] = existing.extent.lower[i].min(comp.extent.lower[i]);
                    existing.extent.upper[i] = existing.extent.upper[i].max(comp.extent.upper[i]);
                }
                existing.samples += comp.samples;
                existing.certified |= comp.certified;
                if depth[best] > *d {
                    existing.sample_point = comp.sample_point;
                    existing.residual = comp.residual;
                    *d = depth[best];
                }
            }
        }
    }

    for w in newton_vertex_witnesses(f)? {
        let order = &iso.images()[w.index];
        if !merged.contains_key(order) {
            return Err(Error::BoxTooSmall {
                order: order.clone(),
            });
        }
    }

    let components: Vec<Component> = merged.into_values().map(|(c, _)| c).collect();
    Ok(ComponentReport {
        rho_estimate: components.len(),
        components,
        scan_box: scan_box.clone(),
        resolution: res,
        theta_grid: settings.theta_grid,
    })
}

#[derive(Clone, Debug, Default)]
pub struct AnalysisConfig {
    pub scan: ScanSettings,
    /// Explicit scan box; the automatic box is used when `None`.
    pub scan_box: Option<ScanBox>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmoebaReport {
    pub dim: usize,
    pub rank: usize,
    pub card_vertices: usize,
    /// Term indices of the Newton vertices of `Γ_f`.
    pub vertex_indices: Vec<usize>,
    /// Vertex count of `Γ_P` (equal to `card_vertices` when `Γ_f` and `Γ_P`
    /// are affinely isomorphic).
    pub card_vertices_gamma: usize,
    pub card_lambda: usize,
    pub lambda: LambdaSet,
    pub upsilon: f64,
    pub rho_estimate: usize,
    pub sparse: bool,
    pub solid_observed: bool,
    /// `card(Γ_f ∩ ℤⁿ)` when the spectrum is integral.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice_points_of_newton_polytope: Option<usize>,
    pub components: ComponentReport,
}

impl AmoebaReport {
    /// `card Vertx(Γ_f) ≤ ρ ≤ card Λ_f < υ`.
    pub fn check_bound_chain(&self) -> Result<()> {
        let ok = self.card_vertices <= self.rho_estimate
            && self.rho_estimate <= self.card_lambda
            && (self.card_lambda as f64) < self.upsilon;
        if ok {
            Ok(())
        } else {
            Err(Error::BoundChainViolated(format!(
                "{} ≤ {} ≤ {} < {}",
                self.card_vertices, self.rho_estimate, self.card_lambda, self.upsilon
            )))
        }
    }
}

/// Full analysis with the canonical isomorphism.
pub fn analyze(f: &ExponentialSum, config: &AnalysisConfig) -> Result<AmoebaReport> {
    let iso = f.lattice_iso().map_err(|e| e.context("lattice"))?;
    analyze_with_iso(f, &iso, config)
}

pub fn analyze_with_iso(
    f: &ExponentialSum,
    iso: &LatticeIso,
    config: &AnalysisConfig,
) -> Result<AmoebaReport> {
    check_iso(f, iso)?;
    if iso.rank() == 0 {
        return Err(Error::InvalidSum(
            "constant exponential sum: the spectrum generates the zero group".into(),
        ));
    }
    let lambda = lambda_set(f, iso).map_err(|e| e.context("geometry"))?;
    let vertices = newton_vertex_witnesses(f).map_err(|e| e.context("exposum"))?;
    let vertex_indices: Vec<usize> = vertices.iter().map(|w| w.index).collect();
    let card_vertices_gamma = gamma_polytope(iso)?.vertices().len();
    let upsilon = ronkin_bound_of(iso);
    let scan_box = match &config.scan_box {
        Some(b) => b.clone(),
        None => auto_box(f)?,
    };
    let components =
        scan_components(f, iso, &scan_box, &config.scan).map_err(|e| e.context("amoeba scan"))?;
    for c in &components.components {
        if !lambda.contains(&c.order_gamma) {
            return Err(Error::BoundChainViolated(format!(
                "component order {:?} outside Λ_f",
                c.order_gamma
            )));
        }
    }
    let rho_estimate = components.rho_estimate;
    let report = AmoebaReport {
        dim: f.dim(),
        rank: iso.rank(),
        card_vertices: vertex_indices.len(),
        sparse: vertex_indices.len() == f.len(),
        solid_observed: rho_estimate == vertex_indices.len(),
        vertex_indices,
        card_vertices_gamma,
        card_lambda: lambda.len(),
        lambda,
        upsilon,
        rho_estimate,
        lattice_points_of_newton_polytope: integer_newton_lattice_count(f)?,
        components,
    };
    report.check_bound_chain()?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Disagreement {
    pub sample: usize,
    pub character: usize,
    pub base: MembershipStatus,
    pub perturbed: MembershipStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub checked: usize,
    pub disagreements: Vec<Disagreement>,
}

/// Compares membership of `f` and of `f_χ` for every sample and character.
pub fn perturbation_invariance_check(
    f: &ExponentialSum,
    iso: &LatticeIso,
    samples: &[Vec<f64>],
    characters: &[TorusPoint],
    theta_grid: usize,
    threshold: f64,
) -> Result<PerturbationReport> {
    let base: Vec<MembershipStatus> = samples
        .par_iter()
        .map(|x| membership(f, iso, x, theta_grid, threshold).map(|v| v.status))
        .collect::<Result<_>>()?;
    let mut disagreements = Vec::new();
    for (c, chi) in characters.iter().enumerate() {
        let g = f.perturbed(iso, chi)?;
        let statuses: Vec<MembershipStatus> = samples
            .par_iter()
            .map(|x| membership(&g, iso, x, theta_grid, threshold).map(|v| v.status))
            .collect::<Result<_>>()?;
        for (s, (&a, &b)) in base.iter().zip(&statuses).enumerate() {
            if a != b {
                disagreements.push(Disagreement {
                    sample: s,
                    character: c,
                    base: a,
                    perturbed: b,
                });
            }
        }
    }
    Ok(PerturbationReport {
        checked: samples.len() * characters.len(),
        disagreements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exposum::fixtures::*;

    fn verdict(f: &ExponentialSum, x: &[f64]) -> MembershipVerdict {
        membership(f, &f.lattice_iso().unwrap(), x, 64, DEFAULT_THRESHOLD).unwrap()
    }

    #[test]
    fn membership_examples() {
        let f = one_plus_exp();
        assert_eq!(verdict(&f, &[0.0]).status, MembershipStatus::LikelyAmoeba);
        let v = verdict(&f, &[2.0]);
        assert_eq!(v.status, MembershipStatus::CertifiedComplement);
        assert_eq!(v.order, Some(vec![1]));
        let v = verdict(&example1(), &[-10.0]);
        assert_eq!(v.status, MembershipStatus::CertifiedComplement);
        assert_eq!(v.order, Some(vec![0, 0]));
    }

    #[test]
    fn theta_grid_floor() {
        let f = one_plus_exp();
        assert!(membership(&f, &f.lattice_iso().unwrap(), &[0.0], 8, 1e-3).is_err());
    }

    #[test]
    fn refinement_finds_zero_off_grid() {
        // 1 + ζ₁ + ζ₂ at y = 0 vanishes at θ = (2π/3, 4π/3), not a grid node
        let p = LaurentPoly::new(
            2,
            vec![
                (vec![0, 0], c(1.0)),
                (vec![1, 0], c(1.0)),
                (vec![0, 1], c(1.0)),
            ],
        )
        .unwrap();
        let probe = MembershipProbe::new(&p, 16, 1e-3).unwrap();
        assert!(probe.min_modulus_ratio(&[0.0, 0.0]) < 1e-10);
        // outside the amoeba: min stays positive
        assert!(probe.min_modulus_ratio(&[3.0, 0.0]) > 0.5);
    }

    #[test]
    fn solve_small_system() {
        let x = solve_small(vec![2.0, 1.0, 1.0, 3.0], vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
        assert!(solve_small(vec![0.0; 4], vec![1.0, 1.0]).is_none());
    }

    #[test]
    fn example1_scan() {
        let f = example1();
        let iso = f.lattice_iso().unwrap();
        let b = auto_box(&f).unwrap();
        let rep = scan_components(&f, &iso, &b, &ScanSettings::default()).unwrap();
        assert_eq!(rep.rho_estimate, 3);
        let orders: Vec<Vec<i64>> = rep
            .components
            .iter()
            .map(|c| c.order_gamma.clone())
            .collect();
        assert_eq!(orders, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn box_too_small() {
        let f = example1();
        let iso = f.lattice_iso().unwrap();
        let b = ScanBox::new(vec![-3.0], vec![0.0]).unwrap();
        let err = scan_components(&f, &iso, &b, &ScanSettings::default()).unwrap_err();
        assert!(matches!(err, Error::BoxTooSmall { .. }), "{err}");
    }

    #[test]
    fn single_term_report() {
        let f = sum(vec![vec![1.0, 0.0], vec![0.0, 1.0]], &[(&[2, 4], 3.0)]);
        let settings = AnalysisConfig {
            scan: ScanSettings {
                resolution: 40,
                ..ScanSettings::default()
            },
            scan_box: None,
        };
        let rep = analyze(&f, &settings).unwrap();
        assert_eq!(rep.rho_estimate, 1);
        assert_eq!(rep.card_lambda, 1);
        assert_eq!(rep.card_vertices, 1);
        assert!(rep.components.components[0].certified);
    }

    #[test]
    fn constant_sum_rejected() {
        let f = sum(vec![vec![1.0]], &[(&[0], 3.0)]);
        assert!(analyze(&f, &AnalysisConfig::default()).is_err());
    }

    #[test]
    fn one_plus_exp_report() {
        let rep = analyze(&one_plus_exp(), &AnalysisConfig::default()).unwrap();
        assert_eq!(rep.rho_estimate, 2);
        assert_eq!(rep.card_lambda, 2);
        assert!(rep.sparse && rep.solid_observed);
        assert!((rep.upsilon - 3.0).abs() < 1e-12);
    }

    #[test]
    fn grid_labeling_respects_certificates() {
        use MembershipStatus::*;
        let s = vec![
            (CertifiedComplement, Some(vec![0])),
            (CertifiedComplement, Some(vec![1])),
            (LikelyComplement, None),
            (LikelyAmoeba, None),
            (LikelyComplement, None),
        ];
        let (label, groups) = label_grid(&s, 5, 1);
        assert_eq!(groups.len(), 3);
        assert_ne!(label[0], label[1]);
        assert_eq!(label[1], label[2]);
        assert_eq!(label[3], usize::MAX);
        let depth = depth_map(&label, 5, 1);
        assert_eq!(depth[0], 0);
    }

    #[test]
    fn perturbation_trivial_and_shifted() {
        let f = one_plus_exp();
        let iso = f.lattice_iso().unwrap();
        let rep = perturbation_invariance_check(
            &f,
            &iso,
            &[vec![2.0], vec![0.0], vec![-0.5]],
            &[TorusPoint::trivial(1), TorusPoint::new(vec![PI])],
            64,
            DEFAULT_THRESHOLD,
        )
        .unwrap();
        assert_eq!(rep.checked, 6);
        assert!(rep.disagreements.is_empty());
        let g = f.perturbed(&iso, &TorusPoint::new(vec![PI])).unwrap();
        assert_eq!(
            membership(&g, &iso, &[2.0], 64, DEFAULT_THRESHOLD)
                .unwrap()
                .status,
            MembershipStatus::CertifiedComplement
        );
    }
}
