//! Exponential sums `f(z) = Σ a_λ e^{⟨z,λ⟩}` with spectrum given as integer
//! vectors over declared real generators.

use std::collections::HashSet;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::lattice::{IntMatrix, LatticeIso};
use crate::lp::max_separation;
use crate::{Error, Result};

/// Vertex iff the separation margin exceeds this fraction of `max ‖λ‖∞`.
pub const VERTEX_TOLERANCE: f64 = 1e-7;
/// Cross-check tolerance; a margin between the two is reported as ambiguous.
pub const VERTEX_TOLERANCE_FINE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub exponent: Vec<i64>,
    pub coeff: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentialSum {
    n: usize,
    /// m × n: row `i` is the `i`-th generator in ℝⁿ.
    generators: Vec<Vec<f64>>,
    terms: Vec<Term>,
}

impl ExponentialSum {
    pub fn new(generators: Vec<Vec<f64>>, terms: Vec<Term>) -> Result<Self> {
        let m = generators.len();
        if m == 0 {
            return Err(Error::InvalidSum("no generators".into()));
        }
        let n = generators[0].len();
        if n == 0 {
            return Err(Error::InvalidSum(
                "ambient dimension must be positive".into(),
            ));
        }
        if let Some(g) = generators.iter().find(|g| g.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: g.len(),
            });
        }
        if terms.is_empty() {
            return Err(Error::InvalidSum("at least one term is required".into()));
        }
        let mut seen = HashSet::new();
        for (i, t) in terms.iter().enumerate() {
            if t.exponent.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: t.exponent.len(),
                });
            }
            if !(t.coeff.re.is_finite() && t.coeff.im.is_finite()) || t.coeff.norm() == 0.0 {
                return Err(Error::InvalidSum(format!(
                    "term {i} has a zero or non-finite coefficient"
                )));
            }
            if !seen.insert(t.exponent.clone()) {
                return Err(Error::InvalidSum(format!(
                    "duplicate exponent {:?} at term {i}",
                    t.exponent
                )));
            }
        }
        Ok(ExponentialSum {
            n,
            generators,
            terms,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `λ = exponentᵀ·G` for term `i`.
    pub fn spectrum_point(&self, i: usize) -> Vec<f64> {
        let mut lambda = vec![0.0; self.n];
        for (&k, g) in self.terms[i].exponent.iter().zip(&self.generators) {
            for (l, gj) in lambda.iter_mut().zip(g) {
                *l += k as f64 * gj;
            }
        }
        lambda
    }

    pub fn spectrum(&self) -> Vec<Vec<f64>> {
        (0..self.terms.len())
            .map(|i| self.spectrum_point(i))
            .collect()
    }

    pub fn exponent_matrix(&self) -> IntMatrix {
        let rows: Vec<Vec<i64>> = self.terms.iter().map(|t| t.exponent.clone()).collect();
        IntMatrix::from_i64_rows(&rows, self.generators.len())
            .expect("exponent lengths validated at construction")
    }

    /// Canonical lattice isomorphism of this sum.
    pub fn lattice_iso(&self) -> Result<LatticeIso> {
        LatticeIso::build(&self.exponent_matrix(), &self.generators)
    }

    /// Plain evaluation at a real point.
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        self.check_point(x)?;
        Ok((0..self.terms.len())
            .map(|i| {
                let lambda = self.spectrum_point(i);
                self.terms[i].coeff * dot(x, &lambda).exp()
            })
            .sum())
    }

    /// `e^{⟨z,μ⟩}·f` for `μ` given by its exponent vector over the generators.
    pub fn multiply_monomial(&self, mu: &[i64]) -> Result<ExponentialSum> {
        if mu.len() != self.generators.len() {
            return Err(Error::DimensionMismatch {
                expected: self.generators.len(),
                got: mu.len(),
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                exponent: t.exponent.iter().zip(mu).map(|(a, b)| a + b).collect(),
                coeff: t.coeff,
            })
            .collect();
        ExponentialSum::new(self.generators.clone(), terms)
    }

    /// The character-perturbed sum `f_χ` with `χ(ω_ℓ) = e^{iφ_ℓ}`: each
    /// coefficient picks up the phase `e^{i⟨γ(λ), φ⟩}`.
    pub fn perturbed(&self, iso: &LatticeIso, phase: &TorusPoint) -> Result<ExponentialSum> {
        check_iso(self, iso)?;
        if phase.len() != iso.rank() {
            return Err(Error::DimensionMismatch {
                expected: iso.rank(),
                got: phase.len(),
            });
        }
        let terms = self
            .terms
            .iter()
            .zip(iso.images())
            .map(|(t, k)| Term {
                exponent: t.exponent.clone(),
                coeff: t.coeff * Complex64::from_polar(1.0, phase_dot(k, phase.angles())),
            })
            .collect();
        ExponentialSum::new(self.generators.clone(), terms)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }
}

pub(crate) fn check_iso(f: &ExponentialSum, iso: &LatticeIso) -> Result<()> {
    if iso.images().len() != f.len() || iso.generators().len() != f.generator_count() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            got: iso.images().len(),
        });
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn phase_dot(k: &[i64], theta: &[f64]) -> f64 {
    k.iter().zip(theta).map(|(&a, t)| a as f64 * t).sum()
}

/// A point of the character torus `Ch Ξ_f ≅ (ℝ/2πℤ)ʳ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    /// Wraps each angle into `[0, 2π)`.
    pub fn new(angles: Vec<f64>) -> Self {
        TorusPoint(
            angles
                .into_iter()
                .map(|a| {
                    let w = a.rem_euclid(TAU);
                    if w >= TAU {
                        0.0
                    } else {
                        w
                    }
                })
                .collect(),
        )
    }

    pub fn trivial(rank: usize) -> Self {
        TorusPoint(vec![0.0; rank])
    }

    pub fn angles(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `Σ_λ a(f,λ)·exp(⟨x,λ⟩ + i⟨γ(λ),θ⟩)`, the value at `x` of the sum perturbed
/// by the character with `χ(ω_ℓ) = e^{iθ_ℓ}`.
pub fn evaluate_perturbed(
    f: &ExponentialSum,
    iso: &LatticeIso,
    x: &[f64],
    theta: &TorusPoint,
) -> Result<Complex64> {
    f.check_point(x)?;
    check_iso(f, iso)?;
    if theta.len() != iso.rank() {
        return Err(Error::DimensionMismatch {
            expected: iso.rank(),
            got: theta.len(),
        });
    }
    Ok(f.terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let lambda = f.spectrum_point(i);
            t.coeff
                * Complex64::from_polar(
                    dot(x, &lambda).exp(),
                    phase_dot(&iso.images()[i], theta.angles()),
                )
        })
        .sum())
}

/// Separation certificate for one Newton vertex.
#[derive(Clone, Debug)]
pub struct VertexWitness {
    pub index: usize,
    /// `x` with `‖x‖∞ ≤ 1` maximizing the separation margin.
    pub direction: Vec<f64>,
    pub margin: f64,
}

/// Vertices of the Newton polytope `Γ_f`, with separating directions.
pub fn newton_vertex_witnesses(f: &ExponentialSum) -> Result<Vec<VertexWitness>> {
    let spectrum = f.spectrum();
    let scale = spectrum
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let mut out = Vec::new();
    for (i, target) in spectrum.iter().enumerate() {
        let others: Vec<&[f64]> = spectrum
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| p.as_slice())
            .collect();
        let sep = max_separation(target, &others);
        let coarse = sep.margin > VERTEX_TOLERANCE * scale;
        let fine = sep.margin > VERTEX_TOLERANCE_FINE * scale;
        if coarse != fine {
            return Err(Error::NumericallyAmbiguous {
                index: i,
                margin: sep.margin,
            });
        }
        if coarse {
            out.push(VertexWitness {
                index: i,
                direction: sep.direction,
                margin: sep.margin,
            });
        }
    }
    Ok(out)
}

/// Indices of the terms whose spectrum points are vertices of `Γ_f`.
pub fn newton_vertices(f: &ExponentialSum) -> Result<Vec<usize>> {
    Ok(newton_vertex_witnesses(f)?
        .into_iter()
        .map(|w| w.index)
        .collect())
}

/// Every spectrum point is a vertex of the Newton polytope.
pub fn is_maximally_sparse(f: &ExponentialSum) -> Result<bool> {
    Ok(newton_vertices(f)?.len() == f.len())
}
