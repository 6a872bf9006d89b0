//! Amoebas of exponential sums with real spectrum.
//!
//! An exponential sum `f(z) = Σ a_λ e^{⟨z,λ⟩}` whose frequencies are integer
//! combinations of a few real generators is turned into a Laurent polynomial
//! `P` through a group isomorphism `γ : Ξ_f → ℤʳ`. From there the crate
//! computes the intrinsic order set `Λ_f`, the component-count bounds
//!
//! ```text
//! card Vertx(Γ_f) ≤ ρ(f) ≤ card Λ_f < υ(f, γ)
//! ```
//!
//! evaluates the Ronkin function of `P` by torus quadrature, estimates the
//! number of amoeba-complement components `ρ(f)` by sampling, and renders
//! amoeba/polytope figures.
//!
//! Module map:
//! - [`lattice`]: exact integer linear algebra (HNF, rank, the isomorphism `γ`)
//! - [`exposum`]: the exponential-sum model, character perturbations, Newton vertices
//! - [`geometry`]: exact lattice polytopes, lattice points, `Λ_f`
//! - [`ronkin`]: Laurent polynomial, Ronkin function, component orders, `υ(f,γ)`
//! - [`amoeba`]: membership, component scan, full report
//! - [`render`]: SVG figures
//! - [`cli`]: document formats and command drivers

pub mod amoeba;
pub mod cli;
mod error;
pub mod exposum;
pub mod geometry;
pub mod lattice;
mod lp;
pub mod render;
pub mod ronkin;
mod unionfind;

pub use error::{Error, Result};
pub use exposum::{ExponentialSum, Term, TorusPoint};
pub use geometry::{LambdaSet, LatticePolytope};
pub use lattice::{IntMatrix, LatticeIso};
pub use ronkin::{LaurentPoly, OrderResult};
