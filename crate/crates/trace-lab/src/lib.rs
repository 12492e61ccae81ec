//! Trace of a matrix as an average of numerical values over the unit sphere
//! of a normed space.
//!
//! For a normed space `X = (R^N, ρ)` whose canonical basis is 1-symmetric
//! (the norm is invariant under coordinate permutations and sign flips),
//!
//! ```text
//! tr A = N · ∫_{S_X} ⟨Ax, x*⟩ μ(dx),
//! ```
//!
//! where `x*` is the norming functional of `x` and `μ` the normalised
//! hypersurface measure on the unit sphere `S_X`. This crate realises the
//! formula numerically:
//!
//! - [`norm`] — the supported norm families, gauge gradients, dual norms;
//! - [`duality`] — norming functionals and smoothness diagnostics;
//! - [`hyperoctahedral`] — the signed-permutation group `BC_N`, the exact
//!   conjugation-sum identity `Σ_Q QᵀAQ = (N−1)!·2^N·tr(A)·I`, and the
//!   pointwise group-average witness of the trace formula;
//! - [`measure`] — weighted pushforward sampling of `μ` from the Euclidean
//!   sphere and Monte Carlo / 2-D quadrature averaging;
//! - [`trace`] — the experiment pipeline behind the `trace-lab` CLI,
//!   including the ellipse counterexample showing that 1-symmetry cannot
//!   be dropped.
//!
//! Norm and duality computations are generic over the scalar type (see
//! [`scalar::Real`]); the sampling and reporting pipeline works in `f64`.

pub mod duality;
pub mod error;
pub mod hyperoctahedral;
pub mod measure;
pub mod norm;
pub mod quadrature;
pub mod scalar;
pub mod trace;

pub use error::{Error, Result};

/// `f64` norm descriptor, the type the pipeline and CLI work with.
pub type NormSpec64 = norm::NormSpec<f64>;
/// `f32` norm descriptor.
pub type NormSpec32 = norm::NormSpec<f32>;
/// `f64` norming-functional result.
pub type NormingResult64 = duality::NormingResult<f64>;

use scalar::Real;

/// Dot product in the canonical coordinates; the duality pairing ⟨f, x⟩.
pub fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

pub(crate) fn l2_norm<R: Real>(x: &[R]) -> R {
    x.iter().map(|v| *v * *v).sum::<R>().sqrt()
}
