//! Norming functionals and smoothness diagnostics.
//!
//! At a smooth point `x ≠ 0` the norming functional `x*` is the unique
//! dual-unit vector with `⟨x*, x⟩ = ρ(x)`; it equals the gauge gradient
//! `∇ρ(x)`. The non-smooth set has hypersurface measure zero, and on it a
//! deterministic tie-break produces a measurable extension.

use crate::error::{Error, Result};
use crate::hyperoctahedral::SignedPermutation;
use crate::norm::{NormFamily, NormSpec};
use crate::scalar::Real;

/// Tolerance for the equivariance check `(Qx)* = Q(x*)`.
pub const EQUIVARIANCE_TOL: f64 = 1e-12;

/// Norming functional together with smoothness diagnostics at a point.
#[derive(Clone, Debug)]
pub struct NormingResult<R> {
    /// Coordinates of `x*` under the scalar-product identification of `X*`.
    pub functional: Vec<R>,
    /// Whether the norming functional is unique at the point.
    pub smooth: bool,
    /// Distance-to-tie diagnostic; `0` exactly when `smooth` is false, and
    /// `+∞` for families that are smooth everywhere off the origin.
    pub margin: R,
    /// `⟨x*, x⟩`, equal to `ρ(x)` up to rounding at smooth points.
    pub pairing: R,
    /// `‖x*‖_*`, equal to 1 up to rounding at smooth points.
    pub dual_norm_value: R,
}

/// Quantifies how far `x` is from the set of points with multiple norming
/// functionals. Returns `+∞` for the everywhere-smooth families
/// (euclidean, lp, weighted_l2), and for the polyhedral families the gap
/// that closes at a tie: `min_i |x_i|` for l1, the gap between the two
/// largest moduli for linf, and for top-k the smaller of the k-th/(k+1)-th
/// modulus gap and the smallest modulus inside the top k.
pub fn smoothness_margin<R: Real>(spec: &NormSpec<R>, x: &[R]) -> Result<R> {
    spec.check_input(x)?;
    if x.iter().all(|v| *v == R::zero()) {
        return Err(Error::ZeroVector);
    }
    Ok(match spec.family() {
        NormFamily::Euclidean | NormFamily::Lp(_) | NormFamily::WeightedL2(_) => R::infinity(),
        NormFamily::L1 => x.iter().map(|v| v.abs()).fold(R::infinity(), R::min),
        NormFamily::Linf => {
            let m = sorted_moduli(x);
            if m.len() == 1 {
                m[0]
            } else {
                m[0] - m[1]
            }
        }
        NormFamily::TopK(k) => {
            let m = sorted_moduli(x);
            let k = *k;
            if k < m.len() {
                (m[k - 1] - m[k]).min(m[k - 1])
            } else {
                m[k - 1]
            }
        }
    })
}

fn sorted_moduli<R: Real>(x: &[R]) -> Vec<R> {
    let mut m: Vec<R> = x.iter().map(|v| v.abs()).collect();
    m.sort_by(|a, b| b.partial_cmp(a).unwrap());
    m
}

/// Computes the norming functional of `x ≠ 0`.
///
/// The gradient is 0-homogeneous, so points off the sphere get the norming
/// functional of their radial projection. At non-smooth points the
/// functional comes from the deterministic tie-break policy and is flagged
/// with `smooth = false`.
pub fn norming_functional<R: Real>(spec: &NormSpec<R>, x: &[R]) -> Result<NormingResult<R>> {
    let margin = smoothness_margin(spec, x)?;
    let functional = spec.gradient_with_tie_break(x);
    let pairing = crate::dot(&functional, x);
    let dual_norm_value = spec.dual_norm(&functional)?;
    Ok(NormingResult {
        smooth: margin > R::zero(),
        functional,
        margin,
        pairing,
        dual_norm_value,
    })
}

/// Checks the equivariance `(Qx)* = Q(x*)` for a 1-symmetric norm at a
/// smooth point, to within [`EQUIVARIANCE_TOL`] in the max norm.
pub fn check_equivariance<R: Real>(
    spec: &NormSpec<R>,
    x: &[R],
    q: &SignedPermutation,
) -> Result<bool> {
    if !spec.is_one_symmetric() {
        return Err(Error::NotOneSymmetric(spec.canonical()));
    }
    let at_x = norming_functional(spec, x)?;
    if !at_x.smooth {
        return Err(Error::NonSmoothPoint { margin: 0.0 });
    }
    let qx = q.apply(x)?;
    let at_qx = norming_functional(spec, &qx)?;
    let q_fx = q.apply(&at_x.functional)?;
    let max_diff = at_qx
        .functional
        .iter()
        .zip(&q_fx)
        .map(|(a, b)| (*a - *b).abs())
        .fold(R::zero(), R::max);
    Ok(max_diff <= crate::scalar::r(EQUIVARIANCE_TOL))
}
