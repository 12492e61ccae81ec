//! The hyperoctahedral group BC_N of signed permutations, the exact
//! conjugation-sum identity, and the pointwise group-average witness of the
//! trace formula.

use itertools::Itertools;

use crate::duality;
use crate::error::{Error, Result};
use crate::norm::NormSpec;
use crate::scalar::{r, Real};

/// Enumeration guard; |BC_8| = 10,321,920 already.
pub const MAX_ENUM_DIM: usize = 8;

/// Element of BC_N stored as a permutation σ and a sign vector β, acting by
/// `Q e_i = β(i) e_{σ(i)}` (0-based indices).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    sigma: Vec<usize>,
    beta: Vec<i8>,
}

impl SignedPermutation {
    pub fn new(sigma: Vec<usize>, beta: Vec<i8>) -> Result<Self> {
        let n = sigma.len();
        if beta.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: beta.len() });
        }
        let mut seen = vec![false; n];
        for &s in &sigma {
            if s >= n || seen[s] {
                return Err(Error::OutOfRange(format!("sigma {sigma:?} is not a bijection")));
            }
            seen[s] = true;
        }
        if beta.iter().any(|&b| b != 1 && b != -1) {
            return Err(Error::OutOfRange("beta entries must be ±1".into()));
        }
        Ok(Self { sigma, beta })
    }

    pub fn identity(n: usize) -> Self {
        Self { sigma: (0..n).collect(), beta: vec![1; n] }
    }

    /// Uniformly random group element.
    pub fn random<G: rand::Rng>(n: usize, rng: &mut G) -> Self {
        let mut sigma: Vec<usize> = (0..n).collect();
        // Fisher-Yates
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            sigma.swap(i, j);
        }
        let beta = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        Self { sigma, beta }
    }

    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn beta(&self) -> &[i8] {
        &self.beta
    }

    /// Applies the group element: `(Qx)_{σ(i)} = β(i)·x_i`.
    pub fn apply<T>(&self, x: &[T]) -> Result<Vec<T>>
    where
        T: Copy + std::ops::Neg<Output = T>,
    {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let mut out: Vec<T> = x.to_vec();
        for i in 0..x.len() {
            out[self.sigma[i]] = if self.beta[i] < 0 { -x[i] } else { x[i] };
        }
        Ok(out)
    }

    /// Group composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        let n = self.dim();
        let mut sigma = vec![0; n];
        let mut beta = vec![1i8; n];
        for i in 0..n {
            sigma[i] = self.sigma[other.sigma[i]];
            beta[i] = other.beta[i] * self.beta[other.sigma[i]];
        }
        Ok(Self { sigma, beta })
    }

    /// Inverse, which for a signed permutation matrix is the transpose.
    pub fn inverse(&self) -> Self {
        let n = self.dim();
        let mut sigma = vec![0; n];
        let mut beta = vec![1i8; n];
        for i in 0..n {
            sigma[self.sigma[i]] = i;
            beta[self.sigma[i]] = self.beta[i];
        }
        Self { sigma, beta }
    }
}

/// Order of BC_n, i.e. 2^n·n!.
pub fn group_order(n: usize) -> u64 {
    (1..=n as u64).product::<u64>() << n
}

/// Enumerates BC_n in a deterministic order.
pub fn enumerate_group(n: usize) -> Result<impl Iterator<Item = SignedPermutation>> {
    if n == 0 || n > MAX_ENUM_DIM {
        return Err(Error::OutOfRange(format!("group enumeration needs 1 <= n <= {MAX_ENUM_DIM}")));
    }
    Ok((0..n).permutations(n).flat_map(move |sigma| {
        (0u32..1 << n).map(move |mask| SignedPermutation {
            sigma: sigma.clone(),
            beta: (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect(),
        })
    }))
}

/// Exact conjugation sum `Σ_{Q ∈ BC_N} QᵀAQ` over integer matrices.
///
/// Equals `(N−1)!·2^N·tr(A)·I_N`; the entry `(i,j)` of `QᵀAQ` is
/// `β(i)β(j)·a_{σ(i),σ(j)}`, so the sum needs no matrix products.
pub fn conjugation_sum(a: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let n = a.len();
    if n == 0 || n > MAX_ENUM_DIM {
        return Err(Error::OutOfRange(format!("conjugation sum needs 1 <= n <= {MAX_ENUM_DIM}")));
    }
    if a.iter().any(|row| row.len() != n) {
        return Err(Error::Matrix("matrix is not square".into()));
    }
    let mut sum = vec![vec![0i64; n]; n];
    for q in enumerate_group(n)? {
        for i in 0..n {
            for j in 0..n {
                let v = a[q.sigma[i]][q.sigma[j]];
                if q.beta[i] * q.beta[j] < 0 {
                    sum[i][j] -= v;
                } else {
                    sum[i][j] += v;
                }
            }
        }
    }
    Ok(sum)
}

/// The constant `(N−1)!·2^N·tr(A)` of the conjugation-sum identity.
pub fn conjugation_constant(n: usize, trace: i64) -> i64 {
    let fact: i64 = (1..n as i64).product();
    fact * (1i64 << n) * trace
}

/// Pointwise witness of the trace formula: the group average
/// `(1/|BC_N|)·Σ_Q ⟨QᵀAQ x, x*⟩ / ⟨x, x*⟩` at a smooth point `x` of a
/// 1-symmetric norm, which equals `tr A / N` exactly in exact arithmetic —
/// a finite-sum form of the theorem requiring no integration.
pub fn group_average_numerical_value<R: Real>(
    spec: &NormSpec<R>,
    a: &[Vec<R>],
    x: &[R],
) -> Result<R> {
    if !spec.is_one_symmetric() {
        return Err(Error::NotOneSymmetric(spec.canonical()));
    }
    let n = spec.dim();
    if a.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::Matrix(format!("matrix must be {n}x{n}")));
    }
    let rho = spec.eval(x)?;
    if rho == R::zero() {
        return Err(Error::ZeroVector);
    }
    let xhat: Vec<R> = x.iter().map(|v| *v / rho).collect();
    let nr = duality::norming_functional(spec, &xhat)?;
    if !nr.smooth {
        return Err(Error::NonSmoothPoint { margin: 0.0 });
    }
    let mut total = R::zero();
    for q in enumerate_group(n)? {
        // ⟨QᵀAQx, x*⟩ = ⟨A(Qx), Q(x*)⟩
        let qx = q.apply(&xhat)?;
        let qf = q.apply(&nr.functional)?;
        let mut term = R::zero();
        for i in 0..n {
            term = term + qf[i] * crate::dot(&a[i], &qx);
        }
        total = total + term;
    }
    Ok(total / r::<R>(group_order(n) as f64) / nr.pairing)
}
