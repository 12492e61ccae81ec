//! Norm families on R^N: evaluation, gauge gradients, dual norms, and the
//! `family:params:dim` descriptor grammar.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{r, Real};

/// Smallest admissible exponent for the `lp` family. Exponents closer to 1
/// make `|x|^{p-1}` numerically treacherous; `l1` covers the limit exactly.
pub const LP_MIN: f64 = 1.01;
/// Largest admissible exponent for the `lp` family; `linf` covers the limit.
pub const LP_MAX: f64 = 64.0;

/// The supported norm families.
#[derive(Clone, Debug, PartialEq)]
pub enum NormFamily<R> {
    /// ℓ₂.
    Euclidean,
    /// ℓ_p with exponent in `(LP_MIN, LP_MAX]`.
    Lp(R),
    /// ℓ₁ (kept separate from `Lp` because of its gradient handling).
    L1,
    /// ℓ_∞.
    Linf,
    /// Sum of the `k` largest coordinate moduli (a 1-symmetric norm that is
    /// not an ℓ_p norm for 1 < k < N).
    TopK(usize),
    /// `ρ(x) = sqrt(Σ (x_i / b_i)²)` with positive weights `b`. Not
    /// 1-symmetric unless all weights coincide; this is the counterexample
    /// family.
    WeightedL2(Vec<R>),
}

/// Descriptor of a norm on R^N; the single source of truth for the norm,
/// its gauge gradient and the dual norm.
#[derive(Clone, Debug, PartialEq)]
pub struct NormSpec<R> {
    dim: usize,
    family: NormFamily<R>,
}

impl<R: Real> NormSpec<R> {
    pub fn new(dim: usize, family: NormFamily<R>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::OutOfRange("dim must be at least 1".into()));
        }
        match &family {
            NormFamily::Lp(p) => {
                if !p.is_finite() {
                    return Err(Error::OutOfRange("lp exponent must be finite; use linf".into()));
                }
                let p = p.to_f64().unwrap();
                if p < 1.0 {
                    return Err(Error::OutOfRange(format!("lp with p={p} is not a norm")));
                }
                if p < LP_MIN {
                    return Err(Error::OutOfRange(format!(
                        "lp exponent {p} too close to 1; use l1"
                    )));
                }
                if p > LP_MAX {
                    return Err(Error::OutOfRange(format!(
                        "lp exponent {p} exceeds {LP_MAX}; use linf"
                    )));
                }
            }
            NormFamily::TopK(k) => {
                if *k == 0 || *k > dim {
                    return Err(Error::OutOfRange(format!(
                        "top-k parameter k={k} outside 1..={dim}"
                    )));
                }
            }
            NormFamily::WeightedL2(b) => {
                if b.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: b.len() });
                }
                if b.iter().any(|w| !w.is_finite() || *w <= R::zero()) {
                    return Err(Error::OutOfRange("weighted_l2 weights must be positive".into()));
                }
            }
            NormFamily::Euclidean | NormFamily::L1 | NormFamily::Linf => {}
        }
        Ok(Self { dim, family })
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(dim, NormFamily::Euclidean)
    }

    pub fn lp(p: R, dim: usize) -> Result<Self> {
        Self::new(dim, NormFamily::Lp(p))
    }

    pub fn l1(dim: usize) -> Result<Self> {
        Self::new(dim, NormFamily::L1)
    }

    pub fn linf(dim: usize) -> Result<Self> {
        Self::new(dim, NormFamily::Linf)
    }

    pub fn top_k(k: usize, dim: usize) -> Result<Self> {
        Self::new(dim, NormFamily::TopK(k))
    }

    pub fn weighted_l2(b: Vec<R>) -> Result<Self> {
        let dim = b.len();
        Self::new(dim, NormFamily::WeightedL2(b))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &NormFamily<R> {
        &self.family
    }

    /// Whether the canonical basis is 1-symmetric for this norm, i.e. the
    /// hyperoctahedral group acts by isometries.
    pub fn is_one_symmetric(&self) -> bool {
        match &self.family {
            NormFamily::WeightedL2(b) => b.windows(2).all(|w| w[0] == w[1]),
            _ => true,
        }
    }

    pub(crate) fn check_input(&self, x: &[R]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(())
    }

    /// Evaluates the norm ρ(x).
    pub fn eval(&self, x: &[R]) -> Result<R> {
        self.check_input(x)?;
        Ok(match &self.family {
            NormFamily::Euclidean => crate::l2_norm(x),
            NormFamily::Lp(p) => lp_eval(*p, x),
            NormFamily::L1 => x.iter().map(|v| v.abs()).sum(),
            NormFamily::Linf => x.iter().fold(R::zero(), |m, v| m.max(v.abs())),
            NormFamily::TopK(k) => {
                let mut m: Vec<R> = x.iter().map(|v| v.abs()).collect();
                m.sort_by(|a, b| b.partial_cmp(a).unwrap());
                m[..*k].iter().copied().sum()
            }
            NormFamily::WeightedL2(b) => {
                crate::l2_norm(&x.iter().zip(b).map(|(v, w)| *v / *w).collect::<Vec<_>>())
            }
        })
    }

    /// Euclidean gradient of the gauge at a smooth point `x ≠ 0`.
    ///
    /// The gradient is positively 0-homogeneous and satisfies the Euler
    /// identity `⟨∇ρ(x), x⟩ = ρ(x)`. At points with more than one norming
    /// functional the call refuses with [`Error::NonSmoothPoint`]; callers
    /// that want a deterministic tie-break go through
    /// [`crate::duality::norming_functional`].
    pub fn gradient(&self, x: &[R]) -> Result<Vec<R>> {
        let margin = crate::duality::smoothness_margin(self, x)?;
        if margin == R::zero() {
            return Err(Error::NonSmoothPoint { margin: 0.0 });
        }
        Ok(self.gradient_with_tie_break(x))
    }

    /// Gradient extended to non-smooth points by the deterministic policy:
    /// `linf` picks the lowest tied argmax index, `l1` treats zeros as sign
    /// +1, `top_k` takes the lexicographically first top-k support.
    pub(crate) fn gradient_with_tie_break(&self, x: &[R]) -> Vec<R> {
        match &self.family {
            NormFamily::Euclidean => {
                let rho = crate::l2_norm(x);
                x.iter().map(|v| *v / rho).collect()
            }
            NormFamily::Lp(p) => lp_gradient(*p, x),
            NormFamily::L1 => x.iter().map(|v| signum_pos(*v)).collect(),
            NormFamily::Linf => {
                let j = argmax_abs(x);
                let mut g = vec![R::zero(); x.len()];
                g[j] = signum_pos(x[j]);
                g
            }
            NormFamily::TopK(k) => {
                let support = top_k_support(x, *k);
                let mut g = vec![R::zero(); x.len()];
                for i in support {
                    g[i] = signum_pos(x[i]);
                }
                g
            }
            NormFamily::WeightedL2(b) => {
                let rho = self.eval(x).expect("validated input");
                x.iter().zip(b).map(|(v, w)| *v / (*w * *w) / rho).collect()
            }
        }
    }

    /// Dual norm `‖f‖_* = sup { ⟨f, x⟩ : ρ(x) ≤ 1 }`.
    pub fn dual_norm(&self, f: &[R]) -> Result<R> {
        self.check_input(f)?;
        Ok(match &self.family {
            NormFamily::Euclidean => crate::l2_norm(f),
            NormFamily::Lp(p) => {
                let q = *p / (*p - R::one());
                lp_eval(q, f)
            }
            NormFamily::L1 => f.iter().fold(R::zero(), |m, v| m.max(v.abs())),
            NormFamily::Linf => f.iter().map(|v| v.abs()).sum(),
            NormFamily::TopK(k) => {
                let linf = f.iter().fold(R::zero(), |m, v| m.max(v.abs()));
                let l1: R = f.iter().map(|v| v.abs()).sum();
                linf.max(l1 / r(*k as f64))
            }
            NormFamily::WeightedL2(b) => {
                crate::l2_norm(&f.iter().zip(b).map(|(v, w)| *v * *w).collect::<Vec<_>>())
            }
        })
    }

    /// Parses the `family:params:dim` grammar:
    /// `euclidean:<N>` | `lp:<p>:<N>` | `l1:<N>` | `linf:<N>` |
    /// `topk:<k>:<N>` | `wl2:<b1,...,bN>`.
    ///
    /// `lp:1:<N>` is routed to `l1`; `p < 1` and `p = inf` are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |reason: &str| Error::ParseNormSpec { text: text.into(), reason: reason.into() };
        let parts: Vec<&str> = text.split(':').collect();
        match parts.as_slice() {
            ["euclidean", n] => Self::euclidean(parse_dim(n, text)?),
            ["l1", n] => Self::l1(parse_dim(n, text)?),
            ["linf", n] => Self::linf(parse_dim(n, text)?),
            ["lp", p, n] => {
                let dim = parse_dim(n, text)?;
                let p: f64 = p.parse().map_err(|_| bad("exponent is not a number"))?;
                if p == 1.0 {
                    return Self::l1(dim);
                }
                if p.is_infinite() {
                    return Err(bad("p = inf not accepted in lp; use linf"));
                }
                Self::lp(r(p), dim)
            }
            ["topk", k, n] => {
                let dim = parse_dim(n, text)?;
                let k: usize = k.parse().map_err(|_| bad("k is not an integer"))?;
                Self::top_k(k, dim)
            }
            ["wl2", list] => {
                let b = list
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().map(r))
                    .collect::<std::result::Result<Vec<R>, _>>()
                    .map_err(|_| bad("weights must be comma-separated numbers"))?;
                Self::weighted_l2(b)
            }
            _ => Err(bad("unrecognised family")),
        }
    }

    /// Canonical descriptor string; `parse` round-trips through it.
    pub fn canonical(&self) -> String {
        match &self.family {
            NormFamily::Euclidean => format!("euclidean:{}", self.dim),
            NormFamily::Lp(p) => format!("lp:{}:{}", p, self.dim),
            NormFamily::L1 => format!("l1:{}", self.dim),
            NormFamily::Linf => format!("linf:{}", self.dim),
            NormFamily::TopK(k) => format!("topk:{}:{}", k, self.dim),
            NormFamily::WeightedL2(b) => {
                let list: Vec<String> = b.iter().map(|w| w.to_string()).collect();
                format!("wl2:{}", list.join(","))
            }
        }
    }
}

impl<R: Real> fmt::Display for NormSpec<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

fn parse_dim(s: &str, text: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::ParseNormSpec {
        text: text.into(),
        reason: "dimension is not a positive integer".into(),
    })
}

/// Sign with the zero convention sign(0) = +1.
fn signum_pos<R: Real>(v: R) -> R {
    if v < R::zero() {
        -R::one()
    } else {
        R::one()
    }
}

fn argmax_abs<R: Real>(x: &[R]) -> usize {
    let mut best = 0;
    for i in 1..x.len() {
        if x[i].abs() > x[best].abs() {
            best = i;
        }
    }
    best
}

/// Indices of the k largest moduli, lexicographically first on ties.
pub(crate) fn top_k_support<R: Real>(x: &[R], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[b].abs().partial_cmp(&x[a].abs()).unwrap().then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// ℓ_p norm with max-rescaling so that `|x_i|^p` never overflows.
fn lp_eval<R: Real>(p: R, x: &[R]) -> R {
    let m = x.iter().fold(R::zero(), |acc, v| acc.max(v.abs()));
    if m == R::zero() {
        return R::zero();
    }
    let s: R = x.iter().map(|v| (v.abs() / m).powf(p)).sum();
    m * s.powf(R::one() / p)
}

/// ∇ρ for ℓ_p: `sign(x_i)·|x_i|^{p-1} / ρ(x)^{p-1}`, computed on the
/// max-rescaled coordinates.
fn lp_gradient<R: Real>(p: R, x: &[R]) -> Vec<R> {
    let m = x.iter().fold(R::zero(), |acc, v| acc.max(v.abs()));
    let s: R = x.iter().map(|v| (v.abs() / m).powf(p)).sum();
    // (ρ/m)^{p-1} = s^{(p-1)/p}
    let denom = s.powf((p - R::one()) / p);
    x.iter()
        .map(|v| {
            let t = (v.abs() / m).powf(p - R::one()) / denom;
            if *v < R::zero() {
                -t
            } else {
                t
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dot;

    type Spec = NormSpec<f64>;

    #[test]
    fn eval_examples() {
        let l2 = Spec::euclidean(2).unwrap();
        assert_eq!(l2.eval(&[3.0, 4.0]).unwrap(), 5.0);

        let l1 = Spec::l1(3).unwrap();
        assert_eq!(l1.eval(&[1.0, -2.0, 3.0]).unwrap(), 6.0);

        let tk = Spec::top_k(2, 3).unwrap();
        assert_eq!(tk.eval(&[3.0, -1.0, 2.0]).unwrap(), 5.0);

        // closing-remarks norm √(x² + y²/b²) with b = 1/2
        let wl2 = Spec::weighted_l2(vec![1.0, 0.5]).unwrap();
        assert_eq!(wl2.eval(&[0.0, 1.0]).unwrap(), 2.0);
    }

    #[test]
    fn gradient_examples() {
        let l2 = Spec::euclidean(2).unwrap();
        assert_eq!(l2.gradient(&[3.0, 4.0]).unwrap(), vec![0.6, 0.8]);

        let l1 = Spec::l1(3).unwrap();
        assert_eq!(l1.gradient(&[1.0, -2.0, 3.0]).unwrap(), vec![1.0, -1.0, 1.0]);

        // lp(3) at (1,1): checked via the Euler identity rather than a
        // literal value; finite differences are covered in tests/oracles.rs.
        let lp = Spec::lp(3.0, 2).unwrap();
        let x = [1.0, 1.0];
        let g = lp.gradient(&x).unwrap();
        let rho = lp.eval(&x).unwrap();
        assert!((dot(&g, &x) - rho).abs() <= 1e-12 * rho);
    }

    #[test]
    fn gradient_scale_invariant() {
        let lp = Spec::lp(1.5, 3).unwrap();
        let x = [0.3, -1.2, 0.7];
        let scaled: Vec<f64> = x.iter().map(|v| v * 17.0).collect();
        let g1 = lp.gradient(&x).unwrap();
        let g2 = lp.gradient(&scaled).unwrap();
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_refuses_non_smooth() {
        let linf = Spec::linf(2).unwrap();
        match linf.gradient(&[1.0, 1.0]) {
            Err(Error::NonSmoothPoint { margin }) => assert_eq!(margin, 0.0),
            other => panic!("expected NonSmoothPoint, got {other:?}"),
        }
        assert!(matches!(linf.gradient(&[0.0, 0.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn dual_norm_examples() {
        let l2 = Spec::lp(2.0, 2).unwrap();
        assert!((l2.dual_norm(&[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-15);

        let l1 = Spec::l1(3).unwrap();
        assert_eq!(l1.dual_norm(&[1.0, -2.0, 3.0]).unwrap(), 3.0);

        let tk = Spec::top_k(2, 3).unwrap();
        assert_eq!(tk.dual_norm(&[1.0, 1.0, 1.0]).unwrap(), 1.5);
    }

    #[test]
    fn parse_roundtrip() {
        for text in [
            "euclidean:3",
            "lp:3:4",
            "l1:2",
            "linf:5",
            "topk:2:3",
            "wl2:1,0.5",
        ] {
            let spec = Spec::parse(text).unwrap();
            assert_eq!(spec.canonical(), text);
            assert_eq!(Spec::parse(&spec.canonical()).unwrap(), spec);
        }
        let spec = Spec::parse("lp:3:4").unwrap();
        assert_eq!(spec.dim(), 4);
        assert_eq!(*spec.family(), NormFamily::Lp(3.0));
        let spec = Spec::parse("wl2:1,0.5").unwrap();
        assert_eq!(spec.dim(), 2);
    }

    #[test]
    fn parse_rejects() {
        assert!(Spec::parse("topk:5:3").is_err());
        assert!(Spec::parse("lp:0.5:3").is_err());
        assert!(Spec::parse("lp:inf:3").is_err());
        assert!(Spec::parse("lp:100:3").is_err());
        assert!(Spec::parse("nonsense").is_err());
        assert!(Spec::parse("euclidean:0").is_err());
        assert!(Spec::parse("wl2:1,-1").is_err());
        // p = 1 routed to l1
        assert_eq!(Spec::parse("lp:1:3").unwrap(), Spec::l1(3).unwrap());
    }

    #[test]
    fn one_symmetry_flags() {
        assert!(Spec::lp(3.0, 2).unwrap().is_one_symmetric());
        assert!(Spec::top_k(2, 4).unwrap().is_one_symmetric());
        assert!(!Spec::weighted_l2(vec![1.0, 0.5]).unwrap().is_one_symmetric());
        assert!(Spec::weighted_l2(vec![1.0, 1.0]).unwrap().is_one_symmetric());
        // witness for the counterexample norm: swapping coordinates of (1,0)
        let w = Spec::weighted_l2(vec![1.0, 0.5]).unwrap();
        assert_ne!(w.eval(&[1.0, 0.0]).unwrap(), w.eval(&[0.0, 1.0]).unwrap());
    }

    #[test]
    fn dimension_and_finiteness_errors() {
        let l2 = Spec::euclidean(2).unwrap();
        assert!(matches!(
            l2.eval(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(matches!(l2.eval(&[1.0, f64::NAN]), Err(Error::NonFinite { index: 1 })));
    }

    #[test]
    fn works_in_f32() {
        let l1 = NormSpec::<f32>::l1(3).unwrap();
        assert_eq!(l1.eval(&[1.0f32, -2.0, 3.0]).unwrap(), 6.0f32);
        let lp = NormSpec::<f32>::parse("lp:3:2").unwrap();
        let g = lp.gradient(&[1.0f32, 2.0]).unwrap();
        let rho = lp.eval(&[1.0f32, 2.0]).unwrap();
        assert!((dot(&g, &[1.0f32, 2.0]) - rho).abs() < 1e-6 * rho);
    }
}
