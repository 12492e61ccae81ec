//! The normalised hypersurface measure μ on the unit sphere S_X, realised
//! as a weighted pushforward of the uniform Euclidean sphere measure
//! through the radial map `F(u) = u/ρ(u)`.
//!
//! The pushforward density on the Euclidean unit sphere is
//!
//! ```text
//! w(u) = ‖∇ρ(u)‖₂ / ρ(u)^N,
//! ```
//!
//! the area element of the radial graph; tests/oracles.rs verifies the
//! formula against parametric arc length in dimension 2 and against the
//! triangulated ℓ₁-ball boundary area in dimension 3. Averages over μ are
//! self-normalised ratio estimates, so the unknown total surface area
//! cancels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::duality;
use crate::error::{Error, Result};
use crate::norm::{NormFamily, NormSpec};
use crate::quadrature;

/// Samples per RNG substream. Chunk `c` of a run with seed `s` draws from
/// stream `c` of a ChaCha generator seeded with `s`, so results are
/// bit-identical however the chunks are scheduled across threads, and
/// sample prefixes agree across runs with different totals.
pub const CHUNK: usize = 4096;

/// Default batch count for batch-means standard errors.
pub const DEFAULT_BATCHES: usize = 100;

pub(crate) fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Weighted sample of μ: points on S_X with pushforward density values.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub seed: u64,
    pub spec: NormSpec<f64>,
    /// Count of Euclidean directions that hit a floating-point tie of a
    /// polyhedral norm and were redrawn. Exact ties have probability zero,
    /// so anything nonzero signals an anomaly upstream.
    pub n_resampled: u64,
}

/// Monte Carlo estimate with batch-means standard error.
#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub estimate: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub n_batches: usize,
    pub seed: u64,
    pub norm: String,
    pub integrand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem_hypothesis_violated: Option<bool>,
}

/// Uniform samples of the Euclidean unit sphere S^{dim-1} (Gaussian
/// normalisation). Deterministic for a fixed seed.
pub fn sample_euclidean_sphere(n: usize, dim: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 || dim == 0 {
        return Err(Error::OutOfRange("need n >= 1 and dim >= 1".into()));
    }
    let n_chunks = n.div_ceil(CHUNK);
    let chunks: Vec<Vec<Vec<f64>>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let count = CHUNK.min(n - c * CHUNK);
            (0..count).map(|_| draw_unit(&mut rng, dim)).collect()
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

fn draw_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let nrm = crate::l2_norm(&v);
        if nrm > 1e-100 {
            return v.iter().map(|x| x / nrm).collect();
        }
    }
}

/// Pushforward density `w(u) = ‖∇ρ(u)‖₂ / ρ(u)^N` at a smooth Euclidean
/// unit vector `u`.
pub fn surface_weight(spec: &NormSpec<f64>, u: &[f64]) -> Result<f64> {
    let rho = spec.eval(u)?;
    if rho == 0.0 {
        return Err(Error::ZeroVector);
    }
    let grad = spec.gradient(u)?;
    Ok(crate::l2_norm(&grad) / rho.powi(spec.dim() as i32))
}

/// Draws `n` weighted points of S_X distributed as μ. Euclidean directions
/// that are exact non-smooth ties (margin 0) are redrawn and counted.
pub fn pushforward_sample(spec: &NormSpec<f64>, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::OutOfRange("need n >= 1".into()));
    }
    let dim = spec.dim();
    let n_chunks = n.div_ceil(CHUNK);
    let chunks: Vec<(Vec<Vec<f64>>, Vec<f64>, u64)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let count = CHUNK.min(n - c * CHUNK);
            let mut points = Vec::with_capacity(count);
            let mut weights = Vec::with_capacity(count);
            let mut resampled = 0u64;
            while points.len() < count {
                let u = draw_unit(&mut rng, dim);
                let margin = duality::smoothness_margin(spec, &u).expect("unit vector");
                if margin == 0.0 {
                    resampled += 1;
                    continue;
                }
                let rho = spec.eval(&u).expect("unit vector");
                let grad = spec.gradient_with_tie_break(&u);
                points.push(u.iter().map(|x| x / rho).collect());
                weights.push(crate::l2_norm(&grad) / rho.powi(dim as i32));
            }
            (points, weights, resampled)
        })
        .collect();
    let mut points = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut n_resampled = 0;
    for (p, w, r) in chunks {
        points.extend(p);
        weights.extend(w);
        n_resampled += r;
    }
    Ok(SampleBatch { points, weights, seed, spec: spec.clone(), n_resampled })
}

/// Self-normalised Monte Carlo average of `integrand` over (S_X, μ):
/// `Σ w_i f(x_i) / Σ w_i`, with a batch-means standard error.
///
/// The ratio is computed anchored at the first sampled value, so a constant
/// integrand is reproduced exactly with standard error exactly zero.
pub fn estimate_surface_average<F>(
    spec: &NormSpec<f64>,
    integrand: F,
    n: usize,
    seed: u64,
    n_batches: usize,
    integrand_tag: &str,
) -> Result<EstimateReport>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if n_batches < 2 || n < n_batches {
        return Err(Error::OutOfRange("need n >= n_batches >= 2".into()));
    }
    if n % n_batches != 0 {
        return Err(Error::OutOfRange(format!(
            "sample count {n} is not divisible into {n_batches} equal batches"
        )));
    }
    let batch = pushforward_sample(spec, n, seed)?;
    let values: Vec<f64> = batch
        .points
        .par_iter()
        .map(|x| {
            let v = integrand(x)?;
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { point: x.clone() });
            }
            Ok(v)
        })
        .collect::<Result<Vec<f64>>>()?;

    let anchor = values[0];
    let ratio = |ws: &[f64], vs: &[f64]| -> f64 {
        let num: f64 = ws.iter().zip(vs).map(|(w, v)| w * (v - anchor)).sum();
        let den: f64 = ws.iter().sum();
        anchor + num / den
    };
    let estimate = ratio(&batch.weights, &values);
    let per_batch: Vec<f64> = batch
        .weights
        .chunks(n / n_batches)
        .zip(values.chunks(n / n_batches))
        .map(|(w, v)| ratio(w, v))
        .collect();
    let mean = per_batch.iter().sum::<f64>() / n_batches as f64;
    let var =
        per_batch.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n_batches - 1) as f64;
    let stderr = (var / n_batches as f64).sqrt();

    Ok(EstimateReport {
        estimate,
        stderr,
        n_samples: n,
        n_batches,
        seed,
        norm: spec.canonical(),
        integrand: integrand_tag.to_string(),
        theorem_hypothesis_violated: None,
    })
}

/// Surface area of the Euclidean sphere S^{dim-1}.
pub fn euclidean_sphere_area(dim: usize) -> f64 {
    // A_1 = 2, A_2 = 2π, A_d = 2π/(d-2) · A_{d-2}
    match dim {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        d => 2.0 * std::f64::consts::PI / (d as f64 - 2.0) * euclidean_sphere_area(d - 2),
    }
}

/// Monte Carlo estimate of the total surface area of S_X,
/// `∫ w dσ = area(S^{N-1}) · E[w]`.
pub fn surface_area(
    spec: &NormSpec<f64>,
    n: usize,
    seed: u64,
    n_batches: usize,
) -> Result<EstimateReport> {
    if n_batches < 2 || n < n_batches || n % n_batches != 0 {
        return Err(Error::OutOfRange("need n divisible into n_batches >= 2 batches".into()));
    }
    let batch = pushforward_sample(spec, n, seed)?;
    let scale = euclidean_sphere_area(spec.dim());
    let per_batch: Vec<f64> = batch
        .weights
        .chunks(n / n_batches)
        .map(|w| scale * w.iter().sum::<f64>() / w.len() as f64)
        .collect();
    let estimate = scale * batch.weights.iter().sum::<f64>() / n as f64;
    let mean = per_batch.iter().sum::<f64>() / n_batches as f64;
    let var =
        per_batch.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n_batches - 1) as f64;
    let stderr = (var / n_batches as f64).sqrt();
    Ok(EstimateReport {
        estimate,
        stderr,
        n_samples: n,
        n_batches,
        seed,
        norm: spec.canonical(),
        integrand: "surface_area".to_string(),
        theorem_hypothesis_violated: None,
    })
}

/// Angles where the sphere parametrisation `θ ↦ u(θ)/ρ(u(θ))` of a dim-2
/// polyhedral norm is non-smooth. The π/4 grid covers every supported
/// family.
pub fn kink_angles_2d(spec: &NormSpec<f64>) -> Vec<f64> {
    match spec.family() {
        NormFamily::L1 | NormFamily::Linf | NormFamily::TopK(_) => {
            (1..8).map(|k| k as f64 * std::f64::consts::FRAC_PI_4).collect()
        }
        _ => Vec::new(),
    }
}

/// Parametrised sphere point `G(θ) = u(θ)/ρ(u(θ))` with `u = (cos θ, sin θ)`,
/// and the speed `J(θ) = ‖G'(θ)‖₂` from the analytic gauge gradient.
fn point_and_speed(spec: &NormSpec<f64>, theta: f64) -> Result<(Vec<f64>, f64)> {
    let u = [theta.cos(), theta.sin()];
    let du = [-theta.sin(), theta.cos()];
    let rho = spec.eval(&u)?;
    let grad = spec.gradient(&u)?;
    let radial = crate::dot(&grad, &du) / (rho * rho);
    let g = vec![u[0] / rho, u[1] / rho];
    let gprime = [du[0] / rho - u[0] * radial, du[1] / rho - u[1] * radial];
    Ok((g, crate::l2_norm(&gprime)))
}

/// Average of `integrand` over (S_X, μ) in dimension 2 by adaptive
/// quadrature: `∫ f(G(θ)) J(θ) dθ / ∫ J(θ) dθ`.
pub fn quadrature_average_2d<F>(spec: &NormSpec<f64>, integrand: F, tol: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if spec.dim() != 2 {
        return Err(Error::OutOfRange("quadrature_average_2d needs dim 2".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::OutOfRange("tol must be positive".into()));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let forced = kink_angles_2d(spec);
    let speed = |t: f64| point_and_speed(spec, t).map(|(_, j)| j);
    let den = quadrature::integrate(&speed, 0.0, two_pi, &forced, 0.1 * tol, quadrature::DEFAULT_MAX_EVALS)?;
    let weighted = |t: f64| {
        let (g, j) = point_and_speed(spec, t)?;
        Ok(integrand(&g)? * j)
    };
    let num = quadrature::integrate(
        &weighted,
        0.0,
        two_pi,
        &forced,
        0.5 * tol * den,
        quadrature::DEFAULT_MAX_EVALS,
    )?;
    Ok(num / den)
}

/// Perimeter of S_X for a dim-2 spec, by quadrature of the pushforward
/// weight over the Euclidean circle: `∫ w(u(θ)) dθ`.
pub fn perimeter_quadrature_2d(spec: &NormSpec<f64>, tol: f64) -> Result<f64> {
    if spec.dim() != 2 {
        return Err(Error::OutOfRange("perimeter_quadrature_2d needs dim 2".into()));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let forced = kink_angles_2d(spec);
    let w = |t: f64| surface_weight(spec, &[t.cos(), t.sin()]);
    quadrature::integrate(&w, 0.0, two_pi, &forced, tol, quadrature::DEFAULT_MAX_EVALS)
}
