//! Trace experiments: Monte Carlo / quadrature / group-average estimation
//! of tr A as N times the average numerical value ⟨Ax, x*⟩ over (S_X, μ),
//! the Euclidean special case with integrand ⟨Ax, x⟩, and the ellipse
//! counterexample showing that 1-symmetry cannot be dropped.

use std::path::Path;

use serde::Deserialize;

use crate::duality;
use crate::error::{Error, Result};
use crate::hyperoctahedral;
use crate::measure::{self, EstimateReport};
use crate::norm::NormSpec;
use crate::quadrature;

/// Default quadrature tolerance for integrands with kinks.
pub const QUAD_TOL_KINKED: f64 = 1e-8;

/// Square real matrix input, from a file or inline.
#[derive(Clone, Debug)]
pub struct MatrixInput {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
    pub source: Option<String>,
}

impl MatrixInput {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Matrix("matrix is empty".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Matrix("matrix is not square".into()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Matrix("matrix has non-finite entries".into()));
        }
        Ok(Self { n, rows, source: None })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| f64::from(i == j)).collect())
            .collect();
        Self { n, rows, source: None }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.rows[i][i]).sum()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|row| crate::dot(row, x)).collect()
    }
}

#[derive(Deserialize)]
struct MatrixFile {
    n: usize,
    rows: Vec<Vec<f64>>,
}

/// Loads a matrix from JSON `{"n": N, "rows": [[...], ...]}` or CSV
/// (N rows of N comma-separated reals).
pub fn load_matrix(path: impl AsRef<Path>) -> Result<MatrixInput> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let rows = if text.trim_start().starts_with('{') {
        let file: MatrixFile = serde_json::from_str(&text)?;
        if file.rows.len() != file.n {
            return Err(Error::Matrix(format!(
                "declared n={} but found {} rows",
                file.n,
                file.rows.len()
            )));
        }
        file.rows
    } else {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                line.split(',')
                    .map(|tok| {
                        tok.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Matrix(format!("bad entry `{tok}`")))
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?
    };
    let mut m = MatrixInput::new(rows)?;
    m.source = Some(path.display().to_string());
    Ok(m)
}

/// Estimation method for [`estimate_trace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Self-normalised importance sampling over pushforward samples of μ.
    MonteCarlo,
    /// Adaptive quadrature over the parametrised sphere (dim 2 only).
    Quadrature2d,
    /// Exact finite group average over BC_N at one random smooth point
    /// (1-symmetric norms, dim ≤ 8).
    GroupAverage,
}

#[derive(Clone, Debug)]
pub struct TraceExperimentConfig {
    pub norm: NormSpec<f64>,
    pub matrix: MatrixInput,
    pub n_samples: usize,
    pub seed: u64,
    pub n_batches: usize,
    pub method: Method,
}

impl TraceExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.matrix.n != self.norm.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.norm.dim(),
                got: self.matrix.n,
            });
        }
        match self.method {
            Method::Quadrature2d if self.norm.dim() != 2 => {
                Err(Error::OutOfRange("quadrature2d requires dim 2".into()))
            }
            Method::GroupAverage if self.norm.dim() > hyperoctahedral::MAX_ENUM_DIM => {
                Err(Error::OutOfRange("groupaverage requires dim <= 8".into()))
            }
            Method::GroupAverage if !self.norm.is_one_symmetric() => {
                Err(Error::NotOneSymmetric(self.norm.canonical()))
            }
            _ => Ok(()),
        }
    }
}

/// The integrand of the trace formula at a sphere point: the numerical
/// value ⟨Ax, x*⟩, normalised by the pairing ⟨x, x*⟩ (equal to 1 on the
/// sphere). The normalisation makes A = I land on exactly 1.0 per sample.
fn numerical_value(spec: &NormSpec<f64>, a: &MatrixInput, x: &[f64]) -> Result<f64> {
    let nr = duality::norming_functional(spec, x)?;
    if !nr.smooth {
        return Err(Error::NonSmoothPoint { margin: 0.0 });
    }
    let ax = a.matvec(x);
    Ok(crate::dot(&nr.functional, &ax) / nr.pairing)
}

/// Estimates tr A = N·∫ ⟨Ax, x*⟩ μ(dx) by the configured method.
///
/// Non-1-symmetric norms are allowed through the Monte Carlo and
/// quadrature paths — that is the counterexample experiment — and the
/// report carries `theorem_hypothesis_violated: true` for them.
pub fn estimate_trace(config: &TraceExperimentConfig) -> Result<EstimateReport> {
    config.validate()?;
    let spec = &config.norm;
    let a = &config.matrix;
    let n = spec.dim() as f64;
    let mut report = match config.method {
        Method::MonteCarlo => {
            let mut rep = measure::estimate_surface_average(
                spec,
                |x| numerical_value(spec, a, x),
                config.n_samples,
                config.seed,
                config.n_batches,
                "numerical_value",
            )?;
            rep.estimate *= n;
            rep.stderr *= n;
            rep
        }
        Method::Quadrature2d => {
            let avg =
                measure::quadrature_average_2d(spec, |x| numerical_value(spec, a, x), QUAD_TOL_KINKED)?;
            EstimateReport {
                estimate: n * avg,
                stderr: 0.0,
                n_samples: 0,
                n_batches: 0,
                seed: config.seed,
                norm: spec.canonical(),
                integrand: "numerical_value".to_string(),
                theorem_hypothesis_violated: None,
            }
        }
        Method::GroupAverage => {
            let x = smooth_sphere_point(spec, config.seed)?;
            let avg = hyperoctahedral::group_average_numerical_value(spec, &a.rows, &x)?;
            EstimateReport {
                estimate: n * avg,
                stderr: 0.0,
                n_samples: 0,
                n_batches: 0,
                seed: config.seed,
                norm: spec.canonical(),
                integrand: "numerical_value".to_string(),
                theorem_hypothesis_violated: None,
            }
        }
    };
    if !spec.is_one_symmetric() {
        report.theorem_hypothesis_violated = Some(true);
    }
    Ok(report)
}

/// Deterministic smooth point on S_X derived from the seed.
fn smooth_sphere_point(spec: &NormSpec<f64>, seed: u64) -> Result<Vec<f64>> {
    let dim = spec.dim();
    for batch in 0u64.. {
        for u in measure::sample_euclidean_sphere(64, dim, seed.wrapping_add(batch))? {
            if duality::smoothness_margin(spec, &u)? > 0.0 {
                let rho = spec.eval(&u)?;
                return Ok(u.iter().map(|v| v / rho).collect());
            }
        }
    }
    unreachable!()
}

/// Euclidean folklore case: tr A = N·∫_S ⟨Ax, x⟩ μ(dx) with the quadratic
/// form instead of the duality pairing.
pub fn euclidean_trace_estimate(
    a: &MatrixInput,
    n_samples: usize,
    seed: u64,
    n_batches: usize,
) -> Result<EstimateReport> {
    let spec = NormSpec::<f64>::euclidean(a.n)?;
    let mut rep = measure::estimate_surface_average(
        &spec,
        |x| {
            let ax = a.matvec(x);
            Ok(crate::dot(&ax, x) / crate::dot(x, x))
        },
        n_samples,
        seed,
        n_batches,
        "quadratic_form",
    )?;
    rep.estimate *= a.n as f64;
    rep.stderr *= a.n as f64;
    Ok(rep)
}

/// Average of x² over the ellipse x(t) = cos t, y(t) = b sin t with respect
/// to arc length, for each b. At b = 0 the parametric integrand is used
/// directly (the limit curve; the weighted norm degenerates there), with
/// forced quadrature nodes where |sin t| kinks.
pub fn ellipse_counterexample(b_values: &[f64], tol: f64) -> Result<Vec<(f64, f64)>> {
    if !(tol > 0.0) {
        return Err(Error::OutOfRange("tol must be positive".into()));
    }
    let pi = std::f64::consts::PI;
    let forced: Vec<f64> = (1..4).map(|k| k as f64 * 0.5 * pi).collect();
    let mut table = Vec::with_capacity(b_values.len());
    for &b in b_values {
        if !(0.0..=1.0).contains(&b) {
            return Err(Error::OutOfRange(format!("b = {b} outside [0, 1]")));
        }
        let speed = move |t: f64| {
            let (s, c) = t.sin_cos();
            Ok((s * s + b * b * c * c).sqrt())
        };
        let den = quadrature::integrate(&speed, 0.0, 2.0 * pi, &forced, 0.1 * tol, quadrature::DEFAULT_MAX_EVALS)?;
        let num = quadrature::integrate(
            &|t: f64| {
                let c = t.cos();
                Ok(c * c * speed(t)?)
            },
            0.0,
            2.0 * pi,
            &forced,
            0.5 * tol * den,
            quadrature::DEFAULT_MAX_EVALS,
        )?;
        table.push((b, num / den));
    }
    Ok(table)
}

/// One Monte Carlo trace report per sample count, on a common seed ladder
/// (samples nest across the schedule).
pub fn convergence_study(
    config: &TraceExperimentConfig,
    sample_schedule: &[usize],
) -> Result<Vec<EstimateReport>> {
    if sample_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::OutOfRange("sample schedule must be strictly increasing".into()));
    }
    sample_schedule
        .iter()
        .map(|&n| {
            let run = TraceExperimentConfig { n_samples: n, ..config.clone() };
            estimate_trace(&run)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    type Spec = NormSpec<f64>;

    fn config(norm: Spec, matrix: MatrixInput, n: usize, seed: u64, method: Method) -> TraceExperimentConfig {
        TraceExperimentConfig { norm, matrix, n_samples: n, seed, n_batches: 100, method }
    }

    #[test]
    fn identity_matrix_is_exact() {
        for spec in [
            Spec::euclidean(3).unwrap(),
            Spec::l1(3).unwrap(),
            Spec::weighted_l2(vec![1.0, 0.5, 2.0]).unwrap(),
        ] {
            let dim = spec.dim();
            let cfg = config(spec, MatrixInput::identity(dim), 10_000, 5, Method::MonteCarlo);
            let rep = estimate_trace(&cfg).unwrap();
            assert_eq!(rep.estimate, dim as f64);
            assert_eq!(rep.stderr, 0.0);
        }
    }

    #[test]
    fn monte_carlo_recovers_trace() {
        let a = MatrixInput::new(vec![
            vec![1.0, 0.3, -0.5],
            vec![0.2, -2.0, 0.8],
            vec![-0.1, 0.6, 4.0],
        ])
        .unwrap();
        for spec in [Spec::euclidean(3).unwrap(), Spec::lp(3.0, 3).unwrap()] {
            let cfg = config(spec, a.clone(), 200_000, 17, Method::MonteCarlo);
            let rep = estimate_trace(&cfg).unwrap();
            assert!(
                (rep.estimate - 3.0).abs() <= 4.0 * rep.stderr,
                "{}: {} ± {}",
                rep.norm,
                rep.estimate,
                rep.stderr
            );
            assert!(rep.theorem_hypothesis_violated.is_none());
        }
    }

    #[test]
    fn methods_agree_in_dim_2() {
        let a = MatrixInput::new(vec![vec![2.0, 1.0], vec![-1.0, 3.0]]).unwrap();
        let spec = Spec::l1(2).unwrap();
        let mc = estimate_trace(&config(spec.clone(), a.clone(), 100_000, 3, Method::MonteCarlo))
            .unwrap();
        let quad =
            estimate_trace(&config(spec.clone(), a.clone(), 0, 3, Method::Quadrature2d)).unwrap();
        let group =
            estimate_trace(&config(spec, a.clone(), 0, 3, Method::GroupAverage)).unwrap();
        let tr = a.trace();
        assert!((mc.estimate - tr).abs() <= 4.0 * mc.stderr);
        assert!((quad.estimate - tr).abs() <= 1e-8);
        assert!((group.estimate - tr).abs() <= 1e-10);
    }

    #[test]
    fn counterexample_norm_misses_the_trace() {
        // A = diag(1, 0) on the ellipse norm with b = 1/2: the average of
        // x² is not tr A / 2, so the estimate is far from tr A = 1
        let a = MatrixInput::new(vec![vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let spec = Spec::weighted_l2(vec![1.0, 0.5]).unwrap();
        let rep = estimate_trace(&config(spec, a, 0, 1, Method::Quadrature2d)).unwrap();
        assert_eq!(rep.theorem_hypothesis_violated, Some(true));
        assert!((rep.estimate - 1.0).abs() > 0.05, "estimate = {}", rep.estimate);
    }

    #[test]
    fn estimator_is_linear_in_the_matrix() {
        let a = MatrixInput::new(vec![vec![1.0, 2.0], vec![0.5, -1.0]]).unwrap();
        let b = MatrixInput::new(vec![vec![0.25, -3.0], vec![1.5, 2.0]]).unwrap();
        let sum = MatrixInput::new(vec![vec![1.25, -1.0], vec![2.0, 1.0]]).unwrap();
        let spec = Spec::lp(1.5, 2).unwrap();
        let run = |m: MatrixInput| {
            estimate_trace(&config(spec.clone(), m, 50_000, 7, Method::MonteCarlo)).unwrap()
        };
        let (ra, rb, rsum) = (run(a), run(b), run(sum));
        assert!((ra.estimate + rb.estimate - rsum.estimate).abs() < 1e-12);
    }

    #[test]
    fn ellipse_counterexample_endpoints() {
        let table = ellipse_counterexample(&[1.0, 0.25, 0.0], 1e-10).unwrap();
        assert!((table[0].1 - 0.5).abs() < 1e-10);
        assert!((table[2].1 - 1.0 / 3.0).abs() < 1e-8);
        // strictly between the endpoint values
        assert!(table[1].1 > 1.0 / 3.0 && table[1].1 < 0.5);
        assert!(ellipse_counterexample(&[-0.1], 1e-8).is_err());
    }

    #[test]
    fn convergence_stderr_shrinks() {
        let a = MatrixInput::new(vec![
            vec![1.0, 0.2, 0.0],
            vec![0.1, 2.0, -0.3],
            vec![0.0, 0.5, -1.0],
        ])
        .unwrap();
        let cfg = config(Spec::euclidean(3).unwrap(), a, 0, 13, Method::MonteCarlo);
        let reports = convergence_study(&cfg, &[1_000, 10_000, 100_000]).unwrap();
        // Monte Carlo rate: stderr drops roughly like 1/√n per decade
        for w in reports.windows(2) {
            let ratio = w[0].stderr / w[1].stderr;
            let root_ten = 10f64.sqrt();
            assert!(ratio > root_ten / 2.0 && ratio < root_ten * 2.0, "ratio = {ratio}");
        }
        assert!(convergence_study(&cfg, &[100, 100]).is_err());
    }

    #[test]
    fn matrix_io() {
        let dir = std::env::temp_dir();
        let json = dir.join("trace_lab_test_matrix.json");
        std::fs::write(&json, r#"{"n":2,"rows":[[1,2],[3,4]]}"#).unwrap();
        let m = load_matrix(&json).unwrap();
        assert_eq!(m.n, 2);
        assert_eq!(m.trace(), 5.0);

        let csv = dir.join("trace_lab_test_matrix.csv");
        std::fs::write(&csv, "1,0\n0,1\n").unwrap();
        let m = load_matrix(&csv).unwrap();
        assert_eq!(m.rows, MatrixInput::identity(2).rows);

        let ragged = dir.join("trace_lab_test_ragged.csv");
        std::fs::write(&ragged, "1,0\n0\n").unwrap();
        assert!(load_matrix(&ragged).is_err());
    }

    #[test]
    fn config_validation() {
        let a = MatrixInput::identity(3);
        let cfg = config(Spec::euclidean(3).unwrap(), a.clone(), 100, 1, Method::Quadrature2d);
        assert!(estimate_trace(&cfg).is_err());
        let cfg = config(Spec::weighted_l2(vec![1.0, 2.0]).unwrap(), a, 100, 1, Method::GroupAverage);
        assert!(estimate_trace(&cfg).is_err());
    }
}
