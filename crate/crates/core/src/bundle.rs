//! Finite-difference audit of Hermitian bundle metrics on a coordinate chart:
//! Chern curvature, bundle Ricci, curvature splitting, Griffiths-negativity
//! sampling, the induced base metric, and constancy of Ricci eigenvalues.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Deserialize;

use crate::error::{CymError, Result};
use crate::fd::{self, FdConfig};
use crate::rng::Lcg64;

/// Default differencing for curvature-level (second derivative) quantities.
pub fn default_fd() -> FdConfig {
    FdConfig::new(1e-3, 2)
}

/// Chart domain of a metric; used for membership and stencil margins.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    /// `|z| < 1` in ℂⁿ.
    UnitBall { n: usize },
    /// All of ℂⁿ.
    Whole { n: usize },
}

impl Domain {
    pub fn n(&self) -> usize {
        match self {
            Domain::UnitBall { n } | Domain::Whole { n } => *n,
        }
    }

    /// Distance to the domain boundary (1 for unbounded charts).
    pub fn margin(&self, z: &[C64]) -> f64 {
        match self {
            Domain::UnitBall { .. } => {
                let norm: f64 = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                1.0 - norm
            }
            Domain::Whole { .. } => 1.0,
        }
    }

    pub fn contains(&self, z: &[C64]) -> bool {
        self.margin(z) > 0.0
    }
}

type MetricFn = Box<dyn Fn(&[C64]) -> DMatrix<C64> + Send + Sync>;

/// A Hermitian bundle metric `h_{αβ̄}(z)` given on a single chart.
pub struct ChartBundleMetric {
    n: usize,
    k: usize,
    domain: Domain,
    name: String,
    h: MetricFn,
}

impl ChartBundleMetric {
    pub fn new(name: impl Into<String>, domain: Domain, k: usize, h: MetricFn) -> Self {
        Self {
            n: domain.n(),
            k,
            domain,
            name: name.into(),
            h,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn h_at(&self, z: &[C64]) -> DMatrix<C64> {
        (self.h)(z)
    }

    fn check_point(&self, z: &[C64], needed_margin: f64) -> Result<()> {
        if z.len() != self.n {
            return Err(CymError::Domain(format!(
                "point has {} coordinates, base dimension is {}",
                z.len(),
                self.n
            )));
        }
        if self.domain.margin(z) < needed_margin {
            return Err(CymError::Domain(format!(
                "point too close to the chart boundary (margin {:.3e} < {needed_margin:.3e})",
                self.domain.margin(z)
            )));
        }
        Ok(())
    }

    /// Hermitian + positive-definite validation of h at a point; returns h.
    fn validated_h(&self, z: &[C64]) -> Result<DMatrix<C64>> {
        let h = self.h_at(z);
        let herm_gap = (&h - h.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        let scale = h.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
        if herm_gap > 1e-12 * scale {
            return Err(CymError::Metric(format!(
                "h is not Hermitian at the queried point (gap {herm_gap:.3e})"
            )));
        }
        if h.clone().cholesky().is_none() {
            return Err(CymError::Metric(
                "h is not positive definite at the queried point".into(),
            ));
        }
        Ok(h)
    }

    /// `log det h`, the determinant-bundle potential.
    pub fn log_det_h(&self, z: &[C64]) -> Result<f64> {
        let h = self.h_at(z);
        let det = h.lu().determinant();
        if det.re <= 0.0 || det.im.abs() > 1e-9 * det.re.abs().max(1.0) {
            return Err(CymError::Metric(format!(
                "det h = {det} is not positive at the queried point"
            )));
        }
        Ok(det.re.ln())
    }

    /// Direct sum of rank-1 metrics over a common chart.
    pub fn direct_sum(metrics: Vec<ChartBundleMetric>) -> Result<ChartBundleMetric> {
        if metrics.is_empty() {
            return Err(CymError::Composition("empty direct sum".into()));
        }
        let domain = metrics[0].domain;
        let n = metrics[0].n;
        for m in &metrics {
            if m.k != 1 {
                return Err(CymError::Composition(
                    "direct sum expects rank-1 summands".into(),
                ));
            }
            if m.domain != domain || m.n != n {
                return Err(CymError::Composition(
                    "direct sum over mismatched base domains".into(),
                ));
            }
        }
        let k = metrics.len();
        let name = format!(
            "sum({})",
            metrics.iter().map(|m| m.name.as_str()).collect::<Vec<_>>().join(",")
        );
        let fns: Vec<MetricFn> = metrics.into_iter().map(|m| m.h).collect();
        let h: MetricFn = Box::new(move |z| {
            let mut out = DMatrix::from_element(k, k, C64::new(0.0, 0.0));
            for (a, f) in fns.iter().enumerate() {
                out[(a, a)] = f(z)[(0, 0)];
            }
            out
        });
        Ok(ChartBundleMetric::new(name, domain, k, h))
    }
}

/// Chern curvature components `Θ_{αβ̄ij̄}` at a point, stored as k×k blocks
/// indexed by the base pair (i, j).
pub struct CurvatureTensor {
    pub n: usize,
    pub k: usize,
    /// `blocks[i][j][(α, β)] = Θ_{αβ̄ij̄}`.
    pub blocks: Vec<Vec<DMatrix<C64>>>,
}

impl CurvatureTensor {
    pub fn component(&self, alpha: usize, beta: usize, i: usize, j: usize) -> C64 {
        self.blocks[i][j][(alpha, beta)]
    }

    /// Max deviation from the Hermitian symmetry `Θ_{αβ̄ij̄} = conj(Θ_{βᾱjī})`.
    pub fn hermitian_symmetry_gap(&self) -> f64 {
        let mut gap = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let diff = &self.blocks[i][j] - self.blocks[j][i].adjoint();
                gap = gap.max(diff.iter().map(|c| c.norm()).fold(0.0, f64::max));
            }
        }
        gap
    }

    /// Quartic form `Θ(ξ⊗v, ξ⊗v)`; real for Hermitian Θ up to FD noise.
    pub fn quartic(&self, xi: &[C64], v: &[C64]) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.n {
            for j in 0..self.n {
                for a in 0..self.k {
                    for b in 0..self.k {
                        acc += self.blocks[i][j][(a, b)] * xi[a] * xi[b].conj() * v[i]
                            * v[j].conj();
                    }
                }
            }
        }
        acc.re
    }
}

/// Assemble `Θ_{αβ̄ij̄} = −∂²h/∂z_i∂z̄_j + ∂_i h · h⁻¹ · ∂_j̄ h` from finite
/// differences of the metric.
pub fn chern_curvature(
    metric: &ChartBundleMetric,
    z: &[C64],
    cfg: &FdConfig,
) -> Result<CurvatureTensor> {
    metric.check_point(z, 2.0 * cfg.step)?;
    let h0 = metric.validated_h(z)?;
    let h_inv = h0
        .clone()
        .try_inverse()
        .ok_or_else(|| CymError::Metric("h is not invertible".into()))?;
    let field = |w: &[C64]| -> Result<DMatrix<C64>> { Ok(metric.h_at(w)) };
    let d1 = fd::matrix_d1(&field, z, cfg)?;
    let d2 = fd::matrix_mixed_d2(&field, z, cfg)?;

    let n = metric.n;
    let mut blocks = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let middle = &d1[i] * &h_inv * d1[j].adjoint();
            row.push(middle - &d2[i][j]);
        }
        blocks.push(row);
    }
    Ok(CurvatureTensor {
        n,
        k: metric.k,
        blocks,
    })
}

/// Trace the curvature over the fiber with the inverse metric:
/// `R_{ij̄} = h^{αβ̄} Θ_{αβ̄ij̄}`, the Ricci form of the bundle (and of its
/// determinant line bundle).
pub fn bundle_ricci(theta: &CurvatureTensor, h0: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if h0.nrows() != theta.k {
        return Err(CymError::Metric("dimension mismatch in bundle_ricci".into()));
    }
    let h_inv = h0
        .clone()
        .try_inverse()
        .ok_or_else(|| CymError::Metric("h is not invertible".into()))?;
    let n = theta.n;
    let mut r = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..theta.k {
                for b in 0..theta.k {
                    acc += h_inv[(a, b)] * theta.blocks[i][j][(a, b)];
                }
            }
            r[(i, j)] = acc;
        }
    }
    Ok(r)
}

/// Max deviation from the splitting identity `Θ_{αβ̄ij̄} = (1/k) h_{αβ̄} R_{ij̄}`.
pub fn split_residual(metric: &ChartBundleMetric, z: &[C64], cfg: &FdConfig) -> Result<f64> {
    let theta = chern_curvature(metric, z, cfg)?;
    let h0 = metric.h_at(z);
    let ricci = bundle_ricci(&theta, &h0)?;
    let kf = metric.k as f64;
    let mut worst = 0.0f64;
    for i in 0..metric.n {
        for j in 0..metric.n {
            for a in 0..metric.k {
                for b in 0..metric.k {
                    let split = h0[(a, b)] * ricci[(i, j)] / kf;
                    worst = worst.max((theta.blocks[i][j][(a, b)] - split).norm());
                }
            }
        }
    }
    Ok(worst)
}

/// Outcome of sampling the curvature quartic form.
#[derive(Clone, Debug)]
pub struct GriffithsReport {
    pub min_value: f64,
    pub max_value: f64,
    /// All sampled values < −1e-10. Evidence, not a proof.
    pub negative_evidence: bool,
    pub samples: usize,
    pub seed: u64,
}

/// Evaluate the quartic form on `trials` seeded random unit pairs plus all
/// coordinate-axis pairs.
pub fn griffiths_negativity_sample(
    metric: &ChartBundleMetric,
    z: &[C64],
    cfg: &FdConfig,
    trials: usize,
    seed: u64,
) -> Result<GriffithsReport> {
    if trials < 1 {
        return Err(CymError::Precondition("trials must be ≥ 1".into()));
    }
    let theta = chern_curvature(metric, z, cfg)?;
    let mut rng = Lcg64::new(seed);
    let mut min_value = f64::INFINITY;
    let mut max_value = f64::NEG_INFINITY;
    let mut samples = 0usize;

    let mut record = |v: f64| {
        min_value = min_value.min(v);
        max_value = max_value.max(v);
        samples += 1;
    };

    for a in 0..metric.k {
        for i in 0..metric.n {
            let mut xi = vec![C64::new(0.0, 0.0); metric.k];
            xi[a] = C64::new(1.0, 0.0);
            let mut v = vec![C64::new(0.0, 0.0); metric.n];
            v[i] = C64::new(1.0, 0.0);
            record(theta.quartic(&xi, &v));
        }
    }
    for _ in 0..trials {
        let xi = rng.unit_complex_vector(metric.k);
        let v = rng.unit_complex_vector(metric.n);
        record(theta.quartic(&xi, &v));
    }

    Ok(GriffithsReport {
        min_value,
        max_value,
        negative_evidence: max_value < -1e-10,
        samples,
        seed,
    })
}

/// The Kähler metric of the determinant potential, `g_{ij̄} = ∂²log H/∂z_i∂z̄_j`
/// with `H = det h`, together with `G = det g`.
pub fn induced_base_metric(
    metric: &ChartBundleMetric,
    z: &[C64],
    cfg: &FdConfig,
) -> Result<(DMatrix<C64>, f64)> {
    metric.check_point(z, 2.0 * cfg.step)?;
    let potential = |w: &[C64]| metric.log_det_h(w);
    let g = fd::hessian_scalar(&potential, z, cfg)?;
    if g.clone().cholesky().is_none() {
        return Err(CymError::NotNegativeBundle(
            "determinant potential does not induce a positive metric".into(),
        ));
    }
    let det = g.clone().lu().determinant();
    Ok((g, det.re))
}

/// Per-point sorted Ricci eigenvalues and a constancy verdict.
#[derive(Clone, Debug)]
pub struct RicciEigenReport {
    /// Sorted eigenvalues of `Ric(g)·g⁻¹` per sample point.
    pub eigenvalues: Vec<Vec<f64>>,
    /// Max over eigenvalue index of (max − min) across points.
    pub spread: f64,
    pub tolerance: f64,
    pub constant: bool,
}

/// Eigenvalues of the Ricci endomorphism of the induced metric at each sample
/// point. `Ric(g) = −∂∂̄ log det g` is computed by nested finite differences:
/// the inner Hessian produces `g`, the outer one differentiates `log det g`.
/// Steps scale with the domain margin; fourth derivatives of the potential
/// are involved, hence the 1e-4 default tolerance.
pub fn ricci_eigenvalues(
    metric: &ChartBundleMetric,
    points: &[Vec<C64>],
    tolerance: f64,
) -> Result<RicciEigenReport> {
    let mut eigenvalues = Vec::with_capacity(points.len());
    for z in points {
        let margin = metric.domain().margin(z);
        if margin <= 0.0 {
            return Err(CymError::Domain("sample point outside the chart".into()));
        }
        let step = 1e-2 * margin.min(1.0);
        let cfg = FdConfig::new(step, 2);
        let (g, _) = induced_base_metric(metric, z, &cfg)?;
        let log_g_det = |w: &[C64]| -> Result<f64> {
            let inner = fd::hessian_scalar(&|y: &[C64]| metric.log_det_h(y), w, &cfg)?;
            let det = inner.lu().determinant();
            if det.re <= 0.0 {
                return Err(CymError::NotNegativeBundle(
                    "det g is not positive inside the nested stencil".into(),
                ));
            }
            Ok(det.re.ln())
        };
        let minus_ricci = fd::hessian_scalar(&log_g_det, z, &cfg)?;
        let ricci = -minus_ricci;
        eigenvalues.push(generalized_hermitian_eigenvalues(&ricci, &g)?);
    }

    let n = metric.n();
    let mut spread = 0.0f64;
    for idx in 0..n {
        let vals: Vec<f64> = eigenvalues.iter().map(|e| e[idx]).collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max(hi - lo);
    }
    Ok(RicciEigenReport {
        eigenvalues,
        spread,
        tolerance,
        constant: spread <= tolerance,
    })
}

/// Eigenvalues of `A·B⁻¹` for Hermitian A and Hermitian positive-definite B,
/// via the Cholesky reduction to an ordinary Hermitian problem.
pub fn generalized_hermitian_eigenvalues(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<Vec<f64>> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| CymError::Metric("metric not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| CymError::Metric("Cholesky factor not invertible".into()))?;
    let reduced = &l_inv * a * l_inv.adjoint();
    let herm = (reduced.clone() + reduced.adjoint()).unscale(2.0);
    let mut eigs: Vec<f64> = herm.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(eigs)
}

/// Hermitian eigenvalues, ascending.
pub fn hermitian_eigenvalues(a: &DMatrix<C64>) -> Vec<f64> {
    let herm = (a.clone() + a.adjoint()).unscale(2.0);
    let mut eigs: Vec<f64> = herm.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    eigs
}

// ---------------------------------------------------------------------------
// Built-in metric models
// ---------------------------------------------------------------------------

/// Rank-1 `h = (1 − |z|²)^{−q}` over the unit ball in ℂⁿ (negative for q > 0).
pub fn disk_power(n: usize, q: f64) -> ChartBundleMetric {
    let h: MetricFn = Box::new(move |z: &[C64]| {
        let s: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        DMatrix::from_element(1, 1, C64::new((1.0 - s).powf(-q), 0.0))
    });
    ChartBundleMetric::new(format!("disk^(-{q})"), Domain::UnitBall { n }, 1, h)
}

/// Direct sum of disk powers, rank = powers.len().
pub fn disk_power_sum(n: usize, powers: &[f64]) -> Result<ChartBundleMetric> {
    ChartBundleMetric::direct_sum(powers.iter().map(|&q| disk_power(n, q)).collect())
}

/// Flat rank-1 metric `h = 1` (zero curvature).
pub fn flat(n: usize) -> ChartBundleMetric {
    let h: MetricFn =
        Box::new(move |_z: &[C64]| DMatrix::from_element(1, 1, C64::new(1.0, 0.0)));
    ChartBundleMetric::new("flat", Domain::Whole { n }, 1, h)
}

/// Rank-1 Fubini–Study-type metric `h = (1 + |z|²)^{−1}` (Griffiths positive).
pub fn fubini_study_positive(n: usize) -> ChartBundleMetric {
    let h: MetricFn = Box::new(move |z: &[C64]| {
        let s: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        DMatrix::from_element(1, 1, C64::new(1.0 / (1.0 + s), 0.0))
    });
    ChartBundleMetric::new("fs-positive", Domain::Whole { n }, 1, h)
}

/// Rank-1 `h = exp(|z|²)`: negative bundle whose induced base metric is the
/// flat Euclidean one (zero Ricci eigenvalues).
pub fn gaussian(n: usize) -> ChartBundleMetric {
    let h: MetricFn = Box::new(move |z: &[C64]| {
        let s: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        DMatrix::from_element(1, 1, C64::new(s.exp(), 0.0))
    });
    ChartBundleMetric::new("gauss", Domain::Whole { n }, 1, h)
}

// ---------------------------------------------------------------------------
// JSON-specified polynomial potentials
// ---------------------------------------------------------------------------

/// One monomial `c · z^I z̄^J` of a determinant potential.
#[derive(Clone, Debug, Deserialize)]
pub struct PotentialTerm {
    pub i_multi: Vec<u32>,
    pub j_multi: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

/// Coefficient table for `log H = Σ c_{IJ} z^I z̄^J`.
#[derive(Clone, Debug, Deserialize)]
pub struct PotentialSpec {
    pub n: usize,
    pub k: usize,
    pub terms: Vec<PotentialTerm>,
}

/// Build the rank-k metric `h = exp(log H / k)·I_k` from a JSON coefficient
/// table for the determinant potential.
pub fn metric_from_potential_json(json: &str) -> Result<ChartBundleMetric> {
    let spec: PotentialSpec = serde_json::from_str(json)
        .map_err(|e| CymError::InvalidSpec(format!("bad potential JSON: {e}")))?;
    if spec.n < 1 || spec.k < 1 {
        return Err(CymError::InvalidSpec("potential requires n ≥ 1, k ≥ 1".into()));
    }
    for t in &spec.terms {
        if t.i_multi.len() != spec.n || t.j_multi.len() != spec.n {
            return Err(CymError::InvalidSpec(
                "multi-index length must equal n".into(),
            ));
        }
    }
    let n = spec.n;
    let k = spec.k;
    let terms = spec.terms.clone();
    let h: MetricFn = Box::new(move |z: &[C64]| {
        let mut acc = C64::new(0.0, 0.0);
        for t in &terms {
            let mut mono = C64::new(t.re, t.im);
            for (idx, &p) in t.i_multi.iter().enumerate() {
                mono *= z[idx].powu(p);
            }
            for (idx, &p) in t.j_multi.iter().enumerate() {
                mono *= z[idx].conj().powu(p);
            }
            acc += mono;
        }
        // a Hermitian table has cancelling imaginary parts; tiny residue is
        // round-off, anything larger flags a bad table downstream via NaN
        let log_h_det = if acc.im.abs() <= 1e-9 * acc.re.abs().max(1.0) {
            acc.re
        } else {
            f64::NAN
        };
        DMatrix::from_element(k, k, C64::new((log_h_det / k as f64).exp(), 0.0))
            * DMatrix::identity(k, k)
    });
    Ok(ChartBundleMetric::new(
        "potential-json",
        Domain::Whole { n },
        k,
        h,
    ))
}
