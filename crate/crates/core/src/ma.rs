//! Monge–Ampère verification on model ball bundles.
//!
//! The potential `u = k^{n/(m+1)} (GH)^{-1/(m+1)} φ(X)` should satisfy
//! `det((−log u)_{st̄}) = u^{-(m+1)}`, equivalently `J(u) = 1` for the
//! bordered Hessian determinant. Both residuals are computed from finite
//! differences of `u` alone, with no appeal to the identities being tested;
//! the closed-form Hessian blocks at normal points `w = (0, ξ)` are then
//! cross-validated against the blind FD Hessian.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::bundle::hermitian_eigenvalues;
use crate::error::{CymError, Result};
use crate::fd::{self, FdConfig};
use crate::model::{ModelGeometry, RadialProfile};
use crate::rng::Lcg64;

/// Default differencing for total-space Hessians: three Richardson levels at
/// a base step large enough to stay well above the f64 round-off floor of
/// second differences.
pub fn default_ma_fd() -> FdConfig {
    FdConfig::new(4e-3, 3)
}

/// Cheng–Yau–Mok potential `u(w)` for a model geometry.
pub fn u_value(model: &ModelGeometry, profile: &RadialProfile, w: &[C64]) -> Result<f64> {
    let x = model.norm_x(w)?;
    if x >= 1.0 {
        return Err(CymError::Domain(format!(
            "point outside the ball bundle: X = {x}"
        )));
    }
    let (z, _) = w.split_at(model.n());
    let m1 = model.m() as f64 + 1.0;
    let kf = model.k() as f64;
    let gh = model.g_det(z) * model.h_det(z);
    Ok(kf.powf(model.n() as f64 / m1) * gh.powf(-1.0 / m1) * profile.phi(x)?)
}

/// Generic-metric evaluation of u: the base volume density G is measured as
/// `det` of the nested FD Hessian of `log H` instead of read off the model's
/// closed form. The inner differencing noise is amplified by any outer
/// differentiation, so verifications built on this mode carry a relaxed
/// 1e-3 tolerance.
pub fn u_value_fd_base(
    model: &ModelGeometry,
    profile: &RadialProfile,
    w: &[C64],
    inner: &FdConfig,
) -> Result<f64> {
    let x = model.norm_x(w)?;
    if x >= 1.0 {
        return Err(CymError::Domain(format!(
            "point outside the ball bundle: X = {x}"
        )));
    }
    let (z, _) = w.split_at(model.n());
    let log_h_det = |y: &[C64]| -> Result<f64> {
        if !model.base_in_domain(y) {
            return Err(CymError::Domain("nested stencil left the base chart".into()));
        }
        Ok(model.h_det(y).ln())
    };
    let g = fd::hessian_scalar(&log_h_det, z, inner)?;
    let g_det = g.lu().determinant().re;
    if g_det <= 0.0 {
        return Err(CymError::NotNegativeBundle(
            "measured base metric is not positive".into(),
        ));
    }
    let m1 = model.m() as f64 + 1.0;
    let kf = model.k() as f64;
    let gh = g_det * model.h_det(z);
    Ok(kf.powf(model.n() as f64 / m1) * gh.powf(-1.0 / m1) * profile.phi(x)?)
}

/// Hermitized complex Hessian of `−log u` at `w` by pure finite differences.
pub fn log_u_hessian(
    model: &ModelGeometry,
    profile: &RadialProfile,
    w: &[C64],
    cfg: &FdConfig,
) -> Result<DMatrix<C64>> {
    let f = |v: &[C64]| -> Result<f64> { Ok(-u_value(model, profile, v)?.ln()) };
    let h = fd::hessian_scalar(&f, w, cfg)?;
    Ok((h.clone() + h.adjoint()).unscale(2.0))
}

/// Residuals of the Monge–Ampère equation at one point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MaPointCheck {
    /// `|u^{m+1}·det((−log u)_{st̄}) − 1|`.
    pub residual_log: f64,
    /// `|(−1)^m·det(bordered Hessian of u) − 1|`.
    pub residual_j: f64,
    /// Smallest eigenvalue of the FD Hessian of −log u (must be positive).
    pub min_eig: f64,
}

/// Verify the equation at `w` through two independent determinant routes.
pub fn ma_residual(
    model: &ModelGeometry,
    profile: &RadialProfile,
    w: &[C64],
    cfg: &FdConfig,
) -> Result<MaPointCheck> {
    let fu = |v: &[C64]| -> Result<f64> { u_value(model, profile, v) };
    residuals_of_potential(&fu, model.m(), w, cfg)
}

/// Same residuals with the generic-metric u (base data measured by nested
/// finite differences rather than taken from the model's closed form).
pub fn ma_residual_fd_base(
    model: &ModelGeometry,
    profile: &RadialProfile,
    w: &[C64],
    cfg: &FdConfig,
    inner: &FdConfig,
) -> Result<MaPointCheck> {
    let fu = |v: &[C64]| -> Result<f64> { u_value_fd_base(model, profile, v, inner) };
    residuals_of_potential(&fu, model.m(), w, cfg)
}

fn residuals_of_potential(
    fu: &(dyn Fn(&[C64]) -> Result<f64> + Sync),
    m: usize,
    w: &[C64],
    cfg: &FdConfig,
) -> Result<MaPointCheck> {
    let u0 = fu(w)?;
    let m1 = m as i32 + 1;

    let f_log = |v: &[C64]| -> Result<f64> { Ok(-fu(v)?.ln()) };
    let raw = fd::hessian_scalar(&f_log, w, cfg)?;
    let hess = (raw.clone() + raw.adjoint()).unscale(2.0);
    let min_eig = hermitian_eigenvalues(&hess)[0];
    if min_eig <= 0.0 {
        return Err(CymError::GeometryViolation(format!(
            "Hessian of −log u not positive definite (min eigenvalue {min_eig:.3e})"
        )));
    }
    let det = hess.lu().determinant().re;
    let residual_log = (u0.powi(m1) * det - 1.0).abs();

    // bordered route: first and second derivatives of u itself
    let f_u = |v: &[C64]| -> Result<f64> { fu(v) };
    let grad = fd::gradient_scalar(&f_u, w, cfg)?;
    let hess_u = fd::hessian_scalar(&f_u, w, cfg)?;
    let mut bordered = DMatrix::from_element(m + 1, m + 1, C64::new(0.0, 0.0));
    bordered[(0, 0)] = C64::new(u0, 0.0);
    for t in 0..m {
        bordered[(0, 1 + t)] = grad[t].conj();
    }
    for s in 0..m {
        bordered[(1 + s, 0)] = grad[s];
        for t in 0..m {
            bordered[(1 + s, 1 + t)] = hess_u[(s, t)];
        }
    }
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let j = bordered.lu().determinant() * C64::new(sign, 0.0);
    let residual_j = (j - C64::new(1.0, 0.0)).norm();

    Ok(MaPointCheck {
        residual_log,
        residual_j,
        min_eig,
    })
}

/// The three blocks of the complex Hessian of −log u at a normal point
/// `w = (0, ξ)`, from the closed-form expressions.
#[derive(Clone, Debug)]
pub struct HessianBlocks {
    pub base: DMatrix<C64>,
    pub fiber: DMatrix<C64>,
    pub cross: DMatrix<C64>,
    pub x: f64,
    pub y: f64,
    pub y_prime: f64,
}

impl HessianBlocks {
    /// Assemble the full m×m Hessian `[[base, cross], [crossᴴ, fiber]]`.
    pub fn full(&self) -> DMatrix<C64> {
        let n = self.base.nrows();
        let k = self.fiber.nrows();
        let mut out = DMatrix::from_element(n + k, n + k, C64::new(0.0, 0.0));
        out.view_mut((0, 0), (n, n)).copy_from(&self.base);
        out.view_mut((0, n), (n, k)).copy_from(&self.cross);
        out.view_mut((n, 0), (k, n)).copy_from(&self.cross.adjoint());
        out.view_mut((n, n), (k, k)).copy_from(&self.fiber);
        out
    }

    /// Determinant of the fiber block predicted by the rank-one update:
    /// `Y'(Y−ν)^{k−1} / (2^{k+1} X^{2k−1})`.
    pub fn fiber_det_formula(&self, nu: f64, k: usize) -> f64 {
        self.y_prime * (self.y - nu).powi(k as i32 - 1)
            / (2f64.powi(k as i32 + 1) * self.x.powi(2 * k as i32 - 1))
    }
}

/// Closed-form Hessian blocks at the normal point `w = (0, ξ)`:
/// base `−R(0)/(m+1) + (Y/2k)·g(0)`, cross `0`, fiber
/// `(Y−ν)/(2X²)·δ_{αβ} + (XY'/4 − Y/2 + k/(m+1))·ξ̄_α ξ_β / X⁴`.
pub fn hessian_blocks_closed_form(
    model: &ModelGeometry,
    profile: &RadialProfile,
    xi: &[C64],
) -> Result<HessianBlocks> {
    let k = model.k();
    let n = model.n();
    if xi.len() != k {
        return Err(CymError::Domain(format!(
            "fiber vector has {} components, rank is {k}",
            xi.len()
        )));
    }
    let x2: f64 = xi.iter().map(|c| c.norm_sqr()).sum();
    let x = x2.sqrt();
    if x == 0.0 {
        return Err(CymError::SignViolation(
            "fiber formula is singular at ξ = 0 (1/|ξ|² terms)".into(),
        ));
    }
    if x >= 1.0 {
        return Err(CymError::Domain(format!("X = {x} must be < 1")));
    }
    let m1 = model.m() as f64 + 1.0;
    let kf = k as f64;
    let nu = model.spec().nu();
    let y = profile.y(x)?;
    let y_prime = profile.y_prime(x)?;

    let base =
        model.ricci_matrix_at_zero().unscale(-m1) + model.g_matrix_at_zero().scale(y / (2.0 * kf));

    let coef = C64::new(x * y_prime / 4.0 - y / 2.0 + kf / m1, 0.0);
    let mut fiber = DMatrix::from_element(k, k, C64::new(0.0, 0.0));
    for a in 0..k {
        for b in 0..k {
            let mut v = coef * xi[a].conj() * xi[b] / (x2 * x2);
            if a == b {
                v += C64::new((y - nu) / (2.0 * x2), 0.0);
            }
            fiber[(a, b)] = v;
        }
    }

    Ok(HessianBlocks {
        base,
        fiber,
        cross: DMatrix::from_element(n, k, C64::new(0.0, 0.0)),
        x,
        y,
        y_prime,
    })
}

/// Entrywise gap between the closed-form blocks and the blind FD Hessian at
/// the normal point `(0, ξ)`.
pub fn block_vs_fd_gap(
    model: &ModelGeometry,
    profile: &RadialProfile,
    xi: &[C64],
    cfg: &FdConfig,
) -> Result<f64> {
    let blocks = hessian_blocks_closed_form(model, profile, xi)?;
    let mut w = vec![C64::new(0.0, 0.0); model.n()];
    w.extend_from_slice(xi);
    let fd_hess = log_u_hessian(model, profile, &w, cfg)?;
    let diff = blocks.full() - fd_hess;
    Ok(diff.iter().map(|c| c.norm()).fold(0.0, f64::max))
}

/// Both sides of `Φ = P(Y)Y' / (2^{m+1} kⁿ X^{2k−1})`: the polynomial formula
/// and the FD determinant normalized by G·H.
pub fn capital_phi_check(
    model: &ModelGeometry,
    profile: &RadialProfile,
    xi: &[C64],
    cfg: &FdConfig,
) -> Result<(f64, f64)> {
    let x2: f64 = xi.iter().map(|c| c.norm_sqr()).sum();
    let x = x2.sqrt();
    if x > 0.95 {
        return Err(CymError::Precondition(format!(
            "Φ check refuses X = {x} > 0.95 (Y' grows without bound)"
        )));
    }
    if x == 0.0 {
        return Err(CymError::SignViolation("Φ check needs ξ ≠ 0".into()));
    }
    let m = model.m();
    let kf = model.k() as f64;
    let y = profile.y(x)?;
    let y_prime = profile.y_prime(x)?;
    let p_poly = model.spec().p_poly();
    let formula = p_poly.eval(y) * y_prime
        / (2f64.powi(m as i32 + 1) * kf.powi(model.n() as i32) * x.powi(2 * model.k() as i32 - 1));

    let mut w = vec![C64::new(0.0, 0.0); model.n()];
    w.extend_from_slice(xi);
    let hess = log_u_hessian(model, profile, &w, cfg)?;
    let det = hess.lu().determinant().re;
    let zeros = vec![C64::new(0.0, 0.0); model.n()];
    let numeric = det / (model.g_det(&zeros) * model.h_det(&zeros));
    Ok((formula, numeric))
}

/// Lower-bound audit: `base block − ((1−λ_max)/(m+1))·g(0)` must be positive
/// semidefinite at every tested normal point.
#[derive(Clone, Debug, Serialize)]
pub struct MetricLowerBoundReport {
    pub min_eigenvalue: f64,
    pub points: usize,
    pub holds: bool,
}

pub fn metric_lower_bound_check(
    model: &ModelGeometry,
    profile: &RadialProfile,
    fiber_points: &[Vec<C64>],
) -> Result<MetricLowerBoundReport> {
    let m1 = model.m() as f64 + 1.0;
    let lambda_max = model.spec().lambda_max();
    let bound = model.g_matrix_at_zero().scale((1.0 - lambda_max) / m1);
    let mut min_eigenvalue = f64::INFINITY;
    for xi in fiber_points {
        let blocks = hessian_blocks_closed_form(model, profile, xi)?;
        let slack = &blocks.base - &bound;
        min_eigenvalue = min_eigenvalue.min(hermitian_eigenvalues(&slack)[0]);
    }
    Ok(MetricLowerBoundReport {
        min_eigenvalue,
        points: fiber_points.len(),
        holds: min_eigenvalue >= -1e-8,
    })
}

/// Bergman specialization for p = 1: `u^{-(m+1)}·(1−|z|²−|ξ|²)^{m+1}`
/// must equal 1, i.e. u coincides with the unit-ball Cheng–Yau solution.
#[derive(Clone, Debug, Serialize)]
pub struct BergmanReport {
    pub max_deviation: f64,
    pub points: usize,
}

pub fn bergman_compare_p1(n: usize, k: usize, p: f64, count: usize, seed: u64) -> Result<BergmanReport> {
    if (p - 1.0).abs() > 1e-12 {
        return Err(CymError::Unsupported(
            "Bergman comparison only implemented for p = 1".into(),
        ));
    }
    let model = ModelGeometry::egg(n, k, 1.0)?;
    let profile = RadialProfile::for_model(&model, 1e-10, 1e-12)?;
    let points = sample_interior_points(&model, count, seed, (0.05, 0.9));
    let m1 = model.m() as i32 + 1;
    let mut max_deviation = 0.0f64;
    for w in &points {
        let u = u_value(&model, &profile, w)?;
        let ball: f64 = 1.0 - w.iter().map(|c| c.norm_sqr()).sum::<f64>();
        let ratio = u.powi(-m1) * ball.powi(m1);
        max_deviation = max_deviation.max((ratio - 1.0).abs());
    }
    Ok(BergmanReport {
        max_deviation,
        points: points.len(),
    })
}

/// Seeded interior sample of the ball bundle: base coordinates with uniform
/// radii and angles inside a margin, fiber direction uniform, fiber norm set
/// so that X lands uniformly in `x_range`.
pub fn sample_interior_points(
    model: &ModelGeometry,
    count: usize,
    seed: u64,
    x_range: (f64, f64),
) -> Vec<Vec<C64>> {
    let mut rng = Lcg64::new(seed);
    let n = model.n();
    let k = model.k();
    let per_coord = 0.6 / (n as f64).sqrt();
    (0..count)
        .map(|_| {
            let mut w: Vec<C64> = (0..n).map(|_| rng.complex_in_disk(per_coord)).collect();
            let x_target = rng.uniform(x_range.0, x_range.1);
            let dir = rng.unit_complex_vector(k);
            let h = model.h_scalar(&w);
            let xi_norm = x_target / h.sqrt();
            w.extend(dir.into_iter().map(|c| c * xi_norm));
            w
        })
        .collect()
}

/// Seeded fiber vectors for normal-point checks, X uniform in `x_range`.
pub fn sample_normal_fibers(
    model: &ModelGeometry,
    count: usize,
    seed: u64,
    x_range: (f64, f64),
) -> Vec<Vec<C64>> {
    let mut rng = Lcg64::new(seed);
    (0..count)
        .map(|_| {
            let x = rng.uniform(x_range.0, x_range.1);
            rng.unit_complex_vector(model.k())
                .into_iter()
                .map(|c| c * x)
                .collect()
        })
        .collect()
}

/// One sampled point in a machine-readable report.
#[derive(Clone, Debug, Serialize)]
pub struct MaPointReport {
    pub w: Vec<[f64; 2]>,
    #[serde(rename = "X")]
    pub x: f64,
    pub residual_log: f64,
    #[serde(rename = "residual_J")]
    pub residual_j: f64,
    pub min_eig: f64,
}

/// Spec echo inside reports.
#[derive(Clone, Debug, Serialize)]
pub struct SpecEcho {
    pub n: usize,
    pub k: usize,
    pub eigenvalues: Vec<f64>,
}

/// Where the base volume data G comes from during verification.
#[derive(Clone, Copy, Debug)]
pub enum BaseData {
    /// Closed-form G from the model.
    Analytic,
    /// G measured by a nested FD Hessian of log H with the given inner
    /// differencing; residual tolerances relax to ~1e-3 in this mode.
    Measured(FdConfig),
}

impl BaseData {
    pub fn label(&self) -> &'static str {
        match self {
            BaseData::Analytic => "analytic",
            BaseData::Measured(_) => "measured-fd",
        }
    }
}

/// Per-model Monge–Ampère verification report.
#[derive(Clone, Debug, Serialize)]
pub struct MaReport {
    pub model: String,
    pub spec: SpecEcho,
    pub profile: String,
    pub base_data: String,
    pub seed: u64,
    pub step: f64,
    pub levels: usize,
    pub points: Vec<MaPointReport>,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub max_identity_gap: f64,
}

/// Run the Monge–Ampère verification over seeded interior points.
///
/// `threads > 1` evaluates points on scoped threads in contiguous chunks;
/// results are aggregated in point order, so the report does not depend on
/// the thread count.
pub fn run_ma_verification(
    model: &ModelGeometry,
    profile: &RadialProfile,
    count: usize,
    seed: u64,
    cfg: &FdConfig,
    threads: usize,
) -> Result<MaReport> {
    run_ma_verification_with(model, profile, count, seed, cfg, threads, BaseData::Analytic)
}

/// As [`run_ma_verification`] with an explicit base-data source.
#[allow(clippy::too_many_arguments)]
pub fn run_ma_verification_with(
    model: &ModelGeometry,
    profile: &RadialProfile,
    count: usize,
    seed: u64,
    cfg: &FdConfig,
    threads: usize,
    base: BaseData,
) -> Result<MaReport> {
    let points = sample_interior_points(model, count, seed, (0.05, 0.9));
    let point_check = |w: &Vec<C64>| -> Result<MaPointCheck> {
        match base {
            BaseData::Analytic => ma_residual(model, profile, w, cfg),
            BaseData::Measured(inner) => ma_residual_fd_base(model, profile, w, cfg, &inner),
        }
    };
    let checks: Vec<Result<MaPointCheck>> = if threads <= 1 || points.len() <= 1 {
        points.iter().map(&point_check).collect()
    } else {
        let mut slots: Vec<Option<Result<MaPointCheck>>> = Vec::new();
        slots.resize_with(points.len(), || None);
        let chunk = points.len().div_ceil(threads.min(points.len()));
        std::thread::scope(|scope| {
            for (pts, out) in points.chunks(chunk).zip(slots.chunks_mut(chunk)) {
                let point_check = &point_check;
                scope.spawn(move || {
                    for (w, slot) in pts.iter().zip(out.iter_mut()) {
                        *slot = Some(point_check(w));
                    }
                });
            }
        });
        slots.into_iter().map(|s| s.expect("all chunks ran")).collect()
    };

    let mut reports = Vec::with_capacity(points.len());
    for (w, check) in points.iter().zip(checks) {
        let check = check?;
        let x = model.norm_x(w)?;
        reports.push(MaPointReport {
            w: w.iter().map(|c| [c.re, c.im]).collect(),
            x,
            residual_log: check.residual_log,
            residual_j: check.residual_j,
            min_eig: check.min_eig,
        });
    }
    let max_residual = reports.iter().map(|p| p.residual_log).fold(0.0, f64::max);
    let mean_residual =
        reports.iter().map(|p| p.residual_log).sum::<f64>() / reports.len().max(1) as f64;
    let max_identity_gap = reports
        .iter()
        .map(|p| (p.residual_log - p.residual_j).abs())
        .fold(0.0, f64::max);
    Ok(MaReport {
        model: model.name(),
        spec: SpecEcho {
            n: model.n(),
            k: model.k(),
            eigenvalues: model.spec().eigenvalues().to_vec(),
        },
        profile: match profile {
            RadialProfile::Solved(_) => "ode".into(),
            RadialProfile::ClosedFormP1 { .. } => "closed-form".into(),
        },
        base_data: base.label().to_string(),
        seed,
        step: cfg.step,
        levels: cfg.levels,
        points: reports,
        max_residual,
        mean_residual,
        max_identity_gap,
    })
}
