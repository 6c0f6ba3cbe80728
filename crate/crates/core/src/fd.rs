//! Wirtinger derivatives by central finite differences with Richardson
//! extrapolation.
//!
//! A point of ℂⁿ is a slice of `Complex64`; differencing acts on the 2n real
//! coordinates and the estimates are assembled with ∂_z = ½(∂_x − i∂_y),
//! ∂_z̄ = ½(∂_x + i∂_y). Each requested derivative is evaluated at steps
//! `s, s/2, …` and extrapolated through the standard Richardson table, which
//! upgrades the O(s²) central stencils to O(s^{2L}) for L levels.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{CymError, Result};

/// Step and extrapolation depth for one finite-difference evaluation.
#[derive(Clone, Copy, Debug)]
pub struct FdConfig {
    pub step: f64,
    pub levels: usize,
}

impl FdConfig {
    pub fn new(step: f64, levels: usize) -> Self {
        Self {
            step,
            levels: levels.max(1),
        }
    }
}

/// Scalar field on ℂⁿ (real-valued, like a Kähler potential).
pub trait ScalarField: Sync {
    fn eval(&self, z: &[C64]) -> Result<f64>;
}

impl<F: Fn(&[C64]) -> Result<f64> + Sync> ScalarField for F {
    fn eval(&self, z: &[C64]) -> Result<f64> {
        self(z)
    }
}

/// Matrix field on ℂⁿ (like a fiber metric h_{αβ̄}).
pub trait MatrixField: Sync {
    fn eval(&self, z: &[C64]) -> Result<DMatrix<C64>>;
}

impl<F: Fn(&[C64]) -> Result<DMatrix<C64>> + Sync> MatrixField for F {
    fn eval(&self, z: &[C64]) -> Result<DMatrix<C64>> {
        self(z)
    }
}

fn shifted(z: &[C64], real_idx: usize, delta: f64) -> Vec<C64> {
    let mut out = z.to_vec();
    if real_idx.is_multiple_of(2) {
        out[real_idx / 2].re += delta;
    } else {
        out[real_idx / 2].im += delta;
    }
    out
}

fn check_finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CymError::Evaluation(format!("sample is not finite: {v}")))
    }
}

/// Richardson table for estimates at steps s, s/2, s/4, … with even error
/// expansion in the step.
fn richardson_f64(estimates: &[f64]) -> f64 {
    let mut row = estimates.to_vec();
    let mut factor = 4.0;
    while row.len() > 1 {
        for i in 0..row.len() - 1 {
            row[i] = (factor * row[i + 1] - row[i]) / (factor - 1.0);
        }
        row.pop();
        factor *= 4.0;
    }
    row[0]
}

fn richardson_c64(estimates: &[C64]) -> C64 {
    let re: Vec<f64> = estimates.iter().map(|c| c.re).collect();
    let im: Vec<f64> = estimates.iter().map(|c| c.im).collect();
    C64::new(richardson_f64(&re), richardson_f64(&im))
}

fn richardson_mat(estimates: &[DMatrix<C64>]) -> DMatrix<C64> {
    let (nr, nc) = estimates[0].shape();
    DMatrix::from_fn(nr, nc, |i, j| {
        let per: Vec<C64> = estimates.iter().map(|m| m[(i, j)]).collect();
        richardson_c64(&per)
    })
}

/// First derivative along one real coordinate, extrapolated.
fn d1_real(f: &dyn ScalarField, z: &[C64], idx: usize, cfg: &FdConfig) -> Result<f64> {
    let mut est = Vec::with_capacity(cfg.levels);
    for l in 0..cfg.levels {
        let h = cfg.step / (1 << l) as f64;
        let a = check_finite(f.eval(&shifted(z, idx, h))?)?;
        let b = check_finite(f.eval(&shifted(z, idx, -h))?)?;
        est.push((a - b) / (2.0 * h));
    }
    Ok(richardson_f64(&est))
}

fn d2_real_diag(f: &dyn ScalarField, z: &[C64], idx: usize, cfg: &FdConfig) -> Result<f64> {
    let f0 = check_finite(f.eval(z)?)?;
    let mut est = Vec::with_capacity(cfg.levels);
    for l in 0..cfg.levels {
        let h = cfg.step / (1 << l) as f64;
        let a = check_finite(f.eval(&shifted(z, idx, h))?)?;
        let b = check_finite(f.eval(&shifted(z, idx, -h))?)?;
        est.push((a - 2.0 * f0 + b) / (h * h));
    }
    Ok(richardson_f64(&est))
}

fn d2_real_mixed(
    f: &dyn ScalarField,
    z: &[C64],
    i: usize,
    j: usize,
    cfg: &FdConfig,
) -> Result<f64> {
    let mut est = Vec::with_capacity(cfg.levels);
    for l in 0..cfg.levels {
        let h = cfg.step / (1 << l) as f64;
        let pp = check_finite(f.eval(&shifted(&shifted(z, i, h), j, h))?)?;
        let pm = check_finite(f.eval(&shifted(&shifted(z, i, h), j, -h))?)?;
        let mp = check_finite(f.eval(&shifted(&shifted(z, i, -h), j, h))?)?;
        let mm = check_finite(f.eval(&shifted(&shifted(z, i, -h), j, -h))?)?;
        est.push((pp - pm - mp + mm) / (4.0 * h * h));
    }
    Ok(richardson_f64(&est))
}

/// Holomorphic Wirtinger gradient `∂f/∂z_s` of a real scalar field.
/// (The antiholomorphic side is the conjugate.)
pub fn gradient_scalar(f: &dyn ScalarField, z: &[C64], cfg: &FdConfig) -> Result<Vec<C64>> {
    let n = z.len();
    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        let dx = d1_real(f, z, 2 * s, cfg)?;
        let dy = d1_real(f, z, 2 * s + 1, cfg)?;
        out.push(C64::new(0.5 * dx, -0.5 * dy));
    }
    Ok(out)
}

/// Mixed complex Hessian `∂²f/∂z_s ∂z̄_t` of a real scalar field on ℂⁿ.
pub fn hessian_scalar(f: &dyn ScalarField, z: &[C64], cfg: &FdConfig) -> Result<DMatrix<C64>> {
    let n = z.len();
    let mut hess = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for s in 0..n {
        let dxx = d2_real_diag(f, z, 2 * s, cfg)?;
        let dyy = d2_real_diag(f, z, 2 * s + 1, cfg)?;
        hess[(s, s)] = C64::new(0.25 * (dxx + dyy), 0.0);
        for t in (s + 1)..n {
            let xx = d2_real_mixed(f, z, 2 * s, 2 * t, cfg)?;
            let yy = d2_real_mixed(f, z, 2 * s + 1, 2 * t + 1, cfg)?;
            let xy = d2_real_mixed(f, z, 2 * s, 2 * t + 1, cfg)?;
            let yx = d2_real_mixed(f, z, 2 * s + 1, 2 * t, cfg)?;
            let v = C64::new(0.25 * (xx + yy), 0.25 * (xy - yx));
            hess[(s, t)] = v;
            // real f makes the Hessian Hermitian term by term
            hess[(t, s)] = v.conj();
        }
    }
    Ok(hess)
}

fn matrix_samples_ok(m: &DMatrix<C64>) -> Result<()> {
    if m.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(CymError::Evaluation("matrix sample is not finite".into()))
    }
}

fn mat_d1_real(
    h: &dyn MatrixField,
    z: &[C64],
    idx: usize,
    cfg: &FdConfig,
) -> Result<DMatrix<C64>> {
    let mut est = Vec::with_capacity(cfg.levels);
    for l in 0..cfg.levels {
        let step = cfg.step / (1 << l) as f64;
        let a = h.eval(&shifted(z, idx, step))?;
        let b = h.eval(&shifted(z, idx, -step))?;
        matrix_samples_ok(&a)?;
        matrix_samples_ok(&b)?;
        est.push((a - b).unscale(2.0 * step));
    }
    Ok(richardson_mat(&est))
}

fn mat_d2_real(
    h: &dyn MatrixField,
    z: &[C64],
    i: usize,
    j: usize,
    cfg: &FdConfig,
) -> Result<DMatrix<C64>> {
    let mut est = Vec::with_capacity(cfg.levels);
    if i == j {
        let h0 = h.eval(z)?;
        matrix_samples_ok(&h0)?;
        for l in 0..cfg.levels {
            let step = cfg.step / (1 << l) as f64;
            let a = h.eval(&shifted(z, i, step))?;
            let b = h.eval(&shifted(z, i, -step))?;
            matrix_samples_ok(&a)?;
            matrix_samples_ok(&b)?;
            est.push((a + b - h0.scale(2.0)).unscale(step * step));
        }
    } else {
        for l in 0..cfg.levels {
            let step = cfg.step / (1 << l) as f64;
            let pp = h.eval(&shifted(&shifted(z, i, step), j, step))?;
            let pm = h.eval(&shifted(&shifted(z, i, step), j, -step))?;
            let mp = h.eval(&shifted(&shifted(z, i, -step), j, step))?;
            let mm = h.eval(&shifted(&shifted(z, i, -step), j, -step))?;
            for m in [&pp, &pm, &mp, &mm] {
                matrix_samples_ok(m)?;
            }
            est.push((pp - pm - mp + mm).unscale(4.0 * step * step));
        }
    }
    Ok(richardson_mat(&est))
}

/// `∂h/∂z_i` for each base coordinate of a matrix field.
pub fn matrix_d1(h: &dyn MatrixField, z: &[C64], cfg: &FdConfig) -> Result<Vec<DMatrix<C64>>> {
    let n = z.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let dx = mat_d1_real(h, z, 2 * i, cfg)?;
        let dy = mat_d1_real(h, z, 2 * i + 1, cfg)?;
        out.push((dx - dy * C64::new(0.0, 1.0)).unscale(2.0));
    }
    Ok(out)
}

/// `∂²h/∂z_i ∂z̄_j` for all base-coordinate pairs of a matrix field.
pub fn matrix_mixed_d2(
    h: &dyn MatrixField,
    z: &[C64],
    cfg: &FdConfig,
) -> Result<Vec<Vec<DMatrix<C64>>>> {
    let n = z.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let xx = mat_d2_real(h, z, 2 * i, 2 * j, cfg)?;
            let yy = mat_d2_real(h, z, 2 * i + 1, 2 * j + 1, cfg)?;
            let xy = mat_d2_real(h, z, 2 * i, 2 * j + 1, cfg)?;
            let yx = mat_d2_real(h, z, 2 * i + 1, 2 * j, cfg)?;
            let imag = (xy - yx) * C64::new(0.0, 0.25);
            row.push((xx + yy).unscale(4.0) + imag);
        }
        out.push(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hessian_of_norm_square() {
        // f = |z₁|² on ℂ²: mixed Hessian diag(1, 0)
        let f = |z: &[C64]| Ok(z[0].norm_sqr());
        let cfg = FdConfig::new(1e-3, 2);
        let h = hessian_scalar(&f, &[c(0.3, -0.2), c(0.1, 0.7)], &cfg).unwrap();
        assert!((h[(0, 0)].re - 1.0).abs() < 1e-10);
        assert!(h[(1, 1)].norm() < 1e-10);
        assert!(h[(0, 1)].norm() < 1e-10);
    }

    #[test]
    fn holomorphic_squares_have_no_mixed_derivative() {
        // entrywise matrix field [z₁²]: ∂²/∂z₁∂z̄₁ = 0
        let h = |z: &[C64]| Ok(DMatrix::from_element(1, 1, z[0] * z[0]));
        let cfg = FdConfig::new(1e-3, 2);
        let d2 = matrix_mixed_d2(&h, &[c(0.4, 0.1)], &cfg).unwrap();
        assert!(d2[0][0][(0, 0)].norm() < 1e-9);
    }

    #[test]
    fn disk_potential_curvature_at_origin() {
        // f = −log(1−|z|²): ∂²/∂z∂z̄ = 1 at 0 (series expansion)
        let f = |z: &[C64]| Ok(-(1.0 - z[0].norm_sqr()).ln());
        let cfg = FdConfig::new(1e-3, 2);
        let h = hessian_scalar(&f, &[c(0.0, 0.0)], &cfg).unwrap();
        // second differences of ~1e-6 quantities carry an ~1e-9 round-off floor
        assert!((h[(0, 0)].re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ball_potential_hessian_at_interior_point() {
        // f = −log(1−|w|²) on ℂ² at (0, 1/2): Hessian diag(4/3, 16/9).
        // Oracle: f_{st̄} = δ/(1−|w|²) + w̄_s w_t/(1−|w|²)² by direct
        // differentiation; at (0, 1/2) this is 1/0.75 and 1/0.75 + 0.25/0.5625.
        let f = |z: &[C64]| {
            let n2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
            Ok(-(1.0 - n2).ln())
        };
        let cfg = FdConfig::new(2e-3, 3);
        let h = hessian_scalar(&f, &[c(0.0, 0.0), c(0.5, 0.0)], &cfg).unwrap();
        assert!((h[(0, 0)].re - 4.0 / 3.0).abs() < 1e-9, "{}", h[(0, 0)]);
        assert!((h[(1, 1)].re - 16.0 / 9.0).abs() < 1e-9, "{}", h[(1, 1)]);
        assert!(h[(0, 1)].norm() < 1e-9);
    }

    #[test]
    fn constant_field_has_zero_hessian() {
        let f = |_: &[C64]| Ok(42.0);
        let cfg = FdConfig::new(1e-3, 2);
        let h = hessian_scalar(&f, &[c(0.1, 0.1)], &cfg).unwrap();
        assert!(h.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn gradient_of_norm_square() {
        // ∂|z|²/∂z = z̄
        let f = |z: &[C64]| Ok(z[0].norm_sqr());
        let cfg = FdConfig::new(1e-3, 2);
        let g = gradient_scalar(&f, &[c(0.3, 0.4)], &cfg).unwrap();
        assert!((g[0] - c(0.3, -0.4)).norm() < 1e-11);
    }

    #[test]
    fn richardson_beats_single_level() {
        // sixth-degree radial potential where the h² error term matters
        let f = |z: &[C64]| Ok((1.0 + z[0].norm_sqr()).powi(4));
        let z = [c(0.3, 0.0)];
        // d²/dz dz̄ of (1+|z|²)^4 = 4(1+s)³ + 12 s (1+s)² at s = |z|²
        let s: f64 = 0.09;
        let exact = 4.0 * (1.0 + s).powi(3) + 12.0 * s * (1.0 + s).powi(2);
        let coarse = hessian_scalar(&f, &z, &FdConfig::new(1e-2, 1)).unwrap()[(0, 0)].re;
        let fine = hessian_scalar(&f, &z, &FdConfig::new(1e-2, 2)).unwrap()[(0, 0)].re;
        assert!((fine - exact).abs() * 50.0 < (coarse - exact).abs());
    }

    #[test]
    fn nan_samples_error_out() {
        let f = |z: &[C64]| Ok((1.0 - z[0].norm_sqr()).ln());
        let cfg = FdConfig::new(1e-2, 2);
        // stencil reaches |z| > 1 where the log is NaN
        assert!(hessian_scalar(&f, &[c(1.0, 0.0)], &cfg).is_err());
    }
}
