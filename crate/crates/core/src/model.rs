//! Analytically specified ball-bundle models and their radial profiles.
//!
//! Both built-in models are ball bundles over a base with constant Ricci
//! eigenvalues, with scalar fiber metric `h·I_k`:
//!
//! * egg(n, k, p): base the unit ball in ℂⁿ, `h = (1−|z|²)^{−1/p}`,
//!   eigenvalue −p(n+1)/k with multiplicity n. The total space is the egg
//!   domain `{|z|² + |ξ|^{2p} < 1}` re-parametrized as a bundle.
//! * product_ball([(n₁,p₁),…], k): base a product of balls,
//!   `h = Π (1−|zⁱ|²)^{−1/pᵢ}`, eigenvalue −pᵢ(nᵢ+1)/k with multiplicity nᵢ.
//!
//! `G = det g` and `H = det h = h^k` are closed-form, so the potential u can
//! be evaluated to machine accuracy everywhere in the bundle.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::eigen::EigenSpec;
use crate::error::{CymError, Result};
use crate::phi::PhiProfile;
use crate::profile::solve_profile;

/// Which analytic model a geometry describes.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    Egg { n: usize, k: usize, p: f64 },
    ProductBall { factors: Vec<(usize, f64)>, k: usize },
}

/// An analytically specified ball-bundle model with callable base data.
#[derive(Clone, Debug)]
pub struct ModelGeometry {
    kind: ModelKind,
    spec: EigenSpec,
}

impl ModelGeometry {
    pub fn egg(n: usize, k: usize, p: f64) -> Result<Self> {
        if p <= 0.0 {
            return Err(CymError::InvalidSpec("egg exponent p must be positive".into()));
        }
        let lambda = -p * (n as f64 + 1.0) / k as f64;
        Ok(Self {
            kind: ModelKind::Egg { n, k, p },
            spec: EigenSpec::constant(n, k, lambda)?,
        })
    }

    pub fn product_ball(factors: Vec<(usize, f64)>, k: usize) -> Result<Self> {
        if factors.is_empty() {
            return Err(CymError::InvalidSpec("product needs at least one factor".into()));
        }
        let mut eigenvalues = Vec::new();
        for &(ni, pi) in &factors {
            if ni < 1 || pi <= 0.0 {
                return Err(CymError::InvalidSpec(
                    "each factor needs n ≥ 1 and p > 0".into(),
                ));
            }
            let lam = -pi * (ni as f64 + 1.0) / k as f64;
            eigenvalues.extend(std::iter::repeat_n(lam, ni));
        }
        let n: usize = factors.iter().map(|f| f.0).sum();
        Ok(Self {
            kind: ModelKind::ProductBall { factors, k },
            spec: EigenSpec::new(n, k, eigenvalues)?,
        })
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn spec(&self) -> &EigenSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn k(&self) -> usize {
        self.spec.k()
    }

    pub fn m(&self) -> usize {
        self.spec.m()
    }

    pub fn name(&self) -> String {
        match &self.kind {
            ModelKind::Egg { n, k, p } => format!("egg(n={n},k={k},p={p})"),
            ModelKind::ProductBall { factors, k } => {
                let fs: Vec<String> =
                    factors.iter().map(|(n, p)| format!("({n},{p})")).collect();
                format!("product_ball[{}],k={k}", fs.join(","))
            }
        }
    }

    /// Factor layout as (offset, length, p) triples over the base coordinates.
    fn factor_slices(&self) -> Vec<(usize, usize, f64)> {
        match &self.kind {
            ModelKind::Egg { n, p, .. } => vec![(0, *n, *p)],
            ModelKind::ProductBall { factors, .. } => {
                let mut out = Vec::with_capacity(factors.len());
                let mut off = 0;
                for &(ni, pi) in factors {
                    out.push((off, ni, pi));
                    off += ni;
                }
                out
            }
        }
    }

    /// True when every base factor satisfies |zⁱ| < 1.
    pub fn base_in_domain(&self, z: &[C64]) -> bool {
        self.factor_slices().iter().all(|&(off, len, _)| {
            z[off..off + len].iter().map(|c| c.norm_sqr()).sum::<f64>() < 1.0
        })
    }

    /// Scalar fiber metric value `h(z)` (the matrix is `h·I_k`).
    pub fn h_scalar(&self, z: &[C64]) -> f64 {
        self.factor_slices()
            .iter()
            .map(|&(off, len, p)| {
                let s: f64 = z[off..off + len].iter().map(|c| c.norm_sqr()).sum();
                (1.0 - s).powf(-1.0 / p)
            })
            .product()
    }

    /// `H = det h = h^k`.
    pub fn h_det(&self, z: &[C64]) -> f64 {
        self.h_scalar(z).powi(self.k() as i32)
    }

    /// `G = det(g_{ij̄})` in closed form.
    pub fn g_det(&self, z: &[C64]) -> f64 {
        let k = self.k() as f64;
        self.factor_slices()
            .iter()
            .map(|&(off, len, p)| {
                let s: f64 = z[off..off + len].iter().map(|c| c.norm_sqr()).sum();
                (k / p).powi(len as i32) * (1.0 - s).powi(-(len as i32) - 1)
            })
            .product()
    }

    /// `g_{ij̄}(0)`, block diagonal with factor blocks `(k/pᵢ)·I`.
    pub fn g_matrix_at_zero(&self) -> DMatrix<C64> {
        let n = self.n();
        let mut g = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        let k = self.k() as f64;
        for (off, len, p) in self.factor_slices() {
            for i in off..off + len {
                g[(i, i)] = C64::new(k / p, 0.0);
            }
        }
        g
    }

    /// `R_{ij̄}(0) = λ_factor · g_{ij̄}(0)` per Einstein factor.
    pub fn ricci_matrix_at_zero(&self) -> DMatrix<C64> {
        let n = self.n();
        let mut r = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        let k = self.k() as f64;
        for (off, len, p) in self.factor_slices() {
            let lam = -p * (len as f64 + 1.0) / k;
            for i in off..off + len {
                r[(i, i)] = C64::new(lam * k / p, 0.0);
            }
        }
        r
    }

    /// Fiber norm `X(w) = |ξ|·h(z)^{1/2}` for `w = (z, ξ)`.
    pub fn norm_x(&self, w: &[C64]) -> Result<f64> {
        if w.len() != self.m() {
            return Err(CymError::Domain(format!(
                "point has {} coordinates, total space dimension is {}",
                w.len(),
                self.m()
            )));
        }
        let (z, xi) = w.split_at(self.n());
        if !self.base_in_domain(z) {
            return Err(CymError::Domain("base point outside the model chart".into()));
        }
        let xi_norm: f64 = xi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        Ok(xi_norm * self.h_scalar(z).sqrt())
    }

    /// True when the model's profile is the rational closed form (p = 1 egg).
    pub fn is_closed_form(&self) -> bool {
        matches!(&self.kind, ModelKind::Egg { p, .. } if (p - 1.0).abs() <= 1e-12)
    }
}

/// Radial profile data (φ, Z, Y, Y') backing a model's potential: the ODE
/// solution in general, the rational closed form for p = 1 eggs. Keeping the
/// p = 1 case closed-form lets those verifications run at round-off accuracy
/// instead of solver accuracy.
#[derive(Clone, Debug)]
pub enum RadialProfile {
    Solved(Box<PhiProfile>),
    ClosedFormP1 { mu: f64, nu: f64 },
}

impl RadialProfile {
    /// Build the profile a model calls for: closed form when rational,
    /// the solved ODE profile otherwise.
    pub fn for_model(model: &ModelGeometry, rel_tol: f64, abs_tol: f64) -> Result<Self> {
        if model.is_closed_form() {
            let spec = model.spec();
            Ok(RadialProfile::ClosedFormP1 {
                mu: spec.nu() * spec.eigenvalues()[0],
                nu: spec.nu(),
            })
        } else {
            let sol = solve_profile(model.spec(), rel_tol, abs_tol)?;
            Ok(RadialProfile::Solved(Box::new(PhiProfile::new(sol)?)))
        }
    }

    /// Force the ODE-solved profile even for rational models (cross-checks).
    pub fn solved_for(model: &ModelGeometry, rel_tol: f64, abs_tol: f64) -> Result<Self> {
        let sol = solve_profile(model.spec(), rel_tol, abs_tol)?;
        Ok(RadialProfile::Solved(Box::new(PhiProfile::new(sol)?)))
    }

    pub fn phi(&self, r: f64) -> Result<f64> {
        match self {
            RadialProfile::Solved(p) => p.phi(r),
            RadialProfile::ClosedFormP1 { .. } => {
                if !(0.0..=1.0).contains(&r) {
                    return Err(CymError::Domain(format!("r = {r} outside [0, 1]")));
                }
                Ok(1.0 - r * r)
            }
        }
    }

    pub fn z(&self, r: f64) -> Result<f64> {
        match self {
            RadialProfile::Solved(p) => p.solution().z(r),
            RadialProfile::ClosedFormP1 { mu, nu } => {
                if !(0.0..=1.0).contains(&r) {
                    return Err(CymError::Domain(format!("r = {r} outside [0, 1]")));
                }
                Ok((1.0 - r * r) / (nu - mu * r * r))
            }
        }
    }

    pub fn y(&self, r: f64) -> Result<f64> {
        match self {
            RadialProfile::Solved(p) => p.y(r),
            RadialProfile::ClosedFormP1 { mu, nu } => {
                let denom = 1.0 - r * r;
                if denom < 1e-13 {
                    return Err(CymError::Overflow("Y = 1/Z overflows at r = 1".into()));
                }
                Ok((nu - mu * r * r) / denom)
            }
        }
    }

    pub fn y_prime(&self, r: f64) -> Result<f64> {
        match self {
            RadialProfile::Solved(p) => p.y_prime(r),
            RadialProfile::ClosedFormP1 { .. } => {
                let denom = 1.0 - r * r;
                if denom < 1e-13 {
                    return Err(CymError::Overflow("Y' overflows at r = 1".into()));
                }
                Ok(4.0 * r / (denom * denom))
            }
        }
    }
}
