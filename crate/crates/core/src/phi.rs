//! The potential factor φ and Y = 1/Z built on a solved profile.
//!
//! φ(r) = 2 (r^{2k-1} / (−Z' P̂(Z)))^{1/(m+1)} Z has an apparent singularity
//! at r = 0. Substituting Z = λ★ + r²W gives the everywhere-regular radicand
//!
//! ```text
//!     r^{2k-1} / (−Z' P̂(Z)) = 1 / (−(2W + rW') W^{k-1} h(Z)),
//! ```
//!
//! positive on [0, 1): W < 0 and sign(h) = (−1)^{k-1} on [0, λ★]. φ' comes
//! from the first-order identity (m+1) r Z φ' + (m+1 − 2kZ) φ = 0 in the
//! cancellation-free form φ' = (ν φ − φ/Z)/r, where φ/Z = 2 d^{-1/(m+1)} is
//! regular up to r = 1.

use crate::eigen::EigenSpec;
use crate::error::{CymError, Result};
use crate::poly::RealPolynomial;
use crate::profile::ProfileSolution;

/// φ, φ', Y and related evaluations on a solved profile.
#[derive(Clone, Debug)]
pub struct PhiProfile {
    sol: ProfileSolution,
    /// h from P̂ = (x − λ★)^{k-1} h(x).
    h: RealPolynomial,
}

impl PhiProfile {
    pub fn new(sol: ProfileSolution) -> Result<Self> {
        let (h, _g) = sol.spec().factor_h_g()?;
        Ok(Self { sol, h })
    }

    pub fn solution(&self) -> &ProfileSolution {
        &self.sol
    }

    pub fn spec(&self) -> &EigenSpec {
        self.sol.spec()
    }

    /// The regular radicand denominator `d = −(2W + rW') W^{k-1} h(Z)`,
    /// so that `r^{2k-1}/(−Z' P̂(Z)) = 1/d`. Positive on [0, 1].
    fn radicand_denominator(&self, r: f64) -> Result<f64> {
        let w = self.sol.w(r)?;
        let wp = self.sol.w_prime(r)?;
        let z = self.spec().lambda_star() + r * r * w;
        let d = -(2.0 * w + r * wp) * w.powi(self.spec().k() as i32 - 1) * self.h.eval(z);
        if d <= 1e-12 * self.h.scale().max(1.0) {
            return Err(CymError::SignViolation(format!(
                "radicand denominator {d:.3e} at r = {r} is not positive; profile corrupted"
            )));
        }
        Ok(d)
    }

    /// φ/Z = 2 d^{-1/(m+1)}, finite and positive on all of [0, 1].
    fn phi_over_z(&self, r: f64) -> Result<f64> {
        let d = self.radicand_denominator(r)?;
        let m1 = self.spec().m() as f64 + 1.0;
        Ok(2.0 * d.powf(-1.0 / m1))
    }

    /// φ(r) on [0, 1]; φ(1) = 0 exactly, φ > 0 on [0, 1).
    pub fn phi(&self, r: f64) -> Result<f64> {
        let z = self.sol.z(r)?;
        Ok(self.phi_over_z(r)? * z)
    }

    /// φ'(r); φ'(0) = 0 by evenness, φ'(1) = −2.
    pub fn phi_prime(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        let phi = self.phi(r)?;
        let phi_over_z = self.phi_over_z(r)?;
        Ok((self.spec().nu() * phi - phi_over_z) / r)
    }

    /// Y(r) = 1/Z(r) ≥ ν, diverging as r → 1.
    pub fn y(&self, r: f64) -> Result<f64> {
        let z = self.sol.z(r)?;
        if z < 1e-13 {
            return Err(CymError::Overflow(format!(
                "Y = 1/Z overflows: Z({r}) = {z:.3e}"
            )));
        }
        Ok(1.0 / z)
    }

    /// Y'(r) = dY/dr = −Z'/Z².
    pub fn y_prime(&self, r: f64) -> Result<f64> {
        let z = self.sol.z(r)?;
        if z < 1e-13 {
            return Err(CymError::Overflow(format!(
                "Y' overflows: Z({r}) = {z:.3e}"
            )));
        }
        Ok(-self.sol.z_prime(r)? / (z * z))
    }

    /// Left-hand side of `(m+1) r Z φ' + (m+1 − 2kZ) φ = 0`.
    pub fn phi_ode_residual(&self, r: f64) -> Result<f64> {
        let z = self.sol.z(r)?;
        let phi = self.phi(r)?;
        let phip = self.phi_prime(r)?;
        let m1 = self.spec().m() as f64 + 1.0;
        let k2 = 2.0 * self.spec().k() as f64;
        Ok(m1 * r * z * phip + (m1 - k2 * z) * phi)
    }

    /// Largest deviation of φ from `1 − r²` over a uniform grid; the witness
    /// distinguishing the rational profile from all others.
    pub fn sup_gap_to_one_minus_r2(&self, samples: usize) -> Result<f64> {
        let mut sup = 0.0f64;
        for i in 0..=samples {
            let r = i as f64 / samples as f64;
            sup = sup.max((self.phi(r)? - (1.0 - r * r)).abs());
        }
        Ok(sup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::solve_profile;

    fn phi112() -> PhiProfile {
        let spec = EigenSpec::constant(1, 1, -2.0).unwrap();
        PhiProfile::new(solve_profile(&spec, 1e-10, 1e-12).unwrap()).unwrap()
    }

    #[test]
    fn phi_examples() {
        let p = phi112();
        // boundary zero is exact
        assert_eq!(p.phi(1.0).unwrap(), 0.0);
        // closed form φ = 1 − r²
        assert!((p.phi(0.5).unwrap() - 0.75).abs() < 1e-10);
        assert!((p.phi(0.0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn phi_prime_examples() {
        let p = phi112();
        assert_eq!(p.phi_prime(0.0).unwrap(), 0.0);
        assert!((p.phi_prime(1.0).unwrap() + 2.0).abs() < 1e-10);
        assert!((p.phi_prime(0.5).unwrap() + 1.0).abs() < 1e-10);
    }

    #[test]
    fn phi_prime_boundary_for_mixed_specs() {
        for spec in [
            EigenSpec::new(2, 2, vec![-1.3, 0.4]).unwrap(),
            EigenSpec::new(1, 2, vec![-1.0]).unwrap(),
            EigenSpec::new(3, 1, vec![-2.9, -0.5, 0.8]).unwrap(),
        ] {
            let p = PhiProfile::new(solve_profile(&spec, 1e-10, 1e-12).unwrap()).unwrap();
            assert!(
                (p.phi_prime(1.0).unwrap() + 2.0).abs() < 1e-6,
                "φ'(1) for {spec:?}"
            );
            assert!(p.phi(1.0).unwrap().abs() <= 1e-10);
        }
    }

    #[test]
    fn y_examples() {
        let p = phi112();
        // Y(1/2) = 1/(3/4)
        assert!((p.y(0.5).unwrap() - 4.0 / 3.0).abs() < 1e-10);
        // limit at r = 0 is ν
        assert!((p.y(0.0).unwrap() - p.spec().nu()).abs() < 1e-15);
        // lower bound Y ≥ ν on a grid
        for i in 0..100 {
            let r = i as f64 / 100.0;
            assert!(p.y(r).unwrap() >= p.spec().nu() - 1e-12);
        }
        // overflow at the boundary zero of Z
        assert!(p.y(1.0).is_err());
    }

    #[test]
    fn y_matches_identity_with_phi() {
        // Y = ν − r φ'/φ on [0.01, 0.99]
        for spec in [
            EigenSpec::constant(1, 1, -2.0).unwrap(),
            EigenSpec::new(2, 2, vec![-1.3, 0.4]).unwrap(),
        ] {
            let p = PhiProfile::new(solve_profile(&spec, 1e-10, 1e-12).unwrap()).unwrap();
            for i in 0..=98 {
                let r = 0.01 + 0.98 * i as f64 / 98.0;
                let lhs = p.y(r).unwrap();
                let rhs = p.spec().nu() - r * p.phi_prime(r).unwrap() / p.phi(r).unwrap();
                assert!((lhs - rhs).abs() < 1e-9, "r = {r}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn phi_ode_residual_small() {
        let p = phi112();
        assert!(p.phi_ode_residual(0.0).unwrap().abs() < 1e-12);
        assert!(p.phi_ode_residual(1.0).unwrap().abs() < 1e-12);
        assert!(p.phi_ode_residual(0.5).unwrap().abs() < 1e-10);
        let mixed = EigenSpec::new(2, 3, vec![-2.0, 0.3]).unwrap();
        let p = PhiProfile::new(solve_profile(&mixed, 1e-10, 1e-12).unwrap()).unwrap();
        for i in 0..=100 {
            let r = i as f64 / 100.0;
            let res = p.phi_ode_residual(r).unwrap();
            let bound = 1e-8 * p.phi(r).unwrap().max(1.0);
            assert!(res.abs() <= bound, "r = {r}: {res:.2e}");
        }
    }

    #[test]
    fn rationality_witness() {
        // rational: φ agrees with 1 − r² to solver accuracy
        let sup = phi112().sup_gap_to_one_minus_r2(1000).unwrap();
        assert!(sup <= 1e-8, "sup {sup:.2e}");
        // non-rational (1,1,−1): the gap is macroscopic
        let spec = EigenSpec::constant(1, 1, -1.0).unwrap();
        let p = PhiProfile::new(solve_profile(&spec, 1e-10, 1e-12).unwrap()).unwrap();
        let sup = p.sup_gap_to_one_minus_r2(1000).unwrap();
        assert!(sup >= 1e-3, "sup {sup:.2e}");
    }

    #[test]
    fn regular_radicand_matches_raw_form() {
        // for r > 0 compare 1/d against r^{2k-1}/(−Z' P̂(Z)) for a rank-2 spec
        let spec = EigenSpec::constant(1, 2, -1.0).unwrap();
        let sol = solve_profile(&spec, 1e-10, 1e-12).unwrap();
        let p = PhiProfile::new(sol).unwrap();
        let hat_p = spec.hat_p();
        for r in [0.2, 0.5, 0.8, 0.95] {
            let z = p.solution().z(r).unwrap();
            let zp = p.solution().z_prime(r).unwrap();
            let raw = r.powi(2 * spec.k() as i32 - 1) / (-zp * hat_p.eval(z));
            let regular = 1.0 / p.radicand_denominator(r).unwrap();
            assert!(
                ((raw - regular) / raw).abs() < 1e-10,
                "r = {r}: {raw} vs {regular}"
            );
        }
    }
}
