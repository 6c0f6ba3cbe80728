//! Radial profile solver.
//!
//! The profile equation `r Z' P̂(Z) + Q̂(Z) = 0`, `Z(1) = 0` is singular at
//! r = 0. Substituting `Z = λ★ + r² W` and cancelling the common factor
//! `r^{2k-1} W^{k-1}` de-singularizes it: with `(2h + g)(λ★ + s) = Σ_{j≥1} b_j s^j`
//! (the constant term vanishes because `g(λ★) = −2h(λ★)`),
//!
//! ```text
//!     W' = − r W² B(r²W) / h(λ★ + r²W),      B(s) = Σ_{j≥1} b_j s^{j-1},
//! ```
//!
//! which is regular on all of [0, 1]. We integrate backward from the regular
//! datum `W(1) = −λ★` and interpolate the accepted nodes with a piecewise
//! quintic Hermite built from `(W, W', W'')`, the second derivative coming
//! from the exact Jacobian of the right-hand side.

use crate::eigen::EigenSpec;
use crate::error::{CymError, Result};
use crate::ode::{integrate_scalar, DenseNode, IvpOptions};
use crate::poly::RealPolynomial;

/// Denominators below this (relative to the coefficient scale of h) abort the
/// right-hand side: the trajectory left the region where `h(Z) ≠ 0`.
const SINGULAR_DENOMINATOR_TOL: f64 = 1e-13;

/// De-singularized right-hand side of the W equation, with exact partials.
#[derive(Clone, Debug)]
pub struct ProfileRhs {
    lambda_star: f64,
    /// B(s) = Σ_{j≥1} b_j s^{j-1} where (2h+g)(λ★+s) = Σ_{j≥1} b_j s^j.
    b: RealPolynomial,
    b_prime: RealPolynomial,
    /// D(s) = h(λ★ + s).
    d: RealPolynomial,
    d_prime: RealPolynomial,
    d_scale: f64,
}

impl ProfileRhs {
    pub fn new(spec: &EigenSpec) -> Result<Self> {
        let (h, g) = spec.factor_h_g()?;
        let lambda_star = spec.lambda_star();
        let two_h_plus_g = h.scaled(2.0).add(&g);
        let mut taylor = two_h_plus_g.taylor_at(lambda_star);
        let scale = two_h_plus_g.scale();
        let constant = taylor.first().copied().unwrap_or(0.0);
        if constant.abs() > 1e-10 * scale {
            return Err(CymError::InternalConsistency(format!(
                "(2h+g)(λ★) = {constant:.3e} should vanish"
            )));
        }
        // drop the (round-off) constant term and shift down one power of s
        taylor.remove(0);
        let b = RealPolynomial::new(taylor);
        let d = RealPolynomial::new(h.taylor_at(lambda_star));
        Ok(Self {
            lambda_star,
            b_prime: b.derivative(),
            b,
            d_prime: d.derivative(),
            d_scale: d.scale(),
            d,
        })
    }

    /// `W'(r, W)`.
    pub fn eval(&self, r: f64, w: f64) -> Result<f64> {
        let s = r * r * w;
        let den = self.d.eval(s);
        if den.abs() < SINGULAR_DENOMINATOR_TOL * self.d_scale {
            return Err(CymError::NearSingularDenominator { r, value: den });
        }
        Ok(-r * w * w * self.b.eval(s) / den)
    }

    /// `(∂F/∂r, ∂F/∂W)` for `F(r, W) = W'`.
    fn partials(&self, r: f64, w: f64) -> Result<(f64, f64)> {
        let s = r * r * w;
        let den = self.d.eval(s);
        if den.abs() < SINGULAR_DENOMINATOR_TOL * self.d_scale {
            return Err(CymError::NearSingularDenominator { r, value: den });
        }
        let b = self.b.eval(s);
        let quot = (self.b_prime.eval(s) * den - b * self.d_prime.eval(s)) / (den * den);
        let f_r = -w * w * b / den - 2.0 * r * r * w * w * w * quot;
        let f_w = -2.0 * r * w * b / den - r.powi(3) * w * w * quot;
        Ok((f_r, f_w))
    }

    /// `W''` along a trajectory through `(r, w)`.
    pub fn second_derivative(&self, r: f64, w: f64) -> Result<f64> {
        let f = self.eval(r, w)?;
        let (f_r, f_w) = self.partials(r, w)?;
        Ok(f_r + f_w * f)
    }

    pub fn lambda_star(&self) -> f64 {
        self.lambda_star
    }
}

/// One stored node of the solved profile.
#[derive(Clone, Copy, Debug)]
struct ProfileNode {
    r: f64,
    w: f64,
    dw: f64,
    d2w: f64,
}

/// The solved profile `W` on [0, 1] with dense evaluation, plus `Z = λ★ + r²W`.
#[derive(Clone, Debug)]
pub struct ProfileSolution {
    spec: EigenSpec,
    rhs: ProfileRhs,
    /// Ascending in r, nodes[0].r = 0, last = 1.
    nodes: Vec<ProfileNode>,
    a: f64,
}

impl ProfileSolution {
    pub fn spec(&self) -> &EigenSpec {
        &self.spec
    }

    pub fn rhs(&self) -> &ProfileRhs {
        &self.rhs
    }

    /// `a = W(0) < 0`; `Z''(0) = 2a`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Sample radii, strictly decreasing from 1 to 0 (integration order).
    pub fn grid_radii(&self) -> Vec<f64> {
        self.nodes.iter().rev().map(|n| n.r).collect()
    }

    fn check_domain(&self, r: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&r) {
            return Err(CymError::Domain(format!("r = {r} outside [0, 1]")));
        }
        Ok(())
    }

    /// Dense evaluation of W via the quintic Hermite interpolant.
    pub fn w(&self, r: f64) -> Result<f64> {
        self.check_domain(r)?;
        Ok(self.segment_eval(r).0)
    }

    /// `W'` recomputed from the ODE right-hand side at the interpolated W,
    /// so downstream derivative assemblies stay consistent with the equation.
    pub fn w_prime(&self, r: f64) -> Result<f64> {
        let w = self.w(r)?;
        self.rhs.eval(r, w)
    }

    /// `W'` of the interpolant itself. Independent of the right-hand side at
    /// off-node points, which makes it the honest input for residual checks.
    pub fn w_prime_interp(&self, r: f64) -> Result<f64> {
        self.check_domain(r)?;
        Ok(self.segment_eval(r).1)
    }

    /// `Z(r) = λ★ + r² W(r)`.
    pub fn z(&self, r: f64) -> Result<f64> {
        Ok(self.spec.lambda_star() + r * r * self.w(r)?)
    }

    /// `Z'(r) = 2 r W + r² W'` with the ODE-consistent `W'`; `Z'(0) = 0`.
    pub fn z_prime(&self, r: f64) -> Result<f64> {
        let w = self.w(r)?;
        let dw = self.rhs.eval(r, w)?;
        Ok(2.0 * r * w + r * r * dw)
    }

    /// Residual of `r Z' P̂(Z) + Q̂(Z)` with `Z'` taken from the interpolant,
    /// so the value genuinely measures how well the dense solution satisfies
    /// the original singular equation.
    pub fn ode_residual(&self, r: f64) -> Result<f64> {
        let w = self.w(r)?;
        let dw = self.w_prime_interp(r)?;
        let z = self.spec.lambda_star() + r * r * w;
        let zp = 2.0 * r * w + r * r * dw;
        let hat_p = self.spec.hat_p();
        let hat_q = self.spec.hat_q();
        Ok(r * zp * hat_p.eval(z) + hat_q.eval(z))
    }

    fn segment_eval(&self, r: f64) -> (f64, f64) {
        let nodes = &self.nodes;
        let idx = match nodes.binary_search_by(|n| n.r.partial_cmp(&r).expect("finite")) {
            Ok(i) => return (nodes[i].w, nodes[i].dw),
            Err(i) => i.clamp(1, nodes.len() - 1),
        };
        let lo = &nodes[idx - 1];
        let hi = &nodes[idx];
        quintic_hermite(lo.r, lo.w, lo.dw, lo.d2w, hi.r, hi.w, hi.dw, hi.d2w, r)
    }
}

/// Two-point quintic Hermite from values, first and second derivatives.
/// Returns `(value, derivative)` at `r ∈ [a, b]`.
#[allow(clippy::too_many_arguments)]
fn quintic_hermite(
    a: f64,
    f0: f64,
    df0: f64,
    d2f0: f64,
    b: f64,
    f1: f64,
    df1: f64,
    d2f1: f64,
    r: f64,
) -> (f64, f64) {
    let h = b - a;
    let t = (r - a) / h;
    let c0 = f0;
    let c1 = h * df0;
    let c2 = 0.5 * h * h * d2f0;
    let big_a = f1 - c0 - c1 - c2;
    let big_b = h * df1 - c1 - 2.0 * c2;
    let big_c = h * h * d2f1 - 2.0 * c2;
    let c3 = 10.0 * big_a - 4.0 * big_b + 0.5 * big_c;
    let c4 = -15.0 * big_a + 7.0 * big_b - big_c;
    let c5 = 6.0 * big_a - 3.0 * big_b + 0.5 * big_c;
    let value = ((((c5 * t + c4) * t + c3) * t + c2) * t + c1) * t + c0;
    let deriv = ((((5.0 * c5 * t + 4.0 * c4) * t + 3.0 * c3) * t + 2.0 * c2) * t + c1) / h;
    (value, deriv)
}

/// Solve the profile equation for `spec` by backward integration of the
/// W-formulation from the regular point r = 1.
pub fn solve_profile(spec: &EigenSpec, rel_tol: f64, abs_tol: f64) -> Result<ProfileSolution> {
    if !spec.all_below_one() {
        return Err(CymError::Precondition(format!(
            "profile solution requires all eigenvalues < 1 (got max {})",
            spec.lambda_max()
        )));
    }
    let rhs = ProfileRhs::new(spec)?;
    let lambda_star = spec.lambda_star();
    let opts = IvpOptions {
        rel_tol,
        abs_tol,
        ..Default::default()
    };
    let raw: Vec<DenseNode> =
        integrate_scalar(&|r, w| rhs.eval(r, w), 1.0, -lambda_star, 0.0, &opts)?;

    let mut nodes = Vec::with_capacity(raw.len());
    for n in raw.iter().rev() {
        nodes.push(ProfileNode {
            r: n.r,
            w: n.w,
            dw: n.dw,
            d2w: rhs.second_derivative(n.r, n.w)?,
        });
    }
    let a = nodes[0].w;
    let sol = ProfileSolution {
        spec: spec.clone(),
        rhs,
        nodes,
        a,
    };

    // Postconditions. Z(0) = λ★ is exact by construction of Z = λ★ + r²W.
    for pair in sol.nodes.windows(2) {
        let (lo, hi) = (&pair[0], &pair[1]);
        if !(lo.w < 0.0 && hi.w < 0.0) {
            return Err(CymError::SolverFailure {
                r: hi.r,
                w: hi.w,
                detail: "W must stay negative on [0, 1]".into(),
            });
        }
        let z_lo = sol.spec.lambda_star() + lo.r * lo.r * lo.w;
        let z_hi = sol.spec.lambda_star() + hi.r * hi.r * hi.w;
        if z_hi >= z_lo {
            return Err(CymError::SolverFailure {
                r: hi.r,
                w: hi.w,
                detail: "Z must be strictly decreasing in r".into(),
            });
        }
    }
    let zp1 = sol.z_prime(1.0)?;
    if (zp1 + 1.0).abs() > 1e-8 {
        return Err(CymError::SolverFailure {
            r: 1.0,
            w: -lambda_star,
            detail: format!("Z'(1) = {zp1} differs from −1"),
        });
    }
    Ok(sol)
}

/// Closed-form profile `Z = (1 − r²)/(2 + μ − μ r²)` for the rational case
/// λ = −(n+1)/k (all eigenvalues equal).
pub fn closed_form_z(spec: &EigenSpec, r: f64) -> Result<f64> {
    if !spec.is_rational_case()? {
        return Err(CymError::Precondition(
            "closed-form Z only exists for λ = −(n+1)/k".into(),
        ));
    }
    let mu = spec.nu() * spec.eigenvalues()[0];
    Ok((1.0 - r * r) / (2.0 + mu - mu * r * r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec112() -> EigenSpec {
        EigenSpec::constant(1, 1, -2.0).unwrap()
    }

    /// Closed-form W for (n,k,λ) = (1,1,−2): W = −9/(2 + 4r²).
    fn w_closed(r: f64) -> f64 {
        -9.0 / (2.0 + 4.0 * r * r)
    }

    /// Its derivative: W' = 72 r / (2 + 4r²)².
    fn w_prime_closed(r: f64) -> f64 {
        72.0 * r / (2.0 + 4.0 * r * r).powi(2)
    }

    #[test]
    fn rhs_examples() {
        let rhs = ProfileRhs::new(&spec112()).unwrap();
        // every term carries a factor of r
        assert_eq!(rhs.eval(0.0, -4.5).unwrap(), 0.0);
        // the field is proportional to W
        assert_eq!(rhs.eval(0.7, 0.0).unwrap(), 0.0);
        // oracle: differentiate the closed form at r = 1, W = −3/2
        let got = rhs.eval(1.0, -1.5).unwrap();
        assert!(
            (got - w_prime_closed(1.0)).abs() < 1e-12,
            "W'(1) = {got}, closed form gives {}",
            w_prime_closed(1.0)
        );
        assert!((got - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rhs_matches_closed_form_along_the_solution() {
        let rhs = ProfileRhs::new(&spec112()).unwrap();
        for i in 1..20 {
            let r = i as f64 / 20.0;
            let got = rhs.eval(r, w_closed(r)).unwrap();
            assert!((got - w_prime_closed(r)).abs() < 1e-12, "r = {r}");
        }
    }

    #[test]
    fn second_derivative_matches_difference_quotient() {
        let rhs = ProfileRhs::new(&spec112()).unwrap();
        // W'' along the closed-form solution, by differencing W'
        let r = 0.6;
        let eps = 1e-6;
        let dd = (w_prime_closed(r + eps) - w_prime_closed(r - eps)) / (2.0 * eps);
        let got = rhs.second_derivative(r, w_closed(r)).unwrap();
        assert!((got - dd).abs() < 1e-6, "{got} vs {dd}");
    }

    #[test]
    fn solve_rational_case_endpoints() {
        let sol = solve_profile(&spec112(), 1e-10, 1e-12).unwrap();
        // Z(0) = λ★ = 3/2
        assert_eq!(sol.z(0.0).unwrap(), 1.5);
        // Z(1/2) = 3/4 from the closed form
        assert!((sol.z(0.5).unwrap() - 0.75).abs() < 1e-10);
        // Z'(1) = −1
        assert!((sol.z_prime(1.0).unwrap() + 1.0).abs() < 1e-10);
        // Z'(0) = 0
        assert_eq!(sol.z_prime(0.0).unwrap(), 0.0);
        // Z(1) = 0 exactly: λ★ + (−λ★)
        assert_eq!(sol.z(1.0).unwrap(), 0.0);
        // a = W(0) = −9/2
        assert!((sol.a() + 4.5).abs() < 1e-9);
    }

    #[test]
    fn closed_form_oracle_sup_gap() {
        for (n, k) in [(1usize, 1usize), (1, 2), (2, 3)] {
            let lambda = -(n as f64 + 1.0) / k as f64;
            let spec = EigenSpec::constant(n, k, lambda).unwrap();
            let sol = solve_profile(&spec, 1e-10, 1e-12).unwrap();
            let mut sup = 0.0f64;
            for i in 0..=1000 {
                let r = i as f64 / 1000.0;
                let gap = (sol.z(r).unwrap() - closed_form_z(&spec, r).unwrap()).abs();
                sup = sup.max(gap);
            }
            assert!(sup <= 1e-8, "(n,k)=({n},{k}) sup gap {sup:.2e}");
        }
    }

    #[test]
    fn closed_form_z_examples() {
        let spec = spec112();
        assert_eq!(closed_form_z(&spec, 1.0).unwrap(), 0.0);
        // r = 0 gives 1/(2+μ) = λ★
        assert!((closed_form_z(&spec, 0.0).unwrap() - spec.lambda_star()).abs() < 1e-15);
        assert!((closed_form_z(&spec, 0.5).unwrap() - 0.75).abs() < 1e-15);
        // identity (2+μ)λ★ = 1 across several rational specs
        for (n, k) in [(1usize, 2usize), (2, 3), (3, 2)] {
            let s = EigenSpec::constant(n, k, -(n as f64 + 1.0) / k as f64).unwrap();
            let mu = s.nu() * s.eigenvalues()[0];
            assert!(((2.0 + mu) * s.lambda_star() - 1.0).abs() < 1e-14);
        }
        // outside the rational case the closed form refuses
        let bad = EigenSpec::constant(1, 1, -1.5).unwrap();
        assert!(closed_form_z(&bad, 0.5).is_err());
    }

    #[test]
    fn ode_residual_small_on_uniform_grid() {
        for spec in [
            spec112(),
            EigenSpec::new(2, 2, vec![-1.3, 0.4]).unwrap(),
            EigenSpec::new(3, 1, vec![-2.0, -0.5, 0.7]).unwrap(),
        ] {
            let sol = solve_profile(&spec, 1e-10, 1e-12).unwrap();
            let mut max = 0.0f64;
            for i in 0..1000 {
                let r = 0.01 + 0.99 * i as f64 / 999.0;
                max = max.max(sol.ode_residual(r).unwrap().abs());
            }
            assert!(max <= 1e-8, "{spec:?}: residual {max:.2e}");
        }
    }

    #[test]
    fn z_range_and_monotonicity() {
        let spec = EigenSpec::new(2, 2, vec![-1.0, 0.5]).unwrap();
        let sol = solve_profile(&spec, 1e-10, 1e-12).unwrap();
        let ls = spec.lambda_star();
        let mut prev = f64::INFINITY;
        for i in 0..=200 {
            let r = i as f64 / 200.0;
            let z = sol.z(r).unwrap();
            if i > 0 && i < 200 {
                assert!(z > 0.0 && z < ls, "Z({r}) = {z} outside (0, λ★)");
            }
            assert!(z < prev || i == 0);
            prev = z;
        }
    }

    #[test]
    fn concavity_at_origin() {
        let sol = solve_profile(&spec112(), 1e-10, 1e-12).unwrap();
        let a = sol.a();
        assert!(a < 0.0);
        // symmetric second difference with the even extension Z(−r) = Z(r)
        let d = 5e-4;
        let est = 2.0 * (sol.z(d).unwrap() - sol.z(0.0).unwrap()) / (d * d);
        assert!((est - 2.0 * a).abs() <= 1e-5, "est {est}, 2a {}", 2.0 * a);
    }

    #[test]
    fn tolerance_convergence() {
        let spec = EigenSpec::new(2, 1, vec![-1.5, 0.3]).unwrap();
        let residual_max = |rtol: f64| {
            let sol = solve_profile(&spec, rtol, 1e-15).unwrap();
            let mut max = 0.0f64;
            for i in 0..1000 {
                let r = 0.01 + 0.99 * i as f64 / 999.0;
                max = max.max(sol.ode_residual(r).unwrap().abs());
            }
            max
        };
        let coarse = residual_max(2e-6);
        let fine = residual_max(1e-6);
        assert!(
            fine * 2.0 <= coarse,
            "halving rel_tol: {coarse:.3e} -> {fine:.3e}"
        );
    }

    #[test]
    fn rejects_eigenvalue_at_or_above_one() {
        let spec = EigenSpec::new(1, 1, vec![1.5]).unwrap();
        assert!(solve_profile(&spec, 1e-10, 1e-12).is_err());
        let spec = EigenSpec::new(1, 1, vec![1.0]).unwrap();
        assert!(solve_profile(&spec, 1e-10, 1e-12).is_err());
    }

    #[test]
    fn solves_near_the_eigenvalue_bound() {
        // λ = 0.99 sits just inside the hypothesis λ < 1
        let spec = EigenSpec::constant(1, 1, 0.99).unwrap();
        let sol = solve_profile(&spec, 1e-10, 1e-12).unwrap();
        assert!((sol.z_prime(1.0).unwrap() + 1.0).abs() < 1e-9);
        let mut max = 0.0f64;
        for i in 0..500 {
            let r = 0.01 + 0.99 * i as f64 / 499.0;
            max = max.max(sol.ode_residual(r).unwrap().abs());
        }
        assert!(max <= 1e-8, "residual {max:.2e}");
    }

    #[test]
    fn domain_errors() {
        let sol = solve_profile(&spec112(), 1e-10, 1e-12).unwrap();
        assert!(sol.z(-0.1).is_err());
        assert!(sol.z(1.1).is_err());
    }

    #[test]
    fn quintic_hermite_reproduces_quintics() {
        // q(t) = t^5 − 2t^3 + t on [0.3, 0.9]
        let f = |t: f64| t.powi(5) - 2.0 * t.powi(3) + t;
        let df = |t: f64| 5.0 * t.powi(4) - 6.0 * t * t + 1.0;
        let d2f = |t: f64| 20.0 * t.powi(3) - 12.0 * t;
        let (a, b) = (0.3, 0.9);
        for i in 0..=10 {
            let r = a + (b - a) * i as f64 / 10.0;
            let (v, d) = quintic_hermite(a, f(a), df(a), d2f(a), b, f(b), df(b), d2f(b), r);
            assert!((v - f(r)).abs() < 1e-14);
            assert!((d - df(r)).abs() < 1e-12);
        }
    }
}
