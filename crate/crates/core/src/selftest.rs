//! Built-in spot-check battery: every frozen example value the library is
//! documented to reproduce, runnable from the CLI as `cym selftest`.

use num_complex::Complex64 as C64;

use crate::bundle::{
    self, chern_curvature, default_fd, disk_power, disk_power_sum, flat, fubini_study_positive,
    gaussian, griffiths_negativity_sample, induced_base_metric, ricci_eigenvalues, split_residual,
};
use crate::eigen::EigenSpec;
use crate::fd::{hessian_scalar, FdConfig};
use crate::ma::{
    bergman_compare_p1, block_vs_fd_gap, capital_phi_check, default_ma_fd,
    hessian_blocks_closed_form, ma_residual, metric_lower_bound_check, run_ma_verification,
    u_value,
};
use crate::model::{ModelGeometry, RadialProfile};
use crate::phi::PhiProfile;
use crate::profile::{closed_form_z, solve_profile};

/// Outcome of one named check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(
    results: &mut Vec<CheckResult>,
    name: &'static str,
    run: impl FnOnce() -> Result<String, String>,
) {
    let (passed, detail) = match run() {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    results.push(CheckResult {
        name,
        passed,
        detail,
    });
}

fn expect(cond: bool, detail: String) -> Result<String, String> {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Run every check; all cheap enough for interactive use.
pub fn run_all() -> Vec<CheckResult> {
    let mut out = Vec::new();

    check(&mut out, "polynomials: P, Q, h, g for (1,1,-2)", || {
        let s = EigenSpec::constant(1, 1, -2.0).map_err(|e| e.to_string())?;
        let q = s.q_poly();
        let (h, g) = s.factor_h_g().map_err(|e| e.to_string())?;
        let ls = s.lambda_star();
        let checks = [
            (s.p_poly().eval(0.0) - 4.0 / 3.0).abs() < 1e-14,
            q.eval(s.nu()).abs() < 1e-14,
            q.eval(-4.0 / 3.0).abs() < 1e-13,
            (g.eval(ls) + 6.0).abs() < 1e-12,
            (h.eval(ls) - 3.0).abs() < 1e-12,
            (g.eval(ls) + 2.0 * h.eval(ls)).abs() < 1e-12,
        ];
        expect(
            checks.iter().all(|&b| b),
            format!("g(l*)={:.3}, h(l*)={:.3}", g.eval(ls), h.eval(ls)),
        )
    });

    check(&mut out, "beta identity residuals", || {
        let r1 = EigenSpec::constant(1, 2, -1.0)
            .and_then(|s| s.beta_identity_residual())
            .map_err(|e| e.to_string())?;
        let r2 = EigenSpec::constant(1, 1, -2.0)
            .and_then(|s| s.beta_identity_residual())
            .map_err(|e| e.to_string())?;
        let r3 = EigenSpec::constant(1, 1, -1.0)
            .and_then(|s| s.beta_identity_residual())
            .map_err(|e| e.to_string())?;
        expect(
            r1.abs() < 1e-15 && r2.abs() < 1e-15 && (r3 - 1.0 / 9.0).abs() < 1e-15,
            format!("residuals {r1:.1e}, {r2:.1e}, {r3:.6}"),
        )
    });

    check(&mut out, "rationality criterion", || {
        let a = EigenSpec::constant(3, 2, -2.0)
            .and_then(|s| s.is_rational_case())
            .map_err(|e| e.to_string())?;
        let b = EigenSpec::constant(1, 1, -1.5)
            .and_then(|s| s.is_rational_case())
            .map_err(|e| e.to_string())?;
        let d = EigenSpec::constant(1, 1, -2.0)
            .and_then(|s| s.is_rational_case())
            .map_err(|e| e.to_string())?;
        expect(a && !b && d, format!("(3,2,-2)={a}, (1,1,-1.5)={b}, (1,1,-2)={d}"))
    });

    check(&mut out, "profile endpoints for (1,1,-2)", || {
        let s = EigenSpec::constant(1, 1, -2.0).map_err(|e| e.to_string())?;
        let sol = solve_profile(&s, 1e-10, 1e-12).map_err(|e| e.to_string())?;
        let z0 = sol.z(0.0).map_err(|e| e.to_string())?;
        let zh = sol.z(0.5).map_err(|e| e.to_string())?;
        let zp1 = sol.z_prime(1.0).map_err(|e| e.to_string())?;
        expect(
            (z0 - 1.5).abs() < 1e-12 && (zh - 0.75).abs() < 1e-9 && (zp1 + 1.0).abs() < 1e-9,
            format!("Z(0)={z0:.12}, Z(1/2)={zh:.12}, Z'(1)={zp1:.12}"),
        )
    });

    check(&mut out, "rational-case profile oracle", || {
        let mut worst = 0.0f64;
        for (n, k) in [(1usize, 1usize), (1, 2), (2, 3)] {
            let lambda = -(n as f64 + 1.0) / k as f64;
            let s = EigenSpec::constant(n, k, lambda).map_err(|e| e.to_string())?;
            let sol = solve_profile(&s, 1e-10, 1e-12).map_err(|e| e.to_string())?;
            for i in 0..=500 {
                let r = i as f64 / 500.0;
                let gap = (sol.z(r).map_err(|e| e.to_string())?
                    - closed_form_z(&s, r).map_err(|e| e.to_string())?)
                .abs();
                worst = worst.max(gap);
            }
        }
        expect(worst <= 1e-8, format!("sup |Z - closed| = {worst:.2e}"))
    });

    check(&mut out, "phi values and derivatives", || {
        let s = EigenSpec::constant(1, 1, -2.0).map_err(|e| e.to_string())?;
        let p = PhiProfile::new(solve_profile(&s, 1e-10, 1e-12).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let v = [
            p.phi(1.0).map_err(|e| e.to_string())?.abs() < 1e-12,
            (p.phi(0.5).map_err(|e| e.to_string())? - 0.75).abs() < 1e-9,
            (p.phi(0.0).map_err(|e| e.to_string())? - 1.0).abs() < 1e-9,
            p.phi_prime(0.0).map_err(|e| e.to_string())?.abs() < 1e-15,
            (p.phi_prime(1.0).map_err(|e| e.to_string())? + 2.0).abs() < 1e-9,
            (p.phi_prime(0.5).map_err(|e| e.to_string())? + 1.0).abs() < 1e-9,
            (p.y(0.5).map_err(|e| e.to_string())? - 4.0 / 3.0).abs() < 1e-9,
        ];
        expect(v.iter().all(|&b| b), "phi(1)=0, phi(1/2)=3/4, phi'(1)=-2".into())
    });

    check(&mut out, "wirtinger derivatives", || {
        let f1 = |z: &[C64]| Ok(z[0].norm_sqr());
        let cfg = FdConfig::new(1e-3, 2);
        let h1 = hessian_scalar(&f1, &[c(0.3, -0.2)], &cfg).map_err(|e| e.to_string())?;
        let f2 = |z: &[C64]| {
            let n2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
            Ok(-(1.0 - n2).ln())
        };
        let h2 = hessian_scalar(&f2, &[c(0.0, 0.0), c(0.5, 0.0)], &default_ma_fd())
            .map_err(|e| e.to_string())?;
        expect(
            (h1[(0, 0)].re - 1.0).abs() < 1e-10
                && (h2[(0, 0)].re - 4.0 / 3.0).abs() < 1e-9
                && (h2[(1, 1)].re - 16.0 / 9.0).abs() < 1e-9,
            format!("ball diag = ({:.9}, {:.9})", h2[(0, 0)].re, h2[(1, 1)].re),
        )
    });

    check(&mut out, "chern curvature spot values", || {
        let origin = [c(0.0, 0.0)];
        let t1 = chern_curvature(&disk_power(1, 1.0), &origin, &default_fd())
            .map_err(|e| e.to_string())?;
        let t2 = chern_curvature(&disk_power(1, 2.0), &origin, &default_fd())
            .map_err(|e| e.to_string())?;
        let t0 =
            chern_curvature(&flat(1), &origin, &default_fd()).map_err(|e| e.to_string())?;
        expect(
            (t1.component(0, 0, 0, 0).re + 1.0).abs() < 1e-8
                && (t2.component(0, 0, 0, 0).re + 2.0).abs() < 1e-8
                && t0.component(0, 0, 0, 0).norm() < 1e-12,
            format!("theta = {:.9}, {:.9}", t1.component(0, 0, 0, 0).re, t2.component(0, 0, 0, 0).re),
        )
    });

    check(&mut out, "split residuals", || {
        let origin = [c(0.0, 0.0)];
        let eq = disk_power_sum(1, &[1.0, 1.0]).map_err(|e| e.to_string())?;
        let uneq = disk_power_sum(1, &[1.0, 2.0]).map_err(|e| e.to_string())?;
        let r_eq = split_residual(&eq, &origin, &default_fd()).map_err(|e| e.to_string())?;
        let r_uneq = split_residual(&uneq, &origin, &default_fd()).map_err(|e| e.to_string())?;
        expect(
            r_eq < 1e-6 && r_uneq >= 0.4,
            format!("equal sum {r_eq:.2e}, powers (1,2) {r_uneq:.3}"),
        )
    });

    check(&mut out, "griffiths negativity sampling", || {
        let origin = [c(0.0, 0.0)];
        let neg = griffiths_negativity_sample(&disk_power(1, 1.0), &origin, &default_fd(), 25, 7)
            .map_err(|e| e.to_string())?;
        let zero = griffiths_negativity_sample(&flat(1), &origin, &default_fd(), 10, 7)
            .map_err(|e| e.to_string())?;
        let pos =
            griffiths_negativity_sample(&fubini_study_positive(1), &origin, &default_fd(), 10, 7)
                .map_err(|e| e.to_string())?;
        expect(
            neg.negative_evidence && !zero.negative_evidence && !pos.negative_evidence
                && pos.min_value > 0.0,
            format!("disk min {:.3}, positive-model min {:.3}", neg.min_value, pos.min_value),
        )
    });

    check(&mut out, "induced base metric", || {
        let origin = [c(0.0, 0.0)];
        let (g1, det1) = induced_base_metric(&disk_power(1, 1.0), &origin, &default_fd())
            .map_err(|e| e.to_string())?;
        let sum = disk_power_sum(1, &[1.0, 1.0]).map_err(|e| e.to_string())?;
        let (g2, _) =
            induced_base_metric(&sum, &origin, &default_fd()).map_err(|e| e.to_string())?;
        let flat_fails = induced_base_metric(&flat(1), &origin, &default_fd()).is_err();
        expect(
            (g1[(0, 0)].re - 1.0).abs() < 1e-8
                && (det1 - 1.0).abs() < 1e-8
                && (g2[(0, 0)].re - 2.0).abs() < 1e-8
                && flat_fails,
            format!("g_disk = {:.9}, g_sum = {:.9}", g1[(0, 0)].re, g2[(0, 0)].re),
        )
    });

    check(&mut out, "ricci eigenvalue constancy", || {
        let pts: Vec<Vec<C64>> = vec![
            vec![c(0.0, 0.0)],
            vec![c(0.3, 0.0)],
            vec![c(0.0, 0.3)],
            vec![c(-0.25, 0.0)],
            vec![c(0.15, -0.2)],
        ];
        let r1 = ricci_eigenvalues(&disk_power(1, 1.0), &pts, 1e-4).map_err(|e| e.to_string())?;
        let sum = disk_power_sum(1, &[1.0, 1.0]).map_err(|e| e.to_string())?;
        let r2 = ricci_eigenvalues(&sum, &pts, 1e-4).map_err(|e| e.to_string())?;
        let r0 = ricci_eigenvalues(&gaussian(1), &pts, 1e-4).map_err(|e| e.to_string())?;
        let vals_ok = r1.eigenvalues.iter().all(|e| (e[0] + 2.0).abs() < 1e-4)
            && r2.eigenvalues.iter().all(|e| (e[0] + 1.0).abs() < 1e-4)
            && r0.eigenvalues.iter().all(|e| e[0].abs() < 1e-4);
        expect(
            r1.constant && r2.constant && r0.constant && vals_ok,
            format!(
                "eigenvalues {:.6}, {:.6}, {:.2e}",
                r1.eigenvalues[0][0], r2.eigenvalues[0][0], r0.eigenvalues[0][0]
            ),
        )
    });

    check(&mut out, "determinant bundle consistency", || {
        let m = disk_power(1, 1.0);
        let z = vec![c(0.2, 0.1)];
        let t = chern_curvature(&m, &z, &default_fd()).map_err(|e| e.to_string())?;
        let r = bundle::bundle_ricci(&t, &m.h_at(&z)).map_err(|e| e.to_string())?;
        let (g, _) = induced_base_metric(&m, &z, &default_fd()).map_err(|e| e.to_string())?;
        let gap = (&r + &g).iter().map(|v| v.norm()).fold(0.0, f64::max);
        expect(gap < 1e-6, format!("|Ric(E) + g| = {gap:.2e}"))
    });

    check(&mut out, "u spot values on egg(1,1,1)", || {
        let model = ModelGeometry::egg(1, 1, 1.0).map_err(|e| e.to_string())?;
        let profile = RadialProfile::for_model(&model, 1e-10, 1e-12).map_err(|e| e.to_string())?;
        let u1 = u_value(&model, &profile, &[c(0.0, 0.0), c(0.5, 0.0)])
            .map_err(|e| e.to_string())?;
        let u2 = u_value(&model, &profile, &[c(0.5, 0.0), c(0.0, 0.0)])
            .map_err(|e| e.to_string())?;
        expect(
            (u1 - 0.75).abs() < 1e-13 && (u2 - 0.75).abs() < 1e-13,
            format!("u = {u1:.15}, {u2:.15}"),
        )
    });

    check(&mut out, "monge-ampere residual at (0, 1/2)", || {
        let model = ModelGeometry::egg(1, 1, 1.0).map_err(|e| e.to_string())?;
        let profile = RadialProfile::for_model(&model, 1e-10, 1e-12).map_err(|e| e.to_string())?;
        let chk = ma_residual(&model, &profile, &[c(0.0, 0.0), c(0.5, 0.0)], &default_ma_fd())
            .map_err(|e| e.to_string())?;
        expect(
            chk.residual_log < 1e-9 && chk.residual_j < 1e-9 && chk.min_eig > 0.0,
            format!("residuals ({:.2e}, {:.2e})", chk.residual_log, chk.residual_j),
        )
    });

    check(&mut out, "hessian blocks at (0, 1/2)", || {
        let model = ModelGeometry::egg(1, 1, 1.0).map_err(|e| e.to_string())?;
        let profile = RadialProfile::for_model(&model, 1e-10, 1e-12).map_err(|e| e.to_string())?;
        let b = hessian_blocks_closed_form(&model, &profile, &[c(0.5, 0.0)])
            .map_err(|e| e.to_string())?;
        let det = b.full().lu().determinant().re;
        let gap = block_vs_fd_gap(&model, &profile, &[c(0.5, 0.0)], &default_ma_fd())
            .map_err(|e| e.to_string())?;
        expect(
            (b.base[(0, 0)].re - 4.0 / 3.0).abs() < 1e-13
                && (b.fiber[(0, 0)].re - 16.0 / 9.0).abs() < 1e-13
                && (det - 64.0 / 27.0).abs() < 1e-12
                && gap < 1e-8,
            format!("base {:.9}, fiber {:.9}, fd gap {gap:.2e}", b.base[(0, 0)].re, b.fiber[(0, 0)].re),
        )
    });

    check(&mut out, "capital phi identity", || {
        let model = ModelGeometry::egg(1, 1, 1.0).map_err(|e| e.to_string())?;
        let profile = RadialProfile::for_model(&model, 1e-10, 1e-12).map_err(|e| e.to_string())?;
        let (formula, numeric) =
            capital_phi_check(&model, &profile, &[c(0.5, 0.0)], &default_ma_fd())
                .map_err(|e| e.to_string())?;
        expect(
            (formula - 64.0 / 27.0).abs() < 1e-12 && (numeric - formula).abs() <= 1e-5 * formula,
            format!("formula {formula:.12}, numeric {numeric:.12}"),
        )
    });

    check(&mut out, "metric lower bound", || {
        let model = ModelGeometry::egg(1, 1, 1.0).map_err(|e| e.to_string())?;
        let profile = RadialProfile::for_model(&model, 1e-10, 1e-12).map_err(|e| e.to_string())?;
        let rep = metric_lower_bound_check(&model, &profile, &[vec![c(0.5, 0.0)]])
            .map_err(|e| e.to_string())?;
        expect(
            rep.holds && (rep.min_eigenvalue - 1.0 / 3.0).abs() < 1e-12,
            format!("slack min eigenvalue {:.9}", rep.min_eigenvalue),
        )
    });

    check(&mut out, "bergman specialization p=1", || {
        let a = bergman_compare_p1(1, 1, 1.0, 10, 99).map_err(|e| e.to_string())?;
        let b = bergman_compare_p1(2, 3, 1.0, 10, 99).map_err(|e| e.to_string())?;
        let unsupported = bergman_compare_p1(1, 1, 2.0, 10, 99).is_err();
        expect(
            a.max_deviation <= 1e-8 && b.max_deviation <= 1e-8 && unsupported,
            format!("deviations {:.2e}, {:.2e}", a.max_deviation, b.max_deviation),
        )
    });

    check(&mut out, "sampled monge-ampere runs", || {
        let model = ModelGeometry::egg(1, 1, 1.0).map_err(|e| e.to_string())?;
        let profile = RadialProfile::for_model(&model, 1e-10, 1e-12).map_err(|e| e.to_string())?;
        let rep = run_ma_verification(&model, &profile, 10, 20240817, &default_ma_fd(), 1)
            .map_err(|e| e.to_string())?;
        let model2 = ModelGeometry::egg(1, 2, 2.0).map_err(|e| e.to_string())?;
        let profile2 =
            RadialProfile::for_model(&model2, 1e-10, 1e-12).map_err(|e| e.to_string())?;
        let rep2 = run_ma_verification(&model2, &profile2, 5, 20240817, &default_ma_fd(), 1)
            .map_err(|e| e.to_string())?;
        expect(
            rep.max_residual <= 1e-8 && rep2.max_residual <= 1e-5,
            format!(
                "egg(1,1,1) max {:.2e}; egg(1,2,2) max {:.2e}",
                rep.max_residual, rep2.max_residual
            ),
        )
    });

    out
}
