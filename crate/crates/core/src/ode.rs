//! Embedded Dormand–Prince 5(4) integrator for scalar initial value problems.
//!
//! Integrates in either direction with standard proportional step control and
//! records every accepted node together with the right-hand side there. The
//! caller builds its own dense interpolant from the nodes.

use crate::error::{CymError, Result};

/// One accepted integration node: abscissa, state, and slope `f(r, w)`.
#[derive(Clone, Copy, Debug)]
pub struct DenseNode {
    pub r: f64,
    pub w: f64,
    pub dw: f64,
}

/// Integration settings. `max_step` bounds |h| when present.
#[derive(Clone, Copy, Debug)]
pub struct IvpOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for IvpOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: None,
            max_steps: 200_000,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b − b̂, the embedded error weights (k7 = f at the new point, FSAL).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

/// Integrate `w' = f(r, w)` from `(r0, w0)` to `r1`, returning the accepted
/// nodes with `nodes[0].r = r0` and the last node exactly at `r1`.
pub fn integrate_scalar(
    f: &dyn Fn(f64, f64) -> Result<f64>,
    r0: f64,
    w0: f64,
    r1: f64,
    opts: &IvpOptions,
) -> Result<Vec<DenseNode>> {
    let span = r1 - r0;
    if span == 0.0 {
        let dw = f(r0, w0)?;
        return Ok(vec![DenseNode { r: r0, w: w0, dw }]);
    }
    let dir = span.signum();
    let h_cap = opts.max_step.unwrap_or(f64::INFINITY).abs();
    let mut h = (span.abs() * 1e-3).min(h_cap).max(1e-8) * dir;

    let mut r = r0;
    let mut w = w0;
    let mut k1 = f(r, w)?;
    let mut nodes = vec![DenseNode { r, w, dw: k1 }];

    for _ in 0..opts.max_steps {
        if (r1 - r) * dir <= 0.0 {
            break;
        }
        if (r + h - r1) * dir > 0.0 {
            h = r1 - r;
        }
        if h.abs() < 1e-14 * span.abs() {
            return Err(CymError::SolverFailure {
                r,
                w,
                detail: "step size underflow".into(),
            });
        }

        let k2 = f(r + C2 * h, w + h * (A21 * k1))?;
        let k3 = f(r + C3 * h, w + h * (A31 * k1 + A32 * k2))?;
        let k4 = f(r + C4 * h, w + h * (A41 * k1 + A42 * k2 + A43 * k3))?;
        let k5 = f(r + C5 * h, w + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))?;
        let k6 = f(r + h, w + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))?;
        let w_new = w + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = f(r + h, w_new)?;

        let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let tol = opts.abs_tol + opts.rel_tol * w.abs().max(w_new.abs());
        let err_norm = (err / tol).abs();

        if err_norm <= 1.0 {
            r += h;
            // land exactly on the endpoint despite rounding
            if (r1 - r) * dir <= 1e-16 * span.abs() {
                r = r1;
            }
            w = w_new;
            k1 = k7; // FSAL
            nodes.push(DenseNode { r, w, dw: k1 });
        }

        let factor = if err_norm == 0.0 {
            5.0
        } else {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * factor).clamp(-h_cap, h_cap);
    }

    if nodes.last().map(|n| n.r) != Some(r1) {
        return Err(CymError::SolverFailure {
            r,
            w,
            detail: format!("did not reach endpoint within {} steps", opts.max_steps),
        });
    }
    Ok(nodes)
}
