//! Dense univariate polynomials over f64.
//!
//! Coefficients are stored in ascending order of degree: `coeffs[i]` is the
//! coefficient of `x^i`. The zero polynomial is an empty coefficient vector.
//! Degrees stay small here (≤ ~60), so dense storage and plain convolution
//! products are both adequate and deterministic.

use crate::error::{CymError, Result};

/// Real-coefficient univariate polynomial, dense ascending storage.
#[derive(Clone, Debug, PartialEq)]
pub struct RealPolynomial {
    coeffs: Vec<f64>,
}

impl RealPolynomial {
    /// Build from ascending coefficients, trimming exact trailing zeros.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// The monic linear factor `x - root`.
    pub fn linear_monic(root: f64) -> Self {
        Self {
            coeffs: vec![-root, 1.0],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the convention that the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (0 beyond the stored degree).
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    /// Largest coefficient magnitude; 0 for the zero polynomial.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0.0) {
            self.coeffs.pop();
        }
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * i as f64)
            .collect();
        Self::new(coeffs)
    }

    /// Antiderivative `F` with `F' = self` and `F(x0) = y0`.
    pub fn antiderivative(&self, x0: f64, y0: f64) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / (i as f64 + 1.0));
        }
        let mut f = Self { coeffs };
        let shift = y0 - f.eval(x0);
        if f.coeffs.is_empty() {
            f.coeffs.push(shift);
        } else {
            f.coeffs[0] += shift;
        }
        f.trim();
        f
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::new(coeffs)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) + other.coeff(i)).collect();
        Self::new(coeffs)
    }

    /// Multiply by `x`, shifting every coefficient up one degree.
    pub fn shift_up(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    /// Coefficient reversal padded to degree `d`: returns `x^d · p(1/x)`.
    ///
    /// Fails when `d` is below the actual degree, since the reversal would
    /// drop leading coefficients.
    pub fn reversed(&self, d: usize) -> Result<Self> {
        if !self.is_zero() && d < self.degree() {
            return Err(CymError::InvalidDegree {
                bound: d,
                degree: self.degree(),
            });
        }
        let coeffs = (0..=d).map(|i| self.coeff(d - i)).collect();
        Ok(Self::new(coeffs))
    }

    /// Synthetic division by the monic factor `x - root`.
    ///
    /// Returns `(quotient, remainder)` with `self = (x - root)·q + remainder`.
    pub fn deflate(&self, root: f64) -> (Self, f64) {
        if self.is_zero() {
            return (Self::zero(), 0.0);
        }
        let n = self.coeffs.len();
        let mut q = vec![0.0; n.saturating_sub(1)];
        let mut acc = 0.0;
        for i in (0..n).rev() {
            let c = self.coeffs[i] + root * acc;
            if i == 0 {
                return (Self::new(q), c);
            }
            q[i - 1] = c;
            acc = c;
        }
        unreachable!()
    }

    /// Taylor coefficients around `center`: returns `q` with
    /// `self(center + s) = Σ q[j]·s^j`, by repeated synthetic division.
    pub fn taylor_at(&self, center: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        let mut cur = self.clone();
        if cur.is_zero() {
            return vec![0.0];
        }
        loop {
            let (q, r) = cur.deflate(center);
            out.push(r);
            if q.is_zero() {
                break;
            }
            cur = q;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        // 1 + 2x at x = 3
        let p = RealPolynomial::new(vec![1.0, 2.0]);
        assert_eq!(p.eval(3.0), 7.0);
        // zero polynomial anywhere
        assert_eq!(RealPolynomial::zero().eval(11.5), 0.0);
        // y^3 + 2y^2 - 32/27 at y = 2/3, built below by antiderivative
        let q = RealPolynomial::new(vec![0.0, 4.0, 3.0]).antiderivative(2.0 / 3.0, 0.0);
        assert!(q.eval(2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_and_antiderivative() {
        let p = RealPolynomial::new(vec![0.0, 0.0, 0.0, 1.0]); // y^3
        assert_eq!(p.derivative().coeffs(), &[0.0, 0.0, 3.0]);

        // antiderivative(3y^2 + 4y) anchored at (2/3, 0) = y^3 + 2y^2 - 32/27.
        // Oracle: term-by-term integration, constant fixed by the anchor.
        let f = RealPolynomial::new(vec![0.0, 4.0, 3.0]).antiderivative(2.0 / 3.0, 0.0);
        let expect = [-32.0 / 27.0, 0.0, 2.0, 1.0];
        for (a, b) in f.coeffs().iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }

        // antiderivative of 0 anchored at (0, 1) is the constant 1
        let c = RealPolynomial::zero().antiderivative(0.0, 1.0);
        assert_eq!(c.coeffs(), &[1.0]);
    }

    #[test]
    fn reversal_examples() {
        // y + 4/3 reversed at d = 1 -> 1 + (4/3)x
        let p = RealPolynomial::new(vec![4.0 / 3.0, 1.0]);
        let hat = p.reversed(1).unwrap();
        assert_eq!(hat.coeffs(), &[1.0, 4.0 / 3.0]);

        // y^3 + 2y^2 - 32/27 reversed at d = 3 -> 1 + 2x - (32/27)x^3
        let q = RealPolynomial::new(vec![-32.0 / 27.0, 0.0, 2.0, 1.0]);
        let hat = q.reversed(3).unwrap();
        assert_eq!(hat.coeffs(), &[1.0, 2.0, 0.0, -32.0 / 27.0]);

        // constant 1 at d = 0 stays 1
        let one = RealPolynomial::constant(1.0);
        assert_eq!(one.reversed(0).unwrap().coeffs(), &[1.0]);

        // degree bound below the actual degree is an error
        assert!(q.reversed(2).is_err());
    }

    #[test]
    fn deflate_exact() {
        // (x - 3/2) divides 1 + 2x - (32/27)x^3 with quotient -2/3 - (16/9)x - (32/27)x^2
        let q = RealPolynomial::new(vec![1.0, 2.0, 0.0, -32.0 / 27.0]);
        let (quot, rem) = q.deflate(1.5);
        assert!(rem.abs() < 1e-15);
        let expect = [-2.0 / 3.0, -16.0 / 9.0, -32.0 / 27.0];
        for (a, b) in quot.coeffs().iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn taylor_shift_recenters() {
        // p(x) = x^2 recentered at 1: (1 + s)^2 = 1 + 2s + s^2
        let p = RealPolynomial::new(vec![0.0, 0.0, 1.0]);
        assert_eq!(p.taylor_at(1.0), vec![1.0, 2.0, 1.0]);
    }
}
