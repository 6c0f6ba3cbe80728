//! Numerical library for Kähler–Einstein potentials on ball bundles over
//! bases with constant Ricci eigenvalues.
//!
//! The pipeline: an [`EigenSpec`] generates the polynomial families
//! (P, Q and their reversals, the deflations h and g); [`profile`] solves
//! the radial equation `r Z' P̂(Z) + Q̂(Z) = 0` through its regular
//! W-formulation; [`phi`] builds the potential factor φ; [`ma`] assembles
//! the Cheng–Yau–Mok potential `u = k^{n/(m+1)} (GH)^{-1/(m+1)} φ(|w|_h)`
//! on the [`model`] geometries and verifies the complex Monge–Ampère
//! equation by independent finite differences; [`bundle`] audits Hermitian
//! bundle metrics (curvature splitting, Griffiths negativity, constancy of
//! Ricci eigenvalues) on coordinate charts.

pub mod bundle;
pub mod eigen;
pub mod error;
pub mod fd;
pub mod ma;
pub mod model;
pub mod ode;
pub mod phi;
pub mod poly;
pub mod profile;
pub mod rng;
pub mod selftest;

pub use eigen::EigenSpec;
pub use error::{CymError, Result};
pub use poly::RealPolynomial;
