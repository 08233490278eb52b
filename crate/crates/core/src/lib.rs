//! Numerical laboratory for the discrete alloy-type random Schrödinger model
//! H_ω = −Δ + λV_ω, V_ω(x) = Σ_k ω_k u(x − k), with sign-changing single-site
//! potentials u.
//!
//! The crate builds finite-volume operators, evaluates explicit constants of
//! fractional-moment, Wegner and regularity bounds, and checks exact identities
//! and probabilistic bounds by quadrature and seeded Monte Carlo.

// Negated float comparisons (`!(x > 0.0)`) are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averaging;
pub mod config;
pub mod density;
pub mod error;
pub mod gaussian;
pub mod green;
pub mod lattice;
pub mod linalg;
pub mod mc;
pub mod model;
pub mod moments;
pub mod onedim;
pub mod poscomb;
pub mod potential;
pub mod quadrature;
pub mod rng;
pub mod spectra;
pub mod ubar;

pub use error::{Error, Result};
pub use num_complex::Complex64;
