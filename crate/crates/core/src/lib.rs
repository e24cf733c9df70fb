//! Sparsity-promoting Tikhonov regularization with certified ℓ¹ convergence
//! rates.
//!
//! This crate studies linear operator equations `A x = y` with a sparse
//! solution `x† ∈ ℓ¹` and noisy data `‖y − y^δ‖ ≤ δ`, regularized by
//!
//! ```text
//! minimize  ½ ‖A x − y^δ‖²  +  α ‖x‖₁ .
//! ```
//!
//! Its distinguishing feature is that convergence rates of the regularized
//! solutions are *certified* rather than assumed: a rate function φ is built
//! from explicitly verifiable source sets (tuples of functionals whose
//! adjoint images reproduce the canonical basis up to controlled column
//! sums), and the resulting variational inequality
//!
//! ```text
//! β ‖x − x†‖₁ ≤ ‖x‖₁ − ‖x†‖₁ + φ(‖A x − A x†‖)
//! ```
//!
//! is checked numerically. Two concrete operators are modeled: a bidiagonal
//! difference operator on ℓ² and the integration operator on L²(0,1)
//! composed with Haar synthesis. For the latter, exact piecewise-polynomial
//! calculus with dyadic breakpoints replaces quadrature, so all image-space
//! inner products are computed without discretization error.
//!
//! Modules mirror the pipeline:
//!
//! * [`sequences`] — dense finite sequences with implicit zero tails,
//! * [`piecewise`] — exact piecewise-polynomial calculus on \[0,1\],
//! * [`operators`] — the operator models and their adjoints,
//! * [`source_sets`] — source-set candidates, construction and verification,
//! * [`rates`] — rate functions φ and variational-inequality margins,
//! * [`solver`] — an accelerated proximal-gradient ℓ¹ solver with a
//!   discrepancy-principle parameter choice,
//! * [`experiments`] — noise sweeps and the β = 1 impossibility demo.
//!
//! # Example
//!
//! ```
//! use l1rates::rates::{beta_of_c, RateProfile};
//! use l1rates::sequences::SeqVec;
//! use l1rates::source_sets::SourceCandidate;
//!
//! // Exact solution with quadratically decaying entries.
//! let xdag = SeqVec::new((1..=32).map(|k| (k as f64).powi(-2)).collect()).unwrap();
//!
//! // Verified source families for c = 1/2 over a ladder of support sizes.
//! let ladder: Vec<_> = [1usize, 2, 4, 8, 16, 32]
//!     .iter()
//!     .map(|&n| SourceCandidate::bidiagonal(n, 0.5).unwrap())
//!     .collect();
//! let profile = RateProfile::build(&ladder, &xdag).unwrap();
//!
//! // The variational inequality holds with β = (1 − c)/(1 + c) = 1/3.
//! assert_eq!(profile.beta(), beta_of_c(0.5).unwrap());
//! let x = SeqVec::new(vec![1.0, -2.0, 3.0]).unwrap();
//! assert!(profile.vie_margin(&x).unwrap() >= -1e-9);
//!
//! // The certified error bound at noise level δ = 1e-3.
//! assert!(profile.phi(1e-3).unwrap() > 0.0);
//! ```

pub mod error;
pub mod experiments;
pub mod operators;
pub mod piecewise;
pub mod rates;
pub mod sequences;
pub mod solver;
pub mod source_sets;

pub use error::{Error, Result};
