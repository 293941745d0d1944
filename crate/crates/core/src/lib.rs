//! Numerical Clifford analysis on the Poincaré upper half space.
//!
//! The crate is organised bottom-up:
//!
//! - [`clifford`]: arithmetic in the real Clifford algebra `C(V_n)` with
//!   `e_i^2 = -1`, the conjugation, the hyperplane reflection `*`, the
//!   `Re`/`Im^l`/`Im^r` split and inverses.
//! - [`monogenic`]: the Cauchy kernel, hypercomplex variables, Fueter
//!   symmetric powers, finite-difference Dirac residuals and growth-order
//!   estimation.
//! - [`boundary`]: boundary data on the hyperplane `w_n = 0` (a small
//!   expression language or sampled tables) and empirical Hölder-class
//!   estimators.
//! - [`quadrature`]: the Cauchy-type integral over the hyperplane and the
//!   moment integrals that make up the solvability conditions.
//! - [`solvers`]: Riemann jump, Schwarz and Hilbert problems for every
//!   integer order at infinity, symmetric extension and verification.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.
//! The `parallel` feature evaluates quadrature cells on a rayon pool; results
//! are bit-identical with and without it.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod boundary;
pub mod clifford;
mod error;
mod math;
pub mod monogenic;
pub mod quadrature;
pub mod solvers;

pub use boundary::{BoundaryFunction, DecayHint, Expr};
pub use clifford::{Multivector, Paravector, Signature};
pub use error::{
    AlgebraError, BoundaryError, Error, MonogenicError, ParseError, QuadratureError, SolveError,
};
pub use monogenic::{MultiIndex, PointField, SymmetricPolynomial};
pub use quadrature::{FrozenCauchy, IntegralResult, QuadratureScheme};
pub use solvers::{
    CaseTag, ConditionCheck, HilbertProblem, JumpSolution, ProbeSet, SectionallyRegularField, Solution,
    VerificationReport,
};

pub type Result<T, E = Error> = core::result::Result<T, E>;
