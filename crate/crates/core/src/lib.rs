//! Spectral-Galerkin simulation and Conley-index verification for the
//! strongly damped wave equation
//!
//! ```text
//! u_tt = -A u - c A u_t + lambda u + f(x, u),   x in (0, l),   u = 0 on the boundary,
//! ```
//!
//! at resonance: `lambda` equals an eigenvalue `mu_k` of the Dirichlet operator
//! `A u = -(a u')'` and `f` is bounded.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`] discretises `A`, builds the resonant splitting of the phase
//!   space `E = X^alpha x X` into minus/kernel/plus mode blocks and estimates
//!   the semigroup decay constants `(M, delta)`.
//! * [`semiflow`] holds the nonlinearities (behind a name-keyed registry),
//!   the Nemitskii operator, the homotopy field `G(s, .)`, the exponential
//!   integrator, the kernel chart `W` and the divergence probe.
//! * [`resonance`] checks the Landesman-Lazer, strong-resonance and
//!   geometric conditions and returns certified margins.
//! * [`block`] derives the isolating-block radii, verifies the boundary
//!   strata, reports the Conley index and runs the bounded-orbit census,
//!   the equilibrium solver and the connecting-orbit criteria.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod block;
pub mod error;
pub mod linalg;
pub mod resonance;
pub mod sampling;
pub mod semiflow;
pub mod spectral;

pub use error::{Error, Result};
