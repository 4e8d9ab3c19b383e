//! One-sided Stieltjes calculus on the torus.
//!
//! The crate works with a pair of strictly increasing periodic functions `W`
//! (càdlàg) and `V` (càglàd), both allowed to jump. They induce measures on
//! the circle, and with them the lateral derivatives `D⁻_W` and `D⁺_V`, the
//! Sobolev-type space of functions `f = c + ∫_(0,x] F dW`, and the elliptic
//! operator `κ²u − D⁺_V(A D⁻_W u)`.
//!
//! Modules, bottom-up:
//!
//! - [`measure`]: measure functions with atoms, meshes, piecewise functions and
//!   exact Lebesgue–Stieltjes quadrature.
//! - [`calculus`]: Sobolev functions, second-order functions, duality, the
//!   Dirichlet inner product and its reproducing kernel.
//! - [`galerkin`]: hat-basis discretisation of the bilinear form and solvers.
//! - [`spectral`]: the generalised eigenproblem, Fourier coefficients, and a
//!   monodromy (shooting) oracle.
//! - [`stochastic`]: exact sampling of W-Brownian motion and bridges,
//!   stochastic integrals, white noise and the Gaussian transition semigroup.
//! - [`spde`]: Monte-Carlo solution of `κ²u − D⁺_V(H D⁻_W u) = Ḃ_W`.
//! - [`cli`]: JSON scene files and the `wvtorus` command line driver.

pub mod calculus;
pub mod cli;
mod error;
pub mod galerkin;
pub mod linalg;
pub mod measure;
pub mod spde;
pub mod spectral;
pub mod stochastic;

pub use error::{Error, Result};

/// Tolerance for identities that hold exactly in exact arithmetic.
pub const TOL_EXACT: f64 = 1e-10;
/// Tolerance for the side conditions of second-order functions.
pub const TOL_CONSTRAINT: f64 = 1e-10;
/// Tolerance for the Fredholm compatibility condition `∫ f dV = 0`.
pub const TOL_COMPAT: f64 = 1e-10;
