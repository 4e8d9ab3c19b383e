//! Sobolev functions `c + ∫_(0,x] F dW`, second-order functions, and the
//! identities they satisfy.

mod identities;
mod sobolev;

pub use identities::{
    apply_second_order, dirichlet_inner, dual_apply, integration_by_parts_residual, kernel_section, poincare_gap,
    reproducing_kernel, DualFunctional, SecondOrderFunction,
};
pub use sobolev::{d_w_minus, sobolev_eval, SobolevFunction, VPrimitive};
