//! Eigenpairs of `−Δ_{W,V}` and `L_{W,V}`, Fourier expansion, the
//! regularity residual of eigenfunctions, and a monodromy oracle.

mod eigen;
mod shooting;

use std::sync::Arc;

pub use eigen::{eig, eigenvalues, EigenDecomposition, Operator};
pub use shooting::{expand, shooting_spectrum, uniform_grid, write_roots, Monodromy, Root};

use crate::calculus::SobolevFunction;
use crate::measure::{integrate, integrate_product, Convention, Cumulative, Interval, MeshFunction, Side};
use crate::Result;

/// Coefficients of `f` in an eigenbasis of the Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierReport {
    /// V-mean `∫ f dV / V(1)`.
    pub alpha0: f64,
    /// `α_i = ⟨f, ν_i⟩_V`.
    pub alphas: Vec<f64>,
    /// `Σ_{i} λ_i α_i²`.
    pub sum_lambda_alpha_sq: f64,
    /// `‖D⁻_W f‖²_W` by direct quadrature.
    pub derivative_norm_sq: f64,
    /// `Σ (1 + λ_i) α_i²`, the energetic norm from the coefficients.
    pub energy_norm_sq_fourier: f64,
    /// `‖f‖²_V + ‖D⁻_W f‖²_W` by direct quadrature.
    pub energy_norm_sq: f64,
}

impl FourierReport {
    /// `|Σλα² − ‖D⁻_W f‖²_W| / max(‖D⁻_W f‖²_W, tiny)`.
    pub fn parseval_gap(&self) -> f64 {
        (self.sum_lambda_alpha_sq - self.derivative_norm_sq).abs() / self.derivative_norm_sq.max(f64::MIN_POSITIVE)
    }
}

/// `⟨f, ν_i⟩_V` for every eigenfunction, and the two ways of computing the
/// energetic norm.
pub fn fourier_coeffs(f: &SobolevFunction, e: &EigenDecomposition) -> Result<FourierReport> {
    let mesh = f.mesh();
    let v = mesh.v();
    let full = Interval::closed_open(0.0, 1.0);
    let alphas = e
        .vectors
        .iter()
        .map(|nu| integrate_product(&[f as &dyn MeshFunction, nu], v, full))
        .collect::<Result<Vec<_>>>()?;
    let sum_lambda_alpha_sq = alphas.iter().zip(&e.eigenvalues).map(|(a, l)| l * a * a).sum();
    let energy_norm_sq_fourier = alphas.iter().zip(&e.eigenvalues).map(|(a, l)| (1.0 + l) * a * a).sum();
    Ok(FourierReport {
        alpha0: integrate(f, v, full)? / v.total(),
        alphas,
        sum_lambda_alpha_sq,
        derivative_norm_sq: f.derivative_norm_w_sq()?,
        energy_norm_sq_fourier,
        energy_norm_sq: f.energy_norm_sq()?,
    })
}

/// `Σ (1 + λ_i) α_i²`.
pub fn sobolev_norm_fourier(f: &SobolevFunction, e: &EigenDecomposition) -> Result<f64> {
    Ok(fourier_coeffs(f, e)?.energy_norm_sq_fourier)
}

/// `sup_nodes |ψ̃ − ν|` for `ψ̃ = a + bW − λ∫_(0,x]∫_[0,y) ν dV dW`, with
/// `b = λ·I(1)/W(1)` and `a` matching the V-integral of `ν`.
pub fn regularity_residual(nu: &SobolevFunction, lambda: f64) -> Result<f64> {
    let mesh = nu.mesh().clone();
    let (w, v) = (mesh.w().clone(), mesh.v().clone());
    let inner = Cumulative::new(Arc::new(nu.clone()), v.clone(), Convention::ClosedOpen, 0.0)?;
    let outer = Cumulative::new(Arc::new(inner), w.clone(), Convention::OpenClosed, 0.0)?;
    let b = lambda * outer.total() / w.total();
    // ψ̃ without a; a is fixed by ∫ ψ̃ dV = ∫ ν dV
    let n = mesh.n_cells();
    let part = |i: usize| b * w.eval(mesh.point(i), Side::Right) - lambda * outer.at_node(i, Side::Right);
    let shape = PartialPsi { b, lambda, w: w.clone(), outer: &outer };
    let full = Interval::closed_open(0.0, 1.0);
    let a = (integrate(nu, &v, full)? - integrate(&shape, &v, full)?) / v.total();
    let nodes = nu.node_values();
    Ok((0..n).map(|i| (a + part(i) - nodes[i]).abs()).fold(0.0, f64::max))
}

/// `bW(x) − λ I(x)` as a mesh function.
struct PartialPsi<'a> {
    b: f64,
    lambda: f64,
    w: Arc<crate::measure::MeasureFunction>,
    outer: &'a Cumulative,
}

impl MeshFunction for PartialPsi<'_> {
    fn mesh(&self) -> &Arc<crate::measure::Mesh> {
        self.outer.mesh()
    }

    fn open_value(&self, cell: usize, x: f64) -> f64 {
        // inside a cell W has no atoms, so its value is the continuous part plus the atoms up to x_c
        let mesh = self.outer.mesh();
        let wx = self.w.eval(mesh.point(cell), Side::Right) + mesh.local_coord(crate::measure::Coord::W, cell, x);
        self.b * wx - self.lambda * self.outer.open_value(cell, x)
    }

    fn node_value(&self, node: usize) -> f64 {
        let mesh = self.outer.mesh();
        self.b * self.w.eval(mesh.point(node), Side::Right) - self.lambda * self.outer.node_value(node)
    }
}
