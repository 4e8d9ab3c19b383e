use std::sync::Arc;

use super::path::SamplePath;
use crate::calculus::SobolevFunction;
use crate::galerkin::HatBasis;
use crate::measure::{CellFormula, Mesh, MeshFunction, PiecewiseFunction, Side};
use crate::{Error, Result, TOL_EXACT};

fn same_mesh(a: &Arc<Mesh>, b: &Arc<Mesh>) -> Result<()> {
    if Arc::ptr_eq(a, b) {
        Ok(())
    } else {
        Err(Error::MeshMismatch("integrand and path live on different meshes".into()))
    }
}

/// `Σ_c g_c·(B(x_{c+1}−) − B(x_c)) + Σ_atoms g(d)·(B(d) − B(d−))` for a
/// cellwise constant `g`: the integral of a simple function, with `g`'s node
/// representative weighting the jump at each atom.
pub fn stoch_integral_simple(g: &dyn MeshFunction, path: &SamplePath) -> Result<f64> {
    let mesh = path.mesh();
    same_mesh(g.mesh(), mesh)?;
    let (right, left) = (path.values(), path.left_values());
    let n = mesh.n_cells();
    let mut total = 0.0;
    for c in 0..n {
        let gc = g
            .cell_constant(c)
            .ok_or_else(|| Error::InvalidArgument(format!("integrand is not constant on cell {c}")))?;
        total += gc * (left[c + 1] - right[c]);
        let j = c + 1;
        if j < n && mesh.is_w_atom(j) {
            total += g.node_value(j) * (right[j] - left[j]);
        }
    }
    Ok(total)
}

/// `∫_(0,t] D⁻_W g(u)·B(u−) dW(u)` for the path read as a step function
/// between nodes: `B(u−) = B(x_c)` inside cell `c`, the stored left limit at
/// an atom.
fn left_point_integral(g: &SobolevFunction, path: &SamplePath, end: usize) -> f64 {
    let mesh = path.mesh();
    let d = g.density();
    let (right, left) = (path.values(), path.left_values());
    let n = mesh.n_cells();
    let mut total = 0.0;
    for c in 0..end {
        let (p, q) = (mesh.point(c), mesh.point(c + 1));
        let cont = match d.cell_constant(c) {
            Some(k) => k * mesh.dw_cont(c),
            None => mesh.ac_integral(c, p, q, mesh.w(), |x| d.open_value(c, x)),
        };
        total += right[c] * cont;
        let j = c + 1;
        if j < n {
            let m = mesh.w_atom(j);
            if m > 0.0 {
                total += d.node_value(j) * left[j] * m;
            }
        }
    }
    total
}

/// `B(t)g(t) − ∫_(0,t] D⁻_W g(u)·B(u−) dW(u)` with `t` a mesh node.
pub fn stoch_integral_ibp(g: &SobolevFunction, path: &SamplePath, t: f64) -> Result<f64> {
    same_mesh(g.mesh(), path.mesh())?;
    let end = path.node(t)?;
    let bt = path.values()[end];
    let gt = g.eval(t.min(1.0), Side::Right);
    Ok(bt * gt - left_point_integral(g, path, end))
}

/// The simple function paired with `g` by the pathwise summation identity:
/// on cell `c` the value `g(x_{c+1}−)`, at node `i` the value `g(x_i)`.
/// For `g` with cellwise constant density,
/// `stoch_integral_simple(simple_form(g), B) = stoch_integral_ibp(g, B, 1)`.
pub fn simple_form(g: &SobolevFunction) -> Result<PiecewiseFunction> {
    let mesh = g.mesh().clone();
    let n = mesh.n_cells();
    let left = g.left_values();
    let cells = (0..n)
        .map(|c| CellFormula::constant(if c + 1 < n { left[c + 1] } else { g.eval(1.0, Side::Left) }))
        .collect();
    PiecewiseFunction::from_cells_and_nodes(mesh, cells, g.node_values(), Side::Right)
}

fn check_dirichlet(g: &SobolevFunction) -> Result<()> {
    if g.c().abs() > TOL_EXACT {
        Err(Error::DirichletViolation(g.c()))
    } else {
        Ok(())
    }
}

/// Pathwise white noise `g ↦ −∫_𝕋 B(s−)·D⁻_W g(s) dW(s)` on functions with
/// `g(0) = 0`.
pub fn white_noise_apply(path: &SamplePath, g: &SobolevFunction) -> Result<f64> {
    same_mesh(g.mesh(), path.mesh())?;
    check_dirichlet(g)?;
    Ok(-left_point_integral(g, path, path.mesh().n_cells()))
}

/// White noise value with its a priori bound `sup|B|·√W(1)·‖D⁻_W g‖_W`
/// (which is at most `sup|B|·√W(1)·‖g‖_{1,2}`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhiteNoiseValue {
    pub value: f64,
    pub bound: f64,
}

impl WhiteNoiseValue {
    pub fn within_bound(&self) -> bool {
        self.value.abs() <= self.bound * (1.0 + 1e-12) + 1e-300
    }
}

pub fn white_noise_checked(path: &SamplePath, g: &SobolevFunction) -> Result<WhiteNoiseValue> {
    let value = white_noise_apply(path, g)?;
    let bound = path.sup_abs() * path.mesh().w().total().sqrt() * g.derivative_norm_w_sq()?.sqrt();
    Ok(WhiteNoiseValue { value, bound })
}

/// `Ḃ_W(φ_i)` for every hat function of `basis` in one sweep. With the
/// cell averages `B̄_c = (B(x_c)·ΔW_c^cont + B(x_{c+1}−)·m_W(x_{c+1}))/ΔW_c`
/// the value is `B̄_i − B̄_{i−1}`, identical to [`white_noise_apply`] on `φ_i`.
pub fn white_noise_load(path: &SamplePath, basis: &HatBasis) -> Result<Vec<f64>> {
    let mesh = path.mesh();
    same_mesh(basis.mesh(), mesh)?;
    if !basis.dirichlet() {
        return Err(Error::DirichletViolation(1.0));
    }
    let n = mesh.n_cells();
    let (right, left) = (path.values(), path.left_values());
    let bar: Vec<f64> = (0..n)
        .map(|c| {
            let m = if c + 1 < n { mesh.w_atom(c + 1) } else { 0.0 };
            (right[c] * mesh.dw_cont(c) + left[c + 1] * m) / mesh.dw(c)
        })
        .collect();
    Ok((0..basis.len()).map(|k| {
        let i = basis.node(k);
        bar[i] - bar[i - 1]
    }).collect())
}
