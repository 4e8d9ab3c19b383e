use std::io::Write;
use std::sync::Arc;

use crate::measure::{
    integrate, integrate_product, Convention, Cumulative, Interval, Mesh, MeshFunction, PiecewiseFunction, SharedFn,
    Side,
};
use crate::{Error, Result, TOL_CONSTRAINT};

/// `f(x) = c + ∫_(0,x] F dW` with `∫_𝕋 F dW = 0`; `F = D⁻_W f` is stored
/// as a càglàd function. Evaluation is càdlàg and jumps only at atoms of `W`,
/// by `F(d)·m_W(d)`.
#[derive(Clone)]
pub struct SobolevFunction {
    c: f64,
    primitive: Cumulative,
}

impl SobolevFunction {
    /// Fails with `ConstraintViolation` unless `∫ F dW` vanishes up to
    /// `TOL_CONSTRAINT · √W(1) · ‖F‖_W`.
    pub fn new(c: f64, density: SharedFn) -> Result<Self> {
        let mesh = density.mesh().clone();
        let w = mesh.w().clone();
        let primitive = Cumulative::new(density, w.clone(), Convention::OpenClosed, c)?;
        let total = primitive.total();
        let norm = integrate_product(&[&**primitive.integrand(), &**primitive.integrand()], &w, Interval::circle())?.sqrt();
        let limit = TOL_CONSTRAINT * (w.total().sqrt() * norm).max(f64::MIN_POSITIVE);
        if total.abs() > limit {
            return Err(Error::ConstraintViolation(format!(
                "W-density is not mean-zero: ∫ F dW = {total:e} (periodicity of f requires 0)"
            )));
        }
        Ok(Self { c, primitive })
    }

    pub fn from_piecewise(c: f64, density: PiecewiseFunction) -> Result<Self> {
        Self::new(c, Arc::new(density))
    }

    pub fn constant(mesh: Arc<Mesh>, c: f64) -> Self {
        Self::new(c, Arc::new(PiecewiseFunction::zero(mesh, Side::Left))).expect("zero density is mean-zero")
    }

    /// Hat-function interpolant of nodal values `u_0 … u_{N−1}`: affine in
    /// `W` on each cell, with density `(u_{c+1} − u_c)/ΔW_c`.
    pub fn from_nodal(mesh: Arc<Mesh>, values: &[f64]) -> Result<Self> {
        let n = mesh.n_cells();
        if values.len() != n {
            return Err(Error::MeshMismatch(format!("{} nodal values for {} nodes", values.len(), n)));
        }
        let dens: Vec<f64> = (0..n).map(|c| (values[(c + 1) % n] - values[c]) / mesh.dw(c)).collect();
        let density = PiecewiseFunction::from_cell_constants(mesh, &dens, Side::Left)?;
        Self::from_piecewise(values[0], density)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `D⁻_W f`.
    pub fn density(&self) -> &SharedFn {
        self.primitive.integrand()
    }

    /// `f(x)` (right) or `f(x−)` (left) for `x ∈ [0, 1]`.
    pub fn eval(&self, x: f64, side: Side) -> f64 {
        self.primitive.eval(x, side)
    }

    /// `f(x_i)` at every node `i ∈ 0..N`.
    pub fn node_values(&self) -> Vec<f64> {
        (0..self.mesh().n_cells()).map(|i| self.primitive.at_node(i, Side::Right)).collect()
    }

    /// `f(x_i−)` at every node.
    pub fn left_values(&self) -> Vec<f64> {
        (0..self.mesh().n_cells()).map(|i| self.primitive.at_node(i, Side::Left)).collect()
    }

    /// `f(x_i) − f(x_i−)`.
    pub fn jump_at_node(&self, i: usize) -> f64 {
        if i == 0 {
            // f(0−) is f(1−) by periodicity, and the mean-zero density closes the loop
            return self.primitive.at_node(0, Side::Right) - (self.primitive.at_node(self.mesh().n_cells(), Side::Left) - self.primitive.total());
        }
        self.primitive.at_node(i, Side::Right) - self.primitive.at_node(i, Side::Left)
    }

    /// `‖f‖²_V`.
    pub fn norm_v_sq(&self) -> Result<f64> {
        let v = self.mesh().v().clone();
        integrate_product(&[self, self], &v, Interval::closed_open(0.0, 1.0))
    }

    /// `‖D⁻_W f‖²_W`.
    pub fn derivative_norm_w_sq(&self) -> Result<f64> {
        let w = self.mesh().w().clone();
        let d = &**self.density();
        integrate_product(&[d, d], &w, Interval::circle())
    }

    /// `‖f‖²_{1,2} = ‖f‖²_V + ‖D⁻_W f‖²_W`.
    pub fn energy_norm_sq(&self) -> Result<f64> {
        Ok(self.norm_v_sq()? + self.derivative_norm_w_sq()?)
    }

    /// `∫ f dV`.
    pub fn integral_v(&self) -> Result<f64> {
        let v = self.mesh().v().clone();
        integrate(self, &v, Interval::closed_open(0.0, 1.0))
    }

    /// Nodal values of `α·f + β·g` re-interpolated in the hat basis; exact
    /// when both densities are cellwise constant.
    pub fn combine_nodal(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        let a = self.node_values();
        let b = other.node_values();
        let vals: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + beta * y).collect();
        Self::from_nodal(self.mesh().clone(), &vals)
    }

    /// Writes `x, f(x−), f(x)` at every node (plus the closing point 1).
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "x,f_left,f")?;
        let mesh = self.mesh();
        for (i, &x) in mesh.points().iter().enumerate() {
            let side_r = if i == mesh.n_cells() { Side::Left } else { Side::Right };
            writeln!(out, "{x},{},{}", self.primitive.at_node(i, Side::Left), self.primitive.at_node(i, side_r))?;
        }
        Ok(())
    }
}

impl MeshFunction for SobolevFunction {
    fn mesh(&self) -> &Arc<Mesh> {
        self.primitive.mesh()
    }

    fn open_value(&self, cell: usize, x: f64) -> f64 {
        self.primitive.open_value(cell, x)
    }

    fn node_value(&self, node: usize) -> f64 {
        self.primitive.at_node(node % self.mesh().n_cells(), Side::Right)
    }

    fn cell_constant(&self, cell: usize) -> Option<f64> {
        match self.density().cell_constant(cell) {
            Some(d) if d == 0.0 => Some(self.primitive.at_node(cell, Side::Right)),
            _ => None,
        }
    }
}

/// `sobolev_eval`: right value `c + ∫_(0,x] F dW` or left value
/// `c + ∫_(0,x) F dW`.
pub fn sobolev_eval(f: &SobolevFunction, x: f64, side: Side) -> f64 {
    f.eval(x, side)
}

/// `d_w_minus`: the stored density `F`.
pub fn d_w_minus(f: &SobolevFunction) -> SharedFn {
    f.density().clone()
}

/// `g(x) = c + ∫_[0,x) p dV`: a càglàd function with right derivative
/// `D⁺_V g = p`.
#[derive(Clone)]
pub struct VPrimitive {
    primitive: Cumulative,
}

impl VPrimitive {
    pub fn new(c: f64, density: SharedFn) -> Result<Self> {
        let v = density.mesh().v().clone();
        Ok(Self { primitive: Cumulative::new(density, v, Convention::ClosedOpen, c)? })
    }

    /// `D⁺_V g`.
    pub fn density(&self) -> &SharedFn {
        self.primitive.integrand()
    }

    pub fn eval(&self, x: f64, side: Side) -> f64 {
        self.primitive.eval(x, side)
    }

    /// The càglàd value `g(x)`.
    pub fn value(&self, x: f64) -> f64 {
        self.primitive.eval(x, Side::Left)
    }

    pub fn total(&self) -> f64 {
        self.primitive.total()
    }
}

impl MeshFunction for VPrimitive {
    fn mesh(&self) -> &Arc<Mesh> {
        self.primitive.mesh()
    }

    fn open_value(&self, cell: usize, x: f64) -> f64 {
        self.primitive.open_value(cell, x)
    }

    fn node_value(&self, node: usize) -> f64 {
        self.primitive.at_node(node % self.mesh().n_cells(), Side::Left)
    }
}
