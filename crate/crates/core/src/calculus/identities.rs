use std::sync::Arc;

use super::sobolev::{SobolevFunction, VPrimitive};
use crate::measure::{
    integrate, integrate_product, Convention, Cumulative, Interval, MeasureFunction, Mesh, MeshFunction, PiecewiseFunction,
    SharedFn, Side,
};
use crate::{Error, Result, TOL_CONSTRAINT, TOL_EXACT};

/// `f` with `D⁺_V D⁻_W f = g`, stored as `(a, b, g)`: `f(0) = a`,
/// `D⁻_W f(0) = b`, and `D⁻_W f(y) = b + ∫_[0,y) g dV`.
#[derive(Clone)]
pub struct SecondOrderFunction {
    a: f64,
    b: f64,
    g: SharedFn,
}

impl SecondOrderFunction {
    /// Checks `∫_[0,1) g dV = 0` and `b·W(1) + ∫_(0,1]∫_[0,y) g dV dW = 0`.
    pub fn new(a: f64, b: f64, g: SharedFn) -> Result<Self> {
        let f = Self { a, b, g };
        f.check()?;
        Ok(f)
    }

    /// Picks the unique `b` that makes `D⁻_W f` mean-zero.
    pub fn from_second_derivative(a: f64, g: SharedFn) -> Result<Self> {
        let mesh = g.mesh().clone();
        let inner = Cumulative::new(g.clone(), mesh.v().clone(), Convention::ClosedOpen, 0.0)?;
        let double = integrate(&inner, mesh.w(), Interval::circle())?;
        Self::new(a, -double / mesh.w().total(), g)
    }

    fn check(&self) -> Result<()> {
        let mesh = self.g.mesh().clone();
        let v = mesh.v();
        let gv = integrate(&*self.g, v, Interval::closed_open(0.0, 1.0))?;
        let gnorm = integrate_product(&[&*self.g, &*self.g], v, Interval::closed_open(0.0, 1.0))?.sqrt();
        if gv.abs() > TOL_CONSTRAINT * (v.total().sqrt() * gnorm).max(1.0) {
            return Err(Error::ConstraintViolation(format!("∫ g dV = {gv:e}, must vanish")));
        }
        let inner = Cumulative::new(self.g.clone(), v.clone(), Convention::ClosedOpen, self.b)?;
        let dw = integrate(&inner, mesh.w(), Interval::circle())?;
        let scale = mesh.w().total() * (self.b.abs() + v.total().sqrt() * gnorm);
        if dw.abs() > TOL_CONSTRAINT * scale.max(1.0) {
            return Err(Error::ConstraintViolation(format!(
                "b·W(1) + ∫∫ g dV dW = {dw:e}, must vanish"
            )));
        }
        Ok(())
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn g(&self) -> &SharedFn {
        &self.g
    }
}

/// The Sobolev view of `f` together with `Δ_{W,V} f = g`.
pub fn apply_second_order(f: &SecondOrderFunction) -> Result<(SobolevFunction, SharedFn)> {
    f.check()?;
    let v = f.g.mesh().v().clone();
    let density = Cumulative::new(f.g.clone(), v, Convention::ClosedOpen, f.b)?;
    Ok((SobolevFunction::new(f.a, Arc::new(density))?, f.g.clone()))
}

/// `∫_[a,b) g·D⁺_V f dV + ∫_(a,b] f·D⁻_W g dW − [f(b)g(b) − f(a)g(a)]`,
/// with `f` càglàd and `g` càdlàg. Vanishes in exact arithmetic.
pub fn integration_by_parts_residual(f: &VPrimitive, g: &SobolevFunction, a: f64, b: f64) -> Result<f64> {
    let mesh = g.mesh();
    if !Arc::ptr_eq(mesh, f.mesh()) {
        return Err(Error::MeshMismatch("f and g live on different meshes".into()));
    }
    let t1 = integrate_product(&[g, &**f.density()], mesh.v(), Interval::closed_open(a, b))?;
    let t2 = integrate_product(&[f, &**g.density()], mesh.w(), Interval::open_closed(a, b))?;
    let boundary = f.value(b) * g.eval(b, Side::Right) - f.value(a) * g.eval(a, Side::Right);
    Ok(t1 + t2 - boundary)
}

/// `(‖f‖²_V, W(1)V(1)‖D⁻_W f‖²_W + V(1)·f̄²)` with `f̄` the V-mean.
pub fn poincare_gap(f: &SobolevFunction) -> Result<(f64, f64)> {
    let mesh = f.mesh();
    let (w1, v1) = (mesh.w().total(), mesh.v().total());
    let lhs = f.norm_v_sq()?;
    let mean = f.integral_v()? / v1;
    let rhs = w1 * v1 * f.derivative_norm_w_sq()? + v1 * mean * mean;
    Ok((lhs, rhs))
}

/// Element `g ↦ ∫ f0·g dV + ∫ f1·D⁻_W g dW` of the dual space.
#[derive(Clone)]
pub struct DualFunctional {
    pub f0: SharedFn,
    pub f1: SharedFn,
}

impl DualFunctional {
    pub fn new(f0: SharedFn, f1: SharedFn) -> Result<Self> {
        if !Arc::ptr_eq(f0.mesh(), f1.mesh()) {
            return Err(Error::MeshMismatch("dual components on different meshes".into()));
        }
        Ok(Self { f0, f1 })
    }

    /// `‖f0‖_V + ‖f1‖_W`, the bound on the operator norm.
    pub fn norm_bound(&self) -> Result<f64> {
        let mesh = self.f0.mesh();
        let a = integrate_product(&[&*self.f0, &*self.f0], mesh.v(), Interval::closed_open(0.0, 1.0))?;
        let b = integrate_product(&[&*self.f1, &*self.f1], mesh.w(), Interval::circle())?;
        Ok(a.sqrt() + b.sqrt())
    }
}

pub fn dual_apply(phi: &DualFunctional, g: &SobolevFunction) -> Result<f64> {
    let mesh = g.mesh();
    let a = integrate_product(&[&*phi.f0, g], mesh.v(), Interval::closed_open(0.0, 1.0))?;
    let b = integrate_product(&[&*phi.f1, &**g.density()], mesh.w(), Interval::circle())?;
    Ok(a + b)
}

fn require_dirichlet(f: &SobolevFunction) -> Result<()> {
    if f.c().abs() > TOL_EXACT {
        return Err(Error::DirichletViolation(f.c()));
    }
    Ok(())
}

/// `∫ D⁻_W f · D⁻_W g dW` on functions vanishing at 0.
pub fn dirichlet_inner(f: &SobolevFunction, g: &SobolevFunction) -> Result<f64> {
    require_dirichlet(f)?;
    require_dirichlet(g)?;
    integrate_product(&[&**f.density(), &**g.density()], f.mesh().w(), Interval::circle())
}

/// `ρ_{W,0}(t, s) = W(t∧s) − W(t)W(s)/W(1)` with càdlàg values.
pub fn reproducing_kernel(w: &MeasureFunction, t: f64, s: f64) -> f64 {
    let wt = w.eval(t, Side::Right);
    let ws = w.eval(s, Side::Right);
    w.eval(t.min(s), Side::Right) - wt * ws / w.total()
}

/// `ρ_{W,0}(·, t)` as a Sobolev function; `t` must be a mesh node.
pub fn kernel_section(mesh: &Arc<Mesh>, t: f64) -> Result<SobolevFunction> {
    let k = mesh
        .node_index(t)
        .ok_or_else(|| Error::InvalidArgument(format!("kernel section point {t} is not a mesh node")))?;
    let w = mesh.w();
    let ratio = w.eval(t, Side::Right) / w.total();
    let dens: Vec<f64> = (0..mesh.n_cells()).map(|c| if c < k { 1.0 - ratio } else { -ratio }).collect();
    SobolevFunction::from_piecewise(0.0, PiecewiseFunction::from_cell_constants(mesh.clone(), &dens, Side::Left)?)
}
