//! Hat-basis Galerkin discretisation of
//! `B[u,v] = ∫ A·D⁻_W u·D⁻_W v dW + ∫ κ²·u·v dV` (plus a shift `λ(u,v)_V`),
//! with periodic, Dirichlet (`u(0) = 0`) and mean-zero variants.

use std::io::Write;
use std::sync::Arc;

use crate::calculus::SobolevFunction;
use crate::linalg::{CyclicTridiagonal, Tridiagonal};
use crate::measure::{Coord, Interval, Mesh, MeshFunction, PiecewiseFunction, integrate, integrate_product};
use crate::{Error, Result, TOL_COMPAT};

/// Nodal basis of functions affine in `W` on every cell. With `dirichlet`
/// set, the hat at node 0 is dropped.
#[derive(Clone)]
pub struct HatBasis {
    mesh: Arc<Mesh>,
    dirichlet: bool,
}

impl HatBasis {
    pub fn new(mesh: Arc<Mesh>, dirichlet: bool) -> Self {
        Self { mesh, dirichlet }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn dirichlet(&self) -> bool {
        self.dirichlet
    }

    pub fn len(&self) -> usize {
        self.mesh.n_cells() - usize::from(self.dirichlet)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mesh node carrying basis function `k`.
    pub fn node(&self, k: usize) -> usize {
        k + usize::from(self.dirichlet)
    }

    /// Full nodal vector (one value per mesh node) from basis coefficients.
    pub fn nodal(&self, coeffs: &[f64]) -> Vec<f64> {
        if self.dirichlet {
            std::iter::once(0.0).chain(coeffs.iter().copied()).collect()
        } else {
            coeffs.to_vec()
        }
    }

    /// Basis coefficients from a full nodal vector.
    pub fn restrict(&self, nodal: &[f64]) -> Vec<f64> {
        nodal[usize::from(self.dirichlet)..].to_vec()
    }

    pub fn combine(&self, coeffs: &[f64]) -> Result<SobolevFunction> {
        if coeffs.len() != self.len() {
            return Err(Error::MeshMismatch(format!("{} coefficients for {} basis functions", coeffs.len(), self.len())));
        }
        SobolevFunction::from_nodal(self.mesh.clone(), &self.nodal(coeffs))
    }

    /// Basis function `k` as a Sobolev function.
    pub fn function(&self, k: usize) -> Result<SobolevFunction> {
        let mut e = vec![0.0; self.len()];
        e[k] = 1.0;
        self.combine(&e)
    }

    /// `∫ f φ_i dV` for every node `i` (not restricted).
    pub fn load_nodal(&self, f: &dyn MeshFunction) -> Result<Vec<f64>> {
        let mesh = &self.mesh;
        if !Arc::ptr_eq(f.mesh(), mesh) {
            return Err(Error::MeshMismatch("load data on a different mesh".into()));
        }
        let n = mesh.n_cells();
        let v = mesh.v();
        let mut b = vec![0.0; n];
        for c in 0..n {
            let (p, q) = (mesh.point(c), mesh.point(c + 1));
            // V-cells are [x_c, x_{c+1}): the hat at x_c takes the value 1 at its atom
            b[c] += mesh.v_atom(c) * f.node_value(c);
            let dw = mesh.dw(c);
            let s = |x: f64| mesh.local_coord(Coord::W, c, x) / dw;
            match f.cell_constant(c) {
                Some(k) => {
                    let right = mesh.ac_integral(c, p, q, v, s);
                    b[c] += k * (mesh.dv_cont(c) - right);
                    b[(c + 1) % n] += k * right;
                }
                None => {
                    let right = mesh.ac_integral(c, p, q, v, |x| f.open_value(c, x) * s(x));
                    let left = mesh.ac_integral(c, p, q, v, |x| f.open_value(c, x) * (1.0 - s(x)));
                    b[c] += left;
                    b[(c + 1) % n] += right;
                }
            }
        }
        Ok(b)
    }

    /// `b_k = ∫ f φ_k dV` over the basis.
    pub fn load(&self, f: &dyn MeshFunction) -> Result<Vec<f64>> {
        Ok(self.restrict(&self.load_nodal(f)?))
    }
}

/// Stiffness, mass and plain mass matrices over the periodic hat basis.
#[derive(Clone)]
pub struct GalerkinSystem {
    basis: HatBasis,
    a: PiecewiseFunction,
    kappa2: PiecewiseFunction,
    lambda: f64,
    k: CyclicTridiagonal,
    m: CyclicTridiagonal,
    m1: CyclicTridiagonal,
    a0: f64,
    kappa0: f64,
}

/// `∫ (1−s)² dV`, `∫ s(1−s) dV`, `∫ s² dV` over the open cell, with `s` the
/// local `W` coordinate scaled to `[0, 1]`.
fn local_mass(mesh: &Mesh, c: usize) -> (f64, f64, f64) {
    let (p, q) = (mesh.point(c), mesh.point(c + 1));
    let dw = mesh.dw(c);
    let v = mesh.v();
    let s = |x: f64| mesh.local_coord(Coord::W, c, x) / dw;
    let m11 = mesh.ac_integral(c, p, q, v, |x| s(x) * s(x));
    let m01 = mesh.ac_integral(c, p, q, v, |x| s(x) * (1.0 - s(x)));
    let m00 = mesh.ac_integral(c, p, q, v, |x| (1.0 - s(x)) * (1.0 - s(x)));
    (m00, m01, m11)
}

fn coefficient_values(f: &PiecewiseFunction, name: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = f.mesh().n_cells();
    let cells = (0..n)
        .map(|c| {
            f.cell_constant(c)
                .ok_or_else(|| Error::CoefficientBounds(format!("{name} must be piecewise constant on the mesh (cell {c})")))
        })
        .collect::<Result<Vec<_>>>()?;
    let nodes: Vec<f64> = (0..n).map(|i| f.node_value(i)).collect();
    if cells.iter().chain(&nodes).any(|v| !v.is_finite()) {
        return Err(Error::CoefficientBounds(format!("{name} is not bounded")));
    }
    Ok((cells, nodes))
}

impl GalerkinSystem {
    /// Assembles `K`, `M` and `M1`. `A` and `κ²` must be cellwise constant;
    /// their node values are used at atoms of `W` and `V` respectively.
    pub fn assemble(
        mesh: Arc<Mesh>,
        a: &PiecewiseFunction,
        kappa2: &PiecewiseFunction,
        lambda: f64,
        dirichlet: bool,
    ) -> Result<Self> {
        if !Arc::ptr_eq(a.mesh(), &mesh) || !Arc::ptr_eq(kappa2.mesh(), &mesh) {
            return Err(Error::MeshMismatch("coefficients live on a different mesh".into()));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("shift λ = {lambda}")));
        }
        let n = mesh.n_cells();
        let (a_cells, a_nodes) = coefficient_values(a, "A")?;
        let (k_cells, k_nodes) = coefficient_values(kappa2, "κ²")?;
        // A at a node only matters where W has an atom, κ² where V has one
        let a0 = a_cells
            .iter()
            .copied()
            .chain((0..n).filter(|&i| mesh.w_atom(i) > 0.0).map(|i| a_nodes[i]))
            .fold(f64::INFINITY, f64::min);
        if !(a0 > 0.0) {
            return Err(Error::CoefficientBounds(format!("A must be bounded away from 0 (inf A = {a0})")));
        }
        let kappa0 = k_cells
            .iter()
            .copied()
            .chain((0..n).filter(|&i| mesh.v_atom(i) > 0.0).map(|i| k_nodes[i]))
            .fold(f64::INFINITY, f64::min);
        if kappa0 < 0.0 {
            return Err(Error::CoefficientBounds(format!("κ² must be nonnegative (inf κ² = {kappa0})")));
        }

        let mut k = CyclicTridiagonal::zeros(n);
        let mut m = CyclicTridiagonal::zeros(n);
        let mut m1 = CyclicTridiagonal::zeros(n);
        for c in 0..n {
            let j = (c + 1) % n;
            let dw = mesh.dw(c);
            // (x_c, x_{c+1}]: continuous part at A_c plus the atom at the right node
            let kc = (a_cells[c] * mesh.dw_cont(c) + a_nodes[j] * mesh.w_atom(j)) / (dw * dw);
            k.diag[c] += kc;
            k.diag[j] += kc;
            k.off[c] -= kc;

            let (m00, m01, m11) = local_mass(&mesh, c);
            let atom = mesh.v_atom(c);
            m1.diag[c] += atom + m00;
            m1.diag[j] += m11;
            m1.off[c] += m01;
            let kap = k_cells[c];
            m.diag[c] += k_nodes[c] * atom + kap * m00;
            m.diag[j] += kap * m11;
            m.off[c] += kap * m01;
        }
        Ok(Self {
            basis: HatBasis::new(mesh, dirichlet),
            a: a.clone(),
            kappa2: kappa2.clone(),
            lambda,
            k,
            m,
            m1,
            a0,
            kappa0,
        })
    }

    /// Constant coefficients `A ≡ a`, `κ² ≡ kappa2`.
    pub fn assemble_constant(mesh: Arc<Mesh>, a: f64, kappa2: f64, lambda: f64, dirichlet: bool) -> Result<Self> {
        let ac = PiecewiseFunction::constant(mesh.clone(), a, crate::measure::Side::Left);
        let kc = PiecewiseFunction::constant(mesh.clone(), kappa2, crate::measure::Side::Right);
        Self::assemble(mesh, &ac, &kc, lambda, dirichlet)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.basis.mesh()
    }

    pub fn basis(&self) -> &HatBasis {
        &self.basis
    }

    pub fn dirichlet(&self) -> bool {
        self.basis.dirichlet()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a(&self) -> &PiecewiseFunction {
        &self.a
    }

    pub fn kappa2(&self) -> &PiecewiseFunction {
        &self.kappa2
    }

    /// `inf A`.
    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// `inf κ²`.
    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    pub fn stiffness(&self) -> &CyclicTridiagonal {
        &self.k
    }

    pub fn mass(&self) -> &CyclicTridiagonal {
        &self.m
    }

    pub fn plain_mass(&self) -> &CyclicTridiagonal {
        &self.m1
    }

    /// `K + M + λ·M1` on all nodes.
    pub fn operator(&self) -> CyclicTridiagonal {
        self.k.add_scaled(&self.m, 1.0).add_scaled(&self.m1, self.lambda)
    }

    /// `B[u,u] + λ‖u‖²_V` from nodal values.
    pub fn energy(&self, nodal: &[f64]) -> f64 {
        self.operator().quad_form(nodal, nodal)
    }

    /// `(β, label)` for the coercivity constant of the shifted form, or `None`.
    fn shifted_beta(&self) -> Option<f64> {
        let s = self.kappa0 + self.lambda;
        (s > 0.0).then(|| self.a0.min(s))
    }

    /// `β = (A₀/2)·min{1/(W(1)V(1)), 1}`, valid on mean-zero or Dirichlet functions.
    pub fn poincare_beta(&self) -> f64 {
        let mesh = self.mesh();
        0.5 * self.a0 * (1.0 / (mesh.w().total() * mesh.v().total())).min(1.0)
    }

    fn check_coercive(&self) -> Result<()> {
        let s = self.kappa0 + self.lambda;
        let ok = if self.dirichlet() { s >= 0.0 } else { s > 0.0 };
        if ok {
            Ok(())
        } else {
            Err(Error::NotCoercive(format!(
                "need λ > −inf κ² ({} > {}){}",
                self.lambda,
                -self.kappa0,
                if self.dirichlet() { " or equality with Dirichlet data" } else { "" }
            )))
        }
    }

    /// Galerkin solution of `(K + M + λM1)u = b`, `b_i = ∫ f φ_i dV`.
    pub fn solve_elliptic(&self, f: &dyn MeshFunction) -> Result<SobolevFunction> {
        self.check_coercive()?;
        let b = self.basis.load(f)?;
        self.solve_load(&b)
    }

    /// Solves against an already assembled load vector over the basis.
    pub fn solve_load(&self, b: &[f64]) -> Result<SobolevFunction> {
        let op = self.operator();
        let coeffs = if self.dirichlet() { op.drop_first().solve(b)? } else { op.solve(b)? };
        self.basis.combine(&coeffs)
    }

    /// Unique mean-zero solution of `K u = b` when `κ ≡ 0`, `λ = 0`.
    pub fn solve_mean_zero(&self, f: &dyn MeshFunction) -> Result<FredholmSolution> {
        if self.dirichlet() || self.lambda != 0.0 || self.kappa0 != 0.0 || self.m.diag.iter().any(|&d| d != 0.0) {
            return Err(Error::InvalidArgument("the Fredholm branch needs κ ≡ 0, λ = 0 and periodic data".into()));
        }
        let mesh = self.mesh().clone();
        let v = mesh.v();
        let integral = integrate(f, v, Interval::closed_open(0.0, 1.0))?;
        let norm = integrate_product(&[f, f], v, Interval::closed_open(0.0, 1.0))?.sqrt();
        let limit = TOL_COMPAT * norm;
        if integral.abs() > limit {
            return Err(Error::IncompatibleData { integral, limit });
        }
        let b = self.basis.load_nodal(f)?;
        let weights = self.m1.mul_vec(&vec![1.0; b.len()]);
        let shift = b.iter().sum::<f64>() / v.total();
        let projected: Vec<f64> = b.iter().zip(&weights).map(|(bi, wi)| bi - shift * wi).collect();
        let pinned = self.k.drop_first().solve(&projected[1..])?;
        let mut u: Vec<f64> = std::iter::once(0.0).chain(pinned).collect();
        let mean = weights.iter().zip(&u).map(|(w, x)| w * x).sum::<f64>() / v.total();
        u.iter_mut().for_each(|x| *x -= mean);
        Ok(FredholmSolution { u: SobolevFunction::from_nodal(mesh, &u)?, kernel_dim: 1 })
    }

    /// `max_i |B_λ[u, φ_i] − (f, φ_i)_V|`.
    pub fn weak_residual(&self, u: &SobolevFunction, f: &dyn MeshFunction) -> Result<f64> {
        let b = self.basis.load(f)?;
        Ok(self.residual_against(u, &b))
    }

    pub fn residual_against(&self, u: &SobolevFunction, b: &[f64]) -> f64 {
        let au = self.basis.restrict(&self.operator().mul_vec(&u.node_values()));
        au.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    pub fn energy_check(&self, u: &SobolevFunction, f: &dyn MeshFunction) -> Result<EnergyReport> {
        let mesh = self.mesh();
        let v = mesh.v();
        let nodal = u.node_values();
        let b_uu = self.energy(&nodal);
        let norm_v = u.norm_v_sq()?.sqrt();
        let norm_12 = u.energy_norm_sq()?.sqrt();
        let f_norm_v = integrate_product(&[f, f], v, Interval::closed_open(0.0, 1.0))?.sqrt();
        let mean = u.integral_v()?;
        let mean_zero = mean.abs() <= 1e-10 * (norm_v * v.total().sqrt()).max(f64::MIN_POSITIVE);
        let shift_nonneg = self.kappa0 + self.lambda >= 0.0;
        let mut beta = self.shifted_beta();
        if (mean_zero || self.dirichlet()) && shift_nonneg {
            let b0 = self.poincare_beta();
            beta = Some(beta.map_or(b0, |b| b.max(b0)));
        }
        let check = |lhs: f64, rhs: f64| BoundCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-10) + 1e-13 };
        let mut report = EnergyReport {
            b_uu,
            norm_v,
            norm_12,
            f_norm_v,
            beta,
            coercivity: beta.map(|b| check(b * norm_12 * norm_12, b_uu)),
            bound_lambda: (self.lambda > 0.0).then(|| check(norm_v, f_norm_v / self.lambda)),
            bound_kappa: (self.kappa0 + self.lambda > 0.0).then(|| check(norm_v, f_norm_v / (self.kappa0 + self.lambda))),
            bound_12: beta.map(|b| check(norm_12, f_norm_v / b)),
            kernel_direction: beta.is_none() && b_uu.abs() <= 1e-12 * norm_12 * norm_12,
            violations: vec![],
        };
        for (name, c) in [
            ("coercivity", &report.coercivity),
            ("‖u‖_V ≤ ‖f‖_V/λ", &report.bound_lambda),
            ("‖u‖_V ≤ ‖f‖_V/(κ₀+λ)", &report.bound_kappa),
            ("‖u‖_{1,2} ≤ ‖f‖_V/β", &report.bound_12),
        ] {
            if let Some(c) = c {
                if !c.holds {
                    report.violations.push(format!("{name}: {} > {}", c.lhs, c.rhs));
                }
            }
        }
        Ok(report)
    }
}

/// Mean-zero solution and the dimension of the kernel (the constants).
#[derive(Clone)]
pub struct FredholmSolution {
    pub u: SobolevFunction,
    pub kernel_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Outcome of the energy estimates for one solution. `None` entries were
/// not applicable (e.g. coercivity on a constant with `κ ≡ 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    /// `B[u,u] + λ‖u‖²_V`.
    pub b_uu: f64,
    pub norm_v: f64,
    pub norm_12: f64,
    pub f_norm_v: f64,
    pub beta: Option<f64>,
    /// `β‖u‖²_{1,2} ≤ B[u,u]`.
    pub coercivity: Option<BoundCheck>,
    pub bound_lambda: Option<BoundCheck>,
    pub bound_kappa: Option<BoundCheck>,
    pub bound_12: Option<BoundCheck>,
    pub kernel_direction: bool,
    pub violations: Vec<String>,
}

impl EnergyReport {
    /// `B[u,u]/‖u‖²_{1,2}`.
    pub fn coercivity_ratio(&self) -> f64 {
        self.b_uu / (self.norm_12 * self.norm_12)
    }
}

/// Coordinate-format dump `i,j,value` of the nonzero entries.
pub fn write_coo(a: &CyclicTridiagonal, out: &mut impl Write) -> Result<()> {
    writeln!(out, "i,j,value")?;
    let dense = a.to_dense();
    for i in 0..dense.nrows() {
        for j in 0..dense.ncols() {
            let x = dense[(i, j)];
            if x != 0.0 {
                writeln!(out, "{i},{j},{x:e}")?;
            }
        }
    }
    Ok(())
}

/// `node,x,u` at every mesh node.
pub fn write_solution(u: &SobolevFunction, out: &mut impl Write) -> Result<()> {
    writeln!(out, "node,x,u")?;
    for (i, v) in u.node_values().iter().enumerate() {
        writeln!(out, "{i},{},{v}", u.mesh().point(i))?;
    }
    Ok(())
}

/// Assembled tridiagonal system of the Dirichlet problem.
pub fn dirichlet_matrix(sys: &GalerkinSystem) -> Tridiagonal {
    sys.operator().drop_first()
}
