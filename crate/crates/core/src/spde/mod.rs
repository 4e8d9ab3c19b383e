//! Monte-Carlo solution of `κ²u − D⁺_V(H·D⁻_W u) = Ḃ_W` with `u(0) = 0`:
//! one Galerkin solve per noise path, and ensemble statistics.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::calculus::SobolevFunction;
use crate::galerkin::{dirichlet_matrix, GalerkinSystem};
use crate::linalg::Tridiagonal;
use crate::measure::{Mesh, PiecewiseFunction};
use crate::spectral::{eig, Operator};
use crate::stochastic::{sample_bm_from, sample_cov, white_noise_load, Estimate, SamplePath};
use crate::{Error, Result};

/// Dirichlet Galerkin system with `A := H`, shared read-only by all paths.
#[derive(Clone)]
pub struct SpdeProblem {
    sys: GalerkinSystem,
    matrix: Tridiagonal,
}

/// One realisation: the noise path, its load vector and the solution.
#[derive(Clone)]
pub struct SpdeSolution {
    pub path: SamplePath,
    pub load: Vec<f64>,
    pub u: SobolevFunction,
}

impl SpdeProblem {
    /// Requires `inf κ² > 0` and `inf H > 0` (the latter checked at assembly).
    pub fn new(mesh: Arc<Mesh>, kappa2: &PiecewiseFunction, h: &PiecewiseFunction) -> Result<Self> {
        let sys = GalerkinSystem::assemble(mesh, h, kappa2, 0.0, true)?;
        if !(sys.kappa0() > 0.0) {
            return Err(Error::CoefficientBounds(format!("κ² must be bounded away from zero, inf κ² = {}", sys.kappa0())));
        }
        let matrix = dirichlet_matrix(&sys);
        Ok(Self { sys, matrix })
    }

    pub fn constant(mesh: Arc<Mesh>, kappa2: f64, h: f64) -> Result<Self> {
        let sys = GalerkinSystem::assemble_constant(mesh.clone(), h, kappa2, 0.0, true)?;
        Self::new(mesh, sys.kappa2(), sys.a())
    }

    pub fn system(&self) -> &GalerkinSystem {
        &self.sys
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.sys.mesh()
    }

    /// Coercivity constant of the form on the Dirichlet space:
    /// `max{min(H₀, κ₀), (H₀/2)·min(1/(W(1)V(1)), 1)}`.
    pub fn beta(&self) -> f64 {
        self.sys.a0().min(self.sys.kappa0()).max(self.sys.poincare_beta())
    }

    /// Solves against the white noise of one path.
    pub fn solve_path(&self, path: &SamplePath) -> Result<SpdeSolution> {
        let load = white_noise_load(path, self.sys.basis())?;
        let coeffs = self.matrix.solve(&load)?;
        let u = self.sys.basis().combine(&coeffs)?;
        Ok(SpdeSolution { path: path.clone(), load, u })
    }

    /// Paths in parallel; results keep the input order.
    pub fn solve_paths(&self, paths: &[SamplePath]) -> Result<Vec<SpdeSolution>> {
        paths.par_iter().map(|p| self.solve_path(p)).collect()
    }

    /// Motions with ids `first..first + n_paths`, solved in parallel.
    pub fn solve_ensemble(&self, seed: u64, first: u64, n_paths: usize) -> Result<Vec<SpdeSolution>> {
        self.solve_paths(&sample_bm_from(self.mesh(), seed, first, n_paths))
    }

    /// `max_i |B[u, φ_i] − Ḃ_W(φ_i)|`.
    pub fn weak_residual(&self, sol: &SpdeSolution) -> f64 {
        self.sys.residual_against(&sol.u, &sol.load)
    }
}

/// `n_paths` realisations for path ids `0..n_paths`.
pub fn solve_spde(
    mesh: Arc<Mesh>,
    kappa2: &PiecewiseFunction,
    h: &PiecewiseFunction,
    seed: u64,
    n_paths: usize,
) -> Result<Vec<SpdeSolution>> {
    SpdeProblem::new(mesh, kappa2, h)?.solve_ensemble(seed, 0, n_paths)
}

/// Per-path checks that failed, tagged by path id.
#[derive(Debug, Clone, PartialEq)]
pub struct PathViolation {
    pub path_id: u64,
    pub what: String,
}

#[derive(Debug, Clone)]
pub struct SpdeReport {
    /// Node locations `x_0 … x_{N−1}`.
    pub nodes: Vec<f64>,
    pub mean_path: Vec<Estimate>,
    /// `(i, j, Cov(u(x_i), u(x_j)))` for the requested node pairs.
    pub cov_grid: Vec<(usize, usize, Estimate)>,
    pub bound_violations: Vec<PathViolation>,
    pub structure_violations: Vec<PathViolation>,
}

/// Ensemble mean and covariance of the nodal values, plus per-path checks:
/// `u(0) = 0`, jumps only at atoms of `W`, and the a priori bound
/// `‖u‖_{1,2} ≤ β⁻¹·sup|B|·√W(1)`.
pub fn spde_ensemble_report(problem: &SpdeProblem, sols: &[SpdeSolution], pairs: &[(usize, usize)]) -> Result<SpdeReport> {
    let mesh = problem.mesh();
    let n = mesh.n_cells();
    let nodal: Vec<Vec<f64>> = sols.iter().map(|s| s.u.node_values()).collect();
    let column = |i: usize| nodal.iter().map(|v| v[i]).collect::<Vec<f64>>();
    let mean_path = (0..n)
        .map(|i| {
            let col = column(i);
            let m = col.iter().sum::<f64>() / col.len() as f64;
            let var = if i == 0 { 0.0 } else { sample_cov(&col, &col).value };
            Estimate { value: m, se: (var / col.len() as f64).sqrt() }
        })
        .collect();
    let mut cov_grid = Vec::with_capacity(pairs.len());
    for &(i, j) in pairs {
        if i >= n || j >= n {
            return Err(Error::InvalidArgument(format!("node pair ({i}, {j}) outside 0..{n}")));
        }
        cov_grid.push((i, j, sample_cov(&column(i), &column(j))));
    }
    let beta = problem.beta();
    let sqrt_w1 = mesh.w().total().sqrt();
    let checks: Vec<(Vec<PathViolation>, Vec<PathViolation>)> = sols
        .par_iter()
        .map(|s| {
            let id = s.path.path_id;
            let mut bound = vec![];
            let mut structure = vec![];
            match s.u.energy_norm_sq() {
                Ok(e) => {
                    let rhs = s.path.sup_abs() * sqrt_w1 / beta;
                    if e.sqrt() > rhs * (1.0 + 1e-10) + 1e-300 {
                        bound.push(PathViolation { path_id: id, what: format!("‖u‖ = {} > {rhs}", e.sqrt()) });
                    }
                }
                Err(e) => bound.push(PathViolation { path_id: id, what: e.to_string() }),
            }
            if s.u.c() != 0.0 {
                structure.push(PathViolation { path_id: id, what: format!("u(0) = {}", s.u.c()) });
            }
            for i in 1..n {
                if !mesh.is_w_atom(i) && s.u.jump_at_node(i) != 0.0 {
                    structure.push(PathViolation { path_id: id, what: format!("jump at non-atom node {i}") });
                }
            }
            (bound, structure)
        })
        .collect();
    let (bound_violations, structure_violations) =
        checks.into_iter().fold((vec![], vec![]), |(mut b, mut s), (bv, sv)| {
            b.extend(bv);
            s.extend(sv);
            (b, s)
        });
    Ok(SpdeReport { nodes: mesh.points()[..n].to_vec(), mean_path, cov_grid, bound_violations, structure_violations })
}

/// Discrete spectral-series covariance
/// `Σ_k φ_k(x_i)φ_k(x_j)/μ_k²` over the Dirichlet eigenpairs `(μ_k, φ_k)` of
/// the full operator on the same mesh (for constant `κ²`, `μ_k = κ² + λ_k`).
/// The series equals `A⁻¹ M A⁻¹` with `M` the mass matrix. The sampled load
/// is built from cell increments of the path, so its covariance is the
/// lumped `diag(ΔW)` instead of `M`; the two differ by `O(h²)` in the
/// covariance at fixed nodes.
pub struct CovarianceOracle {
    eigenvalues: Vec<f64>,
    /// `nodal[k][i] = φ_k(x_i)`.
    nodal: Vec<Vec<f64>>,
}

impl CovarianceOracle {
    pub fn new(problem: &SpdeProblem) -> Result<Self> {
        let sys = problem.system();
        let e = eig(sys, sys.basis().len(), Operator::Full)?;
        let nodal = e.coefficients.iter().map(|c| sys.basis().nodal(c)).collect();
        Ok(Self { eigenvalues: e.eigenvalues, nodal })
    }

    pub fn cov(&self, i: usize, j: usize) -> f64 {
        self.eigenvalues.iter().zip(&self.nodal).map(|(mu, v)| v[i] * v[j] / (mu * mu)).sum()
    }
}

/// `i,j,x_i,x_j,emp_cov,se,exact_cov`; `exact` may be absent.
pub fn write_cov_csv(report: &SpdeReport, oracle: Option<&CovarianceOracle>, out: &mut impl Write) -> Result<()> {
    writeln!(out, "i,j,x_i,x_j,emp_cov,se,exact_cov")?;
    for (i, j, e) in &report.cov_grid {
        let exact = oracle.map_or(String::new(), |o| o.cov(*i, *j).to_string());
        writeln!(out, "{i},{j},{},{},{},{},{exact}", report.nodes[*i], report.nodes[*j], e.value, e.se)?;
    }
    Ok(())
}

/// `node,x,mean,se`.
pub fn write_mean_csv(report: &SpdeReport, out: &mut impl Write) -> Result<()> {
    writeln!(out, "node,x,mean,se")?;
    for (i, (x, e)) in report.nodes.iter().zip(&report.mean_path).enumerate() {
        writeln!(out, "{i},{x},{},{}", e.value, e.se)?;
    }
    Ok(())
}
