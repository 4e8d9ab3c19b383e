use std::io::Write;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::calculus::SobolevFunction;
use crate::galerkin::GalerkinSystem;
use crate::measure::{integrate_product, Interval, Mesh, MeshFunction};
use crate::{Error, Result};

/// Which operator the eigenpairs belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    /// `−Δ_{W,V} = −D⁺_V(A D⁻_W ·)`: stiffness against the plain mass.
    Laplacian,
    /// `L_{W,V} = κ² − D⁺_V(A D⁻_W ·)`: stiffness plus weighted mass.
    Full,
}

/// Ascending eigenpairs with V-orthonormal eigenfunctions.
#[derive(Clone)]
pub struct EigenDecomposition {
    pub operator: Operator,
    pub dirichlet: bool,
    pub eigenvalues: Vec<f64>,
    /// Coefficients over the hat basis, one vector per eigenvalue.
    pub coefficients: Vec<Vec<f64>>,
    pub vectors: Vec<SobolevFunction>,
    mesh: Arc<Mesh>,
}

impl EigenDecomposition {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Number of eigenvalues equal to `λ_k` up to relative `1e-8`.
    pub fn multiplicity(&self, k: usize) -> usize {
        let l = self.eigenvalues[k];
        let tol = 1e-8 * l.abs().max(1.0);
        self.eigenvalues.iter().filter(|&&m| (m - l).abs() <= tol).count()
    }

    /// `k,lambda,multiplicity`.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "k,lambda,multiplicity")?;
        for (k, l) in self.eigenvalues.iter().enumerate() {
            writeln!(out, "{k},{l},{}", self.multiplicity(k))?;
        }
        Ok(())
    }

    /// `x,nu_left,nu` for eigenfunction `k`.
    pub fn write_vector_csv(&self, k: usize, out: &mut impl Write) -> Result<()> {
        self.vectors[k].write_csv(out)
    }

    /// `max_{i,j} |⟨D⁻_W ν_i/√λ_i, D⁻_W ν_j/√λ_j⟩_W − δ_ij|` over the
    /// eigenpairs with `λ > tol`.
    pub fn derivative_gram_deviation(&self, tol: f64) -> Result<f64> {
        let idx: Vec<usize> = (0..self.len()).filter(|&k| self.eigenvalues[k] > tol).collect();
        let w = self.mesh.w();
        let mut worst = 0.0f64;
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a..] {
                let di = &**self.vectors[i].density();
                let dj = &**self.vectors[j].density();
                let g = integrate_product(&[di, dj], w, Interval::circle())? / (self.eigenvalues[i] * self.eigenvalues[j]).sqrt();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        Ok(worst)
    }

    /// `max_{i,j} |⟨ν_i, ν_j⟩_V − δ_ij|`, by exact quadrature.
    pub fn orthonormality_deviation(&self) -> Result<f64> {
        let v = self.mesh.v();
        let mut worst = 0.0f64;
        for i in 0..self.len() {
            for j in i..self.len() {
                let g = integrate_product(
                    &[&self.vectors[i] as &dyn MeshFunction, &self.vectors[j]],
                    v,
                    Interval::closed_open(0.0, 1.0),
                )?;
                worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        Ok(worst)
    }
}

/// The `k` smallest eigenpairs of `K c = λ M1 c` (Laplacian) or
/// `(K + M) c = λ M1 c` (Full), by Cholesky reduction of `M1` and a dense
/// symmetric eigensolver. Respects the Dirichlet flag of `sys`.
pub fn eig(sys: &GalerkinSystem, k: usize, operator: Operator) -> Result<EigenDecomposition> {
    let (a, b) = {
        let stiff = match operator {
            Operator::Laplacian => sys.stiffness().clone(),
            Operator::Full => sys.stiffness().add_scaled(sys.mass(), 1.0),
        };
        if sys.dirichlet() {
            (stiff.drop_first().to_dense(), sys.plain_mass().drop_first().to_dense())
        } else {
            (stiff.to_dense(), sys.plain_mass().to_dense())
        }
    };
    let n = a.nrows();
    let k = k.min(n);
    let chol = Cholesky::new(b).ok_or_else(|| Error::FactorizationFailure("plain mass matrix is not positive definite".into()))?;
    let l = chol.l();
    // C = L⁻¹ A L⁻ᵀ
    let y = l
        .solve_lower_triangular(&a)
        .ok_or_else(|| Error::FactorizationFailure("triangular solve failed".into()))?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::FactorizationFailure("triangular solve failed".into()))?;
    let c = 0.5 * (&c + c.transpose());
    let se = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]).then(i.cmp(&j)));
    let lt = l.transpose();
    let mut eigenvalues = Vec::with_capacity(k);
    let mut coefficients = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let yv = se.eigenvectors.column(idx).clone_owned();
        let xv = lt
            .solve_upper_triangular(&yv)
            .ok_or_else(|| Error::FactorizationFailure("back substitution failed".into()))?;
        let mut x: Vec<f64> = xv.iter().copied().collect();
        normalize_sign(&mut x);
        eigenvalues.push(se.eigenvalues[idx]);
        vectors.push(sys.basis().combine(&x)?);
        coefficients.push(x);
    }
    Ok(EigenDecomposition { operator, dirichlet: sys.dirichlet(), eigenvalues, coefficients, vectors, mesh: sys.mesh().clone() })
}

/// Makes the first entry of non-negligible size positive.
fn normalize_sign(x: &mut [f64]) {
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-6 * max) {
        if *first < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Eigenvalues only, all of them, ascending.
pub fn eigenvalues(sys: &GalerkinSystem, operator: Operator) -> Result<Vec<f64>> {
    let stiff = match operator {
        Operator::Laplacian => sys.stiffness().clone(),
        Operator::Full => sys.stiffness().add_scaled(sys.mass(), 1.0),
    };
    let (a, b): (DMatrix<f64>, DMatrix<f64>) = if sys.dirichlet() {
        (stiff.drop_first().to_dense(), sys.plain_mass().drop_first().to_dense())
    } else {
        (stiff.to_dense(), sys.plain_mass().to_dense())
    };
    let chol = Cholesky::new(b).ok_or_else(|| Error::FactorizationFailure("plain mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let y = l.solve_lower_triangular(&a).ok_or_else(|| Error::FactorizationFailure("triangular solve failed".into()))?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::FactorizationFailure("triangular solve failed".into()))?;
    let c = 0.5 * (&c + c.transpose());
    let mut ev: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}
