//! Banded matrices arising from nearest-neighbour couplings on a periodic
//! mesh, with direct solvers.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Symmetric tridiagonal matrix: `diag[i]`, and `off[i]` in positions
/// `(i, i+1)` and `(i+1, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.off[i];
                m[(i + 1, i)] = self.off[i];
            }
        }
        m
    }

    /// Thomas algorithm without pivoting; fails on a vanishing pivot.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if b.len() != n {
            return Err(Error::InvalidArgument(format!("right-hand side of length {} for order {n}", b.len())));
        }
        if n == 0 {
            return Ok(vec![]);
        }
        let scale = self.diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut piv = self.diag[0];
        for i in 0..n {
            if i > 0 {
                piv = self.diag[i] - self.off[i - 1] * c[i - 1];
            }
            if !(piv.abs() > 1e-14 * scale) {
                return Err(Error::SingularSystem(format!("pivot {piv:e} at row {i}")));
            }
            c[i] = if i + 1 < n { self.off[i] / piv } else { 0.0 };
            d[i] = (b[i] - if i > 0 { self.off[i - 1] * d[i - 1] } else { 0.0 }) / piv;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }
}

/// Symmetric cyclic tridiagonal matrix: `off[i]` couples `i` and
/// `(i+1) mod n`. For `n = 2` both couplings land on the same entry.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl CyclicTridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self { diag: vec![0.0; n], off: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Self {
        Self {
            diag: self.diag.iter().zip(&other.diag).map(|(a, b)| a + s * b).collect(),
            off: self.off.iter().zip(&other.off).map(|(a, b)| a + s * b).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y: Vec<f64> = (0..n).map(|i| self.diag[i] * x[i]).collect();
        for i in 0..n {
            let j = (i + 1) % n;
            y[i] += self.off[i] * x[j];
            y[j] += self.off[i] * x[i];
        }
        y
    }

    /// `xᵀ A y`.
    pub fn quad_form(&self, x: &[f64], y: &[f64]) -> f64 {
        self.mul_vec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] += self.diag[i];
            let j = (i + 1) % n;
            m[(i, j)] += self.off[i];
            m[(j, i)] += self.off[i];
        }
        m
    }

    /// The principal submatrix with row and column 0 removed.
    pub fn drop_first(&self) -> Tridiagonal {
        let n = self.len();
        Tridiagonal { diag: self.diag[1..].to_vec(), off: self.off[1..n - 1].to_vec() }
    }

    /// Sherman–Morrison on top of the Thomas algorithm. Intended for
    /// symmetric positive definite matrices.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if b.len() != n {
            return Err(Error::InvalidArgument(format!("right-hand side of length {} for order {n}", b.len())));
        }
        if n <= 3 {
            return self
                .to_dense()
                .lu()
                .solve(&nalgebra::DVector::from_column_slice(b))
                .map(|x| x.as_slice().to_vec())
                .ok_or_else(|| Error::SingularSystem("dense fallback is singular".into()));
        }
        let corner = self.off[n - 1];
        let gamma = -self.diag[0];
        let mut t = Tridiagonal { diag: self.diag.clone(), off: self.off[..n - 1].to_vec() };
        t.diag[0] -= gamma;
        t.diag[n - 1] -= corner * corner / gamma;
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = corner;
        let y = t.solve(b)?;
        let z = t.solve(&u)?;
        let vy = y[0] + corner / gamma * y[n - 1];
        let vz = z[0] + corner / gamma * z[n - 1];
        let denom = 1.0 + vz;
        if !(denom.abs() > 1e-14) {
            return Err(Error::SingularSystem("Sherman–Morrison denominator vanishes".into()));
        }
        let f = vy / denom;
        Ok(y.iter().zip(&z).map(|(a, b)| a - f * b).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> CyclicTridiagonal {
        CyclicTridiagonal {
            diag: (0..n).map(|i| 4.0 + (i as f64).sin()).collect(),
            off: (0..n).map(|i| -1.0 + 0.3 * (i as f64).cos()).collect(),
        }
    }

    #[test]
    fn cyclic_solve_matches_dense() {
        for n in [2, 3, 4, 7, 32] {
            let a = sample(n);
            let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).cos()).collect();
            let x = a.solve(&b).unwrap();
            let r = a.mul_vec(&x);
            for i in 0..n {
                assert!((r[i] - b[i]).abs() < 1e-12, "n={n}");
            }
            let dense = a.to_dense() * nalgebra::DVector::from_column_slice(&x);
            for i in 0..n {
                assert!((dense[i] - b[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn thomas_solves_dropped_system() {
        let a = sample(9).drop_first();
        let b = vec![1.0; 8];
        let x = a.solve(&b).unwrap();
        let r = a.mul_vec(&x);
        assert!(r.iter().all(|v| (v - 1.0).abs() < 1e-13));
        assert_eq!(a.to_dense(), a.to_dense().transpose());
    }

    #[test]
    fn singular_detected() {
        let a = Tridiagonal { diag: vec![0.0, 1.0], off: vec![0.0] };
        assert!(matches!(a.solve(&[1.0, 1.0]), Err(Error::SingularSystem(_))));
    }
}
