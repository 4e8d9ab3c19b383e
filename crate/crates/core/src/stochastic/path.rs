use std::io::Write;
use std::sync::Arc;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::measure::{CellFormula, Mesh, PiecewiseFunction, Side};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    Motion,
    Bridge,
}

/// One realisation on the mesh nodes: `right[i] = B(x_i)` and
/// `left[i] = B(x_i−)` for `i = 0..=N` (the last entry is the point 1).
/// Left and right values differ only at atoms of `W`.
#[derive(Clone)]
pub struct SamplePath {
    pub seed: u64,
    pub path_id: u64,
    pub kind: PathKind,
    mesh: Arc<Mesh>,
    right: Vec<f64>,
    left: Vec<f64>,
}

/// Standard normal generator: 53-bit uniforms `(k + ½)/2⁵³` pushed through
/// the inverse normal distribution function.
struct Gaussian {
    rng: ChaCha8Rng,
    normal: Normal,
}

impl Gaussian {
    fn new(seed: u64, path_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path_id);
        Self { rng, normal: Normal::standard() }
    }

    fn next(&mut self) -> f64 {
        let k = self.rng.next_u64() >> 11;
        let u = (k as f64 + 0.5) / (1u64 << 53) as f64;
        self.normal.inverse_cdf(u)
    }
}

impl SamplePath {
    /// A `W`-Brownian motion: per cell a continuous increment
    /// `N(0, ΔW_c − m)`, then the jump `N(0, m)` at an atom closing the cell.
    pub fn motion(mesh: Arc<Mesh>, seed: u64, path_id: u64) -> Self {
        let n = mesh.n_cells();
        let mut g = Gaussian::new(seed, path_id);
        let mut right = Vec::with_capacity(n + 1);
        let mut left = Vec::with_capacity(n + 1);
        right.push(0.0);
        left.push(0.0);
        for c in 0..n {
            let before = right[c] + mesh.dw_cont(c).sqrt() * g.next();
            left.push(before);
            let m = if c + 1 < n { mesh.w_atom(c + 1) } else { 0.0 };
            right.push(if m > 0.0 { before + m.sqrt() * g.next() } else { before });
        }
        Self { seed, path_id, kind: PathKind::Motion, mesh, right, left }
    }

    /// `S(x) = B(x) − W(x)/W(1)·B(1)` from the motion with the same seed and id.
    pub fn bridge(mesh: Arc<Mesh>, seed: u64, path_id: u64) -> Self {
        let b = Self::motion(mesh, seed, path_id);
        let w = b.mesh.w().clone();
        let total = w.total();
        let b1 = b.right[b.right.len() - 1];
        let pts = b.mesh.points();
        let right = b.right.iter().zip(pts).map(|(v, &x)| v - w.eval(x, Side::Right) / total * b1).collect();
        let left = b.left.iter().zip(pts).map(|(v, &x)| v - w.eval(x, Side::Left) / total * b1).collect();
        Self { kind: PathKind::Bridge, right, left, ..b }
    }

    /// The identically zero path (used to check linearity in the noise).
    pub fn zero(mesh: Arc<Mesh>) -> Self {
        let n = mesh.n_cells();
        Self { seed: 0, path_id: 0, kind: PathKind::Motion, mesh, right: vec![0.0; n + 1], left: vec![0.0; n + 1] }
    }

    /// `α·B`, same seed and id.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            right: self.right.iter().map(|v| alpha * v).collect(),
            left: self.left.iter().map(|v| alpha * v).collect(),
            ..self.clone()
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    /// `B(x_i)`, `i = 0..=N`.
    pub fn values(&self) -> &[f64] {
        &self.right
    }

    /// `B(x_i−)`, `i = 0..=N`.
    pub fn left_values(&self) -> &[f64] {
        &self.left
    }

    /// `B(t)` or `B(t−)` at a mesh node.
    pub fn at(&self, t: f64, side: Side) -> Result<f64> {
        let i = self.node(t)?;
        Ok(match side {
            Side::Right => self.right[i],
            Side::Left => self.left[i],
        })
    }

    /// Index into the value arrays (the point 1 maps to `N`).
    pub fn node(&self, t: f64) -> Result<usize> {
        if t >= 1.0 {
            return Ok(self.mesh.n_cells());
        }
        self.mesh
            .node_index(t)
            .ok_or_else(|| Error::InvalidMesh(format!("{t} is not a mesh node; paths are defined at nodes only")))
    }

    /// `sup |B|` over stored values.
    pub fn sup_abs(&self) -> f64 {
        self.right.iter().chain(&self.left).fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// The step function `s ↦ B(s−)` on `W`-cells `(x_c, x_{c+1}]`: value
    /// `B(x_c)` inside the cell, `B(x_{c+1}−)` at its right node.
    pub fn left_step(&self) -> PiecewiseFunction {
        let n = self.mesh.n_cells();
        let cells = (0..n).map(|c| CellFormula::constant(self.right[c])).collect();
        let mut nodes: Vec<f64> = self.left[..n].to_vec();
        nodes[0] = self.left[n];
        PiecewiseFunction::from_cells_and_nodes(self.mesh.clone(), cells, nodes, Side::Left).expect("sizes match")
    }

    /// `t,B_left,B`.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "t,B_left,B")?;
        for (i, x) in self.mesh.points().iter().enumerate() {
            writeln!(out, "{x},{},{}", self.left[i], self.right[i])?;
        }
        Ok(())
    }
}

/// `n_paths` motions with ids `0..n_paths`, generated in parallel.
pub fn sample_bm(mesh: &Arc<Mesh>, seed: u64, n_paths: usize) -> Vec<SamplePath> {
    sample_bm_from(mesh, seed, 0, n_paths)
}

/// Motions with ids `first..first + n_paths`.
pub fn sample_bm_from(mesh: &Arc<Mesh>, seed: u64, first: u64, n_paths: usize) -> Vec<SamplePath> {
    (0..n_paths as u64).into_par_iter().map(|k| SamplePath::motion(mesh.clone(), seed, first + k)).collect()
}

pub fn sample_bridge(mesh: &Arc<Mesh>, seed: u64, n_paths: usize) -> Vec<SamplePath> {
    sample_bridge_from(mesh, seed, 0, n_paths)
}

pub fn sample_bridge_from(mesh: &Arc<Mesh>, seed: u64, first: u64, n_paths: usize) -> Vec<SamplePath> {
    (0..n_paths as u64).into_par_iter().map(|k| SamplePath::bridge(mesh.clone(), seed, first + k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{two_atom_w, Continuity, MeasureFunction};

    fn mesh() -> Arc<Mesh> {
        Mesh::build(Arc::new(two_atom_w(16)), Arc::new(MeasureFunction::identity(Continuity::Caglad)), 10).unwrap()
    }

    #[test]
    fn seeded_paths_are_reproducible() {
        let m = mesh();
        let a = SamplePath::motion(m.clone(), 7, 3);
        let b = SamplePath::motion(m.clone(), 7, 3);
        let c = SamplePath::motion(m, 7, 4);
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn jumps_only_at_atoms() {
        let m = mesh();
        let p = SamplePath::motion(m.clone(), 1, 0);
        for i in 0..m.n_cells() {
            let jumped = p.values()[i] != p.left_values()[i];
            assert_eq!(jumped, m.is_w_atom(i), "node {i}");
        }
        assert_eq!(p.values()[0], 0.0);
    }

    #[test]
    fn bridge_pinned() {
        let m = mesh();
        for p in sample_bridge(&m, 5, 10) {
            assert_eq!(p.values()[0], 0.0);
            assert_eq!(p.at(1.0, Side::Right).unwrap(), 0.0);
        }
    }

    #[test]
    fn normal_generator_is_standard() {
        let mut g = Gaussian::new(11, 0);
        let xs: Vec<f64> = (0..20000).map(|_| g.next()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!(mean.abs() < 0.03 && (var - 1.0).abs() < 0.04);
    }
}
