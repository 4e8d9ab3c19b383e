#![allow(dead_code)]

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use wvtorus::measure::{two_atom_w, Atom, Continuity, MeasureFunction, Mesh, Segment};

pub const TAB_POINTS: usize = 256;

pub fn identity_w() -> Arc<MeasureFunction> {
    Arc::new(MeasureFunction::identity(Continuity::Cadlag))
}

pub fn identity_v() -> Arc<MeasureFunction> {
    Arc::new(MeasureFunction::identity(Continuity::Caglad))
}

pub fn two_atom() -> Arc<MeasureFunction> {
    Arc::new(two_atom_w(TAB_POINTS))
}

/// Closed form of the two-atom reference measure, written out independently
/// of the library: `x/2`, then `1 + 2x` from 0.25, then `2 + e^{2x}` from 0.6.
pub fn w_closed_form(x: f64) -> f64 {
    if x < 0.25 {
        0.5 * x
    } else if x < 0.6 {
        1.0 + 2.0 * x
    } else {
        2.0 + (2.0 * x).exp()
    }
}

pub fn mesh(w: Arc<MeasureFunction>, n: usize) -> Arc<Mesh> {
    Mesh::build(w, identity_v(), n).unwrap()
}

pub fn mesh_with(w: Arc<MeasureFunction>, n: usize, extra: &[f64]) -> Arc<Mesh> {
    Mesh::build_with_nodes(w, identity_v(), n, extra).unwrap()
}

/// Measure with the given slopes on equal pieces of `[0,1)` and atoms.
pub fn measure(continuity: Continuity, slopes: &[f64], atoms: &[(f64, f64)]) -> MeasureFunction {
    let k = slopes.len() as f64;
    let segments = slopes.iter().enumerate().map(|(i, &s)| Segment { x: i as f64 / k, slope: s }).collect();
    let mut atoms: Vec<Atom> = atoms.iter().map(|&(x, mass)| Atom { x, mass }).collect();
    atoms.sort_by(|a, b| a.x.total_cmp(&b.x));
    atoms.dedup_by(|a, b| (a.x - b.x).abs() < 1e-3);
    MeasureFunction::new(continuity, segments, atoms).unwrap()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut StdRng, n: usize, a: f64, b: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(a..b)).collect()
}
