//! Measure functions with atoms, meshes and exact Stieltjes quadrature.

mod function;
mod interval;
mod mesh;
mod piecewise;

pub use function::{apply_tabulations, Atom, Continuity, MeasureFunction, Segment, Side, TabulatedExpr, Tabulation};
pub use interval::Interval;
pub use mesh::{Coord, Location, Mesh, DEFAULT_SIMPSON_PANELS};
pub use piecewise::{
    cell_product_integral, cumulative, integrate, integrate_product, CellFormula, Convention, Cumulative, MeshFunction,
    PiecewiseFunction, SharedFn,
};

use std::sync::Arc;

use crate::Result;

/// Mesh with uniform nodes `j/n` refined by all atoms of `W` and `V`.
pub fn build_mesh(w: Arc<MeasureFunction>, v: Arc<MeasureFunction>, n: usize) -> Result<Arc<Mesh>> {
    Mesh::build(w, v, n)
}

/// Reference measure function with two atoms: `x/2` on `[0, 0.25)`,
/// `1 + 2x` on `[0.25, 0.6)` and `2 + exp(2x)` on `[0.6, 1]`, with the
/// exponential piece tabulated on `points` sub-intervals.
pub fn two_atom_w(points: usize) -> MeasureFunction {
    let segments = apply_tabulations(
        &[Segment { x: 0.0, slope: 0.5 }, Segment { x: 0.25, slope: 2.0 }],
        &[Tabulation { x0: 0.6, x1: 1.0, expr: TabulatedExpr::Exp2x, points }],
    )
    .expect("fixed tabulation is valid");
    let atoms = vec![
        Atom { x: 0.25, mass: 1.5 - 0.125 },
        Atom { x: 0.6, mass: (2.0 + 1.2f64.exp()) - 2.2 },
    ];
    MeasureFunction::new(Continuity::Cadlag, segments, atoms).expect("two-atom measure is valid")
}
