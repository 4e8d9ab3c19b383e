use std::sync::Arc;

use super::function::{MeasureFunction, Side};
use super::interval::Interval;
use super::mesh::{Coord, Location, Mesh};
use crate::{Error, Result};

/// A function described cell by cell on a mesh.
///
/// `open_value(c, x)` is the formula on the open cell `(x_c, x_{c+1})`,
/// extended by continuity to the closed cell (so at the cell ends it returns
/// the one-sided limits from inside the cell). `node_value(i)` is the value
/// the function takes at node `i`; for atoms this is the representative
/// that Stieltjes integrals pick up.
pub trait MeshFunction: Send + Sync {
    fn mesh(&self) -> &Arc<Mesh>;
    fn open_value(&self, cell: usize, x: f64) -> f64;
    fn node_value(&self, node: usize) -> f64;

    /// Constant value on the open cell, when the function is cellwise
    /// constant there.
    fn cell_constant(&self, _cell: usize) -> Option<f64> {
        None
    }

    /// Value at an arbitrary point of `[0, 1]` (node representative at nodes).
    fn value_at(&self, x: f64) -> f64 {
        match self.mesh().locate(x) {
            Location::Node(i) => self.node_value(i),
            Location::Cell(c) => self.open_value(c, x),
        }
    }

    /// One-sided limit at `x`.
    fn limit(&self, x: f64, side: Side) -> f64 {
        let mesh = self.mesh();
        match mesh.locate(x) {
            Location::Cell(c) => self.open_value(c, x),
            Location::Node(i) => match side {
                Side::Right => self.open_value(i, mesh.point(i)),
                Side::Left => {
                    let n = mesh.n_cells();
                    let c = (i + n - 1) % n;
                    self.open_value(c, mesh.point(c + 1))
                }
            },
        }
    }
}

pub type SharedFn = Arc<dyn MeshFunction>;

/// Affine formula `a + b·t` on a cell, `t` the local continuous coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellFormula {
    pub coord: Coord,
    pub a: f64,
    pub b: f64,
}

impl CellFormula {
    pub fn constant(a: f64) -> Self {
        Self { coord: Coord::X, a, b: 0.0 }
    }
}

/// Cellwise constant or affine function on a mesh (affine in `x`, in the
/// continuous part of `W`, or in that of `V`), with an explicit value at
/// every node.
#[derive(Debug, Clone)]
pub struct PiecewiseFunction {
    mesh: Arc<Mesh>,
    cells: Vec<CellFormula>,
    nodes: Vec<f64>,
    side: Side,
}

impl PiecewiseFunction {
    /// Node values follow `side`: a `Left` function takes at `x_i` the limit
    /// from cell `i−1`, a `Right` function the limit from cell `i`.
    pub fn from_cells(mesh: Arc<Mesh>, cells: Vec<CellFormula>, side: Side) -> Result<Self> {
        if cells.len() != mesh.n_cells() {
            return Err(Error::MeshMismatch(format!(
                "{} cell formulas for a mesh with {} cells",
                cells.len(),
                mesh.n_cells()
            )));
        }
        let n = mesh.n_cells();
        let mut f = Self { mesh, cells, nodes: vec![0.0; n], side };
        for i in 0..n {
            f.nodes[i] = match side {
                Side::Right => f.formula_value(i, f.mesh.point(i)),
                Side::Left => {
                    let c = (i + n - 1) % n;
                    f.formula_value(c, f.mesh.point(c + 1))
                }
            };
        }
        Ok(f)
    }

    /// Arbitrary node values; `side` is then only a label.
    pub fn from_cells_and_nodes(mesh: Arc<Mesh>, cells: Vec<CellFormula>, nodes: Vec<f64>, side: Side) -> Result<Self> {
        if cells.len() != mesh.n_cells() || nodes.len() != mesh.n_cells() {
            return Err(Error::MeshMismatch("cell/node vectors do not match the mesh".into()));
        }
        Ok(Self { mesh, cells, nodes, side })
    }

    pub fn constant(mesh: Arc<Mesh>, value: f64, side: Side) -> Self {
        let n = mesh.n_cells();
        Self::from_cells(mesh, vec![CellFormula::constant(value); n], side).expect("sizes match")
    }

    pub fn zero(mesh: Arc<Mesh>, side: Side) -> Self {
        Self::constant(mesh, 0.0, side)
    }

    pub fn from_cell_constants(mesh: Arc<Mesh>, values: &[f64], side: Side) -> Result<Self> {
        Self::from_cells(mesh, values.iter().map(|&v| CellFormula::constant(v)).collect(), side)
    }

    /// Continuous interpolant of `f`, affine in `x` between nodes.
    pub fn interpolate(mesh: Arc<Mesh>, f: impl Fn(f64) -> f64, side: Side) -> Self {
        let pts = mesh.points();
        let vals: Vec<f64> = pts.iter().map(|&x| f(x)).collect();
        let cells = (0..mesh.n_cells())
            .map(|c| CellFormula {
                coord: Coord::X,
                a: vals[c],
                b: (vals[c + 1] - vals[c]) / (pts[c + 1] - pts[c]),
            })
            .collect();
        Self::from_cells(mesh, cells, side).expect("sizes match")
    }

    /// Cellwise constant function holding the Simpson average of `f` (in
    /// `x`) over each cell.
    pub fn cell_averages(mesh: Arc<Mesh>, f: impl Fn(f64) -> f64, side: Side) -> Self {
        let pts = mesh.points();
        let vals: Vec<f64> = (0..mesh.n_cells())
            .map(|c| {
                let (a, b) = (pts[c], pts[c + 1]);
                let m = 0.5 * (a + b);
                (f(a) + 4.0 * f(m) + f(b)) / 6.0
            })
            .collect();
        Self::from_cell_constants(mesh, &vals, side).expect("sizes match")
    }

    pub fn cells(&self) -> &[CellFormula] {
        &self.cells
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn is_cellwise_constant(&self) -> bool {
        self.cells.iter().all(|f| f.b == 0.0)
    }

    fn formula_value(&self, c: usize, x: f64) -> f64 {
        let f = &self.cells[c];
        if f.b == 0.0 {
            f.a
        } else {
            f.a + f.b * self.mesh.local_coord(f.coord, c, x)
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            mesh: self.mesh.clone(),
            cells: self.cells.iter().map(|f| CellFormula { coord: f.coord, a: s * f.a, b: s * f.b }).collect(),
            nodes: self.nodes.iter().map(|v| s * v).collect(),
            side: self.side,
        }
    }

    /// Sum of two functions on the same mesh whose cell formulas share
    /// coordinates (constants combine with anything).
    pub fn add(&self, other: &Self) -> Result<Self> {
        if !Arc::ptr_eq(&self.mesh, &other.mesh) {
            return Err(Error::MeshMismatch("functions live on different meshes".into()));
        }
        let cells = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(f, g)| {
                let coord = if f.b == 0.0 {
                    g.coord
                } else if g.b == 0.0 || g.coord == f.coord {
                    f.coord
                } else {
                    return Err(Error::InvalidArgument("cannot add formulas affine in different coordinates".into()));
                };
                Ok(CellFormula { coord, a: f.a + g.a, b: f.b + g.b })
            })
            .collect::<Result<Vec<_>>>()?;
        let nodes = self.nodes.iter().zip(&other.nodes).map(|(a, b)| a + b).collect();
        Ok(Self { mesh: self.mesh.clone(), cells, nodes, side: self.side })
    }

    /// `∫ f dμ / μ(𝕋)`, recomputed on every call.
    pub fn mean(&self, mu: &MeasureFunction) -> Result<f64> {
        Ok(integrate(self, mu, Interval::circle())? / mu.total())
    }
}

impl MeshFunction for PiecewiseFunction {
    fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    fn open_value(&self, cell: usize, x: f64) -> f64 {
        self.formula_value(cell, x)
    }

    fn node_value(&self, node: usize) -> f64 {
        self.nodes[node % self.nodes.len()]
    }

    fn cell_constant(&self, cell: usize) -> Option<f64> {
        let f = &self.cells[cell];
        (f.b == 0.0).then_some(f.a)
    }
}

/// `∫_I f dμ`: exact quadrature on the absolutely continuous part plus
/// `f(d)·m` for each atom `d ∈ I`, using `f`'s node representative.
/// Summation runs left to right, each atom before the cell it opens.
pub fn integrate(f: &dyn MeshFunction, mu: &MeasureFunction, interval: Interval) -> Result<f64> {
    integrate_product(&[f], mu, interval)
}

/// `∫_I Π f_k dμ` with the same conventions as [`integrate`].
pub fn integrate_product(fs: &[&dyn MeshFunction], mu: &MeasureFunction, interval: Interval) -> Result<f64> {
    let mesh = match fs.first() {
        Some(f) => f.mesh().clone(),
        None => return Err(Error::InvalidArgument("empty product".into())),
    };
    for f in fs {
        if !Arc::ptr_eq(f.mesh(), &mesh) {
            return Err(Error::MeshMismatch("factors live on different meshes".into()));
        }
    }
    mesh.check_atoms(mu)?;
    let pts = mesh.points();
    let n = mesh.n_cells();
    let mut total = 0.0;
    for c in 0..n {
        let m = mesh.atom_of(mu, c);
        if m > 0.0 && interval.contains(pts[c]) {
            total += m * fs.iter().map(|f| f.node_value(c)).product::<f64>();
        }
        if let Some((p, q)) = interval.clip(pts[c], pts[c + 1]) {
            total += cell_product_integral(&mesh, fs, mu, c, p, q);
        }
    }
    Ok(total)
}

/// Absolutely continuous part of `∫_[p,q] Π f_k dμ` inside one cell.
pub fn cell_product_integral(mesh: &Mesh, fs: &[&dyn MeshFunction], mu: &MeasureFunction, c: usize, p: f64, q: f64) -> f64 {
    let consts: Option<f64> = fs.iter().map(|f| f.cell_constant(c)).product();
    if let Some(k) = consts {
        return k * (mu.continuous_part(q) - mu.continuous_part(p));
    }
    mesh.ac_integral(c, p, q, mu, |x| fs.iter().map(|f| f.open_value(c, x)).product())
}

/// Interval family for running integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `x ↦ ∫_(0,x]`, càdlàg.
    OpenClosed,
    /// `x ↦ ∫_[0,x)`, càglàd.
    ClosedOpen,
}

/// `x ↦ offset + ∫ f dμ` over `(0,x]` or `[0,x)`, tabulated at the nodes
/// and integrated exactly inside cells.
#[derive(Clone)]
pub struct Cumulative {
    integrand: SharedFn,
    mu: Arc<MeasureFunction>,
    convention: Convention,
    offset: f64,
    // ∫ over [0, x_i) and (0, x_i]
    before: Vec<f64>,
    through: Vec<f64>,
}

impl Cumulative {
    pub fn new(integrand: SharedFn, mu: Arc<MeasureFunction>, convention: Convention, offset: f64) -> Result<Self> {
        let mesh = integrand.mesh().clone();
        mesh.check_atoms(&mu)?;
        let n = mesh.n_cells();
        let pts = mesh.points();
        let mut before = Vec::with_capacity(n + 1);
        let mut through = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        for c in 0..n {
            before.push(acc);
            acc += mesh.atom_of(&mu, c) * integrand.node_value(c);
            through.push(acc);
            acc += cell_product_integral(&mesh, &[&*integrand], &mu, c, pts[c], pts[c + 1]);
        }
        before.push(acc);
        through.push(acc);
        Ok(Self { integrand, mu, convention, offset, before, through })
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Integral over the whole circle.
    pub fn total(&self) -> f64 {
        *self.through.last().expect("non-empty")
    }

    pub fn integrand(&self) -> &SharedFn {
        &self.integrand
    }

    /// Value at node `i ∈ 0..=N` (`N` being the closing point 1).
    pub fn at_node(&self, i: usize, side: Side) -> f64 {
        self.offset
            + match side {
                Side::Right => self.through[i],
                Side::Left => self.before[i],
            }
    }

    /// Right limit (`Side::Right`) or left limit at any `x ∈ [0,1]`.
    pub fn eval(&self, x: f64, side: Side) -> f64 {
        let mesh = self.integrand.mesh();
        if x >= 1.0 {
            return self.at_node(mesh.n_cells(), side);
        }
        match mesh.locate(x) {
            Location::Node(i) => self.at_node(i, side),
            Location::Cell(c) => self.open_value(c, x),
        }
    }
}

impl MeshFunction for Cumulative {
    fn mesh(&self) -> &Arc<Mesh> {
        self.integrand.mesh()
    }

    fn open_value(&self, cell: usize, x: f64) -> f64 {
        let mesh = self.integrand.mesh();
        let p = mesh.point(cell);
        self.offset + self.through[cell] + cell_product_integral(mesh, &[&*self.integrand], &self.mu, cell, p, x)
    }

    fn node_value(&self, node: usize) -> f64 {
        match self.convention {
            Convention::OpenClosed => self.at_node(node, Side::Right),
            Convention::ClosedOpen => self.at_node(node, Side::Left),
        }
    }
}

/// `x ↦ ∫ f dμ` over `(0,x]` or `[0,x)`.
pub fn cumulative(f: SharedFn, mu: Arc<MeasureFunction>, convention: Convention) -> Result<Cumulative> {
    Cumulative::new(f, mu, convention, 0.0)
}
