use std::sync::Arc;

use super::function::{Continuity, MeasureFunction, Side};
use crate::{Error, Result};

/// Default number of Simpson panels per smooth sub-piece of a cell.
pub const DEFAULT_SIMPSON_PANELS: usize = 4;

/// Points closer than this are merged when an atom lands next to a
/// uniform node.
const NODE_MERGE_TOL: f64 = 1e-12;

/// Coordinate in which a cell formula is affine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    X,
    W,
    V,
}

/// Position of a point relative to the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Node(usize),
    Cell(usize),
}

/// Periodic mesh `0 = x_0 < … < x_{N−1} < x_N = 1` containing every atom of
/// `W` and `V`. Cell `c` is the open interval `(x_c, x_{c+1})`; as a `W`-cell
/// it is `(x_c, x_{c+1}]`, as a `V`-cell `[x_c, x_{c+1})`.
#[derive(Debug, Clone)]
pub struct Mesh {
    w: Arc<MeasureFunction>,
    v: Arc<MeasureFunction>,
    points: Vec<f64>,
    dw: Vec<f64>,
    dv: Vec<f64>,
    dwc: Vec<f64>,
    dvc: Vec<f64>,
    w_atom: Vec<f64>,
    v_atom: Vec<f64>,
    w_cont: Vec<f64>,
    v_cont: Vec<f64>,
    pieces: Vec<Vec<f64>>,
    simpson_panels: usize,
}

impl Mesh {
    /// Uniform nodes `j/n` refined by every atom of `W` and `V`.
    pub fn build(w: Arc<MeasureFunction>, v: Arc<MeasureFunction>, n: usize) -> Result<Arc<Self>> {
        Self::build_with_nodes(w, v, n, &[])
    }

    /// As [`Mesh::build`], with additional required nodes.
    pub fn build_with_nodes(
        w: Arc<MeasureFunction>,
        v: Arc<MeasureFunction>,
        n: usize,
        extra: &[f64],
    ) -> Result<Arc<Self>> {
        Self::build_full(w, v, n, extra, DEFAULT_SIMPSON_PANELS)
    }

    pub fn build_full(
        w: Arc<MeasureFunction>,
        v: Arc<MeasureFunction>,
        n: usize,
        extra: &[f64],
        simpson_panels: usize,
    ) -> Result<Arc<Self>> {
        if n < 2 {
            return Err(Error::InvalidMesh(format!("need n >= 2 uniform cells, got {n}")));
        }
        if simpson_panels == 0 {
            return Err(Error::InvalidMesh("simpson refinement must be >= 1".into()));
        }
        if w.continuity() != Continuity::Cadlag {
            return Err(Error::InvalidMeasure("W must be càdlàg".into()));
        }
        if v.continuity() != Continuity::Caglad {
            return Err(Error::InvalidMeasure("V must be càglàd".into()));
        }
        let mut nodes: Vec<f64> = (0..n).map(|j| j as f64 / n as f64).collect();
        let required = w.atoms().iter().chain(v.atoms()).map(|a| a.x).chain(extra.iter().copied());
        for x in required {
            if !(0.0..1.0).contains(&x) {
                return Err(Error::InvalidMesh(format!("required node {x} outside [0,1)")));
            }
            let i = nodes.partition_point(|&p| p < x);
            let near_lo = i > 0 && (x - nodes[i - 1]).abs() <= NODE_MERGE_TOL;
            let near_hi = i < nodes.len() && (nodes[i] - x).abs() <= NODE_MERGE_TOL;
            if near_hi {
                if nodes[i] != 0.0 {
                    nodes[i] = x;
                }
            } else if near_lo {
                if nodes[i - 1] != 0.0 {
                    nodes[i - 1] = x;
                }
            } else {
                nodes.insert(i, x);
            }
        }
        let n_cells = nodes.len();
        let mut points = nodes;
        points.push(1.0);

        let w_atom: Vec<f64> = points[..n_cells].iter().map(|&x| w.atom_mass(x)).collect();
        let v_atom: Vec<f64> = points[..n_cells].iter().map(|&x| v.atom_mass(x)).collect();
        for a in w.atoms().iter().chain(v.atoms()) {
            if points.binary_search_by(|p| p.total_cmp(&a.x)).is_err() {
                return Err(Error::InvalidMesh(format!("atom at {} is not a mesh node", a.x)));
            }
        }
        let w_val: Vec<f64> = points.iter().map(|&x| w.eval(x, Side::Right)).collect();
        let v_val: Vec<f64> = points.iter().map(|&x| v.eval(x, Side::Left)).collect();
        let dw: Vec<f64> = (0..n_cells).map(|c| w_val[c + 1] - w_val[c]).collect();
        let dv: Vec<f64> = (0..n_cells).map(|c| v_val[c + 1] - v_val[c]).collect();
        let dwc: Vec<f64> = (0..n_cells).map(|c| dw[c] - w_atom[(c + 1) % n_cells]).collect();
        let dvc: Vec<f64> = (0..n_cells).map(|c| dv[c] - v_atom[c]).collect();
        for c in 0..n_cells {
            if !(dw[c] > 0.0 && dv[c] > 0.0 && points[c + 1] > points[c]) {
                return Err(Error::InvalidMesh(format!("degenerate cell {c} at {}", points[c])));
            }
        }
        let w_cont: Vec<f64> = points.iter().map(|&x| w.continuous_part(x)).collect();
        let v_cont: Vec<f64> = points.iter().map(|&x| v.continuous_part(x)).collect();
        let pieces = (0..n_cells)
            .map(|c| {
                let (a, b) = (points[c], points[c + 1]);
                let mut p: Vec<f64> = w.breakpoints_in(a, b).chain(v.breakpoints_in(a, b)).collect();
                p.sort_by(f64::total_cmp);
                p.dedup();
                p
            })
            .collect();
        Ok(Arc::new(Self {
            w,
            v,
            points,
            dw,
            dv,
            dwc,
            dvc,
            w_atom,
            v_atom,
            w_cont,
            v_cont,
            pieces,
            simpson_panels,
        }))
    }

    pub fn w(&self) -> &Arc<MeasureFunction> {
        &self.w
    }

    pub fn v(&self) -> &Arc<MeasureFunction> {
        &self.v
    }

    /// Number of cells, equal to the number of distinct periodic nodes.
    pub fn n_cells(&self) -> usize {
        self.dw.len()
    }

    /// Node coordinates including the closing point `x_N = 1`.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, i: usize) -> f64 {
        self.points[i]
    }

    /// `W(x_{c+1}) − W(x_c)`, the `W`-mass of `(x_c, x_{c+1}]`.
    pub fn dw(&self, c: usize) -> f64 {
        self.dw[c]
    }

    /// `V(x_{c+1}) − V(x_c)`, the `V`-mass of `[x_c, x_{c+1})`.
    pub fn dv(&self, c: usize) -> f64 {
        self.dv[c]
    }

    /// Continuous `W`-mass of the open cell.
    pub fn dw_cont(&self, c: usize) -> f64 {
        self.dwc[c]
    }

    pub fn dv_cont(&self, c: usize) -> f64 {
        self.dvc[c]
    }

    pub fn w_atom(&self, i: usize) -> f64 {
        self.w_atom[i % self.n_cells()]
    }

    pub fn v_atom(&self, i: usize) -> f64 {
        self.v_atom[i % self.n_cells()]
    }

    pub fn is_w_atom(&self, i: usize) -> bool {
        self.w_atom(i) > 0.0
    }

    pub fn simpson_panels(&self) -> usize {
        self.simpson_panels
    }

    /// Interior breakpoints of `W` and `V` inside cell `c`.
    pub fn pieces(&self, c: usize) -> &[f64] {
        &self.pieces[c]
    }

    pub fn locate(&self, x: f64) -> Location {
        let n = self.n_cells();
        if x >= 1.0 {
            return Location::Node(0);
        }
        match self.points[..n].binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => Location::Node(i),
            Err(i) => Location::Cell(i - 1),
        }
    }

    /// Index of the node at `x`, if `x` is a node.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        match self.locate(x) {
            Location::Node(i) => Some(i),
            Location::Cell(_) => None,
        }
    }

    /// Local coordinate `coord_cont(x) − coord_cont(x_c)` on cell `c`.
    pub fn local_coord(&self, coord: Coord, c: usize, x: f64) -> f64 {
        match coord {
            Coord::X => x - self.points[c],
            Coord::W => self.w.continuous_part(x) - self.w_cont[c],
            Coord::V => self.v.continuous_part(x) - self.v_cont[c],
        }
    }

    /// Length of cell `c` in the given continuous coordinate.
    pub fn cell_extent(&self, coord: Coord, c: usize) -> f64 {
        match coord {
            Coord::X => self.points[c + 1] - self.points[c],
            Coord::W => self.dwc[c],
            Coord::V => self.dvc[c],
        }
    }

    fn is_w(&self, mu: &MeasureFunction) -> bool {
        std::ptr::eq(mu, &*self.w)
    }

    fn is_v(&self, mu: &MeasureFunction) -> bool {
        std::ptr::eq(mu, &*self.v)
    }

    /// Atom mass of `mu` at node `i`.
    pub fn atom_of(&self, mu: &MeasureFunction, i: usize) -> f64 {
        if self.is_w(mu) {
            self.w_atom(i)
        } else if self.is_v(mu) {
            self.v_atom(i)
        } else {
            mu.atom_mass(self.points[i % self.n_cells()])
        }
    }

    /// Every atom of `mu` must be a node.
    pub fn check_atoms(&self, mu: &MeasureFunction) -> Result<()> {
        if self.is_w(mu) || self.is_v(mu) {
            return Ok(());
        }
        for a in mu.atoms() {
            if self.points.binary_search_by(|p| p.total_cmp(&a.x)).is_err() {
                return Err(Error::MeshMismatch(format!("atom at {} is interior to a cell", a.x)));
            }
        }
        Ok(())
    }

    /// `∫_[p,q] f d(μ_ac)` over a sub-range of cell `c`, by composite Simpson
    /// on every piece where `W`, `V` and `μ` are all affine. Exact for
    /// integrands that are cubic on those pieces.
    pub fn ac_integral(&self, c: usize, p: f64, q: f64, mu: &MeasureFunction, f: impl Fn(f64) -> f64) -> f64 {
        debug_assert!(p >= self.points[c] && q <= self.points[c + 1] && p <= q);
        if q <= p {
            return 0.0;
        }
        let mut cuts: Vec<f64> = Vec::with_capacity(8);
        cuts.push(p);
        cuts.extend(self.pieces[c].iter().copied().filter(|&x| x > p && x < q));
        if !(self.is_w(mu) || self.is_v(mu)) {
            cuts.extend(mu.breakpoints_in(p, q));
            cuts[1..].sort_by(f64::total_cmp);
            cuts.dedup();
        }
        cuts.push(q);
        let r = self.simpson_panels;
        let mut total = 0.0;
        for win in cuts.windows(2) {
            let (s, t) = (win[0], win[1]);
            let density = mu.slope_at(0.5 * (s + t));
            let h = (t - s) / r as f64;
            let mut acc = 0.0;
            for k in 0..r {
                let a = s + k as f64 * h;
                let b = if k + 1 == r { t } else { a + h };
                acc += f(a) + 4.0 * f(0.5 * (a + b)) + f(b);
            }
            total += density * acc * h / 6.0;
        }
        total
    }
}
