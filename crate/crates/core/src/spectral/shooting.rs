use std::io::Write;

use rayon::prelude::*;

use crate::measure::MeasureFunction;
use crate::{Error, Result};

type Mat2 = [[f64; 2]; 2];

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// Piece of `(0, 1)` on which `W` and `V` are affine, followed by the
/// atoms sitting at its right end.
#[derive(Debug, Clone, Copy)]
struct Step {
    h: f64,
    w: f64,
    v: f64,
    mw: f64,
    mv: f64,
}

/// Propagator of `(ψ, D⁻_W ψ)` for `ψ = a + bW − λ∫_(0,x]∫_[0,y) ψ dV dW`.
#[derive(Debug, Clone)]
pub struct Monodromy {
    steps: Vec<Step>,
    w_total: f64,
    v_total: f64,
}

impl Monodromy {
    pub fn new(w: &MeasureFunction, v: &MeasureFunction) -> Self {
        let mut cuts: Vec<f64> = vec![0.0, 1.0];
        cuts.extend(w.segments().iter().map(|s| s.x));
        cuts.extend(v.segments().iter().map(|s| s.x));
        cuts.extend(w.atoms().iter().map(|a| a.x));
        cuts.extend(v.atoms().iter().map(|a| a.x));
        cuts.retain(|&x| (0.0..=1.0).contains(&x));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let steps = cuts
            .windows(2)
            .map(|p| {
                let (a, b) = (p[0], p[1]);
                let mid = 0.5 * (a + b);
                let end = if b < 1.0 { b } else { f64::NAN };
                Step {
                    h: b - a,
                    w: w.slope_at(mid),
                    v: v.slope_at(mid),
                    mw: if end.is_nan() { 0.0 } else { w.atom_mass(end) },
                    mv: if end.is_nan() { 0.0 } else { v.atom_mass(end) },
                }
            })
            .collect();
        Self { steps, w_total: w.total(), v_total: v.total() }
    }

    /// `Φ(λ)` mapping `(ψ(0), D⁻_Wψ(0))` to `(ψ(1), D⁻_Wψ(1))`. At a point
    /// carrying both atoms the value jump `ψ += φ·m_W` is applied before the
    /// derivative kick `φ −= λ·ψ·m_V`: the inner integral `∫_[0,y)` does not
    /// see the V-atom at `y` itself, while the outer `∫_(0,x]` does see the
    /// W-atom at `x`.
    pub fn matrix(&self, lambda: f64) -> Mat2 {
        let mut phi: Mat2 = [[1.0, 0.0], [0.0, 1.0]];
        for s in &self.steps {
            let t = if lambda > 0.0 {
                let om = (lambda * s.w * s.v).sqrt();
                let (sn, cs) = (om * s.h).sin_cos();
                [[cs, s.w / om * sn], [-lambda * s.v / om * sn, cs]]
            } else if lambda == 0.0 {
                [[1.0, s.w * s.h], [0.0, 1.0]]
            } else {
                let om = (-lambda * s.w * s.v).sqrt();
                let (sh, ch) = ((om * s.h).sinh(), (om * s.h).cosh());
                [[ch, s.w / om * sh], [-lambda * s.v / om * sh, ch]]
            };
            phi = mul(&t, &phi);
            if s.mw > 0.0 {
                phi = mul(&[[1.0, s.mw], [0.0, 1.0]], &phi);
            }
            if s.mv > 0.0 {
                phi = mul(&[[1.0, 0.0], [-lambda * s.mv, 1.0]], &phi);
            }
        }
        phi
    }

    /// `det(Φ(λ) − I) = 2 − tr Φ(λ)` (the monodromy is unimodular).
    pub fn characteristic(&self, lambda: f64) -> f64 {
        let p = self.matrix(lambda);
        (1.0 - p[0][0]) * (1.0 - p[1][1]) - p[0][1] * p[1][0]
    }

    /// `‖S(Φ − I)S⁻¹‖_F` with `S = diag(1, s)` balancing the two state
    /// components, `s² = W(1)/(λ V(1))`.
    pub fn identity_defect(&self, lambda: f64) -> f64 {
        let p = self.matrix(lambda);
        let s = (self.w_total / (lambda.abs().max(1e-300) * self.v_total)).sqrt();
        let a = p[0][0] - 1.0;
        let b = p[0][1] / s;
        let c = p[1][0] * s;
        let d = p[1][1] - 1.0;
        (a * a + b * b + c * c + d * d).sqrt()
    }
}

/// Eigenvalue of the periodic problem with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub lambda: f64,
    pub multiplicity: usize,
}

const DOUBLE_ROOT_TOL: f64 = 1e-8;
const BISECT_REL: f64 = 1e-10;

fn bisect(m: &Monodromy, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BISECT_REL * hi.abs() {
            return mid;
        }
        let fm = m.characteristic(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimisation of `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..300 {
        if (b - a) <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn roots_on_grid(m: &Monodromy, grid: &[f64]) -> Vec<Root> {
    let vals: Vec<f64> = grid.par_iter().map(|&l| m.characteristic(l)).collect();
    let mut roots = Vec::new();
    let n = grid.len();
    for i in 0..n {
        if vals[i] == 0.0 {
            roots.push(Root { lambda: grid[i], multiplicity: 1 });
            continue;
        }
        if i + 1 < n && vals[i + 1] != 0.0 && (vals[i] < 0.0) != (vals[i + 1] < 0.0) {
            roots.push(Root { lambda: bisect(m, grid[i], grid[i + 1], vals[i]), multiplicity: 1 });
        }
        // interior extremum of the same sign as its neighbours: a hidden pair or a touching root
        if i >= 1 && i + 1 < n {
            let (l, c, r) = (vals[i - 1], vals[i], vals[i + 1]);
            let same_sign = (l < 0.0) == (c < 0.0) && (c < 0.0) == (r < 0.0);
            let is_min = c > 0.0 && c <= l && c <= r;
            let is_max = c < 0.0 && c >= l && c >= r;
            if same_sign && (is_min || is_max) {
                let sign = if is_min { 1.0 } else { -1.0 };
                let (x, fx) = golden_min(|t| sign * m.characteristic(t), grid[i - 1], grid[i + 1]);
                if fx < 0.0 {
                    let fl = m.characteristic(grid[i - 1]);
                    roots.push(Root { lambda: bisect(m, grid[i - 1], x, fl), multiplicity: 1 });
                    roots.push(Root { lambda: bisect(m, x, grid[i + 1], -fl), multiplicity: 1 });
                } else if is_min {
                    let (y, defect) = golden_min(|t| m.identity_defect(t), grid[i - 1], grid[i + 1]);
                    if defect <= DOUBLE_ROOT_TOL {
                        roots.push(Root { lambda: y, multiplicity: 2 });
                    }
                }
            }
        }
    }
    roots.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    // a root found both by an extremum search and a neighbouring bracket
    roots.dedup_by(|b, a| (a.lambda - b.lambda).abs() <= 1e-8 * a.lambda.abs().max(1.0));
    roots
}

/// Periodic eigenvalues of `−Δ_{W,V}` in `(0, λ_max]`: zeros of
/// `det(Φ(λ) − I)` located on `grid`, refined to relative `1e−10`.
/// Touching zeros with `Φ(λ) = I` (to `1e−8`) are reported with
/// multiplicity 2. Fails with `GridTooCoarse` when inserting midpoints
/// into the grid changes the root count.
pub fn shooting_spectrum(w: &MeasureFunction, v: &MeasureFunction, lambda_max: f64, grid: &[f64]) -> Result<Vec<Root>> {
    let mut g: Vec<f64> = grid.iter().copied().filter(|&l| l > 0.0 && l <= lambda_max).collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    if g.len() < 3 {
        return Err(Error::InvalidArgument("shooting grid needs at least three positive points".into()));
    }
    let m = Monodromy::new(w, v);
    let roots = roots_on_grid(&m, &g);
    let mut fine = Vec::with_capacity(2 * g.len());
    for p in g.windows(2) {
        fine.push(p[0]);
        fine.push(0.5 * (p[0] + p[1]));
    }
    fine.push(*g.last().expect("non-empty"));
    let check = roots_on_grid(&m, &fine);
    let count = |r: &[Root]| r.iter().map(|x| x.multiplicity).sum::<usize>();
    if count(&roots) != count(&check) {
        return Err(Error::GridTooCoarse(format!(
            "{} roots on the grid, {} after inserting midpoints",
            count(&roots),
            count(&check)
        )));
    }
    Ok(roots)
}

/// Uniform grid of `points` values on `(0, λ_max]`.
pub fn uniform_grid(lambda_max: f64, points: usize) -> Vec<f64> {
    (1..=points).map(|i| lambda_max * i as f64 / points as f64).collect()
}

/// Roots expanded by multiplicity, ascending.
pub fn expand(roots: &[Root]) -> Vec<f64> {
    roots.iter().flat_map(|r| std::iter::repeat_n(r.lambda, r.multiplicity)).collect()
}

/// `k,lambda,multiplicity`.
pub fn write_roots(roots: &[Root], out: &mut impl Write) -> Result<()> {
    writeln!(out, "k,lambda,multiplicity")?;
    for (k, r) in roots.iter().enumerate() {
        writeln!(out, "{},{},{}", k + 1, r.lambda, r.multiplicity)?;
    }
    Ok(())
}
