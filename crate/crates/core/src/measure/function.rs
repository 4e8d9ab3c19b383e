use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which one-sided limit to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Limit from the right; the càdlàg value.
    Right,
    /// Limit from the left; the càglàd value.
    Left,
}

/// Regularity class of a measure function, deciding its value at a jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Continuity {
    Cadlag,
    Caglad,
}

impl Continuity {
    pub fn side(self) -> Side {
        match self {
            Continuity::Cadlag => Side::Right,
            Continuity::Caglad => Side::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub x: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub mass: f64,
}

/// Strictly increasing periodic function on the circle: a continuous
/// piecewise-linear part plus finitely many jumps, normalised to vanish at 0.
///
/// Doubles as the Borel measure it induces on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFunction {
    continuity: Continuity,
    segments: Vec<Segment>,
    atoms: Vec<Atom>,
    // continuous part at each segment start
    seg_base: Vec<f64>,
    // atom mass strictly before atom j
    atom_prefix: Vec<f64>,
    cont_total: f64,
    total: f64,
}

impl MeasureFunction {
    pub fn new(continuity: Continuity, segments: Vec<Segment>, mut atoms: Vec<Atom>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidMeasure("no segments given; the continuous part must cover [0,1)".into()));
        }
        if segments[0].x != 0.0 {
            return Err(Error::InvalidMeasure(format!(
                "first segment must start at 0, got {}",
                segments[0].x
            )));
        }
        for (i, s) in segments.iter().enumerate() {
            if !s.x.is_finite() || !(0.0..1.0).contains(&s.x) {
                return Err(Error::InvalidMeasure(format!("segment breakpoint {} outside [0,1)", s.x)));
            }
            if !(s.slope.is_finite() && s.slope > 0.0) {
                return Err(Error::InvalidMeasure(format!(
                    "strict monotonicity violated: slope {} on segment starting at {} (slopes must be > 0)",
                    s.slope, s.x
                )));
            }
            if i > 0 && s.x <= segments[i - 1].x {
                return Err(Error::InvalidMeasure(format!(
                    "segment breakpoints must be strictly increasing ({} after {})",
                    s.x,
                    segments[i - 1].x
                )));
            }
        }
        atoms.sort_by(|a, b| a.x.total_cmp(&b.x));
        for (j, a) in atoms.iter().enumerate() {
            if a.x == 0.0 {
                return Err(Error::InvalidMeasure(
                    "atom at the tagged origin: the measure function must satisfy F(0-) = F(0) = 0".into(),
                ));
            }
            if !(a.x.is_finite() && a.x > 0.0 && a.x < 1.0) {
                return Err(Error::InvalidMeasure(format!("atom location {} outside (0,1)", a.x)));
            }
            if !(a.mass.is_finite() && a.mass > 0.0) {
                return Err(Error::InvalidMeasure(format!("atom at {} has non-positive mass {}", a.x, a.mass)));
            }
            if j > 0 && a.x == atoms[j - 1].x {
                return Err(Error::InvalidMeasure(format!("duplicate atom location {}", a.x)));
            }
        }

        let mut seg_base = Vec::with_capacity(segments.len());
        let mut acc = 0.0;
        for (i, s) in segments.iter().enumerate() {
            seg_base.push(acc);
            let end = segments.get(i + 1).map_or(1.0, |n| n.x);
            acc += s.slope * (end - s.x);
        }
        let cont_total = acc;
        let mut atom_prefix = Vec::with_capacity(atoms.len());
        let mut mass = 0.0;
        for a in &atoms {
            atom_prefix.push(mass);
            mass += a.mass;
        }
        Ok(Self {
            continuity,
            segments,
            atoms,
            seg_base,
            atom_prefix,
            cont_total,
            total: cont_total + mass,
        })
    }

    /// `x ↦ x`, Lebesgue measure.
    pub fn identity(continuity: Continuity) -> Self {
        Self::new(continuity, vec![Segment { x: 0.0, slope: 1.0 }], Vec::new()).expect("identity is valid")
    }

    /// Identity plus the given atoms.
    pub fn identity_with_atoms(continuity: Continuity, atoms: Vec<Atom>) -> Result<Self> {
        Self::new(continuity, vec![Segment { x: 0.0, slope: 1.0 }], atoms)
    }

    pub fn continuity(&self) -> Continuity {
        self.continuity
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_continuous(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `F(1) − F(0)`, the total mass of the circle.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Total mass of the absolutely continuous part.
    pub fn continuous_total(&self) -> f64 {
        self.cont_total
    }

    fn segment_index(&self, x: f64) -> usize {
        // last segment with start <= x
        self.segments.partition_point(|s| s.x <= x).saturating_sub(1)
    }

    /// Continuous part at `x ∈ [0,1]`.
    pub fn continuous_part(&self, x: f64) -> f64 {
        if x >= 1.0 {
            return self.cont_total;
        }
        if x <= 0.0 {
            return 0.0;
        }
        let i = self.segment_index(x);
        let s = &self.segments[i];
        self.seg_base[i] + s.slope * (x - s.x)
    }

    /// Density of the continuous part on the piece containing `x`
    /// (the right-hand piece at a breakpoint).
    pub fn slope_at(&self, x: f64) -> f64 {
        self.segments[self.segment_index(x.clamp(0.0, 1.0))].slope
    }

    /// Segment breakpoints strictly inside `(a, b)`.
    pub fn breakpoints_in(&self, a: f64, b: f64) -> impl Iterator<Item = f64> + '_ {
        let start = self.segments.partition_point(|s| s.x <= a);
        self.segments[start..].iter().map(|s| s.x).take_while(move |&x| x < b)
    }

    /// Atom mass sitting exactly at `x` (0 if none).
    pub fn atom_mass(&self, x: f64) -> f64 {
        match self.atoms.binary_search_by(|a| a.x.total_cmp(&x)) {
            Ok(j) => self.atoms[j].mass,
            Err(_) => 0.0,
        }
    }

    /// Atoms located in `[a, b]`.
    pub fn atoms_in(&self, a: f64, b: f64) -> impl Iterator<Item = &Atom> + '_ {
        let start = self.atoms.partition_point(|at| at.x < a);
        self.atoms[start..].iter().take_while(move |at| at.x <= b)
    }

    fn atom_mass_below(&self, x: f64, inclusive: bool) -> f64 {
        let j = if inclusive {
            self.atoms.partition_point(|a| a.x <= x)
        } else {
            self.atoms.partition_point(|a| a.x < x)
        };
        if j == 0 {
            0.0
        } else {
            self.atom_prefix[j - 1] + self.atoms[j - 1].mass
        }
    }

    /// One-sided limit at `x`, extended periodically to all of ℝ through
    /// `F(x+1) − F(x) = F(1)`.
    pub fn eval(&self, x: f64, side: Side) -> f64 {
        let k = x.floor();
        let r = x - k;
        let base = k * self.total;
        if r == 0.0 {
            // F(0-) = F(0) = 0: no atom at the origin
            return base;
        }
        base + self.continuous_part(r) + self.atom_mass_below(r, side == Side::Right)
    }

    /// The function's own value: right limit for càdlàg, left limit for càglàd.
    pub fn value(&self, x: f64) -> f64 {
        self.eval(x, self.continuity.side())
    }

    /// Mass of `(a, b]` for `0 ≤ a ≤ b ≤ 1`.
    pub fn mass_open_closed(&self, a: f64, b: f64) -> f64 {
        self.eval(b, Side::Right) - self.eval(a, Side::Right)
    }

    /// Mass of `[a, b)` for `0 ≤ a ≤ b ≤ 1`.
    pub fn mass_closed_open(&self, a: f64, b: f64) -> f64 {
        self.eval(b, Side::Left) - self.eval(a, Side::Left)
    }
}

/// Smooth increasing shapes that can be tabulated onto a measure function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "expr", rename_all = "lowercase")]
pub enum TabulatedExpr {
    /// `slope · x`
    Linear { slope: f64 },
    /// `scale · exp(rate · x)`
    Exp {
        #[serde(default = "one")]
        scale: f64,
        rate: f64,
    },
    /// `exp(2x)`
    Exp2x,
}

fn one() -> f64 {
    1.0
}

impl TabulatedExpr {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TabulatedExpr::Linear { slope } => slope * x,
            TabulatedExpr::Exp { scale, rate } => scale * (rate * x).exp(),
            TabulatedExpr::Exp2x => (2.0 * x).exp(),
        }
    }
}

/// A smooth piece `expr` on `[x0, x1)` replaced by its piecewise-linear
/// interpolant on `points` equal sub-intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tabulation {
    pub x0: f64,
    pub x1: f64,
    #[serde(flatten)]
    pub expr: TabulatedExpr,
    pub points: usize,
}

impl Tabulation {
    fn pieces(&self) -> Result<Vec<Segment>> {
        if !(0.0 <= self.x0 && self.x0 < self.x1 && self.x1 <= 1.0) {
            return Err(Error::InvalidMeasure(format!(
                "tabulation range [{}, {}) not inside [0,1]",
                self.x0, self.x1
            )));
        }
        if self.points == 0 {
            return Err(Error::InvalidMeasure("tabulation needs at least one point".into()));
        }
        let n = self.points;
        let h = (self.x1 - self.x0) / n as f64;
        let node = |k: usize| if k == n { self.x1 } else { self.x0 + k as f64 * h };
        (0..n)
            .map(|k| {
                let (a, b) = (node(k), node(k + 1));
                let slope = (self.expr.eval(b) - self.expr.eval(a)) / (b - a);
                if !(slope.is_finite() && slope > 0.0) {
                    return Err(Error::InvalidMeasure(format!(
                        "strict monotonicity violated: tabulated expression is not increasing on [{a}, {b}]"
                    )));
                }
                Ok(Segment { x: a, slope })
            })
            .collect()
    }
}

/// Overlay tabulated pieces on a list of linear segments. Outside the
/// tabulated ranges the original slopes stay in effect.
pub fn apply_tabulations(segments: &[Segment], tabs: &[Tabulation]) -> Result<Vec<Segment>> {
    let slope_at = |segs: &[Segment], x: f64| -> Option<f64> {
        let i = segs.partition_point(|s| s.x <= x);
        if i == 0 {
            None
        } else {
            Some(segs[i - 1].slope)
        }
    };
    let mut out: Vec<Segment> = segments.to_vec();
    out.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut sorted = tabs.to_vec();
    sorted.sort_by(|a, b| a.x0.total_cmp(&b.x0));
    for w in sorted.windows(2) {
        if w[1].x0 < w[0].x1 {
            return Err(Error::InvalidMeasure("tabulation ranges overlap".into()));
        }
    }
    for t in &sorted {
        let resume = if t.x1 < 1.0 { slope_at(&out, t.x1) } else { None };
        out.retain(|s| s.x < t.x0 || s.x > t.x1);
        out.extend(t.pieces()?);
        if t.x1 < 1.0 && !out.iter().any(|s| s.x == t.x1) {
            let slope = resume.ok_or_else(|| {
                Error::InvalidMeasure(format!("no segment defines the slope after tabulated range at {}", t.x1))
            })?;
            out.push(Segment { x: t.x1, slope });
        }
        out.sort_by(|a, b| a.x.total_cmp(&b.x));
    }
    Ok(out)
}
