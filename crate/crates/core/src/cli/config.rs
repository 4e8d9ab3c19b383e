//! JSON scene files.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::measure::{
    apply_tabulations, Atom, Continuity, Mesh, MeasureFunction, PiecewiseFunction, Segment, Side, Tabulation,
    DEFAULT_SIMPSON_PANELS,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub side: Continuity,
    pub segments: Vec<Segment>,
    #[serde(default)]
    pub atoms: Vec<Atom>,
    /// Smooth pieces replaced by piecewise-linear tables.
    #[serde(default)]
    pub tabulate: Vec<Tabulation>,
}

impl MeasureSpec {
    pub fn build(&self, role: &str, expected: Continuity) -> Result<MeasureFunction> {
        if self.side != expected {
            return Err(Error::InvalidMeasure(format!(
                "{role} must be {}",
                match expected {
                    Continuity::Cadlag => "càdlàg (side = \"cadlag\")",
                    Continuity::Caglad => "càglàd (side = \"caglad\")",
                }
            )));
        }
        let segments = apply_tabulations(&self.segments, &self.tabulate)
            .map_err(|e| Error::InvalidMeasure(format!("{role}: {e}")))?;
        MeasureFunction::new(self.side, segments, self.atoms.clone()).map_err(|e| match e {
            Error::InvalidMeasure(m) => Error::InvalidMeasure(format!("{role}: {m}")),
            other => other,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    /// Uniform cells before atoms and extra nodes are inserted.
    pub n: usize,
    #[serde(default)]
    pub extra_nodes: Vec<f64>,
    #[serde(default = "default_panels")]
    pub simpson_panels: usize,
}

fn default_panels() -> usize {
    DEFAULT_SIMPSON_PANELS
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub x: f64,
    pub value: f64,
}

/// A coefficient: one number, or a step table `[{x, value}, …]` starting at 0.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Constant(f64),
    Steps(Vec<Step>),
}

impl Default for CoefficientSpec {
    fn default() -> Self {
        CoefficientSpec::Constant(1.0)
    }
}

fn step_value(steps: &[Step], x: f64) -> f64 {
    let i = steps.partition_point(|s| s.x <= x);
    steps[i.saturating_sub(1)].value
}

fn check_steps(steps: &[Step], what: &str) -> Result<()> {
    if steps.first().map(|s| s.x) != Some(0.0) {
        return Err(Error::Config(format!("{what}: step table must start at x = 0")));
    }
    if steps.windows(2).any(|w| !(w[0].x < w[1].x)) || steps.iter().any(|s| s.x >= 1.0 || !s.value.is_finite()) {
        return Err(Error::Config(format!("{what}: step breakpoints must increase inside [0, 1) with finite values")));
    }
    Ok(())
}

impl CoefficientSpec {
    /// Cellwise constant function; node values taken from the cell on `side`.
    pub fn build(&self, mesh: &Arc<Mesh>, side: Side, what: &str) -> Result<PiecewiseFunction> {
        match self {
            CoefficientSpec::Constant(v) => Ok(PiecewiseFunction::constant(mesh.clone(), *v, side)),
            CoefficientSpec::Steps(steps) => {
                check_steps(steps, what)?;
                let pts = mesh.points();
                let vals: Vec<f64> =
                    (0..mesh.n_cells()).map(|c| step_value(steps, 0.5 * (pts[c] + pts[c + 1]))).collect();
                PiecewiseFunction::from_cell_constants(mesh.clone(), &vals, side)
            }
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    #[serde(default)]
    pub a: CoefficientSpec,
    #[serde(default)]
    pub kappa2: CoefficientSpec,
    #[serde(default)]
    pub h: CoefficientSpec,
}

fn one() -> f64 {
    1.0
}

/// Scalar test functions used as data.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant { value: f64 },
    /// `amplitude·cos(2πkx)`
    Cos {
        k: u32,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude·sin(2πkx)`
    Sin {
        k: u32,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude·exp(−(x − center)²/(2·width²))`
    Gaussian {
        center: f64,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Periodic step table.
    Steps { steps: Vec<Step> },
}

impl FunctionSpec {
    pub fn check(&self, what: &str) -> Result<()> {
        match self {
            FunctionSpec::Steps { steps } => check_steps(steps, what),
            FunctionSpec::Gaussian { width, .. } if !(*width > 0.0) => {
                Err(Error::Config(format!("{what}: gaussian width must be positive")))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let tau = 2.0 * std::f64::consts::PI;
        match self {
            FunctionSpec::Constant { value } => *value,
            FunctionSpec::Cos { k, amplitude } => amplitude * (tau * *k as f64 * x).cos(),
            FunctionSpec::Sin { k, amplitude } => amplitude * (tau * *k as f64 * x).sin(),
            FunctionSpec::Gaussian { center, width, amplitude } => {
                amplitude * (-(x - center).powi(2) / (2.0 * width * width)).exp()
            }
            FunctionSpec::Steps { steps } => step_value(steps, x.rem_euclid(1.0)),
        }
    }

    /// Steps become cellwise constants, smooth shapes their nodal interpolant.
    pub fn on_mesh(&self, mesh: &Arc<Mesh>, side: Side) -> PiecewiseFunction {
        match self {
            FunctionSpec::Steps { steps } => {
                let pts = mesh.points();
                let vals: Vec<f64> =
                    (0..mesh.n_cells()).map(|c| step_value(steps, 0.5 * (pts[c] + pts[c + 1]))).collect();
                PiecewiseFunction::from_cell_constants(mesh.clone(), &vals, side).expect("sizes match")
            }
            FunctionSpec::Constant { value } => PiecewiseFunction::constant(mesh.clone(), *value, side),
            _ => PiecewiseFunction::interpolate(mesh.clone(), |x| self.eval(x), side),
        }
    }

    /// Cellwise constant version (Simpson cell averages for smooth shapes).
    pub fn cellwise(&self, mesh: &Arc<Mesh>, side: Side) -> PiecewiseFunction {
        match self {
            FunctionSpec::Steps { .. } | FunctionSpec::Constant { .. } => self.on_mesh(mesh, side),
            _ => PiecewiseFunction::cell_averages(mesh.clone(), |x| self.eval(x), side),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorSpec {
    Laplacian,
    Full,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigSpec {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_operator")]
    pub operator: OperatorSpec,
    #[serde(default)]
    pub dirichlet: bool,
    /// Eigenvectors written to `eig_vector_<k>.csv`.
    #[serde(default)]
    pub vectors: usize,
}

fn default_k() -> usize {
    5
}

fn default_operator() -> OperatorSpec {
    OperatorSpec::Laplacian
}

impl Default for EigSpec {
    fn default() -> Self {
        Self { k: default_k(), operator: default_operator(), dirichlet: false, vectors: 0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShootSpec {
    pub lambda_max: f64,
    #[serde(default = "default_grid")]
    pub grid_points: usize,
}

fn default_grid() -> usize {
    4000
}

impl Default for ShootSpec {
    fn default() -> Self {
        Self { lambda_max: 200.0, grid_points: default_grid() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    Elliptic,
    Fredholm,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSpec {
    pub f: FunctionSpec,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub dirichlet: bool,
    #[serde(default = "default_mode")]
    pub mode: SolveMode,
    /// Subtract the `V`-mean of `f` first.
    #[serde(default)]
    pub center: bool,
}

fn default_mode() -> SolveMode {
    SolveMode::Elliptic
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub n_paths: usize,
    #[serde(default)]
    pub first_path: u64,
    /// Individual paths written to `<command>_path_<id>.csv`.
    #[serde(default)]
    pub write_paths: usize,
    /// Node pairs `(t, s)` for the covariance summary.
    #[serde(default)]
    pub pairs: Vec<(f64, f64)>,
    /// Number of standard errors allowed; exceeding it is a numerical failure.
    pub tolerance_se: Option<f64>,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self { n_paths: 1000, first_path: 0, write_paths: 0, pairs: vec![], tolerance_se: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateSpec {
    pub n_paths: usize,
    #[serde(default)]
    pub first_path: u64,
    /// Integrand of the simple stochastic integral (cellwise constant).
    pub g: FunctionSpec,
    /// Hat function for the integration-by-parts comparison.
    #[serde(default = "default_hat")]
    pub hat_node: usize,
    pub tolerance_se: Option<f64>,
}

fn default_hat() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupSpec {
    pub s: f64,
    pub u: f64,
    pub t: f64,
    #[serde(default = "default_f")]
    pub f: FunctionSpec,
    #[serde(default = "default_xmin")]
    pub x_min: f64,
    #[serde(default = "default_xmax")]
    pub x_max: f64,
    #[serde(default = "default_xpoints")]
    pub x_points: usize,
    #[serde(default = "default_quad")]
    pub quadrature_points: usize,
    #[serde(default = "default_ck_tol")]
    pub tolerance: f64,
}

fn default_f() -> FunctionSpec {
    FunctionSpec::Gaussian { center: 0.0, width: 0.5, amplitude: 1.0 }
}
fn default_xmin() -> f64 {
    -3.0
}
fn default_xmax() -> f64 {
    3.0
}
fn default_xpoints() -> usize {
    61
}
fn default_quad() -> usize {
    2001
}
fn default_ck_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpdeSpec {
    pub n_paths: usize,
    #[serde(default)]
    pub first_path: u64,
    #[serde(default)]
    pub write_paths: usize,
    /// Node pairs `(x_i, x_j)` for the covariance grid.
    #[serde(default)]
    pub pairs: Vec<(f64, f64)>,
    /// Compare with the discrete spectral series.
    #[serde(default)]
    pub oracle: bool,
    pub tolerance_se: Option<f64>,
}

/// A complete scene.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub w: MeasureSpec,
    pub v: MeasureSpec,
    pub mesh: MeshSpec,
    #[serde(default)]
    pub coefficients: Coefficients,
    #[serde(default)]
    pub seed: u64,
    /// Output directory, relative to the config file.
    pub out_dir: Option<PathBuf>,
    pub eig: Option<EigSpec>,
    pub shoot: Option<ShootSpec>,
    pub solve: Option<SolveSpec>,
    pub sample: Option<SampleSpec>,
    pub integrate: Option<IntegrateSpec>,
    pub semigroup: Option<SemigroupSpec>,
    pub spde: Option<SpdeSpec>,
}

/// The config with its measures and mesh built and checked.
pub struct Scene {
    pub config: SceneConfig,
    pub dir: PathBuf,
    pub mesh: Arc<Mesh>,
}

impl SceneConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Builds `W`, `V` and the mesh; checks every data block that is present.
    pub fn validate(self, dir: &Path) -> Result<Scene> {
        let w = Arc::new(self.w.build("W", Continuity::Cadlag)?);
        let v = Arc::new(self.v.build("V", Continuity::Caglad)?);
        if self.mesh.simpson_panels == 0 {
            return Err(Error::Config("mesh.simpson_panels must be positive".into()));
        }
        let mesh = Mesh::build_full(w, v, self.mesh.n, &self.mesh.extra_nodes, self.mesh.simpson_panels)?;
        let c = &self.coefficients;
        let a = c.a.build(&mesh, Side::Left, "coefficients.a")?;
        let k2 = c.kappa2.build(&mesh, Side::Right, "coefficients.kappa2")?;
        let h = c.h.build(&mesh, Side::Left, "coefficients.h")?;
        for (name, f) in [("a", &a), ("h", &h)] {
            if f.cells().iter().any(|x| !(x.a > 0.0)) {
                return Err(Error::CoefficientBounds(format!("coefficients.{name} must be positive")));
            }
        }
        if k2.cells().iter().any(|x| x.a < 0.0) {
            return Err(Error::CoefficientBounds("coefficients.kappa2 must be non-negative".into()));
        }
        if let Some(s) = &self.solve {
            s.f.check("solve.f")?;
        }
        if let Some(s) = &self.integrate {
            s.g.check("integrate.g")?;
            if s.n_paths < 3 {
                return Err(Error::Config("integrate.n_paths must be at least 3".into()));
            }
        }
        if let Some(s) = &self.semigroup {
            s.f.check("semigroup.f")?;
            if !(s.x_min < s.x_max) || s.x_points < 2 {
                return Err(Error::Config("semigroup: need x_min < x_max and x_points >= 2".into()));
            }
        }
        if let Some(s) = &self.sample {
            if s.n_paths < 3 {
                return Err(Error::Config("sample.n_paths must be at least 3".into()));
            }
        }
        if let Some(s) = &self.spde {
            if s.n_paths < 3 {
                return Err(Error::Config("spde.n_paths must be at least 3".into()));
            }
        }
        Ok(Scene { config: self, dir: dir.to_path_buf(), mesh })
    }
}

impl Scene {
    pub fn a(&self) -> PiecewiseFunction {
        self.config.coefficients.a.build(&self.mesh, Side::Left, "a").expect("validated")
    }

    pub fn kappa2(&self) -> PiecewiseFunction {
        self.config.coefficients.kappa2.build(&self.mesh, Side::Right, "kappa2").expect("validated")
    }

    pub fn h(&self) -> PiecewiseFunction {
        self.config.coefficients.h.build(&self.mesh, Side::Left, "h").expect("validated")
    }
}
