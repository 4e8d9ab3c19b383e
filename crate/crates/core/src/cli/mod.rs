//! The `wvtorus` command line: one JSON scene file, one command, CSV and SVG
//! outputs plus a run manifest.
//!
//! Exit codes: `0` success, `2` rejected input (the message names the
//! violated invariant), `3` numerical failure or a failed check.

mod config;
mod plot;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub use config::{
    CoefficientSpec, Coefficients, EigSpec, FunctionSpec, IntegrateSpec, MeasureSpec, MeshSpec, OperatorSpec,
    SampleSpec, Scene, SceneConfig, SemigroupSpec, ShootSpec, SolveMode, SolveSpec, SpdeSpec, Step,
};
pub use plot::{step_svg, Series};

use crate::calculus::SobolevFunction;
use crate::galerkin::{write_solution, GalerkinSystem, HatBasis};
use crate::measure::{integrate_product, Interval, Mesh, MeshFunction, Side};
use crate::spde::{spde_ensemble_report, write_cov_csv, write_mean_csv, CovarianceOracle, SpdeProblem};
use crate::spectral::{eig, shooting_spectrum, uniform_grid, write_roots, Operator};
use crate::stochastic::{
    cov_bm, cov_bridge, empirical_cov, empirical_jump_variance, sample_bm_from, sample_bridge_from, sample_cov,
    semigroup_apply, simple_form, stoch_integral_ibp, stoch_integral_simple, white_noise_apply, write_cov_summary,
    SamplePath,
};
use crate::{Error, Result};

/// JSON schema of scene files.
pub const SCENE_SCHEMA: &str = include_str!("../../schema/scene.schema.json");

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Eig,
    Shoot,
    Solve,
    SampleBm,
    SampleBridge,
    Integrate,
    SemigroupCheck,
    Spde,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Eig => "eig",
            Command::Shoot => "shoot",
            Command::Solve => "solve",
            Command::SampleBm => "sample-bm",
            Command::SampleBridge => "sample-bridge",
            Command::Integrate => "integrate",
            Command::SemigroupCheck => "semigroup-check",
            Command::Spde => "spde",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wvtorus", version, about = "Stieltjes calculus, Galerkin solvers and W-Brownian motion on the torus")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Scene file (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to the scene's `out_dir`, else `./out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the scene's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for path-parallel work.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Entry point of the binary.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return EXIT_VALIDATION;
        }
    }
    run(cli.command, &cli.config, cli.out.as_deref(), cli.seed)
}

/// Runs one command; diagnostics go to standard error.
pub fn run(command: Command, config_path: &Path, out: Option<&Path>, seed: Option<u64>) -> i32 {
    match execute(command, config_path, out, seed) {
        Ok(report) => {
            for f in &report.failures {
                eprintln!("check failed: {f}");
            }
            if report.failures.is_empty() {
                EXIT_OK
            } else {
                EXIT_NUMERICAL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub outputs: Vec<String>,
    pub summary: Map<String, Value>,
    pub failures: Vec<String>,
}

struct Ctx {
    out: PathBuf,
    report: RunReport,
}

impl Ctx {
    fn write(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.out.join(name))?);
        f(&mut w)?;
        w.flush()?;
        self.report.outputs.push(name.to_string());
        Ok(())
    }

    fn svg(&mut self, name: &str, title: &str, series: &[Series]) -> Result<()> {
        let text = step_svg(title, series);
        self.write(name, |w| Ok(w.write_all(text.as_bytes())?))
    }

    fn put(&mut self, key: &str, v: Value) {
        self.report.summary.insert(key.to_string(), v);
    }

    fn fail(&mut self, msg: String) {
        self.report.failures.push(msg);
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses and validates the scene, runs the command and writes the manifest.
pub fn execute(command: Command, config_path: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<RunReport> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let hash = hex(&Sha256::digest(text.as_bytes()));
    let mut config = SceneConfig::parse(&text)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let dir = config_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let scene = config.validate(&dir)?;
    let out_dir = match (out, &scene.config.out_dir) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) => scene.dir.join(o),
        (None, None) => PathBuf::from("out"),
    };
    fs::create_dir_all(&out_dir)?;
    let mut ctx = Ctx { out: out_dir.clone(), report: RunReport { out_dir, ..Default::default() } };
    match command {
        Command::Validate => validate(&scene, &mut ctx)?,
        Command::Eig => run_eig(&scene, &mut ctx)?,
        Command::Shoot => run_shoot(&scene, &mut ctx)?,
        Command::Solve => run_solve(&scene, &mut ctx)?,
        Command::SampleBm => run_sample(&scene, &mut ctx, false)?,
        Command::SampleBridge => run_sample(&scene, &mut ctx, true)?,
        Command::Integrate => run_integrate(&scene, &mut ctx)?,
        Command::SemigroupCheck => run_semigroup(&scene, &mut ctx)?,
        Command::Spde => run_spde(&scene, &mut ctx)?,
    }
    let mesh = &scene.mesh;
    let (w, v) = (mesh.w(), mesh.v());
    let atoms = |mu: &crate::measure::MeasureFunction| -> Value {
        mu.atoms().iter().map(|a| json!({"x": a.x, "mass": a.mass})).collect()
    };
    let manifest = json!({
        "command": command.name(),
        "config": config_path.display().to_string(),
        "config_sha256": hash,
        "seed": scene.config.seed,
        "versions": {
            "wvtorus": env!("CARGO_PKG_VERSION"),
            "manifest": 1,
        },
        "mesh": {
            "n": scene.config.mesh.n,
            "cells": mesh.n_cells(),
            "simpson_panels": scene.config.mesh.simpson_panels,
        },
        "measures": {
            "W(1)": w.eval(1.0, Side::Right),
            "W(1-)": w.eval(1.0, Side::Left),
            "V(1)": v.eval(1.0, Side::Right),
            "V(1-)": v.eval(1.0, Side::Left),
            "W_atoms": atoms(w),
            "V_atoms": atoms(v),
        },
        "outputs": ctx.report.outputs,
        "summary": Value::Object(ctx.report.summary.clone()),
        "failures": ctx.report.failures,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    ctx.write("manifest.json", |f| Ok(writeln!(f, "{text}")?))?;
    Ok(ctx.report)
}

fn require<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T> {
    block.as_ref().ok_or_else(|| Error::Config(format!("this command needs a \"{name}\" block")))
}

/// Mesh node at `t`; `t = 1` allowed only when `closing` is set.
fn node_of(mesh: &Mesh, t: f64, closing: bool) -> Result<usize> {
    if closing && t == 1.0 {
        return Ok(mesh.n_cells());
    }
    mesh.node_index(t)
        .ok_or_else(|| Error::InvalidArgument(format!("{t} is not a mesh node (add it to mesh.extra_nodes)")))
}

fn sobolev_series(label: String, f: &SobolevFunction) -> Series {
    let mesh = f.mesh();
    let end = f.eval(1.0, Side::Left);
    let mut left = f.left_values();
    left.push(end);
    let mut right = f.node_values();
    right.push(end);
    Series { label, x: mesh.points().to_vec(), left, right }
}

fn path_series(p: &SamplePath) -> Series {
    Series {
        label: format!("path {}", p.path_id),
        x: p.mesh().points().to_vec(),
        left: p.left_values().to_vec(),
        right: p.values().to_vec(),
    }
}

fn validate(scene: &Scene, ctx: &mut Ctx) -> Result<()> {
    let mesh = &scene.mesh;
    let sys = GalerkinSystem::assemble(mesh.clone(), &scene.a(), &scene.kappa2(), 0.0, false)?;
    SpdeProblem::new(mesh.clone(), &scene.kappa2(), &scene.h()).map(|_| ()).or_else(|e| match e {
        // the SPDE needs κ² > 0; a scene for other commands may use κ² = 0
        Error::CoefficientBounds(_) => Ok(()),
        other => Err(other),
    })?;
    let (w, v) = (mesh.w(), mesh.v());
    let mut rows: Vec<(String, f64)> = vec![
        ("cells".into(), mesh.n_cells() as f64),
        ("W(1)".into(), w.eval(1.0, Side::Right)),
        ("W(1-)".into(), w.eval(1.0, Side::Left)),
        ("V(1)".into(), v.eval(1.0, Side::Right)),
        ("V(1-)".into(), v.eval(1.0, Side::Left)),
        ("inf_a".into(), sys.a0()),
        ("inf_kappa2".into(), sys.kappa0()),
    ];
    for a in w.atoms() {
        rows.push((format!("W_atom@{}", a.x), a.mass));
    }
    for a in v.atoms() {
        rows.push((format!("V_atom@{}", a.x), a.mass));
    }
    for (k, val) in &rows {
        ctx.put(k, json!(val));
    }
    ctx.write("validate.csv", |f| {
        writeln!(f, "quantity,value")?;
        for (k, val) in &rows {
            writeln!(f, "{k},{val}")?;
        }
        Ok(())
    })
}

fn run_eig(scene: &Scene, ctx: &mut Ctx) -> Result<()> {
    let spec = scene.config.eig.clone().unwrap_or_default();
    let sys = GalerkinSystem::assemble(scene.mesh.clone(), &scene.a(), &scene.kappa2(), 0.0, spec.dirichlet)?;
    let op = match spec.operator {
        OperatorSpec::Laplacian => Operator::Laplacian,
        OperatorSpec::Full => Operator::Full,
    };
    let e = eig(&sys, spec.k, op)?;
    ctx.write("eig.csv", |f| e.write_csv(f))?;
    for k in 0..spec.vectors.min(e.len()) {
        ctx.write(&format!("eig_vector_{k}.csv"), |f| e.write_vector_csv(k, f))?;
    }
    let series: Vec<Series> =
        e.vectors.iter().enumerate().take(4).map(|(k, v)| sobolev_series(format!("k = {k}"), v)).collect();
    ctx.svg("eig.svg", "eigenfunctions", &series)?;
    ctx.put("eigenvalues", json!(e.eigenvalues));
    Ok(())
}

fn run_shoot(scene: &Scene, ctx: &mut Ctx) -> Result<()> {
    let spec = scene.config.shoot.clone().unwrap_or_default();
    if !(spec.lambda_max > 0.0) || spec.grid_points < 2 {
        return Err(Error::Config("shoot: need lambda_max > 0 and grid_points >= 2".into()));
    }
    let mesh = &scene.mesh;
    let grid = uniform_grid(spec.lambda_max, spec.grid_points);
    let roots = shooting_spectrum(mesh.w(), mesh.v(), spec.lambda_max, &grid)?;
    ctx.write("shoot.csv", |f| write_roots(&roots, f))?;
    ctx.put("roots", json!(roots.iter().map(|r| json!([r.lambda, r.multiplicity])).collect::<Vec<_>>()));
    Ok(())
}

fn run_solve(scene: &Scene, ctx: &mut Ctx) -> Result<()> {
    let spec = require(&scene.config.solve, "solve")?;
    let mesh = &scene.mesh;
    let mut f = spec.f.on_mesh(mesh, Side::Right);
    if spec.center {
        let mean = f.mean(mesh.v())?;
        f = f.add(&crate::measure::PiecewiseFunction::constant(mesh.clone(), -mean, Side::Right))?;
    }
    let sys = GalerkinSystem::assemble(mesh.clone(), &scene.a(), &scene.kappa2(), spec.lambda, spec.dirichlet)?;
    let u = match spec.mode {
        SolveMode::Elliptic => sys.solve_elliptic(&f)?,
        SolveMode::Fredholm => {
            let sol = sys.solve_mean_zero(&f)?;
            ctx.put("kernel_dim", json!(sol.kernel_dim));
            sol.u
        }
    };
    let residual = sys.weak_residual(&u, &f)?;
    let report = sys.energy_check(&u, &f)?;
    ctx.put("weak_residual", json!(residual));
    ctx.put("norm_v", json!(report.norm_v));
    ctx.put("norm_12", json!(report.norm_12));
    ctx.put("f_norm_v", json!(report.f_norm_v));
    ctx.put("beta", json!(report.beta));
    ctx.put("bound_violations", json!(report.violations));
    for v in report.violations.clone() {
        ctx.fail(v);
    }
    if residual > 1e-8 * (1.0 + report.f_norm_v) {
        ctx.fail(format!("weak residual {residual:e}"));
    }
    ctx.write("solve.csv", |w| write_solution(&u, w))?;
    ctx.svg("solve.svg", "Galerkin solution", &[sobolev_series("u".into(), &u)])
}

fn run_sample(scene: &Scene, ctx: &mut Ctx, bridge: bool) -> Result<()> {
    let spec = scene.config.sample.clone().unwrap_or_default();
    let mesh = &scene.mesh;
    let seed = scene.config.seed;
    let paths = if bridge {
        sample_bridge_from(mesh, seed, spec.first_path, spec.n_paths)
    } else {
        sample_bm_from(mesh, seed, spec.first_path, spec.n_paths)
    };
    let name = if bridge { "sample-bridge" } else { "sample-bm" };
    let w = mesh.w();
    let mut rows = Vec::with_capacity(spec.pairs.len());
    for &(t, s) in &spec.pairs {
        node_of(mesh, t, true)?;
        node_of(mesh, s, true)?;
        let est = empirical_cov(&paths, t, s)?;
        let exact = if bridge { cov_bridge(w, t, s) } else { cov_bm(w, t, s) };
        rows.push((t, s, est, exact));
    }
    ctx.write(&format!("{name}.csv"), |f| write_cov_summary(&rows, f))?;
    let mut jumps = vec![];
    for a in w.atoms() {
        let e = empirical_jump_variance(&paths, a.x)?;
        // S(d) − S(d−) = ΔB(d) − (m/W(1))·B(1)
        let exact = if bridge { a.mass - a.mass * a.mass / w.total() } else { a.mass };
        jumps.push(json!({"x": a.x, "variance": e.value, "se": e.se, "mass": a.mass, "exact": exact}));
        if let Some(k) = spec.tolerance_se {
            if !e.within(exact, k) {
                ctx.fail(format!("jump variance at {}: {} vs {exact} (se {})", a.x, e.value, e.se));
            }
        }
    }
    ctx.put("jump_variance", Value::Array(jumps));
    if let Some(k) = spec.tolerance_se {
        for (t, s, e, exact) in &rows {
            if !e.within(*exact, k) {
                ctx.fail(format!("Cov({t}, {s}) = {} vs {exact} (se {})", e.value, e.se));
            }
        }
    }
    if bridge {
        let pinned = paths.iter().filter(|p| p.values()[0] == 0.0 && p.values()[mesh.n_cells()] == 0.0).count();
        ctx.put("pinned_endpoints", json!(pinned));
        if pinned != paths.len() {
            ctx.fail(format!("{} bridges not pinned at 0 and 1", paths.len() - pinned));
        }
    }
    ctx.put("n_paths", json!(paths.len()));
    let shown: Vec<&SamplePath> = paths.iter().take(spec.write_paths).collect();
    for p in &shown {
        ctx.write(&format!("{name}_path_{}.csv", p.path_id), |f| p.write_csv(f))?;
    }
    if !shown.is_empty() {
        let series: Vec<Series> = shown.iter().take(6).map(|p| path_series(p)).collect();
        ctx.svg(&format!("{name}.svg"), name, &series)?;
    }
    Ok(())
}

fn run_integrate(scene: &Scene, ctx: &mut Ctx) -> Result<()> {
    let spec = require(&scene.config.integrate, "integrate")?;
    let mesh = &scene.mesh;
    if spec.hat_node == 0 || spec.hat_node >= mesh.n_cells() {
        return Err(Error::InvalidArgument(format!(
            "integrate.hat_node must lie in 1..{} so that the hat vanishes at 0",
            mesh.n_cells()
        )));
    }
    let g = spec.g.cellwise(mesh, Side::Left);
    let hat = HatBasis::new(mesh.clone(), false).function(spec.hat_node)?;
    let hat_simple = simple_form(&hat)?;
    let paths = sample_bm_from(mesh, scene.config.seed, spec.first_path, spec.n_paths);
    let rows: Vec<(u64, f64, f64, f64, f64)> = paths
        .par_iter()
        .map(|p| {
            Ok((
                p.path_id,
                stoch_integral_simple(&g, p)?,
                stoch_integral_ibp(&hat, p, 1.0)?,
                stoch_integral_simple(&hat_simple, p)?,
                white_noise_apply(p, &hat)?,
            ))
        })
        .collect::<Result<_>>()?;
    ctx.write("integrate.csv", |f| {
        writeln!(f, "path_id,simple_g,ibp_hat,simple_hat,white_noise_hat")?;
        for (id, a, b, c, d) in &rows {
            writeln!(f, "{id},{a},{b},{c},{d}")?;
        }
        Ok(())
    })?;
    let xs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let var = sample_cov(&xs, &xs);
    let exact = integrate_product(&[&g, &g], mesh.w(), Interval::circle())?;
    let gap = rows.iter().map(|r| (r.2 - r.3).abs().max((r.3 - r.4).abs())).fold(0.0, f64::max);
    ctx.put("isometry", json!({"variance": var.value, "se": var.se, "exact": exact}));
    ctx.put("max_ibp_simple_gap", json!(gap));
    if let Some(k) = spec.tolerance_se {
        if !var.within(exact, k) {
            ctx.fail(format!("isometry: Var = {} vs ∫g² dW = {exact} (se {})", var.value, var.se));
        }
    }
    if gap > 1e-10 {
        ctx.fail(format!("pathwise summation identity off by {gap:e}"));
    }
    Ok(())
}

fn run_semigroup(scene: &Scene, ctx: &mut Ctx) -> Result<()> {
    let spec = require(&scene.config.semigroup, "semigroup")?;
    if !(spec.s <= spec.u && spec.u <= spec.t) {
        return Err(Error::InvalidArgument(format!("need s ≤ u ≤ t, got {}, {}, {}", spec.s, spec.u, spec.t)));
    }
    let w = scene.mesh.w();
    let f = |x: f64| spec.f.eval(x);
    let m = spec.x_points - 1;
    let xs: Vec<f64> = (0..=m).map(|k| spec.x_min + (spec.x_max - spec.x_min) * k as f64 / m as f64).collect();
    let q = spec.quadrature_points;
    let direct = semigroup_apply(w, spec.s, spec.t, &f, &xs, q)?;
    let inner = |y: f64| semigroup_apply(w, spec.u, spec.t, &f, &[y], q).map_or(f64::NAN, |v| v[0]);
    let composed = semigroup_apply(w, spec.s, spec.u, &inner, &xs, q)?;
    let ones = semigroup_apply(w, spec.s, spec.t, &|_| 1.0, &xs, q)?;
    let residual = direct.iter().zip(&composed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let norm = ones.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    ctx.write("semigroup-check.csv", |out| {
        writeln!(out, "x,T_st_f,T_su_T_ut_f,abs_diff")?;
        for ((x, a), b) in xs.iter().zip(&direct).zip(&composed) {
            writeln!(out, "{x},{a},{b},{}", (a - b).abs())?;
        }
        Ok(())
    })?;
    ctx.put("chapman_kolmogorov_residual", json!(residual));
    ctx.put("normalization_error", json!(norm));
    if !(residual <= spec.tolerance) {
        ctx.fail(format!("Chapman–Kolmogorov residual {residual:e} exceeds {:e}", spec.tolerance));
    }
    if !(norm <= 1e-8) {
        ctx.fail(format!("kernel normalization off by {norm:e}"));
    }
    Ok(())
}

fn run_spde(scene: &Scene, ctx: &mut Ctx) -> Result<()> {
    let spec = require(&scene.config.spde, "spde")?;
    let mesh = &scene.mesh;
    let problem = SpdeProblem::new(mesh.clone(), &scene.kappa2(), &scene.h())?;
    let pairs = spec
        .pairs
        .iter()
        .map(|&(s, t)| Ok((node_of(mesh, s, false)?, node_of(mesh, t, false)?)))
        .collect::<Result<Vec<_>>>()?;
    let sols = problem.solve_ensemble(scene.config.seed, spec.first_path, spec.n_paths)?;
    let report = spde_ensemble_report(&problem, &sols, &pairs)?;
    let oracle = if spec.oracle { Some(CovarianceOracle::new(&problem)?) } else { None };
    ctx.write("spde.csv", |f| write_cov_csv(&report, oracle.as_ref(), f))?;
    ctx.write("spde_mean.csv", |f| write_mean_csv(&report, f))?;
    for s in sols.iter().take(spec.write_paths) {
        ctx.write(&format!("spde_path_{}.csv", s.path.path_id), |f| s.u.write_csv(f))?;
    }
    if spec.write_paths > 0 {
        let series: Vec<Series> =
            sols.iter().take(spec.write_paths.min(6)).map(|s| sobolev_series(format!("path {}", s.path.path_id), &s.u)).collect();
        ctx.svg("spde.svg", "SPDE realisations", &series)?;
    }
    let residual = sols.iter().map(|s| problem.weak_residual(s)).fold(0.0, f64::max);
    ctx.put("n_paths", json!(sols.len()));
    ctx.put("max_weak_residual", json!(residual));
    ctx.put("bound_violations", json!(report.bound_violations.len()));
    ctx.put("structure_violations", json!(report.structure_violations.len()));
    for v in report.bound_violations.iter().chain(&report.structure_violations).take(10) {
        ctx.fail(format!("path {}: {}", v.path_id, v.what));
    }
    if residual > 1e-9 {
        ctx.fail(format!("discrete weak identity off by {residual:e}"));
    }
    if let (Some(k), Some(o)) = (spec.tolerance_se, &oracle) {
        for (i, j, e) in &report.cov_grid {
            let exact = o.cov(*i, *j);
            if !e.within(exact, k) {
                ctx.fail(format!("Cov(u(x_{i}), u(x_{j})) = {} vs {exact} (se {})", e.value, e.se));
            }
        }
    }
    Ok(())
}
