mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::{two_atom, identity_w, mesh};
use proptest::prelude::*;
use wvtorus::measure::{Mesh, PiecewiseFunction, Side};
use wvtorus::spde::{solve_spde, spde_ensemble_report, CovarianceOracle, SpdeProblem};
use wvtorus::stochastic::SamplePath;
use wvtorus::Error;

/// `Σ_k 2 sin(kπs) sin(kπt)/(κ² + k²π²)²`: the covariance of the pinned
/// problem on the line, independent of any mesh.
fn continuum_cov(kappa2: f64, s: f64, t: f64) -> f64 {
    (1..20_000)
        .map(|k| {
            let kp = k as f64 * PI;
            2.0 * (kp * s).sin() * (kp * t).sin() / (kappa2 + kp * kp).powi(2)
        })
        .sum()
}

#[test]
fn zero_noise_gives_zero_and_scaling_is_linear() {
    let m = mesh(two_atom(), 40);
    let p = SpdeProblem::constant(m.clone(), 1.5, 0.8).unwrap();
    let zero = p.solve_path(&SamplePath::zero(m.clone())).unwrap();
    assert!(zero.u.node_values().iter().all(|v| *v == 0.0));
    let path = SamplePath::motion(m, 4, 9);
    let u = p.solve_path(&path).unwrap().u.node_values();
    let u3 = p.solve_path(&path.scaled(-3.0)).unwrap().u.node_values();
    for (a, b) in u.iter().zip(u3) {
        assert!((b + 3.0 * a).abs() < 1e-10 * (1.0 + a.abs()));
    }
}

#[test]
fn weak_identity_holds_per_path() {
    let m = mesh(two_atom(), 64);
    let p = SpdeProblem::constant(m, 1.0, 1.0).unwrap();
    for s in p.solve_ensemble(3, 0, 20).unwrap() {
        assert!(p.weak_residual(&s) < 1e-9);
        assert_eq!(s.u.c(), 0.0);
    }
}

#[test]
fn discrete_oracle_tracks_the_continuum_series() {
    let m = mesh(identity_w(), 64);
    let p = SpdeProblem::constant(m.clone(), 1.0, 1.0).unwrap();
    let oracle = CovarianceOracle::new(&p).unwrap();
    for &(i, j) in &[(16, 16), (32, 32), (16, 48), (8, 40)] {
        let exact = continuum_cov(1.0, m.point(i), m.point(j));
        assert!((oracle.cov(i, j) - exact).abs() < 1e-2 * exact, "({i},{j}): {} vs {exact}", oracle.cov(i, j));
    }
}

#[test]
fn atomic_realizations_respect_structure_and_bounds() {
    let m = mesh(two_atom(), 64);
    let p = SpdeProblem::constant(m.clone(), 1.0, 1.0).unwrap();
    let sols = p.solve_ensemble(11, 0, 1000).unwrap();
    let pairs: Vec<(usize, usize)> = (1..m.n_cells()).step_by(8).map(|i| (i, i)).collect();
    let rep = spde_ensemble_report(&p, &sols, &pairs).unwrap();
    assert!(rep.structure_violations.is_empty(), "{:?}", rep.structure_violations.first());
    assert!(rep.bound_violations.is_empty(), "{:?}", rep.bound_violations.first());
    for (i, e) in rep.mean_path.iter().enumerate().skip(1) {
        assert!(e.within(0.0, 4.0), "mean at node {i}: {e:?}");
    }
    assert!(rep.cov_grid.iter().all(|(_, _, e)| e.value > 0.0));
    for s in &sols {
        for i in 1..m.n_cells() {
            if !m.is_w_atom(i) {
                assert_eq!(s.u.jump_at_node(i), 0.0);
            }
        }
    }
}

#[test]
fn ensembles_are_reproducible() {
    let m = mesh(two_atom(), 32);
    let kappa2 = PiecewiseFunction::constant(m.clone(), 2.0, Side::Right);
    let h = PiecewiseFunction::constant(m.clone(), 1.0, Side::Left);
    let a = solve_spde(m.clone(), &kappa2, &h, 5, 10).unwrap();
    let b = solve_spde(m, &kappa2, &h, 5, 10).unwrap();
    for (x, y) in a.iter().zip(&b) {
        let bits = |v: Vec<f64>| v.into_iter().map(f64::to_bits).collect::<Vec<_>>();
        assert_eq!(bits(x.u.node_values()), bits(y.u.node_values()));
    }
}

#[test]
fn coefficient_preconditions() {
    let m = mesh(identity_w(), 16);
    assert!(matches!(SpdeProblem::constant(m.clone(), 0.0, 1.0), Err(Error::CoefficientBounds(_))));
    assert!(matches!(SpdeProblem::constant(m, 1.0, 0.0), Err(Error::CoefficientBounds(_))));
}

fn varying(m: &Arc<Mesh>, vals: &[f64], side: Side) -> PiecewiseFunction {
    PiecewiseFunction::from_cell_constants(m.clone(), &vals[..m.n_cells()], side).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn variable_coefficients_keep_weak_identity_and_bound(
        k in prop::collection::vec(0.2f64..3.0, 40),
        h in prop::collection::vec(0.3f64..3.0, 40),
        path_id in 0u64..10_000,
    ) {
        let m = mesh(two_atom(), 24);
        let p = SpdeProblem::new(m.clone(), &varying(&m, &k, Side::Right), &varying(&m, &h, Side::Left)).unwrap();
        let sols = p.solve_ensemble(1, path_id, 3).unwrap();
        for s in &sols {
            prop_assert!(p.weak_residual(s) < 1e-9);
        }
        let rep = spde_ensemble_report(&p, &sols, &[]).unwrap();
        prop_assert!(rep.bound_violations.is_empty());
        prop_assert!(rep.structure_violations.is_empty());
    }
}
