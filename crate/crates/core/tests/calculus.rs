mod common;

use std::sync::Arc;

use common::{two_atom, identity_w, measure, mesh, rng, uniform_vec};
use proptest::prelude::*;
use wvtorus::calculus::{
    d_w_minus, dirichlet_inner, dual_apply, integration_by_parts_residual, kernel_section, poincare_gap,
    reproducing_kernel, sobolev_eval, DualFunctional, SobolevFunction, VPrimitive,
};
use wvtorus::measure::{CellFormula, Continuity, Mesh, PiecewiseFunction, SharedFn, Side};
use wvtorus::stochastic::{stoch_integral_ibp, SamplePath};
use wvtorus::Error;

fn two_atom_mesh(n: usize) -> Arc<Mesh> {
    mesh(two_atom(), n)
}

fn random_sobolev(m: &Arc<Mesh>, values: &[f64]) -> SobolevFunction {
    SobolevFunction::from_nodal(m.clone(), &values[..m.n_cells()]).unwrap()
}

fn random_v_primitive(m: &Arc<Mesh>, c: f64, slopes: &[f64]) -> VPrimitive {
    let d: SharedFn = Arc::new(PiecewiseFunction::from_cell_constants(m.clone(), &slopes[..m.n_cells()], Side::Right).unwrap());
    VPrimitive::new(c, d).unwrap()
}

#[test]
fn zero_pair_is_the_zero_function() {
    let m = two_atom_mesh(10);
    let f = SobolevFunction::constant(m, 0.0);
    for x in [0.0, 0.25, 0.6, 0.77] {
        assert_eq!(sobolev_eval(&f, x, Side::Right), 0.0);
        assert_eq!(sobolev_eval(&f, x, Side::Left), 0.0);
    }
}

#[test]
fn sign_density_on_the_line() {
    let m = mesh(identity_w(), 8);
    let sign: Vec<f64> = (0..8).map(|c| if c < 4 { 1.0 } else { -1.0 }).collect();
    let f = SobolevFunction::from_piecewise(1.0, PiecewiseFunction::from_cell_constants(m, &sign, Side::Left).unwrap()).unwrap();
    assert!((sobolev_eval(&f, 0.5, Side::Right) - 1.5).abs() < 1e-15);
    assert!((sobolev_eval(&f, 1.0, Side::Left) - 1.0).abs() < 1e-15);
}

#[test]
fn jump_is_density_times_atom_mass() {
    let w = Arc::new(measure(Continuity::Cadlag, &[1.0], &[(0.5, 2.0)]));
    let m = mesh(w, 4);
    // ∫_(0,0.5] dW = 2.5 and ∫_(0.5,1] dW = 0.5
    let dens = [1.0, 1.0, -5.0, -5.0];
    let f = SobolevFunction::from_piecewise(0.0, PiecewiseFunction::from_cell_constants(m.clone(), &dens, Side::Left).unwrap())
        .unwrap();
    let jump = sobolev_eval(&f, 0.5, Side::Right) - sobolev_eval(&f, 0.5, Side::Left);
    assert!((jump - 2.0).abs() < 1e-15);
    assert!((f.jump_at_node(2) - 2.0).abs() < 1e-15);
    for i in [1, 3] {
        assert_eq!(f.jump_at_node(i), 0.0);
    }
}

#[test]
fn density_round_trip_is_bit_exact() {
    let m = two_atom_mesh(16);
    let vals = uniform_vec(&mut rng(3), m.n_cells(), -1.0, 1.0);
    let f = random_sobolev(&m, &vals);
    let d = d_w_minus(&f);
    let g = SobolevFunction::new(f.c(), d.clone()).unwrap();
    for c in 0..m.n_cells() {
        assert_eq!(d.cell_constant(c).unwrap().to_bits(), d_w_minus(&g).cell_constant(c).unwrap().to_bits());
        assert_eq!(f.node_values()[c].to_bits(), g.node_values()[c].to_bits());
    }
    let k = SobolevFunction::constant(m.clone(), 4.0);
    assert!((0..m.n_cells()).all(|c| d_w_minus(&k).cell_constant(c) == Some(0.0)));
}

#[test]
fn newton_quotients_recover_the_density() {
    // f(x) = W(x) − x·W(1) with W = identity + atom(0.5, 2)
    let w = Arc::new(measure(Continuity::Cadlag, &[1.0], &[(0.5, 2.0)]));
    let m = mesh(w.clone(), 8);
    let closed = |x: f64| w.eval(x, Side::Right) - 3.0 * x;
    // quotients (f(x) − f(x−h))/(W(x) − W(x−h)) on continuity points and at the atom
    let quotient = |x: f64, h: f64| (closed(x) - closed(x - h)) / (w.eval(x, Side::Right) - w.eval(x - h, Side::Right));
    let n = m.n_cells();
    let cells: Vec<CellFormula> = (0..n)
        .map(|c| CellFormula::constant(quotient(0.5 * (m.point(c) + m.point(c + 1)), 1e-3)))
        .collect();
    let mut nodes: Vec<f64> = cells.iter().map(|c| c.a).collect();
    nodes.rotate_right(1);
    nodes[4] = quotient(0.5, 1e-12);
    let dens = PiecewiseFunction::from_cells_and_nodes(m.clone(), cells, nodes, Side::Left).unwrap();
    let f = SobolevFunction::from_piecewise(0.0, dens).unwrap();
    for x in [0.1, 0.3, 0.5, 0.6, 0.9] {
        assert!((sobolev_eval(&f, x, Side::Right) - closed(x)).abs() < 1e-6, "{x}");
    }
    let d = d_w_minus(&f);
    assert!((d.node_value(4) - 1.0).abs() < 1e-6);
    assert!((0..n).all(|c| (d.cell_constant(c).unwrap() + 2.0).abs() < 1e-6));
}

#[test]
fn integration_by_parts_with_a_constant_factor() {
    let m = two_atom_mesh(20);
    let mut r = rng(11);
    let g = random_sobolev(&m, &uniform_vec(&mut r, m.n_cells(), -2.0, 2.0));
    let one = random_v_primitive(&m, 1.0, &vec![0.0; m.n_cells()]);
    let f = random_v_primitive(&m, 0.3, &uniform_vec(&mut r, m.n_cells(), -2.0, 2.0));
    let g_one = SobolevFunction::constant(m.clone(), 1.0);
    let pts = m.points();
    for &(a, b) in &[(0, m.n_cells()), (3, 9), (4, 17)] {
        assert!(integration_by_parts_residual(&one, &g, pts[a], pts[b]).unwrap().abs() < 1e-12);
        assert!(integration_by_parts_residual(&f, &g_one, pts[a], pts[b]).unwrap().abs() < 1e-12);
    }
}

#[test]
fn integration_by_parts_needs_a_shared_mesh() {
    let a = two_atom_mesh(10);
    let b = two_atom_mesh(10);
    let f = random_v_primitive(&a, 0.0, &vec![1.0; a.n_cells()]);
    let g = SobolevFunction::constant(b, 1.0);
    assert!(matches!(integration_by_parts_residual(&f, &g, 0.0, 1.0), Err(Error::MeshMismatch(_))));
}

#[test]
fn poincare_constant_and_zero() {
    let m = two_atom_mesh(10);
    let (l, r) = poincare_gap(&SobolevFunction::constant(m.clone(), 2.0)).unwrap();
    assert!((l - 4.0).abs() < 1e-13 && (l - r).abs() < 1e-13);
    assert_eq!(poincare_gap(&SobolevFunction::constant(m, 0.0)).unwrap(), (0.0, 0.0));
}

#[test]
fn kernel_closed_forms() {
    let id = identity_w();
    assert!((reproducing_kernel(&id, 0.25, 0.5) - 0.125).abs() < 1e-15);
    let w = two_atom();
    for t in [0.1, 0.25, 0.6, 0.8] {
        assert_eq!(reproducing_kernel(&w, 0.0, t), 0.0);
        assert!(reproducing_kernel(&w, 1.0, t).abs() < 1e-14);
        let expected = common::w_closed_form(t.min(0.4)) - common::w_closed_form(t) * common::w_closed_form(0.4) / w.total();
        assert!((reproducing_kernel(&w, t, 0.4) - expected).abs() < 1e-4);
    }
}

#[test]
fn kernel_reproduces_point_values() {
    let m = two_atom_mesh(40);
    let mut r = rng(5);
    for _ in 0..10 {
        let mut vals = uniform_vec(&mut r, m.n_cells(), -1.0, 1.0);
        vals[0] = 0.0;
        let f = random_sobolev(&m, &vals);
        for i in [1, 7, 10, 23, 39] {
            let t = m.point(i);
            let k = kernel_section(&m, t).unwrap();
            assert!((dirichlet_inner(&f, &k).unwrap() - sobolev_eval(&f, t, Side::Right)).abs() < 1e-12);
        }
    }
    let f = SobolevFunction::constant(m.clone(), 1.0);
    let k = kernel_section(&m, 0.25).unwrap();
    assert!(matches!(dirichlet_inner(&f, &k), Err(Error::DirichletViolation(_))));
}

#[test]
fn dual_pairings() {
    let m = two_atom_mesh(16);
    let n = m.n_cells();
    let one = DualFunctional::new(
        Arc::new(PiecewiseFunction::constant(m.clone(), 1.0, Side::Right)),
        Arc::new(PiecewiseFunction::zero(m.clone(), Side::Left)),
    )
    .unwrap();
    assert!((dual_apply(&one, &SobolevFunction::constant(m.clone(), -1.5)).unwrap() + 1.5).abs() < 1e-14);

    // f1 lives on the first half; g only moves on the second half
    let half: Vec<f64> = (0..n).map(|c| if c < n / 2 { 1.0 } else { 0.0 }).collect();
    let orth = DualFunctional::new(
        Arc::new(PiecewiseFunction::zero(m.clone(), Side::Right)),
        Arc::new(PiecewiseFunction::from_cell_constants(m.clone(), &half, Side::Left).unwrap()),
    )
    .unwrap();
    let mut vals = vec![0.0; n];
    vals[n / 2 + 3] = 1.0;
    vals[n / 2 + 4] = -0.5;
    assert_eq!(dual_apply(&orth, &random_sobolev(&m, &vals)).unwrap(), 0.0);
}

#[test]
fn white_noise_path_as_a_dual_element() {
    let m = two_atom_mesh(32);
    let path = SamplePath::motion(m.clone(), 99, 4);
    let step = path.left_step().scaled(-1.0);
    let phi = DualFunctional::new(Arc::new(PiecewiseFunction::zero(m.clone(), Side::Right)), Arc::new(step)).unwrap();
    for i in [1, 5, 9, 20] {
        let mut vals = vec![0.0; m.n_cells()];
        vals[i] = 1.0;
        let hat = random_sobolev(&m, &vals);
        let a = dual_apply(&phi, &hat).unwrap();
        let b = stoch_integral_ibp(&hat, &path, 1.0).unwrap();
        assert!((a - b).abs() < 1e-10, "{a} {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn integration_by_parts_vanishes(
        g_vals in prop::collection::vec(-3.0f64..3.0, 22),
        f_slopes in prop::collection::vec(-3.0f64..3.0, 22),
        c in -2.0f64..2.0,
        a in 0usize..11,
        len in 1usize..12,
    ) {
        let m = two_atom_mesh(20);
        let g = random_sobolev(&m, &g_vals);
        let f = random_v_primitive(&m, c, &f_slopes);
        let b = (a + len).min(m.n_cells());
        let r = integration_by_parts_residual(&f, &g, m.point(a), m.point(b)).unwrap();
        prop_assert!(r.abs() < 1e-10, "{}", r);
    }

    #[test]
    fn poincare_inequality_holds(vals in prop::collection::vec(-5.0f64..5.0, 22), shift in -3.0f64..3.0) {
        let m = two_atom_mesh(20);
        let shifted: Vec<f64> = vals.iter().map(|v| v + shift).collect();
        let (l, r) = poincare_gap(&random_sobolev(&m, &shifted)).unwrap();
        prop_assert!(l <= r + 1e-10);
    }

    #[test]
    fn jumps_sit_on_atoms(vals in prop::collection::vec(-5.0f64..5.0, 22)) {
        let m = two_atom_mesh(20);
        let f = random_sobolev(&m, &vals);
        let d = d_w_minus(&f);
        for i in 1..m.n_cells() {
            let expected = d.node_value(i) * m.w_atom(i);
            prop_assert!((f.jump_at_node(i) - expected).abs() < 1e-12);
            if !m.is_w_atom(i) {
                prop_assert_eq!(f.jump_at_node(i), 0.0);
            }
        }
    }

    #[test]
    fn node_values_are_cumulative_sums(vals in prop::collection::vec(-5.0f64..5.0, 22)) {
        let m = two_atom_mesh(20);
        let f = random_sobolev(&m, &vals);
        let d = d_w_minus(&f);
        let mut acc = f.c();
        for (i, v) in f.node_values().into_iter().enumerate() {
            prop_assert!((v - acc).abs() < 1e-12);
            acc += d.cell_constant(i).unwrap() * m.dw(i);
        }
    }
}
