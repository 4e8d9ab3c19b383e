mod common;

use std::sync::Arc;

use common::{two_atom, identity_v, identity_w, measure, mesh, mesh_with};
use proptest::prelude::*;
use wvtorus::measure::{
    build_mesh, cumulative, integrate, Continuity, Convention, Interval, MeasureFunction, Mesh, PiecewiseFunction, SharedFn,
    Side,
};
use wvtorus::Error;

fn atom_half() -> Arc<MeasureFunction> {
    Arc::new(measure(Continuity::Cadlag, &[1.0], &[(0.5, 2.0)]))
}

#[test]
fn reference_measure_values_around_first_atom() {
    let w = two_atom();
    assert!((w.eval(0.25, Side::Left) - 0.125).abs() < 1e-15);
    assert!((w.eval(0.25, Side::Right) - 1.5).abs() < 1e-15);
    let id = identity_w();
    assert_eq!(id.eval(0.7, Side::Left), 0.7);
    assert_eq!(id.eval(0.7, Side::Right), 0.7);
}

#[test]
fn endpoint_conventions_decide_the_atom() {
    let m = mesh(atom_half(), 4);
    let one = PiecewiseFunction::constant(m.clone(), 1.0, Side::Right);
    let w = m.w();
    assert!((integrate(&one, w, Interval::open_closed(0.0, 1.0)).unwrap() - 3.0).abs() < 1e-14);
    assert!((integrate(&one, w, Interval::open(0.0, 0.5)).unwrap() - 0.5).abs() < 1e-14);
    assert!((integrate(&one, w, Interval::open_closed(0.0, 0.5)).unwrap() - 2.5).abs() < 1e-14);
    assert!((integrate(&one, w, Interval::closed_open(0.5, 1.0)).unwrap() - 2.5).abs() < 1e-14);
}

#[test]
fn atom_inside_a_cell_is_a_mesh_mismatch() {
    let coarse = mesh(identity_w(), 4);
    let f = PiecewiseFunction::constant(coarse, 1.0, Side::Right);
    let w = measure(Continuity::Cadlag, &[1.0], &[(0.3, 1.0)]);
    assert!(matches!(integrate(&f, &w, Interval::circle()), Err(Error::MeshMismatch(_))));
}

#[test]
fn cumulative_of_one_reproduces_the_measure() {
    let m = mesh(two_atom(), 40);
    let one: SharedFn = Arc::new(PiecewiseFunction::constant(m.clone(), 1.0, Side::Right));
    for conv in [Convention::OpenClosed, Convention::ClosedOpen] {
        let c = cumulative(one.clone(), m.w().clone(), conv).unwrap();
        for &x in &[0.1, 0.2, 0.33, 0.5, 0.7, 0.95] {
            assert!((c.eval(x, Side::Right) - m.w().value(x)).abs() < 1e-12, "{x}");
        }
    }
    let zero: SharedFn = Arc::new(PiecewiseFunction::zero(m.clone(), Side::Right));
    let c = cumulative(zero, m.w().clone(), Convention::OpenClosed).unwrap();
    assert!(m.points().iter().all(|&x| c.eval(x, Side::Right) == 0.0 && c.eval(x, Side::Left) == 0.0));
}

#[test]
fn cumulative_of_sign_is_a_tent() {
    let m = mesh(identity_w(), 8);
    let sign: Vec<f64> = (0..8).map(|c| if c < 4 { 1.0 } else { -1.0 }).collect();
    let f: SharedFn = Arc::new(PiecewiseFunction::from_cell_constants(m.clone(), &sign, Side::Left).unwrap());
    let c = cumulative(f, m.w().clone(), Convention::OpenClosed).unwrap();
    for x in [0.0f64, 0.1, 0.3, 0.5, 0.62, 0.9, 1.0] {
        let tent = x.min(1.0 - x);
        assert!((c.eval(x, Side::Right) - tent).abs() < 1e-14, "{x}");
    }
}

#[test]
fn mesh_node_sets() {
    let m = build_mesh(identity_w(), identity_v(), 4).unwrap();
    assert_eq!(&m.points()[..m.n_cells()], &[0.0, 0.25, 0.5, 0.75]);
    let w = Arc::new(measure(Continuity::Cadlag, &[1.0], &[(0.3, 1.0)]));
    let m = build_mesh(w, identity_v(), 2).unwrap();
    assert_eq!(&m.points()[..m.n_cells()], &[0.0, 0.3, 0.5]);
    let m = build_mesh(two_atom(), identity_v(), 10).unwrap();
    let expected = [0.0, 0.1, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
    assert_eq!(m.n_cells(), expected.len());
    assert_eq!(m.points().len(), 12);
    for (a, b) in m.points().iter().zip(expected) {
        assert!((a - b).abs() < 1e-15);
    }
    assert!(m.is_w_atom(3) && m.is_w_atom(7));
}

#[test]
fn tiny_meshes_and_flat_segments_are_rejected() {
    assert!(matches!(build_mesh(identity_w(), identity_v(), 1), Err(Error::InvalidMesh(_))));
    let flat = MeasureFunction::new(
        Continuity::Cadlag,
        vec![wvtorus::measure::Segment { x: 0.0, slope: 1.0 }, wvtorus::measure::Segment { x: 0.5, slope: 0.0 }],
        vec![],
    );
    assert!(matches!(flat, Err(Error::InvalidMeasure(m)) if m.contains("strict")));
}

#[test]
fn increments_account_for_total_mass() {
    let m = mesh_with(two_atom(), 37, &[0.3, 0.7]);
    let sw: f64 = (0..m.n_cells()).map(|c| m.dw(c)).sum();
    let sv: f64 = (0..m.n_cells()).map(|c| m.dv(c)).sum();
    assert!((sw - m.w().total()).abs() < 1e-12);
    assert!((sv - 1.0).abs() < 1e-12);
    assert!((0..m.n_cells()).all(|c| m.dw(c) > 0.0 && m.dv(c) > 0.0));
}

fn measure_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<(f64, f64)>)> {
    (
        prop::collection::vec(0.2f64..3.0, 1..4),
        prop::collection::vec((0.05f64..0.95, 0.1f64..2.0), 0..3),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn additive_over_node_partitions(
        (slopes, atoms) in measure_strategy(),
        values in prop::collection::vec(-2.0f64..2.0, 64),
        cuts in prop::collection::btree_set(1usize..20, 0..5),
    ) {
        let w = Arc::new(measure(Continuity::Cadlag, &slopes, &atoms));
        let m = Mesh::build(w.clone(), identity_v(), 16).unwrap();
        let n = m.n_cells();
        let f = PiecewiseFunction::from_cell_constants(m.clone(), &values[..n], Side::Left).unwrap();
        let mut idx: Vec<usize> = std::iter::once(0).chain(cuts.into_iter().filter(|&c| c < n)).collect();
        idx.push(n);
        let whole = integrate(&f, &w, Interval::circle()).unwrap();
        let parts: f64 = idx
            .windows(2)
            .map(|p| integrate(&f, &w, Interval::open_closed(m.point(p[0]), m.point(p[1]))).unwrap())
            .sum();
        prop_assert!((whole - parts).abs() <= 1e-12 * (1.0 + whole.abs()));
        let again = integrate(&f, &w, Interval::circle()).unwrap();
        prop_assert_eq!(whole.to_bits(), again.to_bits());
    }

    #[test]
    fn periodic_windows_carry_the_same_mass(
        (slopes, atoms) in measure_strategy(),
        x in 0.0f64..1.0,
        k in -2i32..3,
    ) {
        let w = measure(Continuity::Cadlag, &slopes, &atoms);
        let shift = k as f64;
        for side in [Side::Left, Side::Right] {
            let d = w.eval(x + shift + 1.0, side) - w.eval(x + shift, side);
            prop_assert!((d - w.total()).abs() <= 1e-12 * w.total());
        }
    }

    #[test]
    fn sides_differ_exactly_by_atom_mass(
        (slopes, atoms) in measure_strategy(),
        x in 0.01f64..0.99,
    ) {
        for cont in [Continuity::Cadlag, Continuity::Caglad] {
            let w = measure(cont, &slopes, &atoms);
            let gap = |p: f64| w.eval(p, Side::Right) - w.eval(p, Side::Left);
            prop_assert_eq!(gap(x), 0.0);
            for a in w.atoms() {
                prop_assert!((gap(a.x) - a.mass).abs() < 1e-12);
                prop_assert!(w.eval(a.x, Side::Left) < w.eval(a.x, Side::Right));
            }
        }
    }

    #[test]
    fn evaluation_is_monotone(
        (slopes, atoms) in measure_strategy(),
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
    ) {
        let w = measure(Continuity::Cadlag, &slopes, &atoms);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for side in [Side::Left, Side::Right] {
            prop_assert!(w.eval(lo, side) <= w.eval(hi, side));
        }
    }
}
