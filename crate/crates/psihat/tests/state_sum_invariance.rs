//! Invariance of the state sum on the boundary of the 4-simplex under gauges,
//! charge deformations, vertex reorderings and H-moves.

use num_complex::Complex64;
use proptest::prelude::*;
use psihat::cyclic_algebra::{random_element, RootData};
use psihat::state_sum::*;
use psihat::triangulation::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MOD_Q_TOL: f64 = 1e-7;
const EXACT_TOL: f64 = 1e-8;

fn fixture(seed: u64) -> HTriangulation {
    let complex = boundary_4simplex();
    let link = boundary_4simplex_link(&complex);
    let charge = find_charge(&complex, &link).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coloring = coboundary(&complex, &GGauge::random(complex.n_vertices(), &mut rng));
    let coloring = make_admissible(&complex, &coloring, &mut rng).unwrap();
    HTriangulation { complex, link, charge: Some(charge), coloring: Some(coloring) }
}

fn k(rd: &RootData, h: &HTriangulation) -> Complex64 {
    state_sum(rd, h).unwrap().value
}

fn assert_mod_q(rd: &RootData, a: Complex64, b: Complex64, what: &str) {
    let (ok, _) = equal_mod_qtilde(a, b, rd, MOD_Q_TOL);
    assert!(ok, "{what}: {a} and {b} differ beyond powers of q~");
}

#[test]
fn value_on_the_sphere() {
    // Observed: the sphere evaluates to 1/N^2 up to a power of q~.
    for n in [3, 5, 7] {
        let rd = RootData::new(n, 1).unwrap();
        let z = k(&rd, &fixture(1));
        assert!((z.norm() - 1.0 / (n * n) as f64).abs() < 1e-12, "N = {n}: K = {z}");
    }
}

#[test]
fn gauge_invariance_is_exact() {
    let rd = RootData::new(3, 1).unwrap();
    let h = fixture(2);
    let k0 = k(&rd, &h);
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let phi = h.coloring.as_ref().unwrap();
    for v in 0..h.complex.n_vertices() {
        for _ in 0..3 {
            let delta = GGauge::point(5, v, random_element(&mut rng));
            let moved = gauge_transform(&h.complex, phi, &delta);
            if !moved.is_admissible() {
                continue;
            }
            let g = HTriangulation { coloring: Some(moved), ..h.clone() };
            let z = k(&rd, &g);
            assert!((z - k0).norm() <= EXACT_TOL * k0.norm(), "vertex {v}: {z} vs {k0}");
        }
    }
}

#[test]
fn charge_deformations_change_only_q_powers() {
    for n in [3, 5] {
        let rd = RootData::new(n, 1).unwrap();
        let h = fixture(3);
        let k0 = k(&rd, &h);
        for e in 0..h.complex.n_edges() {
            for lambda in [-1, 1, 2] {
                let c = deform_charge(&h.complex, h.charge.as_ref().unwrap(), e, lambda);
                let g = HTriangulation { charge: Some(c), ..h.clone() };
                assert_mod_q(&rd, k0, k(&rd, &g), &format!("N = {n}, d(e{e}) x {lambda}"));
            }
        }
    }
}

#[test]
fn vertex_reorderings_change_only_q_powers() {
    let rd = RootData::new(3, 1).unwrap();
    let h = fixture(4);
    let k0 = k(&rd, &h);
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for _ in 0..5 {
        let mut order = h.complex.vertex_order().to_vec();
        order.shuffle(&mut rng);
        let g = HTriangulation { complex: h.complex.with_vertex_order(&order).unwrap(), ..h.clone() };
        assert_mod_q(&rd, k0, k(&rd, &g), &format!("order {order:?}"));
    }
}

#[test]
fn pachner_moves_change_only_q_powers() {
    for n in [3, 5] {
        let rd = RootData::new(n, 1).unwrap();
        let h = fixture(5);
        let k0 = k(&rd, &h);
        for t in 0..h.complex.n_tets() {
            for f in 0..4 {
                let up = pachner_2_3(&h, Slot::new(t, f)).unwrap();
                let k1 = k(&rd, &up);
                assert_mod_q(&rd, k0, k1, &format!("N = {n}, 2-3 at ({t}, {f})"));
                let a = k1;
                let b = state_sum_with(&rd, &up, Schedule::TetOrder).unwrap().value;
                assert!((a - b).norm() <= 1e-9 * a.norm().max(1.0));
            }
        }
    }
}

#[test]
fn bubble_moves_change_only_q_powers() {
    let rd = RootData::new(3, 1).unwrap();
    let h = fixture(6);
    let k0 = k(&rd, &h);
    let cx = &h.complex;
    let mut count = 0;
    for t in 0..cx.n_tets() {
        for f in 0..4 {
            let fc = face_corners(f);
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let e = cx.edge(t, edge_index(fc[i], fc[j]));
                if !h.link.contains(e) {
                    continue;
                }
                let up = bubble_plus(&h, Slot::new(t, f), Some(e)).unwrap();
                assert_mod_q(&rd, k0, k(&rd, &up), &format!("bubble at ({t}, {f}) on edge {e}"));
                let down = bubble_minus(&up, up.complex.n_vertices() - 1).unwrap();
                assert_mod_q(&rd, k0, k(&rd, &down), &format!("bubble undone at ({t}, {f})"));
                count += 1;
            }
        }
    }
    assert!(count >= 20);
}

#[test]
fn moves_compose() {
    let rd = RootData::new(3, 1).unwrap();
    let h = fixture(7);
    let k0 = k(&rd, &h);
    let a = pachner_2_3(&h, Slot::new(0, 1)).unwrap();
    let b = bubble_plus(&a, Slot::new(2, 0), None).unwrap();
    // Faces touching the bubble vertex can close a loop; take the first face that works.
    let c = (0..b.complex.n_tets())
        .flat_map(|t| (0..4).map(move |f| Slot::new(t, f)))
        .find_map(|s| pachner_2_3(&b, s).ok())
        .unwrap();
    for g in [&a, &b, &c] {
        assert_mod_q(&rd, k0, k(&rd, g), "composite move");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn schedules_agree(seed in 0u64..1000) {
        let rd = RootData::new(3, 1).unwrap();
        let h = fixture(seed);
        let a = state_sum_with(&rd, &h, Schedule::Greedy).unwrap().value;
        let b = state_sum_with(&rd, &h, Schedule::TetOrder).unwrap().value;
        prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1.0));
    }

    #[test]
    fn random_gauges_keep_the_value(seed in 0u64..1000) {
        let rd = RootData::new(3, 1).unwrap();
        let h = fixture(seed);
        let k0 = k(&rd, &h);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let moved = gauge_transform(&h.complex, h.coloring.as_ref().unwrap(), &GGauge::random(5, &mut rng));
        prop_assume!(moved.is_admissible());
        let z = k(&rd, &HTriangulation { coloring: Some(moved), ..h.clone() });
        prop_assert!((z - k0).norm() <= EXACT_TOL * k0.norm());
    }
}
