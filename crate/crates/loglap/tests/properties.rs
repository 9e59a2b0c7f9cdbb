//! Property tests for the structural invariants: summation by parts, metric
//! axioms, semigroup algebra, kernel symmetry and positivity.

use loglap::graph::{random_connected_graph, shell_count, Measure, WeightedGraph};
use loglap::heat::{heat_kernel_fourier, heat_kernel_zd};
use loglap::lattice::{w_log, w_s};
use loglap::special::gamma;
use loglap::spectral::{decompose, inner_mu};
use loglap::torus::{ps_kernel, TorusQuadratureSpec};
use proptest::prelude::*;

/// Strategy: a connected weighted graph with custom measure, up to 50 nodes.
fn arb_graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2usize..=max_n, any::<u64>()).prop_map(|(n, seed)| random_connected_graph(n, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn summation_by_parts(g in arb_graph(50), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..g.n_vertices()).map(|_| rng.gen::<f64>() - 0.5).collect();
        let du = g.laplacian_apply(&u).unwrap();
        let total: f64 = (0..g.n_vertices()).map(|x| g.measure(x) * du[x]).sum();
        prop_assert!(total.abs() < 1e-12, "sum mu du = {total}");
    }

    #[test]
    fn distance_is_a_metric(g in arb_graph(12)) {
        let n = g.n_vertices();
        for x in 0..n {
            prop_assert_eq!(g.graph_distance(x, x).unwrap(), Some(0));
            for y in 0..n {
                let xy = g.graph_distance(x, y).unwrap().unwrap();
                let yx = g.graph_distance(y, x).unwrap().unwrap();
                prop_assert_eq!(xy, yx);
                if x != y {
                    prop_assert!(xy >= 1);
                }
                for z in 0..n {
                    let xz = g.graph_distance(x, z).unwrap().unwrap();
                    let zy = g.graph_distance(z, y).unwrap().unwrap();
                    prop_assert!(xy <= xz + zy);
                }
            }
        }
    }

    #[test]
    fn heat_semigroup_composes(g in arb_graph(24), t1 in 0.01f64..3.0, t2 in 0.01f64..3.0, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let dec = decompose(&g).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..g.n_vertices()).map(|_| rng.gen::<f64>() - 0.5).collect();
        let once = dec.heat_apply(t1 + t2, &u).unwrap();
        let twice = dec.heat_apply(t1, &dec.heat_apply(t2, &u).unwrap()).unwrap();
        for (a, b) in once.iter().zip(twice.iter()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        // mass conservation
        let ones = vec![1.0; g.n_vertices()];
        let before = inner_mu(dec.measure(), &u, &ones);
        let after = inner_mu(dec.measure(), &once, &ones);
        prop_assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn fractional_power_is_symmetric(g in arb_graph(20), s in 0.05f64..0.95) {
        let dec = decompose(&g).unwrap();
        let n = g.n_vertices();
        let u: Vec<f64> = (0..n).map(|i| ((i * i + 1) as f64).sin()).collect();
        let v: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();
        let au = dec.frac_laplacian_spectral(s, &u).unwrap();
        let av = dec.frac_laplacian_spectral(s, &v).unwrap();
        let lhs = inner_mu(dec.measure(), &au, &v);
        let rhs = inner_mu(dec.measure(), &u, &av);
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lattice_kernels_positive_and_even(k in 1i64..12, s in prop::sample::select(vec![0.2, 0.5, 0.8])) {
        let (plus, _) = w_s(1, s, &[k], 1e-10).unwrap();
        let (minus, _) = w_s(1, s, &[-k], 1e-10).unwrap();
        prop_assert!(plus > 0.0);
        prop_assert_eq!(plus, minus);
        let (wl_plus, _) = w_log(1, &[k], 1e-14).unwrap();
        let (wl_minus, _) = w_log(1, &[-k], 1e-14).unwrap();
        prop_assert!(wl_plus > 0.0);
        prop_assert_eq!(wl_plus, wl_minus);
    }

    #[test]
    fn heat_kernel_methods_agree(t in 0.05f64..12.0, k in -6i64..=6) {
        let grid = TorusQuadratureSpec::default();
        let closed = heat_kernel_zd(1, t, &[k]).unwrap();
        let fourier = heat_kernel_fourier(1, t, &[k], &grid).unwrap();
        prop_assert!(closed.value >= 0.0);
        let allowed = closed.error_estimate + fourier.error_estimate + 1e-13;
        prop_assert!((closed.value - fourier.value).abs() <= allowed,
            "gap {} beyond combined estimate {allowed}", (closed.value - fourier.value).abs());
    }

    #[test]
    fn ps_kernel_bounded_by_one(t in 0.0f64..8.0, s in 0.1f64..0.9, k in -5i64..=5) {
        let q = TorusQuadratureSpec::default();
        let (v, _) = ps_kernel(1, s, t, &[k], &q).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert!(v <= 1.0 + 1e-10);
    }

    #[test]
    fn gamma_recurrence(x in 0.05f64..60.0) {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        prop_assert!(((lhs - rhs) / lhs).abs() < 1e-12);
    }

    #[test]
    fn shell_count_matches_ball_difference(d in 1u32..=3, k in 1u64..20) {
        use loglap::graph::lattice_ball_volume;
        prop_assert_eq!(
            shell_count(d, k),
            lattice_ball_volume(d, k) - lattice_ball_volume(d, k - 1)
        );
    }
}

#[test]
fn measure_variants_share_spectrum_bounds() {
    // normalized Laplacian spectrum stays in [0, 2] for arbitrary weights
    let g = WeightedGraph::build(
        6,
        &[
            (0, 1, 0.3),
            (1, 2, 2.5),
            (2, 3, 1.0),
            (3, 4, 0.7),
            (4, 5, 1.9),
            (5, 0, 1.1),
            (1, 4, 0.4),
        ],
        Measure::Degree,
    )
    .unwrap();
    let dec = decompose(&g).unwrap();
    for &l in dec.eigenvalues() {
        assert!((-1e-12..=2.0 + 1e-12).contains(&l));
    }
}
