//! Property tests for the graph, linear-algebra, geometry and dynamics
//! invariants.

use containment_core::dynamics::{equilibrium, simulate, ScenarioParts};
use containment_core::geometry::{d_xi, in_hull, project};
use containment_core::linalg::{is_row_stochastic, kron, solve_spd, sym_eigenvalues};
use containment_core::{AgentGraph, DenseMatrix, LeaderLinks, LeaderSet, Scenario, SwitchingSchedule, Topology};
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = AgentGraph> {
    (1..=max_n)
        .prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
            let len = pairs.len();
            (
                Just(n),
                Just(pairs),
                proptest::collection::vec((any::<bool>(), 0.1f64..3.0), len),
            )
        })
        .prop_map(|(n, pairs, picks)| {
            let edges = pairs
                .into_iter()
                .zip(picks)
                .filter(|(_, (keep, _))| *keep)
                .map(|((i, j), (_, w))| (i, j, w));
            AgentGraph::new(n, edges).unwrap()
        })
}

fn topology_strategy(max_n: usize, max_k: usize) -> impl Strategy<Value = Topology> {
    (graph_strategy(max_n), 1..=max_k)
        .prop_flat_map(|(g, k)| {
            let n = g.n();
            (
                Just(g),
                Just(k),
                proptest::collection::vec((any::<bool>(), 0.1f64..3.0), n * k),
            )
        })
        .prop_map(|(g, k, picks)| {
            let n = g.n();
            let links = picks
                .into_iter()
                .enumerate()
                .filter(|(_, (keep, _))| *keep)
                .map(|(idx, (_, w))| (idx / k, idx % k, w));
            Topology::new(g, LeaderLinks::new(n, k, links).unwrap()).unwrap()
        })
}

/// Topology made connected by linking agent 0 of every component to leader 0.
fn connected_topology_strategy(max_n: usize, max_k: usize) -> impl Strategy<Value = Topology> {
    topology_strategy(max_n, max_k).prop_map(|t| {
        let extra: Vec<_> = t.leaderless_components().iter().map(|c| (c[0], 0, 1.0)).collect();
        let leaders = t.leaders().with_links(extra).unwrap();
        Topology::new(t.graph().clone(), leaders).unwrap()
    })
}

fn matrix_strategy(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
    proptest::collection::vec(-3.0f64..3.0, rows * cols)
        .prop_map(move |d| DenseMatrix::from_row_major(rows, cols, d).unwrap())
}

fn leaders_strategy(max_k: usize, m: usize) -> impl Strategy<Value = LeaderSet> {
    (1..=max_k)
        .prop_flat_map(move |k| proptest::collection::vec(-3.0f64..3.0, k * m))
        .prop_map(move |p| LeaderSet::new(m, p).unwrap())
}

fn assert_close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        assert!((x - y).abs() <= tol, "{x} vs {y}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_rows_sum_to_zero(g in graph_strategy(10)) {
        let l = g.laplacian();
        prop_assert!(l.row_sums().iter().all(|s| s.abs() <= 1e-12));
        prop_assert_eq!(l.max_asymmetry(), 0.0);
    }

    #[test]
    fn zero_eigenvalues_count_components(g in graph_strategy(10)) {
        let eig = sym_eigenvalues(&g.laplacian()).unwrap();
        prop_assert!(eig[0].abs() <= 1e-9);
        let zeros = eig.iter().filter(|v| v.abs() <= 1e-9).count();
        prop_assert_eq!(zeros, g.components().len());
        if g.is_connected() && g.n() > 1 {
            prop_assert!(eig[1] > 1e-9);
        }
    }

    #[test]
    fn components_partition_agents(g in graph_strategy(10)) {
        let comps = g.components();
        let mut all: Vec<usize> = comps.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..g.n()).collect::<Vec<_>>());
        let firsts: Vec<usize> = comps.iter().map(|c| c[0]).collect();
        prop_assert!(firsts.windows(2).all(|w| w[0] < w[1]));
        for e in g.edges() {
            prop_assert!(comps.iter().any(|c| c.contains(&e.i) && c.contains(&e.j)));
        }
    }

    #[test]
    fn bar_connectivity_is_monotone(t in topology_strategy(8, 3), a in 0usize..8, b in 0usize..8, q in 0usize..3) {
        if !t.is_bar_connected() {
            return Ok(());
        }
        let n = t.n();
        let (a, b, q) = (a % n, b % n, q % t.k());
        if a != b {
            if let Ok(g) = t.graph().with_edge(a, b, 1.0) {
                prop_assert!(Topology::new(g, t.leaders().clone()).unwrap().is_bar_connected());
            }
        }
        if let Ok(links) = t.leaders().with_links([(a, q, 1.0)]) {
            prop_assert!(Topology::new(t.graph().clone(), links).unwrap().is_bar_connected());
        }
    }

    #[test]
    fn h_positive_definite_iff_bar_connected(t in topology_strategy(8, 3)) {
        let lmin = sym_eigenvalues(&t.composite_matrix()).unwrap()[0];
        prop_assert_eq!(lmin > 1e-9, t.is_bar_connected());
    }

    #[test]
    fn spd_solve_round_trip(g in matrix_strategy(5, 5), rhs in matrix_strategy(5, 2)) {
        let h = g.transpose().matmul(&g).unwrap().add(&DenseMatrix::identity(5)).unwrap();
        let x = solve_spd(&h, &rhs).unwrap();
        let resid = h.matmul(&x).unwrap().sub(&rhs).unwrap().inf_norm();
        prop_assert!(resid <= 1e-9 * (1.0 + rhs.inf_norm()));
    }

    #[test]
    fn eigenvalues_reproduce_trace_and_frobenius(g in matrix_strategy(6, 6)) {
        let s = g.add(&g.transpose()).unwrap();
        let eig = sym_eigenvalues(&s).unwrap();
        let trace: f64 = (0..6).map(|i| s[(i, i)]).sum();
        let fro2: f64 = s.as_slice().iter().map(|v| v * v).sum();
        prop_assert!((eig.iter().sum::<f64>() - trace).abs() <= 1e-9 * (1.0 + fro2.sqrt()));
        prop_assert!((eig.iter().map(|v| v * v).sum::<f64>() - fro2).abs() <= 1e-9 * (1.0 + fro2));
        prop_assert!(eig.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn kron_mixed_product(a in matrix_strategy(2, 2), b in matrix_strategy(2, 2), c in matrix_strategy(2, 2), d in matrix_strategy(2, 2)) {
        let lhs = kron(&a, &b).matmul(&kron(&c, &d)).unwrap();
        let rhs = kron(&a.matmul(&c).unwrap(), &b.matmul(&d).unwrap());
        assert_close(&lhs, &rhs, 1e-12);
    }

    #[test]
    fn kron_bilinear(a in matrix_strategy(2, 3), a2 in matrix_strategy(2, 3), b in matrix_strategy(3, 2), s in -2.0f64..2.0) {
        let lhs = kron(&a.add(&a2.scale(s)).unwrap(), &b);
        let rhs = kron(&a, &b).add(&kron(&a2, &b).scale(s)).unwrap();
        assert_close(&lhs, &rhs, 1e-12);
    }

    #[test]
    fn projection_is_idempotent(l in leaders_strategy(5, 2), x in proptest::collection::vec(-6.0f64..6.0, 2)) {
        let p = project(&x, &l).unwrap();
        prop_assert!(project(&p.closest, &l).unwrap().sq_dist <= 1e-12);
        let sum: f64 = p.weights.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9);
        prop_assert!(p.weights.iter().all(|&w| w >= -1e-12));
        prop_assert!(p.optimality_gap(&x, &l) <= 1e-9);
    }

    #[test]
    fn projection_is_nonexpansive(
        l in leaders_strategy(5, 3),
        x in proptest::collection::vec(-6.0f64..6.0, 3),
        y in proptest::collection::vec(-6.0f64..6.0, 3),
    ) {
        let px = project(&x, &l).unwrap().closest;
        let py = project(&y, &l).unwrap().closest;
        let dp: f64 = px.iter().zip(&py).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let dx: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        prop_assert!(dp <= dx + 1e-9);
    }

    #[test]
    fn d_xi_vanishes_exactly_inside(l in leaders_strategy(4, 2), xs in proptest::collection::vec(-4.0f64..4.0, 6)) {
        let all_inside = xs.chunks(2).all(|x| in_hull(x, &l, 1e-9).unwrap());
        let d = d_xi(&xs, &l).unwrap();
        prop_assert_eq!(d <= 0.5e-18, all_inside);
    }

    #[test]
    fn equilibrium_weights_are_row_stochastic(t in connected_topology_strategy(12, 4)) {
        let leaders = LeaderSet::new(1, (0..t.k()).map(|q| q as f64).collect()).unwrap();
        let eq = equilibrium(&t, &leaders).unwrap();
        prop_assert!(is_row_stochastic(&eq.weights, 1e-9));
    }
}

fn scenario_for(t: Topology, leaders: LeaderSet, x_init: Vec<f64>, t_final: f64) -> Scenario {
    Scenario::new(ScenarioParts {
        x_init,
        leaders,
        topologies: vec![t],
        schedule: SwitchingSchedule::fixed(0.0, 0),
        t0: 0.0,
        dt: 0.01,
        t_final,
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hull_is_invariant(t in connected_topology_strategy(6, 3), seeds in proptest::collection::vec(0.0f64..1.0, 6 * 3)) {
        let leaders = LeaderSet::from_points(&[[0.0, 0.0], [3.0, 0.0], [0.0, 2.0]]).unwrap();
        let t = Topology::new(
            t.graph().clone(),
            LeaderLinks::new(t.n(), 3, t.leaders().triples()).unwrap(),
        ).unwrap();
        // Convex combinations of the three leaders.
        let x: Vec<f64> = seeds
            .chunks(3)
            .take(t.n())
            .flat_map(|w| {
                let s: f64 = w.iter().sum::<f64>() + 1e-9;
                let w: Vec<f64> = w.iter().map(|v| v / s).collect();
                [3.0 * w[1], 2.0 * w[2]]
            })
            .collect();
        let traj = simulate(&scenario_for(t, leaders, x, 5.0));
        prop_assert!(traj.samples.iter().all(|s| s.d_xi <= 1e-9));
    }

    #[test]
    fn trajectories_are_translation_equivariant(
        t in connected_topology_strategy(6, 2),
        x in proptest::collection::vec(-5.0f64..5.0, 12),
        shift in proptest::collection::vec(-10.0f64..10.0, 2),
    ) {
        let leaders = LeaderSet::from_points(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let t = Topology::new(t.graph().clone(), LeaderLinks::new(t.n(), 2, t.leaders().triples()).unwrap()).unwrap();
        let x: Vec<f64> = x[..2 * t.n()].to_vec();
        let s = scenario_for(t, leaders, x, 3.0);
        let moved = s.translated(&shift).unwrap();
        for (a, b) in s.run().zip(moved.run()) {
            for (i, (u, v)) in a.state.iter().zip(&b.state).enumerate() {
                prop_assert!((u + shift[i % 2] - v).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn long_run_reaches_equilibrium() {
    let t = Topology::new(
        AgentGraph::new(4, [(0, 1, 1.0), (1, 2, 0.5), (2, 3, 2.0)]).unwrap(),
        LeaderLinks::new(4, 2, [(0, 0, 1.0), (3, 1, 0.7)]).unwrap(),
    )
    .unwrap();
    let leaders = LeaderSet::from_points(&[[0.0, 0.0], [4.0, 1.0]]).unwrap();
    let lmin = sym_eigenvalues(&t.composite_matrix()).unwrap()[0];
    let s = scenario_for(
        t.clone(),
        leaders.clone(),
        vec![9.0, -3.0, 2.0, 8.0, -6.0, 1.0, 0.5, 7.0],
        20.0 / lmin,
    );
    let x = s.run().final_state();
    let eq = equilibrium(&t, &leaders).unwrap();
    let err = x.iter().zip(&eq.x_star).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err <= 1e-4, "err {err}");
}
