use proptest::prelude::*;
use rand::Rng;

use offtarget::bench::{gen_gnp_tree, parse_edge_list, write_edge_list};
use offtarget::checks::random_cover_instance;
use offtarget::chordal::{check_separator, half_clique_separator, maximal_cliques, random_chordal_graph};
use offtarget::cover::{cover_to_verification, repetitions, verification_to_cover};
use offtarget::extension::{consistent_extension, OrderConstraints};
use offtarget::intervention::ActionSet;
use offtarget::lp::{solve_vlp_with, LpMode};
use offtarget::meek::{meek_closure, meek_closure_naive};
use offtarget::search::{outer_iteration_limit, search_simulated, SearchOptions};
use offtarget::simulator::{rng_stream, Simulator};
use offtarget::{Dag, OrientationState, UndirectedGraph};

fn moral_dag(n: usize, p: f64, seed: u64) -> Dag {
    gen_gnp_tree(n, p, &mut rng_stream(seed, 2)).unwrap()
}

/// Applies a few random interventions and returns the resulting state.
fn random_state(g: &Dag, rounds: usize, seed: u64) -> OrientationState {
    let mut rng = rng_stream(seed, 7);
    let mut s = OrientationState::essential(g).unwrap();
    for _ in 0..rounds {
        let set: Vec<usize> = (0..g.n()).filter(|_| rng.gen_bool(0.3)).collect();
        s = s.apply_intervention(g, &set).unwrap();
    }
    s
}

/// Exhaustive oracle: does any clique, with the best split of the leftover
/// components, satisfy every separator invariant?
fn some_clique_satisfies_everything(g: &UndirectedGraph) -> bool {
    let n = g.n();
    let p = maximal_cliques(g).unwrap().iter().map(Vec::len).max().unwrap();
    let mut seen = std::collections::BTreeSet::new();
    for k in maximal_cliques(g).unwrap() {
        for mask in 1u32..(1 << k.len()) {
            let clique: Vec<usize> = (0..k.len()).filter(|i| mask >> i & 1 == 1).map(|i| k[i]).collect();
            if clique.len() + 1 > p || !seen.insert(clique.clone()) {
                continue;
            }
            let rest: Vec<usize> = (0..n).filter(|v| !clique.contains(v)).collect();
            let comps: Vec<usize> = g.induced(&rest).components().iter().map(Vec::len).collect();
            if comps.iter().any(|&c| 2 * c > n) {
                continue;
            }
            // subset-sum for a side of size at most ceil(n/2) whose complement is too
            let total: usize = comps.iter().sum();
            let mut reach = vec![false; total + 1];
            reach[0] = true;
            for &c in &comps {
                for s in (c..=total).rev() {
                    reach[s] |= reach[s - c];
                }
            }
            let half_up = n.div_ceil(2);
            if (0..=total).any(|s| reach[s] && s <= half_up && total - s <= half_up) {
                return true;
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn revealed_arcs_agree_with_truth(n in 2usize..25, p in 0.0f64..0.4, rounds in 0usize..4, seed: u64) {
        let g = moral_dag(n, p, seed);
        let s = random_state(&g, rounds, seed);
        for (u, v) in s.arcs() {
            prop_assert!(g.has_arc(u, v));
        }
        for e in s.cut_edges() {
            prop_assert!(s.is_oriented(e));
        }
        s.check_separation().unwrap();
    }

    #[test]
    fn meek_closure_is_idempotent_and_matches_naive(n in 2usize..20, p in 0.0f64..0.4, seed: u64) {
        let g = moral_dag(n, p, seed);
        let mut s = OrientationState::new(g.skeleton());
        let mut rng = rng_stream(seed, 8);
        for (u, v) in g.arcs() {
            if rng.gen_bool(0.3) {
                s.orient(u, v).unwrap();
            }
        }
        let once = meek_closure(&s).unwrap();
        let twice = meek_closure(&once).unwrap();
        prop_assert_eq!(once.arc_set(), twice.arc_set());
        let naive = meek_closure_naive(&s, Some(&mut rng)).unwrap();
        prop_assert_eq!(once.arc_set(), naive.arc_set());
    }

    #[test]
    fn extension_is_consistent_and_honors_pairs(n in 2usize..10, p in 0.0f64..0.5, rounds in 0usize..3, seed: u64) {
        let g = moral_dag(n, p, seed);
        let s = random_state(&g, rounds, seed);
        let (u, v) = ((seed % n as u64) as usize, ((seed / 7) % n as u64) as usize);
        let constraints = if u != v && s.is_undirected(u, v) { OrderConstraints::pairs(vec![(u, v)]) } else { OrderConstraints::none() };
        let (ext, order) = consistent_extension(&s, &constraints).unwrap();
        prop_assert_eq!(ext.skeleton(), g.skeleton());
        for (a, b) in s.arcs() {
            prop_assert!(ext.has_arc(a, b));
        }
        for &(a, b) in &constraints.pairs {
            prop_assert!(ext.has_arc(a, b));
            prop_assert!(order.precedes(a, b));
        }
        // same v-structures as the truth, so it lies in the same equivalence class
        prop_assert_eq!(ext.v_structures(), g.v_structures());
    }

    #[test]
    fn separators_pass_the_checker(n in 2usize..60, keep in 0.1f64..0.6, seed: u64) {
        let host = random_chordal_graph(n, keep, &mut rng_stream(seed, 3));
        let sep = half_clique_separator(&host).unwrap();
        let report = check_separator(&host, &sep);
        prop_assert!(report.is_halving_clique(), "{:?}", report.violations());
        if !report.is_valid() {
            prop_assert!(!some_clique_satisfies_everything(&host), "{:?}", report.violations());
        }
    }

    #[test]
    fn repetitions_scale_linearly(x in proptest::collection::vec(0.0f64..10.0, 1..8), d in 0usize..40, c in 0.5f64..10.0) {
        let y = repetitions(&x, d, c);
        let scale = c * (d.max(2) as f64).ln();
        for (xi, yi) in x.iter().zip(&y) {
            prop_assert!((yi - scale * xi).abs() <= 1e-12 * (1.0 + yi.abs()));
            prop_assert!(*yi >= 0.0);
        }
    }

    #[test]
    fn float_and_exact_lp_agree(seed: u64) {
        let inst = random_cover_instance(8, 8, &mut rng_stream(seed, 4)).unwrap();
        let table = inst.as_table().unwrap();
        let auto = solve_vlp_with(&table, &inst.weights, LpMode::Auto).unwrap();
        let exact = solve_vlp_with(&table, &inst.weights, LpMode::Exact).unwrap();
        prop_assert!((auto.objective - exact.objective).abs() <= 1e-7 * (1.0 + exact.objective));
        for j in 0..table.edges().len() {
            let covered: f64 = table.row(j).iter().zip(&auto.x).map(|(p, x)| p * x).sum();
            prop_assert!(covered >= 1.0 - 1e-7);
        }
    }

    #[test]
    fn cover_reduction_round_trip(seed: u64) {
        let inst = random_cover_instance(6, 6, &mut rng_stream(seed, 5)).unwrap();
        let (dag, actions) = cover_to_verification(&inst).unwrap();
        let (back, edges) = verification_to_cover(&dag, &actions).unwrap();
        prop_assert_eq!(edges.len(), inst.d);
        let (t_back, t_inst) = (back.as_table().unwrap(), inst.as_table().unwrap());
        prop_assert_eq!(t_back.k(), t_inst.k());
        for j in 0..inst.d {
            prop_assert_eq!(t_back.row(j), t_inst.row(j));
        }
    }

    #[test]
    fn edge_list_round_trip(n in 2usize..30, p in 0.0f64..0.3, seed: u64) {
        let g = moral_dag(n, p, seed);
        let loaded = parse_edge_list(&write_edge_list(&g)).unwrap();
        prop_assert_eq!(loaded.dag, g);
        prop_assert_eq!(loaded.added_arcs, 0);
    }

    #[test]
    fn trace_cost_matches_steps(n in 2usize..15, seed: u64) {
        let g = moral_dag(n, 0.2, seed);
        let actions = ActionSet::make_fathand(&g.skeleton(), 0.5).unwrap();
        let weights = actions.weights().to_vec();
        let mut sim = Simulator::new(g, actions, seed).unwrap();
        offtarget::baselines::random_policy(&mut sim, &mut rng_stream(seed, 1)).unwrap();
        let trace = sim.into_trace();
        prop_assert!((trace.recomputed_cost(&weights) - trace.total_cost).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn search_recovers_small_moral_dags(n in 2usize..16, p in 0.0f64..0.3, radius in 0usize..3, seed: u64) {
        let g = moral_dag(n, p, seed);
        let host = g.skeleton();
        let actions = if radius == 0 { ActionSet::on_target(&host) } else { ActionSet::make_rhop(&host, radius) }.unwrap();
        let (out, trace) = search_simulated(&g, &actions, seed, &SearchOptions::default()).unwrap();
        prop_assert_eq!(out.dag, g);
        prop_assert!(out.outer_iterations <= outer_iteration_limit(n));
        prop_assert!(trace.total_cost >= 0.0);
    }
}
