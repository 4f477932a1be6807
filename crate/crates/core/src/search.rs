//! Adaptive off-target search: clique-separator partitioning of chain components,
//! with CutViaLP on covered edges of chosen consistent extensions.

use rand::Rng;
use serde::Serialize;

use crate::chordal::half_clique_separator;
use crate::cover::{cut_via_lp, verification_lower_bound, CutViaLpOptions};
use crate::error::{Error, Result};
use crate::extension::{consistent_extension, OrderConstraints};
use crate::graph::{Dag, Edge, UndirectedGraph};
use crate::intervention::ActionSet;
use crate::simulator::{rng_stream, Experiment, PolicyTrace, Simulator, POLICY_STREAM};
use crate::state::OrientationState;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SearchOptions {
    pub cut: CutViaLpOptions,
}

/// A chain component `H` together with its clique separator `K_H`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparatorTask {
    pub component: Vec<usize>,
    pub clique: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PartitionReport {
    /// Number of large components found after orienting the separators.
    pub large_components: usize,
    /// Iterations of the loop that breaks the large components up.
    pub rounds: usize,
    /// Total iterations spent inside [`orient_internal_clique_edges`].
    pub clique_iterations: usize,
}

/// One outer iteration of the search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseRecord {
    /// Sizes of the chain components with at least two vertices, at the start.
    pub component_sizes: Vec<usize>,
    pub separators: Vec<Vec<usize>>,
    pub partition: PartitionReport,
    /// Largest chain component afterwards.
    pub max_component_after: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub dag: Dag,
    pub outer_iterations: usize,
    pub phases: Vec<PhaseRecord>,
}

/// `⌈log2 n⌉ + 1`, the bound on outer iterations.
pub fn outer_iteration_limit(n: usize) -> usize {
    let ceil_log = if n <= 1 { 0 } else { (usize::BITS - (n - 1).leading_zeros()) as usize };
    ceil_log + 1
}

/// Unoriented covered edges of `dag` whose endpoints satisfy `keep`.
fn covered_targets(s: &OrientationState, dag: &Dag, keep: impl Fn(usize) -> bool) -> Vec<Edge> {
    dag.covered_edges()
        .into_iter()
        .filter(|&(u, v)| s.is_undirected(u, v) && keep(u))
        .map(|(u, v)| Edge::new(u, v))
        .collect()
}

fn check_disjoint_cliques(host: &UndirectedGraph, targets: &[Edge]) -> Result<()> {
    let n = host.n();
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(targets.len());
    for e in targets {
        if e.b >= n || !host.has_edge(e.a, e.b) {
            return Err(Error::EdgeNotInHost(*e));
        }
        pairs.push((e.a, e.b));
    }
    pairs.sort_unstable();
    pairs.dedup();
    let g = UndirectedGraph::new(n, &pairs)?;
    for comp in g.components() {
        if comp.len() > 1 && !g.is_clique(&comp) {
            return Err(Error::InvariantViolated(format!(
                "target edges on {comp:?} do not form a clique"
            )));
        }
    }
    Ok(())
}

fn clique_edges(clique: &[usize]) -> impl Iterator<Item = Edge> + '_ {
    clique
        .iter()
        .enumerate()
        .flat_map(move |(i, &u)| clique[i + 1..].iter().map(move |&v| Edge::new(u, v)))
}

/// Orients every edge of `targets`, which must form vertex-disjoint cliques.
/// Each iteration picks a consistent extension honoring `hints` and cuts its
/// covered edges inside the chain components that still hold an unoriented target.
/// Returns the number of iterations.
pub fn orient_internal_clique_edges<E: Experiment, R: Rng + ?Sized>(
    exp: &mut E,
    targets: &[Edge],
    hints: &OrderConstraints,
    opts: &CutViaLpOptions,
    rng: &mut R,
) -> Result<usize> {
    check_disjoint_cliques(exp.state().skeleton(), targets)?;
    let n = exp.state().n();
    let mut iterations = 0;
    loop {
        let st = exp.state();
        let open: Vec<Edge> = targets.iter().copied().filter(|&e| !st.is_oriented(e)).collect();
        if open.is_empty() {
            return Ok(iterations);
        }
        if iterations > n {
            return Err(Error::Stalled(format!(
                "{} clique edges still unoriented after {iterations} iterations",
                open.len()
            )));
        }
        let labels = st.component_labels();
        let mut focus = vec![false; n];
        for e in &open {
            focus[labels[e.a]] = true;
        }
        let (dag, _) = consistent_extension(st, hints)?;
        let cov = covered_targets(st, &dag, |v| focus[labels[v]]);
        if cov.is_empty() {
            return Err(Error::InvariantViolated(
                "consistent extension has no covered edge in an unoriented component".into(),
            ));
        }
        iterations += 1;
        cut_via_lp(exp, &cov, opts, rng)?;
    }
}

/// Current chain components restricted to `vertices`.
fn pieces(s: &OrientationState, vertices: &[usize]) -> Vec<Vec<usize>> {
    let labels = s.component_labels();
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for &v in vertices {
        groups.entry(labels[v]).or_default().push(v);
    }
    groups.into_values().collect()
}

fn component_of(s: &OrientationState, v: usize) -> Vec<usize> {
    let labels = s.component_labels();
    (0..s.n()).filter(|&w| labels[w] == labels[v]).collect()
}

/// Orients the separators' internal edges, then breaks up every component that
/// is still larger than half of its original chain component.
pub fn perform_partitioning<E: Experiment, R: Rng + ?Sized>(
    exp: &mut E,
    seps: &[SeparatorTask],
    opts: &CutViaLpOptions,
    rng: &mut R,
) -> Result<PartitionReport> {
    let n = exp.state().n();
    let mut report = PartitionReport::default();
    let internal: Vec<Edge> = seps.iter().flat_map(|t| clique_edges(&t.clique)).collect();
    report.clique_iterations += orient_internal_clique_edges(exp, &internal, &OrderConstraints::none(), opts, rng)?;

    let mut centers = Vec::new();
    for task in seps {
        let h = task.component.len();
        for piece in pieces(exp.state(), &task.component) {
            if 2 * piece.len() <= h {
                continue;
            }
            let shared: Vec<usize> = task.clique.iter().copied().filter(|v| piece.contains(v)).collect();
            if shared.len() != 1 {
                return Err(Error::InvariantViolated(format!(
                    "large component of H = {:?} meets its separator in {shared:?}",
                    task.component
                )));
            }
            centers.push(shared[0]);
        }
    }
    report.large_components = centers.len();

    loop {
        let st = exp.state();
        let active: Vec<usize> = centers
            .iter()
            .copied()
            .filter(|&u| st.undirected_neighbors(u).next().is_some())
            .collect();
        if active.is_empty() {
            break;
        }
        if report.rounds > n {
            return Err(Error::InvariantViolated(format!(
                "large components around {active:?} did not shrink"
            )));
        }
        report.rounds += 1;

        // Separators of the pieces of each neighborhood.
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for &u in &active {
            let nbrs: Vec<usize> = st.undirected_neighbors(u).collect();
            let local = st.component_on(nbrs);
            for comp in local.graph.components() {
                let z = if comp.len() == 1 {
                    vec![local.vertices[comp[0]]]
                } else {
                    let sub = local.graph.induced(&comp);
                    let sep = half_clique_separator(&sub)?;
                    let mut z: Vec<usize> = sep.clique.iter().map(|&i| local.vertices[comp[i]]).collect();
                    z.sort_unstable();
                    z
                };
                groups.push((u, z));
            }
        }

        let hints = OrderConstraints::tiers(vec![
            active.clone(),
            groups.iter().flat_map(|(_, z)| z.iter().copied()).collect(),
        ]);
        let internal: Vec<Edge> = groups.iter().flat_map(|(_, z)| clique_edges(z)).collect();
        report.clique_iterations += orient_internal_clique_edges(exp, &internal, &hints, opts, rng)?;

        let mut sources = Vec::with_capacity(groups.len());
        for (u, z) in &groups {
            let st = exp.state();
            let roots: Vec<usize> = z
                .iter()
                .copied()
                .filter(|&a| !z.iter().any(|&b| st.has_arc(b, a)))
                .collect();
            if roots.len() != 1 {
                return Err(Error::InvariantViolated(format!("clique {z:?} has sources {roots:?}")));
            }
            sources.push((*u, roots[0]));
        }

        for (u, z) in sources {
            let st = exp.state();
            if !st.is_undirected(u, z) {
                continue;
            }
            let comp = component_of(st, u);
            let mut member = vec![false; n];
            for &v in &comp {
                member[v] = true;
            }
            let (dag, _) = consistent_extension(st, &OrderConstraints::tiers(vec![vec![u], vec![z]]))?;
            let cov = covered_targets(st, &dag, |v| member[v]);
            if !cov.contains(&Edge::new(u, z)) {
                return Err(Error::InvariantViolated(format!("{u} - {z} is not covered under the chosen order")));
            }
            cut_via_lp(exp, &cov, opts, rng)?;
            if !exp.state().is_oriented(Edge::new(u, z)) {
                return Err(Error::InvariantViolated(format!("{u} - {z} still unoriented")));
            }
        }
    }

    let st = exp.state();
    for task in seps {
        let h = task.component.len();
        if let Some(big) = pieces(st, &task.component).into_iter().find(|p| 2 * p.len() > h) {
            return Err(Error::InvariantViolated(format!(
                "component {big:?} exceeds half of H = {:?}",
                task.component
            )));
        }
    }
    Ok(report)
}

/// Runs the search until every edge is oriented and returns the recovered DAG.
pub fn off_target_search<E: Experiment, R: Rng + ?Sized>(
    exp: &mut E,
    opts: &SearchOptions,
    rng: &mut R,
) -> Result<SearchOutcome> {
    let open = exp.state().undirected_edges();
    if let Some(e) = exp.cut_table(&open)?.unreachable_edge() {
        return Err(Error::UnreachableEdge(e));
    }
    let n = exp.state().n();
    let limit = outer_iteration_limit(n);
    let mut phases = Vec::new();
    while !exp.state().is_fully_oriented() {
        if phases.len() >= limit {
            return Err(Error::InvariantViolated(format!(
                "more than {limit} outer iterations on {n} vertices"
            )));
        }
        let mut tasks = Vec::new();
        for comp in exp.state().chain_components() {
            if comp.len() < 2 {
                continue;
            }
            let sep = half_clique_separator(&comp.graph)?;
            let mut clique: Vec<usize> = sep.clique.iter().map(|&i| comp.vertices[i]).collect();
            clique.sort_unstable();
            tasks.push(SeparatorTask {
                component: comp.vertices,
                clique,
            });
        }
        let partition = perform_partitioning(exp, &tasks, &opts.cut, rng)?;
        let max_component_after = exp.state().chain_components().iter().map(|c| c.len()).max().unwrap_or(0);
        phases.push(PhaseRecord {
            component_sizes: tasks.iter().map(|t| t.component.len()).collect(),
            separators: tasks.into_iter().map(|t| t.clique).collect(),
            partition,
            max_component_after,
        });
    }
    let dag = Dag::new(n, &exp.state().arcs())?;
    Ok(SearchOutcome {
        dag,
        outer_iterations: phases.len(),
        phases,
    })
}

/// Search against a simulated truth; nature and policy randomness come from
/// separate streams of `seed`.
pub fn search_simulated(
    truth: &Dag,
    actions: &ActionSet,
    seed: u64,
    opts: &SearchOptions,
) -> Result<(SearchOutcome, PolicyTrace)> {
    let mut sim = Simulator::new(truth.clone(), actions.clone(), seed)?;
    let mut rng = rng_stream(seed, POLICY_STREAM);
    let out = off_target_search(&mut sim, opts, &mut rng)?;
    if !sim.matches_truth(&out.dag) {
        return Err(Error::InvariantViolated("search output differs from the truth".into()));
    }
    Ok((out, sim.into_trace()))
}

/// Largest verification LP bound over the equivalence class of `g`.
pub fn nu_max_oracle(g: &Dag, actions: &ActionSet) -> Result<f64> {
    let mut best: f64 = 0.0;
    for member in g.enumerate_mec()? {
        best = best.max(verification_lower_bound(actions, &member)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clique_dag(order: &[usize]) -> Dag {
        let mut arcs = Vec::new();
        for (i, &u) in order.iter().enumerate() {
            for &v in &order[i + 1..] {
                arcs.push((u, v));
            }
        }
        Dag::new(order.len(), &arcs).unwrap()
    }

    #[test]
    fn iteration_limit() {
        assert_eq!(outer_iteration_limit(1), 1);
        assert_eq!(outer_iteration_limit(2), 2);
        assert_eq!(outer_iteration_limit(8), 4);
        assert_eq!(outer_iteration_limit(9), 5);
    }

    #[test]
    fn single_edge_clique_uses_one_iteration() {
        let truth = Dag::new(2, &[(1, 0)]).unwrap();
        let actions = ActionSet::on_target(&truth.skeleton()).unwrap();
        let mut sim = Simulator::new(truth, actions, 0).unwrap();
        let mut rng = rng_stream(0, POLICY_STREAM);
        let it = orient_internal_clique_edges(
            &mut sim,
            &[Edge::new(0, 1)],
            &OrderConstraints::none(),
            &CutViaLpOptions::default(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(it, 1);
        assert_eq!(sim.trace().lp_solves, 1);
    }

    #[test]
    fn four_clique_needs_at_most_two_iterations() {
        for perm in [[0, 1, 2, 3], [3, 1, 0, 2], [2, 3, 0, 1]] {
            let truth = clique_dag(&perm);
            let actions = ActionSet::on_target(&truth.skeleton()).unwrap();
            let mut sim = Simulator::new(truth, actions, 1).unwrap();
            let mut rng = rng_stream(1, POLICY_STREAM);
            let t: Vec<Edge> = clique_edges(&[0, 1, 2, 3]).collect();
            let it = orient_internal_clique_edges(
                &mut sim,
                &t,
                &OrderConstraints::none(),
                &CutViaLpOptions::default(),
                &mut rng,
            )
            .unwrap();
            assert!(it <= 2, "{perm:?}: {it}");
            assert!(sim.is_solved());
        }
    }

    #[test]
    fn rejects_non_clique_targets() {
        let truth = Dag::new(3, &[(0, 1), (1, 2)]).unwrap();
        let actions = ActionSet::on_target(&truth.skeleton()).unwrap();
        let mut sim = Simulator::new(truth, actions, 0).unwrap();
        let mut rng = rng_stream(0, POLICY_STREAM);
        let r = orient_internal_clique_edges(
            &mut sim,
            &[Edge::new(0, 1), Edge::new(1, 2)],
            &OrderConstraints::none(),
            &CutViaLpOptions::default(),
            &mut rng,
        );
        assert!(matches!(r, Err(Error::InvariantViolated(_))));
    }

    #[test]
    fn oriented_input_costs_nothing() {
        let truth = Dag::new(3, &[(0, 2), (1, 2)]).unwrap();
        let actions = ActionSet::on_target(&truth.skeleton()).unwrap();
        let (out, trace) = search_simulated(&truth, &actions, 0, &SearchOptions::default()).unwrap();
        assert_eq!(out.dag, truth);
        assert_eq!(out.outer_iterations, 0);
        assert_eq!(trace.total_cost, 0.0);
    }

    #[test]
    fn recovers_cliques_and_paths() {
        let path = Dag::new(5, &[(2, 1), (1, 0), (2, 3), (3, 4)]).unwrap();
        for truth in [clique_dag(&[4, 0, 3, 1, 2]), path] {
            let host = truth.skeleton();
            for actions in [
                ActionSet::on_target(&host).unwrap(),
                ActionSet::make_rhop(&host, 1).unwrap(),
                ActionSet::make_fathand(&host, 0.5).unwrap(),
            ] {
                for seed in 0..5 {
                    let (out, _) = search_simulated(&truth, &actions, seed, &SearchOptions::default()).unwrap();
                    assert_eq!(out.dag, truth);
                    assert!(out.outer_iterations <= outer_iteration_limit(5));
                }
            }
        }
    }

    #[test]
    fn nu_max_small_cases() {
        let edge = Dag::new(2, &[(0, 1)]).unwrap();
        let a = ActionSet::on_target(&edge.skeleton()).unwrap();
        assert!((nu_max_oracle(&edge, &a).unwrap() - 1.0).abs() < 1e-9);
        let path = Dag::new(3, &[(0, 1), (1, 2)]).unwrap();
        let a = ActionSet::on_target(&path.skeleton()).unwrap();
        let direct = path
            .enumerate_mec()
            .unwrap()
            .iter()
            .map(|m| verification_lower_bound(&a, m).unwrap())
            .fold(0.0, f64::max);
        assert_eq!(nu_max_oracle(&path, &a).unwrap(), direct);
    }
}
