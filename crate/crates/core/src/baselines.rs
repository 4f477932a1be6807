//! Comparison policies: uniform random actions, a non-adaptive LP sampler, and an
//! adapter that runs an on-target search policy with off-target actions.

use std::collections::VecDeque;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::chordal::half_clique_separator;
use crate::error::{Error, Result};
use crate::graph::Edge;
use crate::lp::solve_vlp;
use crate::simulator::Experiment;
use crate::state::OrientationState;

fn check_reachable<E: Experiment>(exp: &E) -> Result<()> {
    let open = exp.state().undirected_edges();
    match exp.cut_table(&open)?.unreachable_edge() {
        Some(e) => Err(Error::UnreachableEdge(e)),
        None => Ok(()),
    }
}

/// Picks actions uniformly at random until everything is oriented.
pub fn random_policy<E: Experiment, R: Rng + ?Sized>(exp: &mut E, rng: &mut R) -> Result<()> {
    check_reachable(exp)?;
    let k = exp.k();
    while !exp.state().is_fully_oriented() {
        let i = rng.gen_range(0..k);
        exp.perform(i)?;
    }
    Ok(())
}

/// Sampling weights proportional to an LP solution.
fn lp_sampler(x: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(x).map_err(|e| Error::Numerical(format!("LP solution is not a distribution: {e}")))
}

/// Solves the LP once on all initially unoriented edges and samples actions
/// with probability proportional to the solution, never updating it.
pub fn one_shot_policy<E: Experiment, R: Rng + ?Sized>(exp: &mut E, rng: &mut R) -> Result<()> {
    let open = exp.state().undirected_edges();
    if open.is_empty() {
        return Ok(());
    }
    let table = exp.cut_table(&open)?;
    let lp = solve_vlp(&table, exp.weights())?;
    exp.note_lp_solve();
    let sampler = lp_sampler(&lp.x)?;
    while !exp.state().is_fully_oriented() {
        let i = sampler.sample(rng);
        exp.perform(i)?;
    }
    Ok(())
}

/// An on-target search policy: repeatedly names the next vertex to intervene on.
pub trait OnTargetPolicy {
    /// `None` once the policy has nothing more to request.
    fn next_vertex(&mut self, state: &OrientationState) -> Option<usize>;
}

/// Intervenes on every vertex of a 1/2-clique separator of each chain component,
/// then recurses on the chain components that remain.
#[derive(Debug, Default)]
pub struct SeparatorPolicy {
    queue: VecDeque<usize>,
}

impl SeparatorPolicy {
    pub fn new() -> Self {
        Self::default()
    }
}

impl OnTargetPolicy for SeparatorPolicy {
    fn next_vertex(&mut self, state: &OrientationState) -> Option<usize> {
        if state.is_fully_oriented() {
            return None;
        }
        if self.queue.is_empty() {
            for comp in state.chain_components() {
                if comp.len() < 2 {
                    continue;
                }
                let sep = half_clique_separator(&comp.graph).ok()?;
                let mut clique: Vec<usize> = sep.clique.iter().map(|&i| comp.vertices[i]).collect();
                clique.sort_unstable();
                self.queue.extend(clique);
            }
        }
        self.queue.pop_front()
    }
}

/// Runs `inner`, simulating each requested vertex `v` by sampling actions from the
/// LP on `v`'s unoriented incident edges until all of them are oriented.
pub fn adapt_on_target<P: OnTargetPolicy, E: Experiment, R: Rng + ?Sized>(
    inner: &mut P,
    exp: &mut E,
    rng: &mut R,
) -> Result<()> {
    check_reachable(exp)?;
    while let Some(v) = inner.next_vertex(exp.state()) {
        let incident: Vec<Edge> = exp.state().undirected_neighbors(v).map(|w| Edge::new(v, w)).collect();
        if incident.is_empty() {
            continue;
        }
        let table = exp.cut_table(&incident)?;
        if let Some(e) = table.unreachable_edge() {
            log::warn!("skipping vertex {v}: incident edge {e} cannot be cut");
            continue;
        }
        let lp = solve_vlp(&table, exp.weights())?;
        exp.note_lp_solve();
        let sampler = lp_sampler(&lp.x)?;
        while incident.iter().any(|&e| !exp.state().is_oriented(e)) {
            let i = sampler.sample(rng);
            exp.perform(i)?;
        }
    }
    if !exp.state().is_fully_oriented() {
        return Err(Error::Stalled("on-target policy stopped before full orientation".into()));
    }
    Ok(())
}
