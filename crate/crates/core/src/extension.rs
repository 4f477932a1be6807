//! Orienting the undirected part of a state into a member of its equivalence class.
//!
//! Each chain component is ordered so that every vertex's earlier neighbors form a
//! clique. Orienting along such an order creates no new v-structure and no cycle,
//! so together with the revealed arcs it yields a DAG in the same class.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::state::OrientationState;

/// A total order on vertices with its position map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexOrdering {
    order: Vec<usize>,
    pos: Vec<usize>,
}

impl VertexOrdering {
    pub fn new(order: Vec<usize>) -> Result<VertexOrdering> {
        let n = order.len();
        let mut pos = vec![usize::MAX; n];
        for (i, &v) in order.iter().enumerate() {
            if v >= n || pos[v] != usize::MAX {
                return Err(Error::InvalidParameter(format!(
                    "order is not a permutation of 0..{n}"
                )));
            }
            pos[v] = i;
        }
        Ok(VertexOrdering { order, pos })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn position(&self, v: usize) -> usize {
        self.pos[v]
    }

    pub fn precedes(&self, u: usize, v: usize) -> bool {
        self.pos[u] < self.pos[v]
    }
}

/// Ordering requirements for [`consistent_extension`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrderConstraints {
    /// `(u, v)` requires `u` before `v`.
    pub pairs: Vec<(usize, usize)>,
    /// Within one chain component, members of `tiers[i]` come before members of
    /// `tiers[j]` for `i < j`, and listed vertices come before unlisted ones.
    pub tiers: Vec<Vec<usize>>,
}

impl OrderConstraints {
    pub fn none() -> OrderConstraints {
        OrderConstraints::default()
    }

    pub fn pairs(pairs: Vec<(usize, usize)>) -> OrderConstraints {
        OrderConstraints {
            pairs,
            tiers: Vec::new(),
        }
    }

    pub fn tiers(tiers: Vec<Vec<usize>>) -> OrderConstraints {
        OrderConstraints {
            pairs: Vec::new(),
            tiers,
        }
    }
}

/// A DAG extending every revealed arc of `s` and honoring `constraints`, plus the
/// vertex order it was built from.
pub fn consistent_extension(
    s: &OrientationState,
    constraints: &OrderConstraints,
) -> Result<(Dag, VertexOrdering)> {
    let n = s.n();
    for &(u, v) in &constraints.pairs {
        if u >= n || v >= n || u == v {
            return Err(Error::Infeasible(format!("bad constraint ({u}, {v})")));
        }
        if s.has_arc(v, u) {
            return Err(Error::Infeasible(format!(
                "constraint {u} before {v} contradicts revealed arc {v} -> {u}"
            )));
        }
    }
    let mut rank = vec![usize::MAX; n];
    for (i, tier) in constraints.tiers.iter().enumerate() {
        for &v in tier {
            if v >= n {
                return Err(Error::Infeasible(format!("tier vertex {v} out of range")));
            }
            if rank[v] != usize::MAX {
                return Err(Error::Infeasible(format!("vertex {v} listed in two tiers")));
            }
            rank[v] = i;
        }
    }

    let label = s.component_labels();
    let mut arcs: Vec<(usize, usize)> = s.arcs();
    let mut pair_preds = vec![Vec::new(); n];
    let mut pair_succs = vec![Vec::new(); n];
    for &(u, v) in &constraints.pairs {
        if label[u] == label[v] {
            pair_preds[v].push(u);
            pair_succs[u].push(v);
        }
    }

    for comp in s.chain_components() {
        if comp.len() < 2 {
            continue;
        }
        let order = order_component(s, &comp.vertices, &rank, &pair_preds, &pair_succs)?;
        let mut local_pos = vec![usize::MAX; n];
        for (i, &v) in order.iter().enumerate() {
            local_pos[v] = i;
        }
        for &u in &comp.vertices {
            for w in s.undirected_neighbors(u) {
                if local_pos[u] < local_pos[w] {
                    arcs.push((u, w));
                }
            }
        }
    }

    // Global order: Kahn over arcs plus every pair constraint, smallest index first.
    let mut succ = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for &(u, v) in arcs.iter().chain(constraints.pairs.iter()) {
        succ[u].push(v);
        indeg[v] += 1;
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = ready.pop_first() {
        order.push(u);
        for &w in &succ[u] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.insert(w);
            }
        }
    }
    if order.len() < n {
        return Err(Error::Infeasible(
            "ordering constraints and revealed arcs form a cycle".into(),
        ));
    }
    let dag = Dag::new(n, &arcs).map_err(|e| Error::Infeasible(e.to_string()))?;
    Ok((dag, VertexOrdering::new(order)?))
}

fn order_component(
    s: &OrientationState,
    vertices: &[usize],
    rank: &[usize],
    pair_preds: &[Vec<usize>],
    pair_succs: &[Vec<usize>],
) -> Result<Vec<usize>> {
    let n = s.n();
    let constrained = vertices.iter().any(|&v| rank[v] != usize::MAX || !pair_preds[v].is_empty());
    let mut placed = vec![false; n];
    let mut count = vec![0usize; n];
    let mut pending_preds: Vec<usize> = (0..n).map(|v| pair_preds[v].len()).collect();
    let mut order = Vec::with_capacity(vertices.len());

    while order.len() < vertices.len() {
        let min_rank = vertices
            .iter()
            .filter(|&&v| !placed[v])
            .map(|&v| rank[v])
            .min()
            .unwrap_or(usize::MAX);
        let mut eligible: Vec<usize> = vertices
            .iter()
            .copied()
            .filter(|&v| !placed[v] && rank[v] == min_rank && pending_preds[v] == 0)
            .collect();
        eligible.sort_by_key(|&v| {
            let pending_succ = pair_succs[v].iter().any(|&w| !placed[w]);
            (std::cmp::Reverse(pending_succ), std::cmp::Reverse(count[v]), v)
        });
        let chosen = if constrained {
            eligible
                .into_iter()
                .find(|&v| extendable(s, vertices, &placed, v))
        } else {
            eligible.into_iter().next()
        };
        let Some(v) = chosen else {
            return Err(Error::Infeasible(format!(
                "no admissible vertex after placing {} of {} in component starting at {}",
                order.len(),
                vertices.len(),
                vertices[0]
            )));
        };
        placed[v] = true;
        order.push(v);
        for w in s.undirected_neighbors(v) {
            count[w] += 1;
        }
        for &w in &pair_succs[v] {
            pending_preds[w] -= 1;
        }
    }

    // Final certificate: earlier neighbors of every vertex form a clique.
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    for &v in &order {
        let earlier: Vec<usize> = s.undirected_neighbors(v).filter(|&w| pos[w] < pos[v]).collect();
        if !s.skeleton().is_clique(&earlier) {
            return Err(Error::InvariantViolated(format!(
                "ordering of chain component creates a v-structure at {v}"
            )));
        }
    }
    Ok(order)
}

/// Whether placing `v` next keeps the prefix completable: its placed neighbors form a
/// clique and every remaining piece of the component sees a clique in the prefix.
fn extendable(s: &OrientationState, vertices: &[usize], placed: &[bool], v: usize) -> bool {
    let earlier: Vec<usize> = s.undirected_neighbors(v).filter(|&w| placed[w]).collect();
    if !s.skeleton().is_clique(&earlier) {
        return false;
    }
    let n = s.n();
    let mut in_prefix = placed.to_vec();
    in_prefix[v] = true;
    let mut seen = vec![false; n];
    for &start in vertices {
        if in_prefix[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut boundary = BTreeSet::new();
        while let Some(u) = stack.pop() {
            for w in s.undirected_neighbors(u) {
                if in_prefix[w] {
                    boundary.insert(w);
                } else if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        let boundary: Vec<usize> = boundary.into_iter().collect();
        if !s.skeleton().is_clique(&boundary) {
            return false;
        }
    }
    true
}
