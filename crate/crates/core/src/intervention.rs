//! Off-target actions: each attempt intervenes on a random vertex set drawn from
//! the action's distribution.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, UndirectedGraph};

/// Largest number of outcomes [`DistributionSpec::support`] will enumerate.
pub const SUPPORT_LIMIT: usize = 1 << 20;

const MASS_TOLERANCE: f64 = 1e-9;

/// Distribution over intervened vertex sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DistributionSpec {
    /// Always intervenes on exactly this set.
    Deterministic(Vec<usize>),
    /// Intervenes on a single vertex; `(vertex, probability)` pairs summing to 1.
    AtomicWeighted(Vec<(usize, f64)>),
    /// Always intervenes on `center`, plus each neighbor independently with probability `p`.
    FatHand { center: usize, p: f64 },
    /// Explicit list of `(set, probability)` outcomes summing to 1.
    Empirical(Vec<(Vec<usize>, f64)>),
}

impl DistributionSpec {
    pub fn validate(&self, host: &UndirectedGraph) -> Result<()> {
        let n = host.n();
        let check_vertex = |v: usize| {
            if v >= n {
                Err(Error::InvalidParameter(format!("vertex {v} out of range for n = {n}")))
            } else {
                Ok(())
            }
        };
        let check_mass = |ps: &mut dyn Iterator<Item = f64>| {
            let mut total = 0.0;
            for p in ps {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
                }
                total += p;
            }
            if (total - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::InvalidParameter(format!("probabilities sum to {total}")));
            }
            Ok(())
        };
        match self {
            DistributionSpec::Deterministic(set) => set.iter().try_for_each(|&v| check_vertex(v)),
            DistributionSpec::AtomicWeighted(ws) => {
                ws.iter().try_for_each(|&(v, _)| check_vertex(v))?;
                check_mass(&mut ws.iter().map(|&(_, p)| p))
            }
            DistributionSpec::FatHand { center, p } => {
                check_vertex(*center)?;
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::InvalidParameter(format!("fat-hand p = {p} outside [0, 1]")));
                }
                Ok(())
            }
            DistributionSpec::Empirical(outcomes) => {
                for (set, _) in outcomes {
                    set.iter().try_for_each(|&v| check_vertex(v))?;
                }
                check_mass(&mut outcomes.iter().map(|(_, p)| *p))
            }
        }
    }

    /// Draws one realized set (sorted). Uses one `f64` draw for atomic and empirical
    /// distributions and one per neighbor, in increasing order, for fat-hand.
    pub fn sample<R: Rng + ?Sized>(&self, host: &UndirectedGraph, rng: &mut R) -> Vec<usize> {
        let mut out = match self {
            DistributionSpec::Deterministic(set) => set.clone(),
            DistributionSpec::AtomicWeighted(ws) => {
                let u: f64 = rng.gen();
                vec![walk(ws.iter().map(|&(v, p)| (v, p)), u)]
            }
            DistributionSpec::FatHand { center, p } => {
                let mut set = vec![*center];
                for &w in host.neighbors(*center) {
                    if rng.gen::<f64>() < *p {
                        set.push(w);
                    }
                }
                set
            }
            DistributionSpec::Empirical(outcomes) => {
                let u: f64 = rng.gen();
                let idx = walk(outcomes.iter().enumerate().map(|(i, (_, p))| (i, *p)), u);
                outcomes[idx].0.clone()
            }
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Probability that a realized set contains exactly one endpoint of `e`.
    pub fn cut_probability(&self, host: &UndirectedGraph, e: Edge) -> f64 {
        match self {
            DistributionSpec::Deterministic(set) => {
                if set.contains(&e.a) != set.contains(&e.b) {
                    1.0
                } else {
                    0.0
                }
            }
            DistributionSpec::AtomicWeighted(ws) => ws
                .iter()
                .filter(|&&(v, _)| v == e.a || v == e.b)
                .map(|&(_, p)| p)
                .sum::<f64>()
                .min(1.0),
            DistributionSpec::FatHand { center, p } => {
                let inclusion = |v: usize| {
                    if v == *center {
                        1.0
                    } else if host.has_edge(*center, v) {
                        *p
                    } else {
                        0.0
                    }
                };
                let (pu, pv) = (inclusion(e.a), inclusion(e.b));
                (1.0 - pu * pv - (1.0 - pu) * (1.0 - pv)).clamp(0.0, 1.0)
            }
            DistributionSpec::Empirical(outcomes) => {
                let mut total = 0.0;
                for (set, p) in outcomes {
                    if set.contains(&e.a) != set.contains(&e.b) {
                        total += p;
                    }
                }
                total.min(1.0)
            }
        }
    }

    /// Enumerates outcomes as `(sorted set, probability)`. With `relevant` given,
    /// vertices outside it are dropped from every outcome; fat-hand Bernoulli trials
    /// on irrelevant neighbors are marginalized out rather than enumerated.
    /// Zero-probability outcomes are omitted.
    pub fn support(
        &self,
        host: &UndirectedGraph,
        relevant: Option<&[bool]>,
    ) -> Result<Vec<(Vec<usize>, f64)>> {
        let keep = |v: usize| relevant.is_none_or(|r| r[v]);
        let restrict = |set: &[usize]| {
            let mut s: Vec<usize> = set.iter().copied().filter(|&v| keep(v)).collect();
            s.sort_unstable();
            s.dedup();
            s
        };
        match self {
            DistributionSpec::Deterministic(set) => Ok(vec![(restrict(set), 1.0)]),
            DistributionSpec::AtomicWeighted(ws) => Ok(ws
                .iter()
                .filter(|&&(_, p)| p > 0.0)
                .map(|&(v, p)| (restrict(&[v]), p))
                .collect()),
            DistributionSpec::Empirical(outcomes) => Ok(outcomes
                .iter()
                .filter(|(_, p)| *p > 0.0)
                .map(|(set, p)| (restrict(set), *p))
                .collect()),
            DistributionSpec::FatHand { center, p } => {
                let trials: Vec<usize> = host
                    .neighbors(*center)
                    .iter()
                    .copied()
                    .filter(|&w| keep(w))
                    .collect();
                if trials.len() >= 63 || (1usize << trials.len()) > SUPPORT_LIMIT {
                    return Err(Error::TooLarge {
                        what: "fat-hand outcomes",
                        got: trials.len(),
                        limit: SUPPORT_LIMIT.trailing_zeros() as usize,
                    });
                }
                let base = if keep(*center) { vec![*center] } else { Vec::new() };
                let mut out = Vec::with_capacity(1 << trials.len());
                for mask in 0usize..(1 << trials.len()) {
                    let mut prob = 1.0;
                    let mut set = base.clone();
                    for (i, &w) in trials.iter().enumerate() {
                        if mask >> i & 1 == 1 {
                            prob *= p;
                            set.push(w);
                        } else {
                            prob *= 1.0 - p;
                        }
                    }
                    if prob > 0.0 {
                        set.sort_unstable();
                        out.push((set, prob));
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Cumulative walk; the last positive-mass item absorbs rounding slack.
fn walk<T: Copy>(items: impl Iterator<Item = (T, f64)>, u: f64) -> T {
    let mut acc = 0.0;
    let mut last = None;
    for (item, p) in items {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = Some(item);
        if u < acc {
            return item;
        }
    }
    last.expect("distribution has positive mass")
}

/// The `k` available actions with their weights and distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    weights: Vec<f64>,
    dists: Vec<DistributionSpec>,
    host: UndirectedGraph,
}

impl ActionSet {
    pub fn new(
        host: UndirectedGraph,
        weights: Vec<f64>,
        dists: Vec<DistributionSpec>,
    ) -> Result<ActionSet> {
        if dists.is_empty() {
            return Err(Error::InvalidParameter("an action set needs at least one action".into()));
        }
        if weights.len() != dists.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {} actions",
                weights.len(),
                dists.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidParameter(format!("weight {w} is not finite and non-negative")));
        }
        for d in &dists {
            d.validate(&host)?;
        }
        Ok(ActionSet {
            weights,
            dists,
            host,
        })
    }

    /// One unit-weight action per vertex.
    pub fn per_vertex(
        host: UndirectedGraph,
        make: impl Fn(usize) -> DistributionSpec,
    ) -> Result<ActionSet> {
        let dists: Vec<DistributionSpec> = (0..host.n()).map(make).collect();
        let weights = vec![1.0; dists.len()];
        ActionSet::new(host, weights, dists)
    }

    /// `A_v` intervenes on `v` alone.
    pub fn on_target(host: &UndirectedGraph) -> Result<ActionSet> {
        ActionSet::per_vertex(host.clone(), |v| DistributionSpec::Deterministic(vec![v]))
    }

    /// `A_v` picks a uniform vertex within `r` hops of `v`, `v` included.
    pub fn make_rhop(host: &UndirectedGraph, r: usize) -> Result<ActionSet> {
        ActionSet::per_vertex(host.clone(), |v| {
            let dist = host.bfs_distances(v);
            let ball: Vec<usize> = (0..host.n()).filter(|&w| dist[w].is_some_and(|d| d <= r)).collect();
            let p = 1.0 / ball.len() as f64;
            DistributionSpec::AtomicWeighted(ball.into_iter().map(|w| (w, p)).collect())
        })
    }

    /// `A_v` picks vertex `w` with probability proportional to `alpha^dist(v, w)`;
    /// unreachable vertices get no mass.
    pub fn make_decaying(host: &UndirectedGraph, alpha: f64) -> Result<ActionSet> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!("decay alpha = {alpha} outside (0, 1]")));
        }
        ActionSet::per_vertex(host.clone(), |v| {
            let dist = host.bfs_distances(v);
            let raw: Vec<(usize, f64)> = (0..host.n())
                .filter_map(|w| dist[w].map(|d| (w, alpha.powi(d as i32))))
                .filter(|&(_, x)| x > 0.0)
                .collect();
            let total: f64 = raw.iter().map(|&(_, x)| x).sum();
            DistributionSpec::AtomicWeighted(raw.into_iter().map(|(w, x)| (w, x / total)).collect())
        })
    }

    /// `A_v` intervenes on `v` and on each neighbor independently with probability `p`.
    pub fn make_fathand(host: &UndirectedGraph, p: f64) -> Result<ActionSet> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("fat-hand p = {p} outside [0, 1]")));
        }
        ActionSet::per_vertex(host.clone(), |v| DistributionSpec::FatHand { center: v, p })
    }

    pub fn k(&self) -> usize {
        self.dists.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn dists(&self) -> &[DistributionSpec] {
        &self.dists
    }

    pub fn host(&self) -> &UndirectedGraph {
        &self.host
    }

    pub fn sample<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Vec<usize> {
        self.dists[i].sample(&self.host, rng)
    }
}

/// Exact cut probabilities `c_i(e)` for a list of target edges.
#[derive(Debug, Clone, PartialEq)]
pub struct CutProbabilityTable {
    edges: Vec<Edge>,
    index: HashMap<Edge, usize>,
    k: usize,
    // probs[j][i]: probability that action i cuts edges[j]
    probs: Vec<Vec<f64>>,
}

impl CutProbabilityTable {
    /// Builds a table from explicit rows; `rows[j][i]` belongs to `edges[j]` and action `i`.
    pub fn from_rows(edges: Vec<Edge>, k: usize, rows: Vec<Vec<f64>>) -> Result<CutProbabilityTable> {
        if rows.len() != edges.len() || rows.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidParameter("table shape does not match edges x actions".into()));
        }
        if let Some(p) = rows.iter().flatten().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidParameter(format!("cut probability {p} outside [0, 1]")));
        }
        let index = edges.iter().enumerate().map(|(j, &e)| (e, j)).collect();
        Ok(CutProbabilityTable {
            edges,
            index,
            k,
            probs: rows,
        })
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edge_index(&self, e: Edge) -> Option<usize> {
        self.index.get(&e).copied()
    }

    /// Cut probabilities of `edges[j]` across all actions.
    pub fn row(&self, j: usize) -> &[f64] {
        &self.probs[j]
    }

    pub fn get(&self, action: usize, e: Edge) -> Option<f64> {
        self.edge_index(e).map(|j| self.probs[j][action])
    }

    /// The first target no action can cut.
    pub fn unreachable_edge(&self) -> Option<Edge> {
        self.edges
            .iter()
            .zip(&self.probs)
            .find(|(_, row)| row.iter().all(|&p| p <= 0.0))
            .map(|(e, _)| *e)
    }

    /// Table restricted to `targets`, in the given order.
    pub fn restrict(&self, targets: &[Edge]) -> Result<CutProbabilityTable> {
        let mut rows = Vec::with_capacity(targets.len());
        for &e in targets {
            let j = self.edge_index(e).ok_or(Error::EdgeNotInHost(e))?;
            rows.push(self.probs[j].clone());
        }
        CutProbabilityTable::from_rows(targets.to_vec(), self.k, rows)
    }
}

pub fn cut_probabilities(actions: &ActionSet, targets: &[Edge]) -> Result<CutProbabilityTable> {
    let host = actions.host();
    let mut rows = Vec::with_capacity(targets.len());
    for &e in targets {
        if !host.has_edge(e.a, e.b) {
            return Err(Error::EdgeNotInHost(e));
        }
        rows.push(actions.dists().iter().map(|d| d.cut_probability(host, e)).collect());
    }
    CutProbabilityTable::from_rows(targets.to_vec(), actions.k(), rows)
}
