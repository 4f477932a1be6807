//! Partially directed graphs that track revealed orientations and cut edges.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{Dag, Edge, UndirectedGraph};
use crate::meek;

/// A connected component of the unoriented-edge subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainComponent {
    /// Sorted global vertex indices.
    pub vertices: Vec<usize>,
    /// The unoriented edges among `vertices`, relabelled to local indices.
    pub graph: UndirectedGraph,
}

impl ChainComponent {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn local_index(&self, v: usize) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientationState {
    skeleton: UndirectedGraph,
    n: usize,
    // dir[u * n + v] is set iff u → v has been revealed.
    dir: Vec<bool>,
    cut: Vec<bool>,
    interventions: Vec<Vec<usize>>,
}

impl OrientationState {
    /// Every edge of `skeleton` unoriented and uncut.
    pub fn new(skeleton: UndirectedGraph) -> OrientationState {
        let n = skeleton.n();
        OrientationState {
            skeleton,
            n,
            dir: vec![false; n * n],
            cut: vec![false; n * n],
            interventions: Vec::new(),
        }
    }

    /// Observational essential graph: v-structures oriented, then the Meek closure.
    pub fn essential(g: &Dag) -> Result<OrientationState> {
        let mut s = OrientationState::new(g.skeleton());
        for (u, v, w) in g.v_structures() {
            s.orient(u, v)?;
            s.orient(w, v)?;
        }
        meek::meek_closure_in_place(&mut s)?;
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn skeleton(&self) -> &UndirectedGraph {
        &self.skeleton
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.skeleton.has_edge(u, v)
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.dir[u * self.n + v]
    }

    pub fn is_undirected(&self, u: usize, v: usize) -> bool {
        self.skeleton.has_edge(u, v) && !self.has_arc(u, v) && !self.has_arc(v, u)
    }

    pub fn is_oriented(&self, e: Edge) -> bool {
        self.has_arc(e.a, e.b) || self.has_arc(e.b, e.a)
    }

    /// The revealed direction of `e` as `(tail, head)`.
    pub fn direction(&self, e: Edge) -> Option<(usize, usize)> {
        if self.has_arc(e.a, e.b) {
            Some((e.a, e.b))
        } else if self.has_arc(e.b, e.a) {
            Some((e.b, e.a))
        } else {
            None
        }
    }

    pub fn is_cut(&self, e: Edge) -> bool {
        self.cut[e.a * self.n + e.b]
    }

    /// Marks `u → v` as revealed. Returns whether the arc is new.
    pub fn orient(&mut self, u: usize, v: usize) -> Result<bool> {
        if !self.skeleton.has_edge(u, v) {
            return Err(Error::InvalidGraph(format!("({u}, {v}) is not an edge")));
        }
        if self.has_arc(v, u) {
            return Err(Error::InvariantViolated(format!(
                "cannot orient {u} -> {v}: opposite arc already revealed"
            )));
        }
        let fresh = !self.has_arc(u, v);
        self.dir[u * self.n + v] = true;
        Ok(fresh)
    }

    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for e in self.skeleton.edges() {
            if let Some(arc) = self.direction(e) {
                out.push(arc);
            }
        }
        out.sort_unstable();
        out
    }

    pub fn undirected_edges(&self) -> Vec<Edge> {
        self.skeleton
            .edges()
            .into_iter()
            .filter(|e| !self.is_oriented(*e))
            .collect()
    }

    pub fn undirected_neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.skeleton
            .neighbors(v)
            .iter()
            .copied()
            .filter(move |&w| !self.has_arc(v, w) && !self.has_arc(w, v))
    }

    pub fn is_fully_oriented(&self) -> bool {
        self.skeleton.edges().into_iter().all(|e| self.is_oriented(e))
    }

    pub fn cut_edges(&self) -> Vec<Edge> {
        self.skeleton
            .edges()
            .into_iter()
            .filter(|e| self.is_cut(*e))
            .collect()
    }

    pub fn interventions(&self) -> &[Vec<usize>] {
        &self.interventions
    }

    /// Chain component label per vertex; labels count up from 0 in order of smallest member.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for w in self.undirected_neighbors(u) {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Connected components of the unoriented edges, including singletons.
    pub fn chain_components(&self) -> Vec<ChainComponent> {
        let label = self.component_labels();
        let count = label.iter().copied().max().map_or(0, |m| m + 1);
        let mut groups = vec![Vec::new(); count];
        for v in 0..self.n {
            groups[label[v]].push(v);
        }
        groups
            .into_iter()
            .map(|vertices| self.component_on(vertices))
            .collect()
    }

    /// The unoriented subgraph induced on `vertices` (sorted).
    pub fn component_on(&self, mut vertices: Vec<usize>) -> ChainComponent {
        vertices.sort_unstable();
        let mut edges = Vec::new();
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &v) in vertices.iter().enumerate().skip(i + 1) {
                if self.is_undirected(u, v) {
                    edges.push((i, j));
                }
            }
        }
        let graph = UndirectedGraph::new(vertices.len(), &edges).expect("local indices are valid");
        ChainComponent { vertices, graph }
    }

    /// Pure variant of [`OrientationState::apply_intervention_in_place`].
    pub fn apply_intervention(&self, truth: &Dag, realized: &[usize]) -> Result<OrientationState> {
        let mut next = self.clone();
        next.apply_intervention_in_place(truth, realized)?;
        Ok(next)
    }

    /// Reveals every edge cut by `realized` as oriented in `truth`, marks it cut and
    /// closes under the Meek rules. Returns the edges that were not cut before.
    pub fn apply_intervention_in_place(
        &mut self,
        truth: &Dag,
        realized: &[usize],
    ) -> Result<Vec<Edge>> {
        self.check_truth(truth)?;
        let mut member = vec![false; self.n];
        for &v in realized {
            if v >= self.n {
                return Err(Error::InvalidParameter(format!(
                    "intervened vertex {v} out of range"
                )));
            }
            member[v] = true;
        }
        let mut newly = Vec::new();
        let mut changed = false;
        for &v in realized {
            if !member[v] {
                continue;
            }
            let nbrs = self.skeleton.neighbors(v).to_vec();
            for w in nbrs {
                if member[w] {
                    continue;
                }
                let e = Edge::new(v, w);
                if !self.is_cut(e) {
                    self.cut[e.a * self.n + e.b] = true;
                    newly.push(e);
                }
                let (t, h) = if truth.has_arc(v, w) { (v, w) } else { (w, v) };
                changed |= self.orient(t, h)?;
            }
        }
        let mut record: Vec<usize> = realized.to_vec();
        record.sort_unstable();
        record.dedup();
        self.interventions.push(record);
        if changed {
            meek::meek_closure_in_place(self)?;
        }
        newly.sort_unstable();
        Ok(newly)
    }

    fn check_truth(&self, truth: &Dag) -> Result<()> {
        if truth.n() != self.n || truth.arc_count() != self.skeleton.edge_count() {
            return Err(Error::SkeletonMismatch(format!(
                "truth has {} vertices and {} arcs, state has {} vertices and {} edges",
                truth.n(),
                truth.arc_count(),
                self.n,
                self.skeleton.edge_count()
            )));
        }
        for (u, v) in truth.arcs() {
            if !self.skeleton.has_edge(u, v) {
                return Err(Error::SkeletonMismatch(format!("arc {u} -> {v} not in skeleton")));
            }
            if self.has_arc(v, u) {
                return Err(Error::SkeletonMismatch(format!(
                    "revealed arc {v} -> {u} disagrees with truth"
                )));
            }
        }
        Ok(())
    }

    /// No revealed arc may join two vertices of one chain component.
    pub fn check_separation(&self) -> Result<()> {
        let label = self.component_labels();
        for (u, v) in self.arcs() {
            if label[u] == label[v] {
                return Err(Error::InvariantViolated(format!(
                    "arc {u} -> {v} lies inside a chain component"
                )));
            }
        }
        Ok(())
    }

    /// Revealed arcs as a set, for comparisons in tests and checks.
    pub fn arc_set(&self) -> BTreeSet<(usize, usize)> {
        self.arcs().into_iter().collect()
    }
}
