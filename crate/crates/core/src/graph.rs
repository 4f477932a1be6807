//! Directed and undirected graph types on dense vertex indices `0..n`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vertex count accepted by [`Dag::enumerate_mec`].
pub const MEC_ENUMERATION_LIMIT: usize = 8;

/// An unordered vertex pair, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
}

impl Edge {
    pub fn new(u: usize, v: usize) -> Edge {
        if u < v {
            Edge { a: u, b: v }
        } else {
            Edge { a: v, b: u }
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.a == v || self.b == v
    }

    /// The endpoint that is not `v`. Panics if `v` is not an endpoint.
    pub fn other(&self, v: usize) -> usize {
        if v == self.a {
            self.b
        } else {
            assert_eq!(v, self.b, "vertex {v} is not an endpoint of {self}");
            self.a
        }
    }

    /// True when exactly one endpoint lies in the set described by `member`.
    pub fn is_cut_by(&self, member: impl Fn(usize) -> bool) -> bool {
        member(self.a) != member(self.b)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.a, self.b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    n: usize,
    adj: Vec<Vec<usize>>,
}

impl UndirectedGraph {
    pub fn empty(n: usize) -> UndirectedGraph {
        UndirectedGraph {
            n,
            adj: vec![Vec::new(); n],
        }
    }

    /// Builds a graph, rejecting self-loops and out-of-range endpoints.
    /// Duplicate pairs collapse into one edge.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<UndirectedGraph> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(UndirectedGraph { n, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// All edges in lexicographic order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if u < v {
                    out.push(Edge { a: u, b: v });
                }
            }
        }
        out
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(i, &u)| {
            vertices[i + 1..]
                .iter()
                .all(|&v| u != v && self.has_edge(u, v))
        })
    }

    /// Subgraph induced by `vertices`, relabelled to `0..vertices.len()` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> UndirectedGraph {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut adj = vec![Vec::new(); vertices.len()];
        for (i, &v) in vertices.iter().enumerate() {
            for &w in &self.adj[v] {
                if local[w] != usize::MAX {
                    adj[i].push(local[w]);
                }
            }
            adj[i].sort_unstable();
        }
        UndirectedGraph {
            n: vertices.len(),
            adj,
        }
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }

    /// Hop distances from `source`; `None` for unreachable vertices.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// A directed acyclic graph with sorted parent and child lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    n: usize,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Dag {
    /// Validates and builds a DAG. Rejects self-loops, repeated or anti-parallel
    /// arcs, out-of-range endpoints and directed cycles.
    pub fn new(n: usize, arcs: &[(usize, usize)]) -> Result<Dag> {
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        let mut pairs = BTreeSet::new();
        for &(u, v) in arcs {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "arc ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            if !pairs.insert(Edge::new(u, v)) {
                return Err(Error::InvalidGraph(format!(
                    "parallel or anti-parallel arcs between {u} and {v}"
                )));
            }
            parents[v].push(u);
            children[u].push(v);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }
        let dag = Dag {
            n,
            parents,
            children,
        };
        dag.topological_order()?;
        Ok(dag)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.children[u].binary_search(&v).is_ok()
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.has_arc(u, v) || self.has_arc(v, u)
    }

    pub fn arc_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    /// All arcs in lexicographic order.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.arc_count());
        for u in 0..self.n {
            for &v in &self.children[u] {
                out.push((u, v));
            }
        }
        out
    }

    /// Kahn's algorithm, smallest index first among available vertices.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(u) = ready.pop_first() {
            order.push(u);
            for &w in &self.children[u] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        if order.len() < self.n {
            let stuck = (0..self.n).find(|&v| indeg[v] > 0).unwrap_or(0);
            return Err(Error::Cyclic(stuck));
        }
        Ok(order)
    }

    pub fn skeleton(&self) -> UndirectedGraph {
        let mut adj = vec![Vec::new(); self.n];
        for v in 0..self.n {
            adj[v].extend_from_slice(&self.parents[v]);
            adj[v].extend_from_slice(&self.children[v]);
            adj[v].sort_unstable();
        }
        UndirectedGraph { n: self.n, adj }
    }

    /// Triples `(u, v, w)` with `u → v ← w`, `u` and `w` non-adjacent and `u < w`.
    pub fn v_structures(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for v in 0..self.n {
            let pa = &self.parents[v];
            for (i, &u) in pa.iter().enumerate() {
                for &w in &pa[i + 1..] {
                    if !self.adjacent(u, w) {
                        out.push((u, v, w));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn is_moral(&self) -> bool {
        (0..self.n).all(|v| {
            let pa = &self.parents[v];
            pa.iter()
                .enumerate()
                .all(|(i, &u)| pa[i + 1..].iter().all(|&w| self.adjacent(u, w)))
        })
    }

    /// Arcs `u → v` with `Pa(u) = Pa(v) \ {u}`, in lexicographic order.
    pub fn covered_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, v) in self.arcs() {
            let pu = &self.parents[u];
            let pv = &self.parents[v];
            if pv.len() == pu.len() + 1 && pv.iter().filter(|&&p| p != u).eq(pu.iter()) {
                out.push((u, v));
            }
        }
        out
    }

    /// All DAGs with the same skeleton and v-structures, sorted by arc list.
    /// Refuses graphs with more than [`MEC_ENUMERATION_LIMIT`] vertices.
    pub fn enumerate_mec(&self) -> Result<Vec<Dag>> {
        if self.n > MEC_ENUMERATION_LIMIT {
            return Err(Error::TooLarge {
                what: "vertices for MEC enumeration",
                got: self.n,
                limit: MEC_ENUMERATION_LIMIT,
            });
        }
        let edges = self.skeleton().edges();
        let target = self.v_structures();
        let mut found: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
        let mut perm: Vec<usize> = (0..self.n).collect();
        let mut pos = vec![0usize; self.n];
        loop {
            for (i, &v) in perm.iter().enumerate() {
                pos[v] = i;
            }
            let arcs: Vec<(usize, usize)> = edges
                .iter()
                .map(|e| if pos[e.a] < pos[e.b] { (e.a, e.b) } else { (e.b, e.a) })
                .collect();
            if !found.contains(&arcs) {
                let cand = Dag::new(self.n, &arcs).expect("orientation by a total order is acyclic");
                if cand.v_structures() == target {
                    found.insert(arcs);
                }
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        Ok(found
            .into_iter()
            .map(|arcs| Dag::new(self.n, &arcs).expect("validated above"))
            .collect())
    }
}

/// Advances `perm` to the next lexicographic permutation; false after the last one.
pub(crate) fn next_permutation(perm: &mut [usize]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nine_vertex_dag() -> Dag {
        // a..i = 0..8
        Dag::new(
            9,
            &[
                (0, 1),
                (0, 2),
                (0, 3),
                (1, 3),
                (2, 1),
                (2, 3),
                (3, 4),
                (3, 6),
                (3, 7),
                (3, 8),
                (4, 5),
                (4, 7),
                (7, 8),
            ],
        )
        .unwrap()
    }

    #[test]
    fn rejects_cycles_and_duplicates() {
        assert!(matches!(
            Dag::new(3, &[(0, 1), (1, 2), (2, 0)]),
            Err(Error::Cyclic(_))
        ));
        assert!(Dag::new(2, &[(0, 1), (1, 0)]).is_err());
        assert!(Dag::new(2, &[(0, 0)]).is_err());
        assert!(Dag::new(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn skeleton_of_path() {
        let g = Dag::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.skeleton().edges(), vec![Edge::new(0, 1), Edge::new(1, 2)]);
        assert_eq!(Dag::new(3, &[]).unwrap().skeleton().edge_count(), 0);
        assert_eq!(nine_vertex_dag().skeleton().edge_count(), 13);
    }

    #[test]
    fn collider_and_shielded_triangle() {
        let g = Dag::new(3, &[(0, 2), (1, 2)]).unwrap();
        assert_eq!(g.v_structures(), vec![(0, 2, 1)]);
        assert!(!g.is_moral());
        let t = Dag::new(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        assert!(t.v_structures().is_empty());
        assert!(Dag::new(4, &[]).unwrap().is_moral());
        assert!(nine_vertex_dag().is_moral());
    }

    #[test]
    fn covered_edges_of_ordered_clique() {
        let n = 5;
        let mut arcs = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                arcs.push((u, v));
            }
        }
        let g = Dag::new(n, &arcs).unwrap();
        assert_eq!(g.covered_edges(), vec![(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(Dag::new(2, &[(1, 0)]).unwrap().covered_edges(), vec![(1, 0)]);
    }

    #[test]
    fn covered_edges_follow_definition_on_nine_vertex_dag() {
        // Pa(d) = {a, b, c} and Pa(b) = {a, c}, so b→d is covered and c→d is not.
        assert_eq!(nine_vertex_dag().covered_edges(), vec![(0, 2), (1, 3), (2, 1), (4, 7)]);
    }

    #[test]
    fn mec_sizes() {
        assert_eq!(Dag::new(2, &[(0, 1)]).unwrap().enumerate_mec().unwrap().len(), 2);
        let path = Dag::new(3, &[(0, 1), (1, 2)]).unwrap();
        let mec = path.enumerate_mec().unwrap();
        let arcs: Vec<_> = mec.iter().map(Dag::arcs).collect();
        assert_eq!(arcs.len(), 3);
        assert!(!arcs.contains(&vec![(0, 1), (2, 1)]));
        let star = Dag::new(6, &[(5, 0), (5, 1), (5, 2), (5, 3), (5, 4)]).unwrap();
        assert_eq!(star.enumerate_mec().unwrap().len(), 6);
        assert!(matches!(
            Dag::new(9, &[]).unwrap().enumerate_mec(),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn induced_and_components() {
        let g = UndirectedGraph::new(5, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        assert_eq!(g.components(), vec![vec![0, 1, 2], vec![3, 4]]);
        let h = g.induced(&[2, 1, 4]);
        assert!(h.has_edge(0, 1));
        assert_eq!(h.edge_count(), 1);
        assert!(g.is_clique(&[0, 1]));
        assert!(!g.is_clique(&[0, 1, 2]));
    }

    #[test]
    fn permutation_count() {
        let mut p = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 24);
    }
}
