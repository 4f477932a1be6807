//! Chordality testing and balanced clique separators.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Chordality {
    /// `peo[0]` is eliminated first: each vertex's later neighbors form a clique.
    Chordal { peo: Vec<usize> },
    /// A chordless cycle of length at least 4, listed in cyclic order.
    NotChordal { cycle: Vec<usize> },
}

impl Chordality {
    pub fn is_chordal(&self) -> bool {
        matches!(self, Chordality::Chordal { .. })
    }
}

/// Maximum cardinality search visit order. Ties go to the lowest index.
pub fn mcs_order(g: &UndirectedGraph) -> Vec<usize> {
    let n = g.n();
    let mut count = vec![0usize; n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    // buckets[c] holds unvisited vertices with count c; stale entries are skipped.
    let mut buckets: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); n + 1];
    for v in 0..n {
        buckets[0].insert(v);
    }
    let mut top = 0;
    for _ in 0..n {
        while buckets[top].is_empty() {
            top -= 1;
        }
        let v = buckets[top].pop_first().expect("non-empty bucket");
        done[v] = true;
        order.push(v);
        for &w in g.neighbors(v) {
            if !done[w] {
                buckets[count[w]].remove(&w);
                count[w] += 1;
                buckets[count[w]].insert(w);
                if count[w] > top {
                    top = count[w];
                }
            }
        }
    }
    order
}

/// For a visit order, the first vertex whose earlier neighbors are not a clique,
/// together with two non-adjacent earlier neighbors.
fn first_violation(g: &UndirectedGraph, order: &[usize]) -> Option<(usize, usize, usize)> {
    let mut pos = vec![0usize; g.n()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    for &v in order {
        let earlier: Vec<usize> = g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| pos[w] < pos[v])
            .collect();
        let Some(&latest) = earlier.iter().max_by_key(|&&w| pos[w]) else {
            continue;
        };
        for &w in &earlier {
            if w != latest && !g.has_edge(w, latest) {
                return Some((v, w, latest));
            }
        }
    }
    None
}

/// Whether every vertex's earlier neighbors in `order` form a clique.
pub fn is_perfect_order(g: &UndirectedGraph, order: &[usize]) -> bool {
    first_violation(g, order).is_none()
}

pub fn is_chordal(g: &UndirectedGraph) -> Chordality {
    let order = mcs_order(g);
    match first_violation(g, &order) {
        None => {
            let mut peo = order;
            peo.reverse();
            Chordality::Chordal { peo }
        }
        Some((v, x, y)) => {
            let cycle = cycle_through(g, v, x, y)
                .or_else(|| find_any_chordless_cycle(g))
                .expect("a non-chordal graph has a chordless cycle");
            Chordality::NotChordal { cycle }
        }
    }
}

/// Shortest `x`–`y` path avoiding `N[v] \ {x, y}`, closed through `v`.
fn cycle_through(g: &UndirectedGraph, v: usize, x: usize, y: usize) -> Option<Vec<usize>> {
    let n = g.n();
    let mut blocked = vec![false; n];
    blocked[v] = true;
    for &w in g.neighbors(v) {
        blocked[w] = true;
    }
    blocked[x] = false;
    blocked[y] = false;
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    seen[x] = true;
    let mut queue = VecDeque::from([x]);
    while let Some(u) = queue.pop_front() {
        if u == y {
            break;
        }
        for &w in g.neighbors(u) {
            if !seen[w] && !blocked[w] && !(u == x && w == y) {
                seen[w] = true;
                prev[w] = u;
                queue.push_back(w);
            }
        }
    }
    if !seen[y] {
        return None;
    }
    let mut path = vec![y];
    let mut cur = y;
    while cur != x {
        cur = prev[cur];
        path.push(cur);
    }
    path.reverse();
    let mut cycle = vec![v];
    cycle.extend(path);
    Some(cycle)
}

fn find_any_chordless_cycle(g: &UndirectedGraph) -> Option<Vec<usize>> {
    for v in 0..g.n() {
        let nb = g.neighbors(v);
        for (i, &x) in nb.iter().enumerate() {
            for &y in &nb[i + 1..] {
                if !g.has_edge(x, y) {
                    if let Some(c) = cycle_through(g, v, x, y) {
                        return Some(c);
                    }
                }
            }
        }
    }
    None
}

/// Maximal cliques of a chordal graph, each sorted, in MCS discovery order.
pub fn maximal_cliques(g: &UndirectedGraph) -> Result<Vec<Vec<usize>>> {
    let order = mcs_order(g);
    if let Some((v, x, y)) = first_violation(g, &order) {
        let cycle = cycle_through(g, v, x, y)
            .or_else(|| find_any_chordless_cycle(g))
            .unwrap_or_default();
        return Err(Error::NotChordal { cycle });
    }
    let mut pos = vec![0usize; g.n()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let candidates: Vec<Vec<usize>> = order
        .iter()
        .map(|&v| {
            let mut c: Vec<usize> = g
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&w| pos[w] < pos[v])
                .collect();
            c.push(v);
            c.sort_unstable();
            c
        })
        .collect();
    let mut out = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        // c is contained in a later candidate iff some later neighbor w of its
        // owner has every member of c as an earlier neighbor or itself.
        let owner = order[i];
        let absorbed = g.neighbors(owner).iter().any(|&w| {
            pos[w] > pos[owner] && {
                let cw = &candidates[pos[w]];
                c.iter().all(|x| cw.binary_search(x).is_ok())
            }
        });
        if !absorbed {
            out.push(c.clone());
        }
    }
    Ok(out)
}

/// A clique `clique` whose removal splits the host into `side_a` and `side_b`
/// with no edges between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueSeparator {
    pub clique: Vec<usize>,
    pub side_a: Vec<usize>,
    pub side_b: Vec<usize>,
}

/// Outcome of [`check_separator`]; each field is one invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeparatorReport {
    pub is_clique: bool,
    pub partitions_vertices: bool,
    pub sides_disconnected: bool,
    /// Every component of `G - C` has at most `n / 2` vertices.
    pub components_halved: bool,
    /// `|side_a|, |side_b| <= ceil(n / 2)`.
    pub sides_balanced: bool,
    /// `|C| <= p - 1` with `p` the clique number of the host.
    pub within_size_bound: bool,
}

impl SeparatorReport {
    pub fn is_valid(&self) -> bool {
        self.is_clique
            && self.partitions_vertices
            && self.sides_disconnected
            && self.components_halved
            && self.sides_balanced
            && self.within_size_bound
    }

    /// The properties later stages depend on: a clique whose removal halves the graph.
    pub fn is_halving_clique(&self) -> bool {
        self.is_clique && self.partitions_vertices && self.sides_disconnected && self.components_halved
    }

    pub fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let checks = [
            (self.is_clique, "not a clique"),
            (self.partitions_vertices, "sets do not partition V"),
            (self.sides_disconnected, "edge between sides"),
            (self.components_halved, "component larger than n/2"),
            (self.sides_balanced, "side larger than ceil(n/2)"),
            (self.within_size_bound, "separator larger than p - 1"),
        ];
        for (ok, msg) in checks {
            if !ok {
                out.push(msg);
            }
        }
        out
    }
}

/// Clique number by brute force over the neighborhood structure of a PEO.
/// Falls back to a generic exhaustive search for non-chordal inputs.
pub fn clique_number(g: &UndirectedGraph) -> usize {
    if g.n() == 0 {
        return 0;
    }
    match maximal_cliques(g) {
        Ok(cs) => cs.iter().map(Vec::len).max().unwrap_or(1),
        Err(_) => {
            let mut best = 1;
            let mut stack: Vec<(Vec<usize>, usize)> = (0..g.n()).map(|v| (vec![v], v)).collect();
            while let Some((c, last)) = stack.pop() {
                best = best.max(c.len());
                for w in last + 1..g.n() {
                    if c.iter().all(|&u| g.has_edge(u, w)) {
                        let mut d = c.clone();
                        d.push(w);
                        stack.push((d, w));
                    }
                }
            }
            best
        }
    }
}

/// Checks a separator against the host graph. Only the clique number is shared
/// with the construction; everything else is recomputed from scratch.
pub fn check_separator(g: &UndirectedGraph, sep: &CliqueSeparator) -> SeparatorReport {
    let n = g.n();
    let mut tag = vec![0u8; n];
    let mut partitions = true;
    for (set, t) in [(&sep.clique, 1u8), (&sep.side_a, 2), (&sep.side_b, 3)] {
        for &v in set.iter() {
            if v >= n || tag[v] != 0 {
                partitions = false;
            } else {
                tag[v] = t;
            }
        }
    }
    partitions &= tag.iter().all(|&t| t != 0);
    let is_clique = sep.clique.iter().enumerate().all(|(i, &u)| {
        sep.clique[i + 1..].iter().all(|&v| u < n && v < n && g.has_edge(u, v))
    });
    let sides_disconnected = sep.side_a.iter().all(|&u| {
        u < n && g.neighbors(u).iter().all(|&w| w >= n || tag[w] != 3)
    });
    let mut seen = vec![false; n];
    let mut largest = 0usize;
    for s in 0..n {
        if seen[s] || tag[s] == 1 {
            continue;
        }
        seen[s] = true;
        let mut size = 0;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            size += 1;
            for &w in g.neighbors(u) {
                if !seen[w] && tag[w] != 1 {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        largest = largest.max(size);
    }
    let components_halved = 2 * largest <= n;
    let half_up = n.div_ceil(2);
    let sides_balanced = sep.side_a.len() <= half_up && sep.side_b.len() <= half_up;
    let p = clique_number(g);
    let within_size_bound = sep.clique.len() < p.max(1);
    SeparatorReport {
        is_clique,
        partitions_vertices: partitions,
        sides_disconnected,
        components_halved,
        sides_balanced,
        within_size_bound,
    }
}

fn components_without(g: &UndirectedGraph, removed: &[bool]) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut seen = removed.to_vec();
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            let u = comp[i];
            i += 1;
            for &w in g.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Splits component sizes into two groups with the smallest possible larger group.
fn balanced_sides(comps: &[Vec<usize>]) -> (Vec<usize>, Vec<usize>) {
    let total: usize = comps.iter().map(Vec::len).sum();
    // reach[i][s]: a subset of the first i components sums to s
    let mut reach = vec![vec![false; total + 1]; comps.len() + 1];
    reach[0][0] = true;
    for (i, c) in comps.iter().enumerate() {
        for s in 0..=total {
            if reach[i][s] {
                reach[i + 1][s] = true;
                if s + c.len() <= total {
                    reach[i + 1][s + c.len()] = true;
                }
            }
        }
    }
    let target = (0..=total / 2)
        .rev()
        .find(|&s| reach[comps.len()][s])
        .unwrap_or(0);
    let mut in_b = vec![false; comps.len()];
    let mut s = target;
    for i in (0..comps.len()).rev() {
        if !reach[i][s] {
            in_b[i] = true;
            s -= comps[i].len();
        }
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, c) in comps.iter().enumerate() {
        if in_b[i] {
            b.extend_from_slice(c);
        } else {
            a.extend_from_slice(c);
        }
    }
    a.sort_unstable();
    b.sort_unstable();
    if a.len() < b.len() {
        (b, a)
    } else {
        (a, b)
    }
}

/// A clique separator whose removal leaves components of at most `n / 2` vertices.
///
/// Every maximal clique with that property is a candidate, as is every clique met
/// while shrinking it greedily one vertex at a time with the halving property intact. Among the candidates the
/// choice prefers, in order: satisfying every checked invariant, fewer clique
/// vertices, a smaller larger side, and the lexicographically smallest clique.
pub fn half_clique_separator(g: &UndirectedGraph) -> Result<CliqueSeparator> {
    let n = g.n();
    if n < 2 || !g.is_connected() {
        return Err(Error::NotSeparable);
    }
    let cliques = maximal_cliques(g)?;
    let p = cliques.iter().map(Vec::len).max().unwrap_or(1);
    let half_up = n.div_ceil(2);

    let evaluate = |clique: &[usize]| -> Option<CliqueSeparator> {
        let mut removed = vec![false; n];
        for &v in clique {
            removed[v] = true;
        }
        let comps = components_without(g, &removed);
        if comps.iter().any(|c| 2 * c.len() > n) {
            return None;
        }
        let (side_a, side_b) = balanced_sides(&comps);
        Some(CliqueSeparator {
            clique: clique.to_vec(),
            side_a,
            side_b,
        })
    };

    let mut candidates: Vec<CliqueSeparator> = Vec::new();
    for k in &cliques {
        let Some(full) = evaluate(k) else {
            continue;
        };
        candidates.push(full);
        let mut shrunk = k.clone();
        loop {
            let mut next = None;
            for i in (0..shrunk.len()).rev() {
                let mut trial = shrunk.clone();
                trial.remove(i);
                if let Some(sep) = evaluate(&trial) {
                    next = Some((trial, sep));
                    break;
                }
            }
            match next {
                Some((trial, sep)) => {
                    candidates.push(sep);
                    shrunk = trial;
                }
                None => break,
            }
        }
    }
    let score = |s: &CliqueSeparator| {
        let misses = usize::from(s.clique.len() + 1 > p)
            + usize::from(s.side_a.len() > half_up || s.side_b.len() > half_up);
        (misses, s.clique.len(), s.side_a.len().max(s.side_b.len()), s.clique.clone())
    };
    candidates
        .into_iter()
        .min_by_key(score)
        .ok_or_else(|| Error::InvariantViolated("no maximal clique halves the graph".into()))
}

/// Random connected chordal graph: vertex `v` attaches to a random existing vertex `u`
/// plus a random subset of the clique `u` itself attached to.
pub fn random_chordal_graph<R: rand::Rng>(n: usize, keep: f64, rng: &mut R) -> UndirectedGraph {
    let mut attach: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        let mut clique = vec![u];
        for &w in &attach[u] {
            if rng.gen_bool(keep) {
                clique.push(w);
            }
        }
        for &w in &clique {
            edges.push((w, v));
        }
        attach[v] = clique;
    }
    UndirectedGraph::new(n, &edges).expect("edges are in range")
}
