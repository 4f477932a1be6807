//! Meek orientation rules R1 to R4, closed to a fixed point.
//!
//! For an undirected edge `a - b` the rules orient `a → b` when
//!
//! * R1: some `c → a` with `c` not adjacent to `b`;
//! * R2: some `c` with `a → c → b`;
//! * R3: two non-adjacent `c, d` with `a - c`, `a - d`, `c → b` and `d → b`;
//! * R4: some `c, d` with `a - d`, `a` adjacent to `c`, `d → c → b` and `b` not adjacent to `d`.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Edge;
use crate::state::OrientationState;

/// Returns the closure of `s` as a new state.
pub fn meek_closure(s: &OrientationState) -> Result<OrientationState> {
    let mut out = s.clone();
    meek_closure_in_place(&mut out)?;
    Ok(out)
}

/// Worklist closure. After an arc `p → q` is added, only undirected edges touching
/// `N[p] ∪ N[q]` are re-examined. Returns the number of arcs added.
pub fn meek_closure_in_place(s: &mut OrientationState) -> Result<usize> {
    check_acyclic(s)?;
    let n = s.n();
    let mut queued = vec![false; n * n];
    let mut queue: VecDeque<Edge> = VecDeque::new();
    for e in s.undirected_edges() {
        queued[e.a * n + e.b] = true;
        queue.push_back(e);
    }
    let mut added = 0;
    while let Some(e) = queue.pop_front() {
        queued[e.a * n + e.b] = false;
        if !s.is_undirected(e.a, e.b) {
            continue;
        }
        let arc = if forced(s, e.a, e.b) {
            (e.a, e.b)
        } else if forced(s, e.b, e.a) {
            (e.b, e.a)
        } else {
            continue;
        };
        s.orient(arc.0, arc.1)?;
        added += 1;
        let mut touched: Vec<usize> = vec![arc.0, arc.1];
        touched.extend_from_slice(s.skeleton().neighbors(arc.0));
        touched.extend_from_slice(s.skeleton().neighbors(arc.1));
        touched.sort_unstable();
        touched.dedup();
        for &x in &touched {
            let nbrs: Vec<usize> = s.undirected_neighbors(x).collect();
            for y in nbrs {
                let f = Edge::new(x, y);
                if !queued[f.a * n + f.b] {
                    queued[f.a * n + f.b] = true;
                    queue.push_back(f);
                }
            }
        }
    }
    Ok(added)
}

/// Straightforward fixed-point iteration over all undirected edges. When `rng` is
/// given the candidate order is shuffled on every pass. Kept for differential tests.
pub fn meek_closure_naive<R: Rng>(
    s: &OrientationState,
    mut rng: Option<&mut R>,
) -> Result<OrientationState> {
    check_acyclic(s)?;
    let mut out = s.clone();
    loop {
        let mut candidates: Vec<(usize, usize)> = out
            .undirected_edges()
            .into_iter()
            .flat_map(|e| [(e.a, e.b), (e.b, e.a)])
            .collect();
        if let Some(r) = rng.as_deref_mut() {
            candidates.shuffle(r);
        }
        let mut changed = false;
        for (a, b) in candidates {
            if out.is_undirected(a, b) && forced(&out, a, b) {
                out.orient(a, b)?;
                changed = true;
            }
        }
        if !changed {
            return Ok(out);
        }
    }
}

/// Whether some rule orients the undirected edge `a - b` as `a → b`.
pub fn forced(s: &OrientationState, a: usize, b: usize) -> bool {
    let nb_a = s.skeleton().neighbors(a);
    let nb_b = s.skeleton().neighbors(b);
    // R1
    if nb_a.iter().any(|&c| s.has_arc(c, a) && c != b && !s.adjacent(c, b)) {
        return true;
    }
    // R2
    if nb_a.iter().any(|&c| s.has_arc(a, c) && s.has_arc(c, b)) {
        return true;
    }
    // R3
    let into_b_undirected_from_a: Vec<usize> = nb_b
        .iter()
        .copied()
        .filter(|&c| s.has_arc(c, b) && s.is_undirected(a, c))
        .collect();
    for (i, &c) in into_b_undirected_from_a.iter().enumerate() {
        for &d in &into_b_undirected_from_a[i + 1..] {
            if !s.adjacent(c, d) {
                return true;
            }
        }
    }
    // R4
    for &c in nb_b {
        if !s.has_arc(c, b) || !s.adjacent(a, c) {
            continue;
        }
        for &d in s.skeleton().neighbors(c) {
            if d != b && s.has_arc(d, c) && s.is_undirected(a, d) && !s.adjacent(b, d) {
                return true;
            }
        }
    }
    false
}

fn check_acyclic(s: &OrientationState) -> Result<()> {
    let n = s.n();
    let mut indeg = vec![0usize; n];
    let arcs = s.arcs();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in &arcs {
        indeg[v] += 1;
        out[u].push(v);
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(u) = ready.pop_first() {
        seen += 1;
        for &w in &out[u] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.insert(w);
            }
        }
    }
    if seen < n {
        let stuck = (0..n).find(|&v| indeg[v] > 0).unwrap_or(0);
        return Err(Error::Cyclic(stuck));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::UndirectedGraph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn state(n: usize, edges: &[(usize, usize)], arcs: &[(usize, usize)]) -> OrientationState {
        let mut s = OrientationState::new(UndirectedGraph::new(n, edges).unwrap());
        for &(u, v) in arcs {
            s.orient(u, v).unwrap();
        }
        s
    }

    #[test]
    fn r1_orients_away() {
        // c=0 → a=1, a - b=2, c not adjacent to b
        let s = state(3, &[(0, 1), (1, 2)], &[(0, 1)]);
        let t = meek_closure(&s).unwrap();
        assert!(t.has_arc(1, 2));
    }

    #[test]
    fn r2_closes_directed_path() {
        // v=0 → u=1 → w=2 with v - w
        let s = state(3, &[(0, 1), (1, 2), (0, 2)], &[(0, 1), (1, 2)]);
        let t = meek_closure(&s).unwrap();
        assert!(t.has_arc(0, 2));
    }

    #[test]
    fn r3_fires_on_kite() {
        // a=0, b=1, c=2, d=3: a-c, a-d, a-b, c→b, d→b, c≁d
        let s = state(4, &[(0, 1), (0, 2), (0, 3), (2, 1), (3, 1)], &[(2, 1), (3, 1)]);
        assert!(forced(&s, 0, 1));
        let t = meek_closure(&s).unwrap();
        assert!(t.has_arc(0, 1));
    }

    #[test]
    fn r4_fires() {
        // a=0, b=1, c=2, d=3: a-b, a-d, a-c, d→c→b, b≁d
        let s = state(
            4,
            &[(0, 1), (0, 2), (0, 3), (3, 2), (2, 1)],
            &[(3, 2), (2, 1)],
        );
        assert!(forced(&s, 0, 1));
    }

    #[test]
    fn nothing_oriented_stays_put() {
        let s = state(4, &[(0, 1), (1, 2), (2, 3), (0, 2)], &[]);
        assert_eq!(meek_closure(&s).unwrap(), s);
    }

    #[test]
    fn cyclic_input_is_rejected() {
        let s = state(3, &[(0, 1), (1, 2), (0, 2)], &[(0, 1), (1, 2), (2, 0)]);
        assert!(matches!(meek_closure(&s), Err(Error::Cyclic(_))));
    }

    #[test]
    fn worklist_matches_naive_with_shuffles() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(3..=8);
            let perm: Vec<usize> = {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(&mut rng);
                p
            };
            let mut arcs = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(0.5) {
                        arcs.push((perm[i], perm[j]));
                    }
                }
            }
            let truth = crate::graph::Dag::new(n, &arcs).unwrap();
            let realized: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
            let mut revealed = Vec::new();
            for (u, v, w) in truth.v_structures() {
                revealed.push((u, v));
                revealed.push((w, v));
            }
            for &(u, v) in &arcs {
                if realized.contains(&u) != realized.contains(&v) {
                    revealed.push((u, v));
                }
            }
            revealed.sort_unstable();
            revealed.dedup();
            let edges = arcs.clone();
            let arcs = revealed;
            let s = state(n, &edges, &arcs);
            let a = meek_closure(&s).unwrap();
            let b = meek_closure_naive(&s, Some(&mut rng)).unwrap();
            let c = meek_closure_naive::<ChaCha8Rng>(&s, None).unwrap();
            assert_eq!(a, b);
            assert_eq!(a, c);
            assert_eq!(meek_closure(&a).unwrap(), a);
        }
    }
}
