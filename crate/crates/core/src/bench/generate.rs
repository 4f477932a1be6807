//! Random instance generators.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::intervention::{ActionSet, DistributionSpec};

/// Adds a shielding arc to every v-structure `u -> v <- w` until none remain.
/// The new arc points along `order` (a topological order of `g`), so the result
/// stays acyclic.
pub fn close_v_structures(g: &Dag, order: &[usize]) -> Result<Dag> {
    let n = g.n();
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut arcs = g.arcs();
    let mut current = g.clone();
    loop {
        let vs = current.v_structures();
        if vs.is_empty() {
            return Ok(current);
        }
        for (u, _, w) in vs {
            let arc = if pos[u] < pos[w] { (u, w) } else { (w, u) };
            arcs.push(arc);
        }
        arcs.sort_unstable();
        arcs.dedup();
        current = Dag::new(n, &arcs)?;
    }
}

/// Uniform random labeled tree on `n` vertices via a random Prüfer sequence.
pub fn random_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    if n == 2 {
        return vec![(0, 1)];
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut leaves: std::collections::BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &s in &seq {
        let leaf = leaves.pop_first().expect("a Prüfer step always has a leaf");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[s] -= 1;
        if degree[s] == 1 {
            leaves.insert(s);
        }
    }
    let last: Vec<usize> = leaves.into_iter().collect();
    edges.push((last[0], last[1]));
    edges
}

/// Erdős–Rényi `G(n, p)` united with a random tree, oriented from smaller to larger
/// index, with v-structures shielded until the DAG is moral.
pub fn gen_gnp_tree<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Dag> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("gnp_tree needs n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("edge probability {p} outside [0, 1]")));
    }
    let mut arcs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                arcs.push((u, v));
            }
        }
    }
    arcs.extend(random_tree(n, rng));
    arcs.sort_unstable();
    arcs.dedup();
    let order: Vec<usize> = (0..n).collect();
    close_v_structures(&Dag::new(n, &arcs)?, &order)
}

/// Which vertex of the hardness star is the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarRoot {
    Leaf(usize),
    Center,
}

/// Star on `n` vertices: leaves `0..n-1`, center `n - 1`. Action `i < n - 1`
/// always intervenes on leaf `i`; the last action picks a uniform random leaf.
/// No action ever touches the center.
#[derive(Debug, Clone)]
pub struct HardnessStar {
    pub n: usize,
    pub actions: ActionSet,
}

impl HardnessStar {
    pub fn center(&self) -> usize {
        self.n - 1
    }

    pub fn dag(&self, root: StarRoot) -> Result<Dag> {
        let c = self.center();
        let arcs: Vec<(usize, usize)> = match root {
            StarRoot::Center => (0..c).map(|i| (c, i)).collect(),
            StarRoot::Leaf(r) => {
                if r >= c {
                    return Err(Error::InvalidParameter(format!("{r} is not a leaf")));
                }
                (0..c).map(|i| if i == r { (i, c) } else { (c, i) }).collect()
            }
        };
        Dag::new(self.n, &arcs)
    }
}

pub fn star_actions(host: &crate::graph::UndirectedGraph) -> Result<ActionSet> {
    let n = host.n();
    if n < 3 {
        return Err(Error::InvalidParameter(format!("hardness star needs n >= 3, got {n}")));
    }
    let c = n - 1;
    if host.degree(c) != c || host.edge_count() != c {
        return Err(Error::InvalidParameter("graph is not a star centered at the last vertex".into()));
    }
    let mut dists: Vec<DistributionSpec> = (0..c).map(|i| DistributionSpec::Deterministic(vec![i])).collect();
    let p = 1.0 / c as f64;
    dists.push(DistributionSpec::AtomicWeighted((0..c).map(|i| (i, p)).collect()));
    ActionSet::new(host.clone(), vec![1.0; n], dists)
}

pub fn gen_hardness_star(n: usize) -> Result<HardnessStar> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("hardness star needs n >= 3, got {n}")));
    }
    let c = n - 1;
    let edges: Vec<(usize, usize)> = (0..c).map(|i| (i, c)).collect();
    let host = crate::graph::UndirectedGraph::new(n, &edges)?;
    Ok(HardnessStar {
        n,
        actions: star_actions(&host)?,
    })
}
