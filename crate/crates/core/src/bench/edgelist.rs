//! Plain-text edge lists.
//!
//! ```text
//! # comment
//! n 4
//! 0 1        arc 0 -> 1
//! 1 -> 2     arc 1 -> 2
//! 2 -- 3     undirected; oriented from the smaller to the larger index
//! ```
//!
//! Vertices are indices when every token is an integer below the declared `n`;
//! otherwise tokens are names, numbered by first appearance. The loaded DAG is
//! made moral by shielding v-structures along a topological order.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::generate::close_v_structures;
use crate::error::{Error, Result};
use crate::graph::Dag;

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedGraph {
    pub dag: Dag,
    /// Vertex names when the file used names, in index order.
    pub names: Option<Vec<String>>,
    /// Arcs added to remove v-structures.
    pub added_arcs: usize,
}

pub fn parse_edge_list(text: &str) -> Result<LoadedGraph> {
    let mut declared: Option<usize> = None;
    let mut raw: Vec<(usize, String, String, bool)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["n", count] => {
                if declared.is_some() || !raw.is_empty() {
                    return Err(Error::Parse { line: lineno, msg: "vertex count must come first, once".into() });
                }
                declared = Some(count.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad vertex count {count:?}"),
                })?);
            }
            [u, v] | [u, "->", v] => raw.push((lineno, u.to_string(), v.to_string(), false)),
            [u, "--", v] => raw.push((lineno, u.to_string(), v.to_string(), true)),
            _ => return Err(Error::Parse { line: lineno, msg: format!("cannot read {line:?}") }),
        }
    }

    let numeric = declared.is_some_and(|n| {
        raw.iter()
            .all(|(_, u, v, _)| [u, v].iter().all(|t| t.parse::<usize>().is_ok_and(|x| x < n)))
    });
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut lookup = |t: &str| -> usize {
        if numeric {
            return t.parse().expect("checked above");
        }
        *index.entry(t.to_string()).or_insert_with(|| {
            names.push(t.to_string());
            names.len() - 1
        })
    };
    let mut arcs = Vec::with_capacity(raw.len());
    for (lineno, u, v, undirected) in &raw {
        let (a, b) = (lookup(u), lookup(v));
        if a == b {
            return Err(Error::Parse { line: *lineno, msg: format!("self-loop on {u}") });
        }
        arcs.push(if *undirected { (a.min(b), a.max(b)) } else { (a, b) });
    }
    let n = if numeric {
        declared.unwrap_or(0)
    } else {
        match declared {
            Some(d) if d < names.len() => {
                return Err(Error::Parse { line: 0, msg: format!("{} names but n = {d}", names.len()) })
            }
            Some(d) => d,
            None => names.len(),
        }
    };
    arcs.sort_unstable();
    let before = arcs.len();
    arcs.dedup();
    if arcs.len() != before {
        log::warn!("dropped {} duplicate arcs", before - arcs.len());
    }
    if let Some(&(u, v)) = arcs.iter().find(|&&(u, v)| arcs.binary_search(&(v, u)).is_ok() && u < v) {
        return Err(Error::Parse { line: 0, msg: format!("both {u} -> {v} and {v} -> {u} listed") });
    }
    let dag = Dag::new(n, &arcs)?;
    let order = dag.topological_order()?;
    let moral = close_v_structures(&dag, &order)?;
    Ok(LoadedGraph {
        added_arcs: moral.arc_count() - dag.arc_count(),
        dag: moral,
        names: (!numeric).then_some(names),
    })
}

pub fn load_edge_list(path: &std::path::Path) -> Result<LoadedGraph> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}

pub fn write_edge_list(dag: &Dag) -> String {
    let mut out = format!("n {}\n", dag.n());
    for (u, v) in dag.arcs() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = Dag::new(4, &[(0, 1), (0, 2), (1, 2), (2, 3)]).unwrap();
        let back = parse_edge_list(&write_edge_list(&g)).unwrap();
        assert_eq!(back.dag, g);
        assert_eq!(back.added_arcs, 0);
        assert!(back.names.is_none());
    }

    #[test]
    fn names_and_moralization() {
        let text = "# asia fragment\nsmoke -> lung\nasia -> lung\nlung -- xray\n";
        let g = parse_edge_list(text).unwrap();
        assert_eq!(g.names.as_deref().unwrap(), ["smoke", "lung", "asia", "xray"]);
        assert_eq!(g.added_arcs, 1);
        assert!(g.dag.is_moral());
        assert!(g.dag.has_arc(0, 1) && g.dag.has_arc(2, 1) && g.dag.has_arc(1, 3));
    }

    #[test]
    fn errors_carry_lines() {
        assert!(matches!(parse_edge_list("n 3\n0 1 2 3\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_edge_list("n 3\n1 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_edge_list("n 3\n0 1\n1 2\n2 0\n"), Err(Error::Cyclic(_))));
    }
}
