//! Exhaustive and randomized invariant suites, shared by the CLI and the tests.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chordal::{check_separator, half_clique_separator, random_chordal_graph};
use crate::cover::{
    cover_to_verification, covered_edge_targets, run_cut_via_lp, verification_to_cover, CoverInstance,
    CoverSimulator, CutViaLpOptions,
};
use crate::error::Result;
use crate::graph::Dag;
use crate::intervention::{cut_probabilities, ActionSet};
use crate::lp::solve_vlp;
use crate::simulator::rng_stream;
use crate::state::OrientationState;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub detail: String,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {}/{} cases{}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases - self.failures,
            self.cases,
            if self.detail.is_empty() { String::new() } else { format!("; {}", self.detail) }
        )
    }
}

/// Every labeled DAG on `n` vertices.
pub fn all_dags(n: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let total = 3usize.pow(pairs.len() as u32);
    (0..total)
        .into_par_iter()
        .filter_map(|mut code| {
            let mut arcs = Vec::new();
            for &(u, v) in &pairs {
                match code % 3 {
                    1 => arcs.push((u, v)),
                    2 => arcs.push((v, u)),
                    _ => {}
                }
                code /= 3;
            }
            Dag::new(n, &arcs).ok()
        })
        .collect()
}

/// Essential graph (v-structures plus Meek closure) equals the arcs shared by all
/// members of the equivalence class, for every DAG on up to `max_n` vertices.
pub fn check_essential_graphs(max_n: usize) -> Result<CheckReport> {
    let mut cases = 0;
    let mut failures = 0;
    let mut first = String::new();
    for n in 1..=max_n {
        let dags = all_dags(n);
        let bad: Vec<String> = dags
            .par_iter()
            .map(|g| -> Result<Option<String>> {
                let essential = OrientationState::essential(g)?.arc_set();
                let members = g.enumerate_mec()?;
                let mut common = members[0].arcs();
                common.retain(|&(u, v)| members.iter().all(|m| m.has_arc(u, v)));
                let common: std::collections::BTreeSet<_> = common.into_iter().collect();
                Ok((essential != common).then(|| format!("{:?}", g.arcs())))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        cases += dags.len();
        failures += bad.len();
        if first.is_empty() {
            if let Some(b) = bad.first() {
                first = format!("first mismatch on n = {n}: {b}");
            }
        }
    }
    Ok(CheckReport { name: "essential graph equals equivalence class intersection".into(), cases, failures, detail: first })
}

/// Families of up to `max_sets` distinct vertex subsets, as bitmasks.
fn families(n: usize, max_sets: usize) -> Vec<Vec<u32>> {
    let subsets: Vec<u32> = (0..1u32 << n).collect();
    let mut out: Vec<Vec<u32>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<u32>> = vec![Vec::new()];
    for _ in 0..max_sets {
        let mut next = Vec::new();
        for fam in &frontier {
            let start = fam.last().map_or(0, |&l| l + 1);
            for &s in &subsets[start as usize..] {
                let mut f = fam.clone();
                f.push(s);
                next.push(f);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// For moral DAGs on up to `max_n` vertices and every family of at most
/// `max_sets` interventions: fully oriented after the family exactly when every
/// covered edge is cut by some member.
pub fn check_covered_edge_theorem(max_n: usize, max_sets: usize) -> Result<CheckReport> {
    let mut cases = 0;
    let mut failures = 0;
    let mut first = String::new();
    for n in 1..=max_n {
        let fams = families(n, max_sets);
        let dags: Vec<Dag> = all_dags(n).into_iter().filter(|g| g.is_moral()).collect();
        let per_dag: Vec<(usize, Option<String>)> = dags
            .par_iter()
            .map(|g| -> Result<(usize, Option<String>)> {
                let start = OrientationState::essential(g)?;
                let covered = covered_edge_targets(g);
                let mut bad = 0;
                let mut example = None;
                for fam in &fams {
                    let mut s = start.clone();
                    for &mask in fam {
                        let set: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
                        s.apply_intervention_in_place(g, &set)?;
                    }
                    let all_cut = covered.iter().all(|e| {
                        fam.iter().any(|&m| (m >> e.a & 1) != (m >> e.b & 1))
                    });
                    if s.is_fully_oriented() != all_cut {
                        bad += 1;
                        example.get_or_insert_with(|| format!("{:?} with {fam:?}", g.arcs()));
                    }
                }
                Ok((bad, example))
            })
            .collect::<Result<_>>()?;
        cases += dags.len() * fams.len();
        for (bad, ex) in per_dag {
            failures += bad;
            if first.is_empty() {
                if let Some(e) = ex {
                    first = e;
                }
            }
        }
    }
    Ok(CheckReport { name: "full orientation iff all covered edges cut".into(), cases, failures, detail: first })
}

/// Runs the separator checker on `count` random chordal graphs with `2..=max_n` vertices.
pub fn check_separators(count: usize, max_n: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = rng_stream(seed, 0);
    let mut failures = 0;
    let mut halving_failures = 0;
    let mut first = String::new();
    for i in 0..count {
        let n = rng.gen_range(2..=max_n);
        let keep = rng.gen_range(0.1..0.9);
        let g = random_chordal_graph(n, keep, &mut rng);
        let sep = half_clique_separator(&g)?;
        let report = check_separator(&g, &sep);
        if !report.is_valid() {
            failures += 1;
            if first.is_empty() {
                first = format!("graph {i} (n = {n}) violates {:?}", report.violations());
            }
        }
        if !report.is_halving_clique() {
            halving_failures += 1;
        }
    }
    let detail = format!("{halving_failures} without a halving clique{}{first}", if first.is_empty() { "" } else { "; " });
    Ok(CheckReport { name: "clique separator invariants".into(), cases: count, failures, detail })
}

/// A random stochastic set cover instance in which every element can be covered.
pub fn random_cover_instance<R: Rng + ?Sized>(max_d: usize, max_k: usize, rng: &mut R) -> Result<CoverInstance> {
    let d = rng.gen_range(1..=max_d);
    let k = rng.gen_range(1..=max_k);
    let mut sets: Vec<Vec<(Vec<usize>, f64)>> = (0..k)
        .map(|_| {
            let m = rng.gen_range(1..=4);
            let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter()
                .map(|w| {
                    let elems: Vec<usize> = (0..d).filter(|_| rng.gen_bool(0.3)).collect();
                    (elems, w / total)
                })
                .collect()
        })
        .collect();
    for j in 0..d {
        if !sets.iter().flatten().any(|(e, _)| e.contains(&j)) {
            let i = rng.gen_range(0..k);
            let o = rng.gen_range(0..sets[i].len());
            sets[i][o].0.push(j);
            sets[i][o].0.sort_unstable();
        }
    }
    let weights = (0..k).map(|_| rng.gen_range(0.5..2.0)).collect();
    CoverInstance::new(d, weights, sets)
}

/// On random cover instances the mean CutViaLP cost lies between
/// `0.95 × LP` and `12 ln(max(d, 2)) × LP`.
pub fn check_lp_sandwich(instances: usize, runs: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = rng_stream(seed, 0);
    let insts: Vec<CoverInstance> =
        (0..instances).map(|_| random_cover_instance(12, 12, &mut rng)).collect::<Result<_>>()?;
    let opts = CutViaLpOptions::default();
    let results: Vec<(f64, f64, usize)> = insts
        .par_iter()
        .enumerate()
        .map(|(idx, inst)| -> Result<(f64, f64, usize)> {
            let table = inst.as_table()?;
            let lp = solve_vlp(&table, &inst.weights)?.objective;
            let mut total = 0.0;
            for r in 0..runs {
                let s = seed.wrapping_add((idx * runs + r) as u64);
                let mut sim = CoverSimulator::new(inst, rng_stream(s, 0));
                run_cut_via_lp(&table, &inst.weights, &opts, &mut rng_stream(s, 1), &mut sim)?;
                total += sim.cost;
            }
            Ok((total / runs as f64, lp, inst.d))
        })
        .collect::<Result<_>>()?;
    let mut failures = 0;
    let mut worst_low = f64::INFINITY;
    let mut worst_high: f64 = 0.0;
    for &(mean, lp, d) in &results {
        let lo = mean / lp;
        let hi = mean / (lp * (d.max(2) as f64).ln());
        worst_low = worst_low.min(lo);
        worst_high = worst_high.max(hi);
        if lo < 0.95 || hi > 12.0 {
            failures += 1;
        }
    }
    Ok(CheckReport {
        name: "CutViaLP mean cost within LP corridor".into(),
        cases: instances,
        failures,
        detail: format!("min mean/LP {worst_low:.3}, max mean/(LP ln d) {worst_high:.3}"),
    })
}

/// Cover → verification → cover, and verification → cover → verification,
/// keep the probability tables bit-identical.
pub fn check_reductions(instances: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = rng_stream(seed, 0);
    let mut failures = 0;
    let mut first = String::new();
    let mut note = |i: usize, what: &str, failures: &mut usize| {
        *failures += 1;
        if first.is_empty() {
            first = format!("instance {i}: {what}");
        }
    };
    for i in 0..instances {
        let inst = random_cover_instance(12, 12, &mut rng)?;
        let (dag, actions) = cover_to_verification(&inst)?;
        let table = cut_probabilities(&actions, &covered_edge_targets(&dag))?;
        if table != inst.as_table()? {
            note(i, "cover to verification table differs", &mut failures);
        }
        let (back, _) = verification_to_cover(&dag, &actions)?;
        if back.coverage != inst.coverage {
            note(i, "cover round trip coverage differs", &mut failures);
        }

        let n = rng.gen_range(3..=9);
        let g = crate::bench::gen_gnp_tree(n, 0.3, &mut rng)?;
        let host = g.skeleton();
        let acts = match i % 3 {
            0 => ActionSet::make_rhop(&host, rng.gen_range(1..=2))?,
            1 => ActionSet::make_decaying(&host, rng.gen_range(0.3..1.0))?,
            _ => ActionSet::on_target(&host)?,
        };
        let (cover, targets) = verification_to_cover(&g, &acts)?;
        let direct = cut_probabilities(&acts, &targets)?;
        if (0..targets.len()).any(|j| direct.row(j) != cover.coverage[j].as_slice()) {
            note(i, "verification to cover coverage differs", &mut failures);
        }
        let (dag2, acts2) = cover_to_verification(&cover)?;
        if cut_probabilities(&acts2, &covered_edge_targets(&dag2))? != cover.as_table()? {
            note(i, "verification round trip table differs", &mut failures);
        }
    }
    Ok(CheckReport { name: "reductions preserve probability tables".into(), cases: instances, failures, detail: first })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dag_counts() {
        // labeled DAG counts: 1, 3, 25, 543
        let counts: Vec<usize> = (1..=4).map(|n| all_dags(n).len()).collect();
        assert_eq!(counts, vec![1, 3, 25, 543]);
    }

    #[test]
    fn family_counts() {
        // subsets of 4 vertices: 16; families of <= 2 distinct sets: 1 + 16 + 120
        assert_eq!(families(4, 2).len(), 137);
    }

    #[test]
    fn small_suites_pass() {
        assert!(check_essential_graphs(3).unwrap().passed());
        assert!(check_covered_edge_theorem(3, 2).unwrap().passed());
        assert!(check_reductions(10, 1).unwrap().passed());
    }
}
