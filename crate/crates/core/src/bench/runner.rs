//! Runs every (graph, distribution, algorithm, repetition) combination of a
//! configuration and tabulates the costs.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Algorithm, ExperimentConfig, GraphSource, StarRootName};
use super::edgelist::load_edge_list;
use super::generate::{gen_gnp_tree, gen_hardness_star, StarRoot};
use crate::baselines::{adapt_on_target, one_shot_policy, random_policy, SeparatorPolicy};
use crate::cover::{verification_lower_bound, CutViaLpOptions};
use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::intervention::ActionSet;
use crate::search::{off_target_search, SearchOptions};
use crate::simulator::{rng_stream, PolicyTrace, Simulator, GRAPH_STREAM, POLICY_STREAM};

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub graph_id: String,
    pub dag: Dag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawRow {
    pub graph_id: String,
    pub n: usize,
    pub dist_kind: String,
    pub dist_param: f64,
    pub algorithm: String,
    pub repetition: usize,
    pub seed: u64,
    pub cost: f64,
    pub actions_taken: usize,
    pub vlp_opt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    /// `graph` for one instance, `size` for all instances with the same `n`.
    pub scope: String,
    pub graph_id: String,
    pub n: usize,
    pub dist_kind: String,
    pub dist_param: f64,
    pub algorithm: String,
    pub count: usize,
    pub mean_cost: f64,
    pub std_cost: f64,
    pub mean_vlp_opt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub graph_id: String,
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResults {
    pub raw: Vec<RawRow>,
    pub aggregate: Vec<AggregateRow>,
    pub failures: Vec<Failure>,
}

fn to_csv<T: Serialize>(rows: &[T], header: &[&str]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Config(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Config(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Config(e.to_string()))
}

pub const RAW_HEADER: [&str; 10] = [
    "graph_id", "n", "dist_kind", "dist_param", "algorithm", "repetition", "seed", "cost", "actions_taken", "vlp_opt",
];
pub const AGGREGATE_HEADER: [&str; 10] = [
    "scope", "graph_id", "n", "dist_kind", "dist_param", "algorithm", "count", "mean_cost", "std_cost", "mean_vlp_opt",
];

impl ExperimentResults {
    pub fn raw_csv(&self) -> Result<Vec<u8>> {
        to_csv(&self.raw, &RAW_HEADER)
    }

    pub fn aggregate_csv(&self) -> Result<Vec<u8>> {
        to_csv(&self.aggregate, &AGGREGATE_HEADER)
    }

    /// Writes `raw.csv`, `aggregate.csv` and, if anything failed, `failures.csv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("raw.csv"), self.raw_csv()?)?;
        std::fs::write(dir.join("aggregate.csv"), self.aggregate_csv()?)?;
        let failures = dir.join("failures.csv");
        if self.failures.is_empty() {
            if failures.exists() {
                std::fs::remove_file(failures)?;
            }
        } else {
            std::fs::write(failures, to_csv(&self.failures, &["graph_id", "stage", "message"])?)?;
        }
        Ok(())
    }
}

/// Generates or loads the graphs of `src`. Failures are reported, not fatal.
pub fn build_instances(src: &GraphSource, seed: u64) -> (Vec<Instance>, Vec<Failure>) {
    let mut out = Vec::new();
    let mut failures = Vec::new();
    match src {
        GraphSource::GnpTree { sizes, p, count } => {
            let mut gi = 0u64;
            for &n in sizes {
                for i in 0..*count {
                    let mut rng = rng_stream(seed, GRAPH_STREAM + gi);
                    gi += 1;
                    let graph_id = format!("gnp_{n}_{i}");
                    match gen_gnp_tree(n, *p, &mut rng) {
                        Ok(dag) => out.push(Instance { graph_id, dag }),
                        Err(e) => failures.push(Failure { graph_id, stage: "generate".into(), message: e.to_string() }),
                    }
                }
            }
        }
        GraphSource::Star { n, root } => {
            let (name, r) = match root {
                StarRootName::Leaf => ("leaf", StarRoot::Leaf(0)),
                StarRootName::Center => ("center", StarRoot::Center),
            };
            let graph_id = format!("star_{n}_{name}");
            match gen_hardness_star(*n).and_then(|s| s.dag(r)) {
                Ok(dag) => out.push(Instance { graph_id, dag }),
                Err(e) => failures.push(Failure { graph_id, stage: "generate".into(), message: e.to_string() }),
            }
        }
        GraphSource::Files { paths } => {
            for p in paths {
                let graph_id = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
                match load_edge_list(p) {
                    Ok(g) => out.push(Instance { graph_id, dag: g.dag }),
                    Err(e) => failures.push(Failure { graph_id, stage: "load".into(), message: e.to_string() }),
                }
            }
        }
    }
    (out, failures)
}

/// One simulated run. Nature uses stream 0 of `seed`, the policy stream 1.
pub fn run_algorithm(
    alg: Algorithm,
    truth: &Dag,
    actions: &ActionSet,
    seed: u64,
    cut: &CutViaLpOptions,
) -> Result<PolicyTrace> {
    let mut sim = Simulator::new(truth.clone(), actions.clone(), seed)?;
    let mut rng = rng_stream(seed, POLICY_STREAM);
    match alg {
        Algorithm::OffTarget => {
            off_target_search(&mut sim, &SearchOptions { cut: *cut }, &mut rng)?;
        }
        Algorithm::Random => random_policy(&mut sim, &mut rng)?,
        Algorithm::OneShot => one_shot_policy(&mut sim, &mut rng)?,
        Algorithm::Separator => adapt_on_target(&mut SeparatorPolicy::new(), &mut sim, &mut rng)?,
    }
    let dag = Dag::new(truth.n(), &crate::simulator::Experiment::state(&sim).arcs())?;
    if !sim.matches_truth(&dag) {
        return Err(Error::InvariantViolated(format!("{} did not recover the truth", alg.name())));
    }
    Ok(sim.into_trace())
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-graph and per-size means and sample standard deviations of `raw`.
pub fn aggregate(raw: &[RawRow]) -> Vec<AggregateRow> {
    type Key = (String, usize, String, u64, String);
    let mut per_graph: Vec<(Key, Vec<&RawRow>)> = Vec::new();
    for r in raw {
        let key = (r.graph_id.clone(), r.n, r.dist_kind.clone(), r.dist_param.to_bits(), r.algorithm.clone());
        match per_graph.last_mut() {
            Some((k, rows)) if *k == key => rows.push(r),
            _ => per_graph.push((key, vec![r])),
        }
    }
    let mut out = Vec::new();
    let mut per_size: BTreeMap<(usize, String, u64, String), (f64, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let row = |scope: &str, graph_id: &str, n, kind: &str, param: f64, alg: &str, costs: &[f64], vlp: &[f64]| {
        let (mean_cost, std_cost) = mean_std(costs);
        AggregateRow {
            scope: scope.into(),
            graph_id: graph_id.into(),
            n,
            dist_kind: kind.into(),
            dist_param: param,
            algorithm: alg.into(),
            count: costs.len(),
            mean_cost,
            std_cost,
            mean_vlp_opt: vlp.iter().sum::<f64>() / vlp.len() as f64,
        }
    };
    for ((gid, n, kind, param_bits, alg), rows) in &per_graph {
        let costs: Vec<f64> = rows.iter().map(|r| r.cost).collect();
        let vlp: Vec<f64> = rows.iter().map(|r| r.vlp_opt).collect();
        let param = f64::from_bits(*param_bits);
        out.push(row("graph", gid, *n, kind, param, alg, &costs, &vlp));
        let e = per_size
            .entry((*n, kind.clone(), *param_bits, alg.clone()))
            .or_insert_with(|| (param, Vec::new(), Vec::new()));
        e.1.extend(costs);
        e.2.extend(vlp);
    }
    for ((n, kind, _, alg), (param, costs, vlp)) in &per_size {
        out.push(row("size", "*", *n, kind, *param, alg, costs, vlp));
    }
    out
}

/// Runs the whole configuration on `jobs` threads (all cores when `None`).
/// Output rows are ordered by graph, distribution, algorithm and repetition,
/// independent of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentResults> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let (instances, mut failures) = build_instances(&cfg.graphs, cfg.seed);
    let cut = cfg.cut_options();

    struct Setting {
        gi: usize,
        di: usize,
        actions: ActionSet,
        vlp: f64,
    }
    let mut settings = Vec::new();
    for (gi, inst) in instances.iter().enumerate() {
        for (di, d) in cfg.distributions.iter().enumerate() {
            let built = d
                .build(&inst.dag.skeleton())
                .and_then(|a| verification_lower_bound(&a, &inst.dag).map(|v| (a, v)));
            match built {
                Ok((actions, vlp)) => settings.push(Setting { gi, di, actions, vlp }),
                Err(e) => failures.push(Failure {
                    graph_id: inst.graph_id.clone(),
                    stage: format!("actions {}", d.kind.name()),
                    message: e.to_string(),
                }),
            }
        }
    }
    let mut work = Vec::new();
    for (si, _) in settings.iter().enumerate() {
        for &alg in &cfg.algorithms {
            for rep in 0..cfg.repetitions {
                work.push((si, alg, rep));
            }
        }
    }
    let results: Vec<(usize, Algorithm, usize, Result<PolicyTrace>)> = pool.install(|| {
        work.par_iter()
            .map(|&(si, alg, rep)| {
                let s = &settings[si];
                let seed = cfg.seed.wrapping_add(rep as u64);
                (si, alg, rep, run_algorithm(alg, &instances[s.gi].dag, &s.actions, seed, &cut))
            })
            .collect()
    });

    let mut raw = Vec::with_capacity(results.len());
    for (si, alg, rep, res) in results {
        let s = &settings[si];
        let inst = &instances[s.gi];
        let d = &cfg.distributions[s.di];
        match res {
            Ok(trace) => raw.push(RawRow {
                graph_id: inst.graph_id.clone(),
                n: inst.dag.n(),
                dist_kind: d.kind.name().into(),
                dist_param: d.param,
                algorithm: alg.name().into(),
                repetition: rep,
                seed: cfg.seed.wrapping_add(rep as u64),
                cost: trace.total_cost,
                actions_taken: trace.actions_taken(),
                vlp_opt: s.vlp,
            }),
            Err(e) => failures.push(Failure {
                graph_id: inst.graph_id.clone(),
                stage: format!("{} {} repetition {rep}", alg.name(), d.kind.name()),
                message: e.to_string(),
            }),
        }
    }
    let aggregate = aggregate(&raw);
    Ok(ExperimentResults { raw, aggregate, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(reps: usize) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"graphs": {{"kind": "gnp_tree", "sizes": [6, 8], "p": 0.2, "count": 2}},
                "distributions": [{{"kind": "on_target"}}, {{"kind": "rhop", "param": 1}}],
                "algorithms": ["off_target", "random", "one_shot", "separator"],
                "repetitions": {reps}, "seed": 5, "output": "unused"}}"#
        ))
        .unwrap()
    }

    #[test]
    fn aggregates_recompute_from_raw() {
        let res = run_experiment(&cfg(3), Some(2)).unwrap();
        assert!(res.failures.is_empty(), "{:?}", res.failures);
        assert_eq!(res.raw.len(), 4 * 2 * 4 * 3);
        for a in res.aggregate.iter().filter(|a| a.scope == "graph") {
            let costs: Vec<f64> = res
                .raw
                .iter()
                .filter(|r| r.graph_id == a.graph_id && r.dist_kind == a.dist_kind && r.algorithm == a.algorithm)
                .map(|r| r.cost)
                .collect();
            assert_eq!(costs.len(), a.count);
            let (m, s) = mean_std(&costs);
            assert!((m - a.mean_cost).abs() < 1e-12 && (s - a.std_cost).abs() < 1e-12);
        }
        let sizes = res.aggregate.iter().filter(|a| a.scope == "size").count();
        assert_eq!(sizes, 2 * 2 * 4);
    }

    #[test]
    fn on_target_single_repetition_is_reproducible() {
        let a = run_experiment(&cfg(1), Some(1)).unwrap();
        let b = run_experiment(&cfg(1), Some(3)).unwrap();
        assert_eq!(a.raw_csv().unwrap(), b.raw_csv().unwrap());
        assert_eq!(a.aggregate_csv().unwrap(), b.aggregate_csv().unwrap());
    }

    #[test]
    fn sample_std() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }
}
