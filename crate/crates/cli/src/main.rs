use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use offtarget::bench::{gen_gnp_tree, gen_hardness_star, load_edge_list, run_experiment, write_edge_list};
use offtarget::bench::{Algorithm, DistKind, DistributionConfig, ExperimentConfig, StarRoot};
use offtarget::checks;
use offtarget::cover::{verification_lower_bound, verify, CutViaLpOptions};
use offtarget::simulator::{rng_stream, GRAPH_STREAM, POLICY_STREAM};

#[derive(Parser)]
#[command(name = "offtarget", version, about = "Causal graph verification and search with off-target interventions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    GnpTree,
    StarLeaf,
    StarCenter,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Quick,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Write generated DAGs as edge-list files.
    Gen {
        #[arg(long, value_enum, default_value = "gnp-tree")]
        kind: GraphKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory, overriding the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Comma-separated algorithm names, overriding the configuration.
        #[arg(long, value_delimiter = ',')]
        algorithms: Option<Vec<String>>,
    },
    /// Verify a hypothesized DAG against a simulated truth (the hypothesis itself by default).
    Verify {
        /// Edge-list file with the hypothesized DAG.
        hypothesis: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        /// on_target, rhop:R, decaying:ALPHA, fathand:P or star_hardness.
        #[arg(long, default_value = "on_target")]
        dist: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suites.
    Check {
        #[arg(long, value_enum, default_value = "quick")]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_dist(s: &str) -> Result<DistributionConfig> {
    let (kind, param) = match s.split_once(':') {
        Some((k, p)) => (k, p.parse::<f64>().with_context(|| format!("bad parameter in {s:?}"))?),
        None => (s, 0.0),
    };
    let kind = match kind {
        "on_target" => DistKind::OnTarget,
        "rhop" => DistKind::Rhop,
        "decaying" => DistKind::Decaying,
        "fathand" => DistKind::Fathand,
        "star_hardness" => DistKind::StarHardness,
        other => bail!("unknown distribution {other:?}"),
    };
    Ok(DistributionConfig { kind, param })
}

fn gen(kind: GraphKind, n: usize, p: f64, count: usize, seed: u64, out: PathBuf) -> Result<()> {
    std::fs::create_dir_all(&out)?;
    for i in 0..count {
        let (name, dag) = match kind {
            GraphKind::GnpTree => {
                let mut rng = rng_stream(seed, GRAPH_STREAM + i as u64);
                (format!("gnp_{n}_{i}.txt"), gen_gnp_tree(n, p, &mut rng)?)
            }
            GraphKind::StarLeaf => (format!("star_{n}_leaf.txt"), gen_hardness_star(n)?.dag(StarRoot::Leaf(0))?),
            GraphKind::StarCenter => (format!("star_{n}_center.txt"), gen_hardness_star(n)?.dag(StarRoot::Center)?),
        };
        let path = out.join(name);
        std::fs::write(&path, write_edge_list(&dag))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn run(
    config: PathBuf,
    seed: Option<u64>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    algorithms: Option<Vec<String>>,
) -> Result<bool> {
    let mut cfg = ExperimentConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.output = o;
    }
    if let Some(names) = algorithms {
        cfg.algorithms = names.iter().map(|a| Algorithm::parse(a.trim())).collect::<offtarget::Result<_>>()?;
    }
    let results = run_experiment(&cfg, jobs)?;
    results.write(&cfg.output)?;
    for f in &results.failures {
        eprintln!("failure: {} [{}]: {}", f.graph_id, f.stage, f.message);
    }
    println!(
        "{} runs, {} failures, results in {}",
        results.raw.len(),
        results.failures.len(),
        cfg.output.display()
    );
    Ok(results.failures.is_empty())
}

fn verify_cmd(hypothesis: PathBuf, truth: Option<PathBuf>, dist: &str, seed: u64, out: Option<PathBuf>) -> Result<bool> {
    let hyp = load_edge_list(&hypothesis).with_context(|| format!("reading {}", hypothesis.display()))?.dag;
    let truth = match truth {
        Some(p) => load_edge_list(&p).with_context(|| format!("reading {}", p.display()))?.dag,
        None => hyp.clone(),
    };
    let actions = parse_dist(dist)?.build(&hyp.skeleton())?;
    let bound = verification_lower_bound(&actions, &hyp)?;
    let mut rng = rng_stream(seed, POLICY_STREAM);
    let outcome = verify(&hyp, &truth, &actions, seed, &CutViaLpOptions::default(), &mut rng)?;
    let report = serde_json::json!({
        "confirmed": outcome.confirmed,
        "cost": outcome.trace.total_cost,
        "actions_taken": outcome.trace.actions_taken(),
        "lp_lower_bound": bound,
        "trace": outcome.trace,
    });
    let text = serde_json::to_string_pretty(&report)?;
    match out {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(true)
}

fn check(suite: Suite, seed: u64) -> Result<bool> {
    let reports = match suite {
        Suite::Quick => vec![
            checks::check_essential_graphs(4)?,
            checks::check_covered_edge_theorem(4, 2)?,
            checks::check_separators(100, 60, seed)?,
            checks::check_lp_sandwich(20, 100, seed)?,
            checks::check_reductions(50, seed)?,
        ],
        Suite::Full => vec![
            checks::check_essential_graphs(5)?,
            checks::check_covered_edge_theorem(5, 3)?,
            checks::check_separators(500, 200, seed)?,
            checks::check_lp_sandwich(100, 500, seed)?,
            checks::check_reductions(100, seed)?,
        ],
    };
    for r in &reports {
        println!("{}", r.line());
    }
    Ok(reports.iter().all(|r| r.passed()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen { kind, n, p, count, seed, out } => gen(kind, n, p, count, seed, out).map(|_| true),
        Command::Run { config, seed, out, jobs, algorithms } => run(config, seed, out, jobs, algorithms),
        Command::Verify { hypothesis, truth, dist, seed, out } => verify_cmd(hypothesis, truth, &dist, seed, out),
        Command::Check { suite, seed } => check(suite, seed),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
