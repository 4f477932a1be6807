//! Benchmark harness: instance generation, configuration and the repetition runner.

pub mod config;
pub mod edgelist;
pub mod generate;
pub mod runner;

pub use config::{Algorithm, DistKind, DistributionConfig, ExperimentConfig, GraphSource};
pub use edgelist::{load_edge_list, parse_edge_list, write_edge_list};
pub use generate::{gen_gnp_tree, gen_hardness_star, HardnessStar, StarRoot};
pub use runner::{run_algorithm, run_experiment, ExperimentResults};
