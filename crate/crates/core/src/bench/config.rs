//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "graphs": { "kind": "gnp_tree", "sizes": [10, 20], "p": 0.1, "count": 10 },
//!   "distributions": [{ "kind": "rhop", "param": 1 }, { "kind": "fathand", "param": 0.5 }],
//!   "algorithms": ["off_target", "random", "one_shot", "separator"],
//!   "repetitions": 10,
//!   "seed": 0,
//!   "output": "results"
//! }
//! ```
//!
//! Graph sources: `gnp_tree` as above, `star` (`n`, `root`: `"leaf"` or `"center"`),
//! or `files` (`paths`). Distribution kinds: `on_target`, `rhop` (radius),
//! `decaying` (alpha), `fathand` (p), `star_hardness`. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cover::CutViaLpOptions;
use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;
use crate::intervention::ActionSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    GnpTree { sizes: Vec<usize>, p: f64, count: usize },
    Star { n: usize, root: StarRootName },
    Files { paths: Vec<PathBuf> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StarRootName {
    Leaf,
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistKind {
    OnTarget,
    Rhop,
    Decaying,
    Fathand,
    StarHardness,
}

impl DistKind {
    pub fn name(self) -> &'static str {
        match self {
            DistKind::OnTarget => "on_target",
            DistKind::Rhop => "rhop",
            DistKind::Decaying => "decaying",
            DistKind::Fathand => "fathand",
            DistKind::StarHardness => "star_hardness",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionConfig {
    pub kind: DistKind,
    #[serde(default)]
    pub param: f64,
}

impl DistributionConfig {
    pub fn build(&self, host: &UndirectedGraph) -> Result<ActionSet> {
        match self.kind {
            DistKind::OnTarget => ActionSet::on_target(host),
            DistKind::Rhop => {
                if self.param < 0.0 || self.param.fract() != 0.0 {
                    return Err(Error::Config(format!("rhop radius {} is not a whole number", self.param)));
                }
                ActionSet::make_rhop(host, self.param as usize)
            }
            DistKind::Decaying => ActionSet::make_decaying(host, self.param),
            DistKind::Fathand => ActionSet::make_fathand(host, self.param),
            DistKind::StarHardness => super::generate::star_actions(host),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    OffTarget,
    Random,
    OneShot,
    Separator,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::OffTarget, Algorithm::Random, Algorithm::OneShot, Algorithm::Separator];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::OffTarget => "off_target",
            Algorithm::Random => "random",
            Algorithm::OneShot => "one_shot",
            Algorithm::Separator => "separator",
        }
    }

    pub fn parse(s: &str) -> Result<Algorithm> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

fn default_repetitions() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graphs: GraphSource,
    pub distributions: Vec<DistributionConfig>,
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    /// Directory receiving `raw.csv` and `aggregate.csv`.
    pub output: PathBuf,
    #[serde(default)]
    pub cut: Option<CutConfig>,
}

/// Overrides for the CutViaLP rounding policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutConfig {
    pub constant: Option<f64>,
    pub early_exit_on_orientation: Option<bool>,
    pub resolve_residual: Option<bool>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?;
        if let GraphSource::Files { paths } = &mut cfg.graphs {
            let base = path.parent().unwrap_or(Path::new("."));
            for p in paths.iter_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        if self.distributions.is_empty() {
            return Err(Error::Config("no distributions selected".into()));
        }
        match &self.graphs {
            GraphSource::GnpTree { sizes, p, count } => {
                if sizes.iter().any(|&n| n < 2) || !(0.0..=1.0).contains(p) || *count == 0 {
                    return Err(Error::Config("gnp_tree needs sizes >= 2, p in [0, 1], count >= 1".into()));
                }
            }
            GraphSource::Star { n, .. } if *n < 3 => return Err(Error::Config("star needs n >= 3".into())),
            _ => {}
        }
        Ok(())
    }

    pub fn cut_options(&self) -> CutViaLpOptions {
        let mut o = CutViaLpOptions::default();
        if let Some(c) = self.cut {
            o.constant = c.constant.unwrap_or(o.constant);
            o.early_exit_on_orientation = c.early_exit_on_orientation.unwrap_or(o.early_exit_on_orientation);
            o.resolve_residual = c.resolve_residual.unwrap_or(o.resolve_residual);
        }
        o
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "graphs": {"kind": "gnp_tree", "sizes": [10], "p": 0.1, "count": 2},
        "distributions": [{"kind": "rhop", "param": 1}],
        "algorithms": ["off_target", "random"],
        "output": "out"
    }"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_json(BASE).unwrap();
        assert_eq!(c.repetitions, 10);
        assert_eq!(c.seed, 0);
        assert_eq!(c.algorithms, vec![Algorithm::OffTarget, Algorithm::Random]);
        assert_eq!(c.cut_options(), CutViaLpOptions::default());
    }

    #[test]
    fn rejects_unknown_keys_and_names() {
        let typo = BASE.replace("\"seed\"", "\"sed\"").replace("\"output\"", "\"sede\": 1, \"output\"");
        assert!(ExperimentConfig::from_json(&typo).is_err());
        let bad = BASE.replace("\"random\"", "\"coloring\"");
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let zero = BASE.replace("\"output\"", "\"repetitions\": 0, \"output\"");
        assert!(ExperimentConfig::from_json(&zero).is_err());
        assert!(Algorithm::parse("separator").is_ok());
        assert!(Algorithm::parse("Separator").is_err());
    }
}
