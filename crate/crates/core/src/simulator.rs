//! Simulated experiments: the only place that knows the ground-truth DAG.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Dag, Edge};
use crate::intervention::{cut_probabilities, ActionSet, CutProbabilityTable};
use crate::state::OrientationState;

/// ChaCha stream reserved for the randomness of nature (sampling realized sets).
pub const NATURE_STREAM: u64 = 0;
/// ChaCha stream reserved for a policy's own coin flips.
pub const POLICY_STREAM: u64 = 1;
/// First ChaCha stream used for instance generation; graph `g` uses `GRAPH_STREAM + g`.
pub const GRAPH_STREAM: u64 = 2;

/// `ChaCha8Rng::seed_from_u64(seed)` switched to stream `stream`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub action: usize,
    pub realized: Vec<usize>,
    pub newly_cut: Vec<Edge>,
}

/// Everything a policy did during one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PolicyTrace {
    pub steps: Vec<TraceStep>,
    pub total_cost: f64,
    /// Number of LP solves the policy performed.
    pub lp_solves: usize,
}

impl PolicyTrace {
    pub fn actions_taken(&self) -> usize {
        self.steps.len()
    }

    /// Times each action was chosen.
    pub fn counts(&self, k: usize) -> Vec<usize> {
        let mut c = vec![0; k];
        for s in &self.steps {
            c[s.action] += 1;
        }
        c
    }

    /// Total cost recomputed from the steps.
    pub fn recomputed_cost(&self, weights: &[f64]) -> f64 {
        self.steps.iter().map(|s| weights[s.action]).sum()
    }
}

/// What a policy may do: pick actions, read cut probabilities and look at the
/// revealed state. Distributions themselves stay hidden.
pub trait Experiment {
    fn k(&self) -> usize;
    fn weights(&self) -> &[f64];
    fn cut_table(&self, targets: &[Edge]) -> Result<CutProbabilityTable>;
    fn state(&self) -> &OrientationState;
    /// Performs action `i` and returns the realized intervened set.
    fn perform(&mut self, action: usize) -> Result<Vec<usize>>;
    fn note_lp_solve(&mut self);
    fn trace(&self) -> &PolicyTrace;
}

/// A simulated lab bench holding the hidden truth.
#[derive(Debug, Clone)]
pub struct Simulator {
    truth: Dag,
    actions: ActionSet,
    nature: ChaCha8Rng,
    state: OrientationState,
    trace: PolicyTrace,
    check_separation: bool,
}

impl Simulator {
    /// Starts from the essential graph of `truth`, with nature's randomness drawn from
    /// stream [`NATURE_STREAM`] of `seed`.
    pub fn new(truth: Dag, actions: ActionSet, seed: u64) -> Result<Simulator> {
        let state = OrientationState::essential(&truth)?;
        Simulator::with_state(truth, actions, state, rng_stream(seed, NATURE_STREAM))
    }

    pub fn with_state(
        truth: Dag,
        actions: ActionSet,
        state: OrientationState,
        nature: ChaCha8Rng,
    ) -> Result<Simulator> {
        if actions.host() != state.skeleton() {
            return Err(Error::SkeletonMismatch("action host differs from the state skeleton".into()));
        }
        if truth.skeleton() != *state.skeleton() {
            return Err(Error::SkeletonMismatch("truth skeleton differs from the state".into()));
        }
        Ok(Simulator {
            truth,
            actions,
            nature,
            state,
            trace: PolicyTrace::default(),
            check_separation: true,
        })
    }

    /// Turns the per-action chain component separation check on or off.
    pub fn set_separation_check(&mut self, on: bool) {
        self.check_separation = on;
    }

    /// Whether the revealed state equals the truth.
    pub fn is_solved(&self) -> bool {
        self.state.is_fully_oriented()
    }

    /// Compares a policy's answer against the hidden truth.
    pub fn matches_truth(&self, g: &Dag) -> bool {
        *g == self.truth
    }

    pub fn into_trace(self) -> PolicyTrace {
        self.trace
    }
}

impl Experiment for Simulator {
    fn k(&self) -> usize {
        self.actions.k()
    }

    fn weights(&self) -> &[f64] {
        self.actions.weights()
    }

    fn cut_table(&self, targets: &[Edge]) -> Result<CutProbabilityTable> {
        cut_probabilities(&self.actions, targets)
    }

    fn state(&self) -> &OrientationState {
        &self.state
    }

    fn perform(&mut self, action: usize) -> Result<Vec<usize>> {
        if action >= self.actions.k() {
            return Err(Error::InvalidParameter(format!("no action {action}")));
        }
        let realized = self.actions.sample(action, &mut self.nature);
        let newly_cut = self.state.apply_intervention_in_place(&self.truth, &realized)?;
        if self.check_separation {
            self.state.check_separation()?;
        }
        self.trace.total_cost += self.actions.weight(action);
        self.trace.steps.push(TraceStep {
            action,
            realized: realized.clone(),
            newly_cut,
        });
        Ok(realized)
    }

    fn note_lp_solve(&mut self) {
        self.trace.lp_solves += 1;
    }

    fn trace(&self) -> &PolicyTrace {
        &self.trace
    }
}
