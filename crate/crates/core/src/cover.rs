//! Stochastic set cover, the CutViaLP rounding policy, verification, and the
//! reductions between verification and cover instances.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Dag, Edge};
use crate::intervention::{cut_probabilities, ActionSet, CutProbabilityTable, DistributionSpec};
use crate::lp::{solve_vlp, LpSolution};
use crate::simulator::{Experiment, PolicyTrace, Simulator};
use crate::state::OrientationState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutViaLpOptions {
    /// Multiplier in `y_i = constant * x_i * ln(max(d, 2))`.
    pub constant: f64,
    /// Stop as soon as every target is oriented, even if some are not cut.
    pub early_exit_on_orientation: bool,
    /// Re-solve the LP on the still-uncut targets before every later round.
    pub resolve_residual: bool,
    pub max_rounds: usize,
}

impl Default for CutViaLpOptions {
    fn default() -> Self {
        CutViaLpOptions {
            constant: 9.0,
            early_exit_on_orientation: false,
            resolve_residual: false,
            max_rounds: 100_000,
        }
    }
}

impl CutViaLpOptions {
    /// Constant 1 and stopping as soon as every target is oriented.
    pub fn benchmark() -> Self {
        CutViaLpOptions {
            constant: 1.0,
            early_exit_on_orientation: true,
            ..CutViaLpOptions::default()
        }
    }
}

/// Something CutViaLP can act on: perform actions, ask which targets are done.
pub trait CoverageProcess {
    fn perform(&mut self, action: usize) -> Result<()>;
    fn is_covered(&self, target: usize) -> bool;
    /// Orientation-based completion used by the early-exit option.
    fn is_resolved(&self, target: usize) -> bool {
        self.is_covered(target)
    }
    /// When true the policy stops immediately.
    fn halted(&self) -> bool {
        false
    }
    fn note_lp_solve(&mut self) {}
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutViaLpReport {
    pub rounds: usize,
    pub actions: usize,
    pub cost: f64,
    /// The LP of the first round.
    pub lp: LpSolution,
}

/// Repetitions per round for each action.
pub fn repetitions(x: &[f64], d: usize, constant: f64) -> Vec<f64> {
    let scale = constant * (d.max(2) as f64).ln();
    x.iter().map(|&xi| scale * xi).collect()
}

/// CutViaLP on the targets of `table`: each round performs action `i`
/// `floor(y_i)` times and once more with probability `y_i - floor(y_i)`, until
/// every target is covered.
pub fn run_cut_via_lp<P: CoverageProcess, R: Rng + ?Sized>(
    table: &CutProbabilityTable,
    weights: &[f64],
    opts: &CutViaLpOptions,
    rng: &mut R,
    process: &mut P,
) -> Result<CutViaLpReport> {
    if !(opts.constant > 0.0 && opts.constant.is_finite()) {
        return Err(Error::InvalidParameter(format!("constant {} must be positive", opts.constant)));
    }
    let d = table.edges().len();
    let lp = solve_vlp(table, weights)?;
    process.note_lp_solve();
    let mut report = CutViaLpReport {
        rounds: 0,
        actions: 0,
        cost: 0.0,
        lp: lp.clone(),
    };
    let done = |p: &P| (0..d).all(|j| p.is_covered(j));
    let resolved = |p: &P| (0..d).all(|j| p.is_resolved(j));
    let mut y = repetitions(&lp.x, d, opts.constant);
    while !done(process) {
        if process.halted() || (opts.early_exit_on_orientation && resolved(process)) {
            break;
        }
        if report.rounds >= opts.max_rounds {
            return Err(Error::Stalled(format!(
                "{} rounds without covering all {d} targets",
                report.rounds
            )));
        }
        if opts.resolve_residual && report.rounds > 0 {
            let open: Vec<Edge> = (0..d)
                .filter(|&j| !process.is_covered(j))
                .map(|j| table.edges()[j])
                .collect();
            let residual = solve_vlp(&table.restrict(&open)?, weights)?;
            process.note_lp_solve();
            y = repetitions(&residual.x, open.len(), opts.constant);
        }
        report.rounds += 1;
        for (i, &yi) in y.iter().enumerate() {
            if yi <= 0.0 {
                continue;
            }
            let whole = yi.floor();
            let extra = usize::from(rng.gen::<f64>() < yi - whole);
            let reps = whole as usize + extra;
            for _ in 0..reps {
                process.perform(i)?;
                report.actions += 1;
                report.cost += weights[i];
                if process.halted() || (opts.early_exit_on_orientation && resolved(process)) {
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

/// Drives an [`Experiment`] towards cutting a list of edges.
pub struct EdgeTargets<'a, E: Experiment> {
    pub exp: &'a mut E,
    pub targets: &'a [Edge],
}

impl<E: Experiment> CoverageProcess for EdgeTargets<'_, E> {
    fn perform(&mut self, action: usize) -> Result<()> {
        self.exp.perform(action).map(|_| ())
    }

    fn is_covered(&self, target: usize) -> bool {
        self.exp.state().is_cut(self.targets[target])
    }

    fn is_resolved(&self, target: usize) -> bool {
        self.exp.state().is_oriented(self.targets[target])
    }

    fn note_lp_solve(&mut self) {
        self.exp.note_lp_solve();
    }
}

/// CutViaLP on `targets` within an experiment.
pub fn cut_via_lp<E: Experiment, R: Rng + ?Sized>(
    exp: &mut E,
    targets: &[Edge],
    opts: &CutViaLpOptions,
    rng: &mut R,
) -> Result<CutViaLpReport> {
    let table = exp.cut_table(targets)?;
    let weights = exp.weights().to_vec();
    let mut process = EdgeTargets { exp, targets };
    run_cut_via_lp(&table, &weights, opts, rng, &mut process)
}

/// The covered edges of `g` as unordered pairs, in arc order.
pub fn covered_edge_targets(g: &Dag) -> Vec<Edge> {
    g.covered_edges().into_iter().map(|(u, v)| Edge::new(u, v)).collect()
}

/// LP value on the covered edges of `g`: a lower bound on the expected cost of
/// any policy that verifies `g`.
pub fn verification_lower_bound(actions: &ActionSet, g: &Dag) -> Result<f64> {
    let table = cut_probabilities(actions, &covered_edge_targets(g))?;
    Ok(solve_vlp(&table, actions.weights())?.objective)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOutcome {
    pub confirmed: bool,
    pub trace: PolicyTrace,
}

struct Verifier<'a> {
    sim: &'a mut Simulator,
    targets: &'a [Edge],
    hypothesis: &'a Dag,
    refuted: bool,
}

impl CoverageProcess for Verifier<'_> {
    fn perform(&mut self, action: usize) -> Result<()> {
        self.sim.perform(action)?;
        let st = self.sim.state();
        self.refuted = st.arcs().iter().any(|&(u, v)| !self.hypothesis.has_arc(u, v));
        Ok(())
    }

    fn is_covered(&self, target: usize) -> bool {
        self.sim.state().is_cut(self.targets[target])
    }

    fn is_resolved(&self, target: usize) -> bool {
        self.sim.state().is_oriented(self.targets[target])
    }

    fn halted(&self) -> bool {
        self.refuted
    }

    fn note_lp_solve(&mut self) {
        self.sim.note_lp_solve();
    }
}

/// Runs CutViaLP on the covered edges of `hypothesis` against a simulated truth.
/// Stops with `confirmed = false` as soon as a revealed arc contradicts the hypothesis.
pub fn verify<R: Rng + ?Sized>(
    hypothesis: &Dag,
    truth: &Dag,
    actions: &ActionSet,
    nature_seed: u64,
    opts: &CutViaLpOptions,
    rng: &mut R,
) -> Result<VerifyOutcome> {
    if hypothesis.skeleton() != truth.skeleton() {
        return Err(Error::SkeletonMismatch("hypothesis and truth skeletons differ".into()));
    }
    let mut sim = Simulator::new(truth.clone(), actions.clone(), nature_seed)?;
    let targets = covered_edge_targets(hypothesis);
    let refuted_at_start = sim.state().arcs().iter().any(|&(u, v)| !hypothesis.has_arc(u, v));
    if !refuted_at_start {
        let table = sim.cut_table(&targets)?;
        let weights = actions.weights().to_vec();
        let mut v = Verifier {
            sim: &mut sim,
            targets: &targets,
            hypothesis,
            refuted: false,
        };
        run_cut_via_lp(&table, &weights, opts, rng, &mut v)?;
    }
    let st = sim.state();
    let consistent = st.arcs().iter().all(|&(u, v)| hypothesis.has_arc(u, v));
    let confirmed = consistent && st.is_fully_oriented();
    Ok(VerifyOutcome {
        confirmed,
        trace: sim.into_trace(),
    })
}

/// A stochastic set cover instance over elements `0..d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverInstance {
    pub d: usize,
    pub weights: Vec<f64>,
    /// `sets[i]` lists the outcomes `(covered elements, probability)` of set `i`.
    pub sets: Vec<Vec<(Vec<usize>, f64)>>,
    /// `coverage[j][i]`: probability that set `i` covers element `j`.
    pub coverage: Vec<Vec<f64>>,
}

impl CoverInstance {
    /// Builds the instance; coverage is summed over each set's outcomes in list order.
    pub fn new(d: usize, weights: Vec<f64>, sets: Vec<Vec<(Vec<usize>, f64)>>) -> Result<CoverInstance> {
        if weights.len() != sets.len() || sets.is_empty() {
            return Err(Error::InvalidParameter("need one weight per set and at least one set".into()));
        }
        let mut coverage = vec![vec![0.0; sets.len()]; d];
        for (i, outcomes) in sets.iter().enumerate() {
            let mut total = 0.0;
            for (elems, p) in outcomes {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
                }
                total += p;
                for &j in elems {
                    if j >= d {
                        return Err(Error::InvalidParameter(format!("element {j} out of range")));
                    }
                }
            }
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!("set {i} masses sum to {total}")));
            }
            for (j, row) in coverage.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (elems, p) in outcomes {
                    if elems.contains(&j) {
                        acc += p;
                    }
                }
                row[i] = acc.min(1.0);
            }
        }
        Ok(CoverInstance {
            d,
            weights,
            sets,
            coverage,
        })
    }

    pub fn k(&self) -> usize {
        self.sets.len()
    }

    /// The coverage table keyed by the arcs of [`cover_to_verification`].
    pub fn as_table(&self) -> Result<CutProbabilityTable> {
        let edges = (0..self.d).map(|j| Edge::new(2 * j, 2 * j + 1)).collect();
        CutProbabilityTable::from_rows(edges, self.k(), self.coverage.clone())
    }
}

/// Elements are the covered edges of `g`; each action becomes the set whose
/// outcome is the collection of covered edges its realized set cuts.
pub fn verification_to_cover(g: &Dag, actions: &ActionSet) -> Result<(CoverInstance, Vec<Edge>)> {
    if actions.host() != &g.skeleton() {
        return Err(Error::SkeletonMismatch("action host differs from the DAG skeleton".into()));
    }
    let targets = covered_edge_targets(g);
    let mut relevant = vec![false; g.n()];
    for e in &targets {
        relevant[e.a] = true;
        relevant[e.b] = true;
    }
    let mut sets = Vec::with_capacity(actions.k());
    for dist in actions.dists() {
        let outcomes = dist
            .support(actions.host(), Some(&relevant))?
            .into_iter()
            .map(|(s, p)| {
                let elems: Vec<usize> = targets
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| s.binary_search(&e.a).is_ok() != s.binary_search(&e.b).is_ok())
                    .map(|(j, _)| j)
                    .collect();
                (elems, p)
            })
            .collect();
        sets.push(outcomes);
    }
    Ok((CoverInstance::new(targets.len(), actions.weights().to_vec(), sets)?, targets))
}

/// `d` disjoint arcs `2j → 2j + 1`; set `i` becomes an empirical distribution
/// placing each outcome's mass on the tails of the covered elements' arcs.
pub fn cover_to_verification(inst: &CoverInstance) -> Result<(Dag, ActionSet)> {
    let arcs: Vec<(usize, usize)> = (0..inst.d).map(|j| (2 * j, 2 * j + 1)).collect();
    let dag = Dag::new(2 * inst.d, &arcs)?;
    let dists = inst
        .sets
        .iter()
        .map(|outcomes| {
            DistributionSpec::Empirical(
                outcomes
                    .iter()
                    .map(|(elems, p)| (elems.iter().map(|&j| 2 * j).collect(), *p))
                    .collect(),
            )
        })
        .collect();
    let actions = ActionSet::new(dag.skeleton(), inst.weights.clone(), dists)?;
    Ok((dag, actions))
}

/// Simulates a cover instance directly: performing set `i` draws one outcome.
/// Draws one `f64` per attempt, exactly like the empirical distributions built by
/// [`cover_to_verification`], so both simulations can be coupled.
pub struct CoverSimulator<'a, R: Rng> {
    inst: &'a CoverInstance,
    rng: R,
    covered: Vec<bool>,
    pub cost: f64,
    pub attempts: usize,
}

impl<'a, R: Rng> CoverSimulator<'a, R> {
    pub fn new(inst: &'a CoverInstance, rng: R) -> Self {
        CoverSimulator {
            inst,
            rng,
            covered: vec![false; inst.d],
            cost: 0.0,
            attempts: 0,
        }
    }
}

impl<R: Rng> CoverageProcess for CoverSimulator<'_, R> {
    fn perform(&mut self, action: usize) -> Result<()> {
        let u: f64 = self.rng.gen();
        let mut acc = 0.0;
        let mut pick = None;
        for (idx, (_, p)) in self.inst.sets[action].iter().enumerate() {
            if *p <= 0.0 {
                continue;
            }
            acc += p;
            pick = Some(idx);
            if u < acc {
                break;
            }
        }
        if let Some(idx) = pick {
            for &j in &self.inst.sets[action][idx].0 {
                self.covered[j] = true;
            }
        }
        self.cost += self.inst.weights[action];
        self.attempts += 1;
        Ok(())
    }

    fn is_covered(&self, target: usize) -> bool {
        self.covered[target]
    }
}

/// Whether the revealed arcs of `s` contradict `g`.
pub fn contradicts(s: &OrientationState, g: &Dag) -> bool {
    s.arcs().iter().any(|&(u, v)| !g.has_arc(u, v))
}
