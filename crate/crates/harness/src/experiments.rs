//! Scenario replay, random-edge comparison and hindsight comparison.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rescon_core::confgen::{configuration_for, generate_configuration};
use rescon_core::failsim::{
    apply_failure, delta_v, hindsight_inefficacy, hindsight_strategy, random_connected_graph,
    random_edge_strategy, random_feasible_resources, replay_sequence, resource_count, FailureKind,
    FailureSequence, FailureSource, RandomFailures, SequenceParams, StepOutcome, Strategy,
};
use rescon_core::formation::{
    grid_formation, straight_line_transition_check, synthesize, TransitionReport,
};
use rescon_core::rng::{derive_seed, stream};
use rescon_core::{
    Error, FailureTrace64, FeasibilityReport, Formation64, ResourceMatrix, Topology,
};

use crate::config::ExperimentConfig;
use crate::error::Result;

fn sequence_params(cfg: &ExperimentConfig) -> SequenceParams<f64> {
    SequenceParams {
        geometry: cfg.geometry.clone(),
        limits: cfg.limits,
    }
}

// ---------------------------------------------------------------------------
// Scenario

/// Formation synthesized for one configuration of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormationRecord {
    /// 0 for the initial configuration, otherwise the failure step.
    pub step: usize,
    /// False when the configuration did not change and the previous
    /// formation was kept.
    pub synthesized: bool,
    pub feasible: bool,
    pub formation: Formation64,
    pub report: FeasibilityReport,
    pub stress: Option<f64>,
    pub restarts: Option<usize>,
    pub anneal_seed: u64,
    /// Straight-line move from the previous formation.
    pub transition: Option<TransitionReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub seed: u64,
    pub trace: FailureTrace64,
    pub formations: Vec<FormationRecord>,
}

impl ScenarioResult {
    pub fn synthesis_failures(&self) -> usize {
        self.formations.iter().filter(|f| !f.feasible).count()
    }
}

/// Replay a failure sequence from a line-graph team with our strategy.
pub fn scenario_trace(
    cfg: &ExperimentConfig,
    failures: &mut dyn FailureSource,
) -> Result<FailureTrace64> {
    let (n, r) = (cfg.scenario_n, cfg.scenario_r);
    let resources = ResourceMatrix::full(n, r, cfg.threshold);
    let initial = configuration_for(&Topology::line(n), &resources, &cfg.geometry)?;
    let sequence = FailureSequence::draw(&resources, failures)?;
    let mut unused = stream(cfg.seed, "scenario-strategy", 0);
    Ok(replay_sequence(
        &initial,
        &sequence,
        Strategy::Ours,
        &sequence_params(cfg),
        &mut unused,
    )?)
}

/// Synthesize a formation for the initial configuration and after every
/// reconfiguration, each starting from the previous formation.
pub fn synthesize_trace(
    cfg: &ExperimentConfig,
    trace: &FailureTrace64,
    seed: u64,
) -> Result<Vec<FormationRecord>> {
    let geometry = &cfg.geometry;
    let mut records: Vec<FormationRecord> = Vec::new();
    let mut current = grid_formation(trace.initial.n(), geometry)?;
    let configs = std::iter::once((0, &trace.initial, true)).chain(trace.steps.iter().map(|s| {
        (
            s.step,
            &s.configuration,
            s.outcome == StepOutcome::Reconfigured,
        )
    }));
    for (step, config, changed) in configs {
        let anneal_seed = derive_seed(seed, "scenario-anneal", step as u64);
        if !changed {
            let prev = records.last().expect("initial record").clone();
            records.push(FormationRecord {
                step,
                synthesized: false,
                transition: None,
                ..prev
            });
            continue;
        }
        let mut params = cfg.anneal.clone();
        params.seed = anneal_seed;
        let (formation, report, stress, restarts) =
            match synthesize(&current, config, geometry, &params) {
                Ok(out) => (
                    out.formation,
                    out.report,
                    Some(out.stress),
                    Some(out.restarts),
                ),
                Err(Error::SynthesisFailed { best, .. }) => {
                    log::warn!(
                        "synthesis failed at step {step}: worst margin {}",
                        best.worst_margin()
                    );
                    (current.clone(), *best, None, None)
                }
                Err(e) => return Err(e.into()),
            };
        let transition = if step == 0 {
            None
        } else {
            Some(straight_line_transition_check(
                &current,
                &formation,
                geometry.d_s,
            )?)
        };
        current = formation.clone();
        records.push(FormationRecord {
            step,
            synthesized: true,
            feasible: report.feasible,
            formation,
            report,
            stress,
            restarts,
            anneal_seed,
            transition,
        });
    }
    Ok(records)
}

pub fn run_scenario(cfg: &ExperimentConfig) -> Result<ScenarioResult> {
    let mut failures = RandomFailures(stream(cfg.seed, "scenario-failures", 0));
    let trace = scenario_trace(cfg, &mut failures)?;
    let formations = synthesize_trace(cfg, &trace, cfg.seed)?;
    Ok(ScenarioResult {
        seed: cfg.seed,
        trace,
        formations,
    })
}

// ---------------------------------------------------------------------------
// Random-edge comparison

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaVRecord {
    pub p_r: f64,
    pub trial: usize,
    /// Seed that reproduces this record through [`random_edge_trial`].
    pub sub_seed: u64,
    pub n: usize,
    pub r: usize,
    pub edge_density: f64,
    pub delta_v: f64,
    pub ours_improved: bool,
    pub random_added: bool,
}

/// Per-bin mean Δ_V over edge density. Bin `k` covers `(k/B, (k+1)/B]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedSeries {
    pub p_r: f64,
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// `None` for empty bins.
    pub means: Vec<Option<f64>>,
}

impl BinnedSeries {
    pub fn from_records(p_r: f64, bins: usize, records: &[DeltaVRecord]) -> Self {
        let edges = (0..=bins).map(|k| k as f64 / bins as f64).collect();
        let mut counts = vec![0usize; bins];
        let mut sums = vec![0.0f64; bins];
        for rec in records {
            let k = bin_index(rec.edge_density, bins);
            counts[k] += 1;
            sums[k] += rec.delta_v;
        }
        let means = counts
            .iter()
            .zip(&sums)
            .map(|(&c, &s)| (c > 0).then(|| s / c as f64))
            .collect();
        Self {
            p_r,
            edges,
            counts,
            means,
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn occupied(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.means
            .iter()
            .enumerate()
            .filter_map(|(k, m)| m.map(|m| (k, m)))
    }

    pub fn midpoint(&self, k: usize) -> f64 {
        0.5 * (self.edges[k] + self.edges[k + 1])
    }

    /// Fraction of occupied bins with a positive mean.
    pub fn positive_fraction(&self) -> f64 {
        let occupied: Vec<f64> = self.occupied().map(|(_, m)| m).collect();
        if occupied.is_empty() {
            return 0.0;
        }
        occupied.iter().filter(|&&m| m > 0.0).count() as f64 / occupied.len() as f64
    }
}

/// Bin of a density in `(0, 1]`.
pub fn bin_index(density: f64, bins: usize) -> usize {
    ((density * bins as f64).ceil() as usize).clamp(1, bins) - 1
}

fn random_edge_purpose(p_r: f64) -> String {
    format!("random-edge/{p_r}")
}

/// One Δ_V sample: a random connected graph and feasible resources, one
/// tolerable failure, then both strategies from the same parent.
///
/// Instances that cannot hold `p_r` percent feasibly, or that have no
/// tolerable failure, are redrawn.
pub fn random_edge_trial(
    cfg: &ExperimentConfig,
    p_r: f64,
    trial: usize,
    sub_seed: u64,
) -> Result<DeltaVRecord> {
    let geometry = &cfg.geometry;
    let mut rng = stream(sub_seed, "instance", 0);
    loop {
        let n = rng.gen_range(cfg.n_range.0..=cfg.n_range.1);
        let r = rng.gen_range(cfg.r_range.0..=cfg.r_range.1);
        if n < cfg.threshold || resource_count(n, r, p_r) < cfg.threshold * r {
            continue;
        }
        let pairs = n * (n - 1) / 2;
        let tree = (n - 1) as f64 / pairs as f64;
        let density = if pairs == n - 1 {
            1.0
        } else {
            rng.gen_range(tree..=1.0)
        };
        let graph = random_connected_graph(n, density, &mut rng)?;
        let resources = random_feasible_resources(n, r, p_r, cfg.threshold, &mut rng)?;
        let tolerable = resources
            .nonzero_entries()
            .into_iter()
            .any(|(i, j)| resources.without(i, j).is_ok_and(|g| g.is_feasible()));
        if !tolerable {
            continue;
        }
        let (next, event) = loop {
            let (next, event) = apply_failure(&resources, &mut rng)?;
            if event.kind == FailureKind::Tolerable {
                break (next, event);
            }
        };
        let parent = configuration_for(&graph, &resources, geometry)?;
        let (ours, ours_improved) = match generate_configuration(&parent, &next, geometry) {
            Ok(out) => (out.configuration.topology, true),
            Err(Error::NoImprovingCandidate { .. }) => (graph.clone(), false),
            Err(e) => return Err(e.into()),
        };
        let (random, added) = random_edge_strategy(&parent, event.robot, geometry, &mut rng);
        let dv: f64 = delta_v(&next, &random.topology, &ours)?;
        return Ok(DeltaVRecord {
            p_r,
            trial,
            sub_seed,
            n,
            r,
            edge_density: graph.edge_density()?,
            delta_v: dv,
            ours_improved,
            random_added: added.is_some(),
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomEdgeComparison {
    pub records: Vec<DeltaVRecord>,
    pub series: Vec<BinnedSeries>,
}

pub fn run_random_edge_comparison(cfg: &ExperimentConfig) -> Result<RandomEdgeComparison> {
    let mut records = Vec::new();
    let mut series = Vec::new();
    for &p_r in &cfg.p_r {
        let purpose = random_edge_purpose(p_r);
        let batch: Vec<DeltaVRecord> = (0..cfg.random_trials)
            .into_par_iter()
            .map(|trial| {
                let sub_seed = derive_seed(cfg.seed, &purpose, trial as u64);
                random_edge_trial(cfg, p_r, trial, sub_seed)
            })
            .collect::<Result<_>>()?;
        series.push(BinnedSeries::from_records(p_r, cfg.bins, &batch));
        records.extend(batch);
    }
    Ok(RandomEdgeComparison { records, series })
}

// ---------------------------------------------------------------------------
// Hindsight comparison

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HindsightStepRecord {
    pub n: usize,
    pub trial: usize,
    /// Failure step, from 1.
    pub step: usize,
    /// Hindsight inefficacy of our strategy's topology.
    pub ours: f64,
    /// Hindsight inefficacy of the hindsight-optimized topology.
    pub hindsight: f64,
    pub ours_reconfigured: bool,
    /// Same-parent check against the hindsight strategy at our budget;
    /// `None` when our strategy made no change.
    pub dominance_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HindsightSeriesPoint {
    pub n: usize,
    pub step: usize,
    pub trials: usize,
    pub ours_max: f64,
    pub hindsight_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HindsightComparison {
    pub records: Vec<HindsightStepRecord>,
    pub series: Vec<HindsightSeriesPoint>,
}

impl HindsightComparison {
    pub fn dominance_checks(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.dominance_holds.is_some())
            .count()
    }

    pub fn dominance_violations(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.dominance_holds == Some(false))
            .count()
    }
}

const DOMINANCE_TOL: f64 = 1e-9;

/// One tolerable failure sequence from a line graph with all resources,
/// replayed with our strategy and with the hindsight strategy.
pub fn hindsight_trial(
    cfg: &ExperimentConfig,
    n: usize,
    trial: usize,
) -> Result<Vec<HindsightStepRecord>> {
    let geometry = &cfg.geometry;
    let params = sequence_params(cfg);
    let resources = ResourceMatrix::full(n, cfg.hindsight_r, cfg.threshold);
    let initial = configuration_for(&Topology::line(n), &resources, geometry)?;
    let mut failures = RandomFailures(stream(
        cfg.seed,
        &format!("hindsight-failures/{n}"),
        trial as u64,
    ));
    let sequence = FailureSequence::draw(&resources, &mut failures)?;
    let mut unused = stream(cfg.seed, "hindsight-strategy", 0);
    let ours = replay_sequence(&initial, &sequence, Strategy::Ours, &params, &mut unused)?;
    let hind = replay_sequence(
        &initial,
        &sequence,
        Strategy::Hindsight,
        &params,
        &mut unused,
    )?;

    let mut out = Vec::new();
    for k in 0..sequence.tolerable_len() {
        let oracle = sequence.oracle_after(k);
        let current = &sequence.matrices[k];
        let ours_step = &ours.steps[k];
        let ours_score: f64 =
            hindsight_inefficacy(&ours_step.configuration.topology, current, &oracle.future)?;
        let hind_score = hind.steps[k]
            .hindsight_inefficacy
            .expect("hindsight steps carry their score");
        let reconfigured = ours_step.outcome == StepOutcome::Reconfigured;
        let dominance_holds = if reconfigured {
            let parent = if k == 0 {
                &ours.initial
            } else {
                &ours.steps[k - 1].configuration
            };
            let (_, best) = hindsight_strategy(
                parent,
                current,
                &oracle,
                &geometry.with_budget(ours_step.budget),
            )?;
            Some(best <= ours_score + DOMINANCE_TOL)
        } else {
            None
        };
        out.push(HindsightStepRecord {
            n,
            trial,
            step: ours_step.step,
            ours: ours_score,
            hindsight: hind_score,
            ours_reconfigured: reconfigured,
            dominance_holds,
        });
    }
    Ok(out)
}

pub fn run_hindsight_comparison(cfg: &ExperimentConfig) -> Result<HindsightComparison> {
    let mut records = Vec::new();
    let mut series = Vec::new();
    for &n in &cfg.hindsight_n {
        let per_trial: Vec<Vec<HindsightStepRecord>> = (0..cfg.hindsight_trials)
            .into_par_iter()
            .map(|trial| hindsight_trial(cfg, n, trial))
            .collect::<Result<_>>()?;
        let max_step = per_trial
            .iter()
            .flat_map(|t| t.iter().map(|r| r.step))
            .max()
            .unwrap_or(0);
        for step in 1..=max_step {
            let at: Vec<&HindsightStepRecord> = per_trial
                .iter()
                .filter_map(|t| t.iter().find(|r| r.step == step))
                .collect();
            if at.is_empty() {
                continue;
            }
            series.push(HindsightSeriesPoint {
                n,
                step,
                trials: at.len(),
                ours_max: at.iter().map(|r| r.ours).fold(f64::NEG_INFINITY, f64::max),
                hindsight_min: at.iter().map(|r| r.hindsight).fold(f64::INFINITY, f64::min),
            });
        }
        records.extend(per_trial.into_iter().flatten());
    }
    Ok(HindsightComparison { records, series })
}
