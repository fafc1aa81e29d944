//! Resource-failure model, reconfiguration strategies and the comparison
//! metrics used to evaluate them.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::confgen::{
    generate_with_escalation, hindsight_configuration, ConfigGenResult, SearchLimits,
};
use crate::error::{Error, Result};
use crate::geometry::{Configuration, GeometryParams};
use crate::inefficacy::task_inefficacy;
use crate::matrix::Matrix;
use crate::resources::ResourceMatrix;
use crate::scalar::{LpScalar, Real};
use crate::topology::{edge, Edge, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Tolerable,
    Catastrophic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FailureEvent {
    pub robot: usize,
    pub resource: usize,
    pub kind: FailureKind,
}

/// Clear the given held entry and classify the failure by the feasibility
/// of the result.
pub fn fail_entry(
    resources: &ResourceMatrix,
    robot: usize,
    resource: usize,
) -> Result<(ResourceMatrix, FailureEvent)> {
    let next = resources.without(robot, resource)?;
    let kind = if next.is_feasible() {
        FailureKind::Tolerable
    } else {
        FailureKind::Catastrophic
    };
    Ok((
        next,
        FailureEvent {
            robot,
            resource,
            kind,
        },
    ))
}

/// Zero one uniformly chosen nonzero entry.
pub fn apply_failure<R: Rng + ?Sized>(
    resources: &ResourceMatrix,
    rng: &mut R,
) -> Result<(ResourceMatrix, FailureEvent)> {
    let ones = resources.nonzero_entries();
    let &(robot, resource) = ones
        .choose(rng)
        .ok_or_else(|| Error::InvalidInput("resource matrix has no nonzero entry".into()))?;
    fail_entry(resources, robot, resource)
}

/// Source of the next failing `(robot, resource)` entry.
pub trait FailureSource {
    fn next_failure(&mut self, resources: &ResourceMatrix) -> Option<(usize, usize)>;
}

/// Uniform choice among held entries.
pub struct RandomFailures<R>(pub R);

impl<R: Rng> FailureSource for RandomFailures<R> {
    fn next_failure(&mut self, resources: &ResourceMatrix) -> Option<(usize, usize)> {
        resources.nonzero_entries().choose(&mut self.0).copied()
    }
}

/// Fixed failure order.
pub struct ScriptedFailures {
    order: std::vec::IntoIter<(usize, usize)>,
}

impl ScriptedFailures {
    pub fn new(order: Vec<(usize, usize)>) -> Self {
        Self {
            order: order.into_iter(),
        }
    }
}

impl FailureSource for ScriptedFailures {
    fn next_failure(&mut self, _: &ResourceMatrix) -> Option<(usize, usize)> {
        self.order.next()
    }
}

/// Failures drawn until the first catastrophic one (inclusive), with the
/// resource matrix after each event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureSequence {
    pub initial: ResourceMatrix,
    pub events: Vec<FailureEvent>,
    pub matrices: Vec<ResourceMatrix>,
}

impl FailureSequence {
    pub fn draw(initial: &ResourceMatrix, source: &mut dyn FailureSource) -> Result<Self> {
        if !initial.is_feasible() {
            return Err(Error::InfeasibleResources);
        }
        let mut events = Vec::new();
        let mut matrices = Vec::new();
        let mut current = initial.clone();
        while let Some((robot, resource)) = source.next_failure(&current) {
            let (next, event) = fail_entry(&current, robot, resource)?;
            events.push(event);
            matrices.push(next.clone());
            current = next;
            if event.kind == FailureKind::Catastrophic {
                break;
            }
        }
        Ok(Self {
            initial: initial.clone(),
            events,
            matrices,
        })
    }

    pub fn tolerable_len(&self) -> usize {
        self.events
            .iter()
            .take_while(|e| e.kind == FailureKind::Tolerable)
            .count()
    }

    /// Tolerable resource matrices strictly after 0-based event `k`.
    pub fn oracle_after(&self, k: usize) -> Oracle {
        let end = self.tolerable_len();
        let future = if k + 1 < end {
            self.matrices[k + 1..end].to_vec()
        } else {
            Vec::new()
        };
        Oracle { future }
    }
}

/// Future resource matrices known to the hindsight strategy.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Oracle {
    pub future: Vec<ResourceMatrix>,
}

impl Oracle {
    /// Consecutive matrices (starting from `current`) must differ in exactly
    /// one entry that goes from 1 to 0.
    pub fn new(current: &ResourceMatrix, future: Vec<ResourceMatrix>) -> Result<Self> {
        let mut prev = current;
        for next in &future {
            let ok = prev.gamma().shape() == next.gamma().shape()
                && prev.hamming_distance(next) == 1
                && next.count_ones() + 1 == prev.count_ones();
            if !ok {
                return Err(Error::InvalidInput(
                    "oracle matrices must each clear exactly one entry".into(),
                ));
            }
            prev = next;
        }
        Ok(Self { future })
    }
}

/// Connect `failed_robot` to a uniformly chosen non-neighbor, at distance
/// `d_mc`. Unchanged when it already neighbors every robot.
pub fn random_edge_strategy<T: Real, R: Rng + ?Sized>(
    config: &Configuration<T>,
    failed_robot: usize,
    params: &GeometryParams<T>,
    rng: &mut R,
) -> (Configuration<T>, Option<Edge>) {
    let others: Vec<usize> = (0..config.n())
        .filter(|&v| v != failed_robot && !config.topology.has_edge(v, failed_robot))
        .collect();
    let Some(&partner) = others.choose(rng) else {
        return (config.clone(), None);
    };
    let mut out = config.clone();
    out.topology.toggle(failed_robot, partner);
    out.distances.set(failed_robot, partner, Some(params.d_mc));
    (out, Some(edge(failed_robot, partner)))
}

/// `inefficacy(random) − inefficacy(ours)`; positive favors ours.
pub fn delta_v<T: Real>(
    resources: &ResourceMatrix,
    topo_random: &Topology,
    topo_ours: &Topology,
) -> Result<T> {
    if topo_random.n() != topo_ours.n() {
        return Err(Error::Dimension(format!(
            "topologies have {} and {} vertices",
            topo_random.n(),
            topo_ours.n()
        )));
    }
    Ok(task_inefficacy::<T>(topo_random, resources)? - task_inefficacy::<T>(topo_ours, resources)?)
}

/// Task inefficacy of a fixed topology summed over the current and all
/// future resource matrices.
pub fn hindsight_inefficacy<T: Real>(
    topology: &Topology,
    current: &ResourceMatrix,
    future: &[ResourceMatrix],
) -> Result<T> {
    std::iter::once(current)
        .chain(future)
        .try_fold(T::zero(), |acc, res| {
            Ok(acc + task_inefficacy::<T>(topology, res)?)
        })
}

/// Hindsight-optimized reconfiguration. Returns the result and its
/// hindsight inefficacy.
pub fn hindsight_strategy<T: Real + LpScalar>(
    prev: &Configuration<T>,
    current: &ResourceMatrix,
    oracle: &Oracle,
    params: &GeometryParams<T>,
) -> Result<(ConfigGenResult<T>, T)> {
    hindsight_configuration(prev, current, &oracle.future, params)
}

/// Uniform random labelled tree from a random Prüfer sequence.
fn random_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Edge> {
    if n == 2 {
        return vec![(0, 1)];
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &v in &seq {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &v in &seq {
        let leaf = (0..n).find(|&u| degree[u] == 1).expect("a leaf exists");
        edges.push(edge(leaf, v));
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
    edges.push(edge(rest[0], rest[1]));
    edges
}

/// Connected graph with `⌊density·n(n−1)/2⌋` edges: a uniform spanning
/// tree plus uniformly sampled extra edges.
pub fn random_connected_graph<R: Rng + ?Sized>(
    n: usize,
    target_density: f64,
    rng: &mut R,
) -> Result<Topology> {
    if n < 2 {
        return Err(Error::InvalidInput("need at least two robots".into()));
    }
    let pairs = n * (n - 1) / 2;
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(target_density <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "density {target_density} above 1"
        )));
    }
    let m = (target_density * pairs as f64 + 1e-9).floor() as usize;
    if m < n - 1 {
        return Err(Error::InvalidInput(format!(
            "density {target_density} is below the spanning-tree minimum {}",
            (n - 1) as f64 / pairs as f64
        )));
    }
    let mut topo = Topology::new(n, random_tree(n, rng))?;
    let mut absent: Vec<Edge> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !topo.has_edge(i, j))
        .collect();
    absent.shuffle(rng);
    for &(i, j) in absent.iter().take(m - (n - 1)) {
        topo.toggle(i, j);
    }
    Ok(topo)
}

/// Number of ones for resource percentage `p_r`: `⌈p_r·n·r/100⌉`.
pub fn resource_count(n: usize, r: usize, p_r: f64) -> usize {
    ((p_r * (n * r) as f64) / 100.0 - 1e-9).ceil().max(0.0) as usize
}

/// Feasible resource matrix with exactly `⌈p_r·n·r/100⌉` ones: `threshold`
/// ones per column at distinct random rows, the rest uniformly among the
/// empty cells.
pub fn random_feasible_resources<R: Rng + ?Sized>(
    n: usize,
    r: usize,
    p_r: f64,
    threshold: usize,
    rng: &mut R,
) -> Result<ResourceMatrix> {
    let count = resource_count(n, r, p_r);
    if threshold == 0 || threshold > n || count < threshold * r || count > n * r {
        return Err(Error::InvalidInput(format!(
            "{count} ones cannot form a feasible {n}x{r} matrix at threshold {threshold}"
        )));
    }
    let mut gamma = Matrix::zeros(n, r);
    let rows: Vec<usize> = (0..n).collect();
    for j in 0..r {
        for &i in rows.choose_multiple(rng, threshold) {
            gamma[(i, j)] = 1u8;
        }
    }
    let mut empty: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..r).map(move |j| (i, j)))
        .filter(|&(i, j)| gamma[(i, j)] == 0)
        .collect();
    empty.shuffle(rng);
    for &(i, j) in empty.iter().take(count - threshold * r) {
        gamma[(i, j)] = 1;
    }
    ResourceMatrix::new(gamma, threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Ours,
    RandomEdge,
    Hindsight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepOutcome {
    Reconfigured,
    /// No candidate strictly improved, even after escalation; topology kept.
    NoImprovement,
    /// The team can no longer perform the task; the sequence stops.
    Stopped,
}

/// One failure and the reaction to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct StepRecord<T> {
    pub step: usize,
    pub event: FailureEvent,
    pub kind: FailureKind,
    pub outcome: StepOutcome,
    pub toggled_edges: Vec<Edge>,
    pub inefficacy_before: T,
    pub inefficacy_after: T,
    #[serde(rename = "trace_of_L")]
    pub trace_of_l: Option<T>,
    pub budget: usize,
    pub escalations: usize,
    /// Hindsight inefficacy of the new topology (hindsight strategy only).
    pub hindsight_inefficacy: Option<T>,
    pub resources: ResourceMatrix,
    pub configuration: Configuration<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct FailureTrace<T> {
    pub strategy: Strategy,
    pub initial: Configuration<T>,
    pub steps: Vec<StepRecord<T>>,
}

impl<T: Real> FailureTrace<T> {
    pub fn configurations(&self) -> impl Iterator<Item = &Configuration<T>> {
        std::iter::once(&self.initial).chain(self.steps.iter().map(|s| &s.configuration))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceParams<T> {
    pub geometry: GeometryParams<T>,
    pub limits: SearchLimits,
}

/// Replay a failure sequence with one strategy.
///
/// Tolerable failures trigger the strategy; the first catastrophic failure
/// is recorded and ends the trace. `rng` is only used by the random-edge
/// strategy.
pub fn replay_sequence<T: Real + LpScalar, R: Rng + ?Sized>(
    initial: &Configuration<T>,
    sequence: &FailureSequence,
    strategy: Strategy,
    params: &SequenceParams<T>,
    rng: &mut R,
) -> Result<FailureTrace<T>> {
    if sequence.initial != initial.resources {
        return Err(Error::InvalidInput(
            "failure sequence starts from different resources".into(),
        ));
    }
    let mut current = initial.clone();
    let mut steps = Vec::with_capacity(sequence.events.len());
    for (k, (event, resources)) in sequence.events.iter().zip(&sequence.matrices).enumerate() {
        let before: T = task_inefficacy(&current.topology, resources)?;
        let mut record = StepRecord {
            step: k + 1,
            event: *event,
            kind: event.kind,
            outcome: StepOutcome::Stopped,
            toggled_edges: Vec::new(),
            inefficacy_before: before,
            inefficacy_after: before,
            trace_of_l: None,
            budget: params.geometry.ne,
            escalations: 0,
            hindsight_inefficacy: None,
            resources: resources.clone(),
            configuration: Configuration {
                resources: resources.clone(),
                ..current.clone()
            },
        };
        if event.kind == FailureKind::Catastrophic {
            steps.push(record);
            break;
        }
        match strategy {
            Strategy::Ours => {
                match generate_with_escalation(
                    &current,
                    resources,
                    &params.geometry,
                    &params.limits,
                ) {
                    Ok((res, escalations)) => {
                        record.outcome = StepOutcome::Reconfigured;
                        record.toggled_edges = res.toggled_edges.clone();
                        record.inefficacy_after = res.inefficacy_after;
                        record.trace_of_l = Some(res.trace);
                        record.budget = res.budget;
                        record.escalations = escalations;
                        record.configuration = res.configuration;
                    }
                    Err(Error::NoImprovingCandidate { budget }) => {
                        record.outcome = StepOutcome::NoImprovement;
                        record.budget = budget;
                        record.escalations = (budget - params.geometry.ne) / 2;
                    }
                    Err(e) => return Err(e),
                }
            }
            Strategy::RandomEdge => {
                let (next, added) =
                    random_edge_strategy(&record.configuration, event.robot, &params.geometry, rng);
                record.outcome = match added {
                    Some(e) => {
                        record.toggled_edges = vec![e];
                        StepOutcome::Reconfigured
                    }
                    None => StepOutcome::NoImprovement,
                };
                record.inefficacy_after = task_inefficacy(&next.topology, resources)?;
                record.configuration = next;
            }
            Strategy::Hindsight => {
                let oracle = sequence.oracle_after(k);
                let (res, score) =
                    hindsight_strategy(&current, resources, &oracle, &params.geometry)?;
                record.outcome = StepOutcome::Reconfigured;
                record.toggled_edges = res.toggled_edges.clone();
                record.inefficacy_after = res.inefficacy_after;
                record.trace_of_l = Some(res.trace);
                record.hindsight_inefficacy = Some(score);
                record.configuration = res.configuration;
            }
        }
        current = record.configuration.clone();
        steps.push(record);
    }
    Ok(FailureTrace {
        strategy,
        initial: initial.clone(),
        steps,
    })
}

/// Draw a failure sequence from `failures` and replay it with `strategy`.
pub fn run_failure_sequence<T: Real + LpScalar, R: Rng + ?Sized>(
    initial: &Configuration<T>,
    strategy: Strategy,
    params: &SequenceParams<T>,
    failures: &mut dyn FailureSource,
    rng: &mut R,
) -> Result<FailureTrace<T>> {
    let sequence = FailureSequence::draw(&initial.resources, failures)?;
    replay_sequence(initial, &sequence, strategy, params, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confgen::configuration_for;
    use crate::rng::stream;

    #[test]
    fn single_entry_failure_is_catastrophic() {
        let g = ResourceMatrix::full(1, 1, 1);
        let (next, ev) = apply_failure(&g, &mut stream(1, "t", 0)).unwrap();
        assert_eq!(next.count_ones(), 0);
        assert_eq!(ev.kind, FailureKind::Catastrophic);
        assert!(apply_failure(&next, &mut stream(1, "t", 0)).is_err());
    }

    #[test]
    fn full_team_failures_are_tolerable() {
        let g = ResourceMatrix::full(7, 3, 1);
        let mut rng = stream(7, "t", 0);
        for _ in 0..50 {
            let (next, ev) = apply_failure(&g, &mut rng).unwrap();
            assert_eq!(ev.kind, FailureKind::Tolerable);
            assert_eq!(g.hamming_distance(&next), 1);
        }
    }

    #[test]
    fn random_edge_single_non_neighbor() {
        let p = GeometryParams::default();
        // vertex 0 misses only vertex 3
        let t = Topology::new(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let cfg = configuration_for(&t, &ResourceMatrix::full(4, 1, 1), &p).unwrap();
        let (next, added) = random_edge_strategy(&cfg, 0, &p, &mut stream(0, "t", 0));
        assert_eq!(added, Some((0, 3)));
        assert_eq!(next.distances.get(0, 3), Some(p.d_mc));
        assert!(next.topology.has_edge(0, 3));

        let full =
            configuration_for(&Topology::complete(4), &ResourceMatrix::full(4, 1, 1), &p).unwrap();
        let (same, added) = random_edge_strategy(&full, 2, &p, &mut stream(0, "t", 0));
        assert_eq!(added, None);
        assert_eq!(same, full);
    }

    #[test]
    fn delta_v_examples() {
        let res = ResourceMatrix::full(5, 2, 1);
        let line = Topology::line(5);
        assert_eq!(delta_v::<f64>(&res, &line, &line).unwrap(), 0.0);
        assert!(delta_v::<f64>(&res, &line, &Topology::complete(5)).unwrap() > 0.0);
        assert!(delta_v::<f64>(&res, &Topology::line(4), &line).is_err());
    }

    #[test]
    fn hindsight_examples() {
        let res = ResourceMatrix::full(4, 2, 1);
        let t = Topology::line(4);
        let direct: f64 = task_inefficacy(&t, &res).unwrap();
        assert_eq!(hindsight_inefficacy::<f64>(&t, &res, &[]).unwrap(), direct);
        let all = vec![res.clone(); 3];
        assert_eq!(
            hindsight_inefficacy::<f64>(&Topology::complete(4), &res, &all).unwrap(),
            0.0
        );
    }

    #[test]
    fn oracle_validation() {
        let g = ResourceMatrix::full(2, 2, 1);
        let a = g.without(0, 0).unwrap();
        let b = a.without(1, 1).unwrap();
        assert!(Oracle::new(&g, vec![a.clone(), b.clone()]).is_ok());
        assert!(Oracle::new(&g, vec![b]).is_err());
        assert!(Oracle::new(&a, vec![g]).is_err());
    }

    #[test]
    fn graph_generator_edges() {
        let mut rng = stream(5, "t", 0);
        assert_eq!(
            random_connected_graph(6, 1.0, &mut rng).unwrap(),
            Topology::complete(6)
        );
        assert_eq!(
            random_connected_graph(2, 1.0, &mut rng).unwrap(),
            Topology::line(2)
        );
        let tree = random_connected_graph(8, 7.0 / 28.0, &mut rng).unwrap();
        assert_eq!(tree.edge_count(), 7);
        assert!(tree.is_connected());
        assert!(random_connected_graph(8, 0.1, &mut rng).is_err());
    }

    #[test]
    fn resource_generator_counts() {
        let mut rng = stream(9, "t", 0);
        let g = random_feasible_resources(4, 3, 50.0, 1, &mut rng).unwrap();
        assert_eq!(g.count_ones(), 6);
        assert!(g.is_feasible());
        assert_eq!(
            random_feasible_resources(4, 3, 100.0, 1, &mut rng).unwrap(),
            ResourceMatrix::full(4, 3, 1)
        );
        assert_eq!(resource_count(7, 3, 20.0), 5);
        assert!(random_feasible_resources(4, 3, 10.0, 1, &mut rng).is_err());
    }

    #[test]
    fn threshold_column_fails_catastrophically() {
        let g = ResourceMatrix::from_rows(vec![vec![1, 1], vec![0, 1], vec![0, 1]], 1).unwrap();
        let (_, ev) = fail_entry(&g, 0, 0).unwrap();
        assert_eq!(ev.kind, FailureKind::Catastrophic);
        let (_, ev) = fail_entry(&g, 0, 1).unwrap();
        assert_eq!(ev.kind, FailureKind::Tolerable);
    }
}
