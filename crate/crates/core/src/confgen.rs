//! Configuration generation after a tolerable resource failure.
//!
//! The topology/weight design problem is a mixed-integer semidefinite
//! program, but its binary part only selects a topology. For each candidate
//! topology within the edge-change budget, connectivity and the inefficacy
//! decrease are direct graph/matrix checks, and the remaining weight problem
//! is a linear program. Enumerating candidates and solving the inner LP
//! therefore gives the exact optimum for small budgets.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::failsim::hindsight_inefficacy;
use crate::geometry::{distance_from_laplacian, Configuration, GeometryParams};
use crate::inefficacy::{nuclear_norm, task_inefficacy};
use crate::laplacian::{WeightedLaplacian, CONNECTIVITY_EPS};
use crate::lp::{LinearProgram, LpError, Relation};
use crate::matrix::Matrix;
use crate::resources::ResourceMatrix;
use crate::scalar::{LpScalar, Real};
use crate::topology::{Edge, Topology};

/// Absolute margin for the strict inefficacy decrease.
pub const EPS_NUC: f64 = 1e-9;

/// Relative tolerance under which two LP traces count as tied.
const TRACE_TIE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyCandidate {
    pub topology: Topology,
    /// Sorted list of toggled vertex pairs relative to the previous topology.
    pub toggled_edges: Vec<Edge>,
    /// `‖Π − Ā_prev‖_F²`, always twice the number of toggles.
    pub frobenius_cost: usize,
}

/// Search limits for budget escalation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    /// How many times the budget may grow by 2 after an empty candidate set.
    pub escalation_cap: usize,
    /// Escalation stops before a budget whose candidate count exceeds this.
    pub max_candidates: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            escalation_cap: 3,
            max_candidates: 50_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct ConfigGenResult<T> {
    pub configuration: Configuration<T>,
    pub laplacian: WeightedLaplacian<T>,
    pub toggled_edges: Vec<Edge>,
    pub trace: T,
    pub inefficacy_before: T,
    pub inefficacy_after: T,
    /// Candidates enumerated within the budget.
    pub candidate_count: usize,
    /// Candidates that passed every filter.
    pub admissible_count: usize,
    /// Budget (`ne`) the result was found with.
    pub budget: usize,
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Number of candidates [`enumerate_topology_candidates`] yields for `n`
/// vertices and budget `ne`.
pub fn candidate_count(n: usize, ne: usize) -> usize {
    let pairs = n * n.saturating_sub(1) / 2;
    (0..=ne / 2).fold(0usize, |acc, k| acc.saturating_add(binomial(pairs, k)))
}

/// All topologies reachable from `prev` with at most `ne / 2` edge toggles,
/// ordered by toggle count and then lexicographically. The unchanged
/// topology comes first.
pub fn enumerate_topology_candidates(prev: &Topology, ne: usize) -> Vec<TopologyCandidate> {
    let n = prev.n();
    let pairs: Vec<Edge> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let max_toggles = (ne / 2).min(pairs.len());
    let mut out = Vec::with_capacity(candidate_count(n, ne));
    for k in 0..=max_toggles {
        for_each_combination(pairs.len(), k, |idx| {
            let toggled: Vec<Edge> = idx.iter().map(|&p| pairs[p]).collect();
            out.push(TopologyCandidate {
                topology: prev.with_toggles(&toggled),
                frobenius_cost: 2 * toggled.len(),
                toggled_edges: toggled,
            });
        });
    }
    out
}

fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + n - k) else {
            return;
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Full edge-weight LP over shifted variables `y_e = w_e − c_min ≥ 0`:
///
/// minimize `Σ_e 2·y_e` subject to `y_e ≤ c_max − c_min` and, for every
/// vertex, `Σ_{e ∋ i} y_e ≥ c_max − deg(i)·c_min`.
///
/// Variables are indexed in the topology's edge order. The trace of the
/// optimal Laplacian is the LP objective plus `2·|E|·c_min`.
pub fn edge_weight_program<T: LpScalar>(
    topology: &Topology,
    c_min: &T,
    c_max: &T,
) -> LinearProgram<T> {
    let edges: Vec<Edge> = topology.edges().collect();
    build_program(
        topology,
        &edges,
        &(0..topology.n()).collect::<Vec<_>>(),
        c_min,
        c_max,
    )
}

fn build_program<T: LpScalar>(
    topology: &Topology,
    edges: &[Edge],
    vertices: &[usize],
    c_min: &T,
    c_max: &T,
) -> LinearProgram<T> {
    let two = T::one() + T::one();
    let mut lp = LinearProgram::new(vec![two; edges.len()]);
    let span = c_max.clone() - c_min.clone();
    for k in 0..edges.len() {
        let mut row = vec![T::zero(); edges.len()];
        row[k] = T::one();
        lp.add(row, Relation::Le, span.clone());
    }
    let degrees = topology.degrees();
    for &v in vertices {
        let row: Vec<T> = edges
            .iter()
            .map(|&(a, b)| {
                if a == v || b == v {
                    T::one()
                } else {
                    T::zero()
                }
            })
            .collect();
        let deg = (0..degrees[v]).fold(T::zero(), |acc, _| acc + c_min.clone());
        lp.add(row, Relation::Ge, c_max.clone() - deg);
    }
    lp
}

/// Optimal edge weights from the reduced LP.
///
/// Vertices with `deg·c_min ≥ c_max` impose no constraint, and edges not
/// incident to a deficient vertex sit at `c_min` in every optimum, so only
/// the deficient part of the program is solved.
pub fn solve_edge_weights<T: LpScalar>(
    topology: &Topology,
    c_min: &T,
    c_max: &T,
) -> Result<BTreeMap<Edge, T>> {
    let degrees = topology.degrees();
    if let Some(v) = degrees.iter().position(|&d| d == 0) {
        return Err(Error::Infeasible(v));
    }
    let deficient: Vec<usize> = (0..topology.n())
        .filter(|&v| {
            let reach = (0..degrees[v]).fold(T::zero(), |acc, _| acc + c_min.clone());
            (c_max.clone() - reach).is_positive_strict()
        })
        .collect();
    let mut is_deficient = vec![false; topology.n()];
    for &v in &deficient {
        is_deficient[v] = true;
    }
    let active: Vec<Edge> = topology
        .edges()
        .filter(|&(a, b)| is_deficient[a] || is_deficient[b])
        .collect();

    let mut weights: BTreeMap<Edge, T> = topology.edges().map(|e| (e, c_min.clone())).collect();
    if active.is_empty() {
        return Ok(weights);
    }
    let lp = build_program(topology, &active, &deficient, c_min, c_max);
    let sol = lp.solve().map_err(|e| match e {
        LpError::Infeasible => Error::Infeasible(deficient[0]),
        other => Error::Lp(other),
    })?;
    for (e, y) in active.into_iter().zip(sol.x) {
        weights.insert(e, c_min.clone() + y);
    }
    Ok(weights)
}

/// Minimize `trace(L)` over Laplacians of `topology` with edge weights in
/// `[c_min, c_max]` and every diagonal entry at least `c_max`.
pub fn optimize_edge_weights<T: Real + LpScalar>(
    topology: &Topology,
    params: &GeometryParams<T>,
) -> Result<(WeightedLaplacian<T>, T)> {
    if !topology.is_connected() {
        return Err(Error::Disconnected);
    }
    if topology.n() == 1 {
        return Err(Error::Infeasible(0));
    }
    let raw = solve_edge_weights(topology, &params.c_min, &params.c_max)?;
    let snap_tol = T::lit(1e-12) * params.c_max;
    let weights: BTreeMap<Edge, T> = raw
        .into_iter()
        .map(|(e, w)| {
            let w = if (w - params.c_max).abs() <= snap_tol {
                params.c_max
            } else if (w - params.c_min).abs() <= snap_tol {
                params.c_min
            } else {
                w.max(params.c_min).min(params.c_max)
            };
            (e, w)
        })
        .collect();
    let laplacian = WeightedLaplacian::from_weights(topology, &weights)?;
    let trace = laplacian.trace();
    Ok((laplacian, trace))
}

/// Configuration of `topology` with trace-optimal weights and the matching
/// desired distances.
pub fn configuration_for<T: Real + LpScalar>(
    topology: &Topology,
    resources: &ResourceMatrix,
    params: &GeometryParams<T>,
) -> Result<Configuration<T>> {
    let (laplacian, _) = optimize_edge_weights(topology, params)?;
    let distances = distance_from_laplacian(&laplacian, params)?;
    Configuration::new(topology.clone(), distances, resources.clone())
}

struct Evaluated<T> {
    candidate: TopologyCandidate,
    inefficacy: T,
    laplacian: WeightedLaplacian<T>,
    trace: T,
}

fn check_inputs<T: Real>(
    prev: &Configuration<T>,
    resources: &ResourceMatrix,
    params: &GeometryParams<T>,
) -> Result<()> {
    params.validate()?;
    if resources.robots() != prev.n() {
        return Err(Error::Dimension(format!(
            "resource matrix has {} rows for a team of {}",
            resources.robots(),
            prev.n()
        )));
    }
    if !resources.is_feasible() {
        return Err(Error::InfeasibleResources);
    }
    if !prev.topology.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(())
}

/// Pick the minimal element under `(primary, secondary, toggles)` where the
/// two real keys compare with tolerances, scanning in a fixed order so the
/// choice does not depend on evaluation order.
fn select<T: Real, E>(
    items: &[E],
    primary: impl Fn(&E) -> T,
    primary_tol: impl Fn(T) -> T,
    secondary: impl Fn(&E) -> T,
    secondary_tol: T,
    toggles: impl Fn(&E) -> &[Edge],
) -> Option<&E> {
    let best_primary = items
        .iter()
        .map(&primary)
        .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.min(v))))?;
    let cutoff = best_primary + primary_tol(best_primary);
    let tier: Vec<&E> = items.iter().filter(|e| primary(e) <= cutoff).collect();
    let best_secondary = tier
        .iter()
        .map(|e| secondary(e))
        .fold(T::infinity(), |a, v| a.min(v));
    tier.into_iter()
        .filter(|e| secondary(e) <= best_secondary + secondary_tol)
        .min_by(|a, b| toggles(a).cmp(toggles(b)))
}

fn trace_tol<T: Real>(t: T) -> T {
    T::lit(TRACE_TIE_RTOL) * t.abs().max(T::one())
}

fn finish<T: Real>(
    chosen: Evaluated<T>,
    resources: &ResourceMatrix,
    params: &GeometryParams<T>,
    inefficacy_before: T,
    candidate_count: usize,
    admissible_count: usize,
) -> Result<ConfigGenResult<T>> {
    let distances = distance_from_laplacian(&chosen.laplacian, params)?;
    let configuration =
        Configuration::new(chosen.candidate.topology, distances, resources.clone())?;
    Ok(ConfigGenResult {
        configuration,
        laplacian: chosen.laplacian,
        toggled_edges: chosen.candidate.toggled_edges,
        trace: chosen.trace,
        inefficacy_before,
        inefficacy_after: chosen.inefficacy,
        candidate_count,
        admissible_count,
        budget: params.ne,
    })
}

/// Choose the connected, within-budget topology that strictly lowers task
/// inefficacy and has the smallest optimal Laplacian trace. Ties go to the
/// lower inefficacy, then to the lexicographically smallest toggle list.
pub fn generate_configuration<T: Real + LpScalar>(
    prev: &Configuration<T>,
    new_resources: &ResourceMatrix,
    params: &GeometryParams<T>,
) -> Result<ConfigGenResult<T>> {
    check_inputs(prev, new_resources, params)?;
    let before: T = task_inefficacy(&prev.topology, new_resources)?;
    let threshold = before - T::lit(EPS_NUC);
    let candidates = enumerate_topology_candidates(&prev.topology, params.ne);
    let candidate_count = candidates.len();

    let evaluated: Vec<Evaluated<T>> = candidates
        .into_par_iter()
        .filter_map(|candidate| {
            if !candidate.topology.is_connected() {
                return None;
            }
            let inefficacy: T = task_inefficacy(&candidate.topology, new_resources).ok()?;
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(inefficacy < threshold) {
                return None;
            }
            let (laplacian, trace) = optimize_edge_weights(&candidate.topology, params).ok()?;
            Some(Evaluated {
                candidate,
                inefficacy,
                laplacian,
                trace,
            })
        })
        .collect();

    let admissible_count = evaluated.len();
    let chosen = select(
        &evaluated,
        |e| e.trace,
        trace_tol,
        |e| e.inefficacy,
        T::lit(EPS_NUC),
        |e| &e.candidate.toggled_edges,
    )
    .map(|e| e.candidate.toggled_edges.clone())
    .ok_or(Error::NoImprovingCandidate { budget: params.ne })?;
    let chosen = evaluated
        .into_iter()
        .find(|e| e.candidate.toggled_edges == chosen)
        .expect("selected candidate present");
    finish(
        chosen,
        new_resources,
        params,
        before,
        candidate_count,
        admissible_count,
    )
}

/// Retry [`generate_configuration`] with the budget raised by 2 whenever no
/// improving candidate exists, at most `limits.escalation_cap` times and
/// never past `limits.max_candidates` candidates. Returns the result and the
/// number of escalations used.
pub fn generate_with_escalation<T: Real + LpScalar>(
    prev: &Configuration<T>,
    new_resources: &ResourceMatrix,
    params: &GeometryParams<T>,
    limits: &SearchLimits,
) -> Result<(ConfigGenResult<T>, usize)> {
    let mut budget = params.ne;
    let mut escalations = 0;
    loop {
        match generate_configuration(prev, new_resources, &params.with_budget(budget)) {
            Err(Error::NoImprovingCandidate { .. })
                if escalations < limits.escalation_cap
                    && candidate_count(prev.n(), budget + 2) <= limits.max_candidates
                    && budget / 2 < prev.n() * prev.n().saturating_sub(1) / 2 =>
            {
                budget += 2;
                escalations += 1;
            }
            Err(Error::NoImprovingCandidate { .. }) => {
                return Err(Error::NoImprovingCandidate { budget })
            }
            other => return other.map(|r| (r, escalations)),
        }
    }
}

/// Hindsight-optimized reconfiguration: among connected candidates within
/// the budget (no decrease requirement), minimize hindsight inefficacy;
/// ties go to the smaller optimal trace, then to the lexicographically
/// smallest toggle list. `inefficacy_after` holds the chosen topology's
/// current inefficacy.
pub(crate) fn hindsight_configuration<T: Real + LpScalar>(
    prev: &Configuration<T>,
    current: &ResourceMatrix,
    future: &[ResourceMatrix],
    params: &GeometryParams<T>,
) -> Result<(ConfigGenResult<T>, T)> {
    check_inputs(prev, current, params)?;
    let before: T = task_inefficacy(&prev.topology, current)?;
    let candidates = enumerate_topology_candidates(&prev.topology, params.ne);
    let candidate_count = candidates.len();

    let scored: Vec<(TopologyCandidate, T)> = candidates
        .into_par_iter()
        .filter(|c| c.topology.is_connected())
        .map(|c| {
            let score = hindsight_inefficacy::<T>(&c.topology, current, future)?;
            Ok((c, score))
        })
        .collect::<Result<_>>()?;
    let admissible_count = scored.len();
    let best = scored
        .iter()
        .map(|(_, s)| *s)
        .fold(T::infinity(), |a, v| a.min(v));
    let cutoff = best + T::lit(EPS_NUC);

    let mut tier: Vec<(Evaluated<T>, T)> = Vec::new();
    for (candidate, score) in scored.into_iter().filter(|(_, s)| *s <= cutoff) {
        let (laplacian, trace) = optimize_edge_weights(&candidate.topology, params)?;
        let inefficacy: T = task_inefficacy(&candidate.topology, current)?;
        tier.push((
            Evaluated {
                candidate,
                inefficacy,
                laplacian,
                trace,
            },
            score,
        ));
    }
    let key = select(
        &tier,
        |(e, _)| e.trace,
        trace_tol,
        |(_, s)| *s,
        T::lit(EPS_NUC),
        |(e, _)| &e.candidate.toggled_edges,
    )
    .map(|(e, _)| e.candidate.toggled_edges.clone())
    .expect("unchanged topology is always admissible");
    let (chosen, score) = tier
        .into_iter()
        .find(|(e, _)| e.candidate.toggled_edges == key)
        .expect("selected candidate present");
    let result = finish(
        chosen,
        current,
        params,
        before,
        candidate_count,
        admissible_count,
    )?;
    Ok((result, score))
}

/// Outcome of one constraint of the configuration program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub checks: Vec<ConstraintCheck>,
}

impl ViolationReport {
    fn record(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(ConstraintCheck {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn violations(&self) -> Vec<&ConstraintCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn is_clean(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self, name: &str) -> bool {
        self.checks.iter().any(|c| c.name == name && !c.passed)
    }
}

/// Check a raw `(Π, L)` pair against every constraint of the configuration
/// program: zero row sums, connectivity certificate, `Π` symmetric with unit
/// diagonal, `L_ii ≥ c_max`, off-diagonal magnitudes in `[c_min, c_max]` on
/// the support of `Π` and zero elsewhere, the Frobenius budget, and the
/// strict inefficacy decrease.
pub fn verify_constraints<T: Real>(
    pi: &Matrix<u8>,
    laplacian: &WeightedLaplacian<T>,
    prev_topology: &Topology,
    resources: &ResourceMatrix,
    params: &GeometryParams<T>,
) -> ViolationReport {
    let mut report = ViolationReport::default();
    let n = prev_topology.n();
    let l = laplacian.matrix();
    let tol = T::lit(1e-9);
    let scale = params.c_max.max(T::one());

    if pi.shape() != (n, n) || l.shape() != (n, n) || resources.robots() != n {
        report.record(
            "dimensions",
            false,
            format!("Π {:?}, L {:?}, n = {n}", pi.shape(), l.shape()),
        );
        return report;
    }

    let worst_row = laplacian
        .row_sums()
        .into_iter()
        .fold(T::zero(), |a, s| a.max(s.abs()));
    report.record(
        "zero_row_sums",
        worst_row <= tol * scale,
        format!("max |row sum| = {worst_row}"),
    );

    match laplacian.shifted_min_eigenvalue() {
        Ok(mu) => report.record(
            "connectivity",
            mu > T::lit(CONNECTIVITY_EPS),
            format!("min eigenvalue of 11ᵀ/n + L = {mu}"),
        ),
        Err(e) => report.record("connectivity", false, e.to_string()),
    }

    let unit_diag = (0..n).all(|i| pi[(i, i)] == 1);
    report.record("pi_unit_diagonal", unit_diag, String::new());
    let symmetric = (0..n).all(|i| (0..i).all(|j| pi[(i, j)] == pi[(j, i)]));
    report.record("pi_symmetric", symmetric, String::new());
    let binary = pi.iter().all(|&v| v <= 1);
    report.record("pi_binary", binary, String::new());

    let min_diag = (0..n)
        .map(|i| l[(i, i)])
        .fold(T::infinity(), |a, v| a.min(v));
    report.record(
        "laplacian_diagonal",
        n == 0 || min_diag >= params.c_max - tol,
        format!("min diagonal = {min_diag}, c_max = {}", params.c_max),
    );

    let mut bad_offdiag = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = l[(i, j)];
            let ok = if pi[(i, j)] == 1 {
                v <= T::zero() && -v >= params.c_min - tol && -v <= params.c_max + tol
            } else {
                v.abs() <= tol
            };
            if !ok {
                bad_offdiag.push((i, j));
            }
        }
    }
    report.record(
        "off_diagonal_bounds",
        bad_offdiag.is_empty(),
        format!("violating entries: {bad_offdiag:?}"),
    );

    let prev_adj = prev_topology.closed_adjacency();
    let cost: usize = pi
        .iter()
        .zip(prev_adj.iter())
        .map(|(&a, &b)| usize::from(a.abs_diff(b)).pow(2))
        .sum();
    report.record(
        "topology_budget",
        cost <= params.ne,
        format!("‖Π − Ā_prev‖_F² = {cost}, ne = {}", params.ne),
    );

    let ineff = |adj: &Matrix<u8>| -> Result<T> {
        let prod = Matrix::from_fn(n, resources.resources(), |i, j| {
            let held: u32 = (0..n)
                .map(|k| u32::from(adj[(i, k)]) * u32::from(resources.get(k, j)))
                .sum();
            T::lit(n as f64) - T::lit(held as f64)
        });
        nuclear_norm(&prod)
    };
    match (ineff(pi), ineff(&prev_adj)) {
        (Ok(after), Ok(before)) => report.record(
            "inefficacy_decrease",
            after < before - T::lit(EPS_NUC),
            format!("after = {after}, before = {before}"),
        ),
        _ => report.record("inefficacy_decrease", false, "nuclear norm failed".into()),
    }
    report
}

/// [`verify_constraints`] applied to a generated configuration.
pub fn verify_misdp_constraints<T: Real>(
    result: &ConfigGenResult<T>,
    prev: &Configuration<T>,
    params: &GeometryParams<T>,
) -> ViolationReport {
    let pi = result.configuration.topology.closed_adjacency();
    let mut report = verify_constraints(
        &pi,
        &result.laplacian,
        &prev.topology,
        &result.configuration.resources,
        &params.with_budget(result.budget),
    );
    let support_ok = result.laplacian.support() == result.configuration.topology;
    report.record("laplacian_support", support_ok, String::new());
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::NeighborDistanceMatrix;

    fn params(c_min: f64, c_max: f64) -> GeometryParams<f64> {
        GeometryParams {
            c_min,
            c_max,
            ..GeometryParams::default()
        }
    }

    #[test]
    fn candidate_counts() {
        let t = Topology::line(4);
        assert_eq!(enumerate_topology_candidates(&t, 0).len(), 1);
        assert_eq!(enumerate_topology_candidates(&t, 2).len(), 1 + 6);
        assert_eq!(enumerate_topology_candidates(&t, 4).len(), 1 + 6 + 15);
        assert_eq!(candidate_count(4, 4), 22);
        let first = &enumerate_topology_candidates(&t, 2)[0];
        assert_eq!(first.topology, t);
        assert_eq!(first.frobenius_cost, 0);
    }

    #[test]
    fn candidates_respect_frobenius_cost() {
        let t = Topology::line(5);
        let prev = t.closed_adjacency();
        for c in enumerate_topology_candidates(&t, 4) {
            let adj = c.topology.closed_adjacency();
            let cost: usize = adj
                .iter()
                .zip(prev.iter())
                .map(|(&a, &b)| usize::from(a != b))
                .sum();
            assert_eq!(cost, c.frobenius_cost);
            assert!(cost <= 4);
        }
    }

    #[test]
    fn single_edge_forces_c_max() {
        let p = params(0.5, 1.0);
        let (l, trace) = optimize_edge_weights(&Topology::line(2), &p).unwrap();
        assert_eq!(trace, 2.0 * p.c_max);
        assert_eq!(l.weight(0, 1), p.c_max);
    }

    #[test]
    fn star_leaves_force_c_max() {
        let p = params(0.5, 1.0);
        let star = Topology::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let (l, trace) = optimize_edge_weights(&star, &p).unwrap();
        assert_eq!(trace, 6.0 * p.c_max);
        for leaf in 1..4 {
            assert_eq!(l.weight(0, leaf), p.c_max);
        }
    }

    #[test]
    fn cycle_with_slack_uses_c_min() {
        let p = params(0.6, 1.0);
        let c4 = Topology::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let (_, trace) = optimize_edge_weights(&c4, &p).unwrap();
        assert!((trace - 8.0 * 0.6).abs() < 1e-12);
    }

    #[test]
    fn disconnected_and_isolated_rejected() {
        let p = params(0.5, 1.0);
        let split = Topology::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            optimize_edge_weights(&split, &p),
            Err(Error::Disconnected)
        ));
        assert!(matches!(
            optimize_edge_weights(&Topology::empty(1), &p),
            Err(Error::Infeasible(0))
        ));
        let isolated = Topology::new(3, [(0, 1)]).unwrap();
        assert!(matches!(
            solve_edge_weights(&isolated, &0.5, &1.0),
            Err(Error::Infeasible(2))
        ));
    }

    fn config_from(topology: Topology, resources: ResourceMatrix) -> Configuration<f64> {
        let p = GeometryParams::default();
        let (l, _) = optimize_edge_weights(&topology, &p).unwrap();
        let d = distance_from_laplacian(&l, &p).unwrap();
        Configuration::new(topology, d, resources).unwrap()
    }

    #[test]
    fn complete_and_full_has_no_improvement() {
        let res = ResourceMatrix::full(4, 2, 1);
        let prev = config_from(Topology::complete(4), res.clone());
        let err = generate_configuration(&prev, &res, &GeometryParams::default()).unwrap_err();
        assert!(matches!(err, Error::NoImprovingCandidate { budget: 2 }));
    }

    #[test]
    fn infeasible_resources_and_disconnected_prev_rejected() {
        let res = ResourceMatrix::from_rows(vec![vec![1, 0], vec![1, 0]], 1).unwrap();
        let prev = config_from(Topology::line(2), ResourceMatrix::full(2, 2, 1));
        assert!(matches!(
            generate_configuration(&prev, &res, &GeometryParams::default()),
            Err(Error::InfeasibleResources)
        ));
        let split = Configuration::new(
            Topology::empty(2),
            NeighborDistanceMatrix::absent(2),
            ResourceMatrix::full(2, 1, 1),
        )
        .unwrap();
        assert!(matches!(
            generate_configuration(
                &split,
                &ResourceMatrix::full(2, 1, 1),
                &GeometryParams::default()
            ),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn verify_flags_hand_built_violations() {
        let p = params(0.5, 1.0);
        let t = Topology::line(3);
        let res = ResourceMatrix::from_rows(vec![vec![1, 0], vec![0, 1], vec![1, 0]], 1).unwrap();
        let (l, _) = optimize_edge_weights(&t, &p).unwrap();

        let mut low = l.matrix().clone();
        low[(1, 1)] = p.c_max / 2.0;
        let report = verify_constraints(
            &t.closed_adjacency(),
            &WeightedLaplacian::from_matrix_unchecked(low),
            &t,
            &res,
            &p,
        );
        assert!(report.failed("laplacian_diagonal"));

        let mut pi = t.closed_adjacency();
        pi[(0, 2)] = 1;
        pi[(2, 0)] = 1;
        pi[(0, 1)] = 0;
        pi[(1, 0)] = 0;
        let report = verify_constraints(&pi, &l, &t, &res, &p);
        assert!(report.failed("topology_budget"));
        assert!(!report.failed("pi_symmetric"));

        let mut three = t.closed_adjacency();
        three[(0, 2)] = 1;
        three[(2, 0)] = 1;
        three[(1, 2)] = 0;
        let report = verify_constraints(&three, &l, &t, &res, &p);
        assert!(report.failed("topology_budget"));
        assert!(report.failed("pi_symmetric"));
    }

    #[test]
    fn generated_configuration_passes_verification() {
        let res = ResourceMatrix::from_rows(vec![vec![1, 0], vec![0, 1], vec![1, 0]], 1).unwrap();
        let prev = config_from(Topology::line(3), ResourceMatrix::full(3, 2, 1));
        let p = GeometryParams::default();
        let out = generate_configuration(&prev, &res, &p).unwrap();
        let report = verify_misdp_constraints(&out, &prev, &p);
        assert!(report.is_clean(), "{:?}", report.violations());
    }
}
