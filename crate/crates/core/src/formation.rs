//! Formation synthesis: place robots in 3-D so that communicating pairs sit
//! at their desired distances, subject to separation, range and box limits.
//!
//! Hard constraints are folded into the objective with exponential penalties
//! `e^{H·y}` whose hardness `H` grows over the run, and the resulting energy
//! is minimized by simulated annealing with single-coordinate moves.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{Configuration, GeometryParams};
use crate::rng::{stream, StreamRng};
use crate::scalar::Real;

/// Default clamp on penalty exponents.
pub const EXPONENT_CAP: f64 = 700.0;

/// Default tolerance (meters) for the hard-constraint check.
pub const TOL_FEAS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Formation<T> {
    pub points: Vec<[T; 3]>,
}

impl<T: Real> Formation<T> {
    pub fn new(points: Vec<[T; 3]>) -> Result<Self> {
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { points })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn distance(&self, i: usize, j: usize) -> T {
        dist(&self.points[i], &self.points[j])
    }

    pub fn min_pairwise_distance(&self) -> Option<T> {
        let n = self.n();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| self.distance(i, j))
            .fold(None, |acc, d| Some(acc.map_or(d, |a: T| a.min(d))))
    }

    pub fn clamped_to(&self, params: &GeometryParams<T>) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| std::array::from_fn(|k| p[k].max(params.box_min[k]).min(params.box_max[k])))
            .collect();
        Self { points }
    }

    /// One `x y z` line per robot.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let _ = writeln!(out, "{} {} {}", p[0], p[1], p[2]);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| {
                        Error::Parse(format!("line {}: bad coordinate {tok:?}", lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            if vals.len() != 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected 3 coordinates, found {}",
                    lineno + 1,
                    vals.len()
                )));
            }
            points.push([T::lit(vals[0]), T::lit(vals[1]), T::lit(vals[2])]);
        }
        Self::new(points)
    }
}

fn dist<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Robots on a 3-D grid with spacing `d_mc`, filled x-first from the box's
/// minimum corner.
pub fn grid_formation<T: Real>(n: usize, params: &GeometryParams<T>) -> Result<Formation<T>> {
    let spacing = params.d_mc;
    let counts: Vec<usize> = (0..3)
        .map(|k| {
            let span = params.box_max[k] - params.box_min[k];
            (span / spacing).floor().to_usize().unwrap_or(0) + 1
        })
        .collect();
    if counts[0] * counts[1] * counts[2] < n {
        return Err(Error::InvalidInput(format!(
            "box holds only {} grid points at spacing d_mc, need {n}",
            counts[0] * counts[1] * counts[2]
        )));
    }
    let points = (0..n)
        .map(|idx| {
            let cell = [
                idx % counts[0],
                (idx / counts[0]) % counts[1],
                idx / (counts[0] * counts[1]),
            ];
            std::array::from_fn(|k| params.box_min[k] + spacing * T::from_usize_lossy(cell[k]))
        })
        .collect();
    Formation::new(points)
}

/// Acceptance rule for uphill moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Acceptance {
    /// `exp(−ΔE / T)`.
    Metropolis,
    /// `exp(−T · ΔE)`, kept for comparison experiments.
    TemperatureProduct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealParams<T> {
    pub steps: usize,
    pub t_start: T,
    pub t_end: T,
    pub h_start: T,
    pub h_end: T,
    pub delta_max: T,
    pub max_restarts: usize,
    pub seed: u64,
    pub acceptance: Acceptance,
    pub exponent_cap: T,
}

impl<T: Real> AnnealParams<T> {
    pub fn for_geometry(geometry: &GeometryParams<T>) -> Self {
        Self {
            steps: 20_000,
            t_start: T::one(),
            t_end: T::lit(1e-8),
            h_start: T::one(),
            h_end: T::lit(1e3),
            delta_max: geometry.d_s / T::lit(10.0),
            max_restarts: 5,
            seed: 0,
            acceptance: Acceptance::Metropolis,
            exponent_cap: T::lit(EXPONENT_CAP),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.steps >= 1
            && self.t_start > self.t_end
            && self.t_end > T::zero()
            && self.h_end >= self.h_start
            && self.h_start > T::zero()
            && self.delta_max > T::zero()
            && self.exponent_cap > T::zero();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "invalid anneal parameters: {self:?}"
            )))
        }
    }

    fn fraction(&self, step: usize) -> T {
        if self.steps <= 1 {
            return T::one();
        }
        T::from_usize_lossy(step) / T::from_usize_lossy(self.steps - 1)
    }

    /// Temperature at 0-based `step`; `t_end` at the final step.
    pub fn temperature_at(&self, step: usize) -> T {
        if step + 1 >= self.steps {
            return self.t_end;
        }
        self.t_start * (self.t_end / self.t_start).powf(self.fraction(step))
    }

    /// Penalty hardness at 0-based `step`; `h_end` at the final step.
    pub fn hardness_at(&self, step: usize) -> T {
        if step + 1 >= self.steps {
            return self.h_end;
        }
        self.h_start * (self.h_end / self.h_start).powf(self.fraction(step))
    }
}

/// `e^{h·y}` with the exponent clamped at `cap`. The flag reports clamping.
pub fn penalty_clamped<T: Real>(y: T, h: T, cap: T) -> (T, bool) {
    let e = h * y;
    if e > cap {
        (cap.exp(), true)
    } else {
        (e.exp(), false)
    }
}

/// Exponential penalty `e^{h·y}` with the default exponent cap.
pub fn penalty<T: Real>(y: T, h: T) -> T {
    penalty_clamped(y, h, T::lit(EXPONENT_CAP)).0
}

/// Energy of a formation for one configuration, with per-robot partial sums
/// for single-robot moves.
struct EnergyModel<'a, T> {
    n: usize,
    desired: Vec<Option<T>>,
    params: &'a GeometryParams<T>,
    cap: T,
    saturations: Cell<usize>,
}

impl<'a, T: Real> EnergyModel<'a, T> {
    fn new(config: &Configuration<T>, params: &'a GeometryParams<T>, cap: T) -> Self {
        let n = config.n();
        let desired = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                if i == j {
                    None
                } else {
                    config.distances.get(i, j)
                }
            })
            .collect();
        Self {
            n,
            desired,
            params,
            cap,
            saturations: Cell::new(0),
        }
    }

    fn p(&self, y: T, h: T) -> T {
        let (v, sat) = penalty_clamped(y, h, self.cap);
        if sat {
            self.saturations.set(self.saturations.get() + 1);
        }
        v
    }

    /// Stress plus penalties for the pair `(i, j)`.
    fn pair(&self, x: &Formation<T>, i: usize, j: usize, h: T) -> T {
        let d = x.distance(i, j);
        match self.desired[i * self.n + j] {
            Some(target) => {
                let s = d - target;
                s * s + self.p(self.params.d_s - d, h) + self.p(d - self.params.d_mc, h)
            }
            None => self.p(self.params.d_mc - d, h),
        }
    }

    fn boxed(&self, point: &[T; 3], h: T) -> T {
        (0..3).fold(T::zero(), |acc, k| {
            acc + self.p(point[k] - self.params.box_max[k], h)
                + self.p(self.params.box_min[k] - point[k], h)
        })
    }

    fn total(&self, x: &Formation<T>, h: T) -> T {
        let mut e = T::zero();
        for i in 0..self.n {
            for j in i + 1..self.n {
                e = e + self.pair(x, i, j, h);
            }
            e = e + self.boxed(&x.points[i], h);
        }
        e
    }

    /// Terms that involve robot `j`.
    fn local(&self, x: &Formation<T>, j: usize, h: T) -> T {
        let pairs = (0..self.n)
            .filter(|&i| i != j)
            .fold(T::zero(), |acc, i| acc + self.pair(x, i, j, h));
        pairs + self.boxed(&x.points[j], h)
    }
}

/// `Σ_{(i,j) ∈ E} (‖X_i − X_j‖ − d_ij)²`.
pub fn stress_objective<T: Real>(x: &Formation<T>, config: &Configuration<T>) -> T {
    config
        .topology
        .edges()
        .filter_map(|(i, j)| config.distances.get(i, j).map(|d| (i, j, d)))
        .fold(T::zero(), |acc, (i, j, d)| {
            let s = x.distance(i, j) - d;
            acc + s * s
        })
}

/// Stress plus the four penalty groups: non-edges closer than `d_mc`, edges
/// closer than `d_s`, edges farther than `d_mc`, and per-axis box violations.
pub fn energy<T: Real>(
    x: &Formation<T>,
    config: &Configuration<T>,
    params: &GeometryParams<T>,
    h: T,
) -> T {
    EnergyModel::new(config, params, T::lit(EXPONENT_CAP)).total(x, h)
}

/// One coordinate move: robot, axis and offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Move<T> {
    pub robot: usize,
    pub axis: usize,
    pub delta: T,
}

pub fn draw_move<T: Real, R: Rng + ?Sized>(n: usize, delta_max: T, rng: &mut R) -> Move<T> {
    let robot = rng.gen_range(0..n);
    let axis = rng.gen_range(0..3);
    let u: f64 = rng.gen_range(-1.0..=1.0);
    Move {
        robot,
        axis,
        delta: T::lit(u) * delta_max,
    }
}

/// Copy of `x` with one uniformly chosen coordinate of one uniformly chosen
/// robot shifted by `δ ~ U[−delta_max, delta_max]`.
pub fn propose<T: Real, R: Rng + ?Sized>(
    x: &Formation<T>,
    delta_max: T,
    rng: &mut R,
) -> Formation<T> {
    let mv = draw_move(x.n(), delta_max, rng);
    let mut out = x.clone();
    out.points[mv.robot][mv.axis] = out.points[mv.robot][mv.axis] + mv.delta;
    out
}

pub fn acceptance_probability<T: Real>(delta_e: T, temperature: T, rule: Acceptance) -> T {
    match rule {
        Acceptance::Metropolis => (-delta_e / temperature).exp(),
        Acceptance::TemperatureProduct => (-temperature * delta_e).exp(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealOutcome<T> {
    /// Lowest-energy state visited, scored at the final hardness.
    pub best: Formation<T>,
    /// Energy of `best` at `h_end`.
    pub best_energy: T,
    /// State of the chain after the last step.
    pub last: Formation<T>,
    pub accepted: usize,
    /// Penalty evaluations whose exponent hit the cap.
    pub saturations: usize,
}

/// Simulated annealing for exactly `params.steps` iterations. Downhill
/// moves are always taken; uphill moves with the configured acceptance
/// probability. Temperature and hardness follow geometric schedules.
pub fn anneal<T: Real, R: Rng + ?Sized>(
    x0: &Formation<T>,
    config: &Configuration<T>,
    geometry: &GeometryParams<T>,
    params: &AnnealParams<T>,
    rng: &mut R,
) -> Result<AnnealOutcome<T>> {
    params.validate()?;
    if x0.n() != config.n() {
        return Err(Error::Dimension(format!(
            "formation has {} robots, configuration {}",
            x0.n(),
            config.n()
        )));
    }
    let model = EnergyModel::new(config, geometry, params.exponent_cap);
    let mut x = x0.clone();
    let mut best = x.clone();
    let mut best_energy = model.total(&x, params.h_end);
    let mut accepted = 0;
    if x.n() == 0 {
        return Ok(AnnealOutcome {
            best,
            best_energy,
            last: x,
            accepted,
            saturations: 0,
        });
    }

    for step in 0..params.steps {
        let temperature = params.temperature_at(step);
        let hardness = params.hardness_at(step);
        let mv = draw_move(x.n(), params.delta_max, rng);
        let old_local = model.local(&x, mv.robot, hardness);
        let old_coord = x.points[mv.robot][mv.axis];
        x.points[mv.robot][mv.axis] = old_coord + mv.delta;
        let new_local = model.local(&x, mv.robot, hardness);
        let delta_e = new_local - old_local;

        let accept = if delta_e < T::zero() {
            true
        } else {
            let u: f64 = rng.gen();
            T::lit(u) < acceptance_probability(delta_e, temperature, params.acceptance)
        };
        if !accept {
            x.points[mv.robot][mv.axis] = old_coord;
            continue;
        }
        accepted += 1;
        let e_end = model.total(&x, params.h_end);
        if e_end < best_energy {
            best_energy = e_end;
            best.clone_from(&x);
        }
    }

    Ok(AnnealOutcome {
        best,
        best_energy,
        last: x,
        accepted,
        saturations: model.saturations.get(),
    })
}

/// Worst margins of the hard constraints. A margin is `None` when its group
/// is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// `min (‖X_i − X_j‖ − d_s)` over edges.
    pub edge_min_margin: Option<f64>,
    /// `min (d_mc − ‖X_i − X_j‖)` over edges.
    pub edge_max_margin: Option<f64>,
    /// `min (‖X_i − X_j‖ − d_mc)` over non-edges.
    pub non_edge_margin: Option<f64>,
    /// `min` over robots and axes of the distance inside the box.
    pub box_margin: Option<f64>,
    pub tolerance: f64,
}

impl FeasibilityReport {
    pub fn worst_margin(&self) -> f64 {
        [
            self.edge_min_margin,
            self.edge_max_margin,
            self.non_edge_margin,
            self.box_margin,
        ]
        .into_iter()
        .flatten()
        .fold(f64::INFINITY, f64::min)
    }
}

pub fn check_feasibility_with_tol<T: Real>(
    x: &Formation<T>,
    config: &Configuration<T>,
    params: &GeometryParams<T>,
    tol: f64,
) -> FeasibilityReport {
    let fold_min = |acc: Option<f64>, v: f64| Some(acc.map_or(v, |a| a.min(v)));
    let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
    let n = x.n().min(config.n());
    let (mut e_min, mut e_max, mut non_edge, mut boxed) = (None, None, None, None);
    for i in 0..n {
        for j in i + 1..n {
            let d = x.distance(i, j);
            if config.topology.has_edge(i, j) {
                e_min = fold_min(e_min, f(d - params.d_s));
                e_max = fold_min(e_max, f(params.d_mc - d));
            } else {
                non_edge = fold_min(non_edge, f(d - params.d_mc));
            }
        }
        for k in 0..3 {
            let p = x.points[i][k];
            boxed = fold_min(boxed, f(p - params.box_min[k]));
            boxed = fold_min(boxed, f(params.box_max[k] - p));
        }
    }
    let mut report = FeasibilityReport {
        feasible: false,
        edge_min_margin: e_min,
        edge_max_margin: e_max,
        non_edge_margin: non_edge,
        box_margin: boxed,
        tolerance: tol,
    };
    report.feasible = x.n() == config.n() && report.worst_margin() >= -tol;
    report
}

/// Hard-constraint check with the default tolerance.
pub fn check_feasibility<T: Real>(
    x: &Formation<T>,
    config: &Configuration<T>,
    params: &GeometryParams<T>,
) -> FeasibilityReport {
    check_feasibility_with_tol(x, config, params, TOL_FEAS)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOutcome<T> {
    pub formation: Formation<T>,
    pub report: FeasibilityReport,
    pub stress: T,
    pub energy: T,
    /// Restarts used before the feasible result (0 = first run).
    pub restarts: usize,
    pub saturations: usize,
}

/// Anneal from `initial`; on an infeasible result restart up to
/// `max_restarts` times from `initial` perturbed by `U[−d_s/2, d_s/2]` per
/// coordinate, each restart with its own random stream.
pub fn synthesize<T: Real>(
    initial: &Formation<T>,
    config: &Configuration<T>,
    geometry: &GeometryParams<T>,
    params: &AnnealParams<T>,
) -> Result<SynthesisOutcome<T>> {
    geometry.validate()?;
    params.validate()?;
    if initial.n() != config.n() {
        return Err(Error::Dimension(format!(
            "initial formation has {} robots, configuration {}",
            initial.n(),
            config.n()
        )));
    }
    if initial.n() <= 1 {
        let formation = initial.clamped_to(geometry);
        let report = check_feasibility(&formation, config, geometry);
        return Ok(SynthesisOutcome {
            stress: T::zero(),
            energy: energy(&formation, config, geometry, params.h_end),
            formation,
            report,
            restarts: 0,
            saturations: 0,
        });
    }

    let mut best_report: Option<FeasibilityReport> = None;
    let half = geometry.d_s / T::lit(2.0);
    for attempt in 0..=params.max_restarts {
        let mut rng: StreamRng = stream(params.seed, "anneal", attempt as u64);
        let start = if attempt == 0 {
            initial.clone()
        } else {
            let mut jitter = stream(params.seed, "restart-jitter", attempt as u64);
            let points = initial
                .points
                .iter()
                .map(|p| {
                    std::array::from_fn(|k| {
                        let u: f64 = jitter.gen_range(-1.0..=1.0);
                        p[k] + T::lit(u) * half
                    })
                })
                .collect();
            Formation { points }
        };
        let outcome = anneal(&start, config, geometry, params, &mut rng)?;
        let report = check_feasibility(&outcome.best, config, geometry);
        if report.feasible {
            return Ok(SynthesisOutcome {
                stress: stress_objective(&outcome.best, config),
                formation: outcome.best,
                energy: outcome.best_energy,
                report,
                restarts: attempt,
                saturations: outcome.saturations,
            });
        }
        if best_report
            .as_ref()
            .is_none_or(|b| report.worst_margin() > b.worst_margin())
        {
            best_report = Some(report);
        }
    }
    Err(Error::SynthesisFailed {
        attempts: params.max_restarts + 1,
        best: Box::new(best_report.expect("at least one attempt")),
    })
}

/// Clearance of a synchronized straight-line transition between two
/// formations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    /// Exact minimum pairwise separation over `t ∈ [0, 1]`.
    pub min_separation: f64,
    /// Minimum over the uniformly sampled instants.
    pub sampled_min_separation: f64,
    /// Pair attaining `min_separation`, if any.
    pub closest_pair: Option<(usize, usize)>,
    /// Pairs whose minimum separation drops below `d_s`, with that minimum.
    pub violations: Vec<(usize, usize, f64)>,
}

pub const TRANSITION_SAMPLES: usize = 101;

/// Minimum distance between two robots moving linearly from `a0→a1` and
/// `b0→b1` over `t ∈ [0, 1]`.
pub fn pair_min_separation(a0: [f64; 3], a1: [f64; 3], b0: [f64; 3], b1: [f64; 3]) -> f64 {
    let r0: [f64; 3] = std::array::from_fn(|k| a0[k] - b0[k]);
    let dv: [f64; 3] = std::array::from_fn(|k| (a1[k] - a0[k]) - (b1[k] - b0[k]));
    let vv: f64 = dv.iter().map(|v| v * v).sum();
    let t = if vv == 0.0 {
        0.0
    } else {
        (-(0..3).map(|k| r0[k] * dv[k]).sum::<f64>() / vv).clamp(0.0, 1.0)
    };
    (0..3)
        .map(|k| (r0[k] + t * dv[k]).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn straight_line_transition_check<T: Real>(
    from: &Formation<T>,
    to: &Formation<T>,
    d_s: T,
) -> Result<TransitionReport> {
    if from.n() != to.n() {
        return Err(Error::Dimension(format!(
            "transition between {} and {} robots",
            from.n(),
            to.n()
        )));
    }
    let f = |p: &[T; 3]| -> [f64; 3] { p.map(|v| v.to_f64().unwrap_or(f64::NAN)) };
    let d_s = d_s.to_f64().unwrap_or(f64::NAN);
    let n = from.n();
    let mut min_sep = f64::INFINITY;
    let mut closest = None;
    let mut violations = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let m = pair_min_separation(
                f(&from.points[i]),
                f(&to.points[i]),
                f(&from.points[j]),
                f(&to.points[j]),
            );
            if m < min_sep {
                min_sep = m;
                closest = Some((i, j));
            }
            if m < d_s - 1e-9 {
                violations.push((i, j, m));
            }
        }
    }
    let mut sampled = f64::INFINITY;
    for s in 0..TRANSITION_SAMPLES {
        let t = s as f64 / (TRANSITION_SAMPLES - 1) as f64;
        let pos: Vec<[f64; 3]> = (0..n)
            .map(|i| {
                let a = f(&from.points[i]);
                let b = f(&to.points[i]);
                std::array::from_fn(|k| a[k] + t * (b[k] - a[k]))
            })
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                let d = (0..3)
                    .map(|k| (pos[i][k] - pos[j][k]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                sampled = sampled.min(d);
            }
        }
    }
    Ok(TransitionReport {
        min_separation: min_sep,
        sampled_min_separation: sampled,
        closest_pair: closest,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::NeighborDistanceMatrix;
    use crate::resources::ResourceMatrix;
    use crate::topology::Topology;
    use rand::SeedableRng;

    fn pair_config(d: Option<f64>) -> Configuration<f64> {
        let mut dist = NeighborDistanceMatrix::absent(2);
        dist.set(0, 1, d);
        let topo = if d.is_some() {
            Topology::line(2)
        } else {
            Topology::empty(2)
        };
        Configuration::new(topo, dist, ResourceMatrix::full(2, 1, 1)).unwrap()
    }

    #[test]
    fn stress_examples() {
        let cfg = pair_config(Some(0.8));
        let at = Formation::new(vec![[0.0, 0.0, 1.0], [0.8, 0.0, 1.0]]).unwrap();
        assert!(stress_objective(&at, &cfg).abs() < 1e-15);
        let off = Formation::new(vec![[0.0, 0.0, 1.0], [1.8, 0.0, 1.0]]).unwrap();
        assert!((stress_objective(&off, &cfg) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn penalty_values() {
        assert_eq!(penalty(0.0, 3.0), 1.0);
        assert_eq!(penalty(0.0, 1000.0), 1.0);
        assert!((penalty(-0.02, 1000.0) - (-20f64).exp()).abs() < 1e-20);
        assert!((penalty(-0.02f64, 1000.0) - 2.061e-9).abs() < 1e-12);
        assert!((penalty(0.02f64, 1000.0) / 4.852e8 - 1.0).abs() < 1e-3);
        let (v, sat) = penalty_clamped(1.0, 1000.0, 700.0);
        assert!(sat && v == 700f64.exp());
    }

    #[test]
    fn non_edge_at_range_has_unit_penalty() {
        let p = GeometryParams::default();
        let cfg = pair_config(None);
        let x = Formation::new(vec![[0.0, 0.0, 1.0], [p.d_mc, 0.0, 1.0]]).unwrap();
        let box_part: f64 = EnergyModel::new(&cfg, &p, 700.0).boxed(&x.points[0], 5.0)
            + EnergyModel::new(&cfg, &p, 700.0).boxed(&x.points[1], 5.0);
        let e = energy(&x, &cfg, &p, 5.0);
        assert!((e - box_part - 1.0).abs() < 1e-12);
    }

    #[test]
    fn schedules_hit_end_values() {
        let p = AnnealParams::for_geometry(&GeometryParams::<f64>::default());
        let last = p.steps - 1;
        assert!((p.temperature_at(last) / p.t_end - 1.0).abs() <= 1e-12);
        assert!((p.hardness_at(last) / p.h_end - 1.0).abs() <= 1e-12);
        assert_eq!(p.temperature_at(0), p.t_start);
        assert_eq!(p.hardness_at(0), p.h_start);
        let mid = p.temperature_at(last / 2);
        assert!(mid < p.t_start && mid > p.t_end);
    }

    #[test]
    fn zero_delta_always_accepted() {
        assert_eq!(
            acceptance_probability(0.0, 1e-8, Acceptance::Metropolis),
            1.0
        );
        assert_eq!(
            acceptance_probability(0.0, 1.0, Acceptance::TemperatureProduct),
            1.0
        );
        // the printed rule accepts almost every uphill move once cold
        let cold_printed = acceptance_probability(1.0, 1e-8, Acceptance::TemperatureProduct);
        let cold_metropolis = acceptance_probability(1.0, 1e-8, Acceptance::Metropolis);
        assert!(cold_printed > 0.99 && cold_metropolis == 0.0);
    }

    #[test]
    fn flat_energy_accepts_every_move() {
        let cfg = Configuration::new(
            Topology::empty(1),
            NeighborDistanceMatrix::absent(1),
            ResourceMatrix::full(1, 1, 1),
        )
        .unwrap();
        let geo = GeometryParams {
            box_min: [-1e6; 3],
            box_max: [1e6; 3],
            ..GeometryParams::default()
        };
        let params = AnnealParams {
            steps: 500,
            ..AnnealParams::for_geometry(&geo)
        };
        let x0 = Formation::new(vec![[0.0; 3]]).unwrap();
        let mut rng = StreamRng::seed_from_u64(3);
        let out = anneal(&x0, &cfg, &geo, &params, &mut rng).unwrap();
        assert_eq!(out.accepted, 500);

        // replaying the same draws reproduces the chain
        let mut replay = StreamRng::seed_from_u64(3);
        let mut x = x0.clone();
        for _ in 0..500 {
            let mv: Move<f64> = draw_move(1, params.delta_max, &mut replay);
            x.points[mv.robot][mv.axis] += mv.delta;
            let _: f64 = replay.gen();
        }
        assert_eq!(x, out.last);
    }

    #[test]
    fn feasibility_examples() {
        let p = GeometryParams::default();
        let edge_cfg = pair_config(Some(p.d_s));
        let x = Formation::new(vec![[0.0, 0.0, 1.0], [p.d_s, 0.0, 1.0]]).unwrap();
        assert!(check_feasibility(&x, &edge_cfg, &p).feasible);

        let non_edge = pair_config(None);
        let close = Formation::new(vec![[0.0, 0.0, 1.0], [0.99 * p.d_mc, 0.0, 1.0]]).unwrap();
        let r = check_feasibility(&close, &non_edge, &p);
        assert!(!r.feasible);
        assert!((r.non_edge_margin.unwrap() + 0.01 * p.d_mc).abs() < 1e-12);

        let outside =
            Formation::new(vec![[0.0, 0.0, 1.0], [p.box_max[0] + 0.1, 0.0, 1.0]]).unwrap();
        let r = check_feasibility(&outside, &non_edge, &p);
        assert!(!r.feasible);
        assert!((r.box_margin.unwrap() + 0.1).abs() < 1e-12);
    }

    #[test]
    fn single_robot_is_clamped() {
        let cfg = Configuration::new(
            Topology::empty(1),
            NeighborDistanceMatrix::absent(1),
            ResourceMatrix::full(1, 1, 1),
        )
        .unwrap();
        let geo = GeometryParams::default();
        let params = AnnealParams::for_geometry(&geo);
        let x0 = Formation::new(vec![[100.0, -100.0, 1.0]]).unwrap();
        let out = synthesize(&x0, &cfg, &geo, &params).unwrap();
        assert!(out.report.feasible);
        assert_eq!(
            out.formation.points[0],
            [geo.box_max[0], geo.box_min[1], 1.0]
        );
    }

    #[test]
    fn box_smaller_than_safe_distance_fails() {
        let geo = GeometryParams {
            box_min: [0.0; 3],
            box_max: [0.1; 3],
            ..GeometryParams::default()
        };
        let cfg = pair_config(Some(geo.d_s));
        let params = AnnealParams {
            steps: 2000,
            max_restarts: 2,
            ..AnnealParams::for_geometry(&geo)
        };
        let x0 = Formation::new(vec![[0.0; 3], [0.1, 0.0, 0.0]]).unwrap();
        match synthesize(&x0, &cfg, &geo, &params) {
            Err(Error::SynthesisFailed { attempts, best }) => {
                assert_eq!(attempts, 3);
                assert!(!best.feasible);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn transition_examples() {
        let x = Formation::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0]]).unwrap();
        let r = straight_line_transition_check(&x, &x, 0.5).unwrap();
        assert!((r.min_separation - 1.0).abs() < 1e-15);
        assert!(r.violations.is_empty());

        let a = Formation::new(vec![[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]]).unwrap();
        let b = Formation::new(vec![[2.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        let r = straight_line_transition_check(&a, &b, 0.5).unwrap();
        assert!(r.min_separation < 1e-12);
        assert_eq!(r.violations.len(), 1);
        assert!(straight_line_transition_check(&a, &x, 0.5).is_err());
    }

    #[test]
    fn formation_text_round_trip() {
        let x = Formation::new(vec![[0.25, -1.5, 2.0], [1e-3, 0.0, 3.5]]).unwrap();
        assert_eq!(Formation::<f64>::from_text(&x.to_text()).unwrap(), x);
        assert!(Formation::<f64>::from_text("1 2\n").is_err());
    }

    #[test]
    fn grid_fits_box() {
        let geo = GeometryParams::default();
        let g = grid_formation(20, &geo).unwrap();
        assert_eq!(g.n(), 20);
        assert!((g.min_pairwise_distance().unwrap() - geo.d_mc).abs() < 1e-12);
        let tiny = GeometryParams {
            box_max: [-2.0, -2.0, 0.5],
            ..geo
        };
        assert!(grid_formation(20, &tiny).is_err());
    }
}
