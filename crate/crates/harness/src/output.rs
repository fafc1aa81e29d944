//! CSV and JSON emission.
//!
//! Columns:
//!
//! * `scenario.csv`: `step, robot, resource, kind, outcome, toggled_edges,
//!   edge_count, inefficacy_before, inefficacy_after, trace_of_L, budget,
//!   escalations, synthesized, feasible, restarts, stress, worst_margin,
//!   transition_min_separation`
//! * `random_edge.csv`: `p_r, trial, sub_seed, n, r, edge_density, delta_v,
//!   ours_improved, random_added`
//! * `random_edge_bins.csv` (occupied bins only): `p_r, bin, bin_lo,
//!   bin_hi, midpoint, count, mean_delta_v`
//! * `hindsight.csv`: `n, trial, step, ours, hindsight, ours_reconfigured,
//!   dominance_holds`
//! * `hindsight_series.csv`: `n, step, trials, ours_max, hindsight_min`
//!
//! Rows follow experiment order, so output bytes depend only on the
//! configuration and seed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::experiments::{HindsightComparison, RandomEdgeComparison, ScenarioResult};

pub const SCENARIO_COLUMNS: &[&str] = &[
    "step",
    "robot",
    "resource",
    "kind",
    "outcome",
    "toggled_edges",
    "edge_count",
    "inefficacy_before",
    "inefficacy_after",
    "trace_of_L",
    "budget",
    "escalations",
    "synthesized",
    "feasible",
    "restarts",
    "stress",
    "worst_margin",
    "transition_min_separation",
];

pub const RANDOM_EDGE_COLUMNS: &[&str] = &[
    "p_r",
    "trial",
    "sub_seed",
    "n",
    "r",
    "edge_density",
    "delta_v",
    "ours_improved",
    "random_added",
];

pub const BIN_COLUMNS: &[&str] = &[
    "p_r",
    "bin",
    "bin_lo",
    "bin_hi",
    "midpoint",
    "count",
    "mean_delta_v",
];

pub const HINDSIGHT_COLUMNS: &[&str] = &[
    "n",
    "trial",
    "step",
    "ours",
    "hindsight",
    "ours_reconfigured",
    "dominance_holds",
];

pub const HINDSIGHT_SERIES_COLUMNS: &[&str] = &["n", "step", "trials", "ours_max", "hindsight_min"];

pub enum ExperimentResults<'a> {
    Scenario(&'a ScenarioResult),
    RandomEdge(&'a RandomEdgeComparison),
    Hindsight(&'a HindsightComparison),
}

#[derive(Serialize)]
struct ScenarioRow {
    step: usize,
    robot: Option<usize>,
    resource: Option<usize>,
    kind: String,
    outcome: String,
    toggled_edges: String,
    edge_count: usize,
    inefficacy_before: Option<f64>,
    inefficacy_after: f64,
    #[serde(rename = "trace_of_L")]
    trace_of_l: Option<f64>,
    budget: Option<usize>,
    escalations: Option<usize>,
    synthesized: bool,
    feasible: bool,
    restarts: Option<usize>,
    stress: Option<f64>,
    worst_margin: f64,
    transition_min_separation: Option<f64>,
}

#[derive(Serialize)]
struct BinRow {
    p_r: f64,
    bin: usize,
    bin_lo: f64,
    bin_hi: f64,
    midpoint: f64,
    count: usize,
    mean_delta_v: f64,
}

fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

/// 1-indexed `i-j` pairs separated by `;`.
fn edge_list(edges: &[(usize, usize)]) -> String {
    edges
        .iter()
        .map(|(i, j)| format!("{}-{}", i + 1, j + 1))
        .collect::<Vec<_>>()
        .join(";")
}

fn write_csv<R: Serialize>(path: &Path, header: &[&str], rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn scenario_rows(result: &ScenarioResult) -> Vec<ScenarioRow> {
    let trace = &result.trace;
    let mut rows = Vec::with_capacity(result.formations.len());
    for f in &result.formations {
        let base = ScenarioRow {
            step: f.step,
            robot: None,
            resource: None,
            kind: String::new(),
            outcome: "initial".into(),
            toggled_edges: String::new(),
            edge_count: trace.initial.topology.edge_count(),
            inefficacy_before: None,
            inefficacy_after: 0.0,
            trace_of_l: None,
            budget: None,
            escalations: None,
            synthesized: f.synthesized,
            feasible: f.feasible,
            restarts: f.restarts.filter(|_| f.synthesized),
            stress: f.stress.filter(|_| f.synthesized),
            worst_margin: f.report.worst_margin(),
            transition_min_separation: f.transition.as_ref().map(|t| t.min_separation),
        };
        let row = match trace.steps.iter().find(|s| s.step == f.step) {
            None => ScenarioRow {
                inefficacy_after: rescon_core::task_inefficacy(
                    &trace.initial.topology,
                    &trace.initial.resources,
                )
                .unwrap_or(f64::NAN),
                ..base
            },
            Some(s) => ScenarioRow {
                robot: Some(s.event.robot + 1),
                resource: Some(s.event.resource + 1),
                kind: label(&s.kind),
                outcome: label(&s.outcome),
                toggled_edges: edge_list(&s.toggled_edges),
                edge_count: s.configuration.topology.edge_count(),
                inefficacy_before: Some(s.inefficacy_before),
                inefficacy_after: s.inefficacy_after,
                trace_of_l: s.trace_of_l,
                budget: Some(s.budget),
                escalations: Some(s.escalations),
                ..base
            },
        };
        rows.push(row);
    }
    rows
}

fn bin_rows(cmp: &RandomEdgeComparison) -> Vec<BinRow> {
    cmp.series
        .iter()
        .flat_map(|s| {
            s.occupied().map(move |(k, mean)| BinRow {
                p_r: s.p_r,
                bin: k,
                bin_lo: s.edges[k],
                bin_hi: s.edges[k + 1],
                midpoint: s.midpoint(k),
                count: s.counts[k],
                mean_delta_v: mean,
            })
        })
        .collect()
}

/// Write the result files into `out_dir` and return their paths.
pub fn emit_outputs(results: &ExperimentResults<'_>, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut path = |name: &str| {
        let p = out_dir.join(name);
        written.push(p.clone());
        p
    };
    match results {
        ExperimentResults::Scenario(r) => {
            write_csv(&path("scenario.csv"), SCENARIO_COLUMNS, &scenario_rows(r))?;
            write_json(&path("trace.json"), &r.trace)?;
            write_json(&path("formations.json"), &r.formations)?;
        }
        ExperimentResults::RandomEdge(r) => {
            write_csv(&path("random_edge.csv"), RANDOM_EDGE_COLUMNS, &r.records)?;
            write_csv(&path("random_edge_bins.csv"), BIN_COLUMNS, &bin_rows(r))?;
            let summary = serde_json::json!({
                "series": r.series,
                "positive_fraction": r.series.iter()
                    .map(|s| (s.p_r.to_string(), s.positive_fraction()))
                    .collect::<std::collections::BTreeMap<_, _>>(),
            });
            write_json(&path("random_edge_summary.json"), &summary)?;
        }
        ExperimentResults::Hindsight(r) => {
            write_csv(&path("hindsight.csv"), HINDSIGHT_COLUMNS, &r.records)?;
            write_csv(
                &path("hindsight_series.csv"),
                HINDSIGHT_SERIES_COLUMNS,
                &r.series,
            )?;
            let summary = serde_json::json!({
                "series": r.series,
                "dominance_checks": r.dominance_checks(),
                "dominance_violations": r.dominance_violations(),
            });
            write_json(&path("hindsight_summary.json"), &summary)?;
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::DeltaVRecord;

    fn header(path: &Path) -> Vec<String> {
        let mut r = csv::Reader::from_path(path).unwrap();
        r.headers().unwrap().iter().map(str::to_owned).collect()
    }

    #[test]
    fn empty_results_give_header_only_csv() {
        let dir = tempfile::tempdir().unwrap();
        let cmp = RandomEdgeComparison {
            records: vec![],
            series: vec![],
        };
        emit_outputs(&ExperimentResults::RandomEdge(&cmp), dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("random_edge.csv")).unwrap();
        assert_eq!(text.trim_end(), RANDOM_EDGE_COLUMNS.join(","));
        assert_eq!(
            header(&dir.path().join("random_edge_bins.csv")),
            BIN_COLUMNS
        );
    }

    #[test]
    fn record_columns_match_schema() {
        let dir = tempfile::tempdir().unwrap();
        let rec = DeltaVRecord {
            p_r: 20.0,
            trial: 0,
            sub_seed: 9,
            n: 4,
            r: 3,
            edge_density: 0.5,
            delta_v: 1.25,
            ours_improved: true,
            random_added: false,
        };
        let cmp = RandomEdgeComparison {
            series: vec![crate::experiments::BinnedSeries::from_records(
                20.0,
                10,
                std::slice::from_ref(&rec),
            )],
            records: vec![rec.clone()],
        };
        emit_outputs(&ExperimentResults::RandomEdge(&cmp), dir.path()).unwrap();
        let path = dir.path().join("random_edge.csv");
        assert_eq!(header(&path), RANDOM_EDGE_COLUMNS);
        let mut reader = csv::Reader::from_path(&path).unwrap();
        let back: Vec<DeltaVRecord> = reader.deserialize().collect::<Result<_, _>>().unwrap();
        assert_eq!(back, vec![rec]);
        let bins = fs::read_to_string(dir.path().join("random_edge_bins.csv")).unwrap();
        assert_eq!(bins.lines().count(), 2);
    }
}
