//! Flat `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. Every key is optional; unknown
//! keys are rejected. Lists are comma separated, coordinates as `x,y,z`.
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `seed` | 42 | master seed |
//! | `out_dir` | `out` | output directory |
//! | `d_s`, `d_mc` | 0.5, 1.0 | safe distance, communication range |
//! | `c_min`, `c_max` | 0.5, 1.0 | edge weight bounds |
//! | `ne` | 2 | topology change budget (one toggle costs 2) |
//! | `box_min`, `box_max` | `-2.5,-2.5,0`, `2.5,2.5,2.5` | bounding box |
//! | `threshold` | 1 | robots required per resource |
//! | `escalation_cap` | 3 | budget escalations (+2 each) when nothing improves |
//! | `max_candidates` | 50000 | no escalation past this many candidates |
//! | `steps` | 20000 | annealing iterations |
//! | `t_start`, `t_end` | 1, 1e-8 | temperature schedule |
//! | `h_start`, `h_end` | 1, 1000 | penalty hardness schedule |
//! | `delta_max` | `d_s/10` | largest coordinate move |
//! | `max_restarts` | 5 | annealing restarts |
//! | `acceptance` | `metropolis` | `metropolis` or `temperature_product` |
//! | `scenario_n`, `scenario_r` | 7, 3 | scenario team size and resource count |
//! | `random_trials` | 200 | graphs per resource percentage |
//! | `p_r` | `20,50,80` | resource percentages |
//! | `n_min`, `n_max` | 3, 30 | robots per random-edge trial |
//! | `r_min`, `r_max` | 3, 20 | resources per random-edge trial |
//! | `bins` | 50 | density bins over (0, 1] |
//! | `hindsight_trials` | 30 | failure sequences per team size |
//! | `hindsight_n` | `5,10,20` | team sizes |
//! | `hindsight_r` | 6 | resources per robot |

use std::path::{Path, PathBuf};

use rescon_core::confgen::SearchLimits;
use rescon_core::formation::Acceptance;
use rescon_core::{AnnealParams64, GeometryParams64};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub geometry: GeometryParams64,
    pub anneal: AnnealParams64,
    pub threshold: usize,
    pub limits: SearchLimits,
    pub scenario_n: usize,
    pub scenario_r: usize,
    pub random_trials: usize,
    pub p_r: Vec<f64>,
    pub n_range: (usize, usize),
    pub r_range: (usize, usize),
    pub bins: usize,
    pub hindsight_trials: usize,
    pub hindsight_n: Vec<usize>,
    pub hindsight_r: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let geometry = GeometryParams64::default();
        Self {
            seed: 42,
            out_dir: PathBuf::from("out"),
            anneal: AnnealParams64::for_geometry(&geometry),
            geometry,
            threshold: 1,
            limits: SearchLimits::default(),
            scenario_n: 7,
            scenario_r: 3,
            random_trials: 200,
            p_r: vec![20.0, 50.0, 80.0],
            n_range: (3, 30),
            r_range: (3, 20),
            bins: 50,
            hindsight_trials: 30,
            hindsight_n: vec![5, 10, 20],
            hindsight_r: 6,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| HarnessError::Config(format!("invalid value for `{key}`: `{value}`")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn parse_point(key: &str, value: &str) -> Result<[f64; 3]> {
    let v: Vec<f64> = parse_list(key, value)?;
    <[f64; 3]>::try_from(v)
        .map_err(|_| HarnessError::Config(format!("`{key}` needs three coordinates")))
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_str_config(&text)
    }

    pub fn from_str_config(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut delta_max_set = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            delta_max_set |= key == "delta_max";
            cfg.set(key, value)?;
        }
        if !delta_max_set {
            cfg.anneal.delta_max = cfg.geometry.d_s / 10.0;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let g = &mut self.geometry;
        let a = &mut self.anneal;
        match key {
            "seed" => self.seed = parse(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "d_s" => g.d_s = parse(key, value)?,
            "d_mc" => g.d_mc = parse(key, value)?,
            "c_min" => g.c_min = parse(key, value)?,
            "c_max" => g.c_max = parse(key, value)?,
            "ne" => g.ne = parse(key, value)?,
            "box_min" => g.box_min = parse_point(key, value)?,
            "box_max" => g.box_max = parse_point(key, value)?,
            "threshold" => self.threshold = parse(key, value)?,
            "escalation_cap" => self.limits.escalation_cap = parse(key, value)?,
            "max_candidates" => self.limits.max_candidates = parse(key, value)?,
            "steps" => a.steps = parse(key, value)?,
            "t_start" => a.t_start = parse(key, value)?,
            "t_end" => a.t_end = parse(key, value)?,
            "h_start" => a.h_start = parse(key, value)?,
            "h_end" => a.h_end = parse(key, value)?,
            "delta_max" => a.delta_max = parse(key, value)?,
            "max_restarts" => a.max_restarts = parse(key, value)?,
            "acceptance" => a.acceptance = parse_acceptance(value)?,
            "scenario_n" => self.scenario_n = parse(key, value)?,
            "scenario_r" => self.scenario_r = parse(key, value)?,
            "random_trials" => self.random_trials = parse(key, value)?,
            "p_r" => self.p_r = parse_list(key, value)?,
            "n_min" => self.n_range.0 = parse(key, value)?,
            "n_max" => self.n_range.1 = parse(key, value)?,
            "r_min" => self.r_range.0 = parse(key, value)?,
            "r_max" => self.r_range.1 = parse(key, value)?,
            "bins" => self.bins = parse(key, value)?,
            "hindsight_trials" => self.hindsight_trials = parse(key, value)?,
            "hindsight_n" => self.hindsight_n = parse_list(key, value)?,
            "hindsight_r" => self.hindsight_r = parse(key, value)?,
            other => return Err(HarnessError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        self.geometry
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        self.anneal
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.bins == 0 {
            return bad("bins must be at least 1".into());
        }
        if self.threshold == 0 {
            return bad("threshold must be at least 1".into());
        }
        if self.scenario_n < 2 || self.scenario_r == 0 || self.scenario_n < self.threshold {
            return bad(
                "scenario needs at least two robots, one resource and n ≥ threshold".into(),
            );
        }
        let (n0, n1) = self.n_range;
        let (r0, r1) = self.r_range;
        if n0 < 2 || n0 > n1 || r0 == 0 || r0 > r1 {
            return bad(format!("empty range n {n0}..={n1} or r {r0}..={r1}"));
        }
        if self.p_r.iter().any(|&p| !(p > 0.0 && p <= 100.0)) {
            return bad("resource percentages must lie in (0, 100]".into());
        }
        if self.hindsight_n.iter().any(|&n| n < 2) || self.hindsight_r == 0 {
            return bad("hindsight teams need at least two robots and one resource".into());
        }
        Ok(())
    }
}

pub fn parse_acceptance(value: &str) -> Result<Acceptance> {
    match value {
        "metropolis" => Ok(Acceptance::Metropolis),
        "temperature_product" => Ok(Acceptance::TemperatureProduct),
        other => Err(HarnessError::Config(format!(
            "unknown acceptance rule `{other}`"
        ))),
    }
}
