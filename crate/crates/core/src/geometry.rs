//! Geometric parameters, neighborhood distances and configurations.

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laplacian::WeightedLaplacian;
use crate::resources::ResourceMatrix;
use crate::scalar::Real;
use crate::topology::Topology;

/// Distances in meters; `ne` counts differing closed-adjacency entries, so
/// one edge toggle costs 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams<T> {
    /// Minimum safe distance.
    pub d_s: T,
    /// Communication range; non-communicating robots stay at least this far apart.
    pub d_mc: T,
    pub c_min: T,
    pub c_max: T,
    pub ne: usize,
    pub box_min: [T; 3],
    pub box_max: [T; 3],
}

impl Default for GeometryParams<f64> {
    fn default() -> Self {
        Self {
            d_s: 0.5,
            d_mc: 1.0,
            c_min: 0.5,
            c_max: 1.0,
            ne: 2,
            box_min: [-2.5, -2.5, 0.0],
            box_max: [2.5, 2.5, 2.5],
        }
    }
}

impl<T: Real> GeometryParams<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInput(msg.to_string()));
        if !(self.d_s > T::zero() && self.d_s < self.d_mc) {
            return bad("need 0 < d_s < d_mc");
        }
        if !(self.c_min > T::zero() && self.c_min < self.c_max) {
            return bad("need 0 < c_min < c_max");
        }
        if self.ne < 2 || !self.ne.is_multiple_of(2) {
            return bad("ne must be even and at least 2");
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if (0..3).any(|k| !(self.box_min[k] < self.box_max[k])) {
            return bad("box_min must be below box_max on every axis");
        }
        Ok(())
    }

    /// Slope of the weight→distance map, `(d_s − d_mc)/(c_max − c_min)`.
    pub fn kappa(&self) -> T {
        (self.d_s - self.d_mc) / (self.c_max - self.c_min)
    }

    /// Desired distance for an edge of weight magnitude `w`.
    pub fn distance_for_weight(&self, w: T) -> T {
        if w == self.c_max {
            return self.d_s;
        }
        self.kappa() * (w - self.c_min) + self.d_mc
    }

    pub fn with_budget(&self, ne: usize) -> Self {
        Self { ne, ..self.clone() }
    }

    pub fn cast<U: Real>(&self) -> GeometryParams<U> {
        let c = |v: T| U::lit(v.to_f64().expect("finite"));
        GeometryParams {
            d_s: c(self.d_s),
            d_mc: c(self.d_mc),
            c_min: c(self.c_min),
            c_max: c(self.c_max),
            ne: self.ne,
            box_min: self.box_min.map(c),
            box_max: self.box_max.map(c),
        }
    }
}

/// Symmetric matrix of desired distances, present exactly on edges.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborDistanceMatrix<T> {
    n: usize,
    entries: Vec<Option<T>>,
}

impl<T: Real> NeighborDistanceMatrix<T> {
    pub fn absent(n: usize) -> Self {
        Self {
            n,
            entries: vec![None; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, d: Option<T>) {
        assert!(i != j, "diagonal distances are always absent");
        self.entries[i * self.n + j] = d;
        self.entries[j * self.n + i] = d;
    }

    /// Topology formed by the finite entries.
    pub fn pattern(&self) -> Topology {
        let edges = (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.get(i, j).is_some());
        Topology::new(self.n, edges).expect("upper-triangle pattern")
    }

    pub fn finite_values(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n)
            .flat_map(move |i| (i + 1..self.n).map(move |j| (i, j)))
            .filter_map(|(i, j)| self.get(i, j))
    }

    /// Plain-text matrix format; absent entries are written as `inf`.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.n);
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| {
                    self.get(i, j)
                        .map_or_else(|| "inf".to_string(), |v| v.to_string())
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut header = || -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| Error::Parse("missing distance matrix header".into()))?
                .parse()
                .map_err(|e| Error::Parse(format!("bad distance matrix header: {e}")))
        };
        let (rows, cols) = (header()?, header()?);
        if rows != cols {
            return Err(Error::Parse(format!(
                "distance matrix must be square, got {rows}x{cols}"
            )));
        }
        let values: Vec<Option<T>> = tokens.map(parse_entry::<T>).collect::<Result<_>>()?;
        if values.len() != rows * rows {
            return Err(Error::Parse(format!(
                "expected {} distance entries, found {}",
                rows * rows,
                values.len()
            )));
        }
        let mut out = Self::absent(rows);
        for i in 0..rows {
            for j in 0..rows {
                let v = values[i * rows + j];
                if v != values[j * rows + i] {
                    return Err(Error::Parse(format!(
                        "distance matrix asymmetric at ({i}, {j})"
                    )));
                }
                if i == j {
                    continue;
                }
                out.entries[i * rows + j] = v;
            }
        }
        Ok(out)
    }
}

fn parse_entry<T: Real>(tok: &str) -> Result<Option<T>> {
    if tok.eq_ignore_ascii_case("inf") {
        return Ok(None);
    }
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::Parse(format!("bad distance entry {tok:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("bad distance entry {tok:?}")));
    }
    Ok(Some(T::lit(v)))
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DistanceEntry {
    Finite(f64),
    Absent(String),
}

impl<T: Real> Serialize for NeighborDistanceMatrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<DistanceEntry>> = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| match self.get(i, j) {
                        Some(v) => DistanceEntry::Finite(v.to_f64().expect("finite")),
                        None => DistanceEntry::Absent("inf".into()),
                    })
                    .collect()
            })
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de, T: Real> Deserialize<'de> for NeighborDistanceMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<DistanceEntry>> = Vec::deserialize(deserializer)?;
        let n = rows.len();
        let mut out = Self::absent(n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(de::Error::custom("distance matrix must be square"));
            }
            for (j, entry) in row.into_iter().enumerate() {
                out.entries[i * n + j] = match entry {
                    DistanceEntry::Finite(v) => Some(T::lit(v)),
                    DistanceEntry::Absent(s) if s == "inf" => None,
                    DistanceEntry::Absent(s) => {
                        return Err(de::Error::custom(format!("bad distance entry {s:?}")))
                    }
                };
            }
        }
        Ok(out)
    }
}

/// Map Laplacian weights to desired distances:
/// `κ(|L_ij| − c_min) + d_mc` where `L_ij < 0`, absent elsewhere.
pub fn distance_from_laplacian<T: Real>(
    laplacian: &WeightedLaplacian<T>,
    params: &GeometryParams<T>,
) -> Result<NeighborDistanceMatrix<T>> {
    let n = laplacian.n();
    let m = laplacian.matrix();
    let mut out = NeighborDistanceMatrix::absent(n);
    for i in 0..n {
        for j in i + 1..n {
            let v = m[(i, j)];
            if v >= T::zero() {
                continue;
            }
            let w = -v;
            if w < params.c_min || w > params.c_max {
                return Err(Error::WeightOutOfRange {
                    i,
                    j,
                    magnitude: w.to_f64().unwrap_or(f64::NAN),
                });
            }
            out.set(i, j, Some(params.distance_for_weight(w)));
        }
    }
    Ok(out)
}

/// Topology, desired distances and resources of a team.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Configuration<T> {
    pub topology: Topology,
    pub distances: NeighborDistanceMatrix<T>,
    pub resources: ResourceMatrix,
}

impl<T: Real> Configuration<T> {
    pub fn new(
        topology: Topology,
        distances: NeighborDistanceMatrix<T>,
        resources: ResourceMatrix,
    ) -> Result<Self> {
        if distances.n() != topology.n() || resources.robots() != topology.n() {
            return Err(Error::Dimension(format!(
                "topology has {} vertices, distances {}, resources {} rows",
                topology.n(),
                distances.n(),
                resources.robots()
            )));
        }
        if distances.pattern() != topology {
            return Err(Error::InvalidInput(
                "finite distance pattern differs from the topology".into(),
            ));
        }
        Ok(Self {
            topology,
            distances,
            resources,
        })
    }

    pub fn n(&self) -> usize {
        self.topology.n()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn params() -> GeometryParams<f64> {
        GeometryParams {
            d_s: 0.3,
            d_mc: 1.1,
            c_min: 0.4,
            c_max: 2.0,
            ..GeometryParams::default()
        }
    }

    fn single_edge_distance(w: f64, p: &GeometryParams<f64>) -> f64 {
        let t = Topology::line(2);
        let weights: BTreeMap<_, _> = [((0, 1), w)].into_iter().collect();
        let l = WeightedLaplacian::from_weights(&t, &weights).unwrap();
        distance_from_laplacian(&l, p).unwrap().get(0, 1).unwrap()
    }

    #[test]
    fn endpoints_are_exact() {
        let p = params();
        assert!((single_edge_distance(p.c_min, &p) - p.d_mc).abs() <= 1e-12);
        assert!((single_edge_distance(p.c_max, &p) - p.d_s).abs() <= 1e-12);
        let mid = single_edge_distance((p.c_min + p.c_max) / 2.0, &p);
        assert!((mid - (p.d_s + p.d_mc) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_weight_rejected() {
        let p = params();
        let t = Topology::line(2);
        let weights: BTreeMap<_, _> = [((0, 1), 2.5)].into_iter().collect();
        let l = WeightedLaplacian::from_weights(&t, &weights).unwrap();
        assert!(matches!(
            distance_from_laplacian(&l, &p),
            Err(Error::WeightOutOfRange { .. })
        ));
    }

    #[test]
    fn validate_params() {
        assert!(GeometryParams::default().validate().is_ok());
        assert!(GeometryParams {
            ne: 3,
            ..GeometryParams::default()
        }
        .validate()
        .is_err());
        assert!(GeometryParams {
            d_s: 1.5,
            ..GeometryParams::default()
        }
        .validate()
        .is_err());
        assert!(GeometryParams::default().kappa() < 0.0);
    }

    #[test]
    fn text_and_json_round_trip() {
        let mut d = NeighborDistanceMatrix::<f64>::absent(3);
        d.set(0, 1, Some(0.75));
        d.set(1, 2, Some(1.0 / 3.0));
        let back = NeighborDistanceMatrix::<f64>::from_text(&d.to_text()).unwrap();
        assert_eq!(back, d);
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.contains("\"inf\""));
        let back: NeighborDistanceMatrix<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
        assert_eq!(d.pattern(), Topology::line(3));
    }

    #[test]
    fn configuration_pattern_must_match() {
        let d = NeighborDistanceMatrix::<f64>::absent(3);
        let res = ResourceMatrix::full(3, 1, 1);
        assert!(Configuration::new(Topology::line(3), d.clone(), res.clone()).is_err());
        assert!(Configuration::new(Topology::empty(3), d, res).is_ok());
    }
}
