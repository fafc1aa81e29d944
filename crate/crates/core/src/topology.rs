//! Undirected simple communication graphs.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Unordered vertex pair stored as `(min, max)`, 0-indexed.
pub type Edge = (usize, usize);

pub fn edge(i: usize, j: usize) -> Edge {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Topology {
    n: usize,
    edges: BTreeSet<Edge>,
}

impl Topology {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: BTreeSet::new(),
        }
    }

    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut topo = Self::empty(n);
        for (i, j) in edges {
            if i == j {
                return Err(Error::InvalidInput(format!("self-loop at vertex {i}")));
            }
            if i >= n || j >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({i}, {j}) out of range for {n} vertices"
                )));
            }
            if !topo.edges.insert(edge(i, j)) {
                return Err(Error::InvalidInput(format!("duplicate edge ({i}, {j})")));
            }
        }
        Ok(topo)
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Self { n, edges }
    }

    /// Path 0–1–…–(n−1).
    pub fn line(n: usize) -> Self {
        let edges = (1..n).map(|i| (i - 1, i)).collect();
        Self { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_set(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.edges.contains(&edge(i, j))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| self.has_edge(u, v)).collect()
    }

    /// Flip the presence of edge `(i, j)`.
    pub fn toggle(&mut self, i: usize, j: usize) {
        assert!(
            i != j && i < self.n && j < self.n,
            "invalid toggle ({i}, {j})"
        );
        let e = edge(i, j);
        if !self.edges.remove(&e) {
            self.edges.insert(e);
        }
    }

    pub fn with_toggles(&self, toggles: &[Edge]) -> Self {
        let mut out = self.clone();
        for &(i, j) in toggles {
            out.toggle(i, j);
        }
        out
    }

    /// Edges present in exactly one of the two topologies, sorted.
    pub fn symmetric_difference(&self, other: &Self) -> Vec<Edge> {
        self.edges
            .symmetric_difference(&other.edges)
            .copied()
            .collect()
    }

    /// `[Ā]_{ij} = 1` iff `(i, j)` is an edge or `i = j`.
    pub fn closed_adjacency(&self) -> Matrix<u8> {
        Matrix::from_fn(self.n, self.n, |i, j| {
            u8::from(i == j || self.has_edge(i, j))
        })
    }

    /// Breadth-first reachability from vertex 0.
    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let adj = self.adjacency_lists();
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    reached += 1;
                    queue.push_back(u);
                }
            }
        }
        reached == self.n
    }

    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// `|E| / (n(n−1)/2)`.
    pub fn edge_density(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::InvalidInput(
                "edge density needs at least two vertices".into(),
            ));
        }
        let pairs = self.n * (self.n - 1) / 2;
        Ok(self.edges.len() as f64 / pairs as f64)
    }

    /// One `i j` pair per line, 1-indexed.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "{} {}", a + 1, b + 1);
        }
        out
    }

    /// Parse a 1-indexed edge list. Blank lines and `#` comments are skipped.
    /// When `n` is `None` the vertex count is the largest index seen.
    pub fn from_edge_list(text: &str, n: Option<usize>) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::Parse(format!(
                    "line {}: expected two vertex indices, got {line:?}",
                    lineno + 1
                )));
            }
            let parse = |s: &str| -> Result<usize> {
                let v: usize = s
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad index {s:?}", lineno + 1)))?;
                if v == 0 {
                    return Err(Error::Parse(format!(
                        "line {}: vertex indices are 1-based",
                        lineno + 1
                    )));
                }
                Ok(v - 1)
            };
            pairs.push((parse(fields[0])?, parse(fields[1])?));
        }
        let max_seen = pairs.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
        let n = match n {
            Some(n) if n < max_seen => {
                return Err(Error::InvalidInput(format!(
                    "edge list references vertex {max_seen} but n = {n}"
                )))
            }
            Some(n) => n,
            None => max_seen,
        };
        Self::new(n, pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_adjacency_no_edges_is_identity() {
        let a = Topology::empty(2).closed_adjacency();
        assert_eq!(a, Matrix::from_rows(vec![vec![1, 0], vec![0, 1]]).unwrap());
    }

    #[test]
    fn closed_adjacency_single_edge_is_all_ones() {
        let a = Topology::line(2).closed_adjacency();
        assert_eq!(a, Matrix::filled(2, 2, 1u8));
    }

    #[test]
    fn closed_adjacency_line_of_three() {
        let a = Topology::line(3).closed_adjacency();
        for i in 0..3 {
            for j in 0..3 {
                let expected = u8::from(!matches!((i, j), (0, 2) | (2, 0)));
                assert_eq!(a[(i, j)], expected, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(Topology::new(3, [(1, 1)]).is_err());
        assert!(Topology::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Topology::new(3, [(0, 3)]).is_err());
    }

    #[test]
    fn edge_density_examples() {
        assert_eq!(Topology::complete(5).edge_density().unwrap(), 1.0);
        let tree = Topology::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(tree.edge_density().unwrap(), 0.5);
        let line = Topology::line(7).edge_density().unwrap();
        assert!((line - 6.0 / 21.0).abs() < 1e-15);
        assert!(Topology::empty(1).edge_density().is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let t = Topology::new(5, [(0, 4), (1, 2), (2, 3)]).unwrap();
        let back = Topology::from_edge_list(&t.to_edge_list(), Some(5)).unwrap();
        assert_eq!(t, back);
        assert!(Topology::from_edge_list("0 1\n", None).is_err());
        assert!(Topology::from_edge_list("1 2 3\n", None).is_err());
        assert!(Topology::from_edge_list("1 6\n", Some(5)).is_err());
    }

    #[test]
    fn connectivity_by_search() {
        assert!(Topology::line(4).is_connected());
        assert!(!Topology::new(4, [(0, 1), (2, 3)]).unwrap().is_connected());
        assert!(Topology::empty(1).is_connected());
        assert!(!Topology::empty(2).is_connected());
    }
}
