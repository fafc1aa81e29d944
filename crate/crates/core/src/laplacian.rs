//! Weighted graph Laplacians and the connectivity certificate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::eigen::symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::topology::{Edge, Topology};

/// Tolerance on the smallest eigenvalue of `(1/n)·11ᵀ + L`.
pub const CONNECTIVITY_EPS: f64 = 1e-9;

/// `L = Diag(A·1) − A` for a nonnegatively weighted undirected graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedLaplacian<T> {
    matrix: Matrix<T>,
}

impl<T: Real> WeightedLaplacian<T> {
    /// Build `L` from per-edge weights. Every edge of `topology` needs a weight.
    pub fn from_weights(topology: &Topology, weights: &BTreeMap<Edge, T>) -> Result<Self> {
        let n = topology.n();
        let mut matrix = Matrix::zeros(n, n);
        for (i, j) in topology.edges() {
            let w = *weights.get(&(i, j)).ok_or(Error::MissingWeight(i, j))?;
            if !w.is_finite() || w <= T::zero() {
                return Err(Error::InvalidInput(format!(
                    "edge ({i}, {j}) weight {w} must be positive"
                )));
            }
            matrix[(i, j)] = -w;
            matrix[(j, i)] = -w;
            matrix[(i, i)] = matrix[(i, i)] + w;
            matrix[(j, j)] = matrix[(j, j)] + w;
        }
        Ok(Self { matrix })
    }

    /// Unit-weight Laplacian of `topology`.
    pub fn unweighted(topology: &Topology) -> Self {
        let weights = topology.edges().map(|e| (e, T::one())).collect();
        Self::from_weights(topology, &weights).expect("unit weights are valid")
    }

    /// Wrap a raw matrix without validation. Used for checking hand-built
    /// candidates against the constraint set.
    pub fn from_matrix_unchecked(matrix: Matrix<T>) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> T {
        self.matrix.trace()
    }

    pub fn weight(&self, i: usize, j: usize) -> T {
        -self.matrix[(i, j)]
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.n())
            .map(|i| self.matrix.row(i).iter().fold(T::zero(), |a, &b| a + b))
            .collect()
    }

    /// The topology induced by the nonzero off-diagonal entries.
    pub fn support(&self) -> Topology {
        let n = self.n();
        let edges = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.matrix[(i, j)] != T::zero());
        Topology::new(n, edges).expect("upper-triangle support is a simple graph")
    }

    /// Smallest eigenvalue of `(1/n)·11ᵀ + L`. Positive iff the weighted
    /// graph is connected.
    pub fn shifted_min_eigenvalue(&self) -> Result<T> {
        let n = self.n();
        if n == 0 {
            return Err(Error::InvalidInput("empty Laplacian".into()));
        }
        let shift = T::one() / T::from_usize_lossy(n);
        let shifted = Matrix::from_fn(n, n, |i, j| self.matrix[(i, j)] + shift);
        Ok(symmetric_eigenvalues(&shifted)?[0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityCertificate {
    pub connected: bool,
    /// Smallest eigenvalue of `(1/n)·11ᵀ + L` for the unit-weight Laplacian.
    pub mu: f64,
}

/// Connectivity by graph search, with the spectral certificate attached.
pub fn connectivity(topology: &Topology) -> Result<ConnectivityCertificate> {
    if topology.n() == 0 {
        return Err(Error::InvalidInput("connectivity of an empty graph".into()));
    }
    let connected = topology.is_connected();
    let mu = WeightedLaplacian::<f64>::unweighted(topology)
        .shifted_min_eigenvalue()?
        .max(0.0);
    Ok(ConnectivityCertificate { connected, mu })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weights(pairs: &[(Edge, f64)]) -> BTreeMap<Edge, f64> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn single_edge() {
        let t = Topology::line(2);
        let l = WeightedLaplacian::from_weights(&t, &weights(&[((0, 1), 0.7)])).unwrap();
        assert_eq!(
            l.matrix(),
            &Matrix::from_rows(vec![vec![0.7, -0.7], vec![-0.7, 0.7]]).unwrap()
        );
    }

    #[test]
    fn empty_edge_set_is_zero() {
        let l = WeightedLaplacian::<f64>::unweighted(&Topology::empty(3));
        assert_eq!(l.matrix(), &Matrix::zeros(3, 3));
    }

    #[test]
    fn triangle_unit_weights() {
        let l = WeightedLaplacian::<f64>::unweighted(&Topology::complete(3));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(l.matrix()[(i, j)], if i == j { 2.0 } else { -1.0 });
            }
        }
    }

    #[test]
    fn missing_weight_is_an_error() {
        let t = Topology::line(3);
        let err = WeightedLaplacian::from_weights(&t, &weights(&[((0, 1), 1.0)])).unwrap_err();
        assert!(matches!(err, Error::MissingWeight(1, 2)));
    }

    #[test]
    fn trace_is_twice_total_weight() {
        let t = Topology::new(4, [(0, 1), (1, 2), (1, 3), (2, 3)]).unwrap();
        let w = weights(&[((0, 1), 0.5), ((1, 2), 1.25), ((1, 3), 2.0), ((2, 3), 0.75)]);
        let l = WeightedLaplacian::from_weights(&t, &w).unwrap();
        assert!((l.trace() - 2.0 * 4.5).abs() < 1e-12);
        assert!(l.row_sums().iter().all(|s| s.abs() < 1e-12));
        assert_eq!(l.support(), t);
    }

    #[test]
    fn certificate_examples() {
        let line = connectivity(&Topology::line(4)).unwrap();
        assert!(line.connected && line.mu > CONNECTIVITY_EPS);
        let split = connectivity(&Topology::new(4, [(0, 1), (2, 3)]).unwrap()).unwrap();
        assert!(!split.connected && split.mu <= CONNECTIVITY_EPS);
        let single = connectivity(&Topology::empty(1)).unwrap();
        assert!(single.connected && single.mu > CONNECTIVITY_EPS);
    }
}
