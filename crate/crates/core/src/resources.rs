//! Binary robot × resource possession matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResourceMatrix {
    gamma: Matrix<u8>,
    /// Minimum number of robots that must hold each resource.
    threshold: usize,
}

impl ResourceMatrix {
    pub fn new(gamma: Matrix<u8>, threshold: usize) -> Result<Self> {
        if gamma.iter().any(|&v| v > 1) {
            return Err(Error::InvalidInput(
                "resource matrix entries must be 0 or 1".into(),
            ));
        }
        if threshold == 0 {
            return Err(Error::InvalidInput(
                "feasibility threshold must be positive".into(),
            ));
        }
        Ok(Self { gamma, threshold })
    }

    /// Every robot holds every resource.
    pub fn full(n: usize, r: usize, threshold: usize) -> Self {
        Self::new(Matrix::filled(n, r, 1), threshold).expect("valid")
    }

    pub fn from_rows(rows: Vec<Vec<u8>>, threshold: usize) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?, threshold)
    }

    pub fn gamma(&self) -> &Matrix<u8> {
        &self.gamma
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn with_threshold(&self, threshold: usize) -> Result<Self> {
        Self::new(self.gamma.clone(), threshold)
    }

    pub fn robots(&self) -> usize {
        self.gamma.rows()
    }

    pub fn resources(&self) -> usize {
        self.gamma.cols()
    }

    pub fn get(&self, robot: usize, resource: usize) -> bool {
        self.gamma[(robot, resource)] == 1
    }

    pub fn column_sums(&self) -> Vec<usize> {
        (0..self.resources())
            .map(|j| {
                (0..self.robots())
                    .map(|i| usize::from(self.gamma[(i, j)]))
                    .sum()
            })
            .collect()
    }

    pub fn count_ones(&self) -> usize {
        self.gamma.iter().map(|&v| usize::from(v)).sum()
    }

    /// Every resource is held by at least `threshold` robots.
    pub fn is_feasible(&self) -> bool {
        self.column_sums().iter().all(|&s| s >= self.threshold)
    }

    /// Positions of the ones, row-major.
    pub fn nonzero_entries(&self) -> Vec<(usize, usize)> {
        (0..self.robots())
            .flat_map(|i| (0..self.resources()).map(move |j| (i, j)))
            .filter(|&(i, j)| self.get(i, j))
            .collect()
    }

    /// Copy with entry `(robot, resource)` cleared. The entry must be set.
    pub fn without(&self, robot: usize, resource: usize) -> Result<Self> {
        if !self.get(robot, resource) {
            return Err(Error::InvalidInput(format!(
                "robot {robot} does not hold resource {resource}"
            )));
        }
        let mut gamma = self.gamma.clone();
        gamma[(robot, resource)] = 0;
        Ok(Self {
            gamma,
            threshold: self.threshold,
        })
    }

    pub fn hamming_distance(&self, other: &Self) -> usize {
        self.gamma
            .iter()
            .zip(other.gamma.iter())
            .filter(|(a, b)| a != b)
            .count()
    }
}
