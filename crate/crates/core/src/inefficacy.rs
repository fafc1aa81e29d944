//! Task inefficacy: how far a configuration's resource reach is from the
//! maximal one, measured with the nuclear norm.

use crate::eigen::singular_values;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::resources::ResourceMatrix;
use crate::scalar::Real;
use crate::topology::Topology;

/// Sum of singular values.
pub fn nuclear_norm<T: Real>(m: &Matrix<T>) -> Result<T> {
    Ok(singular_values(m)?
        .into_iter()
        .fold(T::zero(), |acc, s| acc + s))
}

/// `V = n·1^{n×r} − Ā·Γ`. Entry `(i, j)` is `n` minus the number of robots
/// in the closed neighborhood of `i` holding resource `j`.
pub fn inefficacy_matrix(topology: &Topology, resources: &ResourceMatrix) -> Result<Matrix<u32>> {
    let n = topology.n();
    if resources.robots() != n {
        return Err(Error::Dimension(format!(
            "topology has {n} vertices but resource matrix has {} rows",
            resources.robots()
        )));
    }
    let r = resources.resources();
    let adj = topology.adjacency_lists();
    let mut v = Matrix::zeros(n, r);
    for i in 0..n {
        for j in 0..r {
            let held = u32::from(resources.get(i, j))
                + adj[i]
                    .iter()
                    .map(|&k| u32::from(resources.get(k, j)))
                    .sum::<u32>();
            v[(i, j)] = n as u32 - held;
        }
    }
    Ok(v)
}

/// Nuclear norm of the inefficacy matrix.
pub fn task_inefficacy<T: Real>(topology: &Topology, resources: &ResourceMatrix) -> Result<T> {
    let v = inefficacy_matrix(topology, resources)?;
    nuclear_norm(&v.map(|&x| T::from_u32(x).expect("small integer")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_norm_three() {
        let n: f64 = nuclear_norm(&Matrix::identity(3)).unwrap();
        assert!((n - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rank_one_block() {
        let m = Matrix::filled(7, 3, 7.0);
        let n: f64 = nuclear_norm(&m).unwrap();
        assert!((n - 7.0 * 21f64.sqrt()).abs() < 1e-12);
        assert!((n - 32.0780).abs() < 1e-4);
        // wide orientation goes through the transposed Gram
        let wide: f64 = nuclear_norm(&m.transpose()).unwrap();
        assert!((wide - n).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let m = Matrix::from_rows(vec![vec![1.0, f64::INFINITY]]).unwrap();
        assert!(nuclear_norm(&m).is_err());
    }

    #[test]
    fn single_precision_rank_one() {
        let m: Matrix<f32> = Matrix::filled(4, 2, 1.0);
        let n = nuclear_norm(&m).unwrap();
        assert!((n - 8f32.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn inefficacy_line_of_three() {
        let res = ResourceMatrix::from_rows(vec![vec![1, 0], vec![0, 1], vec![1, 0]], 1).unwrap();
        let v = inefficacy_matrix(&Topology::line(3), &res).unwrap();
        assert_eq!(
            v,
            Matrix::from_rows(vec![vec![2, 2], vec![1, 2], vec![2, 2]]).unwrap()
        );
    }

    #[test]
    fn maximal_configuration_is_zero() {
        let res = ResourceMatrix::full(5, 4, 1);
        let v = inefficacy_matrix(&Topology::complete(5), &res).unwrap();
        assert!(v.iter().all(|&x| x == 0));
        assert_eq!(
            task_inefficacy::<f64>(&Topology::complete(5), &res).unwrap(),
            0.0
        );

        let single = ResourceMatrix::full(1, 3, 1);
        let v = inefficacy_matrix(&Topology::empty(1), &single).unwrap();
        assert_eq!(v, Matrix::zeros(1, 3));
    }

    #[test]
    fn empty_edges_full_resources() {
        let (n, r) = (6, 4);
        let res = ResourceMatrix::full(n, r, 1);
        let ti: f64 = task_inefficacy(&Topology::empty(n), &res).unwrap();
        let expected = (n as f64 - 1.0) * ((n * r) as f64).sqrt();
        assert!(
            (ti - expected).abs() < 1e-12 * expected,
            "{ti} vs {expected}"
        );
    }

    #[test]
    fn dimension_mismatch() {
        let res = ResourceMatrix::full(4, 2, 1);
        assert!(inefficacy_matrix(&Topology::line(3), &res).is_err());
    }
}
