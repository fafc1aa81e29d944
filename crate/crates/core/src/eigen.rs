//! Dense symmetric eigenvalues by cyclic Jacobi rotations.
//!
//! The matrices in this crate are at most a few dozen rows (Gram matrices of
//! inefficacy matrices, Laplacians of small teams), where Jacobi is accurate
//! to high relative precision and simple to verify.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix in ascending order.
///
/// Only the lower triangle is read.
pub fn symmetric_eigenvalues<T: Real>(m: &Matrix<T>) -> Result<Vec<T>> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::Dimension(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut a = Matrix::from_fn(n, n, |i, j| if i >= j { m[(i, j)] } else { m[(j, i)] });

    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag = diag + a[(i, i)] * a[(i, i)];
            for j in 0..i {
                off = off + a[(i, j)] * a[(i, j)];
            }
        }
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, p, q);
            }
        }
    }

    let mut eig: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(eig)
}

/// Annihilate `a[p][q]` with one Jacobi rotation (Rutishauser's formulation).
fn rotate<T: Real>(a: &mut Matrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == T::zero() {
        return;
    }
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let two = T::lit(2.0);
    let theta = (aqq - app) / (two * apq);
    let t = {
        let sign = if theta >= T::zero() {
            T::one()
        } else {
            -T::one()
        };
        sign / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    let tau = s / (T::one() + c);

    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = T::zero();
    a[(q, p)] = T::zero();

    let n = a.rows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_kp = akp - s * (akq + tau * akp);
        let new_kq = akq + s * (akp - tau * akq);
        a[(k, p)] = new_kp;
        a[(p, k)] = new_kp;
        a[(k, q)] = new_kq;
        a[(q, k)] = new_kq;
    }
}

/// Singular values in descending order, by one-sided Jacobi (Hestenes)
/// orthogonalization of the columns of the taller orientation.
///
/// Exactly dependent columns are rotated onto an exact zero, so rank
/// deficient matrices report zero singular values rather than `sqrt(eps)`
/// noise.
pub fn singular_values<T: Real>(m: &Matrix<T>) -> Result<Vec<T>> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let tall = if m.rows() >= m.cols() {
        m.clone()
    } else {
        m.transpose()
    };
    let k = tall.cols();
    let mut cols: Vec<Vec<T>> = (0..k)
        .map(|j| (0..tall.rows()).map(|i| tall[(i, j)]).collect())
        .collect();
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y);
    let frob: T = cols.iter().map(|c| dot(c, c)).fold(T::zero(), |a, b| a + b);
    let tol = T::epsilon() * T::lit(tall.rows() as f64);
    let negligible = tol * tol * frob;

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if alpha <= negligible || beta <= negligible {
                    // Numerically zero column: drop it so it reports exactly zero.
                    let z = if alpha <= negligible { p } else { q };
                    cols[z].iter_mut().for_each(|x| *x = T::zero());
                    continue;
                }
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let sign = if zeta >= T::zero() {
                    T::one()
                } else {
                    -T::one()
                };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = c * a - s * b;
                    *y = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<T> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
    Ok(sv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix() {
        let m = Matrix::from_rows(vec![vec![3.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert_eq!(symmetric_eigenvalues(&m).unwrap(), vec![-1.0, 3.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let m = Matrix::from_rows(vec![vec![2.0f64, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = symmetric_eigenvalues(&m).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn path_laplacian_spectrum() {
        // Path on 4 vertices: eigenvalues 2 - 2cos(k*pi/4), k = 0..3.
        let m = Matrix::from_rows(vec![
            vec![1.0, -1.0, 0.0, 0.0],
            vec![-1.0, 2.0, -1.0, 0.0],
            vec![0.0, -1.0, 2.0, -1.0],
            vec![0.0, 0.0, -1.0, 1.0],
        ])
        .unwrap();
        let e = symmetric_eigenvalues(&m).unwrap();
        for (k, v) in e.iter().enumerate() {
            let expected = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / 4.0).cos();
            assert!((v - expected).abs() < 1e-13, "k={k}: {v} vs {expected}");
        }
    }

    #[test]
    fn single_precision() {
        let m: Matrix<f32> = Matrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = symmetric_eigenvalues(&m).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-6 && (e[1] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_non_square_and_nan() {
        assert!(symmetric_eigenvalues(&Matrix::<f64>::zeros(2, 3)).is_err());
        let m = Matrix::from_rows(vec![vec![f64::NAN]]).unwrap();
        assert!(matches!(symmetric_eigenvalues(&m), Err(Error::NonFinite)));
    }
}
