//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

/// h − z·1
pub fn shifted(h: &DMatrix<f64>, z: Complex64) -> CMatrix {
    let mut a = complexify(h);
    for i in 0..a.nrows() {
        a[(i, i)] -= z;
    }
    a
}

fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

/// Inverse by LU; an empty matrix inverts to itself.
pub fn invert(a: &CMatrix) -> Result<CMatrix> {
    if a.nrows() == 0 {
        return Ok(a.clone());
    }
    match a.clone().lu().try_inverse() {
        Some(inv) if all_finite(&inv) => Ok(inv),
        _ => Err(Error::Singular("LU inverse failed".into())),
    }
}

/// Sub-block by index lists.
pub fn block<T: nalgebra::Scalar + Copy>(m: &DMatrix<T>, rows: &[usize], cols: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn det(a: &CMatrix) -> Complex64 {
    if a.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    a.clone().lu().determinant()
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(f64::total_cmp);
    s
}

/// Operator 2-norm.
pub fn op_norm(a: &CMatrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// Smallest singular value.
pub fn sigma_min(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Eigenvalues of a general complex matrix (diagonal of the complex Schur form).
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur =
        nalgebra::Schur::try_new(a.clone(), 1e-15, 10_000).ok_or_else(|| Error::Singular("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Smallest eigenvalue of the Hermitian part (A − A*)/(2i), i.e. of Im A.
pub fn imag_part_min_eig(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let im = CMatrix::from_fn(n, n, |i, j| (a[(i, j)] - a[(j, i)].conj()) / Complex64::new(0.0, 2.0));
    im.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_triangular_and_rotation() {
        let c = |re, im| Complex64::new(re, im);
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(5.0, 1.0), c(0.0, 0.0), c(-2.0, 3.0)]);
        let mut e = eigenvalues(&a).unwrap();
        e.sort_by(|x, y| x.re.total_cmp(&y.re));
        assert!((e[0] - c(-2.0, 3.0)).norm() < 1e-12 && (e[1] - c(1.0, 0.0)).norm() < 1e-12);
        let r = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let e = eigenvalues(&r).unwrap();
        assert!(e.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12 && v.re.abs() < 1e-12));
    }

    #[test]
    fn norms_and_det() {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)]));
        assert!((op_norm(&d) - 2.0).abs() < 1e-14 && (sigma_min(&d) - 1.0).abs() < 1e-14);
        assert!((det(&d) - Complex64::new(0.0, 2.0)).norm() < 1e-14);
        assert!((imag_part_min_eig(&d) - 0.0).abs() < 1e-14);
    }
}
