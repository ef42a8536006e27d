//! Dense symmetric eigen-helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// `(M + Mᵀ)/2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of the symmetrized matrix, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_finite(m)?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(symmetrize(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    Ok(ev)
}

/// Projection onto the PSD cone in Frobenius norm.
pub fn psd_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, m[(0, 0)].max(0.0));
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut out = DMatrix::zeros(n, n);
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > 0.0 {
            let v = eig.eigenvectors.column(j);
            out += lam * v * v.transpose();
        }
    }
    out
}

/// Largest eigenvalue in absolute value of the symmetrized matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    let ev = sym_eigenvalues(m)?;
    Ok(ev.iter().fold(0.0f64, |a, x| a.max(x.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_helpers() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -3.0]);
        assert_eq!(sym_eigenvalues(&m).unwrap(), vec![-3.0, 2.0]);
        let p = psd_part(&m);
        assert!((p[(0, 0)] - 2.0).abs() < 1e-15 && p[(1, 1)].abs() < 1e-15);
        let bad = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(matches!(sym_eigenvalues(&bad), Err(Error::NonFinite)));
    }
}
