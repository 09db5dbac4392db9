//! Small dense helpers on top of nalgebra.
//!
//! Every symmetric matrix is re-symmetrized before it reaches an eigensolver
//! or a Cholesky factorization.

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of the symmetric part of `m`, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// `(λ_min, λ_max)` of the symmetric part of `m`.
pub fn sym_extreme_eigenvalues(m: &DMatrix<f64>) -> (f64, f64) {
    let vals = sym_eigenvalues(m);
    (vals[0], vals[vals.len() - 1])
}

pub fn cholesky(m: &DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    let sym = symmetrize(m);
    match Cholesky::new(sym.clone()) {
        Some(c) => Ok(c),
        None => Err(Error::NotPositiveDefinite {
            what: what.to_string(),
            min_eigenvalue: sym_extreme_eigenvalues(&sym).0,
        }),
    }
}

/// `tr(M⁻¹)` for symmetric positive-definite `M`.
///
/// With `M = R Rᵀ`, `tr(M⁻¹) = ‖R⁻¹‖²_F`; `R⁻¹` comes from a triangular solve
/// against the identity columns.
pub fn spd_trace_inverse(m: &DMatrix<f64>, what: &str) -> Result<f64> {
    let chol = cholesky(m, what)?;
    let dim = m.nrows();
    let r_inv = chol
        .l_dirty()
        .solve_lower_triangular(&DMatrix::identity(dim, dim))
        .ok_or_else(|| Error::Numerical(format!("triangular solve failed for {what}")))?;
    // l_dirty leaves garbage above the diagonal; solve_lower_triangular only reads the lower part.
    Ok(r_inv.lower_triangle().norm_squared())
}

/// Solves `M X = B` for symmetric positive-definite `M`.
pub fn spd_solve(m: &DMatrix<f64>, b: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    Ok(cholesky(m, what)?.solve(b))
}

pub fn relative_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_inverse_matches_explicit_inverse() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let explicit = m.clone().try_inverse().unwrap().trace();
        let t = spd_trace_inverse(&m, "m").unwrap();
        assert!(relative_diff(t, explicit) < 1e-13);
    }

    #[test]
    fn cholesky_failure_reports_min_eigenvalue() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -2.0]);
        match cholesky(&m, "bad") {
            Err(Error::NotPositiveDefinite { min_eigenvalue, .. }) => {
                assert!((min_eigenvalue + 2.0).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
