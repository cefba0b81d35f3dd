//! Thin wrappers around LAPACK Cholesky routines.
//!
//! Every coefficient update solves one SPD system per iteration, so this is
//! the hot path of the whole crate. Everything is built on a single lower
//! Cholesky factor; inverses and quadratic forms are derived from triangular
//! solves rather than refactorizations.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use ndarray_linalg::{Cholesky, Diag, SolveTriangular, UPLO};

use crate::error::{CoreError, Result};

/// Lower-triangular Cholesky factor of an SPD matrix `A = L Lᵀ`.
pub struct SpdFactor {
    l: Array2<f64>,
}

impl SpdFactor {
    /// Factor a symmetric positive definite matrix (lower triangle is used).
    pub fn factor(a: &Array2<f64>) -> Result<Self> {
        let l = a
            .cholesky(UPLO::Lower)
            .map_err(|e| CoreError::Linalg(format!("cholesky: {e}")))?;
        Ok(SpdFactor { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn lower(&self) -> &Array2<f64> {
        &self.l
    }

    /// Solve `A x = b`.
    pub fn solve_vec(&self, b: &Array1<f64>) -> Result<Array1<f64>> {
        let y = self.l.solve_triangular(UPLO::Lower, Diag::NonUnit, b)?;
        let x = self.l.t().solve_triangular(UPLO::Upper, Diag::NonUnit, &y)?;
        Ok(x)
    }

    /// `L⁻¹`, computed once per factorization when inverse diagonals are needed.
    pub fn inv_lower(&self) -> Result<Array2<f64>> {
        let eye = Array2::<f64>::eye(self.dim());
        let inv = self
            .l
            .solve_triangular(UPLO::Lower, Diag::NonUnit, &eye)?;
        Ok(inv)
    }

    /// Diagonal of `A⁻¹ = L⁻ᵀ L⁻¹` from the column norms of `L⁻¹`.
    pub fn inverse_diag(&self, inv_l: &Array2<f64>) -> Array1<f64> {
        let n = self.dim();
        let mut d = Array1::<f64>::zeros(n);
        for i in 0..n {
            // L⁻¹ is lower triangular; column i is nonzero from row i down.
            d[i] = (i..n).map(|r| inv_l[[r, i]] * inv_l[[r, i]]).sum();
        }
        d
    }

    /// Full `A⁻¹ = L⁻ᵀ L⁻¹`.
    pub fn inverse(&self, inv_l: &Array2<f64>) -> Array2<f64> {
        inv_l.t().dot(inv_l)
    }

    /// Quadratic forms `fₜ' A⁻¹ fₜ` for every row `fₜ` of `f` (T×d).
    pub fn quad_forms(&self, f: &ArrayView2<f64>) -> Result<Array1<f64>> {
        let w = self
            .l
            .solve_triangular(UPLO::Lower, Diag::NonUnit, &f.t().to_owned())?;
        Ok(w.map_axis(Axis(0), |col| col.iter().map(|v| v * v).sum()))
    }

    /// `ln det A = 2 Σ ln Lᵢᵢ`.
    pub fn ln_det(&self) -> f64 {
        2.0 * self.l.diag().iter().map(|v| v.ln()).sum::<f64>()
    }
}

/// `Fᵀ diag(w) F`, the weighted Gram matrix of the design.
pub fn weighted_gram(f: &ArrayView2<f64>, w: &ArrayView1<f64>) -> Array2<f64> {
    let mut scaled = f.to_owned();
    for (mut row, &wt) in scaled.rows_mut().into_iter().zip(w.iter()) {
        row *= wt;
    }
    f.t().dot(&scaled)
}

/// `Fᵀ v` for a weight vector applied to the rows.
pub fn design_weighted_rhs(f: &ArrayView2<f64>, v: &Array1<f64>) -> Array1<f64> {
    f.t().dot(v)
}

/// Cholesky with escalating diagonal jitter.
///
/// Starts at `jitter0` and multiplies by 10 until `jitter_max`; returns the
/// factor together with the jitter that succeeded.
pub fn cholesky_with_jitter(
    a: &Array2<f64>,
    jitter0: f64,
    jitter_max: f64,
) -> Result<(Array2<f64>, f64)> {
    let n = a.nrows();
    let mut jitter = jitter0;
    loop {
        let mut m = a.clone();
        for i in 0..n {
            m[[i, i]] += jitter;
        }
        match m.cholesky(UPLO::Lower) {
            Ok(l) => return Ok((l, jitter)),
            Err(_) if jitter * 10.0 <= jitter_max * (1.0 + 1e-12) => jitter *= 10.0,
            Err(e) => {
                return Err(CoreError::Linalg(format!(
                    "cholesky failed at max jitter {jitter:.3e}: {e}"
                )))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn spd3() -> Array2<f64> {
        array![[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]]
    }

    #[test]
    fn solve_matches_direct() {
        let a = spd3();
        let f = SpdFactor::factor(&a).unwrap();
        let b = array![1.0, 2.0, 3.0];
        let x = f.solve_vec(&b).unwrap();
        let back = a.dot(&x);
        for i in 0..3 {
            assert_abs_diff_eq!(back[i], b[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn inverse_diag_and_quad_forms_agree() {
        let a = spd3();
        let f = SpdFactor::factor(&a).unwrap();
        let inv_l = f.inv_lower().unwrap();
        let inv = f.inverse(&inv_l);
        let d = f.inverse_diag(&inv_l);
        for i in 0..3 {
            assert_abs_diff_eq!(d[i], inv[[i, i]], epsilon = 1e-12);
        }
        let rows = array![[1.0, 0.0, 0.0], [1.0, -2.0, 0.7]];
        let q = f.quad_forms(&rows.view()).unwrap();
        for (t, row) in rows.rows().into_iter().enumerate() {
            let expect = row.dot(&inv.dot(&row.to_owned()));
            assert_abs_diff_eq!(q[t], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn weighted_gram_matches_naive() {
        let f = array![[1.0, 2.0], [0.5, -1.0], [3.0, 0.0]];
        let w = array![0.5, 2.0, 1.5];
        let g = weighted_gram(&f.view(), &w.view());
        let mut expect = Array2::<f64>::zeros((2, 2));
        for t in 0..3 {
            for i in 0..2 {
                for j in 0..2 {
                    expect[[i, j]] += w[t] * f[[t, i]] * f[[t, j]];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(g[[i, j]], expect[[i, j]], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn jitter_escalates_on_semidefinite_input() {
        // Rank-deficient Gram matrix.
        let x = array![[1.0, 1.0], [2.0, 2.0]];
        let a = x.t().dot(&x);
        let (l, jitter) = cholesky_with_jitter(&a, 1e-8, 1e-4).unwrap();
        assert!(jitter >= 1e-8);
        let back = l.dot(&l.t());
        assert_abs_diff_eq!(back[[0, 0]], a[[0, 0]] + jitter, epsilon = 1e-10);
    }
}
