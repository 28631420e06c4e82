use faer::linalg::solvers::{Llt, Solve, SolveLstsq};
use faer::Side;

use crate::error::{Error, Result};
use crate::linalg::{devectorize, view, CMat, LinearOperator, C64};
use crate::sensing::MeasurementOperator;

use super::EstimateResult;

/// Unstructured least squares `argmin_x ||y - sqrt(rho) Phi x||_2`.
///
/// The Cholesky factor of `Phi^H Phi` is computed once and reused for every
/// observation vector measured through the same `Phi`. One refinement step on
/// the residual follows the normal-equations solve.
/// Smallest accepted ratio of Cholesky pivots, roughly `1 / cond(Phi)`.
const PIVOT_RATIO_TOL: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct LsSolver {
    factor: Llt<C64>,
    n_rx: usize,
    n_cols: usize,
}

impl LsSolver {
    pub fn new(phi: &MeasurementOperator) -> Result<Self> {
        let (rows, cols) = (phi.nrows(), phi.ncols());
        if rows < cols {
            return Err(Error::Singular(format!(
                "Phi has {rows} rows but {cols} unknowns; least squares needs M N L_r >= Nc Nt Nr"
            )));
        }
        let gram = phi.gram();
        let factor = gram
            .llt(Side::Lower)
            .map_err(|e| Error::Singular(format!("Phi^H Phi is not positive definite ({e:?})")))?;
        let diag_min = (0..cols).map(|i| factor.L()[(i, i)].re).fold(f64::INFINITY, f64::min);
        let diag_max = (0..cols).map(|i| factor.L()[(i, i)].re).fold(0.0, f64::max);
        if !(diag_min > PIVOT_RATIO_TOL * diag_max) {
            return Err(Error::Singular(format!(
                "Phi is numerically rank deficient (Cholesky pivot ratio {:.3e})",
                diag_min / diag_max
            )));
        }
        Ok(Self {
            factor,
            n_rx: phi.n_rx(),
            n_cols: cols,
        })
    }

    pub fn solve(&self, phi: &MeasurementOperator, y: &[C64], rho: f64) -> Result<EstimateResult> {
        if y.len() != phi.nrows() || phi.ncols() != self.n_cols {
            return Err(Error::param("observation length does not match Phi"));
        }
        if !(rho > 0.0) {
            return Err(Error::param("rho must be positive for least squares"));
        }
        let mut x = self.normal_solve(&phi.adjoint(y));
        let fitted = phi.apply(&x);
        let residual: Vec<C64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let dx = self.normal_solve(&phi.adjoint(&residual));
        x.iter_mut().zip(&dx).for_each(|(a, b)| *a += b);
        let scale = 1.0 / rho.sqrt();
        let h: Vec<C64> = x.iter().map(|v| v * scale).collect();
        let channel_hat = devectorize(&h, self.n_rx, self.n_cols / self.n_rx);
        Ok(EstimateResult {
            h_hat: h,
            support: Vec::new(),
            channel_hat,
            iterations: 1,
            residual_norms: Vec::new(),
        })
    }
}

impl LsSolver {
    fn normal_solve(&self, rhs: &[C64]) -> Vec<C64> {
        let mut x = CMat::from_fn(self.n_cols, 1, |i, _| rhs[i]);
        self.factor.solve_in_place(x.as_mut());
        x.col_as_slice(0).to_vec()
    }
}

/// One-shot LS estimate; see [`LsSolver`] to reuse the factorization.
pub fn ls_estimate(y: &[C64], phi: &MeasurementOperator, rho: f64) -> Result<EstimateResult> {
    LsSolver::new(phi)?.solve(phi, y, rho)
}

/// Least squares for an explicit tall matrix through Householder QR.
pub fn ls_solve_dense(a: &CMat, y: &[C64]) -> Result<Vec<C64>> {
    let (m, n) = (a.nrows(), a.ncols());
    if y.len() != m {
        return Err(Error::param("right-hand side length does not match the matrix"));
    }
    if m < n {
        return Err(Error::Singular(format!("{m} x {n} system is underdetermined")));
    }
    let qr = a.qr();
    let r = qr.thin_R();
    let scale = (0..n).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    if let Some(i) = (0..n).find(|&i| !(r[(i, i)].norm() > 1e-12 * scale * n as f64)) {
        return Err(Error::Singular(format!("column {i} is numerically dependent on earlier columns")));
    }
    let x = qr.solve_lstsq(view(y, m, 1));
    Ok(x.col_as_slice(0).to_vec())
}
