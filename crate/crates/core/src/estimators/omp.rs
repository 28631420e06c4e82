use crate::error::{Error, Result};
use crate::linalg::{dot_conj, norm_sqr, CMat, LinearOperator, C64, ZERO};
use crate::sensing::Dictionary;

use super::{reconstruct_channel, EstimateResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// Exactly `max_atoms` iterations.
    FixedAtoms,
    /// Until `||r||_2 <= residual_tol`, bounded only by the problem size.
    ResidualThreshold,
    /// Whichever of the two limits is reached first.
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmpConfig {
    pub max_atoms: usize,
    pub residual_tol: f64,
    pub stop_rule: StopRule,
}

impl OmpConfig {
    pub fn fixed(max_atoms: usize) -> Self {
        Self {
            max_atoms,
            residual_tol: 0.0,
            stop_rule: StopRule::FixedAtoms,
        }
    }

    /// `Np * Nc * k_leak` atoms.
    pub fn for_sparsity(n_paths: usize, n_taps: usize, k_leak: usize) -> Self {
        Self::fixed(n_paths * n_taps * k_leak)
    }

    fn atom_limit(&self, n_rows: usize, n_atoms: usize) -> usize {
        match self.stop_rule {
            StopRule::FixedAtoms | StopRule::Hybrid => self.max_atoms,
            StopRule::ResidualThreshold => n_rows.min(n_atoms),
        }
    }

    fn uses_tolerance(&self) -> bool {
        !matches!(self.stop_rule, StopRule::FixedAtoms)
    }
}

/// Relative size below which a new atom counts as lying in the span of the support.
const DEPENDENCE_TOL: f64 = 1e-10;

/// Orthogonal matching pursuit on `y ~ A h`.
///
/// Atoms are ranked by the raw correlation `|A^H r|`, ties resolved towards the
/// lowest index. The restricted least-squares fit is kept as a thin QR
/// factorization grown one column at a time with two Gram-Schmidt passes.
pub fn omp<A: LinearOperator + ?Sized>(
    y: &[C64],
    a: &A,
    cfg: &OmpConfig,
    dictionary: &Dictionary,
) -> Result<EstimateResult> {
    let (m, n) = (a.nrows(), a.ncols());
    if y.len() != m {
        return Err(Error::param(format!("y has length {} but the operator has {m} rows", y.len())));
    }
    if n != dictionary.n_atoms() {
        return Err(Error::param("operator columns do not match the dictionary size"));
    }
    if cfg.max_atoms == 0 || cfg.max_atoms > n {
        return Err(Error::param(format!("max_atoms must be in 1..={n}, got {}", cfg.max_atoms)));
    }
    if !(cfg.residual_tol >= 0.0) {
        return Err(Error::param("residual_tol must be non-negative"));
    }
    let limit = cfg.atom_limit(m, n);
    let mut residual = y.to_vec();
    let mut res_norm = norm_sqr(&residual).sqrt();
    let mut residual_norms = vec![res_norm];
    let mut support: Vec<usize> = Vec::new();
    let mut in_support = vec![false; n];
    let mut q: Vec<Vec<C64>> = Vec::new();
    // column k of R holds k + 1 entries
    let mut r_cols: Vec<Vec<C64>> = Vec::new();
    let mut z: Vec<C64> = Vec::new();

    while support.len() < limit {
        if res_norm == 0.0 || (cfg.uses_tolerance() && res_norm <= cfg.residual_tol) {
            break;
        }
        let corr = a.adjoint(&residual);
        let mut best = None;
        let mut best_mag = -1.0;
        for (j, c) in corr.iter().enumerate() {
            if in_support[j] {
                continue;
            }
            let mag = c.norm_sqr();
            if mag > best_mag {
                best_mag = mag;
                best = Some(j);
            }
        }
        let Some(j) = best else { break };
        let col = a.column(j);
        let col_norm = norm_sqr(&col).sqrt();
        if col_norm == 0.0 {
            return Err(Error::Degenerate(format!("atom {j} has a zero column")));
        }
        let mut v = col;
        let mut coeffs = vec![ZERO; q.len()];
        for _ in 0..2 {
            for (k, qk) in q.iter().enumerate() {
                let c = dot_conj(qk, &v);
                coeffs[k] += c;
                for (vi, qi) in v.iter_mut().zip(qk) {
                    *vi -= c * qi;
                }
            }
        }
        let v_norm = norm_sqr(&v).sqrt();
        if !v_norm.is_finite() || v_norm <= DEPENDENCE_TOL * col_norm {
            return Err(Error::Numerical {
                message: format!("atom {j} is linearly dependent on the current support"),
                support,
            });
        }
        v.iter_mut().for_each(|x| *x /= v_norm);
        let zk = dot_conj(&v, &residual);
        for (ri, qi) in residual.iter_mut().zip(&v) {
            *ri -= zk * qi;
        }
        coeffs.push(C64::new(v_norm, 0.0));
        r_cols.push(coeffs);
        q.push(v);
        z.push(zk);
        support.push(j);
        in_support[j] = true;
        res_norm = norm_sqr(&residual).sqrt();
        residual_norms.push(res_norm);
    }

    let coefficients = back_substitute(&r_cols, &z);
    if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Numerical {
            message: "restricted least-squares solution is not finite".into(),
            support,
        });
    }
    let channel_hat: CMat = reconstruct_channel(&support, &coefficients, dictionary)?;
    Ok(EstimateResult {
        h_hat: coefficients,
        iterations: support.len(),
        support,
        channel_hat,
        residual_norms,
    })
}

/// Solves `R x = z` for upper-triangular `R` stored by columns.
fn back_substitute(r_cols: &[Vec<C64>], z: &[C64]) -> Vec<C64> {
    let k = z.len();
    let mut x = z.to_vec();
    for i in (0..k).rev() {
        x[i] /= r_cols[i][i];
        let xi = x[i];
        for (row, xr) in x.iter_mut().enumerate().take(i) {
            *xr -= r_cols[i][row] * xi;
        }
    }
    x
}
