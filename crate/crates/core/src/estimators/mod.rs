//! Channel recovery from the stacked training observations.

mod ls;
mod omp;

pub use ls::{ls_estimate, ls_solve_dense, LsSolver};
pub use omp::{omp, OmpConfig, StopRule};

use crate::error::{Error, Result};
use crate::linalg::{devectorize, CMat, C64};
use crate::sensing::Dictionary;

/// Output of an estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    /// Sparse coefficients on `support` (OMP) or the dense `vec(H)` estimate (LS).
    pub h_hat: Vec<C64>,
    /// Selected atoms in selection order; empty for LS.
    pub support: Vec<usize>,
    /// `Nr x (Nc Nt)` channel estimate.
    pub channel_hat: CMat,
    pub iterations: usize,
    /// `||y - A x||_2` after each iteration, starting with `||y||_2`.
    pub residual_norms: Vec<f64>,
}

/// `Psi h` for a sparse `h`, devectorized into the concatenated channel.
pub fn reconstruct_channel(support: &[usize], coefficients: &[C64], dictionary: &Dictionary) -> Result<CMat> {
    if support.len() != coefficients.len() {
        return Err(Error::param("support and coefficient lengths differ"));
    }
    if let Some(&j) = support.iter().find(|&&j| j >= dictionary.n_atoms()) {
        return Err(Error::param(format!("atom index {j} out of range")));
    }
    let v = dictionary.synthesize_sparse(support, coefficients);
    Ok(devectorize(&v, dictionary.n_rx(), dictionary.n_taps * dictionary.n_tx()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ArrayGeometry;
    use crate::linalg::{vectorize, ONE, ZERO};
    use crate::sensing::build_dictionary;

    fn dict() -> Dictionary {
        let tx = ArrayGeometry::half_wavelength(3).unwrap();
        let rx = ArrayGeometry::half_wavelength(2).unwrap();
        build_dictionary(&tx, &rx, 5, 4, 2).unwrap()
    }

    #[test]
    fn empty_support_gives_zero_channel() {
        let d = dict();
        let h = reconstruct_channel(&[], &[], &d).unwrap();
        assert_eq!((h.nrows(), h.ncols()), (2, 6));
        assert!(vectorize(h.as_ref()).iter().all(|z| *z == ZERO));
    }

    #[test]
    fn one_hot_matches_explicit_dictionary_column() {
        let d = dict();
        let psi = d.full();
        for j in [0, 7, d.atom_index(1, 3, 2), d.n_atoms() - 1] {
            let h = reconstruct_channel(&[j], &[ONE], &d).unwrap();
            let v = vectorize(h.as_ref());
            for (i, z) in v.iter().enumerate() {
                assert!((z - psi[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let d = dict();
        assert!(reconstruct_channel(&[0, 1], &[ONE], &d).is_err());
        assert!(reconstruct_channel(&[d.n_atoms()], &[ONE], &d).is_err());
    }
}
