//! Monte Carlo NMSE experiments.

mod sweep;
mod trial;

pub use sweep::{mean_and_stderr, run_sweep, PointResult, PointStatus, SweepOptions, SweepResult};
pub use trial::{run_trial, trial_channel, trial_dictionary, AgcMode, Estimator, SystemParams, TrialResult, TrialSpec};

use faer::Mat;

use crate::channel::WidebandChannel;
use crate::error::{Error, Result};
use crate::linalg::{frobenius_sqr, CMat};
use crate::sensing::Dictionary;

/// `||H - H_hat||_F^2 / ||H||_F^2`
pub fn nmse(h_true: &CMat, h_hat: &CMat) -> Result<f64> {
    if h_true.nrows() != h_hat.nrows() || h_true.ncols() != h_hat.ncols() {
        return Err(Error::param(format!(
            "shape mismatch: {}x{} vs {}x{}",
            h_true.nrows(),
            h_true.ncols(),
            h_hat.nrows(),
            h_hat.ncols()
        )));
    }
    let den = frobenius_sqr(h_true.as_ref());
    if !(den > 0.0) {
        return Err(Error::UndefinedMetric);
    }
    let mut num = 0.0;
    for j in 0..h_true.ncols() {
        for i in 0..h_true.nrows() {
            num += (h_true[(i, j)] - h_hat[(i, j)]).norm_sqr();
        }
    }
    Ok(num / den)
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Per-tap `Gr x Gt` magnitude of the virtual channel `U_r^H H_d U_t`.
pub fn dump_virtual_channel(channel: &WidebandChannel, dictionary: &Dictionary) -> Result<Vec<Mat<f64>>> {
    if channel.n_rx() != dictionary.n_rx() || channel.n_tx() != dictionary.n_tx() {
        return Err(Error::param("channel and dictionary array sizes differ"));
    }
    Ok(dictionary.virtual_channel_magnitudes(&channel.taps))
}
