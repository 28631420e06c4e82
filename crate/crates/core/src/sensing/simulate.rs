use rand::Rng;

use crate::beamforming::FrameConfig;
use crate::channel::WidebandChannel;
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ZERO};
use crate::quantizer::{quantize_complex_vector, AdcSpec};
use crate::rng::complex_normal;
use crate::sensing::MeasurementOperator;

/// Unscaled pieces of the analog receive vector of a set of frames:
/// `r = sqrt(rho) * signal + sigma * noise`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveComponents {
    /// `W_m^H sum_d H_d F_m s[n-d]`, stacked frame by frame.
    pub signal: Vec<C64>,
    /// `W_m^H n_m[n]` with unit-variance antenna noise.
    pub noise: Vec<C64>,
}

impl ReceiveComponents {
    pub fn combine(&self, rho: f64, noise_var: f64) -> Vec<C64> {
        let (a, b) = (rho.sqrt(), noise_var.sqrt());
        self.signal.iter().zip(&self.noise).map(|(s, n)| s * a + n * b).collect()
    }

    /// Keeps the first `n_frames` frames.
    pub fn truncated(&self, rows_per_frame: usize, n_frames: usize) -> Self {
        let len = (rows_per_frame * n_frames).min(self.signal.len());
        Self {
            signal: self.signal[..len].to_vec(),
            noise: self.noise[..len].to_vec(),
        }
    }
}

/// Time-domain simulation of the training phase. Noise for frame `m` is drawn
/// after frame `m - 1`, antenna by antenna and symbol by symbol, so a shorter
/// run sees a prefix of the same noise.
pub fn receive_components<R: Rng + ?Sized>(
    channel: &WidebandChannel,
    frames: &[FrameConfig],
    noise_rng: &mut R,
) -> Result<ReceiveComponents> {
    let (nr, nt, nc) = (channel.n_rx(), channel.n_tx(), channel.n_taps());
    let mut signal = Vec::new();
    let mut noise = Vec::new();
    for (m, fr) in frames.iter().enumerate() {
        if fr.rf_precoder.nrows() != nt || fr.rf_combiner.nrows() != nr {
            return Err(Error::param(format!("frame {m} does not fit a {nr}x{nt} channel")));
        }
        let f = fr.precoder();
        let w = &fr.rf_combiner;
        let lr = w.ncols();
        let n = fr.frame_len();
        // transmitted samples x[n] = F s[n]
        let x: CMat = crate::linalg::mul(f.as_ref(), fr.symbols.as_ref());
        let mut y = vec![ZERO; nr];
        let mut z = vec![ZERO; nr];
        for k in 0..n {
            y.iter_mut().for_each(|v| *v = ZERO);
            for d in 0..nc.min(k + 1) {
                let h = &channel.taps[d];
                let xs = x.col_as_slice(k - d);
                for t in 0..nt {
                    let col = h.col_as_slice(t);
                    for r in 0..nr {
                        y[r] += col[r] * xs[t];
                    }
                }
            }
            for v in z.iter_mut() {
                *v = complex_normal(noise_rng, 1.0);
            }
            for l in 0..lr {
                let wl = w.col_as_slice(l);
                signal.push(wl.iter().zip(&y).fold(ZERO, |acc, (a, b)| acc + a.conj() * b));
                noise.push(wl.iter().zip(&z).fold(ZERO, |acc, (a, b)| acc + a.conj() * b));
            }
        }
    }
    Ok(ReceiveComponents { signal, noise })
}

/// Everything an estimator sees: the measurement operator, the (possibly
/// quantized) observations and the operating point.
#[derive(Debug, Clone)]
pub struct SensingSystem {
    pub phi: MeasurementOperator,
    pub analog: Vec<C64>,
    pub observations: Vec<C64>,
    pub rho: f64,
    pub noise_var: f64,
}

pub fn simulate_observations<R: Rng + ?Sized>(
    channel: &WidebandChannel,
    frames: &[FrameConfig],
    rho: f64,
    noise_var: f64,
    adc: &AdcSpec,
    noise_rng: &mut R,
) -> Result<SensingSystem> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::param("rho must be finite and non-negative"));
    }
    if !(noise_var >= 0.0) || !noise_var.is_finite() {
        return Err(Error::param("noise variance must be finite and non-negative"));
    }
    let phi = MeasurementOperator::new(frames, channel.n_taps())?;
    let parts = receive_components(channel, frames, noise_rng)?;
    let analog = parts.combine(rho, noise_var);
    let observations = quantize_complex_vector(&analog, adc);
    Ok(SensingSystem {
        phi,
        analog,
        observations,
        rho,
        noise_var,
    })
}

/// Per-component power of a receive sample for a channel with
/// `E||H||_F^2 = gain * Nt Nr`, unit-norm combiner columns and unit transmit power.
pub fn expected_power_per_component(rho: f64, noise_var: f64, gain: f64) -> f64 {
    (rho * gain + noise_var) / 2.0
}
