//! Frequency-selective geometric channel with ULA steering vectors.
//!
//! Tap `d` of a realization is
//! `H_d = sqrt(Nt*Nr/Np) * sum_l alpha_l * p(d*Ts - tau_l) * a_r(theta_rl) * a_t(theta_tl)^H`.

use std::f64::consts::PI;

use faer::Mat;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{frobenius_sqr, CMat, C64, ZERO};
use crate::rng::complex_normal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub n_elements: usize,
    /// Element spacing in wavelengths (d / lambda).
    pub spacing: f64,
}

impl ArrayGeometry {
    pub fn new(n_elements: usize, spacing: f64) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::param("array needs at least one element"));
        }
        if !(spacing > 0.0) {
            return Err(Error::param(format!("antenna spacing must be positive, got {spacing}")));
        }
        Ok(Self { n_elements, spacing })
    }

    /// Half-wavelength ULA.
    pub fn half_wavelength(n_elements: usize) -> Result<Self> {
        Self::new(n_elements, 0.5)
    }

    /// Normalized spatial angle `(d/lambda) sin(theta)`.
    pub fn spatial_frequency(&self, theta_rad: f64) -> f64 {
        self.spacing * theta_rad.sin()
    }

    /// Physical angle in `[0, 2pi)` whose spatial frequency is `nu`.
    pub fn angle_for_spatial_frequency(&self, nu: f64) -> Result<f64> {
        let s = nu / self.spacing;
        if s.abs() > 1.0 + 1e-12 {
            return Err(Error::param(format!(
                "spatial frequency {nu} is not reachable with spacing {}",
                self.spacing
            )));
        }
        let theta = s.clamp(-1.0, 1.0).asin();
        Ok(if theta < 0.0 { theta + 2.0 * PI } else { theta })
    }
}

/// Unit-norm steering vector `(1/sqrt(N)) [1, e^{-j2 pi nu}, ..., e^{-j2 pi (N-1) nu}]`.
pub fn array_response(geometry: &ArrayGeometry, theta_rad: f64) -> Vec<C64> {
    steering_vector(geometry.n_elements, geometry.spatial_frequency(theta_rad))
}

/// Steering vector parameterized directly by spatial frequency.
pub fn steering_vector(n: usize, nu: f64) -> Vec<C64> {
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|i| C64::from_polar(scale, -2.0 * PI * i as f64 * nu))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseKind {
    RaisedCosine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    pub kind: PulseKind,
    pub rolloff: f64,
    pub sample_period: f64,
}

impl PulseShape {
    pub fn raised_cosine(rolloff: f64, sample_period: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rolloff) {
            return Err(Error::param(format!("rolloff must lie in [0, 1], got {rolloff}")));
        }
        if !(sample_period > 0.0) {
            return Err(Error::param("sample period must be positive"));
        }
        Ok(Self {
            kind: PulseKind::RaisedCosine,
            rolloff,
            sample_period,
        })
    }
}

impl Default for PulseShape {
    fn default() -> Self {
        Self {
            kind: PulseKind::RaisedCosine,
            rolloff: 0.35,
            sample_period: 1.0,
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Raised-cosine impulse response, normalized to `p(0) = 1`.
pub fn pulse_value(pulse: &PulseShape, t_s: f64) -> f64 {
    match pulse.kind {
        PulseKind::RaisedCosine => {
            let x = t_s / pulse.sample_period;
            let beta = pulse.rolloff;
            if beta == 0.0 {
                return sinc(x);
            }
            let den = 1.0 - (2.0 * beta * x).powi(2);
            if den.abs() < 1e-10 {
                // removable singularity at |t| = Ts / (2 beta)
                PI / 4.0 * sinc(1.0 / (2.0 * beta))
            } else {
                sinc(x) * (PI * beta * x).cos() / den
            }
        }
    }
}

/// Sum of squared pulse samples captured by the modeled taps for a path at delay `tau`.
pub fn captured_pulse_energy(pulse: &PulseShape, n_taps: usize, tau: f64) -> f64 {
    (0..n_taps)
        .map(|d| pulse_value(pulse, d as f64 * pulse.sample_period - tau).powi(2))
        .sum()
}

/// Path-gain variance that makes `E[sum_d ||H_d||_F^2] = Nt * Nr` when delays are
/// uniform on `[0, (n_taps - 1) Ts]`. The delay average is taken with composite
/// Simpson quadrature.
pub fn unit_energy_gain_variance(pulse: &PulseShape, n_taps: usize) -> f64 {
    let span = (n_taps.saturating_sub(1)) as f64 * pulse.sample_period;
    if span == 0.0 {
        return 1.0 / captured_pulse_energy(pulse, n_taps, 0.0);
    }
    let intervals = 2000 * n_taps;
    let h = span / intervals as f64;
    let mut acc = 0.0;
    for k in 0..=intervals {
        let w = if k == 0 || k == intervals {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * captured_pulse_energy(pulse, n_taps, k as f64 * h);
    }
    let mean = acc * h / 3.0 / span;
    1.0 / mean
}

/// Ground-truth path parameters of one channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub gains: Vec<C64>,
    pub delays_s: Vec<f64>,
    pub aoa_rad: Vec<f64>,
    pub aod_rad: Vec<f64>,
}

impl PathSet {
    pub fn new(gains: Vec<C64>, delays_s: Vec<f64>, aoa_rad: Vec<f64>, aod_rad: Vec<f64>) -> Result<Self> {
        let n = gains.len();
        if n == 0 {
            return Err(Error::param("a path set needs at least one path"));
        }
        if delays_s.len() != n || aoa_rad.len() != n || aod_rad.len() != n {
            return Err(Error::param("path sequences must have equal length"));
        }
        Ok(Self {
            gains,
            delays_s,
            aoa_rad,
            aod_rad,
        })
    }

    pub fn n_paths(&self) -> usize {
        self.gains.len()
    }

    /// Multiplies every gain by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for g in &mut out.gains {
            *g *= c;
        }
        out
    }
}

fn check_counts(n_paths: usize, n_taps: usize) -> Result<()> {
    if n_paths == 0 {
        return Err(Error::param("n_paths must be at least 1"));
    }
    if n_taps == 0 {
        return Err(Error::param("n_taps must be at least 1"));
    }
    Ok(())
}

/// Gains `CN(0, gain_variance)`, angles uniform on `[0, 2pi)`, delays uniform on
/// `[0, (n_taps - 1) Ts]`.
pub fn sample_path_set<R: Rng + ?Sized>(
    rng: &mut R,
    n_paths: usize,
    n_taps: usize,
    pulse: &PulseShape,
    gain_variance: f64,
) -> Result<PathSet> {
    check_counts(n_paths, n_taps)?;
    if !(gain_variance > 0.0) {
        return Err(Error::param(format!("gain variance must be positive, got {gain_variance}")));
    }
    let max_delay = (n_taps - 1) as f64 * pulse.sample_period;
    let mut gains = Vec::with_capacity(n_paths);
    let mut delays = Vec::with_capacity(n_paths);
    let mut aoa = Vec::with_capacity(n_paths);
    let mut aod = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        gains.push(complex_normal(rng, gain_variance));
        delays.push(rng.random::<f64>() * max_delay);
        aoa.push(rng.random::<f64>() * 2.0 * PI);
        aod.push(rng.random::<f64>() * 2.0 * PI);
    }
    PathSet::new(gains, delays, aoa, aod)
}

/// Paths whose spatial frequencies sit exactly on uniform `[-1/2, 1/2)` grids of
/// `grid_tx` / `grid_rx` points and whose delays are integer multiples of `Ts`.
/// Used for exact-recovery checks; each path then occupies one dictionary atom.
#[allow(clippy::too_many_arguments)]
pub fn sample_on_grid_path_set<R: Rng + ?Sized>(
    rng: &mut R,
    n_paths: usize,
    n_taps: usize,
    pulse: &PulseShape,
    gain_variance: f64,
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    grid_tx: usize,
    grid_rx: usize,
) -> Result<PathSet> {
    check_counts(n_paths, n_taps)?;
    let mut gains = Vec::with_capacity(n_paths);
    let mut delays = Vec::with_capacity(n_paths);
    let mut aoa = Vec::with_capacity(n_paths);
    let mut aod = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        gains.push(complex_normal(rng, gain_variance));
        delays.push(rng.random_range(0..n_taps) as f64 * pulse.sample_period);
        let gr = rng.random_range(0..grid_rx);
        let gt = rng.random_range(0..grid_tx);
        aoa.push(rx.angle_for_spatial_frequency(grid_frequency(gr, grid_rx))?);
        aod.push(tx.angle_for_spatial_frequency(grid_frequency(gt, grid_tx))?);
    }
    PathSet::new(gains, delays, aoa, aod)
}

/// Spatial frequency of bin `g` on a uniform grid of `size` points over `[-1/2, 1/2)`.
pub fn grid_frequency(g: usize, size: usize) -> f64 {
    -0.5 + g as f64 / size as f64
}

/// The `N_c` delay taps and their column-wise concatenation `[H_0 H_1 ... H_{Nc-1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WidebandChannel {
    pub taps: Vec<CMat>,
    pub concatenated: CMat,
}

impl WidebandChannel {
    pub fn from_taps(taps: Vec<CMat>) -> Result<Self> {
        let first = taps.first().ok_or_else(|| Error::param("channel needs at least one tap"))?;
        let (nr, nt) = (first.nrows(), first.ncols());
        if taps.iter().any(|t| t.nrows() != nr || t.ncols() != nt) {
            return Err(Error::param("all taps must share one shape"));
        }
        let concatenated = Mat::from_fn(nr, nt * taps.len(), |i, j| taps[j / nt][(i, j % nt)]);
        Ok(Self { taps, concatenated })
    }

    pub fn n_rx(&self) -> usize {
        self.concatenated.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.taps[0].ncols()
    }

    pub fn n_taps(&self) -> usize {
        self.taps.len()
    }

    /// `sum_d ||H_d||_F^2`
    pub fn energy(&self) -> f64 {
        frobenius_sqr(self.concatenated.as_ref())
    }
}

/// Leading factor `sqrt(Nt Nr / Np)` times `alpha_l p(d Ts - tau_l)` for every path.
fn scaled_gains(paths: &PathSet, tap: usize, n_tx: usize, n_rx: usize, pulse: &PulseShape) -> Vec<C64> {
    let lead = ((n_tx * n_rx) as f64 / paths.n_paths() as f64).sqrt();
    paths
        .gains
        .iter()
        .zip(&paths.delays_s)
        .map(|(g, tau)| g * (lead * pulse_value(pulse, tap as f64 * pulse.sample_period - tau)))
        .collect()
}

pub fn build_channel(
    paths: &PathSet,
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    n_taps: usize,
    pulse: &PulseShape,
) -> Result<WidebandChannel> {
    check_counts(paths.n_paths(), n_taps)?;
    let (nt, nr) = (tx.n_elements, rx.n_elements);
    let a_r: Vec<Vec<C64>> = paths.aoa_rad.iter().map(|&th| array_response(rx, th)).collect();
    let a_t: Vec<Vec<C64>> = paths.aod_rad.iter().map(|&th| array_response(tx, th)).collect();
    let mut taps = Vec::with_capacity(n_taps);
    for d in 0..n_taps {
        let lambda = scaled_gains(paths, d, nt, nr, pulse);
        let mut h = CMat::zeros(nr, nt);
        for (l, g) in lambda.iter().enumerate() {
            if *g == ZERO {
                continue;
            }
            for j in 0..nt {
                let c = g * a_t[l][j].conj();
                for i in 0..nr {
                    h[(i, j)] += a_r[l][i] * c;
                }
            }
        }
        taps.push(h);
    }
    WidebandChannel::from_taps(taps)
}

/// `H_d = A_r * Lambda_d * A_t^H`
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizedTap {
    pub a_r: CMat,
    /// Diagonal of `Lambda_d`.
    pub gains: Vec<C64>,
    pub a_t: CMat,
}

impl FactorizedTap {
    pub fn product(&self) -> CMat {
        let np = self.gains.len();
        let scaled = Mat::from_fn(self.a_r.nrows(), np, |i, l| self.a_r[(i, l)] * self.gains[l]);
        crate::linalg::mul(scaled.as_ref(), self.a_t.adjoint())
    }
}

pub fn factorized_tap(
    paths: &PathSet,
    tap_index: usize,
    n_taps: usize,
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    pulse: &PulseShape,
) -> Result<FactorizedTap> {
    if tap_index >= n_taps {
        return Err(Error::param(format!("tap index {tap_index} out of range for {n_taps} taps")));
    }
    let np = paths.n_paths();
    let cols = |geom: &ArrayGeometry, angles: &[f64]| {
        let vs: Vec<Vec<C64>> = angles.iter().map(|&th| array_response(geom, th)).collect();
        Mat::from_fn(geom.n_elements, np, |i, l| vs[l][i])
    };
    Ok(FactorizedTap {
        a_r: cols(rx, &paths.aoa_rad),
        gains: scaled_gains(paths, tap_index, tx.n_elements, rx.n_elements, pulse),
        a_t: cols(tx, &paths.aod_rad),
    })
}
