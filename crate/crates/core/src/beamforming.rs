//! Training-frame construction: phase-shifter RF precoders and combiners, the
//! baseband power scaler, QPSK pilots and their delay-stacked layout.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use faer::Mat;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{frobenius_sqr, mul, CMat, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseShifterSpec {
    pub resolution_bits: u32,
}

impl PhaseShifterSpec {
    pub fn new(resolution_bits: u32) -> Result<Self> {
        if !(1..=16).contains(&resolution_bits) {
            return Err(Error::param(format!(
                "phase shifter resolution must be 1..=16 bits, got {resolution_bits}"
            )));
        }
        Ok(Self { resolution_bits })
    }

    pub fn levels(&self) -> u32 {
        1 << self.resolution_bits
    }
}

/// Nearest point of the `2^bits` phase grid, returned in `[0, 2pi)`.
pub fn quantize_phase(angle_rad: f64, bits: u32) -> f64 {
    let levels = (1u64 << bits) as f64;
    let step = 2.0 * PI / levels;
    let k = (angle_rad.rem_euclid(2.0 * PI) / step).round() % levels;
    k * step
}

/// Entries `(1/sqrt(n_antennas)) e^{j 2 pi k / 2^bits}` with `k` uniform.
pub fn random_rf_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    n_antennas: usize,
    n_chains: usize,
    bits: u32,
) -> Result<CMat> {
    if n_chains == 0 || n_chains > n_antennas {
        return Err(Error::param(format!(
            "need 1 <= chains <= antennas, got {n_chains} chains for {n_antennas} antennas"
        )));
    }
    let ps = PhaseShifterSpec::new(bits)?;
    let levels = ps.levels();
    let amp = 1.0 / (n_antennas as f64).sqrt();
    let mut m = CMat::zeros(n_antennas, n_chains);
    for j in 0..n_chains {
        for i in 0..n_antennas {
            let k = rng.random_range(0..levels);
            m[(i, j)] = C64::from_polar(amp, 2.0 * PI * k as f64 / levels as f64);
        }
    }
    Ok(m)
}

/// `F_BB = c * [I_Ns; 0]` with `c` chosen so that `||F_RF F_BB||_F^2 = Ns`.
pub fn baseband_scaler(rf_precoder: &CMat, n_streams: usize) -> Result<CMat> {
    let lt = rf_precoder.ncols();
    if n_streams == 0 || n_streams > lt {
        return Err(Error::param(format!("need 1 <= streams <= {lt} RF chains, got {n_streams}")));
    }
    let selected_energy: f64 = (0..n_streams)
        .map(|j| (0..rf_precoder.nrows()).map(|i| rf_precoder[(i, j)].norm_sqr()).sum::<f64>())
        .sum();
    if selected_energy <= 0.0 {
        return Err(Error::Degenerate("selected RF precoder columns have zero norm".into()));
    }
    let c = (n_streams as f64 / selected_energy).sqrt();
    Ok(Mat::from_fn(lt, n_streams, |i, j| {
        if i == j {
            C64::new(c, 0.0)
        } else {
            ZERO
        }
    }))
}

/// QPSK pilots with per-entry power `1/Ns`.
pub fn generate_symbols<R: Rng + ?Sized>(rng: &mut R, n_streams: usize, frame_len: usize) -> Result<CMat> {
    if n_streams == 0 || frame_len == 0 {
        return Err(Error::param("symbol block needs at least one stream and one symbol"));
    }
    let amp = FRAC_1_SQRT_2 / (n_streams as f64).sqrt();
    let mut s = CMat::zeros(n_streams, frame_len);
    for n in 0..frame_len {
        for i in 0..n_streams {
            let re = if rng.random::<bool>() { amp } else { -amp };
            let im = if rng.random::<bool>() { amp } else { -amp };
            s[(i, n)] = C64::new(re, im);
        }
    }
    Ok(s)
}

/// Column `n` stacks `s[n], s[n-1], ..., s[n-Nc+1]`; negative times are zero.
pub fn build_toeplitz_symbols(symbols: &CMat, n_taps: usize) -> Result<CMat> {
    if n_taps == 0 {
        return Err(Error::param("n_taps must be at least 1"));
    }
    let ns = symbols.nrows();
    Ok(Mat::from_fn(n_taps * ns, symbols.ncols(), |row, n| {
        let (d, i) = (row / ns, row % ns);
        if n >= d {
            symbols[(i, n - d)]
        } else {
            ZERO
        }
    }))
}

/// Dimensions needed to draw a training frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameDims {
    pub n_tx: usize,
    pub n_rx: usize,
    pub chains_tx: usize,
    pub chains_rx: usize,
    pub n_streams: usize,
    pub frame_len: usize,
    pub ps_bits: u32,
}

/// One training frame: `F_RF`, `F_BB`, `W_RF` and the `Ns x N` pilot block.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameConfig {
    pub rf_precoder: CMat,
    pub bb_precoder: CMat,
    pub rf_combiner: CMat,
    pub symbols: CMat,
}

impl FrameConfig {
    pub fn new(rf_precoder: CMat, bb_precoder: CMat, rf_combiner: CMat, symbols: CMat) -> Result<Self> {
        if rf_precoder.ncols() != bb_precoder.nrows() {
            return Err(Error::param("F_RF columns must match F_BB rows"));
        }
        if bb_precoder.ncols() != symbols.nrows() {
            return Err(Error::param("F_BB columns must match the number of streams"));
        }
        Ok(Self {
            rf_precoder,
            bb_precoder,
            rf_combiner,
            symbols,
        })
    }

    /// Draws a frame with independent RF matrices and pilots.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dims: &FrameDims) -> Result<Self> {
        if dims.n_streams > dims.chains_tx.min(dims.chains_rx) {
            return Err(Error::param(format!(
                "streams ({}) must not exceed min(L_t, L_r) = {}",
                dims.n_streams,
                dims.chains_tx.min(dims.chains_rx)
            )));
        }
        let f_rf = random_rf_matrix(rng, dims.n_tx, dims.chains_tx, dims.ps_bits)?;
        let w_rf = random_rf_matrix(rng, dims.n_rx, dims.chains_rx, dims.ps_bits)?;
        let f_bb = baseband_scaler(&f_rf, dims.n_streams)?;
        let s = generate_symbols(rng, dims.n_streams, dims.frame_len)?;
        Self::new(f_rf, f_bb, w_rf, s)
    }

    /// `F = F_RF F_BB`
    pub fn precoder(&self) -> CMat {
        mul(self.rf_precoder.as_ref(), self.bb_precoder.as_ref())
    }

    pub fn n_streams(&self) -> usize {
        self.symbols.nrows()
    }

    pub fn frame_len(&self) -> usize {
        self.symbols.ncols()
    }

    pub fn transmit_power(&self) -> f64 {
        frobenius_sqr(self.precoder().as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    #[test]
    fn quantize_phase_cases() {
        assert_eq!(quantize_phase(0.0, 3), 0.0);
        assert!((quantize_phase(PI / 3.0, 2) - PI / 2.0).abs() < 1e-15);
        // wraps to zero rather than returning 2pi
        assert_eq!(quantize_phase(2.0 * PI - 1e-6, 4), 0.0);
        assert!((quantize_phase(-PI / 2.0, 2) - 1.5 * PI).abs() < 1e-15);
        let step = quantize_phase(2.0 * PI / 64.0 * 1.2, 6);
        assert!((step - 2.0 * PI / 64.0).abs() < 1e-15);
    }

    #[test]
    fn rf_matrix_magnitudes_and_grid() {
        let mut rng = stream(1, Stream::Frame(0));
        let m = random_rf_matrix(&mut rng, 32, 4, 6).unwrap();
        for j in 0..4 {
            for i in 0..32 {
                let z = m[(i, j)];
                assert!((z.norm() - 1.0 / 32f64.sqrt()).abs() < 1e-15);
                let k = z.arg().rem_euclid(2.0 * PI) * 64.0 / (2.0 * PI);
                assert!((k - k.round()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn one_bit_phase_shifters_are_real_signs() {
        let mut rng = stream(2, Stream::Frame(0));
        let m = random_rf_matrix(&mut rng, 16, 2, 1).unwrap();
        let a = 0.25;
        for j in 0..2 {
            for i in 0..16 {
                let z = m[(i, j)];
                assert!(z.im.abs() < 1e-15);
                assert!((z.re.abs() - a).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rf_matrix_rejects_too_many_chains() {
        let mut rng = stream(2, Stream::Frame(0));
        assert!(random_rf_matrix(&mut rng, 4, 5, 3).is_err());
        assert!(random_rf_matrix(&mut rng, 4, 2, 0).is_err());
    }

    #[test]
    fn phase_histogram_is_uniform() {
        // chi-square over 8 phase bins, 1e5 entries; 99.9% quantile for 7 dof is 24.3
        let mut rng = stream(9, Stream::Frame(0));
        let m = random_rf_matrix(&mut rng, 1000, 100, 3).unwrap();
        let mut counts = [0usize; 8];
        for j in 0..100 {
            for i in 0..1000 {
                let k = (m[(i, j)].arg().rem_euclid(2.0 * PI) * 8.0 / (2.0 * PI)).round() as usize % 8;
                counts[k] += 1;
            }
        }
        let expected = 100_000.0 / 8.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 24.3, "chi2 = {chi2}, counts {counts:?}");
    }

    #[test]
    fn scaler_identity_when_columns_unit_norm() {
        let f_rf = Mat::from_fn(4, 2, |i, j| C64::from_polar(0.5, (i * j) as f64));
        let f_bb = baseband_scaler(&f_rf, 2).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((f_bb[(i, j)] - C64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn scaler_meets_power_constraint_by_scalar_loops() {
        let mut rng = stream(4, Stream::Frame(0));
        let f_rf = random_rf_matrix(&mut rng, 32, 4, 6).unwrap();
        for ns in 1..=4 {
            let f_bb = baseband_scaler(&f_rf, ns).unwrap();
            let mut p = 0.0;
            for i in 0..32 {
                for j in 0..ns {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..4 {
                        acc += f_rf[(i, k)] * f_bb[(k, j)];
                    }
                    p += acc.norm_sqr();
                }
            }
            assert!((p - ns as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn scaler_degenerate_input() {
        let f_rf = CMat::zeros(4, 2);
        assert!(matches!(baseband_scaler(&f_rf, 1), Err(Error::Degenerate(_))));
        assert!(baseband_scaler(&f_rf, 3).is_err());
    }

    #[test]
    fn symbols_constant_modulus_and_shape() {
        let mut rng = stream(5, Stream::Frame(0));
        let s = generate_symbols(&mut rng, 4, 16).unwrap();
        assert_eq!((s.nrows(), s.ncols()), (4, 16));
        for n in 0..16 {
            for i in 0..4 {
                assert!((s[(i, n)].norm() - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn symbol_covariance_converges() {
        let mut rng = stream(6, Stream::Frame(0));
        let n = 100_000;
        let s = generate_symbols(&mut rng, 4, n).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    acc += s[(a, k)] * s[(b, k)].conj();
                }
                acc /= n as f64;
                let want = if a == b { 0.25 } else { 0.0 };
                assert!((acc - C64::new(want, 0.0)).norm() < 0.02 * 0.25, "{a}{b} {acc}");
            }
        }
    }

    #[test]
    fn toeplitz_layout() {
        let s = Mat::from_fn(2, 3, |i, n| C64::new((10 * n + i) as f64, 0.0));
        let t = build_toeplitz_symbols(&s, 2).unwrap();
        assert_eq!((t.nrows(), t.ncols()), (4, 3));
        // column 0 = [s[0]; 0]
        assert_eq!(t[(0, 0)], s[(0, 0)]);
        assert_eq!(t[(3, 0)], ZERO);
        // column 2 = [s[2]; s[1]]
        assert_eq!(t[(0, 2)], s[(0, 2)]);
        assert_eq!(t[(1, 2)], s[(1, 2)]);
        assert_eq!(t[(2, 2)], s[(0, 1)]);
        assert_eq!(t[(3, 2)], s[(1, 1)]);
        assert_eq!(build_toeplitz_symbols(&s, 1).unwrap(), s);
    }

    #[test]
    fn random_frame_power() {
        let dims = FrameDims {
            n_tx: 32,
            n_rx: 16,
            chains_tx: 4,
            chains_rx: 4,
            n_streams: 4,
            frame_len: 16,
            ps_bits: 6,
        };
        let mut rng = stream(8, Stream::Frame(0));
        for _ in 0..20 {
            let f = FrameConfig::random(&mut rng, &dims).unwrap();
            assert!((f.transmit_power() - 4.0).abs() < 1e-9);
        }
        let bad = FrameDims { n_streams: 5, ..dims };
        assert!(FrameConfig::random(&mut rng, &bad).is_err());
    }
}
