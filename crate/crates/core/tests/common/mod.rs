#![allow(dead_code)]

use mmw_chanest::beamforming::{FrameConfig, FrameDims};
use mmw_chanest::channel::{
    build_channel, sample_on_grid_path_set, sample_path_set, ArrayGeometry, PathSet, PulseShape, WidebandChannel,
};
use mmw_chanest::linalg::C64;
use mmw_chanest::rng::{stream, Stream};

#[derive(Debug, Clone, Copy)]
pub struct Small {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_taps: usize,
    pub n_paths: usize,
    pub chains: usize,
    pub n_streams: usize,
    pub frame_len: usize,
    pub n_frames: usize,
    pub seed: u64,
}

impl Small {
    pub fn tx(&self) -> ArrayGeometry {
        ArrayGeometry::half_wavelength(self.n_tx).unwrap()
    }

    pub fn rx(&self) -> ArrayGeometry {
        ArrayGeometry::half_wavelength(self.n_rx).unwrap()
    }

    pub fn paths(&self, pulse: &PulseShape) -> PathSet {
        sample_path_set(&mut stream(self.seed, Stream::Channel), self.n_paths, self.n_taps, pulse, 1.0).unwrap()
    }

    pub fn on_grid_paths(&self, pulse: &PulseShape, grid_tx: usize, grid_rx: usize) -> PathSet {
        sample_on_grid_path_set(
            &mut stream(self.seed, Stream::Channel),
            self.n_paths,
            self.n_taps,
            pulse,
            1.0,
            &self.tx(),
            &self.rx(),
            grid_tx,
            grid_rx,
        )
        .unwrap()
    }

    pub fn channel(&self, paths: &PathSet, pulse: &PulseShape) -> WidebandChannel {
        build_channel(paths, &self.tx(), &self.rx(), self.n_taps, pulse).unwrap()
    }

    pub fn frames(&self) -> Vec<FrameConfig> {
        let dims = FrameDims {
            n_tx: self.n_tx,
            n_rx: self.n_rx,
            chains_tx: self.chains,
            chains_rx: self.chains,
            n_streams: self.n_streams,
            frame_len: self.frame_len,
            ps_bits: 6,
        };
        (0..self.n_frames)
            .map(|m| FrameConfig::random(&mut stream(self.seed, Stream::Frame(m)), &dims).unwrap())
            .collect()
    }
}

pub fn rel_err(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// `y[n] = sum_d W^H H_d F s[n - d]` by scalar loops, stacked as `n * L_r + l`.
pub fn convolve_frame(channel: &WidebandChannel, frame: &FrameConfig) -> Vec<C64> {
    let f = frame.precoder();
    let w = &frame.rf_combiner;
    let s = &frame.symbols;
    let (nr, nt, ns, n) = (channel.n_rx(), channel.n_tx(), s.nrows(), s.ncols());
    let mut out = Vec::new();
    for k in 0..n {
        let mut y = vec![C64::new(0.0, 0.0); nr];
        for (d, h) in channel.taps.iter().enumerate() {
            if d > k {
                continue;
            }
            for t in 0..nt {
                let mut x = C64::new(0.0, 0.0);
                for i in 0..ns {
                    x += f[(t, i)] * s[(i, k - d)];
                }
                for r in 0..nr {
                    y[r] += h[(r, t)] * x;
                }
            }
        }
        for l in 0..w.ncols() {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..nr {
                acc += w[(r, l)].conj() * y[r];
            }
            out.push(acc);
        }
    }
    out
}

/// Sparse coefficients of an on-grid path set with whole-sample delays: each
/// path adds `sqrt(Nt Nr / Np) alpha_l` at the atom whose steering vectors match its angles.
pub fn on_grid_coefficients(s: &Small, paths: &PathSet, dict: &mmw_chanest::sensing::Dictionary) -> Vec<C64> {
    let lead = ((s.n_tx * s.n_rx) as f64 / s.n_paths as f64).sqrt();
    let find = |grid: &mmw_chanest::linalg::CMat, theta: f64| {
        let n = grid.nrows();
        let v: Vec<C64> = (0..n)
            .map(|i| C64::from_polar(1.0 / (n as f64).sqrt(), -std::f64::consts::PI * i as f64 * theta.sin()))
            .collect();
        // single-element arrays have identical atoms; any match will do
        (0..grid.ncols())
            .find(|&g| (0..n).all(|i| (grid[(i, g)] - v[i]).norm() < 1e-9))
            .unwrap_or_else(|| panic!("angle {theta} is not on the grid"))
    };
    let mut h = vec![C64::new(0.0, 0.0); dict.n_atoms()];
    for l in 0..paths.n_paths() {
        let bt = find(&dict.tx_grid, paths.aod_rad[l]);
        let br = find(&dict.rx_grid, paths.aoa_rad[l]);
        let d = paths.delays_s[l].round() as usize;
        h[dict.atom_index(d, bt, br)] += paths.gains[l] * lead;
    }
    h
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `||a - b|| / (||b|| + input_scale)`; stays meaningful when the exact output is zero.
pub fn mixed_err(a: &[C64], b: &[C64], input_scale: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    let num = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    num / (norm(b) + input_scale)
}
