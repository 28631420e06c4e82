use faer::Mat;

use crate::beamforming::{build_toeplitz_symbols, FrameConfig};
use crate::error::{Error, Result};
use crate::linalg::{conj, kron, mul, view, CMat, LinearOperator, C64, ZERO};

/// `(S_m^T F~_m^T) (x) W_m^H` for one frame, with `F~_m = I_Nc (x) F_m`.
/// Shape `(N L_r) x (Nc Nt Nr)`.
pub fn frame_block(frame: &FrameConfig, n_taps: usize) -> Result<CMat> {
    let f = frame.precoder();
    if frame.rf_combiner.ncols() == 0 || f.ncols() != frame.symbols.nrows() {
        return Err(Error::param("frame dimensions are inconsistent"));
    }
    let f_tilde = kron(crate::linalg::identity(n_taps).as_ref(), f.as_ref());
    let s_tilde = build_toeplitz_symbols(&frame.symbols, n_taps)?;
    let z = mul(f_tilde.as_ref(), s_tilde.as_ref());
    Ok(kron(z.transpose(), conj(frame.rf_combiner.transpose()).as_ref()))
}

/// Matrix-free stacked measurement matrix `Phi` over `M` frames.
///
/// Row block `m` is [`frame_block`] of frame `m`; `Phi vec(H)` is evaluated as
/// `vec(W_m^H sum_d H_d F_m S_{m,d})` where `S_{m,d}` is the pilot block delayed by
/// `d` symbols.
#[derive(Debug, Clone)]
pub struct MeasurementOperator {
    n_tx: usize,
    n_rx: usize,
    n_taps: usize,
    n_streams: usize,
    chains_rx: usize,
    frame_len: usize,
    /// `[F_0 F_1 ... F_{M-1}]`, `Nt x (Ns M)`.
    precoders: CMat,
    combiners: Vec<CMat>,
    symbols: Vec<CMat>,
}

impl MeasurementOperator {
    pub fn new(frames: &[FrameConfig], n_taps: usize) -> Result<Self> {
        let first = frames.first().ok_or_else(|| Error::param("need at least one frame"))?;
        if n_taps == 0 {
            return Err(Error::param("n_taps must be at least 1"));
        }
        let n_tx = first.rf_precoder.nrows();
        let n_rx = first.rf_combiner.nrows();
        let n_streams = first.n_streams();
        let chains_rx = first.rf_combiner.ncols();
        let frame_len = first.frame_len();
        let mut precoders = CMat::zeros(n_tx, n_streams * frames.len());
        let mut combiners = Vec::with_capacity(frames.len());
        let mut symbols = Vec::with_capacity(frames.len());
        for (m, fr) in frames.iter().enumerate() {
            if fr.rf_precoder.nrows() != n_tx
                || fr.rf_combiner.nrows() != n_rx
                || fr.rf_combiner.ncols() != chains_rx
                || fr.n_streams() != n_streams
                || fr.frame_len() != frame_len
            {
                return Err(Error::param(format!("frame {m} does not match the shape of frame 0")));
            }
            let f = fr.precoder();
            for i in 0..n_streams {
                for t in 0..n_tx {
                    precoders[(t, m * n_streams + i)] = f[(t, i)];
                }
            }
            combiners.push(fr.rf_combiner.clone());
            symbols.push(fr.symbols.clone());
        }
        Ok(Self {
            n_tx,
            n_rx,
            n_taps,
            n_streams,
            chains_rx,
            frame_len,
            precoders,
            combiners,
            symbols,
        })
    }

    pub fn n_frames(&self) -> usize {
        self.combiners.len()
    }

    pub fn n_taps(&self) -> usize {
        self.n_taps
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn chains_rx(&self) -> usize {
        self.chains_rx
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    fn rows_per_frame(&self) -> usize {
        self.frame_len * self.chains_rx
    }

    /// `Phi` applied to a single-atom channel: `u_r u_t^H` in tap `tap`, all other
    /// taps zero. Costs `O(M N (Lr + Ns))` instead of a full product.
    pub fn apply_rank_one(&self, tap: usize, u_r: &[C64], u_t: &[C64]) -> Vec<C64> {
        let (ns, lr, n) = (self.n_streams, self.chains_rx, self.frame_len);
        let mut out = vec![ZERO; self.nrows()];
        let mut w = vec![ZERO; lr];
        let mut v = vec![ZERO; ns];
        for m in 0..self.n_frames() {
            let wm = &self.combiners[m];
            for (l, wl) in w.iter_mut().enumerate() {
                *wl = (0..self.n_rx).fold(ZERO, |acc, r| acc + wm[(r, l)].conj() * u_r[r]);
            }
            for (i, vi) in v.iter_mut().enumerate() {
                *vi = (0..self.n_tx).fold(ZERO, |acc, t| acc + u_t[t].conj() * self.precoders[(t, m * ns + i)]);
            }
            let s = &self.symbols[m];
            let base = m * self.rows_per_frame();
            for k in tap..n {
                let z = (0..ns).fold(ZERO, |acc, i| acc + v[i] * s[(i, k - tap)]);
                for l in 0..lr {
                    out[base + l + lr * k] = w[l] * z;
                }
            }
        }
        out
    }

    /// Explicit `Phi`. Only for small configurations.
    pub fn to_dense(&self, frames: &[FrameConfig]) -> Result<CMat> {
        let rows = self.rows_per_frame();
        let mut out = CMat::zeros(self.nrows(), self.ncols());
        for (m, fr) in frames.iter().enumerate().take(self.n_frames()) {
            let block = frame_block(fr, self.n_taps)?;
            for j in 0..block.ncols() {
                for i in 0..rows {
                    out[(m * rows + i, j)] = block[(i, j)];
                }
            }
        }
        Ok(out)
    }

    /// `Phi^H Phi = sum_m (K_m^H K_m) (x) (W_m W_m^H)` with `K_m = S_m^T F~_m^T`,
    /// assembled through one `(Nc Nt)^2 x M` by `M x Nr^2` product.
    pub fn gram(&self) -> CMat {
        let na = self.n_taps * self.n_tx;
        let nb = self.n_rx;
        let m_frames = self.n_frames();
        let mut left = CMat::zeros(na * na, m_frames);
        let mut right = CMat::zeros(m_frames, nb * nb);
        for m in 0..m_frames {
            let z = self.stacked_transmit(m);
            // K^H K = conj(Z Z^H)
            let zz = mul(z.as_ref(), z.adjoint());
            for j in 0..na {
                for i in 0..na {
                    left[(i + na * j, m)] = zz[(i, j)].conj();
                }
            }
            let ww = mul(self.combiners[m].as_ref(), self.combiners[m].adjoint());
            for b in 0..nb {
                for a in 0..nb {
                    right[(m, a + nb * b)] = ww[(a, b)];
                }
            }
        }
        let prod = mul(left.as_ref(), right.as_ref());
        let n = na * nb;
        Mat::from_fn(n, n, |row, col| {
            let (i, a) = (row / nb, row % nb);
            let (j, b) = (col / nb, col % nb);
            prod[(i + na * j, a + nb * b)]
        })
    }

    /// `F~_m S~_m`: transmitted signal of frame `m` seen by every tap, `(Nc Nt) x N`.
    fn stacked_transmit(&self, m: usize) -> CMat {
        let ns = self.n_streams;
        let s = &self.symbols[m];
        let mut out = CMat::zeros(self.n_taps * self.n_tx, self.frame_len);
        for d in 0..self.n_taps {
            for n in d..self.frame_len {
                for t in 0..self.n_tx {
                    let mut acc = ZERO;
                    for i in 0..ns {
                        acc += self.precoders[(t, m * ns + i)] * s[(i, n - d)];
                    }
                    out[(d * self.n_tx + t, n)] = acc;
                }
            }
        }
        out
    }
}

impl LinearOperator for MeasurementOperator {
    fn nrows(&self) -> usize {
        self.n_frames() * self.rows_per_frame()
    }

    fn ncols(&self) -> usize {
        self.n_taps * self.n_tx * self.n_rx
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols(), "Phi x: length mismatch");
        let (ns, lr, n, nr, nt) = (self.n_streams, self.chains_rx, self.frame_len, self.n_rx, self.n_tx);
        let mut out = vec![ZERO; self.nrows()];
        let mut c = vec![ZERO; lr * ns];
        for d in 0..self.n_taps {
            let hd = view(&x[d * nt * nr..(d + 1) * nt * nr], nr, nt);
            // H_d [F_0 ... F_{M-1}]
            let y = mul(hd, self.precoders.as_ref());
            for m in 0..self.n_frames() {
                let wm = &self.combiners[m];
                for i in 0..ns {
                    let col = y.col_as_slice(m * ns + i);
                    for l in 0..lr {
                        c[l + lr * i] = (0..nr).fold(ZERO, |acc, r| acc + wm[(r, l)].conj() * col[r]);
                    }
                }
                let s = &self.symbols[m];
                let base = m * self.rows_per_frame();
                for k in d..n {
                    for i in 0..ns {
                        let sv = s[(i, k - d)];
                        for l in 0..lr {
                            out[base + l + lr * k] += c[l + lr * i] * sv;
                        }
                    }
                }
            }
        }
        out
    }

    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        assert_eq!(y.len(), self.nrows(), "Phi^H y: length mismatch");
        let (ns, lr, n, nr, nt) = (self.n_streams, self.chains_rx, self.frame_len, self.n_rx, self.n_tx);
        let mut out = Vec::with_capacity(self.ncols());
        let mut p = CMat::zeros(nr, ns * self.n_frames());
        let mut t = vec![ZERO; lr * ns];
        for d in 0..self.n_taps {
            for m in 0..self.n_frames() {
                let r = &y[m * self.rows_per_frame()..(m + 1) * self.rows_per_frame()];
                let s = &self.symbols[m];
                // T = R_m S_{m,d}^H
                t.iter_mut().for_each(|z| *z = ZERO);
                for k in d..n {
                    for i in 0..ns {
                        let sc = s[(i, k - d)].conj();
                        for l in 0..lr {
                            t[l + lr * i] += r[l + lr * k] * sc;
                        }
                    }
                }
                let wm = &self.combiners[m];
                for i in 0..ns {
                    let col = p.col_as_slice_mut(m * ns + i);
                    for (rr, out_r) in col.iter_mut().enumerate() {
                        *out_r = (0..lr).fold(ZERO, |acc, l| acc + wm[(rr, l)] * t[l + lr * i]);
                    }
                }
            }
            // sum_m W_m T_m F_m^H
            let g = mul(p.as_ref(), self.precoders.adjoint());
            for j in 0..nt {
                out.extend_from_slice(g.col_as_slice(j));
            }
        }
        out
    }
}
