use faer::Mat;

use crate::channel::{grid_frequency, steering_vector, ArrayGeometry};
use crate::error::{Error, Result};
use crate::linalg::{conj, devectorize, kron, mul, vectorize, view, CMat, C64};

/// Virtual-channel dictionary `Psi = I_Nc (x) conj(U_t) (x) U_r`.
///
/// `U_t` (`Nt x Gt`) and `U_r` (`Nr x Gr`) hold unit-norm steering vectors on
/// uniform spatial-frequency grids over `[-1/2, 1/2)`. Coefficient `j` of the
/// sparse vector `h` addresses tap `d`, transmit bin `gt` and receive bin `gr`
/// through `j = gr + Gr * (gt + Gt * d)`; its atom is `vec(u_r u_t^H)` placed in
/// tap block `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    pub tx_grid: CMat,
    pub rx_grid: CMat,
    pub tx_freqs: Vec<f64>,
    pub rx_freqs: Vec<f64>,
    pub n_taps: usize,
}

pub fn build_dictionary(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    g_t: usize,
    g_r: usize,
    n_taps: usize,
) -> Result<Dictionary> {
    if g_t < tx.n_elements || g_r < rx.n_elements {
        return Err(Error::param(format!(
            "grids must be at least as large as the arrays (G_t={g_t} < N_t={} or G_r={g_r} < N_r={})",
            tx.n_elements, rx.n_elements
        )));
    }
    if n_taps == 0 {
        return Err(Error::param("n_taps must be at least 1"));
    }
    let grid = |n: usize, g: usize| {
        let freqs: Vec<f64> = (0..g).map(|k| grid_frequency(k, g)).collect();
        let cols: Vec<Vec<C64>> = freqs.iter().map(|&nu| steering_vector(n, nu)).collect();
        (Mat::from_fn(n, g, |i, k| cols[k][i]), freqs)
    };
    let (tx_grid, tx_freqs) = grid(tx.n_elements, g_t);
    let (rx_grid, rx_freqs) = grid(rx.n_elements, g_r);
    Ok(Dictionary {
        tx_grid,
        rx_grid,
        tx_freqs,
        rx_freqs,
        n_taps,
    })
}

impl Dictionary {
    pub fn n_tx(&self) -> usize {
        self.tx_grid.nrows()
    }

    pub fn n_rx(&self) -> usize {
        self.rx_grid.nrows()
    }

    pub fn grid_tx(&self) -> usize {
        self.tx_grid.ncols()
    }

    pub fn grid_rx(&self) -> usize {
        self.rx_grid.ncols()
    }

    pub fn n_atoms(&self) -> usize {
        self.n_taps * self.grid_tx() * self.grid_rx()
    }

    /// Length of `vec(H)`.
    pub fn channel_len(&self) -> usize {
        self.n_taps * self.n_tx() * self.n_rx()
    }

    pub fn atom_index(&self, tap: usize, gt: usize, gr: usize) -> usize {
        gr + self.grid_rx() * (gt + self.grid_tx() * tap)
    }

    /// `(tap, gt, gr)` of atom `j`.
    pub fn atom_coords(&self, j: usize) -> (usize, usize, usize) {
        let per_tap = self.grid_tx() * self.grid_rx();
        let tap = j / per_tap;
        let rem = j % per_tap;
        (tap, rem / self.grid_rx(), rem % self.grid_rx())
    }

    pub fn rx_atom(&self, gr: usize) -> &[C64] {
        self.rx_grid.col_as_slice(gr)
    }

    pub fn tx_atom(&self, gt: usize) -> &[C64] {
        self.tx_grid.col_as_slice(gt)
    }

    /// `Psi * h`, applied tap by tap as `U_r X_d U_t^H`.
    pub fn synthesize(&self, h: &[C64]) -> Vec<C64> {
        assert_eq!(h.len(), self.n_atoms(), "synthesize: coefficient length mismatch");
        let (gt, gr) = (self.grid_tx(), self.grid_rx());
        let mut out = Vec::with_capacity(self.channel_len());
        for d in 0..self.n_taps {
            let x = view(&h[d * gt * gr..(d + 1) * gt * gr], gr, gt);
            let left = mul(self.rx_grid.as_ref(), x);
            let hd = mul(left.as_ref(), self.tx_grid.adjoint());
            out.extend(vectorize(hd.as_ref()));
        }
        out
    }

    /// `Psi * h` for a sparse `h` given as `(index, value)` pairs.
    pub fn synthesize_sparse(&self, support: &[usize], values: &[C64]) -> Vec<C64> {
        assert_eq!(support.len(), values.len());
        let (nt, nr) = (self.n_tx(), self.n_rx());
        let mut out = vec![C64::new(0.0, 0.0); self.channel_len()];
        for (&j, &c) in support.iter().zip(values) {
            let (d, gt, gr) = self.atom_coords(j);
            let ur = self.rx_atom(gr);
            let ut = self.tx_atom(gt);
            let base = d * nt * nr;
            for t in 0..nt {
                let ct = c * ut[t].conj();
                for r in 0..nr {
                    out[base + r + nr * t] += ur[r] * ct;
                }
            }
        }
        out
    }

    /// `Psi^H * x`, applied tap by tap as `U_r^H G_d U_t`.
    pub fn analyze(&self, vec_h: &[C64]) -> Vec<C64> {
        assert_eq!(vec_h.len(), self.channel_len(), "analyze: length mismatch");
        let (nt, nr) = (self.n_tx(), self.n_rx());
        let mut out = Vec::with_capacity(self.n_atoms());
        for d in 0..self.n_taps {
            let g = view(&vec_h[d * nt * nr..(d + 1) * nt * nr], nr, nt);
            let left = mul(self.rx_grid.adjoint(), g);
            let x = mul(left.as_ref(), self.tx_grid.as_ref());
            out.extend(vectorize(x.as_ref()));
        }
        out
    }

    /// Explicit `I_Nc (x) conj(U_t) (x) U_r`. Only sensible for small grids.
    pub fn full(&self) -> CMat {
        let inner = kron(conj(self.tx_grid.as_ref()).as_ref(), self.rx_grid.as_ref());
        kron(crate::linalg::identity(self.n_taps).as_ref(), inner.as_ref())
    }

    /// `|U_r^H H_d U_t|` for every tap: the virtual-channel magnitude grid (`Gr x Gt`).
    pub fn virtual_channel_magnitudes(&self, taps: &[CMat]) -> Vec<Mat<f64>> {
        taps.iter()
            .map(|hd| {
                let left = mul(self.rx_grid.adjoint(), hd.as_ref());
                let x = mul(left.as_ref(), self.tx_grid.as_ref());
                Mat::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)].norm())
            })
            .collect()
    }

    /// Reshape a `vec(H)` into the `Nr x (Nc Nt)` concatenated channel.
    pub fn devectorize_channel(&self, vec_h: &[C64]) -> CMat {
        devectorize(vec_h, self.n_rx(), self.n_taps * self.n_tx())
    }
}
