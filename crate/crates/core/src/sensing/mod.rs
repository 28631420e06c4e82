//! The training-phase measurement model `r = Q(sqrt(rho) Phi vec(H) + n)` and
//! its sparse form `Phi vec(H) = Phi Psi h`.

mod dictionary;
mod measurement;
mod simulate;

pub use dictionary::{build_dictionary, Dictionary};
pub use measurement::{frame_block, MeasurementOperator};
pub use simulate::{
    expected_power_per_component, receive_components, simulate_observations, ReceiveComponents, SensingSystem,
};

use crate::channel::WidebandChannel;
use crate::linalg::{vectorize, LinearOperator, C64};

/// `vec([H_0 ... H_{Nc-1}])`
pub fn vectorize_channel(channel: &WidebandChannel) -> Vec<C64> {
    vectorize(channel.concatenated.as_ref())
}

/// `A = sqrt(rho) Phi Psi`, evaluated without forming either factor.
#[derive(Debug, Clone, Copy)]
pub struct SparseSensingOperator<'a> {
    pub phi: &'a MeasurementOperator,
    pub dictionary: &'a Dictionary,
    pub scale: f64,
}

impl<'a> SparseSensingOperator<'a> {
    pub fn new(phi: &'a MeasurementOperator, dictionary: &'a Dictionary, rho: f64) -> Self {
        assert_eq!(phi.ncols(), dictionary.channel_len(), "Phi and Psi sizes disagree");
        Self {
            phi,
            dictionary,
            scale: rho.sqrt(),
        }
    }
}

impl LinearOperator for SparseSensingOperator<'_> {
    fn nrows(&self) -> usize {
        self.phi.nrows()
    }

    fn ncols(&self) -> usize {
        self.dictionary.n_atoms()
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = self.phi.apply(&self.dictionary.synthesize(x));
        y.iter_mut().for_each(|v| *v *= self.scale);
        y
    }

    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        let mut x = self.dictionary.analyze(&self.phi.adjoint(y));
        x.iter_mut().for_each(|v| *v *= self.scale);
        x
    }

    fn column(&self, j: usize) -> Vec<C64> {
        let (d, gt, gr) = self.dictionary.atom_coords(j);
        let mut c = self
            .phi
            .apply_rank_one(d, self.dictionary.rx_atom(gr), self.dictionary.tx_atom(gt));
        c.iter_mut().for_each(|v| *v *= self.scale);
        c
    }
}
