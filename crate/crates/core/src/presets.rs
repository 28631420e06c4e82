//! Named sweeps matching the five NMSE studies.

use std::fmt;
use std::str::FromStr;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::experiments::Estimator;
use crate::quantizer::AdcBits;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// NMSE vs SNR, bits {1,2,3,4,inf}, OMP and LS.
    Fig3LsVsOmp,
    /// NMSE vs SNR for M in {10,100} and L in {1,2,4}, bits {4,inf}.
    Fig4FramesChains,
    /// NMSE vs frames with ideal ADCs, SNR {-20,0,15} dB and L in {1,2,4}.
    Fig5FramesInfbit,
    /// NMSE vs frames at L = 4, bits {1,4,inf}, SNR {-20,0,15} dB.
    Fig6FramesBits,
    /// NMSE vs number of paths at 5 dB, bits {2,3,4,inf}.
    Fig7Sparsity,
}

/// Quantity on the horizontal axis of a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    SnrDb,
    Frames,
    Paths,
    Chains,
    Bits,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::SnrDb => "snr_db",
            Axis::Frames => "frames",
            Axis::Paths => "n_paths",
            Axis::Chains => "chains",
            Axis::Bits => "bits",
        }
    }
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Fig3LsVsOmp,
        Preset::Fig4FramesChains,
        Preset::Fig5FramesInfbit,
        Preset::Fig6FramesBits,
        Preset::Fig7Sparsity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig3LsVsOmp => "fig3_ls_vs_omp",
            Preset::Fig4FramesChains => "fig4_frames_chains",
            Preset::Fig5FramesInfbit => "fig5_frames_infbit",
            Preset::Fig6FramesBits => "fig6_frames_bits",
            Preset::Fig7Sparsity => "fig7_sparsity",
        }
    }

    pub fn x_axis(&self) -> Axis {
        match self {
            Preset::Fig3LsVsOmp | Preset::Fig4FramesChains => Axis::SnrDb,
            Preset::Fig5FramesInfbit | Preset::Fig6FramesBits => Axis::Frames,
            Preset::Fig7Sparsity => Axis::Paths,
        }
    }

    /// Default configuration with this preset's axes filled in.
    pub fn config(&self) -> RunConfig {
        let snr_sweep: Vec<f64> = (0..8).map(|k| -20.0 + 5.0 * k as f64).collect();
        let frames_sweep: Vec<usize> = (1..=10).map(|k| 10 * k).collect();
        let bits = |b: &[Option<u32>]| -> Vec<AdcBits> {
            b.iter()
                .map(|x| x.map_or(AdcBits::Infinite, AdcBits::Finite))
                .collect()
        };
        let mut cfg = RunConfig {
            preset: Some(*self),
            ..RunConfig::default()
        };
        match self {
            Preset::Fig3LsVsOmp => {
                cfg.snr_db = snr_sweep;
                cfg.adc_bits = bits(&[Some(1), Some(2), Some(3), Some(4), None]);
                cfg.estimators = vec![Estimator::Omp, Estimator::Ls];
            }
            Preset::Fig4FramesChains => {
                cfg.snr_db = snr_sweep;
                cfg.adc_bits = bits(&[Some(4), None]);
                cfg.n_frames = vec![10, 100];
                cfg.n_chains = vec![1, 2, 4];
            }
            Preset::Fig5FramesInfbit => {
                cfg.snr_db = vec![-20.0, 0.0, 15.0];
                cfg.adc_bits = bits(&[None]);
                cfg.n_frames = frames_sweep;
                cfg.n_chains = vec![1, 2, 4];
            }
            Preset::Fig6FramesBits => {
                cfg.snr_db = vec![-20.0, 0.0, 15.0];
                cfg.adc_bits = bits(&[Some(1), Some(4), None]);
                cfg.n_frames = frames_sweep;
            }
            Preset::Fig7Sparsity => {
                cfg.snr_db = vec![5.0];
                cfg.adc_bits = bits(&[Some(2), Some(3), Some(4), None]);
                cfg.n_paths = (1..=8).collect();
            }
        }
        cfg
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == t || p.name().split('_').next() == Some(t.as_str()))
            .ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::param(format!("unknown preset {s:?} (expected one of {})", names.join(", ")))
            })
    }
}
