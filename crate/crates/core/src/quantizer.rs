//! Uniform mid-rise ADC model applied independently to the real and imaginary
//! part of every receive sample.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::C64;

/// ADC resolution per real component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AdcBits {
    Finite(u32),
    Infinite,
}

impl AdcBits {
    pub fn finite(bits: u32) -> Result<Self> {
        if !(1..=16).contains(&bits) {
            return Err(Error::param(format!("ADC resolution must be 1..=16 bits, got {bits}")));
        }
        Ok(AdcBits::Finite(bits))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, AdcBits::Infinite)
    }
}

impl fmt::Display for AdcBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdcBits::Finite(b) => write!(f, "{b}"),
            AdcBits::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for AdcBits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinite") || t == "∞" {
            return Ok(AdcBits::Infinite);
        }
        let b: u32 = t
            .parse()
            .map_err(|_| Error::param(format!("ADC bits must be an integer or \"inf\", got {s:?}")))?;
        AdcBits::finite(b)
    }
}

/// How the quantizer full-scale range is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Agc {
    /// Per-component power measured on the vector being quantized.
    Measured,
    /// Per-component power known in advance (from rho, channel statistics and noise).
    Reference(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcSpec {
    pub bits: AdcBits,
    /// Full-scale range in per-component standard deviations.
    pub clip_scale: f64,
    pub agc: Agc,
}

impl AdcSpec {
    /// Default full scale: 2 sigma for 1-2 bits, 3 sigma above.
    pub fn new(bits: AdcBits) -> Self {
        Self {
            bits,
            clip_scale: default_clip_scale(bits),
            agc: Agc::Measured,
        }
    }

    pub fn infinite() -> Self {
        Self::new(AdcBits::Infinite)
    }

    pub fn with_agc(mut self, agc: Agc) -> Self {
        self.agc = agc;
        self
    }

    pub fn with_clip_scale(mut self, clip_scale: f64) -> Result<Self> {
        if !(clip_scale > 0.0) {
            return Err(Error::param("clip scale must be positive"));
        }
        self.clip_scale = clip_scale;
        Ok(self)
    }
}

pub fn default_clip_scale(bits: AdcBits) -> f64 {
    match bits {
        AdcBits::Finite(1) | AdcBits::Finite(2) => 2.0,
        _ => 3.0,
    }
}

/// Mid-rise quantization of one real sample. Levels are
/// `+-step/2, +-3 step/2, ..., +-(2^{bits-1} - 1/2) step`; a sample exactly on a
/// decision threshold maps to the level of larger magnitude, which keeps the
/// map odd-symmetric.
pub fn quantize_real(x: f64, bits: u32, step: f64) -> f64 {
    let top = (1u64 << (bits - 1)) as f64 - 0.5;
    let cell = ((x.abs() / step).floor() + 0.5).min(top);
    if x.is_sign_negative() {
        -cell * step
    } else {
        cell * step
    }
}

/// `clip_scale * sqrt(power) / 2^{bits-1}`: the full-scale range spans
/// `clip_scale` standard deviations on each side.
pub fn auto_step(signal_power_per_component: f64, bits: AdcBits, clip_scale: f64) -> Result<f64> {
    match bits {
        AdcBits::Infinite => Err(Error::NotApplicable("no step size for an infinite-resolution ADC".into())),
        AdcBits::Finite(b) => {
            if signal_power_per_component < 0.0 {
                return Err(Error::param("signal power must be non-negative"));
            }
            Ok(clip_scale * signal_power_per_component.sqrt() / (1u64 << (b - 1)) as f64)
        }
    }
}

/// Mean power of the real (or imaginary) component, averaged over both.
pub fn power_per_component(r: &[C64]) -> f64 {
    if r.is_empty() {
        return 0.0;
    }
    r.iter().map(|z| z.norm_sqr()).sum::<f64>() / (2.0 * r.len() as f64)
}

/// Quantizes real and imaginary parts with one shared step. Infinite resolution
/// returns the input untouched. A zero power estimate falls back to a unit step.
pub fn quantize_complex_vector(r: &[C64], spec: &AdcSpec) -> Vec<C64> {
    let b = match spec.bits {
        AdcBits::Infinite => return r.to_vec(),
        AdcBits::Finite(b) => b,
    };
    let power = match spec.agc {
        Agc::Measured => power_per_component(r),
        Agc::Reference(p) => p,
    };
    let mut step = auto_step(power, spec.bits, spec.clip_scale).unwrap_or(1.0);
    if !(step > 0.0) || !step.is_finite() {
        step = 1.0;
    }
    r.iter()
        .map(|z| C64::new(quantize_real(z.re, b, step), quantize_real(z.im, b, step)))
        .collect()
}
