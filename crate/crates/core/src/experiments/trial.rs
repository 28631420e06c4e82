use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::beamforming::{FrameConfig, FrameDims};
use crate::channel::{build_channel, sample_path_set, unit_energy_gain_variance, ArrayGeometry, PulseShape, WidebandChannel};
use crate::error::{Error, Result};
use crate::estimators::{omp, LsSolver, OmpConfig};
use crate::linalg::LinearOperator;
use crate::quantizer::{default_clip_scale, quantize_complex_vector, power_per_component, AdcBits, AdcSpec, Agc};
use crate::rng::{stream, Stream};
use crate::sensing::{
    build_dictionary, expected_power_per_component, receive_components, Dictionary, MeasurementOperator,
    ReceiveComponents, SparseSensingOperator,
};

use super::{from_db, nmse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    Omp,
    Ls,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::Omp => "omp",
            Estimator::Ls => "ls",
        })
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "omp" => Ok(Estimator::Omp),
            "ls" => Ok(Estimator::Ls),
            _ => Err(Error::param(format!("unknown estimator {s:?} (expected omp or ls)"))),
        }
    }
}

/// Source of the ADC full-scale setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgcMode {
    /// Fixed from the nominal receive power `rho + sigma^2` per complex sample.
    Reference,
    /// Measured on each observation vector.
    Measured,
}

impl fmt::Display for AgcMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgcMode::Reference => "reference",
            AgcMode::Measured => "measured",
        })
    }
}

impl FromStr for AgcMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reference" => Ok(AgcMode::Reference),
            "measured" => Ok(AgcMode::Measured),
            _ => Err(Error::param(format!("unknown AGC mode {s:?} (expected reference or measured)"))),
        }
    }
}

/// Array, grid, waveform and receiver settings shared by every point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub n_tx: usize,
    pub n_rx: usize,
    pub grid_tx: usize,
    pub grid_rx: usize,
    pub n_taps: usize,
    pub frame_len: usize,
    /// `None` transmits one stream per RF chain.
    pub n_streams: Option<usize>,
    pub ps_bits: u32,
    pub rolloff: f64,
    /// OMP selects `n_paths * n_taps * k_leak` atoms.
    pub k_leak: usize,
    /// `None` picks the per-resolution default.
    pub clip_scale: Option<f64>,
    pub agc: AgcMode,
    pub noise_var: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            n_tx: 32,
            n_rx: 16,
            grid_tx: 64,
            grid_rx: 32,
            n_taps: 4,
            frame_len: 16,
            n_streams: None,
            ps_bits: 6,
            rolloff: 0.35,
            k_leak: 2,
            clip_scale: None,
            agc: AgcMode::Reference,
            noise_var: 1.0,
        }
    }
}

/// One operating point evaluated on one random trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSpec {
    pub params: SystemParams,
    pub snr_db: f64,
    pub adc_bits: AdcBits,
    pub n_frames: usize,
    /// `L_t = L_r`.
    pub n_chains: usize,
    pub n_paths: usize,
    pub estimator: Estimator,
    pub seed: u64,
}

impl Default for TrialSpec {
    fn default() -> Self {
        Self {
            params: SystemParams::default(),
            snr_db: 0.0,
            adc_bits: AdcBits::Infinite,
            n_frames: 80,
            n_chains: 4,
            n_paths: 2,
            estimator: Estimator::Omp,
            seed: 0,
        }
    }
}

impl TrialSpec {
    pub fn n_streams(&self) -> usize {
        self.params.n_streams.unwrap_or(self.n_chains)
    }

    /// `rho` for `sigma^2 = noise_var`.
    pub fn rho(&self) -> f64 {
        from_db(self.snr_db) * self.params.noise_var
    }

    pub fn n_observations(&self) -> usize {
        self.n_frames * self.params.frame_len * self.n_chains
    }

    pub fn omp_config(&self) -> OmpConfig {
        OmpConfig::for_sparsity(self.n_paths, self.params.n_taps, self.params.k_leak)
    }

    pub fn adc(&self) -> AdcSpec {
        let clip = self.params.clip_scale.unwrap_or_else(|| default_clip_scale(self.adc_bits));
        let agc = match self.params.agc {
            AgcMode::Measured => Agc::Measured,
            AgcMode::Reference => Agc::Reference(expected_power_per_component(self.rho(), self.params.noise_var, 1.0)),
        };
        AdcSpec {
            bits: self.adc_bits,
            clip_scale: clip,
            agc,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        let positive = [
            ("n_tx", p.n_tx),
            ("n_rx", p.n_rx),
            ("n_taps", p.n_taps),
            ("frame_len", p.frame_len),
            ("k_leak", p.k_leak),
            ("n_frames", self.n_frames),
            ("n_chains", self.n_chains),
            ("n_paths", self.n_paths),
        ];
        for (key, v) in positive {
            if v == 0 {
                return Err(Error::config(key, "must be at least 1"));
            }
        }
        if p.grid_tx < p.n_tx {
            return Err(Error::config("grid_tx", format!("must be at least n_tx = {}", p.n_tx)));
        }
        if p.grid_rx < p.n_rx {
            return Err(Error::config("grid_rx", format!("must be at least n_rx = {}", p.n_rx)));
        }
        if self.n_chains > p.n_tx.min(p.n_rx) {
            return Err(Error::config("n_chains", "must not exceed the number of antennas"));
        }
        let ns = self.n_streams();
        if ns == 0 || ns > self.n_chains {
            return Err(Error::config(
                "n_streams",
                format!("must be in 1..=min(L_t, L_r) = {}, got {ns}", self.n_chains),
            ));
        }
        if !(1..=16).contains(&p.ps_bits) {
            return Err(Error::config("ps_bits", "must be in 1..=16"));
        }
        if !(0.0..=1.0).contains(&p.rolloff) {
            return Err(Error::config("rolloff", "must be in [0, 1]"));
        }
        if let Some(c) = p.clip_scale {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::config("clip_scale", "must be positive"));
            }
        }
        if !(p.noise_var > 0.0) || !p.noise_var.is_finite() {
            return Err(Error::config("noise_var", "must be positive"));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::config("snr_db", "must be finite"));
        }
        let rows = self.n_observations();
        match self.estimator {
            Estimator::Ls => {
                let cols = p.n_taps * p.n_tx * p.n_rx;
                if rows < cols {
                    return Err(Error::config(
                        "estimator",
                        format!(
                            "least squares needs M N L_r >= Nc Nt Nr, got {rows} < {cols} (M={}, N={}, L_r={})",
                            self.n_frames, p.frame_len, self.n_chains
                        ),
                    ));
                }
            }
            Estimator::Omp => {
                let atoms = self.omp_config().max_atoms;
                let n_atoms = p.n_taps * p.grid_tx * p.grid_rx;
                if atoms > rows.min(n_atoms) {
                    return Err(Error::config(
                        "k_leak",
                        format!("OMP would select {atoms} atoms but only {} are identifiable", rows.min(n_atoms)),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub nmse: f64,
    /// Atoms selected by OMP; 1 for LS.
    pub iterations: usize,
    pub channel_energy: f64,
    /// Per-component power of the analog observations.
    pub observation_power: f64,
}

/// Runs one trial: channel, frames and noise are drawn from streams keyed by `spec.seed`.
pub fn run_trial(spec: &TrialSpec) -> Result<TrialResult> {
    let mut ws = TrialWorkspace::new(spec.seed);
    ws.plan(std::slice::from_ref(spec));
    ws.evaluate(spec)
}

/// The channel that trial `spec.seed` of `spec` is run on.
pub fn trial_channel(spec: &TrialSpec) -> Result<WidebandChannel> {
    spec.validate()?;
    TrialWorkspace::new(spec.seed).channel(spec).cloned()
}

/// The angular dictionary used by `spec`.
pub fn trial_dictionary(spec: &TrialSpec) -> Result<Dictionary> {
    spec.validate()?;
    let mut ws = TrialWorkspace::new(spec.seed);
    let key = ws.ensure_dictionary(spec)?;
    Ok(ws.dictionaries.remove(&key).expect("dictionary was just built"))
}

fn channel_key(s: &TrialSpec) -> String {
    let p = &s.params;
    format!("{}:{}:{}:{}:{}", p.n_tx, p.n_rx, p.n_taps, p.rolloff, s.n_paths)
}

fn frame_key(s: &TrialSpec) -> String {
    let p = &s.params;
    format!("{}:{}:{}:{}:{}:{}", p.n_tx, p.n_rx, s.n_chains, s.n_streams(), p.frame_len, p.ps_bits)
}

fn operator_key(s: &TrialSpec) -> String {
    format!("{}|{}|{}", frame_key(s), s.n_frames, s.params.n_taps)
}

fn dictionary_key(s: &TrialSpec) -> String {
    let p = &s.params;
    format!("{}:{}:{}:{}:{}", p.n_tx, p.n_rx, p.grid_tx, p.grid_rx, p.n_taps)
}

/// Per-trial cache. Every point evaluated through one workspace sees the same
/// channel draw, the same frames (nested in `M`) and the same unit noise, so
/// differences between points are not blurred by independent randomness.
pub(crate) struct TrialWorkspace {
    seed: u64,
    max_frames: HashMap<String, usize>,
    channels: HashMap<String, WidebandChannel>,
    frames: HashMap<String, Vec<FrameConfig>>,
    components: HashMap<String, ReceiveComponents>,
    operators: HashMap<String, MeasurementOperator>,
    ls_solvers: HashMap<String, LsSolver>,
    dictionaries: HashMap<String, Dictionary>,
}

impl TrialWorkspace {
    pub(crate) fn new(seed: u64) -> Self {
        Self {
            seed,
            max_frames: HashMap::new(),
            channels: HashMap::new(),
            frames: HashMap::new(),
            components: HashMap::new(),
            operators: HashMap::new(),
            ls_solvers: HashMap::new(),
            dictionaries: HashMap::new(),
        }
    }

    /// Records the largest frame count each frame family will need.
    pub(crate) fn plan(&mut self, specs: &[TrialSpec]) {
        for s in specs {
            let e = self.max_frames.entry(frame_key(s)).or_insert(0);
            *e = (*e).max(s.n_frames);
        }
    }

    fn channel(&mut self, s: &TrialSpec) -> Result<&WidebandChannel> {
        let key = channel_key(s);
        if !self.channels.contains_key(&key) {
            let p = &s.params;
            let pulse = PulseShape::raised_cosine(p.rolloff, 1.0)?;
            let var = unit_energy_gain_variance(&pulse, p.n_taps);
            let paths = sample_path_set(&mut stream(self.seed, Stream::Channel), s.n_paths, p.n_taps, &pulse, var)?;
            let tx = ArrayGeometry::half_wavelength(p.n_tx)?;
            let rx = ArrayGeometry::half_wavelength(p.n_rx)?;
            let ch = build_channel(&paths, &tx, &rx, p.n_taps, &pulse)?;
            self.channels.insert(key.clone(), ch);
        }
        Ok(&self.channels[&key])
    }

    fn frames(&mut self, s: &TrialSpec) -> Result<&[FrameConfig]> {
        let key = frame_key(s);
        let need = self.max_frames.get(&key).copied().unwrap_or(0).max(s.n_frames);
        let have = self.frames.get(&key).map_or(0, Vec::len);
        if have < need {
            let p = &s.params;
            let dims = FrameDims {
                n_tx: p.n_tx,
                n_rx: p.n_rx,
                chains_tx: s.n_chains,
                chains_rx: s.n_chains,
                n_streams: s.n_streams(),
                frame_len: p.frame_len,
                ps_bits: p.ps_bits,
            };
            let list = self.frames.entry(key.clone()).or_default();
            for m in have..need {
                list.push(FrameConfig::random(&mut stream(self.seed, Stream::Frame(m)), &dims)?);
            }
        }
        Ok(&self.frames[&key][..s.n_frames])
    }

    fn components(&mut self, s: &TrialSpec) -> Result<ReceiveComponents> {
        let key = format!("{}|{}", channel_key(s), frame_key(s));
        let rows_per_frame = s.params.frame_len * s.n_chains;
        let ready = self
            .components
            .get(&key)
            .is_some_and(|c| c.signal.len() >= rows_per_frame * s.n_frames);
        if !ready {
            let need = self.max_frames.get(&frame_key(s)).copied().unwrap_or(0).max(s.n_frames);
            let full = TrialSpec {
                n_frames: need,
                ..s.clone()
            };
            let channel = self.channel(s)?.clone();
            let frames = self.frames(&full)?.to_vec();
            let parts = receive_components(&channel, &frames, &mut stream(self.seed, Stream::Noise))?;
            self.components.insert(key.clone(), parts);
        }
        Ok(self.components[&key].truncated(rows_per_frame, s.n_frames))
    }

    fn ensure_operator(&mut self, s: &TrialSpec) -> Result<String> {
        let key = operator_key(s);
        if !self.operators.contains_key(&key) {
            let frames = self.frames(s)?.to_vec();
            self.operators.insert(key.clone(), MeasurementOperator::new(&frames, s.params.n_taps)?);
        }
        Ok(key)
    }

    fn ensure_ls_solver(&mut self, s: &TrialSpec) -> Result<String> {
        let key = self.ensure_operator(s)?;
        if !self.ls_solvers.contains_key(&key) {
            let solver = LsSolver::new(&self.operators[&key])?;
            self.ls_solvers.insert(key.clone(), solver);
        }
        Ok(key)
    }

    fn ensure_dictionary(&mut self, s: &TrialSpec) -> Result<String> {
        let key = dictionary_key(s);
        if !self.dictionaries.contains_key(&key) {
            let p = &s.params;
            let tx = ArrayGeometry::half_wavelength(p.n_tx)?;
            let rx = ArrayGeometry::half_wavelength(p.n_rx)?;
            let d = build_dictionary(&tx, &rx, p.grid_tx, p.grid_rx, p.n_taps)?;
            self.dictionaries.insert(key.clone(), d);
        }
        Ok(key)
    }

    pub(crate) fn evaluate(&mut self, s: &TrialSpec) -> Result<TrialResult> {
        self.evaluate_inner(s)
            .map_err(|e| e.with_trial_context(format!("seed {}", self.seed)))
    }

    fn evaluate_inner(&mut self, s: &TrialSpec) -> Result<TrialResult> {
        s.validate()?;
        let rho = s.rho();
        let parts = self.components(s)?;
        let analog = parts.combine(rho, s.params.noise_var);
        let y = quantize_complex_vector(&analog, &s.adc());
        let estimate = match s.estimator {
            Estimator::Ls => {
                let key = self.ensure_ls_solver(s)?;
                self.ls_solvers[&key].solve(&self.operators[&key], &y, rho)?
            }
            Estimator::Omp => {
                let dkey = self.ensure_dictionary(s)?;
                let okey = self.ensure_operator(s)?;
                let phi = &self.operators[&okey];
                let dict = &self.dictionaries[&dkey];
                let a = SparseSensingOperator::new(phi, dict, rho);
                debug_assert_eq!(a.nrows(), y.len());
                omp(&y, &a, &s.omp_config(), dict)?
            }
        };
        let channel = self.channel(s)?;
        Ok(TrialResult {
            nmse: nmse(&channel.concatenated, &estimate.channel_hat)?,
            iterations: estimate.iterations,
            channel_energy: channel.energy(),
            observation_power: power_per_component(&analog),
        })
    }
}
