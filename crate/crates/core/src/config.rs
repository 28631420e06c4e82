//! Run configuration: a flat TOML document plus `key=value` overrides.
//!
//! Axis keys (`snr_db`, `adc_bits`, `n_frames`, `n_chains`, `n_paths`,
//! `estimator`) take a scalar, an array, or a range string such as
//! `"[-20..15 step 5]"`; the sweep grid is their Cartesian product.

use std::path::PathBuf;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::experiments::{AgcMode, Estimator, SystemParams, TrialSpec};
use crate::presets::Preset;
use crate::quantizer::AdcBits;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub snr_db: Vec<f64>,
    pub adc_bits: Vec<AdcBits>,
    pub n_frames: Vec<usize>,
    pub n_chains: Vec<usize>,
    pub n_paths: Vec<usize>,
    pub estimators: Vec<Estimator>,
    pub n_trials: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
    pub preset: Option<Preset>,
    pub skip_failures: bool,
    pub plot_data: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrialSpec::default();
        Self {
            params: t.params,
            snr_db: vec![t.snr_db],
            adc_bits: vec![t.adc_bits],
            n_frames: vec![t.n_frames],
            n_chains: vec![t.n_chains],
            n_paths: vec![t.n_paths],
            estimators: vec![t.estimator],
            n_trials: 200,
            seed: 1,
            threads: None,
            out_dir: PathBuf::from("results"),
            preset: None,
            skip_failures: false,
            plot_data: false,
        }
    }
}

pub const KEYS: &[&str] = &[
    "n_tx",
    "n_rx",
    "grid_tx",
    "grid_rx",
    "n_taps",
    "frame_len",
    "n_streams",
    "ps_bits",
    "rolloff",
    "k_leak",
    "clip_scale",
    "agc",
    "noise_var",
    "snr_db",
    "adc_bits",
    "n_frames",
    "n_chains",
    "n_paths",
    "estimator",
    "trials",
    "seed",
    "parallel",
    "out",
    "preset",
    "skip_failures",
    "plot_data",
];

impl RunConfig {
    /// Defaults, then the preset named in `table` (if any), then the remaining keys.
    pub fn from_table(table: &Table) -> Result<Self> {
        let mut cfg = match table.get("preset") {
            Some(v) => {
                let name = as_str("preset", v)?;
                let preset: Preset = name.parse().map_err(|e: Error| Error::config("preset", e.to_string()))?;
                preset.config()
            }
            None => RunConfig::default(),
        };
        for (k, v) in table {
            if k != "preset" {
                cfg.set_value(k, v)?;
            }
        }
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;
        Self::from_table(&table)
    }

    /// Applies `key=value`; the value uses TOML syntax, bare words are read as strings.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(assignment, "override must look like key=value"))?;
        let key = key.trim();
        let value = parse_value_text(raw.trim());
        if key == "preset" {
            let preset: Preset = as_str(key, &value)?
                .parse()
                .map_err(|e: Error| Error::config("preset", e.to_string()))?;
            *self = preset.config();
            return Ok(());
        }
        self.set_value(key, &value)
    }

    pub fn set_value(&mut self, key: &str, v: &Value) -> Result<()> {
        let p = &mut self.params;
        match key {
            "n_tx" => p.n_tx = as_usize(key, v)?,
            "n_rx" => p.n_rx = as_usize(key, v)?,
            "grid_tx" => p.grid_tx = as_usize(key, v)?,
            "grid_rx" => p.grid_rx = as_usize(key, v)?,
            "n_taps" => p.n_taps = as_usize(key, v)?,
            "frame_len" => p.frame_len = as_usize(key, v)?,
            "n_streams" => p.n_streams = optional(key, v, as_usize)?,
            "ps_bits" => p.ps_bits = as_u32(key, v)?,
            "rolloff" => p.rolloff = as_f64(key, v)?,
            "k_leak" => p.k_leak = as_usize(key, v)?,
            "clip_scale" => p.clip_scale = optional(key, v, as_f64)?,
            "agc" => p.agc = parse_str::<AgcMode>(key, v)?,
            "noise_var" => p.noise_var = as_f64(key, v)?,
            "snr_db" => self.snr_db = axis(key, v, as_f64)?,
            "adc_bits" => self.adc_bits = axis(key, v, parse_str::<AdcBits>)?,
            "n_frames" => self.n_frames = axis(key, v, as_usize)?,
            "n_chains" => self.n_chains = axis(key, v, as_usize)?,
            "n_paths" => self.n_paths = axis(key, v, as_usize)?,
            "estimator" => self.estimators = axis(key, v, parse_str::<Estimator>)?,
            "trials" => self.n_trials = as_usize(key, v)?,
            "seed" => {
                self.seed = match v {
                    Value::Integer(i) if *i >= 0 => *i as u64,
                    Value::String(s) => s.parse().map_err(|_| type_error(key, "a non-negative integer", v))?,
                    _ => return Err(type_error(key, "a non-negative integer", v)),
                }
            }
            "parallel" => self.threads = optional(key, v, as_usize)?,
            "out" => self.out_dir = PathBuf::from(as_str(key, v)?),
            "skip_failures" => self.skip_failures = as_bool(key, v)?,
            "plot_data" => self.plot_data = as_bool(key, v)?,
            "preset" => return Err(Error::config(key, "select presets before other keys")),
            _ => {
                return Err(Error::config(
                    key,
                    format!("unknown key (known keys: {})", KEYS.join(", ")),
                ))
            }
        }
        Ok(())
    }

    /// Cartesian product of the sweep axes, in a fixed nesting order
    /// (estimator, bits, chains, frames, paths, SNR; SNR varies fastest).
    pub fn grid(&self) -> Vec<TrialSpec> {
        let mut out = Vec::new();
        for &estimator in &self.estimators {
            for &adc_bits in &self.adc_bits {
                for &n_chains in &self.n_chains {
                    for &n_frames in &self.n_frames {
                        for &n_paths in &self.n_paths {
                            for &snr_db in &self.snr_db {
                                out.push(TrialSpec {
                                    params: self.params.clone(),
                                    snr_db,
                                    adc_bits,
                                    n_frames,
                                    n_chains,
                                    n_paths,
                                    estimator,
                                    seed: self.seed,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Checks every grid point before any computation.
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::config("parallel", "must be at least 1"));
        }
        for spec in self.grid() {
            spec.validate()?;
        }
        Ok(())
    }
}

fn parse_value_text(raw: &str) -> Value {
    let doc = format!("v = {raw}");
    match doc.parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.trim_matches('"').to_string()),
    }
}

fn type_error(key: &str, expected: &str, v: &Value) -> Error {
    Error::config(key, format!("expected {expected}, got {v}"))
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        Value::String(s) => s.trim().parse().map_err(|_| type_error(key, "a number", v)),
        _ => Err(type_error(key, "a number", v)),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        Value::String(s) => s.trim().parse().map_err(|_| type_error(key, "a non-negative integer", v)),
        _ => Err(type_error(key, "a non-negative integer", v)),
    }
}

fn as_u32(key: &str, v: &Value) -> Result<u32> {
    let n = as_usize(key, v)?;
    u32::try_from(n).map_err(|_| type_error(key, "a 32-bit integer", v))
}

fn as_bool(key: &str, v: &Value) -> Result<bool> {
    match v {
        Value::Boolean(b) => Ok(*b),
        Value::String(s) if s == "true" || s == "false" => Ok(s == "true"),
        _ => Err(type_error(key, "true or false", v)),
    }
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    match v {
        Value::String(s) => Ok(s),
        _ => Err(type_error(key, "a string", v)),
    }
}

fn parse_str<T: std::str::FromStr>(key: &str, v: &Value) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Integer(i) => i.to_string(),
        Value::Float(f) if f.is_infinite() && *f > 0.0 => "inf".to_string(),
        _ => return Err(type_error(key, "a string", v)),
    };
    text.parse().map_err(|e: T::Err| Error::config(key, e.to_string()))
}

/// `"none"` clears an optional setting.
fn optional<T>(key: &str, v: &Value, f: fn(&str, &Value) -> Result<T>) -> Result<Option<T>> {
    match v {
        Value::String(s) if s.eq_ignore_ascii_case("none") || s.eq_ignore_ascii_case("auto") => Ok(None),
        _ => f(key, v).map(Some),
    }
}

fn axis<T>(key: &str, v: &Value, f: fn(&str, &Value) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<Value> = match v {
        Value::Array(a) => a.clone(),
        Value::String(s) if s.contains("..") => expand_range(key, s)?,
        other => vec![other.clone()],
    };
    if items.is_empty() {
        return Err(Error::config(key, "axis must not be empty"));
    }
    items.iter().map(|x| f(key, x)).collect()
}

/// `[a..b step c]` (brackets and step optional; default step 1), inclusive of `b`.
pub fn parse_range(text: &str) -> std::result::Result<Vec<f64>, String> {
    let t = text.trim().trim_start_matches('[').trim_end_matches(']').trim();
    let (span, step) = match t.split_once("step") {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let (lo, hi) = span
        .split_once("..")
        .ok_or_else(|| format!("range {text:?} must look like [a..b step c]"))?;
    let num = |s: &str| {
        s.trim()
            .replace('\u{2212}', "-")
            .parse::<f64>()
            .map_err(|_| format!("bad number {s:?} in range {text:?}"))
    };
    let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
    if !(step > 0.0) {
        return Err(format!("range step must be positive in {text:?}"));
    }
    if hi < lo {
        return Err(format!("range end is below its start in {text:?}"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| lo + k as f64 * step).collect())
}

fn expand_range(key: &str, s: &str) -> Result<Vec<Value>> {
    let values = parse_range(s).map_err(|m| Error::config(key, m))?;
    Ok(values
        .into_iter()
        .map(|x| {
            if x.fract() == 0.0 && x.abs() < 1e15 {
                Value::Integer(x as i64)
            } else {
                Value::Float(x)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_defaults() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        let p = &cfg.params;
        assert_eq!((p.n_tx, p.grid_tx, p.n_rx, p.grid_rx), (32, 64, 16, 32));
        assert_eq!(cfg.n_chains, vec![4]);
        assert_eq!((p.n_taps, p.frame_len, p.ps_bits), (4, 16, 6));
        assert_eq!((cfg.n_paths.clone(), cfg.n_frames.clone()), (vec![2], vec![80]));
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn range_override_gives_eight_points() {
        let mut cfg = RunConfig::from_toml_str("snr_db = 3.0\n").unwrap();
        cfg.apply_override("snr_db=[-20..15 step 5]").unwrap();
        assert_eq!(cfg.snr_db, vec![-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0]);
        cfg.apply_override("snr_db=\"-20..15 step 5\"").unwrap();
        assert_eq!(cfg.snr_db.len(), 8);
    }

    #[test]
    fn inf_bits_parse() {
        let cfg = RunConfig::from_toml_str("adc_bits = \"inf\"").unwrap();
        assert_eq!(cfg.adc_bits, vec![AdcBits::Infinite]);
        let cfg = RunConfig::from_toml_str("adc_bits = [1, 4, \"inf\"]").unwrap();
        assert_eq!(cfg.adc_bits, vec![AdcBits::Finite(1), AdcBits::Finite(4), AdcBits::Infinite]);
        let mut cfg = RunConfig::default();
        cfg.apply_override("adc_bits=inf").unwrap();
        assert_eq!(cfg.adc_bits, vec![AdcBits::Infinite]);
    }

    #[test]
    fn unknown_and_mistyped_keys_are_named() {
        match RunConfig::from_toml_str("n_antennas = 4") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "n_antennas"),
            other => panic!("{other:?}"),
        }
        match RunConfig::from_toml_str("n_tx = \"many\"") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "n_tx"),
            other => panic!("{other:?}"),
        }
        assert!(RunConfig::default().apply_override("no_equals_sign").is_err());
    }

    #[test]
    fn invariant_violation_is_reported() {
        let cfg = RunConfig::from_toml_str("n_streams = 8").unwrap();
        match cfg.validate() {
            Err(Error::Config { key, .. }) => assert_eq!(key, "n_streams"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grid_is_cartesian() {
        let cfg = RunConfig::from_toml_str("snr_db = [0, 5]\nadc_bits = [1, 2, \"inf\"]\nestimator = [\"omp\", \"ls\"]").unwrap();
        let g = cfg.grid();
        assert_eq!(g.len(), 12);
        assert_eq!(g[0].snr_db, 0.0);
        assert_eq!(g[1].snr_db, 5.0);
        assert_eq!(g[11].estimator, Estimator::Ls);
    }

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("[10..100 step 10]").unwrap().len(), 10);
        assert_eq!(parse_range("1..3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(parse_range("[5..1]").is_err());
        assert!(parse_range("[1..5 step 0]").is_err());
    }

    #[test]
    fn optional_keys_can_be_cleared() {
        let mut cfg = RunConfig::from_toml_str("clip_scale = 2.5\nparallel = 2").unwrap();
        assert_eq!(cfg.params.clip_scale, Some(2.5));
        cfg.apply_override("clip_scale=auto").unwrap();
        assert_eq!(cfg.params.clip_scale, None);
        assert_eq!(cfg.threads, Some(2));
    }
}
