use std::collections::BTreeMap;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::trial_seed;

use super::trial::{TrialResult, TrialSpec, TrialWorkspace};
use super::to_db;

pub const SNR_CONVENTION: &str =
    "SNR = rho / sigma^2 per receive antenna; E[sum_d ||H_d||_F^2] = Nt Nr; unit transmit power per symbol";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub n_trials: usize,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Average over the trials that succeeded instead of failing the point.
    pub skip_failures: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            n_trials: 200,
            threads: None,
            skip_failures: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointStatus {
    Ok,
    /// Some trials failed and were skipped.
    Partial { failed: usize },
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub spec: TrialSpec,
    pub status: PointStatus,
    /// Mean of the per-trial NMSE ratios.
    pub mean_nmse: f64,
    pub mean_nmse_db: f64,
    /// Standard error of `mean_nmse`.
    pub stderr: f64,
    /// First-order propagation of `stderr` to the dB scale.
    pub stderr_db: f64,
    pub n_trials: usize,
    pub samples: Vec<f64>,
    pub failures: Vec<String>,
}

impl PointResult {
    fn from_outcomes(spec: TrialSpec, outcomes: Vec<Result<TrialResult>>, skip_failures: bool) -> Self {
        let mut samples = Vec::with_capacity(outcomes.len());
        let mut failures = Vec::new();
        for o in outcomes {
            match o {
                Ok(r) => samples.push(r.nmse),
                Err(e) => failures.push(e.to_string()),
            }
        }
        let status = if failures.is_empty() {
            PointStatus::Ok
        } else if skip_failures && !samples.is_empty() {
            PointStatus::Partial { failed: failures.len() }
        } else {
            PointStatus::Failed
        };
        let (mean, se) = if status == PointStatus::Failed {
            (f64::NAN, f64::NAN)
        } else {
            mean_and_stderr(&samples)
        };
        Self {
            spec,
            status,
            mean_nmse: mean,
            mean_nmse_db: to_db(mean),
            stderr: se,
            stderr_db: 10.0 / std::f64::consts::LN_10 * se / mean,
            n_trials: samples.len(),
            samples,
            failures,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status != PointStatus::Failed
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<PointResult>,
    pub n_trials: usize,
    /// Short digest of the full point grid and trial count.
    pub config_hash: String,
    pub snr_convention: String,
}

impl SweepResult {
    pub fn failed_points(&self) -> impl Iterator<Item = (usize, &PointResult)> {
        self.points.iter().enumerate().filter(|(_, p)| !p.is_ok())
    }
}

pub fn config_hash(points: &[TrialSpec], n_trials: usize) -> String {
    let mut h = Sha256::new();
    h.update(format!("{n_trials}\n"));
    for p in points {
        h.update(format!("{p:?}\n"));
    }
    h.finalize().iter().take(6).map(|b| format!("{b:02x}")).collect()
}

/// Averages every point over `n_trials` trials. Trial `t` of a point uses seed
/// `spec.seed + t`, and all points sharing that seed are evaluated on one
/// workspace, i.e. on common channel, frame and noise draws. Results are
/// reduced in trial order, so they do not depend on the thread count.
pub fn run_sweep(points: &[TrialSpec], opts: &SweepOptions) -> Result<SweepResult> {
    if opts.n_trials == 0 {
        return Err(Error::config("n_trials", "must be at least 1"));
    }
    if points.is_empty() {
        return Err(Error::param("sweep has no points"));
    }
    for (i, p) in points.iter().enumerate() {
        p.validate().map_err(|e| e.with_trial_context(format!("point {i}")))?;
    }
    let run = || -> Vec<Vec<Result<TrialResult>>> {
        (0..opts.n_trials)
            .into_par_iter()
            .map(|t| evaluate_trial(points, t))
            .collect()
    };
    let per_trial = match opts.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::param(format!("cannot start {k} worker threads: {e}")))?
            .install(run),
        None => run(),
    };
    let mut by_point: Vec<Vec<Result<TrialResult>>> = (0..points.len()).map(|_| Vec::new()).collect();
    for trial in per_trial {
        for (i, r) in trial.into_iter().enumerate() {
            by_point[i].push(r);
        }
    }
    let results = points
        .iter()
        .cloned()
        .zip(by_point)
        .map(|(spec, outcomes)| PointResult::from_outcomes(spec, outcomes, opts.skip_failures))
        .collect();
    Ok(SweepResult {
        points: results,
        n_trials: opts.n_trials,
        config_hash: config_hash(points, opts.n_trials),
        snr_convention: SNR_CONVENTION.to_string(),
    })
}

fn evaluate_trial(points: &[TrialSpec], t: usize) -> Vec<Result<TrialResult>> {
    let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        groups.entry(trial_seed(p.seed, t)).or_default().push(i);
    }
    let mut out: Vec<Option<Result<TrialResult>>> = (0..points.len()).map(|_| None).collect();
    for (seed, idx) in groups {
        let mut ws = TrialWorkspace::new(seed);
        let specs: Vec<TrialSpec> = idx.iter().map(|&i| TrialSpec { seed, ..points[i].clone() }).collect();
        ws.plan(&specs);
        for (&i, s) in idx.iter().zip(&specs) {
            out[i] = Some(ws.evaluate(s));
        }
    }
    out.into_iter().map(|r| r.expect("every point is evaluated")).collect()
}
