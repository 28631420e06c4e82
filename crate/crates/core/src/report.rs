//! CSV and plot-data output for sweeps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use faer::Mat;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::experiments::{Estimator, PointResult, PointStatus, SweepResult, TrialSpec};
use crate::presets::Axis;
use crate::quantizer::AdcBits;

pub const COLUMNS: [&str; 14] = [
    "snr_db",
    "estimator",
    "bits",
    "chains",
    "frames",
    "n_paths",
    "mean_nmse",
    "mean_nmse_db",
    "stderr",
    "stderr_db",
    "n_trials",
    "failed_trials",
    "seed",
    "status",
];

/// Decimal rendering with at least nine significant digits.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.000000000".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (8 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub snr_db: f64,
    pub estimator: Estimator,
    pub bits: AdcBits,
    pub chains: usize,
    pub frames: usize,
    pub n_paths: usize,
    pub mean_nmse: f64,
    pub mean_nmse_db: f64,
    pub stderr: f64,
    pub stderr_db: f64,
    pub n_trials: usize,
    pub failed_trials: usize,
    pub seed: u64,
    pub status: String,
}

impl CsvRow {
    pub fn from_point(p: &PointResult) -> Self {
        let s = &p.spec;
        Self {
            snr_db: s.snr_db,
            estimator: s.estimator,
            bits: s.adc_bits,
            chains: s.n_chains,
            frames: s.n_frames,
            n_paths: s.n_paths,
            mean_nmse: p.mean_nmse,
            mean_nmse_db: p.mean_nmse_db,
            stderr: p.stderr,
            stderr_db: p.stderr_db,
            n_trials: p.n_trials,
            failed_trials: p.failures.len(),
            seed: s.seed,
            status: status_label(&p.status).to_string(),
        }
    }

    fn to_record(&self) -> Vec<String> {
        vec![
            format_sig(self.snr_db),
            self.estimator.to_string(),
            self.bits.to_string(),
            self.chains.to_string(),
            self.frames.to_string(),
            self.n_paths.to_string(),
            format_sig(self.mean_nmse),
            format_sig(self.mean_nmse_db),
            format_sig(self.stderr),
            format_sig(self.stderr_db),
            self.n_trials.to_string(),
            self.failed_trials.to_string(),
            self.seed.to_string(),
            self.status.clone(),
        ]
    }

    fn from_record(r: &csv::StringRecord) -> Result<Self> {
        if r.len() != COLUMNS.len() {
            return Err(Error::Io(format!("expected {} columns, found {}", COLUMNS.len(), r.len())));
        }
        fn field<T: std::str::FromStr>(r: &csv::StringRecord, i: usize) -> Result<T> {
            r[i].trim()
                .parse()
                .map_err(|_| Error::Io(format!("bad value {:?} in column {}", &r[i], COLUMNS[i])))
        }
        Ok(Self {
            snr_db: field(r, 0)?,
            estimator: field(r, 1)?,
            bits: field(r, 2)?,
            chains: field(r, 3)?,
            frames: field(r, 4)?,
            n_paths: field(r, 5)?,
            mean_nmse: field(r, 6)?,
            mean_nmse_db: field(r, 7)?,
            stderr: field(r, 8)?,
            stderr_db: field(r, 9)?,
            n_trials: field(r, 10)?,
            failed_trials: field(r, 11)?,
            seed: field(r, 12)?,
            status: r[13].to_string(),
        })
    }
}

fn status_label(s: &PointStatus) -> &'static str {
    match s {
        PointStatus::Ok => "ok",
        PointStatus::Partial { .. } => "partial",
        PointStatus::Failed => "failed",
    }
}

/// Run metadata: every fixed parameter, the sweep axes, the SNR convention
/// and the config hash.
pub fn metadata(cfg: &RunConfig, sweep: &SweepResult) -> Vec<(String, String)> {
    let p = &cfg.params;
    let list = |v: Vec<String>| format!("[{}]", v.join(", "));
    let opt = |v: Option<String>| v.unwrap_or_else(|| "auto".to_string());
    vec![
        ("preset", cfg.preset.map_or("custom".to_string(), |p| p.name().to_string())),
        ("config_hash", sweep.config_hash.clone()),
        ("snr_convention", sweep.snr_convention.clone()),
        ("n_trials", sweep.n_trials.to_string()),
        ("seed", cfg.seed.to_string()),
        ("n_tx", p.n_tx.to_string()),
        ("n_rx", p.n_rx.to_string()),
        ("grid_tx", p.grid_tx.to_string()),
        ("grid_rx", p.grid_rx.to_string()),
        ("n_taps", p.n_taps.to_string()),
        ("frame_len", p.frame_len.to_string()),
        ("n_streams", opt(p.n_streams.map(|x| x.to_string()))),
        ("ps_bits", p.ps_bits.to_string()),
        ("rolloff", format_sig(p.rolloff)),
        ("k_leak", p.k_leak.to_string()),
        ("clip_scale", opt(p.clip_scale.map(format_sig))),
        ("agc", p.agc.to_string()),
        ("noise_var", format_sig(p.noise_var)),
        ("snr_db", list(cfg.snr_db.iter().map(|x| format_sig(*x)).collect())),
        ("adc_bits", list(cfg.adc_bits.iter().map(|x| x.to_string()).collect())),
        ("n_frames", list(cfg.n_frames.iter().map(|x| x.to_string()).collect())),
        ("n_chains", list(cfg.n_chains.iter().map(|x| x.to_string()).collect())),
        ("n_paths", list(cfg.n_paths.iter().map(|x| x.to_string()).collect())),
        ("estimator", list(cfg.estimators.iter().map(|x| x.to_string()).collect())),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

pub fn render_csv(meta: &[(String, String)], rows: &[CsvRow]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    for (k, v) in meta {
        writeln!(buf, "# {k} = {v}")?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(COLUMNS)?;
        for r in rows {
            w.write_record(r.to_record())?;
        }
        w.flush()?;
    }
    Ok(buf)
}

/// Writes through a temporary file in the target directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

pub fn write_csv(path: &Path, meta: &[(String, String)], rows: &[CsvRow]) -> Result<()> {
    write_atomic(path, &render_csv(meta, rows)?)
}

pub fn read_csv(path: &Path) -> Result<(BTreeMap<String, String>, Vec<CsvRow>)> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<(BTreeMap<String, String>, Vec<CsvRow>)> {
    let mut meta = BTreeMap::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some((k, v)) = line.trim_start_matches('#').split_once('=') {
            meta.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::Io(format!("unexpected header {header:?}")));
    }
    let rows = rdr
        .records()
        .map(|r| CsvRow::from_record(&r?))
        .collect::<Result<Vec<_>>>()?;
    Ok((meta, rows))
}

fn axis_value(s: &TrialSpec, axis: Axis) -> String {
    match axis {
        Axis::SnrDb => format_sig(s.snr_db),
        Axis::Frames => s.n_frames.to_string(),
        Axis::Paths => s.n_paths.to_string(),
        Axis::Chains => s.n_chains.to_string(),
        Axis::Bits => s.adc_bits.to_string(),
    }
}

fn curve_label(s: &TrialSpec, x: Axis) -> String {
    let mut parts = vec![format!("estimator={}", s.estimator)];
    for a in [Axis::Bits, Axis::Chains, Axis::Frames, Axis::Paths, Axis::SnrDb] {
        if a != x {
            parts.push(format!("{}={}", a.name(), axis_value(s, a)));
        }
    }
    parts.join(" ")
}

/// Whitespace-separated blocks, one per curve, each headed by a `#` label
/// line and separated by two blank lines: `x mean_nmse_db stderr_db`.
pub fn render_plot_data(points: &[PointResult], x: Axis) -> String {
    let mut curves: Vec<(String, Vec<&PointResult>)> = Vec::new();
    for p in points {
        let label = curve_label(&p.spec, x);
        match curves.iter_mut().find(|(l, _)| *l == label) {
            Some((_, v)) => v.push(p),
            None => curves.push((label, vec![p])),
        }
    }
    let mut out = String::new();
    for (i, (label, pts)) in curves.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        let _ = writeln!(out, "# {label}");
        let _ = writeln!(out, "# {} mean_nmse_db stderr_db", x.name());
        for p in pts {
            let _ = writeln!(
                out,
                "{} {} {}",
                axis_value(&p.spec, x),
                format_sig(p.mean_nmse_db),
                format_sig(p.stderr_db)
            );
        }
    }
    out
}

/// Horizontal axis for a configuration: the preset's, else the first axis with several values.
pub fn default_x_axis(cfg: &RunConfig) -> Axis {
    if let Some(p) = cfg.preset {
        return p.x_axis();
    }
    [
        (Axis::SnrDb, cfg.snr_db.len()),
        (Axis::Frames, cfg.n_frames.len()),
        (Axis::Paths, cfg.n_paths.len()),
        (Axis::Chains, cfg.n_chains.len()),
        (Axis::Bits, cfg.adc_bits.len()),
    ]
    .into_iter()
    .find(|(_, n)| *n > 1)
    .map_or(Axis::SnrDb, |(a, _)| a)
}

/// Human-readable listing of the grid for a dry run.
pub fn describe_grid(cfg: &RunConfig) -> String {
    let grid = cfg.grid();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} points x {} trials = {} trials, seed {}",
        grid.len(),
        cfg.n_trials,
        grid.len() * cfg.n_trials,
        cfg.seed
    );
    for (i, s) in grid.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i:4}  estimator={} bits={} chains={} frames={} n_paths={} snr_db={} obs={}",
            s.estimator,
            s.adc_bits,
            s.n_chains,
            s.n_frames,
            s.n_paths,
            s.snr_db,
            s.n_observations()
        );
    }
    out
}

/// Per-tap virtual-channel magnitudes as `tap,rx_bin,tx_bin,magnitude` rows.
pub fn render_virtual_channel(taps: &[Mat<f64>]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["tap", "rx_bin", "tx_bin", "magnitude"])?;
        for (d, m) in taps.iter().enumerate() {
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    w.write_record([d.to_string(), i.to_string(), j.to_string(), format_sig(m[(i, j)])])?;
                }
            }
        }
        w.flush()?;
    }
    Ok(buf)
}
