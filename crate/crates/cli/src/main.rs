use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use mmw_chanest::config::RunConfig;
use mmw_chanest::experiments::{dump_virtual_channel, run_sweep, trial_channel, trial_dictionary, SweepOptions};
use mmw_chanest::presets::Preset;
use mmw_chanest::report;

/// Monte Carlo NMSE sweeps for wideband mmWave channel estimation.
#[derive(Debug, Parser)]
#[command(name = "mmw-chanest", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Named study: fig3_ls_vs_omp, fig4_frames_chains, fig5_frames_infbit, fig6_frames_bits, fig7_sparsity.
    #[arg(long, value_name = "NAME")]
    preset: Option<Preset>,
    /// Trials per grid point.
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
    /// Base seed; trial t of every point uses seed + t.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, value_name = "K")]
    parallel: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Print the resolved grid and exit.
    #[arg(long)]
    dry_run: bool,
    /// Override a config key, e.g. --set snr_db=[-20..15 step 5].
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Also write a whitespace-separated plot-data file.
    #[arg(long)]
    plot_data: bool,
    /// Average over successful trials instead of failing a point.
    #[arg(long)]
    skip_failures: bool,
    /// Write the virtual-channel magnitudes of the first point's first trial.
    #[arg(long)]
    dump_virtual_channel: bool,
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::from_toml_str(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(p) = cli.preset {
        let mut base = p.config();
        base.n_trials = cfg.n_trials;
        base.seed = cfg.seed;
        base.threads = cfg.threads;
        base.out_dir = cfg.out_dir.clone();
        base.params = cfg.params.clone();
        cfg = base;
    }
    for o in &cli.overrides {
        cfg.apply_override(o).with_context(|| format!("--set {o}"))?;
    }
    if let Some(n) = cli.trials {
        cfg.n_trials = n;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.parallel.is_some() {
        cfg.threads = cli.parallel;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    cfg.plot_data |= cli.plot_data;
    cfg.skip_failures |= cli.skip_failures;
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = resolve(cli)?;
    let grid = cfg.grid();
    let stem = cfg.preset.map_or("sweep".to_string(), |p| p.name().to_string());
    if cli.dry_run {
        print!("{}", report::describe_grid(&cfg));
        return Ok(true);
    }
    if cli.dump_virtual_channel {
        let spec = &grid[0];
        let mags = dump_virtual_channel(&trial_channel(spec)?, &trial_dictionary(spec)?)?;
        let path = cfg.out_dir.join(format!("virtual_channel_seed{}.csv", spec.seed));
        report::write_atomic(&path, &report::render_virtual_channel(&mags)?)?;
        println!("wrote {}", path.display());
    }
    let opts = SweepOptions {
        n_trials: cfg.n_trials,
        threads: cfg.threads,
        skip_failures: cfg.skip_failures,
    };
    eprintln!("running {} points x {} trials", grid.len(), cfg.n_trials);
    let sweep = run_sweep(&grid, &opts)?;
    let meta = report::metadata(&cfg, &sweep);
    for (k, v) in &meta {
        println!("{k} = {v}");
    }
    let rows: Vec<_> = sweep.points.iter().map(report::CsvRow::from_point).collect();
    let csv_path = cfg.out_dir.join(format!("{stem}.csv"));
    report::write_csv(&csv_path, &meta, &rows)?;
    println!("wrote {}", csv_path.display());
    if cfg.plot_data {
        let path = cfg.out_dir.join(format!("{stem}.dat"));
        let text = report::render_plot_data(&sweep.points, report::default_x_axis(&cfg));
        report::write_atomic(&path, text.as_bytes())?;
        println!("wrote {}", path.display());
    }
    let mut ok = true;
    for (i, p) in sweep.failed_points() {
        ok = false;
        eprintln!(
            "point {i} failed ({} of {} trials): {}",
            p.failures.len(),
            cfg.n_trials,
            p.failures.first().map_or("", String::as_str)
        );
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
