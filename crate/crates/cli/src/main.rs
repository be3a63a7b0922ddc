use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thermopetz_cli::output::write_file;
use thermopetz_cli::{bounds, paper, rbm, spectrum, sweep, CliError, Config, Result, RunOptions};

#[derive(Parser)]
#[command(name = "thermopetz", version, about = "Petz recovery of thermal spin-chain states")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output CSV path, or output directory for `paper`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Largest chain length to build.
    #[arg(long = "max-L", global = true)]
    max_l: Option<usize>,

    /// Record wall time per sweep point (output is no longer reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// CMI, fidelity and distances of Petz-recovered Gibbs states over a grid.
    Sweep,
    /// Exact versus perturbative CMI of the random band matrix model.
    Rbm,
    /// Gap-ratio and spacing statistics within a parity sector.
    Spectrum,
    /// Randomized checks of the recovery-closeness lemmas.
    Bounds,
    /// Every table behind the figure set, plus a manifest.
    Paper,
}

fn out_path(cli: &Cli, default: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

/// `dir/stem_hist.csv` next to the spectrum output.
fn histogram_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("spectrum");
    path.with_file_name(format!("{stem}_hist.csv"))
}

fn execute(cli: &Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(m) = cli.max_l {
        cfg.max_l = m;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let opts = RunOptions { seed: cfg.seed, max_l: cfg.max_l, timing: cli.timing };

    match cli.command {
        Command::Sweep => {
            let recs = sweep::run(&cfg.sweep, &opts)?;
            let path = out_path(cli, "sweep.csv");
            write_file(&path, &sweep::SCHEMA, &sweep::rows(&recs))?;
            println!("wrote {} rows to {}", recs.len(), path.display());
            sweep::check(&recs)
        }
        Command::Rbm => {
            let res = rbm::run(&cfg.rbm, &opts)?;
            let path = out_path(cli, "rbm.csv");
            write_file(&path, &rbm::SCHEMA, &rbm::rows(&res))?;
            let (means, slope) = rbm::summary(&res, &cfg.rbm.strengths);
            for (d, e) in means {
                println!("D = {d:.3e}: mean |exact − perturbative| = {e:.3e}");
            }
            if let Some(s) = slope {
                println!("log-log error slope: {s:.3}");
            }
            println!("wrote {} rows to {}", res.len(), path.display());
            Ok(())
        }
        Command::Spectrum => {
            let recs = spectrum::run(&cfg.spectrum, &opts)?;
            let path = out_path(cli, "spectrum.csv");
            write_file(&path, &spectrum::SCHEMA, &spectrum::rows(&recs))?;
            let hist = spectrum::histogram_rows(&recs, cfg.spectrum.bins, cfg.spectrum.hist_max)?;
            let hpath = histogram_path(&path);
            write_file(&hpath, &spectrum::HISTOGRAM_SCHEMA, &hist)?;
            for r in &recs {
                println!(
                    "L={} h_z={} {}: <r> = {:.4}, KS(Wigner) = {:.4}, KS(Poisson) = {:.4}, {} levels",
                    r.sites,
                    r.h_z,
                    r.stats.sector.label(),
                    r.stats.gap_ratios.mean,
                    r.stats.ks_vs_wigner,
                    r.stats.ks_vs_poisson,
                    r.stats.retained_levels
                );
            }
            println!("wrote {} and {}", path.display(), hpath.display());
            Ok(())
        }
        Command::Bounds => {
            let recs = bounds::run(&cfg.bounds, &opts)?;
            let path = out_path(cli, "bounds.csv");
            write_file(&path, &bounds::SCHEMA, &bounds::rows(&recs))?;
            println!("wrote {} rows to {}", recs.len(), path.display());
            bounds::check(&recs)
        }
        Command::Paper => {
            let dir = out_path(cli, "paper_out");
            let m = paper::run(&cfg, &opts, &dir)?;
            println!("wrote {} tables and {} figure entries to {}", m.tables.len(), m.figure.len(), dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
