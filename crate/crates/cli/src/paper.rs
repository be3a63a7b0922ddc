//! The `paper` meta-command: runs every table behind the figure set into one
//! directory and writes `manifest.toml`, which maps each figure to its input
//! CSV, plot kind and row filter for the renderer.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::{write_file, SCHEMA_REVISION};
use crate::{bounds, rbm, spectrum, sweep, RunOptions};

pub const MANIFEST_NAME: &str = "manifest.toml";

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Manifest {
    pub schema_revision: u32,
    pub seed: u64,
    pub tables: BTreeMap<String, String>,
    pub figure: Vec<FigureEntry>,
}

/// One figure: `kind` is one of `beta_lines`, `beta_hz_heatmap`,
/// `spacing_hist`, `bound_check`.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct FigureEntry {
    pub id: String,
    pub kind: String,
    pub input: String,
    pub output: String,
    pub log_x: bool,
    pub y: Vec<String>,
    pub filter: BTreeMap<String, String>,
}

fn figure(id: &str, kind: &str, input: &str, y: &[&str], filter: &[(&str, &str)]) -> FigureEntry {
    FigureEntry {
        id: id.into(),
        kind: kind.into(),
        input: input.into(),
        output: format!("{id}.svg"),
        log_x: kind != "spacing_hist",
        y: y.iter().map(|s| s.to_string()).collect(),
        filter: filter.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
    }
}

pub fn manifest(seed: u64) -> Manifest {
    let tables = [
        ("sweep", "sweep.csv"),
        ("sweep_sizes", "sweep_sizes.csv"),
        ("sweep_heatmap", "sweep_heatmap.csv"),
        ("spectrum", "spectrum.csv"),
        ("spectrum_hist", "spectrum_hist.csv"),
        ("rbm", "rbm.csv"),
        ("bounds", "bounds.csv"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect();
    let chaotic = crate::output::num(-0.5);
    let integrable = crate::output::num(0.0);
    let lines = ["cmi_bits", "opnorm_distance"];
    let mut figs = vec![figure(
        "fig2_spacing",
        "spacing_hist",
        "spectrum_hist.csv",
        &["density"],
        &[("h_z", &chaotic), ("sector", "even")],
    )];
    figs.push(figure("fig3_sizes", "beta_lines", "sweep_sizes.csv", &["cmi_bits"], &[]));
    for (tag, conf) in [("nonpermuted", "nonpermuted"), ("permuted", "permuted")] {
        for (phase, h) in [("chaotic", &chaotic), ("integrable", &integrable)] {
            figs.push(figure(
                &format!("fig4_{tag}_{phase}"),
                "beta_lines",
                "sweep.csv",
                &lines,
                &[("configuration", conf), ("h_z", h)],
            ));
        }
        figs.push(figure(&format!("fig5_{tag}_opnorm"), "beta_lines", "sweep.csv", &["opnorm_distance"], &[("configuration", conf)]));
        figs.push(figure(&format!("fig5_{tag}_cmi"), "beta_lines", "sweep.csv", &["cmi_bits"], &[("configuration", conf)]));
    }
    for (phase, h) in [("chaotic", &chaotic), ("integrable", &integrable)] {
        figs.push(figure(
            &format!("fig6_bound_{phase}"),
            "bound_check",
            "sweep.csv",
            &["cmi_bits", "opnorm_distance"],
            &[("configuration", "nonpermuted"), ("h_z", h)],
        ));
    }
    figs.push(figure("fig7_fidelity", "beta_lines", "sweep.csv", &["fidelity", "fr_bound_margin"], &[]));
    figs.push(figure("fig9_heatmap_cmi", "beta_hz_heatmap", "sweep_heatmap.csv", &["cmi_bits"], &[]));
    figs.push(figure("fig9_heatmap_opnorm", "beta_hz_heatmap", "sweep_heatmap.csv", &["opnorm_distance"], &[]));
    Manifest { schema_revision: SCHEMA_REVISION, seed, tables, figure: figs }
}

/// Sweep variants derived from the base configuration.
pub fn size_sweep(cfg: &Config) -> crate::config::SweepConfig {
    crate::config::SweepConfig {
        sites: cfg.paper.sizes.clone(),
        h_z: vec![-0.5],
        configurations: vec!["nonpermuted".into()],
        ..cfg.sweep.clone()
    }
}

pub fn heatmap_sweep(cfg: &Config) -> crate::config::SweepConfig {
    crate::config::SweepConfig {
        h_z: cfg.paper.heatmap_h_z.clone(),
        configurations: vec!["nonpermuted".into()],
        beta: cfg.paper.heatmap_beta.clone(),
        ..cfg.sweep.clone()
    }
}

/// Writes every table and the manifest. Bound violations are reported after
/// all outputs exist.
pub fn run(cfg: &Config, opts: &RunOptions, dir: &Path) -> Result<Manifest> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut violations = Vec::new();

    let main = sweep::run(&cfg.sweep, opts)?;
    write_file(&dir.join("sweep.csv"), &sweep::SCHEMA, &sweep::rows(&main))?;
    violations.extend(sweep::check(&main).err());

    let sizes = sweep::run(&size_sweep(cfg), opts)?;
    write_file(&dir.join("sweep_sizes.csv"), &sweep::SCHEMA, &sweep::rows(&sizes))?;
    violations.extend(sweep::check(&sizes).err());

    let heat = sweep::run(&heatmap_sweep(cfg), opts)?;
    write_file(&dir.join("sweep_heatmap.csv"), &sweep::SCHEMA, &sweep::rows(&heat))?;
    violations.extend(sweep::check(&heat).err());

    let spec = spectrum::run(&cfg.spectrum, opts)?;
    write_file(&dir.join("spectrum.csv"), &spectrum::SCHEMA, &spectrum::rows(&spec))?;
    let hist = spectrum::histogram_rows(&spec, cfg.spectrum.bins, cfg.spectrum.hist_max)?;
    write_file(&dir.join("spectrum_hist.csv"), &spectrum::HISTOGRAM_SCHEMA, &hist)?;

    let band = rbm::run(&cfg.rbm, opts)?;
    write_file(&dir.join("rbm.csv"), &rbm::SCHEMA, &rbm::rows(&band))?;

    let lemmas = bounds::run(&cfg.bounds, opts)?;
    write_file(&dir.join("bounds.csv"), &bounds::SCHEMA, &bounds::rows(&lemmas))?;
    violations.extend(bounds::check(&lemmas).err());

    let m = manifest(opts.seed);
    let text = toml::to_string(&m).map_err(|e| CliError::Config(format!("manifest serialization: {e}")))?;
    let path = dir.join(MANIFEST_NAME);
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;

    match violations.into_iter().next() {
        Some(v) => Err(v),
        None => Ok(m),
    }
}
