//! Exact versus second-order CMI of the random band matrix model.

use rayon::prelude::*;
use thermopetz::rbm::{compare_with, fit_slope, sample_band_matrix, BandComparison, BandModel};

use crate::config::RbmConfig;
use crate::error::{CliError, Result};
use crate::output::{num, Schema};
use crate::RunOptions;

pub const SCHEMA: Schema = Schema {
    name: "rbm",
    columns: &[
        "seed",
        "dims",
        "beta",
        "D",
        "exact_cmi",
        "perturbative_cmi",
        "paper_formula_cmi",
        "abs_error",
        "fidelity",
        "fr_bound_margin",
    ],
};

pub fn dims_label(dims: [usize; 3]) -> String {
    format!("{}x{}x{}", dims[0], dims[1], dims[2])
}

pub fn row(c: &BandComparison) -> Vec<String> {
    let m = &c.model;
    vec![
        m.seed.to_string(),
        dims_label(m.dims),
        num(m.beta),
        num(m.strength),
        num(c.exact_cmi),
        num(c.perturbative.bits),
        num(c.perturbative.paper_formula_bits),
        num(c.abs_error),
        num(c.recovery.fidelity),
        num(c.recovery.fr_bound_margin),
    ]
}

/// One comparison per (seed, D), seeds ascending and D in configured order.
pub fn run(cfg: &RbmConfig, opts: &RunOptions) -> Result<Vec<BandComparison>> {
    if cfg.strengths.is_empty() {
        return Err(CliError::Config("rbm needs at least one strength D".into()));
    }
    let base = BandModel::new(cfg.dims, cfg.offset, 0.0, cfg.beta, opts.seed)?;
    for &d in &cfg.strengths {
        base.with_strength(d)?;
    }
    let seeds: Vec<u64> = (0..cfg.seeds as u64).map(|i| opts.seed.wrapping_add(i)).collect();
    let per_seed = seeds
        .par_iter()
        .map(|&seed| {
            let model = base.with_seed(seed);
            let r = sample_band_matrix(model.dim(), seed)?;
            cfg.strengths.iter().map(|&d| compare_with(&r, &model.with_strength(d)?)).collect::<thermopetz::Result<Vec<_>>>()
        })
        .collect::<thermopetz::Result<Vec<_>>>()?;
    Ok(per_seed.into_iter().flatten().collect())
}

/// Seed-averaged absolute error per D, and the log-log slope of the averages.
pub fn summary(results: &[BandComparison], strengths: &[f64]) -> (Vec<(f64, f64)>, Option<f64>) {
    let means: Vec<(f64, f64)> = strengths
        .iter()
        .map(|&d| {
            let errs: Vec<f64> = results.iter().filter(|c| c.model.strength == d).map(|c| c.abs_error).collect();
            (d, errs.iter().sum::<f64>() / errs.len().max(1) as f64)
        })
        .collect();
    let slope = fit_slope(means.iter().copied());
    (means, slope)
}

pub fn rows(results: &[BandComparison]) -> Vec<Vec<String>> {
    results.iter().map(row).collect()
}
