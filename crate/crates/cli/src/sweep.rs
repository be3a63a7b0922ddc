//! Gibbs-state recovery sweep over (L, h_z, configuration, β).

use std::time::Instant;

use rayon::prelude::*;
use thermopetz::petz::{recovery_report_with_sqrt, RecoveryReport};
use thermopetz::spinchain::{build_hamiltonian_capped, ChainParams};
use thermopetz::thermal::ThermalFamily;

use crate::config::SweepConfig;
use crate::error::{CliError, Result};
use crate::output::{num, Schema};
use crate::RunOptions;

pub const SCHEMA: Schema = Schema {
    name: "sweep",
    columns: &[
        "L",
        "h_z",
        "beta",
        "configuration",
        "cmi_bits",
        "fidelity",
        "trace_distance",
        "opnorm_distance",
        "fr_bound_margin",
        "figbound_margin",
        "recovered_trace",
        "wall_time_s",
    ],
};

/// Slack on the fidelity and operator-norm bound margins.
pub const MARGIN_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub sites: usize,
    pub h_z: f64,
    pub beta: f64,
    pub configuration: String,
    pub report: RecoveryReport,
    /// Zero unless timing was requested.
    pub wall_time_s: f64,
}

impl SweepRecord {
    pub fn row(&self) -> Vec<String> {
        let r = &self.report;
        vec![
            self.sites.to_string(),
            num(self.h_z),
            num(self.beta),
            self.configuration.clone(),
            num(r.cmi),
            num(r.fidelity),
            num(r.trace_distance),
            num(r.opnorm_distance),
            num(r.fr_bound_margin),
            num(r.figbound_margin),
            num(r.recovered_trace),
            num(self.wall_time_s),
        ]
    }

    pub fn violates_bounds(&self) -> bool {
        self.report.fr_bound_margin < -MARGIN_TOL || self.report.figbound_margin < -MARGIN_TOL
    }
}

/// Runs the sweep. Rows come back sorted by (L, h_z, configuration, β); each
/// Hamiltonian is diagonalized once and reused across its β grid.
pub fn run(cfg: &SweepConfig, opts: &RunOptions) -> Result<Vec<SweepRecord>> {
    cfg.validate(opts.max_l)?;
    let betas = cfg.beta.points()?;
    let mut sites = cfg.sites.clone();
    sites.sort_unstable();
    sites.dedup();
    let mut fields = cfg.h_z.clone();
    fields.sort_by(f64::total_cmp);
    fields.dedup();
    let mut names = cfg.configurations.clone();
    names.sort();
    names.dedup();

    let mut records = Vec::new();
    for &l in &sites {
        let partitions = names
            .iter()
            .map(|n| Ok((n.clone(), cfg.partition(n, l)?)))
            .collect::<Result<Vec<_>>>()?;
        let families = fields
            .par_iter()
            .map(|&h| {
                let params = ChainParams::new(l, cfg.alpha, h, cfg.j_x);
                let ham = build_hamiltonian_capped(&params, opts.max_l)?;
                Ok(ThermalFamily::new(&ham, vec![2; l])?)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut tasks: Vec<(usize, usize, f64)> = Vec::new();
        for i in 0..fields.len() {
            for j in 0..partitions.len() {
                tasks.extend(betas.iter().map(|&b| (i, j, b)));
            }
        }
        let rows = tasks
            .par_iter()
            .map(|&(i, j, beta)| {
                let start = Instant::now();
                let family = &families[i];
                let rho = family.state(beta)?;
                let sqrt_rho = family.sqrt_state(beta)?;
                let report = recovery_report_with_sqrt(&rho, &sqrt_rho, &partitions[j].1, cfg.lambda)?;
                let wall_time_s = if opts.timing { start.elapsed().as_secs_f64() } else { 0.0 };
                Ok(SweepRecord {
                    sites: l,
                    h_z: fields[i],
                    beta,
                    configuration: partitions[j].0.clone(),
                    report,
                    wall_time_s,
                })
            })
            .collect::<std::result::Result<Vec<_>, thermopetz::Error>>()
            .map_err(CliError::from)?;
        records.extend(rows);
    }
    Ok(records)
}

pub fn rows(records: &[SweepRecord]) -> Vec<Vec<String>> {
    records.iter().map(SweepRecord::row).collect()
}

/// Error for the first record breaking a bound, if any.
pub fn check(records: &[SweepRecord]) -> Result<()> {
    let bad: Vec<&SweepRecord> = records.iter().filter(|r| r.violates_bounds()).collect();
    match bad.first() {
        None => Ok(()),
        Some(r) => Err(CliError::Violation(format!(
            "{} of {} sweep points break a bound; first at L={} h_z={} β={} {}: fr margin {:.3e}, op-norm margin {:.3e}",
            bad.len(),
            records.len(),
            r.sites,
            r.h_z,
            r.beta,
            r.configuration,
            r.report.fr_bound_margin,
            r.report.figbound_margin
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::BetaGrid;

    fn small() -> SweepConfig {
        SweepConfig {
            sites: vec![5],
            h_z: vec![0.0, -0.5],
            configurations: vec!["nonpermuted".into()],
            beta: BetaGrid::list(vec![1.0, 0.0, 10.0]),
            ..SweepConfig::default()
        }
    }

    #[test]
    fn rows_are_sorted_and_complete() {
        let recs = run(&small(), &RunOptions::default()).unwrap();
        assert_eq!(recs.len(), 6);
        let keys: Vec<(f64, f64)> = recs.iter().map(|r| (r.h_z, r.beta)).collect();
        assert_eq!(keys, vec![(-0.5, 0.0), (-0.5, 1.0), (-0.5, 10.0), (0.0, 0.0), (0.0, 1.0), (0.0, 10.0)]);
        assert!(recs.iter().all(|r| r.wall_time_s == 0.0));
        check(&recs).unwrap();
    }

    #[test]
    fn zero_beta_row_is_exact() {
        let recs = run(&small(), &RunOptions::default()).unwrap();
        let r = &recs[0].report;
        assert!(r.cmi.abs() < 1e-10);
        assert!((r.fidelity - 1.0).abs() < 1e-10);
    }

    #[test]
    fn resource_cap() {
        let cfg = SweepConfig { sites: vec![10], ..small() };
        let opts = RunOptions { max_l: 9, ..RunOptions::default() };
        assert!(matches!(run(&cfg, &opts), Err(CliError::Resource(_))));
    }
}
