//! TOML run configuration. Every field has a default, so an empty file (or
//! no file) reproduces the reference parameters: α = 1, J_x = 1.05,
//! h_z ∈ {−0.5, 0}, L = 8, both block configurations, 40 geometric β points
//! on [1e-2, 1e2].

use std::path::Path;

use serde::Deserialize;
use thermopetz::hilbert::Partition;
use thermopetz::spectral::{Sector, DEFAULT_BINS, DEFAULT_POLY_DEGREE, DEFAULT_WINDOW};
use thermopetz::spinchain::DEFAULT_MAX_SITES;
use thermopetz::thermal::{geometric_grid, linear_grid};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub max_l: usize,
    /// Worker threads; 0 lets the pool choose.
    pub workers: usize,
    pub sweep: SweepConfig,
    pub rbm: RbmConfig,
    pub spectrum: SpectrumConfig,
    pub bounds: BoundsConfig,
    pub paper: PaperConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            max_l: DEFAULT_MAX_SITES,
            workers: 0,
            sweep: SweepConfig::default(),
            rbm: RbmConfig::default(),
            spectrum: SpectrumConfig::default(),
            bounds: BoundsConfig::default(),
            paper: PaperConfig::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Geometric,
    Linear,
    List,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct BetaGrid {
    pub kind: GridKind,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    /// Explicit values for `kind = "list"`.
    pub values: Vec<f64>,
}

impl Default for BetaGrid {
    fn default() -> Self {
        Self { kind: GridKind::Geometric, min: 1e-2, max: 1e2, count: 40, values: Vec::new() }
    }
}

impl BetaGrid {
    pub fn list(values: Vec<f64>) -> Self {
        Self { kind: GridKind::List, values, ..Self::default() }
    }

    /// Grid points in ascending order.
    pub fn points(&self) -> Result<Vec<f64>> {
        let mut pts = match self.kind {
            GridKind::Geometric => {
                if !(self.min > 0.0 && self.max >= self.min) {
                    return Err(CliError::Config(format!(
                        "geometric β grid needs 0 < min ≤ max, got [{}, {}]",
                        self.min, self.max
                    )));
                }
                geometric_grid(self.min, self.max, self.count)
            }
            GridKind::Linear => {
                if !(self.min >= 0.0 && self.max >= self.min) {
                    return Err(CliError::Config(format!(
                        "linear β grid needs 0 ≤ min ≤ max, got [{}, {}]",
                        self.min, self.max
                    )));
                }
                linear_grid(self.min, self.max, self.count)
            }
            GridKind::List => self.values.clone(),
        };
        if pts.is_empty() {
            return Err(CliError::Config("β grid is empty".into()));
        }
        if let Some(b) = pts.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
            return Err(CliError::Config(format!("β must be finite and ≥ 0, got {b}")));
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Ok(pts)
    }
}

/// A named block assignment. Blocks index positions after `permutation`
/// is applied; permuted position `p` holds original site `permutation[p]`.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CustomConfiguration {
    pub name: String,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
    #[serde(default)]
    pub permutation: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub alpha: f64,
    pub j_x: f64,
    pub h_z: Vec<f64>,
    pub sites: Vec<usize>,
    pub beta: BetaGrid,
    /// Built-in names `nonpermuted` and `permuted`, or names of `custom` entries.
    pub configurations: Vec<String>,
    pub custom: Vec<CustomConfiguration>,
    pub lambda: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            j_x: 1.05,
            h_z: vec![-0.5, 0.0],
            sites: vec![8],
            beta: BetaGrid::default(),
            configurations: vec!["nonpermuted".into(), "permuted".into()],
            custom: Vec::new(),
            lambda: 0.0,
        }
    }
}

impl SweepConfig {
    /// Resolves a configuration name to a partition of an `sites`-site chain.
    pub fn partition(&self, name: &str, sites: usize) -> Result<Partition> {
        match name {
            "nonpermuted" => Ok(Partition::chain(sites)?),
            "permuted" if sites == 8 => Ok(Partition::permuted_eight()),
            "permuted" => Err(CliError::Config(format!(
                "the built-in permuted configuration is defined for 8 sites, not {sites}; use a custom entry"
            ))),
            _ => {
                let c = self
                    .custom
                    .iter()
                    .find(|c| c.name == name)
                    .ok_or_else(|| CliError::Config(format!("unknown configuration {name:?}")))?;
                let perm = c.permutation.clone().unwrap_or_else(|| (0..sites).collect());
                Ok(Partition::with_permutation(vec![2; sites], c.a.clone(), c.b.clone(), c.c.clone(), perm)?)
            }
        }
    }

    pub fn validate(&self, max_l: usize) -> Result<()> {
        if self.h_z.is_empty() || self.sites.is_empty() || self.configurations.is_empty() {
            return Err(CliError::Config("sweep needs at least one h_z, one L and one configuration".into()));
        }
        if !self.lambda.is_finite() || !self.alpha.is_finite() || !self.j_x.is_finite() {
            return Err(CliError::Config("sweep parameters must be finite".into()));
        }
        if self.h_z.iter().any(|h| !h.is_finite()) {
            return Err(CliError::Config("h_z values must be finite".into()));
        }
        self.beta.points()?;
        for &l in &self.sites {
            if l > max_l {
                return Err(thermopetz::Error::Resource {
                    sites: l,
                    max_sites: max_l,
                    bytes: thermopetz::spinchain::dense_bytes(l),
                }
                .into());
            }
            for name in &self.configurations {
                self.partition(name, l)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RbmConfig {
    pub dims: [usize; 3],
    pub beta: f64,
    pub offset: f64,
    /// Band strengths `D`, evaluated in the given order for every seed.
    pub strengths: Vec<f64>,
    /// Number of seeds; instance `i` uses `seed + i`.
    pub seeds: usize,
}

impl Default for RbmConfig {
    fn default() -> Self {
        Self { dims: [2, 2, 2], beta: 1.0, offset: 0.0, strengths: vec![1e-2, 5e-3, 2.5e-3, 1e-3], seeds: 20 }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub alpha: f64,
    pub j_x: f64,
    pub h_z: Vec<f64>,
    pub sites: Vec<usize>,
    pub sectors: Vec<SectorName>,
    pub window: [f64; 2],
    pub poly_degree: usize,
    pub bins: usize,
    /// Upper edge of the spacing histogram.
    pub hist_max: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            j_x: 1.05,
            h_z: vec![-0.5, 0.0],
            sites: vec![12],
            sectors: vec![SectorName::Even],
            window: [DEFAULT_WINDOW.0, DEFAULT_WINDOW.1],
            poly_degree: DEFAULT_POLY_DEGREE,
            bins: DEFAULT_BINS,
            hist_max: 4.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SectorName {
    Even,
    Odd,
}

impl From<SectorName> for Sector {
    fn from(s: SectorName) -> Self {
        match s {
            SectorName::Even => Sector::Even,
            SectorName::Odd => Sector::Odd,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    /// Randomized instances per lemma; instance `i` uses `seed + i`.
    pub instances: usize,
    pub lemmas: Vec<u8>,
    pub min_qubits: usize,
    pub max_qubits: usize,
    pub lemma4_betas: Vec<f64>,
    pub lemma4_instances: usize,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            instances: 100,
            lemmas: vec![1, 2, 3, 4],
            min_qubits: 3,
            max_qubits: 6,
            lemma4_betas: vec![0.01, 0.05, 0.1],
            lemma4_instances: 5,
        }
    }
}

/// Extra grids run only by the `paper` meta-command; everything else about
/// those sweeps comes from `[sweep]`.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PaperConfig {
    /// Chain lengths of the size-comparison sweep (chaotic point, contiguous split).
    pub sizes: Vec<usize>,
    /// Field values of the (β, h_z) heatmap.
    pub heatmap_h_z: Vec<f64>,
    pub heatmap_beta: BetaGrid,
}

impl Default for PaperConfig {
    fn default() -> Self {
        Self {
            sizes: vec![6, 8, 10],
            heatmap_h_z: (0..=10).map(|i| -1.0 + 0.1 * i as f64).collect(),
            heatmap_beta: BetaGrid { count: 20, ..BetaGrid::default() },
        }
    }
}
