//! Level statistics within a parity sector: gap ratios, polynomial unfolding,
//! Wigner-surmise and Poisson comparisons.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::random;
use crate::spinchain::{sector_hamiltonians, ChainParams};

/// `2 ln 2 − 1`, mean gap ratio of uncorrelated levels.
pub const POISSON_MEAN_RATIO: f64 = 2.0 * std::f64::consts::LN_2 - 1.0;
/// Large-dimension GOE mean gap ratio, for display only. Acceptance checks
/// use [`goe_reference_ratio`].
pub const GOE_MEAN_RATIO: f64 = 0.5307;
pub const DEFAULT_WINDOW: (f64, f64) = (0.25, 0.75);
pub const DEFAULT_POLY_DEGREE: usize = 7;
pub const DEFAULT_BINS: usize = 30;
pub const MIN_RATIO_LEVELS: usize = 12;
pub const MIN_UNFOLD_LEVELS: usize = 50;
const DEGENERATE_GAP: f64 = 1e-12;
const MAX_CONDITION: f64 = 1e12;

/// Sorted eigenvalues and the fractional window of them kept for statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSample {
    eigenvalues: Vec<f64>,
    window: (f64, f64),
}

impl SpectrumSample {
    pub fn new(mut eigenvalues: Vec<f64>, window: (f64, f64)) -> Result<Self> {
        let (lo, hi) = window;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
            return Err(Error::Statistics(format!("window ({lo}, {hi}) must satisfy 0 ≤ low < high ≤ 1")));
        }
        if eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::Statistics("non-finite eigenvalue".into()));
        }
        eigenvalues.sort_by(f64::total_cmp);
        Ok(Self { eigenvalues, window })
    }

    pub fn middle_half(eigenvalues: Vec<f64>) -> Result<Self> {
        Self::new(eigenvalues, DEFAULT_WINDOW)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    /// Levels with sorted index in `[round(low·n), round(high·n))`.
    pub fn retained(&self) -> &[f64] {
        let n = self.eigenvalues.len() as f64;
        let lo = (self.window.0 * n).round() as usize;
        let hi = (self.window.1 * n).round() as usize;
        &self.eigenvalues[lo..hi.max(lo)]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapRatios {
    pub ratios: Vec<f64>,
    pub mean: f64,
    /// Consecutive gap pairs dropped because both gaps were degenerate.
    pub skipped: usize,
}

/// `r_n = min(s_n, s_{n+1}) / max(s_n, s_{n+1})` over the retained levels.
pub fn spacing_ratios(sample: &SpectrumSample) -> Result<GapRatios> {
    let levels = sample.retained();
    if levels.len() < MIN_RATIO_LEVELS {
        return Err(Error::Statistics(format!(
            "gap ratios need at least {MIN_RATIO_LEVELS} levels, window retains {}",
            levels.len()
        )));
    }
    let gaps: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let floor = DEGENERATE_GAP * mean_gap;
    let mut ratios = Vec::with_capacity(gaps.len() - 1);
    let mut skipped = 0;
    for w in gaps.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a <= floor && b <= floor {
            skipped += 1;
            continue;
        }
        ratios.push(a.min(b) / a.max(b));
    }
    if ratios.is_empty() {
        return Err(Error::Statistics("every gap pair is degenerate".into()));
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(GapRatios { ratios, mean, skipped })
}

/// Fits the cumulative level count `N(E)` on the retained levels with a
/// polynomial of the given degree and returns consecutive differences of the
/// fitted staircase.
///
/// The fit is done in a Chebyshev basis on energies rescaled to `[−1, 1]`,
/// solved by SVD; a basis condition number above 1e12 is an error.
pub fn unfolded_spacings(sample: &SpectrumSample, degree: usize) -> Result<Vec<f64>> {
    let levels = sample.retained();
    let n = levels.len();
    if n < MIN_UNFOLD_LEVELS {
        return Err(Error::Statistics(format!("unfolding needs at least {MIN_UNFOLD_LEVELS} levels, window retains {n}")));
    }
    if degree == 0 || degree >= n {
        return Err(Error::Statistics(format!("polynomial degree {degree} invalid for {n} levels")));
    }
    let (lo, hi) = (levels[0], levels[n - 1]);
    if hi <= lo {
        return Err(Error::Statistics("retained window has zero width".into()));
    }
    let scale = |e: f64| (2.0 * e - lo - hi) / (hi - lo);
    let basis = DMatrix::<f64>::from_fn(n, degree + 1, |i, k| chebyshev(k, scale(levels[i])));
    let counts = DVector::<f64>::from_fn(n, |i, _| i as f64);

    let svd = basis.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::Fit { condition });
    }
    let coef = svd
        .solve(&counts, 0.0)
        .map_err(|e| Error::Statistics(format!("least-squares solve failed: {e}")))?;
    let fitted = basis * coef;
    Ok(fitted.as_slice().windows(2).map(|w| w[1] - w[0]).collect())
}

fn chebyshev(k: usize, x: f64) -> f64 {
    let (mut t0, mut t1) = (1.0, x);
    match k {
        0 => t0,
        1 => t1,
        _ => {
            for _ in 1..k {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
            t1
        }
    }
}

/// GOE Wigner surmise `(πs/2) e^{−πs²/4}`.
pub fn wigner_surmise(s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Statistics(format!("spacing must be ≥ 0, got {s}")));
    }
    let q = std::f64::consts::FRAC_PI_4;
    Ok(2.0 * q * s * (-q * s * s).exp())
}

pub fn wigner_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        1.0 - (-std::f64::consts::FRAC_PI_4 * s * s).exp()
    }
}

pub fn poisson_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        1.0 - (-s).exp()
    }
}

/// Two-sided Kolmogorov–Smirnov distance between the empirical CDF of
/// `samples` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Counts normalized so the histogram integrates to the fraction of
    /// samples inside the range.
    pub density: Vec<f64>,
}

/// Equal-width bins on `[0, max]`; samples outside are not counted.
pub fn histogram(samples: &[f64], bins: usize, max: f64) -> Result<Histogram> {
    if bins == 0 || !(max > 0.0) {
        return Err(Error::Statistics(format!("histogram needs bins > 0 and max > 0, got {bins}, {max}")));
    }
    let width = max / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in samples {
        if (0.0..=max).contains(&x) {
            counts[((x / width) as usize).min(bins - 1)] += 1;
        }
    }
    let total = samples.len().max(1) as f64;
    let density = counts.iter().map(|&c| c as f64 / (total * width)).collect();
    let edges = (0..=bins).map(|i| i as f64 * width).collect();
    Ok(Histogram { edges, counts, density })
}

/// Mean middle-50% gap ratio over `samples` GOE matrices of dimension `dim`.
pub fn goe_reference_ratio(dim: usize, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = random::rng(seed);
    let mut all = Vec::new();
    for _ in 0..samples {
        let values = random::goe(dim, &mut rng).symmetric_eigenvalues().as_slice().to_vec();
        all.extend(spacing_ratios(&SpectrumSample::middle_half(values)?)?.ratios);
    }
    if all.is_empty() {
        return Err(Error::Statistics("no GOE samples".into()));
    }
    Ok(all.iter().sum::<f64>() / all.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sector {
    Even,
    Odd,
}

impl Sector {
    pub fn label(self) -> &'static str {
        match self {
            Sector::Even => "even",
            Sector::Odd => "odd",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorStatistics {
    pub sector: Sector,
    pub sector_dim: usize,
    pub retained_levels: usize,
    pub gap_ratios: GapRatios,
    pub unfolded: Vec<f64>,
    pub ks_vs_wigner: f64,
    pub ks_vs_poisson: f64,
}

/// Diagonalizes one parity block of the chain and computes its statistics.
pub fn sector_statistics(
    params: &ChainParams,
    sector: Sector,
    window: (f64, f64),
    degree: usize,
    max_sites: usize,
) -> Result<SectorStatistics> {
    let (even, odd) = sector_hamiltonians(params, max_sites)?;
    let block = match sector {
        Sector::Even => even,
        Sector::Odd => odd,
    };
    let values = block.symmetric_eigenvalues().as_slice().to_vec();
    statistics_of(values, sector, window, degree)
}

pub fn statistics_of(values: Vec<f64>, sector: Sector, window: (f64, f64), degree: usize) -> Result<SectorStatistics> {
    let sector_dim = values.len();
    let sample = SpectrumSample::new(values, window)?;
    let gap_ratios = spacing_ratios(&sample)?;
    let unfolded = unfolded_spacings(&sample, degree)?;
    Ok(SectorStatistics {
        sector,
        sector_dim,
        retained_levels: sample.retained().len(),
        gap_ratios,
        ks_vs_wigner: ks_distance(&unfolded, wigner_cdf),
        ks_vs_poisson: ks_distance(&unfolded, poisson_cdf),
        unfolded,
    })
}
