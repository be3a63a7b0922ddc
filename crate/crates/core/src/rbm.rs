//! Random band matrix model `H = O·I + D·R` with `R` a real symmetric
//! tridiagonal Gaussian matrix on `d = d_A d_B d_C`, and its second-order
//! expansion around the maximally mixed state.
//!
//! To first order `e^{−βH}/Z = I/d + D ρ₁` with `ρ₁ = −(β/d)(R − Tr R/d · I)`,
//! and every marginal entropy is `log d_X − (D²/2) d_X Tr(ρ₁,X²)` up to
//! `O(D³)`. Entropies are returned in bits.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hilbert::{partial_trace_matrix, Partition};
use crate::linops::{HermitianMatrix, NormKind};
use crate::petz::{recovery_report, RecoveryReport};
use crate::random;
use crate::thermal::{cmi, gibbs_state};

#[derive(Clone, Debug, PartialEq)]
pub struct BandModel {
    /// `(d_A, d_B, d_C)`.
    pub dims: [usize; 3],
    /// `O`, shifts the spectrum and drops out of every state.
    pub offset: f64,
    /// `D`.
    pub strength: f64,
    pub beta: f64,
    pub seed: u64,
}

impl BandModel {
    pub fn new(dims: [usize; 3], offset: f64, strength: f64, beta: f64, seed: u64) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::Parameter(format!("band model dims must be positive, got {dims:?}")));
        }
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(Error::Parameter(format!("band strength D must be finite and ≥ 0, got {strength}")));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::Parameter(format!("β must be finite and ≥ 0, got {beta}")));
        }
        if !offset.is_finite() {
            return Err(Error::Parameter(format!("offset must be finite, got {offset}")));
        }
        Ok(Self { dims, offset, strength, beta, seed })
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn with_strength(&self, strength: f64) -> Result<Self> {
        Self::new(self.dims, self.offset, strength, self.beta, self.seed)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn partition(&self) -> Result<Partition> {
        let [a, b, c] = self.dims;
        Partition::tripartite(a, b, c)
    }

    pub fn sample(&self) -> Result<HermitianMatrix> {
        sample_band_matrix(self.dim(), self.seed)
    }

    /// `O·I + D·R`.
    pub fn hamiltonian(&self, r: &HermitianMatrix) -> Result<HermitianMatrix> {
        self.check_dim(r)?;
        let shift = HermitianMatrix::identity(r.dim()).scale(self.offset);
        shift.add(&r.scale(self.strength))
    }

    /// `‖βD·R‖_∞ < 1`.
    pub fn expansion_valid(&self, r: &HermitianMatrix) -> bool {
        self.beta * self.strength * r.norm(NormKind::Operator) < 1.0
    }

    fn check_dim(&self, r: &HermitianMatrix) -> Result<()> {
        if r.dim() != self.dim() {
            return Err(Error::Shape(format!("band matrix {} vs model dimension {}", r.dim(), self.dim())));
        }
        Ok(())
    }
}

/// Real symmetric tridiagonal matrix with i.i.d. standard normal diagonal and
/// super-diagonal, drawn in row order from `ChaCha8(seed)`.
pub fn sample_band_matrix(d: usize, seed: u64) -> Result<HermitianMatrix> {
    if d < 2 {
        return Err(Error::Parameter(format!("band matrix dimension must be ≥ 2, got {d}")));
    }
    let mut rng = random::rng(seed);
    let mut r = DMatrix::<f64>::zeros(d, d);
    for m in 0..d {
        r[(m, m)] = rng.sample(StandardNormal);
        if m + 1 < d {
            let x: f64 = rng.sample(StandardNormal);
            r[(m, m + 1)] = x;
            r[(m + 1, m)] = x;
        }
    }
    HermitianMatrix::from_real(&r)
}

/// `ρ₁ = −(β/d)(R − Tr R/d · I)`.
pub fn first_order_term(r: &HermitianMatrix, model: &BandModel) -> Result<HermitianMatrix> {
    model.check_dim(r)?;
    let d = r.dim() as f64;
    Ok(r.traceless().scale(-model.beta / d))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbativeEntropy {
    pub bits: f64,
    /// `‖D·d_X·ρ₁,X‖_∞ < 1`.
    pub valid: bool,
}

/// `log₂ d_X − (D²/2) d_X Tr(ρ₁,X²)/ln 2`.
pub fn perturbative_entropy(rho1_marginal: &HermitianMatrix, dim_x: usize, strength: f64) -> Result<PerturbativeEntropy> {
    if rho1_marginal.dim() != dim_x {
        return Err(Error::Shape(format!("marginal {} vs dim_X {dim_x}", rho1_marginal.dim())));
    }
    let dx = dim_x as f64;
    let purity = rho1_marginal.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>();
    let bits = dx.log2() - 0.5 * strength * strength * dx * purity / std::f64::consts::LN_2;
    let valid = strength * dx * rho1_marginal.norm(NormKind::Operator) < 1.0;
    Ok(PerturbativeEntropy { bits, valid })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbativeCmi {
    /// From the second-order marginal form.
    pub bits: f64,
    /// The closed form written in terms of `R` marginals, evaluated literally:
    /// `(β²D²/2d²)[d_B Tr R_B² + d_B d Tr R² − d_AB Tr R_AB² − d_BC Tr R_BC²]`.
    pub paper_formula_bits: f64,
    pub valid: bool,
}

fn marginal_purity(m: &HermitianMatrix, dims: &[usize], keep: &[usize]) -> Result<f64> {
    let (reduced, _) = partial_trace_matrix(m.matrix(), dims, keep)?;
    Ok(reduced.iter().map(|z| z.norm_sqr()).sum())
}

/// `(D²/2)[d_B Tr ρ₁,B² + d Tr ρ₁² − d_AB Tr ρ₁,AB² − d_BC Tr ρ₁,BC²]`, in bits.
pub fn perturbative_cmi(r: &HermitianMatrix, model: &BandModel) -> Result<PerturbativeCmi> {
    let rho1 = first_order_term(r, model)?;
    let dims = model.dims.to_vec();
    let [da, db, dc] = model.dims.map(|x| x as f64);
    let d = da * db * dc;
    let weighted = |m: &HermitianMatrix| -> Result<[f64; 4]> {
        Ok([
            marginal_purity(m, &dims, &[1])?,
            marginal_purity(m, &dims, &[0, 1, 2])?,
            marginal_purity(m, &dims, &[0, 1])?,
            marginal_purity(m, &dims, &[1, 2])?,
        ])
    };
    let s = model.strength;
    let p = weighted(&rho1)?;
    let bits = 0.5 * s * s * (db * p[0] + d * p[1] - da * db * p[2] - db * dc * p[3]) / std::f64::consts::LN_2;

    let q = weighted(r)?;
    let pref = model.beta * model.beta * s * s / (2.0 * d * d);
    let paper_formula_bits = pref * (db * q[0] + db * d * q[1] - da * db * q[2] - db * dc * q[3]) / std::f64::consts::LN_2;

    Ok(PerturbativeCmi { bits, paper_formula_bits, valid: model.expansion_valid(r) })
}

/// Exact-diagonalization and perturbative results for one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct BandComparison {
    pub model: BandModel,
    pub exact_cmi: f64,
    pub perturbative: PerturbativeCmi,
    pub abs_error: f64,
    pub recovery: RecoveryReport,
}

pub fn exact_cmi(r: &HermitianMatrix, model: &BandModel) -> Result<f64> {
    let h = model.hamiltonian(r)?;
    let rho = gibbs_state(&h, model.beta, model.dims.to_vec())?;
    cmi(&rho, &model.partition()?)
}

pub fn compare(model: &BandModel) -> Result<BandComparison> {
    let r = model.sample()?;
    compare_with(&r, model)
}

pub fn compare_with(r: &HermitianMatrix, model: &BandModel) -> Result<BandComparison> {
    let h = model.hamiltonian(r)?;
    let rho = gibbs_state(&h, model.beta, model.dims.to_vec())?;
    let partition = model.partition()?;
    let recovery = recovery_report(&rho, &partition, 0.0)?;
    let perturbative = perturbative_cmi(r, model)?;
    Ok(BandComparison {
        model: model.clone(),
        exact_cmi: recovery.cmi,
        perturbative,
        abs_error: (recovery.cmi - perturbative.bits).abs(),
        recovery,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub strength: f64,
    pub exact_cmi: f64,
    pub perturbative_cmi: f64,
    pub abs_error: f64,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln error` against `ln D` over rows with
    /// `D > 0` and nonzero error; `None` with fewer than two such rows.
    pub slope: Option<f64>,
}

/// Error of the second-order CMI at each `D`, for the model's seed.
pub fn perturbation_convergence(model: &BandModel, d_values: &[f64]) -> Result<ConvergenceTable> {
    let r = model.sample()?;
    let rows = d_values
        .iter()
        .map(|&s| {
            let m = model.with_strength(s)?;
            let c = compare_with(&r, &m)?;
            Ok(ConvergenceRow {
                strength: s,
                exact_cmi: c.exact_cmi,
                perturbative_cmi: c.perturbative.bits,
                abs_error: c.abs_error,
                valid: c.perturbative.valid,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = fit_slope(rows.iter().map(|r| (r.strength, r.abs_error)));
    Ok(ConvergenceTable { rows, slope })
}

/// Seed-averaged errors per `D` with the slope fitted to the averages.
pub fn averaged_convergence(model: &BandModel, seeds: &[u64], d_values: &[f64]) -> Result<ConvergenceTable> {
    if seeds.is_empty() {
        return Err(Error::Parameter("averaged convergence needs at least one seed".into()));
    }
    let tables = seeds
        .iter()
        .map(|&s| perturbation_convergence(&model.with_seed(s), d_values))
        .collect::<Result<Vec<_>>>()?;
    let n = seeds.len() as f64;
    let rows: Vec<ConvergenceRow> = (0..d_values.len())
        .map(|i| ConvergenceRow {
            strength: d_values[i],
            exact_cmi: tables.iter().map(|t| t.rows[i].exact_cmi).sum::<f64>() / n,
            perturbative_cmi: tables.iter().map(|t| t.rows[i].perturbative_cmi).sum::<f64>() / n,
            abs_error: tables.iter().map(|t| t.rows[i].abs_error).sum::<f64>() / n,
            valid: tables.iter().all(|t| t.rows[i].valid),
        })
        .collect();
    let slope = fit_slope(rows.iter().map(|r| (r.strength, r.abs_error)));
    Ok(ConvergenceTable { rows, slope })
}

/// Ordinary least-squares slope in log-log coordinates.
pub fn fit_slope<I: IntoIterator<Item = (f64, f64)>>(points: I) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .into_iter()
        .filter(|&(x, y)| x > 0.0 && y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `I/d + D ρ₁` as a plain matrix, for checking the entropy expansion.
pub fn first_order_state(rho1: &HermitianMatrix, strength: f64) -> HermitianMatrix {
    let d = rho1.dim();
    HermitianMatrix::identity(d).scale(1.0 / d as f64).add(&rho1.scale(strength)).expect("same dimension")
}
