//! Dense Hermitian linear algebra: eigendecomposition, matrix functions on
//! the support, Schatten norms and the root fidelity.
//!
//! Everything is dense `Complex64`. When a Hermitian matrix happens to be
//! real (every spin-chain Hamiltonian and Gibbs state is), the real symmetric
//! eigensolver and real matrix products are used instead, which is several
//! times faster and gives bit-identical results across runs.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Relative Hermiticity tolerance applied by [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues at or below this fraction of the largest eigenvalue are
/// outside the support for negative powers and logarithms.
pub const SUPPORT_CUTOFF: f64 = 1e-12;
/// Eigenvalues below `ROUNDOFF_FACTOR · ε · d · λ_max` count as zero when
/// taking matrix square roots for the fidelity.
pub const ROUNDOFF_FACTOR: f64 = 4.0;
/// Absolute slack on the smallest eigenvalue of a state.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// A square matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    inner: CMatrix,
    asymmetry: f64,
}

impl HermitianMatrix {
    /// Validates Hermiticity within [`HERMITIAN_TOL`] (Frobenius deviation of
    /// the anti-Hermitian part relative to the Frobenius norm), then stores
    /// the Hermitian part `(m + m†)/2`.
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let deviation = anti_hermitian_norm(&m);
        let scale = m.norm();
        let tolerance = HERMITIAN_TOL * scale;
        if deviation > tolerance {
            return Err(Error::NotHermitian { deviation, tolerance });
        }
        Ok(Self { inner: hermitian_part(&m), asymmetry: deviation })
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(complexify(m))
    }

    /// Symmetrizes without validation. Used for results that are Hermitian in
    /// exact arithmetic, such as `A X A†` products.
    pub fn hermitian_part_of(m: CMatrix) -> Self {
        let asymmetry = anti_hermitian_norm(&m);
        Self { inner: hermitian_part(&m), asymmetry }
    }

    pub fn identity(dim: usize) -> Self {
        Self { inner: CMatrix::identity(dim, dim), asymmetry: 0.0 }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { inner: CMatrix::zeros(dim, dim), asymmetry: 0.0 }
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(*v, 0.0);
        }
        Self { inner: m, asymmetry: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> CMatrix {
        self.inner
    }

    /// Frobenius norm of the anti-Hermitian part removed at construction.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn trace(&self) -> f64 {
        self.inner.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn is_real(&self) -> bool {
        self.inner.iter().all(|z| z.im == 0.0)
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.inner.map(|z| z.re)
    }

    pub fn eigh(&self) -> Spectrum {
        eigh(self)
    }

    /// Eigenvalues only, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = if self.is_real() {
            self.real_part().symmetric_eigenvalues().iter().copied().collect()
        } else {
            self.inner.clone().symmetric_eigenvalues().iter().copied().collect()
        };
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        let values = self.eigenvalues();
        match kind {
            NormKind::Trace => values.iter().map(|v| v.abs()).sum(),
            NormKind::Operator => values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs())),
            NormKind::Frobenius => self.inner.norm(),
        }
    }

    /// Traceless projection `X - Tr(X)/d · I`.
    pub fn traceless(&self) -> Self {
        let shift = self.trace() / self.dim() as f64;
        let mut m = self.inner.clone();
        for i in 0..self.dim() {
            m[(i, i)] -= C64::new(shift, 0.0);
        }
        Self { inner: m, asymmetry: self.asymmetry }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { inner: self.inner.scale(factor), asymmetry: self.asymmetry * factor.abs() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!("{} vs {}", self.dim(), other.dim())));
        }
        Ok(Self { inner: &self.inner - &other.inner, asymmetry: 0.0 })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!("{} vs {}", self.dim(), other.dim())));
        }
        Ok(Self { inner: &self.inner + &other.inner, asymmetry: 0.0 })
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    vectors: CMatrix,
    real_vectors: Option<DMatrix<f64>>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvectors as columns, ordered like `values`.
    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `SUPPORT_CUTOFF` times the largest eigenvalue magnitude.
    pub fn default_cutoff(&self) -> f64 {
        let scale = self.values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));
        SUPPORT_CUTOFF * scale
    }

    /// `V · diag(f(λ)) · V†` with `f(λ)` replaced by zero whenever
    /// `λ ≤ cutoff`. Pass `f64::NEG_INFINITY` to keep every eigenvalue.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F, cutoff: f64) -> Result<HermitianMatrix> {
        let weights = self.weights(|x| C64::new(f(x), 0.0), cutoff)?;
        let real: Vec<f64> = weights.iter().map(|w| w.re).collect();
        Ok(HermitianMatrix::hermitian_part_of(self.reconstruct_real_weights(&real)))
    }

    /// Complex-valued version of [`Spectrum::map`]; the result is a general
    /// (normal) matrix.
    pub fn map_complex<F: Fn(f64) -> C64>(&self, f: F, cutoff: f64) -> Result<CMatrix> {
        let weights = self.weights(f, cutoff)?;
        if weights.iter().all(|w| w.im == 0.0) {
            let real: Vec<f64> = weights.iter().map(|w| w.re).collect();
            return Ok(self.reconstruct_real_weights(&real));
        }
        let mut scaled = self.vectors.clone();
        for (j, w) in weights.iter().enumerate() {
            for z in scaled.column_mut(j).iter_mut() {
                *z *= *w;
            }
        }
        Ok(matmul(&scaled, &self.vectors.adjoint()))
    }

    /// `V · diag(w) · V†` for replacement eigenvalues `w`.
    pub fn rebuild(&self, weights: &[f64]) -> Result<HermitianMatrix> {
        if weights.len() != self.dim() {
            return Err(Error::Shape(format!("{} weights for dimension {}", weights.len(), self.dim())));
        }
        Ok(HermitianMatrix::hermitian_part_of(self.reconstruct_real_weights(weights)))
    }

    /// `V · diag(λ) · V†`.
    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_real_weights(&self.values)
    }

    fn weights<F: Fn(f64) -> C64>(&self, f: F, cutoff: f64) -> Result<Vec<C64>> {
        self.values
            .iter()
            .map(|&x| {
                if x <= cutoff {
                    return Ok(C64::new(0.0, 0.0));
                }
                let y = f(x);
                if y.re.is_finite() && y.im.is_finite() {
                    Ok(y)
                } else {
                    Err(Error::Domain { eigenvalue: x })
                }
            })
            .collect()
    }

    fn reconstruct_real_weights(&self, weights: &[f64]) -> CMatrix {
        if let Some(v) = &self.real_vectors {
            let mut scaled = v.clone();
            for (j, w) in weights.iter().enumerate() {
                scaled.column_mut(j).scale_mut(*w);
            }
            return complexify(&(&scaled * v.transpose()));
        }
        let mut scaled = self.vectors.clone();
        for (j, w) in weights.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*w);
        }
        matmul(&scaled, &self.vectors.adjoint())
    }
}

/// Eigendecomposition with eigenvalues sorted ascending.
pub fn eigh(m: &HermitianMatrix) -> Spectrum {
    if m.is_real() {
        let eig = SymmetricEigen::new(m.real_part());
        let order = ascending_order(eig.eigenvalues.as_slice());
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = eig.eigenvectors.select_columns(order.iter());
        return Spectrum { values, vectors: complexify(&vectors), real_vectors: Some(vectors) };
    }
    let eig = SymmetricEigen::new(m.matrix().clone());
    let order = ascending_order(eig.eigenvalues.as_slice());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(order.iter());
    Spectrum { values, vectors, real_vectors: None }
}

/// Applies `f` to the eigenvalues of `m` (see [`Spectrum::map`]).
pub fn spectral_function<F: Fn(f64) -> f64>(
    spectrum: &Spectrum,
    f: F,
    support_cutoff: f64,
) -> Result<HermitianMatrix> {
    spectrum.map(f, support_cutoff)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    /// Sum of singular values.
    Trace,
    /// Largest singular value.
    Operator,
    Frobenius,
}

/// Schatten norm of an arbitrary square matrix via its singular values.
pub fn norm(m: &CMatrix, kind: NormKind) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    match kind {
        NormKind::Frobenius => m.norm(),
        NormKind::Trace => m.clone().singular_values().iter().sum(),
        NormKind::Operator => m.clone().singular_values().iter().fold(0.0, |a: f64, s| a.max(*s)),
    }
}

/// Root fidelity `F(ρ, σ) = Tr √(√ρ σ √ρ) = ‖√ρ √σ‖₁`.
///
/// Both inputs must be positive semidefinite within [`POSITIVITY_TOL`]; they
/// need not have unit trace (sub-normalized recoveries are allowed).
/// Eigenvalues at roundoff level are dropped before taking square roots.
pub fn root_fidelity(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Shape(format!("fidelity of {} and {}", rho.dim(), sigma.dim())));
    }
    root_fidelity_with_sqrt(&psd_sqrt(rho)?, sigma)
}

/// Root fidelity given a precomputed `√ρ`.
pub fn root_fidelity_with_sqrt(sqrt_rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    if sqrt_rho.dim() != sigma.dim() {
        return Err(Error::Shape(format!("fidelity of {} and {}", sqrt_rho.dim(), sigma.dim())));
    }
    // Singular values of √ρ√σ carry absolute error ~ε, whereas square roots
    // of the eigenvalues of √ρσ√ρ would carry ~√ε.
    let product = matmul(sqrt_rho.matrix(), psd_sqrt(sigma)?.matrix());
    Ok(product.singular_values().iter().sum())
}

fn psd_sqrt(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let spec = m.eigh();
    check_positive(spec.min())?;
    let cutoff = ROUNDOFF_FACTOR * f64::EPSILON * spec.dim() as f64 * spec.max().max(0.0);
    spec.map(f64::sqrt, cutoff)
}

fn check_positive(min_eigenvalue: f64) -> Result<()> {
    if min_eigenvalue < -POSITIVITY_TOL {
        Err(Error::NotPositive { min_eigenvalue })
    } else {
        Ok(())
    }
}

/// `a · b`, evaluated as real products for large operands, where the real
/// kernel is several times faster than the generic complex one.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    if a.nrows() * a.ncols() * b.ncols() < 32 * 32 * 32 {
        return a * b;
    }
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, C64::new)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

pub(crate) fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(())
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn anti_hermitian_norm(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm() * 0.5
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}
