//! Gibbs states, von Neumann entropies and conditional mutual information.
//! Entropies are in bits.

use crate::error::{Error, Result};
use crate::hilbert::{partial_trace, DensityMatrix, Partition};
use crate::linops::{HermitianMatrix, Spectrum, SUPPORT_CUTOFF};

/// Reported CMI values in `[-CMI_CLAMP, 0)` are set to zero.
pub const CMI_CLAMP: f64 = 1e-9;

/// Thermal states of one Hamiltonian at any inverse temperature. The
/// eigendecomposition is computed once and shared by every `β`.
#[derive(Clone, Debug)]
pub struct ThermalFamily {
    spectrum: Spectrum,
    dims: Vec<usize>,
}

impl ThermalFamily {
    pub fn new(hamiltonian: &HermitianMatrix, dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if d != hamiltonian.dim() {
            return Err(Error::Shape(format!("site dimensions {dims:?} vs Hamiltonian {}", hamiltonian.dim())));
        }
        Ok(Self { spectrum: hamiltonian.eigh(), dims })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ground_energy(&self) -> f64 {
        self.spectrum.min()
    }

    /// Normalized Boltzmann weights `exp(-β(E - E₀)) / Z'`, aligned with the
    /// spectrum.
    pub fn weights(&self, beta: f64) -> Result<Vec<f64>> {
        check_beta(beta)?;
        let e0 = self.ground_energy();
        let raw: Vec<f64> = self.spectrum.values.iter().map(|e| (-beta * (e - e0)).exp()).collect();
        let z: f64 = raw.iter().sum();
        Ok(raw.into_iter().map(|w| w / z).collect())
    }

    pub fn state(&self, beta: f64) -> Result<DensityMatrix> {
        let w = self.weights(beta)?;
        Ok(self.state_from_weights(&w))
    }

    /// `√ρ_β`, reusing the shared eigenvectors.
    pub fn sqrt_state(&self, beta: f64) -> Result<HermitianMatrix> {
        let w = self.weights(beta)?;
        self.apply_weights(&w.iter().map(|x| x.sqrt()).collect::<Vec<_>>())
    }

    /// Entropy of `ρ_β` straight from the Boltzmann weights.
    pub fn entropy(&self, beta: f64) -> Result<f64> {
        Ok(entropy_of_eigenvalues(&self.weights(beta)?))
    }

    /// Normalized projector onto the eigenspace of energies within
    /// `degeneracy_tol` of the ground energy (the `β → ∞` limit).
    pub fn ground_projector(&self, degeneracy_tol: f64) -> DensityMatrix {
        let e0 = self.ground_energy();
        let mask: Vec<f64> =
            self.spectrum.values.iter().map(|e| if e - e0 <= degeneracy_tol { 1.0 } else { 0.0 }).collect();
        let count: f64 = mask.iter().sum();
        let w: Vec<f64> = mask.iter().map(|m| m / count).collect();
        self.state_from_weights(&w)
    }

    fn state_from_weights(&self, w: &[f64]) -> DensityMatrix {
        let m = self.apply_weights(w).expect("weights are finite");
        DensityMatrix::from_parts(m, self.dims.clone())
    }

    fn apply_weights(&self, w: &[f64]) -> Result<HermitianMatrix> {
        self.spectrum.rebuild(w)
    }
}

/// `exp(-β H) / Tr exp(-β H)` on the given factorization.
pub fn gibbs_state(hamiltonian: &HermitianMatrix, beta: f64, dims: Vec<usize>) -> Result<DensityMatrix> {
    ThermalFamily::new(hamiltonian, dims)?.state(beta)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::Parameter(format!("inverse temperature must be finite and >= 0, got {beta}")));
    }
    Ok(())
}

/// `-Σ λ log₂ λ` over eigenvalues above the support cutoff.
pub fn entropy_of_eigenvalues(values: &[f64]) -> f64 {
    let max = values.iter().fold(0.0, |a: f64, v| a.max(*v));
    let cutoff = SUPPORT_CUTOFF * max;
    let s: f64 = values.iter().filter(|&&v| v > cutoff).map(|&v| -v * v.log2()).sum();
    s.max(0.0)
}

/// Von Neumann entropy in bits.
pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    let trace = rho.trace();
    if (trace - 1.0).abs() > 1e-8 {
        return Err(Error::Normalization { trace });
    }
    Ok(entropy_of_eigenvalues(&rho.matrix().eigenvalues()))
}

/// The four entropies entering `I(A:C|B)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CmiTerms {
    pub s_ab: f64,
    pub s_bc: f64,
    pub s_abc: f64,
    pub s_b: f64,
}

impl CmiTerms {
    pub fn raw(&self) -> f64 {
        self.s_ab + self.s_bc - self.s_abc - self.s_b
    }

    /// `raw()` with tiny negatives (down to `-CMI_CLAMP`) reported as zero.
    pub fn value(&self) -> f64 {
        let v = self.raw();
        if (-CMI_CLAMP..0.0).contains(&v) {
            0.0
        } else {
            v
        }
    }
}

pub fn cmi_terms(rho: &DensityMatrix, partition: &Partition) -> Result<CmiTerms> {
    if rho.dims() != partition.dims() {
        return Err(Error::Shape(format!(
            "state factorization {:?} vs partition {:?}",
            rho.dims(),
            partition.dims()
        )));
    }
    let blocks = partition.resolved();
    Ok(CmiTerms {
        s_ab: entropy(&partial_trace(rho, &blocks.ab())?)?,
        s_bc: entropy(&partial_trace(rho, &blocks.bc())?)?,
        s_abc: entropy(rho)?,
        s_b: entropy(&partial_trace(rho, &blocks.b)?)?,
    })
}

/// `I(A:C|B) = S(AB) + S(BC) − S(ABC) − S(B)` in bits.
pub fn cmi(rho: &DensityMatrix, partition: &Partition) -> Result<f64> {
    Ok(cmi_terms(rho, partition)?.value())
}

/// Geometric grid of `count` points from `min` to `max` inclusive.
pub fn geometric_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![min],
        _ => {
            let (lo, hi) = (min.ln(), max.ln());
            (0..count).map(|i| (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp()).collect()
        }
    }
}

pub fn linear_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![min],
        _ => (0..count).map(|i| min + (max - min) * i as f64 / (count - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{CMatrix, C64};
    use approx::assert_abs_diff_eq;

    #[test]
    fn infinite_temperature_is_maximally_mixed() {
        let h = crate::spinchain::build_hamiltonian(&crate::spinchain::ChainParams::chaotic(3)).unwrap();
        let rho = gibbs_state(&h, 0.0, vec![2; 3]).unwrap();
        let expected = CMatrix::identity(8, 8).scale(0.125);
        assert_abs_diff_eq!((rho.matrix().matrix() - expected).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn pauli_z_at_unit_beta() {
        let h = HermitianMatrix::from_diagonal(&[1.0, -1.0]);
        let rho = gibbs_state(&h, 1.0, vec![2]).unwrap();
        let z = (-1f64).exp() + 1f64.exp();
        assert_abs_diff_eq!(rho.matrix().matrix()[(0, 0)].re, (-1f64).exp() / z, epsilon = 1e-14);
        assert_abs_diff_eq!(rho.matrix().matrix()[(1, 1)].re, 1f64.exp() / z, epsilon = 1e-14);
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn low_temperature_approaches_ground_projector() {
        // Two coupled qubits with a unique, gapped ground state.
        let h = crate::spinchain::build_hamiltonian(&crate::spinchain::ChainParams::new(2, 1.0, 0.3, 0.7)).unwrap();
        let family = ThermalFamily::new(&h, vec![2, 2]).unwrap();
        let rho = family.state(1e3).unwrap();
        let p = family.ground_projector(1e-9);
        let diff = rho.matrix().sub(p.matrix()).unwrap();
        assert!(0.5 * diff.norm(crate::linops::NormKind::Trace) < 1e-6);
    }

    #[test]
    fn negative_beta_rejected() {
        let h = HermitianMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(gibbs_state(&h, -0.1, vec![2]), Err(Error::Parameter(_))));
        assert!(gibbs_state(&h, f64::NAN, vec![2]).is_err());
    }

    #[test]
    fn large_beta_does_not_overflow() {
        let h = crate::spinchain::build_hamiltonian(&crate::spinchain::ChainParams::chaotic(4)).unwrap();
        let rho = gibbs_state(&h, 500.0, vec![2; 4]).unwrap();
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let pure = DensityMatrix::diagonal(&[1.0, 0.0], vec![2]).unwrap();
        assert_eq!(entropy(&pure).unwrap(), 0.0);
        let mixed = DensityMatrix::maximally_mixed(vec![2, 2]);
        assert_abs_diff_eq!(entropy(&mixed).unwrap(), 2.0, epsilon = 1e-14);
        let biased = DensityMatrix::diagonal(&[0.75, 0.25], vec![2]).unwrap();
        assert_abs_diff_eq!(entropy(&biased).unwrap(), 2.0 - 0.75 * 3f64.log2(), epsilon = 1e-14);
    }

    #[test]
    fn entropy_rejects_unnormalized() {
        let m = HermitianMatrix::from_diagonal(&[0.5, 0.4]);
        let rho = DensityMatrix::from_parts(m, vec![2]);
        assert!(matches!(entropy(&rho), Err(Error::Normalization { .. })));
    }

    #[test]
    fn cmi_of_maximally_mixed_is_zero() {
        let rho = DensityMatrix::maximally_mixed(vec![2; 5]);
        let p = Partition::qubits(5, vec![0, 4], vec![1, 2], vec![3]).unwrap();
        assert_eq!(cmi(&rho, &p).unwrap(), 0.0);
    }

    #[test]
    fn cmi_of_ghz_is_one_bit() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi = vec![C64::new(0.0, 0.0); 8];
        psi[0] = C64::new(h, 0.0);
        psi[7] = C64::new(h, 0.0);
        let rho = DensityMatrix::pure(&psi, vec![2; 3]).unwrap();
        let p = Partition::qubits(3, vec![0], vec![1], vec![2]).unwrap();
        assert_abs_diff_eq!(cmi(&rho, &p).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cmi_partition_mismatch() {
        let rho = DensityMatrix::maximally_mixed(vec![2; 3]);
        let p = Partition::qubits(4, vec![0], vec![1, 2], vec![3]).unwrap();
        assert!(matches!(cmi(&rho, &p), Err(Error::Shape(_))));
    }

    #[test]
    fn clamp_only_touches_tiny_negatives() {
        let t = CmiTerms { s_ab: 1.0, s_bc: 1.0, s_abc: 1.0, s_b: 1.0 + 1e-12 };
        assert_eq!(t.value(), 0.0);
        let t = CmiTerms { s_ab: 1.0, s_bc: 1.0, s_abc: 1.0, s_b: 1.1 };
        assert!(t.value() < -0.09);
    }

    #[test]
    fn grids() {
        let g = geometric_grid(1e-2, 1e2, 5);
        assert_abs_diff_eq!(g[0], 1e-2, epsilon = 1e-16);
        assert_abs_diff_eq!(g[2], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g[4], 1e2, epsilon = 1e-12);
        assert_eq!(linear_grid(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert!(geometric_grid(1.0, 2.0, 0).is_empty());
    }
}
