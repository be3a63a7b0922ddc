//! Rotated Petz recovery `R_{B→BC}` and the quality metrics of one recovery.
//!
//! For rotation `λ`,
//!
//! ```text
//! R(X) = ρ_BC^{(1-iλ)/2} (ρ_B^{(-1+iλ)/2} X ρ_B^{(-1-iλ)/2} ⊗ I_C) ρ_BC^{(1+iλ)/2}
//! ```
//!
//! applied as `id_A ⊗ R` to `ρ_AB`. Blocks may be interleaved; the map is
//! evaluated with sites reordered to A followed by BC and the result is
//! permuted back.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{embed, inverse_permutation, partial_trace, permute_sites, DensityMatrix, Partition};
use crate::linops::{matmul, root_fidelity, CMatrix, HermitianMatrix, C64};
use crate::thermal::cmi;

/// Output of [`petz_recover`].
#[derive(Clone, Debug)]
pub struct Recovery {
    /// `(id_A ⊗ R)(ρ_AB)` on the full factorization.
    pub state: HermitianMatrix,
    pub dims: Vec<usize>,
    /// Trace of the recovered operator; 1 when `ρ_B` has full support.
    pub trace: f64,
    /// True when some eigenvalue of `ρ_B` fell below the support cutoff and
    /// the inverse powers were taken on the support only.
    pub support_deficient: bool,
    /// Total weight of the `ρ_B` eigenvalues dropped by the cutoff.
    pub off_support_weight: f64,
}

/// Recovers `ρ_ABC` from `ρ_AB` with the rotated Petz map.
pub fn petz_recover(rho: &DensityMatrix, partition: &Partition, lambda: f64) -> Result<Recovery> {
    if rho.dims() != partition.dims() {
        return Err(Error::Shape(format!(
            "state factorization {:?} vs partition {:?}",
            rho.dims(),
            partition.dims()
        )));
    }
    if !lambda.is_finite() {
        return Err(Error::Parameter(format!("rotation must be finite, got {lambda}")));
    }
    let blocks = partition.resolved();
    if blocks.b.is_empty() {
        return Err(Error::Partition("block B is empty".into()));
    }
    let ab = blocks.ab();
    let bc = blocks.bc();
    let rho_ab = partial_trace(rho, &ab)?;
    let rho_bc = partial_trace(rho, &bc)?;
    let rho_b = partial_trace(rho, &blocks.b)?;

    let spec_b = rho_b.matrix().eigh();
    let cutoff_b = spec_b.default_cutoff();
    let dropped: Vec<f64> = spec_b.values.iter().copied().filter(|&v| v <= cutoff_b).collect();
    let inner_power = Complex64::new(-0.5, 0.5 * lambda);
    let k_b = spec_b.map_complex(|x| complex_power(x, inner_power), cutoff_b)?;

    let spec_bc = rho_bc.matrix().eigh();
    let outer_power = Complex64::new(0.5, -0.5 * lambda);
    let k_bc = spec_bc.map_complex(|x| complex_power(x, outer_power), 0.0)?;

    // Work in the site order A ++ sorted(BC), where id_A ⊗ R acts block by
    // block on the d_A × d_A grid of (d_B d_C)-sized blocks.
    let (d_a, d_b) = (dims_of(rho.dims(), &blocks.a), dims_of(rho.dims(), &blocks.b));
    let d_bc = k_bc.nrows();
    let a_then_b: Vec<usize> = blocks.a.iter().chain(&blocks.b).map(|s| ab.binary_search(s).expect("A ⊂ AB")).collect();
    let (r_ab, _) = permute_sites(rho_ab.matrix().matrix(), rho_ab.dims(), &a_then_b)?;
    let b_in_bc: Vec<usize> = blocks.b.iter().map(|s| bc.binary_search(s).expect("B ⊂ BC")).collect();
    let k_b_adj = k_b.adjoint();
    let k_bc_adj = k_bc.adjoint();
    let mut ordered = CMatrix::zeros(d_a * d_bc, d_a * d_bc);
    for i in 0..d_a {
        for j in 0..d_a {
            let y = matmul(&matmul(&k_b, &r_ab.view((i * d_b, j * d_b), (d_b, d_b)).into_owned()), &k_b_adj);
            let lifted = embed(&y, rho_bc.dims(), &b_in_bc)?;
            let out = matmul(&matmul(&k_bc, &lifted), &k_bc_adj);
            ordered.view_mut((i * d_bc, j * d_bc), (d_bc, d_bc)).copy_from(&out);
        }
    }
    let order: Vec<usize> = blocks.a.iter().chain(&bc).copied().collect();
    let order_dims: Vec<usize> = order.iter().map(|&s| rho.dims()[s]).collect();
    let (restored, _) = permute_sites(&ordered, &order_dims, &inverse_permutation(&order))?;
    let recovered = HermitianMatrix::hermitian_part_of(restored);
    let trace = recovered.trace();
    Ok(Recovery {
        state: recovered,
        dims: rho.dims().to_vec(),
        trace,
        support_deficient: !dropped.is_empty(),
        off_support_weight: dropped.iter().map(|v| v.max(0.0)).sum(),
    })
}

fn dims_of(dims: &[usize], sites: &[usize]) -> usize {
    sites.iter().map(|&s| dims[s]).product()
}

fn complex_power(x: f64, p: C64) -> C64 {
    (p * x.ln()).exp()
}

/// Every quantity recorded for one (state, partition, λ) recovery.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryReport {
    /// `I(A:C|B)` in bits.
    pub cmi: f64,
    /// Root fidelity `F(ρ, ρ̃)`.
    pub fidelity: f64,
    /// `½‖ρ − ρ̃‖₁`.
    pub trace_distance: f64,
    /// `‖ρ − ρ̃‖_∞`.
    pub opnorm_distance: f64,
    /// `F − 2^{−I/2}`; nonnegative when the recovery meets the fidelity bound.
    pub fr_bound_margin: f64,
    /// `I + 2 log₂(1 − ¼‖ρ − ρ̃‖_∞²)`.
    pub figbound_margin: f64,
    pub recovered_trace: f64,
    pub lambda: f64,
    pub support_deficient: bool,
    pub off_support_weight: f64,
}

impl RecoveryReport {
    /// `2^{−I/2}`.
    pub fn fidelity_floor(&self) -> f64 {
        (-0.5 * self.cmi).exp2()
    }

    /// `−2 log₂(1 − ¼‖ρ − ρ̃‖_∞²)`.
    pub fn opnorm_bound(&self) -> f64 {
        opnorm_cmi_bound(self.opnorm_distance)
    }
}

/// Lower bound on the CMI implied by an operator-norm recovery error.
pub fn opnorm_cmi_bound(opnorm_distance: f64) -> f64 {
    -2.0 * (1.0 - 0.25 * opnorm_distance * opnorm_distance).log2()
}

pub fn recovery_report(rho: &DensityMatrix, partition: &Partition, lambda: f64) -> Result<RecoveryReport> {
    let recovery = petz_recover(rho, partition, lambda)?;
    let info = cmi(rho, partition)?;
    build_report(rho, &recovery, info, lambda, root_fidelity(rho.matrix(), &recovery.state)?)
}

/// Same as [`recovery_report`] with a precomputed `√ρ` (e.g. from a
/// [`crate::thermal::ThermalFamily`]).
pub fn recovery_report_with_sqrt(
    rho: &DensityMatrix,
    sqrt_rho: &HermitianMatrix,
    partition: &Partition,
    lambda: f64,
) -> Result<RecoveryReport> {
    let recovery = petz_recover(rho, partition, lambda)?;
    let info = cmi(rho, partition)?;
    let fidelity = crate::linops::root_fidelity_with_sqrt(sqrt_rho, &recovery.state)?;
    build_report(rho, &recovery, info, lambda, fidelity)
}

fn build_report(
    rho: &DensityMatrix,
    recovery: &Recovery,
    cmi: f64,
    lambda: f64,
    fidelity: f64,
) -> Result<RecoveryReport> {
    let diff = rho.matrix().sub(&recovery.state)?;
    let values = diff.eigenvalues();
    let trace_norm: f64 = values.iter().map(|v| v.abs()).sum();
    let opnorm = values.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
    let floor = (-0.5 * cmi).exp2();
    Ok(RecoveryReport {
        cmi,
        fidelity,
        trace_distance: 0.5 * trace_norm,
        opnorm_distance: opnorm,
        fr_bound_margin: fidelity - floor,
        figbound_margin: cmi - opnorm_cmi_bound(opnorm),
        recovered_trace: recovery.trace,
        lambda,
        support_deficient: recovery.support_deficient,
        off_support_weight: recovery.off_support_weight,
    })
}

/// Recovered state as a plain matrix, e.g. for channel checks.
pub fn recovered_matrix(rho: &DensityMatrix, partition: &Partition, lambda: f64) -> Result<CMatrix> {
    Ok(petz_recover(rho, partition, lambda)?.state.into_matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::DensityMatrix;
    use approx::assert_abs_diff_eq;

    fn qubit(p0: f64, coherence: f64) -> DensityMatrix {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(p0, 0.0);
        m[(1, 1)] = C64::new(1.0 - p0, 0.0);
        m[(0, 1)] = C64::new(coherence, 0.1 * coherence);
        m[(1, 0)] = C64::new(coherence, -0.1 * coherence);
        DensityMatrix::new(HermitianMatrix::new(m).unwrap(), vec![2]).unwrap()
    }

    fn product_state() -> DensityMatrix {
        DensityMatrix::product(&[qubit(0.7, 0.2), qubit(0.4, -0.1), qubit(0.9, 0.05)]).unwrap()
    }

    #[test]
    fn product_state_is_recovered_exactly() {
        let rho = product_state();
        let p = Partition::qubits(3, vec![0], vec![1], vec![2]).unwrap();
        let r = petz_recover(&rho, &p, 0.0).unwrap();
        let diff = rho.matrix().sub(&r.state).unwrap();
        assert!(0.5 * diff.norm(crate::linops::NormKind::Trace) < 1e-10);
        assert!(!r.support_deficient);
    }

    #[test]
    fn product_state_recovery_is_rotation_independent() {
        let rho = product_state();
        let p = Partition::qubits(3, vec![0], vec![1], vec![2]).unwrap();
        let base = petz_recover(&rho, &p, 0.0).unwrap().state;
        for lambda in [-1.0, 1.0] {
            let r = petz_recover(&rho, &p, lambda).unwrap().state;
            assert!((r.matrix() - base.matrix()).norm() < 1e-10, "λ = {lambda}");
        }
    }

    #[test]
    fn maximally_mixed_report() {
        let rho = DensityMatrix::maximally_mixed(vec![2; 4]);
        let p = Partition::qubits(4, vec![0], vec![1, 2], vec![3]).unwrap();
        let r = recovery_report(&rho, &p, 0.0).unwrap();
        assert_eq!(r.cmi, 0.0);
        assert_abs_diff_eq!(r.fidelity, 1.0, epsilon = 1e-12);
        assert!(r.opnorm_distance < 1e-14);
        assert_abs_diff_eq!(r.fr_bound_margin, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.figbound_margin, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_b_is_partition_error() {
        let rho = DensityMatrix::maximally_mixed(vec![2; 2]);
        let p = Partition::qubits(2, vec![0], vec![], vec![1]).unwrap();
        assert!(matches!(petz_recover(&rho, &p, 0.0), Err(Error::Partition(_))));
    }

    #[test]
    fn rank_deficient_b_is_flagged() {
        // |000> ⊗ mixed: ρ_B is pure, so its inverse square root is a
        // support projection.
        let a = DensityMatrix::diagonal(&[0.5, 0.5], vec![2]).unwrap();
        let b = DensityMatrix::diagonal(&[1.0, 0.0], vec![2]).unwrap();
        let c = DensityMatrix::diagonal(&[0.3, 0.7], vec![2]).unwrap();
        let rho = DensityMatrix::product(&[a, b, c]).unwrap();
        let p = Partition::qubits(3, vec![0], vec![1], vec![2]).unwrap();
        let r = petz_recover(&rho, &p, 0.0).unwrap();
        assert!(r.support_deficient);
        assert_eq!(r.off_support_weight, 0.0);
        assert_abs_diff_eq!(r.trace, 1.0, epsilon = 1e-12);
        assert!((r.state.matrix() - rho.matrix().matrix()).norm() < 1e-12);
    }

    #[test]
    fn bc_marginal_is_preserved() {
        let h = crate::spinchain::build_hamiltonian(&crate::spinchain::ChainParams::chaotic(5)).unwrap();
        let rho = crate::thermal::gibbs_state(&h, 1.3, vec![2; 5]).unwrap();
        let p = Partition::qubits(5, vec![0], vec![1, 2], vec![3, 4]).unwrap();
        let r = petz_recover(&rho, &p, 0.0).unwrap();
        let recovered = DensityMatrix::from_parts(r.state, r.dims);
        let bc = partial_trace(&recovered, &[1, 2, 3, 4]).unwrap();
        let bc0 = partial_trace(&rho, &[1, 2, 3, 4]).unwrap();
        let diff = bc.matrix().sub(bc0.matrix()).unwrap();
        assert!(0.5 * diff.norm(crate::linops::NormKind::Trace) < 1e-9);
    }
}
