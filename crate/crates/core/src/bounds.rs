//! Executable checks of the recovery-closeness lemmas, plus the Kraus channel
//! machinery they need.
//!
//! Lemmas 1–3 are asserted with `ε_safe = 2√(1 − 2^{−I})`, which follows from
//! `F ≥ 2^{−I/2}` and the Fuchs–van de Graaf inequality
//! `‖ρ − σ‖₁ ≤ 2√(1 − F²)`. The tighter stated form `√(4(1 − 2^{−I/2}))` is
//! computed alongside for comparison only.

use crate::error::{Error, Result};
use crate::hilbert::{embed, DensityMatrix, Partition};
use crate::linops::{norm, root_fidelity, CMatrix, HermitianMatrix, NormKind, C64};
use crate::petz::petz_recover;
use crate::thermal::{cmi, ThermalFamily};

/// Slack applied to every asserted margin.
pub const MARGIN_TOL: f64 = 1e-8;
const CPTP_TOL: f64 = 1e-10;

/// A completely positive trace-preserving map given by Kraus operators.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
    d_in: usize,
    d_out: usize,
}

impl QuantumChannel {
    /// Validates shapes and `Σ K†K = I` within 1e-10.
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::Channel("no Kraus operators".into()))?;
        let (d_out, d_in) = (first.nrows(), first.ncols());
        if kraus.iter().any(|k| k.nrows() != d_out || k.ncols() != d_in) {
            return Err(Error::Channel("Kraus operators have different shapes".into()));
        }
        let mut sum = CMatrix::zeros(d_in, d_in);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let deviation = (sum - CMatrix::identity(d_in, d_in)).norm();
        if deviation > CPTP_TOL * (d_in as f64).sqrt() {
            return Err(Error::Channel(format!("Σ K†K deviates from identity by {deviation:.3e}")));
        }
        Ok(Self { kraus, d_in, d_out })
    }

    pub fn identity(d: usize) -> Self {
        Self { kraus: vec![CMatrix::identity(d, d)], d_in: d, d_out: d }
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        check_unitary(&u)?;
        let d = u.nrows();
        Ok(Self { kraus: vec![u], d_in: d, d_out: d })
    }

    /// `ρ ↦ (1 − p) ρ + p Tr(ρ) I/d` via the Weyl–Heisenberg operators
    /// `X^a Z^b`. Uses `d² + 1` Kraus operators, so keep `d` small.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Channel(format!("depolarizing probability {p} outside [0, 1]")));
        }
        let omega = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / d as f64);
        let mut kraus = vec![CMatrix::identity(d, d).scale((1.0 - p).sqrt())];
        let w = p.sqrt() / d as f64;
        for a in 0..d {
            for b in 0..d {
                // X^a Z^b |j> = ω^{bj} |j + a>
                let mut k = CMatrix::zeros(d, d);
                for j in 0..d {
                    k[((j + a) % d, j)] = omega.powu((b * j) as u32) * w;
                }
                kraus.push(k);
            }
        }
        Self::new(kraus)
    }

    /// Single-site channel acting on `site` of a multi-site factorization.
    pub fn local(site_kraus: &[CMatrix], dims: &[usize], site: usize) -> Result<Self> {
        let kraus = site_kraus.iter().map(|k| embed(k, dims, &[site])).collect::<Result<Vec<_>>>()?;
        Self::new(kraus)
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn input_dim(&self) -> usize {
        self.d_in
    }

    pub fn output_dim(&self) -> usize {
        self.d_out
    }

    /// `Σ K m K†` for any operator `m` (linear extension).
    pub fn apply(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.nrows() != self.d_in || m.ncols() != self.d_in {
            return Err(Error::Shape(format!("channel input {} vs operator {}x{}", self.d_in, m.nrows(), m.ncols())));
        }
        let mut out = CMatrix::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        Ok(out)
    }

    pub fn apply_hermitian(&self, m: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(HermitianMatrix::hermitian_part_of(self.apply(m.matrix())?))
    }

    /// Applies the channel to a state. Dimension-preserving channels keep the
    /// factorization; others produce a single site of the output dimension.
    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_hermitian(rho.matrix())?;
        let dims = if self.d_out == self.d_in { rho.dims().to_vec() } else { vec![self.d_out] };
        Ok(DensityMatrix::from_parts(out, dims))
    }
}

pub fn apply_channel(ch: &QuantumChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    ch.apply_state(rho)
}

fn check_unitary(u: &CMatrix) -> Result<()> {
    if u.nrows() != u.ncols() || u.nrows() == 0 {
        return Err(Error::NotSquare { rows: u.nrows(), cols: u.ncols() });
    }
    let d = u.nrows();
    let deviation = (u.adjoint() * u - CMatrix::identity(d, d)).norm();
    if deviation > CPTP_TOL * (d as f64).sqrt() {
        return Err(Error::Channel(format!("matrix is not unitary: ‖U†U − I‖_F = {deviation:.3e}")));
    }
    Ok(())
}

/// `e^{−iHt}`.
pub fn time_evolution(h: &HermitianMatrix, t: f64) -> Result<CMatrix> {
    h.eigh().map_complex(|e| C64::from_polar(1.0, -e * t), f64::NEG_INFINITY)
}

/// `2√(1 − 2^{−I})`: trace-norm bound implied by `F ≥ 2^{−I/2}`.
pub fn eps_safe(cmi_bits: f64) -> f64 {
    2.0 * (1.0 - (-cmi_bits.max(0.0)).exp2()).max(0.0).sqrt()
}

/// `√(4(1 − 2^{−I/2}))`, the stated form; reported, never asserted.
pub fn eps_stated(cmi_bits: f64) -> f64 {
    (4.0 * (1.0 - (-0.5 * cmi_bits.max(0.0)).exp2())).max(0.0).sqrt()
}

/// State, its Petz recovery and CMI, shared by the lemma checks.
struct Instance {
    rho: HermitianMatrix,
    recovered: HermitianMatrix,
    cmi: f64,
}

impl Instance {
    fn new(rho: &DensityMatrix, partition: &Partition) -> Result<Self> {
        let recovery = petz_recover(rho, partition, 0.0)?;
        Ok(Self { rho: rho.matrix().clone(), recovered: recovery.state, cmi: cmi(rho, partition)? })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma1Check {
    pub cmi: f64,
    /// `F(N(ρ), N(ρ̃))`.
    pub fidelity_after: f64,
    /// `F(N(ρ), N(ρ̃)) − 2^{−I/2}`.
    pub fidelity_margin: f64,
    /// `‖N(ρ) − N(ρ̃)‖₁`.
    pub trace_norm_after: f64,
    /// `‖ρ − ρ̃‖₁`.
    pub trace_norm_before: f64,
    pub eps_safe: f64,
    pub eps_stated: f64,
    /// `ε_safe − ‖N(ρ) − N(ρ̃)‖₁`.
    pub trace_margin: f64,
}

impl Lemma1Check {
    pub fn holds(&self) -> bool {
        self.fidelity_margin >= -MARGIN_TOL && self.trace_margin >= -MARGIN_TOL
    }
}

/// Fidelity and trace-norm closeness survive any channel applied to both the
/// state and its recovery.
pub fn check_lemma1(rho: &DensityMatrix, partition: &Partition, ch: &QuantumChannel) -> Result<Lemma1Check> {
    let inst = Instance::new(rho, partition)?;
    let out = ch.apply_hermitian(&inst.rho)?;
    let out_rec = ch.apply_hermitian(&inst.recovered)?;
    let fidelity_after = root_fidelity(&out, &out_rec)?;
    let trace_norm_after = out.sub(&out_rec)?.norm(NormKind::Trace);
    let trace_norm_before = inst.rho.sub(&inst.recovered)?.norm(NormKind::Trace);
    let eps = eps_safe(inst.cmi);
    Ok(Lemma1Check {
        cmi: inst.cmi,
        fidelity_after,
        fidelity_margin: fidelity_after - (-0.5 * inst.cmi).exp2(),
        trace_norm_after,
        trace_norm_before,
        eps_safe: eps,
        eps_stated: eps_stated(inst.cmi),
        trace_margin: eps - trace_norm_after,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma2Check {
    pub cmi: f64,
    /// `‖N₁(ρ) − N₂(ρ̃)‖₁`.
    pub lhs: f64,
    pub eps_safe: f64,
    pub eps_stated: f64,
    /// `2‖U₁ − U₂‖_∞`, an upper bound on the diamond distance of the two
    /// unitary channels.
    pub delta_upper: f64,
    pub bound: f64,
    pub margin: f64,
}

impl Lemma2Check {
    pub fn holds(&self) -> bool {
        self.margin >= -MARGIN_TOL
    }
}

/// Closeness under two different unitary evolutions.
pub fn check_lemma2(rho: &DensityMatrix, partition: &Partition, u1: &CMatrix, u2: &CMatrix) -> Result<Lemma2Check> {
    check_unitary(u1)?;
    check_unitary(u2)?;
    if u1.nrows() != rho.dim() || u2.nrows() != rho.dim() {
        return Err(Error::Shape("unitaries must act on the full space".into()));
    }
    let inst = Instance::new(rho, partition)?;
    let a = u1 * inst.rho.matrix() * u1.adjoint();
    let b = u2 * inst.recovered.matrix() * u2.adjoint();
    let lhs = HermitianMatrix::hermitian_part_of(a - b).norm(NormKind::Trace);
    let eps = eps_safe(inst.cmi);
    let delta_upper = 2.0 * norm(&(u1 - u2), NormKind::Operator);
    let bound = eps + delta_upper;
    Ok(Lemma2Check {
        cmi: inst.cmi,
        lhs,
        eps_safe: eps,
        eps_stated: eps_stated(inst.cmi),
        delta_upper,
        bound,
        margin: bound - lhs,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma3Check {
    pub cmi: f64,
    /// `‖O(ρ − ρ̃)‖₁`.
    pub lhs: f64,
    pub observable_norm: f64,
    pub eps_safe: f64,
    pub eps_stated: f64,
    pub bound: f64,
    pub margin: f64,
    /// `|Tr O ρ − Tr O ρ̃|`.
    pub expectation_gap: f64,
}

impl Lemma3Check {
    pub fn holds(&self) -> bool {
        self.margin >= -MARGIN_TOL && self.expectation_gap <= self.bound + MARGIN_TOL
    }
}

/// Observable expectation values of the state and its recovery agree up to
/// `‖O‖_∞ ε_safe`.
pub fn check_lemma3(rho: &DensityMatrix, partition: &Partition, obs: &HermitianMatrix) -> Result<Lemma3Check> {
    if obs.dim() != rho.dim() {
        return Err(Error::Shape(format!("observable {} vs state {}", obs.dim(), rho.dim())));
    }
    let inst = Instance::new(rho, partition)?;
    let delta = inst.rho.sub(&inst.recovered)?;
    let product = obs.matrix() * delta.matrix();
    let lhs = norm(&product, NormKind::Trace);
    let gap = product.trace().norm();
    let observable_norm = obs.norm(NormKind::Operator);
    let eps = eps_safe(inst.cmi);
    let bound = observable_norm * eps;
    Ok(Lemma3Check {
        cmi: inst.cmi,
        lhs,
        observable_norm,
        eps_safe: eps,
        eps_stated: eps_stated(inst.cmi),
        bound,
        margin: bound - lhs,
        expectation_gap: gap,
    })
}

/// High-temperature comparison of the Hamiltonian with the effective
/// Hamiltonian of the recovered state. Diagnostic only.
#[derive(Clone, Debug, PartialEq)]
pub struct Lemma4Report {
    pub beta: f64,
    pub cmi: f64,
    /// `‖H̃ − H_eff‖₁` with both sides made traceless.
    pub hamiltonian_gap: f64,
    /// `‖ρ − ρ̃‖₁`.
    pub trace_norm: f64,
    /// `√(1 − ¼‖ρ − ρ̃‖₁²)`.
    pub delta: f64,
    /// `δ / β`.
    pub bound: f64,
    pub holds: bool,
}

pub fn check_lemma4(h: &HermitianMatrix, partition: &Partition, beta: f64) -> Result<Lemma4Report> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Parameter(format!("lemma 4 needs a finite β > 0, got {beta}")));
    }
    let family = ThermalFamily::new(h, partition.dims().to_vec())?;
    let rho = family.state(beta)?;
    let recovery = petz_recover(&rho, partition, 0.0)?;
    let info = cmi(&rho, partition)?;

    let neg_log = |m: &HermitianMatrix| -> Result<HermitianMatrix> {
        let spec = m.eigh();
        Ok(spec.map(|x| -x.ln() / beta, spec.default_cutoff())?.traceless())
    };
    let h_eff = neg_log(rho.matrix())?;
    let h_rec = neg_log(&recovery.state)?;
    let hamiltonian_gap = h_rec.sub(&h_eff)?.norm(NormKind::Trace);
    let trace_norm = rho.matrix().sub(&recovery.state)?.norm(NormKind::Trace);
    let delta = (1.0 - 0.25 * trace_norm * trace_norm).max(0.0).sqrt();
    let bound = delta / beta;
    Ok(Lemma4Report {
        beta,
        cmi: info,
        hamiltonian_gap,
        trace_norm,
        delta,
        bound,
        holds: hamiltonian_gap <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::spinchain::{build_hamiltonian, ChainParams};
    use crate::thermal::gibbs_state;
    use approx::assert_abs_diff_eq;

    fn pauli() -> [CMatrix; 4] {
        let c = |v: [f64; 8]| {
            CMatrix::from_row_slice(2, 2, &[C64::new(v[0], v[1]), C64::new(v[2], v[3]), C64::new(v[4], v[5]), C64::new(v[6], v[7])])
        };
        [
            c([1., 0., 0., 0., 0., 0., 1., 0.]),
            c([0., 0., 1., 0., 1., 0., 0., 0.]),
            c([0., 0., 0., -1., 0., 1., 0., 0.]),
            c([1., 0., 0., 0., 0., 0., -1., 0.]),
        ]
    }

    #[test]
    fn identity_channel_is_noop() {
        let rho = random::random_density(vec![2, 2], 3, &mut random::rng(1));
        let out = apply_channel(&QuantumChannel::identity(4), &rho).unwrap();
        assert!((out.matrix().matrix() - rho.matrix().matrix()).norm() < 1e-15);
    }

    #[test]
    fn fully_depolarizing_qubit() {
        let ch = QuantumChannel::depolarizing(2, 1.0).unwrap();
        let rho = random::random_density(vec![2], 1, &mut random::rng(2));
        let out = ch.apply_state(&rho).unwrap();
        let expected = CMatrix::identity(2, 2).scale(0.5);
        assert!((out.matrix().matrix() - expected).norm() < 1e-14);
        // Same map from Pauli Kraus operators.
        let paulis = pauli().map(|p| p.scale(0.5));
        let ch2 = QuantumChannel::new(paulis.to_vec()).unwrap();
        let out2 = ch2.apply_state(&rho).unwrap();
        assert!((out2.matrix().matrix() - out.matrix().matrix()).norm() < 1e-14);
    }

    #[test]
    fn unitary_channel_preserves_spectrum() {
        let h = build_hamiltonian(&ChainParams::chaotic(3)).unwrap();
        let u = time_evolution(&h, 0.7).unwrap();
        let ch = QuantumChannel::unitary(u).unwrap();
        let rho = random::random_density(vec![2; 3], 4, &mut random::rng(3));
        let out = ch.apply_state(&rho).unwrap();
        let a = rho.matrix().eigenvalues();
        let b = out.matrix().eigenvalues();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn non_cptp_rejected() {
        let k = CMatrix::identity(2, 2).scale(0.9);
        assert!(matches!(QuantumChannel::new(vec![k]), Err(Error::Channel(_))));
        assert!(matches!(QuantumChannel::new(vec![]), Err(Error::Channel(_))));
        let not_unitary = CMatrix::identity(2, 2).scale(2.0);
        assert!(QuantumChannel::unitary(not_unitary).is_err());
    }

    #[test]
    fn eps_forms() {
        assert_eq!(eps_safe(0.0), 0.0);
        assert_abs_diff_eq!(eps_safe(1.0), 2.0 * 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(eps_stated(2.0), 2.0 * 0.5f64.sqrt(), epsilon = 1e-15);
        // The stated form is the tighter of the two.
        for i in [0.01, 0.3, 1.0, 4.0] {
            assert!(eps_stated(i) <= eps_safe(i));
        }
    }

    fn product_state() -> DensityMatrix {
        let mut r = random::rng(11);
        let f: Vec<DensityMatrix> = (0..3).map(|_| random::random_density(vec![2], 2, &mut r)).collect();
        DensityMatrix::product(&f).unwrap()
    }

    #[test]
    fn lemma1_product_state() {
        let rho = product_state();
        let p = Partition::qubits(3, vec![0], vec![1], vec![2]).unwrap();
        let ch = QuantumChannel::depolarizing(8, 0.3).unwrap();
        let c = check_lemma1(&rho, &p, &ch).unwrap();
        assert_abs_diff_eq!(c.fidelity_after, 1.0, epsilon = 1e-9);
        assert!(c.holds());
    }

    #[test]
    fn lemma1_gibbs_depolarized_site() {
        let h = build_hamiltonian(&ChainParams::chaotic(6)).unwrap();
        let rho = gibbs_state(&h, 1.0, vec![2; 6]).unwrap();
        let p = Partition::qubits(6, vec![0, 1], vec![2, 3], vec![4, 5]).unwrap();
        let kraus = pauli().map(|k| k.scale(0.5)).to_vec();
        let ch = QuantumChannel::local(&kraus, &[2; 6], 2).unwrap();
        let c = check_lemma1(&rho, &p, &ch).unwrap();
        assert!(c.fidelity_margin >= -MARGIN_TOL, "{c:?}");
        assert!(c.holds());
    }

    #[test]
    fn lemma1_unitary_evolution_preserves_trace_norm() {
        let h = build_hamiltonian(&ChainParams::chaotic(6)).unwrap();
        let rho = gibbs_state(&h, 1.0, vec![2; 6]).unwrap();
        let p = Partition::qubits(6, vec![0, 1], vec![2, 3], vec![4, 5]).unwrap();
        let ch = QuantumChannel::unitary(time_evolution(&h, 1.0).unwrap()).unwrap();
        let c = check_lemma1(&rho, &p, &ch).unwrap();
        assert_abs_diff_eq!(c.trace_norm_after, c.trace_norm_before, epsilon = 1e-10);
        assert!(c.trace_norm_after <= c.eps_safe);
    }

    #[test]
    fn lemma2_equal_unitaries_reduce_to_lemma1() {
        let h = build_hamiltonian(&ChainParams::chaotic(5)).unwrap();
        let rho = gibbs_state(&h, 2.0, vec![2; 5]).unwrap();
        let p = Partition::qubits(5, vec![0], vec![1, 2], vec![3, 4]).unwrap();
        let u = time_evolution(&h, 0.5).unwrap();
        let c = check_lemma2(&rho, &p, &u, &u).unwrap();
        assert_eq!(c.delta_upper, 0.0);
        assert!(c.holds());
    }

    #[test]
    fn lemma2_exact_recovery_is_bounded_by_delta() {
        let rho = product_state();
        let p = Partition::qubits(3, vec![0], vec![1], vec![2]).unwrap();
        let mut r = random::rng(5);
        let u1 = random::haar_unitary(8, &mut r);
        let u2 = random::haar_unitary(8, &mut r);
        let c = check_lemma2(&rho, &p, &u1, &u2).unwrap();
        assert!(c.eps_safe < 1e-4);
        assert!(c.lhs <= c.delta_upper + 1e-8);
    }

    #[test]
    fn lemma2_perturbed_hamiltonian() {
        let h = build_hamiltonian(&ChainParams::chaotic(6)).unwrap();
        let rho = gibbs_state(&h, 1.0, vec![2; 6]).unwrap();
        let p = Partition::qubits(6, vec![0, 1], vec![2, 3], vec![4, 5]).unwrap();
        let x0 = embed(&pauli()[1], &[2; 6], &[0]).unwrap();
        let h2 = h.add(&HermitianMatrix::new(x0.scale(0.1)).unwrap()).unwrap();
        let u1 = time_evolution(&h, 1.0).unwrap();
        let u2 = time_evolution(&h2, 1.0).unwrap();
        assert!(check_lemma2(&rho, &p, &u1, &u2).unwrap().holds());
    }

    #[test]
    fn lemma3_identity_and_zero() {
        let h = build_hamiltonian(&ChainParams::chaotic(5)).unwrap();
        let rho = gibbs_state(&h, 3.0, vec![2; 5]).unwrap();
        let p = Partition::qubits(5, vec![0], vec![1, 2], vec![3, 4]).unwrap();
        let id = check_lemma3(&rho, &p, &HermitianMatrix::identity(32)).unwrap();
        let rec = petz_recover(&rho, &p, 0.0).unwrap();
        let tn = rho.matrix().sub(&rec.state).unwrap().norm(NormKind::Trace);
        assert_abs_diff_eq!(id.lhs, tn, epsilon = 1e-12);
        assert_abs_diff_eq!(id.bound, id.eps_safe, epsilon = 1e-12);
        let zero = check_lemma3(&rho, &p, &HermitianMatrix::zeros(32)).unwrap();
        assert_eq!(zero.lhs, 0.0);
        assert_eq!(zero.bound, 0.0);
        assert!(zero.holds());
    }

    #[test]
    fn lemma4_product_state() {
        let h = build_hamiltonian(&ChainParams::new(4, 0.0, -0.5, 1.05)).unwrap();
        let p = Partition::qubits(4, vec![0], vec![1, 2], vec![3]).unwrap();
        let r = check_lemma4(&h, &p, 0.05).unwrap();
        assert!(r.hamiltonian_gap < 1e-8, "{r:?}");
        assert_abs_diff_eq!(r.bound, 1.0 / 0.05, epsilon = 1e-6);
        assert!(r.holds);
    }

    #[test]
    fn lemma4_rejects_zero_beta() {
        let h = build_hamiltonian(&ChainParams::chaotic(4)).unwrap();
        let p = Partition::qubits(4, vec![0], vec![1, 2], vec![3]).unwrap();
        assert!(matches!(check_lemma4(&h, &p, 0.0), Err(Error::Parameter(_))));
    }
}
