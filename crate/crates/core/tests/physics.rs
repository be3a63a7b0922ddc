//! Chain symmetries, exact Markov points, size invariance of the CMI curve,
//! and the band model against exact diagonalization.

use thermopetz::hilbert::{partial_trace, partial_trace_matrix, DensityMatrix, Partition, PERMUTE_EIGHT};
use thermopetz::linops::{matmul, norm, root_fidelity_with_sqrt, CMatrix, HermitianMatrix, NormKind, C64};
use thermopetz::petz::{petz_recover, recovery_report};
use thermopetz::rbm::{self, BandModel};
use thermopetz::random;
use thermopetz::spinchain::{build_hamiltonian, parity_blocks, sector_dims, sector_hamiltonians, ChainParams};
use thermopetz::thermal::{cmi, entropy_of_eigenvalues, geometric_grid, gibbs_state, ThermalFamily};

#[test]
fn sector_dimensions_match_orbit_count() {
    for l in 1..=10 {
        let (even, odd) = sector_dims(l);
        assert_eq!(even + odd, 1 << l);
        let palindromes = (0..1usize << l).filter(|&s| thermopetz::spinchain::reverse_sites(s, l) == s).count();
        assert_eq!(even - odd, palindromes, "L = {l}");
        let (e, o) = sector_hamiltonians(&ChainParams::chaotic(l.max(2)), 14).unwrap();
        if l >= 2 {
            assert_eq!((e.nrows(), o.nrows()), sector_dims(l));
        }
    }
}

#[test]
fn sector_spectra_partition_the_full_spectrum() {
    for params in [ChainParams::chaotic(7), ChainParams::integrable(8), ChainParams::new(6, -0.3, 0.7, 1.9)] {
        let h = build_hamiltonian(&params).unwrap();
        let (even, odd) = parity_blocks(&h, params.sites).unwrap();
        let (se, so) = sector_hamiltonians(&params, 14).unwrap();
        let mut joined: Vec<f64> = even.eigenvalues().into_iter().chain(odd.eigenvalues()).collect();
        joined.sort_by(f64::total_cmp);
        let full = h.eigenvalues();
        assert!(full.iter().zip(&joined).all(|(a, b)| (a - b).abs() < 1e-10));
        let sparse_even = HermitianMatrix::from_real(&se).unwrap().eigenvalues();
        let sparse_odd = HermitianMatrix::from_real(&so).unwrap().eigenvalues();
        assert!(sparse_even.iter().zip(&even.eigenvalues()).all(|(a, b)| (a - b).abs() < 1e-10));
        assert!(sparse_odd.iter().zip(&odd.eigenvalues()).all(|(a, b)| (a - b).abs() < 1e-10));
    }
}

#[test]
fn infinite_temperature_is_exact_for_every_partition() {
    let h = build_hamiltonian(&ChainParams::chaotic(8)).unwrap();
    let rho = gibbs_state(&h, 0.0, vec![2; 8]).unwrap();
    let partitions = [
        Partition::chain(8).unwrap(),
        Partition::permuted_eight(),
        Partition::qubits(8, vec![5], vec![0, 2, 7], vec![1, 3, 4, 6]).unwrap(),
    ];
    for p in &partitions {
        let r = recovery_report(&rho, p, 0.0).unwrap();
        assert!(r.cmi <= 1e-10);
        assert!(r.fidelity >= 1.0 - 1e-10);
        assert!(r.opnorm_distance <= 1e-9);
    }
}

#[test]
fn permuted_partition_equals_relabelled_state() {
    let h = build_hamiltonian(&ChainParams::chaotic(8)).unwrap();
    let fam = ThermalFamily::new(&h, vec![2; 8]).unwrap();
    let permuted = Partition::permuted_eight();
    let labels = permuted.labelled_blocks();
    let plain = Partition::qubits(8, labels.a, labels.b, labels.c).unwrap();
    for beta in [0.3, 2.0, 20.0] {
        let rho = fam.state(beta).unwrap();
        let moved = rho.permuted(&PERMUTE_EIGHT).unwrap();
        let direct = recovery_report(&rho, &permuted, 0.0).unwrap();
        let relabelled = recovery_report(&moved, &plain, 0.0).unwrap();
        assert!((direct.cmi - relabelled.cmi).abs() < 1e-10);
        assert!((direct.fidelity - relabelled.fidelity).abs() < 1e-9);
        assert!((direct.opnorm_distance - relabelled.opnorm_distance).abs() < 1e-9);
    }
}

/// `σ = L L†` with `L = (I_A ⊗ ρ_BC^{1/2})((I_A ⊗ ρ_B^{-1/2}) ρ_AB^{1/2} ⊗ I_C)`
/// for the Petz output, so `F(ρ, σ) = ‖√ρ L‖₁` needs no square root of `σ`.
#[test]
fn fidelity_matches_factorized_reference() {
    let l = 8;
    let h = build_hamiltonian(&ChainParams::chaotic(l)).unwrap();
    let fam = ThermalFamily::new(&h, vec![2; l]).unwrap();
    let p = Partition::chain(l).unwrap();
    let id = CMatrix::identity(4, 4);
    let power = |m: &DensityMatrix, e: f64| {
        let spec = m.matrix().eigh();
        let cutoff = if e < 0.0 { spec.default_cutoff() } else { 0.0 };
        spec.map_complex(|x| C64::new(x.powf(e), 0.0), cutoff).unwrap()
    };
    for beta in [0.5, 5.0, 30.0, 80.0] {
        let rho = fam.state(beta).unwrap();
        let sqrt_rho = fam.sqrt_state(beta).unwrap();
        let k_b = power(&partial_trace(&rho, &[2, 3, 4, 5]).unwrap(), -0.5);
        let k_bc = power(&partial_trace(&rho, &[2, 3, 4, 5, 6, 7]).unwrap(), 0.5);
        let r_ab = power(&partial_trace(&rho, &[0, 1, 2, 3, 4, 5]).unwrap(), 0.5);
        let g = matmul(&id.kronecker(&k_b), &r_ab);
        let factor = matmul(&id.kronecker(&k_bc), &g.kronecker(&id));
        let reference = norm(&matmul(sqrt_rho.matrix(), &factor), NormKind::Trace);
        let recovered = petz_recover(&rho, &p, 0.0).unwrap().state;
        let f = root_fidelity_with_sqrt(&sqrt_rho, &recovered).unwrap();
        assert!((f - reference).abs() < 1e-10, "β = {beta}: {f} vs {reference}");
    }
}

fn product_state(seed: u64) -> (DensityMatrix, Partition) {
    let mut rng = random::rng(seed);
    let factors: Vec<DensityMatrix> = [2usize, 4, 2].iter().map(|&d| random::random_density(vec![d], d, &mut rng)).collect();
    (DensityMatrix::product(&factors).unwrap(), Partition::tripartite(2, 4, 2).unwrap())
}

/// `p(a) p(b|a) p(c|b)` on three bits, placed on the diagonal.
fn classical_markov(seed: u64) -> (DensityMatrix, Partition) {
    use rand::Rng;
    let mut rng = random::rng(seed);
    let mut draw = |n: usize| -> Vec<f64> {
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    };
    let pa = draw(2);
    let pb_a = [draw(2), draw(2)];
    let pc_b = [draw(2), draw(2)];
    let mut probs = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                probs.push(pa[a] * pb_a[a][b] * pc_b[b][c]);
            }
        }
    }
    (DensityMatrix::diagonal(&probs, vec![2; 3]).unwrap(), Partition::tripartite(2, 2, 2).unwrap())
}

#[test]
fn markov_states_recover_exactly() {
    for seed in 0..10 {
        for (rho, p) in [product_state(seed), classical_markov(seed)] {
            assert!(cmi(&rho, &p).unwrap() <= 1e-10);
            let r = recovery_report(&rho, &p, 0.0).unwrap();
            assert!(r.fidelity >= 1.0 - 1e-9, "seed {seed}: {r:?}");
            assert!(r.trace_distance <= 1e-10);
        }
    }
}

#[test]
fn markov_recovery_keeps_ab_marginal() {
    for seed in 0..5 {
        let (rho, p) = classical_markov(seed);
        let rec = petz_recover(&rho, &p, 0.0).unwrap();
        let (x, _) = partial_trace_matrix(rec.state.matrix(), rho.dims(), &[0, 1]).unwrap();
        let (y, _) = partial_trace_matrix(rho.matrix().matrix(), rho.dims(), &[0, 1]).unwrap();
        assert!(norm(&(x - y), NormKind::Trace) < 1e-10);
    }
}

#[test]
fn product_state_recovery_ignores_rotation() {
    for seed in 0..5 {
        let (rho, p) = product_state(seed);
        let base = petz_recover(&rho, &p, 0.0).unwrap().state;
        for lambda in [-1.0, 1.0] {
            let other = petz_recover(&rho, &p, lambda).unwrap().state;
            assert!(norm(&(other.matrix() - base.matrix()), NormKind::Trace) < 1e-10);
        }
    }
}

/// Signs of the three-point smoothed discrete derivative, with steps below
/// `deadband · max` counted as flat, collapsed into runs.
fn sign_runs(curve: &[f64], deadband: f64) -> Vec<i8> {
    let smooth: Vec<f64> = (0..curve.len())
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 2).min(curve.len());
            curve[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let scale = curve.iter().cloned().fold(0.0, f64::max);
    let mut runs: Vec<i8> = Vec::new();
    for w in smooth.windows(2) {
        let d = w[1] - w[0];
        let s = if d.abs() <= deadband * scale { 0 } else { d.signum() as i8 };
        if runs.last() != Some(&s) {
            runs.push(s);
        }
    }
    runs
}

#[test]
fn cmi_curve_shape_is_size_independent() {
    let betas = geometric_grid(1e-2, 1e2, 40);
    let patterns: Vec<Vec<i8>> = [6usize, 8, 10]
        .iter()
        .map(|&l| {
            let h = build_hamiltonian(&ChainParams::chaotic(l)).unwrap();
            let fam = ThermalFamily::new(&h, vec![2; l]).unwrap();
            let p = Partition::chain(l).unwrap();
            let curve: Vec<f64> = betas.iter().map(|&b| cmi(&fam.state(b).unwrap(), &p).unwrap()).collect();
            sign_runs(&curve, 0.01)
        })
        .collect();
    assert_eq!(patterns[0], patterns[1]);
    assert_eq!(patterns[1], patterns[2]);
}

fn band(seed: u64) -> BandModel {
    BandModel::new([2, 2, 2], 0.0, 1e-3, 1.0, seed).unwrap()
}

#[test]
fn band_model_invariants() {
    for seed in 0..10 {
        for strength in [1e-1, 1e-2, 1e-3] {
            let m = band(seed).with_strength(strength).unwrap();
            let r = m.sample().unwrap();
            let cmp = rbm::compare_with(&r, &m).unwrap();
            assert!(cmp.exact_cmi >= 0.0);
            assert!(cmp.perturbative.bits >= -1e-12);
            assert!(cmp.recovery.fr_bound_margin >= -1e-8, "seed {seed} D {strength}: {:?}", cmp.recovery);
        }
    }
}

#[test]
fn degenerate_band_partition_has_no_cmi() {
    let m = BandModel::new([1, 6, 1], 0.0, 1e-2, 1.0, 3).unwrap();
    let p = rbm::perturbative_cmi(&m.sample().unwrap(), &m).unwrap();
    assert!(p.bits.abs() < 1e-12);
}

#[test]
fn perturbative_entropy_error_is_beyond_second_order() {
    let m = band(5);
    let rho1 = rbm::first_order_term(&m.sample().unwrap(), &m).unwrap();
    let d = m.dim();
    let ratios: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&s| {
            let state = rbm::first_order_state(&rho1, s);
            let exact = entropy_of_eigenvalues(&state.eigenvalues());
            let approx = rbm::perturbative_entropy(&rho1, d, s).unwrap();
            assert!(approx.valid);
            (exact - approx.bits).abs() / (s * s)
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
    assert!(ratios[2] < 1e-2 * ratios[0].max(1e-300) || ratios[2] < 1e-12);
}
