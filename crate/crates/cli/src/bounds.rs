//! Randomized lemma suites. Lemmas 1–3 are asserted against the safe
//! trace-norm bound; Lemma 4 is reported only.
//!
//! Instance `seed` for lemma `k` draws from `ChaCha8(seed)` on stream `k`: a
//! random qubit count, a random A/B/C split of shuffled sites, and either a
//! Gibbs state of a random mixed-field chain (even seeds) or a Wishart state
//! with a random Hamiltonian for the dynamics (odd seeds).

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thermopetz::bounds::{
    check_lemma1, check_lemma2, check_lemma3, check_lemma4, time_evolution, QuantumChannel, MARGIN_TOL,
};
use thermopetz::hilbert::{embed, DensityMatrix, Partition};
use thermopetz::linops::{CMatrix, HermitianMatrix, NormKind, C64};
use thermopetz::random;
use thermopetz::spinchain::{build_hamiltonian, ChainParams};
use thermopetz::thermal::gibbs_state;

use crate::config::BoundsConfig;
use crate::error::{CliError, Result};
use crate::output::{num, Schema};
use crate::RunOptions;

pub const SCHEMA: Schema = Schema {
    name: "bounds",
    columns: &[
        "lemma",
        "seed",
        "qubits",
        "state",
        "beta",
        "detail",
        "cmi_bits",
        "lhs",
        "bound",
        "margin",
        "eps_safe",
        "eps_stated",
        "asserted",
    ],
};

#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub qubits: usize,
    pub gibbs: bool,
    pub beta: f64,
    pub hamiltonian: HermitianMatrix,
    pub rho: DensityMatrix,
    pub partition: Partition,
}

fn rng_for(seed: u64, lemma: u8) -> ChaCha8Rng {
    let mut rng = random::rng(seed);
    rng.set_stream(lemma as u64);
    rng
}

fn random_partition<R: Rng>(n: usize, rng: &mut R) -> Result<Partition> {
    let mut sites: Vec<usize> = (0..n).collect();
    sites.shuffle(rng);
    let a = rng.random_range(1..=n - 2);
    let c = rng.random_range(1..=n - 1 - a);
    let mut blocks = [sites[..a].to_vec(), sites[a..n - c].to_vec(), sites[n - c..].to_vec()];
    for b in &mut blocks {
        b.sort_unstable();
    }
    let [a, b, c] = blocks;
    Ok(Partition::qubits(n, a, b, c)?)
}

fn random_chain<R: Rng>(n: usize, rng: &mut R) -> ChainParams {
    ChainParams::new(n, rng.random_range(-1.5..1.5), rng.random_range(-1.0..1.0), rng.random_range(0.2..1.5))
}

/// Draws instance `seed` of lemma `lemma`.
pub fn instance(seed: u64, lemma: u8, cfg: &BoundsConfig) -> Result<Instance> {
    if cfg.min_qubits < 3 || cfg.max_qubits < cfg.min_qubits || cfg.max_qubits > 6 {
        return Err(CliError::Config(format!(
            "lemma instances need 3 ≤ min_qubits ≤ max_qubits ≤ 6, got {}..{}",
            cfg.min_qubits, cfg.max_qubits
        )));
    }
    let mut rng = rng_for(seed, lemma);
    let n = rng.random_range(cfg.min_qubits..=cfg.max_qubits);
    let partition = random_partition(n, &mut rng)?;
    let d = 1usize << n;
    let gibbs = seed % 2 == 0;
    let (hamiltonian, rho, beta) = if gibbs {
        let h = build_hamiltonian(&random_chain(n, &mut rng))?;
        let beta = 10f64.powf(rng.random_range(-1.0..0.5));
        let rho = gibbs_state(&h, beta, vec![2; n])?;
        (h, rho, beta)
    } else {
        let rank = *[1, 2, d / 2, d].choose(&mut rng).expect("non-empty");
        let rho = random::random_density(vec![2; n], rank, &mut rng);
        (random::random_hermitian(d, &mut rng), rho, f64::NAN)
    };
    Ok(Instance { seed, qubits: n, gibbs, beta, hamiltonian, rho, partition })
}

fn pauli_x() -> CMatrix {
    let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    CMatrix::from_row_slice(2, 2, &[z, o, o, z])
}

fn pauli_z() -> CMatrix {
    let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    CMatrix::from_row_slice(2, 2, &[o, z, z, -o])
}

/// One CSV row of the suite.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaRecord {
    pub lemma: u8,
    pub seed: u64,
    pub qubits: usize,
    pub gibbs: bool,
    pub beta: f64,
    pub detail: String,
    pub cmi: f64,
    pub lhs: f64,
    pub bound: f64,
    pub margin: f64,
    pub eps_safe: Option<f64>,
    pub eps_stated: Option<f64>,
    pub asserted: bool,
    pub holds: bool,
}

impl LemmaRecord {
    pub fn row(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        vec![
            self.lemma.to_string(),
            self.seed.to_string(),
            self.qubits.to_string(),
            if self.gibbs { "gibbs" } else { "wishart" }.to_string(),
            if self.beta.is_nan() { String::new() } else { num(self.beta) },
            self.detail.clone(),
            num(self.cmi),
            num(self.lhs),
            num(self.bound),
            num(self.margin),
            opt(self.eps_safe),
            opt(self.eps_stated),
            self.asserted.to_string(),
        ]
    }

    pub fn violation(&self) -> bool {
        self.asserted && !self.holds
    }
}

fn lemma1(inst: &Instance, rng: &mut ChaCha8Rng) -> Result<LemmaRecord> {
    let n = inst.qubits;
    let d = 1usize << n;
    let (detail, ch) = match rng.random_range(0..3) {
        0 => {
            let k = rng.random_range(1..=4);
            (format!("random_kraus_{k}"), QuantumChannel::new(random::random_kraus(d, k, rng))?)
        }
        1 => {
            let site = rng.random_range(0..n);
            let p: f64 = rng.random();
            let local = QuantumChannel::depolarizing(2, p)?;
            (format!("depolarize_site_{site}"), QuantumChannel::local(local.kraus(), &vec![2; n], site)?)
        }
        _ => {
            let t: f64 = rng.random_range(0.1..2.0);
            ("unitary_evolution".into(), QuantumChannel::unitary(time_evolution(&inst.hamiltonian, t)?)?)
        }
    };
    let c = check_lemma1(&inst.rho, &inst.partition, &ch)?;
    Ok(LemmaRecord {
        lemma: 1,
        seed: inst.seed,
        qubits: n,
        gibbs: inst.gibbs,
        beta: inst.beta,
        detail,
        cmi: c.cmi,
        lhs: c.trace_norm_after,
        bound: c.eps_safe,
        margin: c.trace_margin.min(c.fidelity_margin),
        eps_safe: Some(c.eps_safe),
        eps_stated: Some(c.eps_stated),
        asserted: true,
        holds: c.holds(),
    })
}

fn lemma2(inst: &Instance, rng: &mut ChaCha8Rng) -> Result<LemmaRecord> {
    let d = 1usize << inst.qubits;
    let t: f64 = rng.random_range(0.1..2.0);
    let eps: f64 = rng.random_range(0.0..0.3);
    let v = random::random_hermitian(d, rng);
    let v = v.scale(1.0 / v.norm(NormKind::Operator));
    let u1 = time_evolution(&inst.hamiltonian, t)?;
    let u2 = time_evolution(&inst.hamiltonian.add(&v.scale(eps))?, t)?;
    let c = check_lemma2(&inst.rho, &inst.partition, &u1, &u2)?;
    Ok(LemmaRecord {
        lemma: 2,
        seed: inst.seed,
        qubits: inst.qubits,
        gibbs: inst.gibbs,
        beta: inst.beta,
        detail: format!("perturbation_{}", num(eps)),
        cmi: c.cmi,
        lhs: c.lhs,
        bound: c.bound,
        margin: c.margin,
        eps_safe: Some(c.eps_safe),
        eps_stated: Some(c.eps_stated),
        asserted: true,
        holds: c.holds(),
    })
}

fn lemma3(inst: &Instance, rng: &mut ChaCha8Rng) -> Result<LemmaRecord> {
    let n = inst.qubits;
    let (detail, obs) = if rng.random_bool(0.5) {
        ("random_hermitian".to_string(), random::random_hermitian(1 << n, rng))
    } else {
        let site = rng.random_range(0..n);
        let p = if rng.random_bool(0.5) { pauli_x() } else { pauli_z() };
        (format!("pauli_site_{site}"), HermitianMatrix::new(embed(&p, &vec![2; n], &[site])?)?)
    };
    let c = check_lemma3(&inst.rho, &inst.partition, &obs)?;
    Ok(LemmaRecord {
        lemma: 3,
        seed: inst.seed,
        qubits: n,
        gibbs: inst.gibbs,
        beta: inst.beta,
        detail,
        cmi: c.cmi,
        lhs: c.lhs,
        bound: c.bound,
        margin: c.margin,
        eps_safe: Some(c.eps_safe),
        eps_stated: Some(c.eps_stated),
        asserted: true,
        holds: c.holds(),
    })
}

fn lemma4(seed: u64, beta: f64, cfg: &BoundsConfig) -> Result<LemmaRecord> {
    let mut rng = rng_for(seed, 4);
    let n = rng.random_range(cfg.min_qubits..=cfg.max_qubits);
    let partition = random_partition(n, &mut rng)?;
    let h = build_hamiltonian(&random_chain(n, &mut rng))?;
    let r = check_lemma4(&h, &partition, beta)?;
    Ok(LemmaRecord {
        lemma: 4,
        seed,
        qubits: n,
        gibbs: true,
        beta,
        detail: "effective_hamiltonian".into(),
        cmi: r.cmi,
        lhs: r.hamiltonian_gap,
        bound: r.bound,
        margin: r.bound - r.hamiltonian_gap,
        eps_safe: None,
        eps_stated: None,
        asserted: false,
        holds: r.holds,
    })
}

/// Runs one randomized instance of lemma 1, 2 or 3.
pub fn run_instance(lemma: u8, seed: u64, cfg: &BoundsConfig) -> Result<LemmaRecord> {
    let inst = instance(seed, lemma, cfg)?;
    // Stream 8 + k keeps the channel and observable draws independent of the
    // state draws.
    let mut rng = rng_for(seed, 8 + lemma);
    match lemma {
        1 => lemma1(&inst, &mut rng),
        2 => lemma2(&inst, &mut rng),
        3 => lemma3(&inst, &mut rng),
        _ => Err(CliError::Config(format!("lemma {lemma} has no randomized assertion suite"))),
    }
}

/// Rows ordered by lemma, then seed, then β.
pub fn run(cfg: &BoundsConfig, opts: &RunOptions) -> Result<Vec<LemmaRecord>> {
    let mut lemmas = cfg.lemmas.clone();
    lemmas.sort_unstable();
    lemmas.dedup();
    if let Some(bad) = lemmas.iter().find(|&&l| !(1..=4).contains(&l)) {
        return Err(CliError::Config(format!("unknown lemma {bad}")));
    }
    let mut tasks: Vec<(u8, u64, f64)> = Vec::new();
    for &l in &lemmas {
        if l == 4 {
            for i in 0..cfg.lemma4_instances as u64 {
                for &b in &cfg.lemma4_betas {
                    tasks.push((4, opts.seed.wrapping_add(i), b));
                }
            }
        } else {
            for i in 0..cfg.instances as u64 {
                tasks.push((l, opts.seed.wrapping_add(i), f64::NAN));
            }
        }
    }
    tasks
        .par_iter()
        .map(|&(l, seed, beta)| if l == 4 { lemma4(seed, beta, cfg) } else { run_instance(l, seed, cfg) })
        .collect()
}

pub fn rows(records: &[LemmaRecord]) -> Vec<Vec<String>> {
    records.iter().map(LemmaRecord::row).collect()
}

pub fn check(records: &[LemmaRecord]) -> Result<()> {
    let bad: Vec<&LemmaRecord> = records.iter().filter(|r| r.violation()).collect();
    match bad.first() {
        None => Ok(()),
        Some(r) => Err(CliError::Violation(format!(
            "{} asserted lemma checks failed; first: lemma {} seed {} margin {:.3e} (tolerance {MARGIN_TOL:e})",
            bad.len(),
            r.lemma,
            r.seed,
            r.margin
        ))),
    }
}
