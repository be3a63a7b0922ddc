//! Seeded random instances: states, unitaries, observables, channels and
//! GOE matrices. All generators take an explicit RNG so runs are
//! reproducible from a single seed.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hilbert::DensityMatrix;
use crate::linops::{CMatrix, HermitianMatrix, C64};

/// Deterministic RNG for a seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ginibre<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

/// Wishart state `G G† / Tr(G G†)` with `G` of shape `d × rank`.
pub fn random_density<R: Rng>(dims: Vec<usize>, rank: usize, rng: &mut R) -> DensityMatrix {
    let d: usize = dims.iter().product();
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    DensityMatrix::from_parts(HermitianMatrix::hermitian_part_of(m.unscale(tr)), dims)
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix with
/// the phases of `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary<R: Rng>(d: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(d, d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// GUE-style Hermitian matrix `(G + G†)/2`.
pub fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> HermitianMatrix {
    let g = ginibre(d, d, rng);
    HermitianMatrix::hermitian_part_of(g)
}

/// Real symmetric GOE matrix: off-diagonal variance 1/2, diagonal variance 1.
pub fn goe<R: Rng>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    (&g + g.transpose()).scale(0.5)
}

/// Kraus operators of a random channel on dimension `d` with `n` operators,
/// taken as the blocks of a random `n·d × d` isometry.
pub fn random_kraus<R: Rng>(d: usize, n: usize, rng: &mut R) -> Vec<CMatrix> {
    let n = n.max(1);
    let qr = ginibre(n * d, d, rng).qr();
    let v = qr.q();
    (0..n).map(|k| v.rows(k * d, d).into_owned()).collect()
}
