//! Open Ising-type chain `H = α Σ Z_i Z_{i+1} + h_z Σ Z_i + J_x Σ X_i`,
//! its site-reversal parity and the parity-sector blocks.
//!
//! Basis state `s` has site `i` in bit `L-1-i` (site 0 most significant);
//! bit 0 is spin up, `Z = +1`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linops::{HermitianMatrix, NormKind};

pub const DEFAULT_MAX_SITES: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainParams {
    pub sites: usize,
    pub alpha: f64,
    pub h_z: f64,
    pub j_x: f64,
}

impl ChainParams {
    pub fn new(sites: usize, alpha: f64, h_z: f64, j_x: f64) -> Self {
        Self { sites, alpha, h_z, j_x }
    }

    /// α = 1.0, J_x = 1.05, h_z = −0.5.
    pub fn chaotic(sites: usize) -> Self {
        Self::new(sites, 1.0, -0.5, 1.05)
    }

    /// Transverse-field Ising limit: the chaotic point with h_z = 0.
    pub fn integrable(sites: usize) -> Self {
        Self::new(sites, 1.0, 0.0, 1.05)
    }

    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    fn check(&self, max_sites: usize) -> Result<()> {
        if self.sites == 0 {
            return Err(Error::Parameter("chain needs at least one site".into()));
        }
        if self.sites > max_sites {
            return Err(Error::Resource {
                sites: self.sites,
                max_sites,
                bytes: dense_bytes(self.sites),
            });
        }
        Ok(())
    }

    /// Visits every nonzero `(row, col, value)` of the Hamiltonian, column by
    /// column.
    pub fn for_each_entry<F: FnMut(usize, usize, f64)>(&self, mut f: F) {
        let l = self.sites;
        for col in 0..self.dim() {
            let z = |i: usize| if (col >> (l - 1 - i)) & 1 == 0 { 1.0 } else { -1.0 };
            let bonds: f64 = (0..l.saturating_sub(1)).map(|i| z(i) * z(i + 1)).sum();
            let field: f64 = (0..l).map(z).sum();
            let diag = self.alpha * bonds + self.h_z * field;
            if diag != 0.0 {
                f(col, col, diag);
            }
            if self.j_x != 0.0 {
                for i in 0..l {
                    f(col ^ (1 << (l - 1 - i)), col, self.j_x);
                }
            }
        }
    }
}

/// Bytes in one dense complex matrix on `sites` qubits.
pub fn dense_bytes(sites: usize) -> u128 {
    let d = 1u128 << sites.min(64);
    d * d * 16
}

/// Dense Hamiltonian, refusing chains longer than [`DEFAULT_MAX_SITES`].
pub fn build_hamiltonian(params: &ChainParams) -> Result<HermitianMatrix> {
    build_hamiltonian_capped(params, DEFAULT_MAX_SITES)
}

pub fn build_hamiltonian_capped(params: &ChainParams, max_sites: usize) -> Result<HermitianMatrix> {
    params.check(max_sites)?;
    let d = params.dim();
    let mut m = DMatrix::<f64>::zeros(d, d);
    params.for_each_entry(|r, c, v| m[(r, c)] += v);
    HermitianMatrix::from_real(&m)
}

/// Reverses the order of the `sites` lowest bits.
pub fn reverse_sites(state: usize, sites: usize) -> usize {
    (0..sites).fold(0, |acc, i| acc | (((state >> i) & 1) << (sites - 1 - i)))
}

/// `P |s_1 … s_L⟩ = |s_L … s_1⟩`.
pub fn parity_operator(sites: usize) -> HermitianMatrix {
    let d = 1usize << sites;
    let mut m = DMatrix::<f64>::zeros(d, d);
    for s in 0..d {
        m[(reverse_sites(s, sites), s)] = 1.0;
    }
    HermitianMatrix::from_real(&m).expect("permutation by an involution is symmetric")
}

/// `(2^L + 2^⌈L/2⌉)/2` even and `(2^L − 2^⌈L/2⌉)/2` odd states.
pub fn sector_dims(sites: usize) -> (usize, usize) {
    let d = 1usize << sites;
    let fixed = 1usize << sites.div_ceil(2);
    ((d + fixed) / 2, (d - fixed) / 2)
}

/// Orthonormal parity-adapted basis built from orbits `{s, reverse(s)}`:
/// palindromes are even basis vectors on their own; every other pair gives
/// `(|s⟩ ± |r⟩)/√2` with `s < r`.
#[derive(Clone, Debug)]
pub struct ParityBasis {
    sites: usize,
    even_dim: usize,
    odd_dim: usize,
    /// Per computational state: even position and coefficient.
    even: Vec<(usize, f64)>,
    /// Per computational state: odd position and coefficient (0 for palindromes).
    odd: Vec<(usize, f64)>,
}

impl ParityBasis {
    pub fn new(sites: usize) -> Self {
        let d = 1usize << sites;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut even = vec![(0, 0.0); d];
        let mut odd = vec![(0, 0.0); d];
        let (mut ne, mut no) = (0, 0);
        for s in 0..d {
            let r = reverse_sites(s, sites);
            if s == r {
                even[s] = (ne, 1.0);
                ne += 1;
            } else if s < r {
                even[s] = (ne, h);
                even[r] = (ne, h);
                odd[s] = (no, h);
                odd[r] = (no, -h);
                ne += 1;
                no += 1;
            }
        }
        Self { sites, even_dim: ne, odd_dim: no, even, odd }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.even_dim, self.odd_dim)
    }

    /// Projects a Hermitian operator given entry-wise into both sectors.
    fn project<F>(&self, visit: F) -> (DMatrix<f64>, DMatrix<f64>)
    where
        F: FnOnce(&mut dyn FnMut(usize, usize, f64)),
    {
        let mut even = DMatrix::<f64>::zeros(self.even_dim, self.even_dim);
        let mut odd = DMatrix::<f64>::zeros(self.odd_dim, self.odd_dim);
        visit(&mut |r, c, v| {
            let (er, ecr) = self.even[r];
            let (ec, ecc) = self.even[c];
            even[(er, ec)] += ecr * ecc * v;
            let (or, ocr) = self.odd[r];
            let (oc, occ) = self.odd[c];
            if ocr != 0.0 && occ != 0.0 {
                odd[(or, oc)] += ocr * occ * v;
            }
        });
        (even, odd)
    }
}

/// Restricts a parity-symmetric Hamiltonian to the even and odd sectors.
pub fn parity_blocks(h: &HermitianMatrix, sites: usize) -> Result<(HermitianMatrix, HermitianMatrix)> {
    let d = 1usize << sites;
    if h.dim() != d {
        return Err(Error::Shape(format!("{sites} sites need dimension {d}, got {}", h.dim())));
    }
    let p = parity_operator(sites);
    let commutator = h.matrix() * p.matrix() - p.matrix() * h.matrix();
    let comm_norm = crate::linops::norm(&commutator, NormKind::Frobenius);
    if comm_norm > 1e-10 * h.matrix().norm().max(1.0) {
        return Err(Error::Symmetry { commutator: comm_norm });
    }
    if !h.is_real() {
        return complex_parity_blocks(h, sites);
    }
    let basis = ParityBasis::new(sites);
    let m = h.matrix();
    let (even, odd) = basis.project(|f| {
        for c in 0..d {
            for r in 0..d {
                let v = m[(r, c)].re;
                if v != 0.0 {
                    f(r, c, v);
                }
            }
        }
    });
    Ok((HermitianMatrix::from_real(&even)?, HermitianMatrix::from_real(&odd)?))
}

fn complex_parity_blocks(h: &HermitianMatrix, sites: usize) -> Result<(HermitianMatrix, HermitianMatrix)> {
    let basis = ParityBasis::new(sites);
    let (ne, no) = basis.dims();
    let d = h.dim();
    let m = h.matrix();
    let mut even = crate::linops::CMatrix::zeros(ne, ne);
    let mut odd = crate::linops::CMatrix::zeros(no, no);
    for c in 0..d {
        for r in 0..d {
            let v = m[(r, c)];
            let (er, a) = basis.even[r];
            let (ec, b) = basis.even[c];
            even[(er, ec)] += v * (a * b);
            let (or, a) = basis.odd[r];
            let (oc, b) = basis.odd[c];
            if a != 0.0 && b != 0.0 {
                odd[(or, oc)] += v * (a * b);
            }
        }
    }
    Ok((HermitianMatrix::new(even)?, HermitianMatrix::new(odd)?))
}

/// Even and odd sector blocks built directly from the sparse Hamiltonian,
/// without ever forming the `2^L` dense matrix.
pub fn sector_hamiltonians(params: &ChainParams, max_sites: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    params.check(max_sites)?;
    let basis = ParityBasis::new(params.sites);
    Ok(basis.project(|f| params.for_each_entry(f)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::CMatrix;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_bond() {
        let h = build_hamiltonian(&ChainParams::new(2, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(h, HermitianMatrix::from_diagonal(&[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn single_site_has_no_bonds() {
        let h = build_hamiltonian(&ChainParams::new(1, 7.0, 0.3, 0.8)).unwrap();
        let m = h.real_part();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[0.3, 0.8, 0.8, -0.3]));
    }

    #[test]
    fn traceless() {
        let h = build_hamiltonian(&ChainParams::chaotic(6)).unwrap();
        assert_abs_diff_eq!(h.trace(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn resource_guard() {
        let r = build_hamiltonian_capped(&ChainParams::chaotic(9), 8);
        assert!(matches!(r, Err(Error::Resource { sites: 9, max_sites: 8, .. })));
    }

    #[test]
    fn parity_swaps_two_sites() {
        let p = parity_operator(2);
        // P|01> = |10>: column 1 has its one in row 2.
        assert_eq!(p.matrix()[(2, 1)].re, 1.0);
        assert_eq!(p.matrix()[(1, 1)].re, 0.0);
    }

    #[test]
    fn parity_squares_to_identity() {
        let p = parity_operator(3);
        assert_eq!(p.matrix() * p.matrix(), CMatrix::identity(8, 8));
        let values = p.eigenvalues();
        assert!(values.iter().all(|v| (v.abs() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn parity_conjugates_first_site_to_last() {
        let x = CMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0].map(|v| crate::linops::C64::new(v, 0.0)));
        let dims = [2; 4];
        let x1 = crate::hilbert::embed(&x, &dims, &[0]).unwrap();
        let x4 = crate::hilbert::embed(&x, &dims, &[3]).unwrap();
        let p = parity_operator(4);
        let conj = p.matrix() * x1 * p.matrix().adjoint();
        assert_abs_diff_eq!((conj - x4).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn chaotic_hamiltonian_commutes_with_parity() {
        let h = build_hamiltonian(&ChainParams::chaotic(8)).unwrap();
        let p = parity_operator(8);
        let c = h.matrix() * p.matrix() - p.matrix() * h.matrix();
        assert!(crate::linops::norm(&c, NormKind::Operator) < 1e-12);
    }

    #[test]
    fn block_dims() {
        assert_eq!(sector_dims(2), (3, 1));
        assert_eq!(sector_dims(3), (6, 2));
        for l in 1..=10 {
            assert_eq!(ParityBasis::new(l).dims(), sector_dims(l), "L = {l}");
        }
    }

    #[test]
    fn identity_blocks() {
        let (e, o) = parity_blocks(&HermitianMatrix::identity(4), 2).unwrap();
        assert!((e.matrix() - HermitianMatrix::identity(3).matrix()).norm() < 1e-15);
        assert!((o.matrix() - HermitianMatrix::identity(1).matrix()).norm() < 1e-15);
    }

    #[test]
    fn non_commuting_input_rejected() {
        // Z on site 0 only does not commute with reversal.
        let z0 = HermitianMatrix::from_diagonal(&[1.0, 1.0, -1.0, -1.0]);
        assert!(matches!(parity_blocks(&z0, 2), Err(Error::Symmetry { .. })));
    }

    #[test]
    fn sparse_and_dense_blocks_agree() {
        let params = ChainParams::chaotic(6);
        let h = build_hamiltonian(&params).unwrap();
        let (e, o) = parity_blocks(&h, 6).unwrap();
        let (se, so) = sector_hamiltonians(&params, 14).unwrap();
        assert_abs_diff_eq!((e.real_part() - se).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((o.real_part() - so).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn reverse_sites_examples() {
        assert_eq!(reverse_sites(0b001, 3), 0b100);
        assert_eq!(reverse_sites(0b0110, 4), 0b0110);
        assert_eq!(reverse_sites(0b1101, 4), 0b1011);
    }
}
