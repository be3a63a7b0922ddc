//! Tensor-product bookkeeping.
//!
//! A global basis index is a mixed-radix number whose most significant digit
//! belongs to site 0. Every routine here (and every module built on top) uses
//! that convention, and subsystem operators are always indexed by their sites
//! in ascending order.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linops::{kron, matmul, CMatrix, HermitianMatrix, C64, POSITIVITY_TOL};

/// Trace tolerance for [`DensityMatrix::new`].
pub const TRACE_TOL: f64 = 1e-10;

/// The paper-style eight-site relabeling: position `p` of the permuted chain
/// holds original site `PERMUTE_EIGHT[p]`.
pub const PERMUTE_EIGHT: [usize; 8] = [3, 4, 1, 2, 5, 6, 0, 7];

/// A/B/C blocks over sites with given local dimensions.
///
/// Blocks are written in the labels of the (optionally) permuted chain; the
/// permutation maps a permuted position to the original site it holds, so
/// [`Partition::resolved`] gives the same blocks in original labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    dims: Vec<usize>,
    a: Vec<usize>,
    b: Vec<usize>,
    c: Vec<usize>,
    permutation: Vec<usize>,
}

/// Block site sets in original labels, each sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Blocks {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
}

impl Blocks {
    pub fn ab(&self) -> Vec<usize> {
        union(&self.a, &self.b)
    }

    pub fn bc(&self) -> Vec<usize> {
        union(&self.b, &self.c)
    }

    pub fn all(&self) -> Vec<usize> {
        union(&self.ab(), &self.c)
    }
}

impl Partition {
    pub fn new(dims: Vec<usize>, a: Vec<usize>, b: Vec<usize>, c: Vec<usize>) -> Result<Self> {
        let n = dims.len();
        Self::with_permutation(dims, a, b, c, (0..n).collect())
    }

    pub fn with_permutation(
        dims: Vec<usize>,
        a: Vec<usize>,
        b: Vec<usize>,
        c: Vec<usize>,
        permutation: Vec<usize>,
    ) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Partition("no sites".into()));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::Partition(format!("site {pos} has local dimension 0")));
        }
        validate_permutation(&permutation, dims.len())?;
        let n = dims.len();
        let mut seen = vec![false; n];
        for (label, block) in [("A", &a), ("B", &b), ("C", &c)] {
            for &s in block {
                if s >= n {
                    return Err(Error::Partition(format!("block {label} has site {s} >= {n}")));
                }
                if seen[s] {
                    return Err(Error::Partition(format!("site {s} appears twice")));
                }
                seen[s] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Partition(format!("site {missing} is in no block")));
        }
        Ok(Self { dims, a: sorted(a), b: sorted(b), c: sorted(c), permutation })
    }

    /// Qubit chain of `n` sites.
    pub fn qubits(n: usize, a: Vec<usize>, b: Vec<usize>, c: Vec<usize>) -> Result<Self> {
        Self::new(vec![2; n], a, b, c)
    }

    /// Three factors `d_a ⊗ d_b ⊗ d_c`, one site each.
    pub fn tripartite(d_a: usize, d_b: usize, d_c: usize) -> Result<Self> {
        Self::new(vec![d_a, d_b, d_c], vec![0], vec![1], vec![2])
    }

    /// Contiguous split of a qubit chain: A is the first two sites, C the last
    /// two, B everything in between.
    pub fn chain(n: usize) -> Result<Self> {
        if n < 5 {
            return Err(Error::Partition(format!("chain split needs at least 5 sites, got {n}")));
        }
        Self::qubits(n, vec![0, 1], (2..n - 2).collect(), vec![n - 2, n - 1])
    }

    /// Eight-site chain relabeled by [`PERMUTE_EIGHT`] with blocks
    /// A=(0,1), B=(2..5), C=(6,7) in permuted labels, i.e. A=(3,4),
    /// B=(1,2,5,6), C=(0,7) on the original lattice.
    pub fn permuted_eight() -> Self {
        Self::with_permutation(
            vec![2; 8],
            vec![0, 1],
            vec![2, 3, 4, 5],
            vec![6, 7],
            PERMUTE_EIGHT.to_vec(),
        )
        .expect("static partition is valid")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn is_permuted(&self) -> bool {
        self.permutation.iter().enumerate().any(|(i, &p)| i != p)
    }

    /// Blocks in permuted labels, as given at construction.
    pub fn labelled_blocks(&self) -> Blocks {
        Blocks { a: self.a.clone(), b: self.b.clone(), c: self.c.clone() }
    }

    /// Blocks in original site labels.
    pub fn resolved(&self) -> Blocks {
        let map = |block: &[usize]| sorted(block.iter().map(|&p| self.permutation[p]).collect());
        Blocks { a: map(&self.a), b: map(&self.b), c: map(&self.c) }
    }

    /// Dimensions of the A, B and C factors.
    pub fn block_dims(&self) -> (usize, usize, usize) {
        let blocks = self.resolved();
        let d = |s: &[usize]| s.iter().map(|&i| self.dims[i]).product::<usize>();
        (d(&blocks.a), d(&blocks.b), d(&blocks.c))
    }

    /// The same partition with A and C exchanged.
    pub fn swap_ac(&self) -> Self {
        Self { a: self.c.clone(), c: self.a.clone(), ..self.clone() }
    }
}

/// A unit-trace positive semidefinite operator on an explicit tensor
/// factorization.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates shape, unit trace within [`TRACE_TOL`] and positivity within
    /// [`POSITIVITY_TOL`].
    pub fn new(matrix: HermitianMatrix, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, matrix.dim())?;
        let trace = matrix.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::Normalization { trace });
        }
        let min_eigenvalue = matrix.eigenvalues()[0];
        if min_eigenvalue < -POSITIVITY_TOL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix, dims })
    }

    /// Skips the trace and positivity checks; for states that are valid by
    /// construction.
    pub(crate) fn from_parts(matrix: HermitianMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.dim());
        Self { matrix, dims }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self::from_parts(HermitianMatrix::identity(d).scale(1.0 / d as f64), dims)
    }

    /// `|ψ⟩⟨ψ|` for a normalized vector.
    pub fn pure(psi: &[C64], dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, psi.len())?;
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::Normalization { trace: norm });
        }
        let v = nalgebra::DVector::from_column_slice(psi);
        let m = &v * v.adjoint();
        Ok(Self::from_parts(HermitianMatrix::hermitian_part_of(m), dims))
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probs: &[f64], dims: Vec<usize>) -> Result<Self> {
        Self::new(HermitianMatrix::from_diagonal(probs), dims)
    }

    /// Tensor product of states, in order.
    pub fn product(factors: &[DensityMatrix]) -> Result<Self> {
        let first = factors.first().ok_or_else(|| Error::Shape("empty product".into()))?;
        let mut m = first.matrix().matrix().clone();
        let mut dims = first.dims.clone();
        for f in &factors[1..] {
            m = kron(&m, f.matrix().matrix());
            dims.extend_from_slice(&f.dims);
        }
        Ok(Self::from_parts(HermitianMatrix::hermitian_part_of(m), dims))
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Conjugation by a unitary, keeping the factorization.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::Shape(format!("unitary {}x{} on dim {}", u.nrows(), u.ncols(), self.dim())));
        }
        let m = matmul(&matmul(u, self.matrix.matrix()), &u.adjoint());
        Ok(Self::from_parts(HermitianMatrix::hermitian_part_of(m), self.dims.clone()))
    }
}

/// Reduced state on `keep` (any order, duplicates rejected); the result's
/// sites are `keep` sorted ascending.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let (m, dims) = partial_trace_matrix(rho.matrix.matrix(), &rho.dims, keep)?;
    Ok(DensityMatrix::from_parts(HermitianMatrix::hermitian_part_of(m), dims))
}

/// Partial trace of an arbitrary operator; returns the reduced operator and
/// the kept sites' dimensions.
pub fn partial_trace_matrix(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<(CMatrix, Vec<usize>)> {
    check_dims(dims, m.nrows())?;
    let layout = SplitLayout::new(dims, keep)?;
    let dk = layout.kept_dim;
    let mut out = CMatrix::zeros(dk, dk);
    for t in 0..layout.traced_dim {
        let row = &layout.table[t * dk..(t + 1) * dk];
        for (k1, &g1) in row.iter().enumerate() {
            for (k2, &g2) in row.iter().enumerate() {
                out[(k1, k2)] += m[(g1, g2)];
            }
        }
    }
    Ok((out, layout.kept_dims))
}

/// `op ⊗ I` with `op` acting on `support` (sorted ascending internally) and
/// the identity on the remaining sites, wired consistently with
/// [`partial_trace_matrix`].
pub fn embed(op: &CMatrix, dims: &[usize], support: &[usize]) -> Result<CMatrix> {
    let layout = SplitLayout::new(dims, support)?;
    if op.nrows() != layout.kept_dim || op.ncols() != layout.kept_dim {
        return Err(Error::Shape(format!(
            "operator is {}x{} but support has dimension {}",
            op.nrows(),
            op.ncols(),
            layout.kept_dim
        )));
    }
    let d: usize = dims.iter().product();
    let dk = layout.kept_dim;
    let mut out = CMatrix::zeros(d, d);
    for t in 0..layout.traced_dim {
        let row = &layout.table[t * dk..(t + 1) * dk];
        for (k1, &g1) in row.iter().enumerate() {
            for (k2, &g2) in row.iter().enumerate() {
                out[(g1, g2)] = op[(k1, k2)];
            }
        }
    }
    Ok(out)
}

/// Relabels sites: position `p` of the result holds input site `perm[p]`.
/// Equivalent to conjugation by the corresponding SWAP network. Returns the
/// permuted operator and its site dimensions.
pub fn permute_sites(m: &CMatrix, dims: &[usize], perm: &[usize]) -> Result<(CMatrix, Vec<usize>)> {
    check_dims(dims, m.nrows())?;
    validate_permutation(perm, dims.len())?;
    let map = permutation_index_map(dims, perm);
    let d = map.len();
    let out = CMatrix::from_fn(d, d, |i, j| m[(map[i], map[j])]);
    Ok((out, perm.iter().map(|&p| dims[p]).collect()))
}

/// Inverse of a site permutation.
pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (p, &s) in perm.iter().enumerate() {
        inv[s] = p;
    }
    inv
}

impl DensityMatrix {
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let (m, dims) = permute_sites(self.matrix.matrix(), &self.dims, perm)?;
        Ok(Self::from_parts(HermitianMatrix::hermitian_part_of(m), dims))
    }
}

/// For each index of the permuted space, the index of the input space it
/// reads from.
fn permutation_index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let strides = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let d: usize = dims.iter().product();
    let mut digits = vec![0usize; dims.len()];
    let mut map = Vec::with_capacity(d);
    for _ in 0..d {
        map.push(digits.iter().zip(perm).map(|(&digit, &p)| digit * strides[p]).sum());
        increment(&mut digits, &new_dims);
    }
    map
}

pub(crate) fn validate_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::Permutation(format!("length {} for {n} sites", perm.len())));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::Permutation(format!("{perm:?} is not a bijection on 0..{n}")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Index bookkeeping for splitting sites into a kept set and the rest.
/// `table[t * kept_dim + k]` is the global index with kept digits `k` and
/// traced digits `t`.
struct SplitLayout {
    kept_dims: Vec<usize>,
    kept_dim: usize,
    traced_dim: usize,
    table: Vec<usize>,
}

impl SplitLayout {
    fn new(dims: &[usize], keep: &[usize]) -> Result<Self> {
        let n = dims.len();
        let mut kept = BTreeSet::new();
        for &s in keep {
            if s >= n {
                return Err(Error::Index(format!("site {s} out of range for {n} sites")));
            }
            if !kept.insert(s) {
                return Err(Error::Index(format!("site {s} listed twice")));
            }
        }
        let kept: Vec<usize> = kept.into_iter().collect();
        let traced: Vec<usize> = (0..n).filter(|s| !kept.contains(s)).collect();
        let kept_dims: Vec<usize> = kept.iter().map(|&s| dims[s]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&s| dims[s]).collect();
        let kept_dim: usize = kept_dims.iter().product();
        let traced_dim: usize = traced_dims.iter().product();
        let strides = strides(dims);
        let kept_offsets = offsets(&kept, &kept_dims, &strides);
        let traced_offsets = offsets(&traced, &traced_dims, &strides);
        let mut table = Vec::with_capacity(kept_dim * traced_dim);
        for t in &traced_offsets {
            table.extend(kept_offsets.iter().map(|k| k + t));
        }
        Ok(Self { kept_dims, kept_dim, traced_dim, table })
    }
}

/// Global offsets contributed by every digit assignment of `sites`, in
/// mixed-radix order of those sites.
fn offsets(sites: &[usize], site_dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let count: usize = site_dims.iter().product();
    let mut digits = vec![0usize; sites.len()];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(digits.iter().zip(sites).map(|(&d, &s)| d * strides[s]).sum());
        increment(&mut digits, site_dims);
    }
    out
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Mixed-radix increment, last digit fastest.
fn increment(digits: &mut [usize], radices: &[usize]) {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radices[i] {
            return;
        }
        digits[i] = 0;
    }
}

fn check_dims(dims: &[usize], dim: usize) -> Result<()> {
    let product: usize = dims.iter().product();
    if product != dim {
        return Err(Error::Shape(format!("site dimensions {dims:?} give {product}, matrix has {dim}")));
    }
    Ok(())
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}
