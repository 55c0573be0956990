//! Local building blocks: spin-s matrices, the rational R-matrix, Lax
//! operators, symmetrizers and tensor-leg embeddings.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SovError};
use crate::linalg::{identity, kron, re, CMat, C64, ONE, ZERO};

/// A spin-s representation labelled by `two_s = 2s ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Spin(u32);

impl Spin {
    pub fn new(two_s: u32) -> Result<Self> {
        if two_s == 0 {
            return Err(SovError::InvalidSpin(two_s));
        }
        Ok(Spin(two_s))
    }

    pub fn two_s(self) -> usize {
        self.0 as usize
    }

    pub fn s(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Dimension `2s + 1` of the local space.
    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }
}

impl TryFrom<u32> for Spin {
    type Error = SovError;
    fn try_from(v: u32) -> Result<Self> {
        Spin::new(v)
    }
}

impl From<Spin> for u32 {
    fn from(s: Spin) -> u32 {
        s.0
    }
}

#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub sz: CMat,
    pub sp: CMat,
    pub sm: CMat,
}

impl SpinOperators {
    /// Frobenius norms of `[Sz,S±] ∓ S±` and `[S+,S-] - 2Sz`.
    pub fn commutator_residuals(&self) -> [f64; 3] {
        let c = |a: &CMat, b: &CMat| a * b - b * a;
        [
            (c(&self.sz, &self.sp) - &self.sp).norm(),
            (c(&self.sz, &self.sm) + &self.sm).norm(),
            (c(&self.sp, &self.sm) - &self.sz * re(2.0)).norm(),
        ]
    }
}

/// `x(j) = √(j(2s+1-j))`, the superdiagonal of S⁺.
pub fn ladder_coefficient(two_s: usize, j: usize) -> f64 {
    ((j * (two_s + 1 - j)) as f64).sqrt()
}

pub fn spin_matrices(two_s: u32) -> Result<SpinOperators> {
    let spin = Spin::new(two_s)?;
    let n = spin.dim();
    let s = spin.s();
    let mut sz = CMat::zeros(n, n);
    let mut sp = CMat::zeros(n, n);
    for k in 0..n {
        sz[(k, k)] = re(s - k as f64);
    }
    for j in 1..n {
        sp[(j - 1, j)] = re(ladder_coefficient(spin.two_s(), j));
    }
    let sm = sp.transpose();
    Ok(SpinOperators { sz, sp, sm })
}

/// A matrix on `auxiliary ⊗ local`, auxiliary index most significant.
#[derive(Debug, Clone)]
pub struct LocalOperator {
    pub matrix: CMat,
    pub dims: (usize, usize),
}

impl LocalOperator {
    /// Local-space block `(i, j)` of the auxiliary matrix.
    pub fn block(&self, i: usize, j: usize) -> CMat {
        let d = self.dims.1;
        self.matrix.view((i * d, j * d), (d, d)).into_owned()
    }
}

/// The rational six-vertex R-matrix on `C² ⊗ C²`.
pub fn r_matrix(lambda: C64, eta: C64) -> LocalOperator {
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = lambda + eta;
    m[(1, 1)] = lambda;
    m[(2, 2)] = lambda;
    m[(3, 3)] = lambda + eta;
    m[(1, 2)] = eta;
    m[(2, 1)] = eta;
    LocalOperator { matrix: m, dims: (2, 2) }
}

/// Spin-1/2 × spin-s Lax operator
/// `[[λ + η(1/2 + Sz), η S⁻], [η S⁺, λ + η(1/2 - Sz)]]`.
pub fn lax(lambda: C64, two_s: u32, eta: C64) -> Result<LocalOperator> {
    let ops = spin_matrices(two_s)?;
    Ok(lax_from_ops(lambda, &ops, eta))
}

pub(crate) fn lax_from_ops(lambda: C64, ops: &SpinOperators, eta: C64) -> LocalOperator {
    let n = ops.sz.nrows();
    let id = identity(n);
    let half = &id * re(0.5);
    let blocks = [
        [&id * lambda + (&half + &ops.sz) * eta, &ops.sm * eta],
        [&ops.sp * eta, &id * lambda + (&half - &ops.sz) * eta],
    ];
    let mut m = CMat::zeros(2 * n, 2 * n);
    for i in 0..2 {
        for j in 0..2 {
            m.view_mut((i * n, j * n), (n, n)).copy_from(&blocks[i][j]);
        }
    }
    LocalOperator { matrix: m, dims: (2, n) }
}

/// Symmetric projector `P⁺ = (1/m!) Σ_π P_π` on `(C²)^⊗m`.
#[derive(Debug, Clone)]
pub struct Symmetrizer {
    pub m: usize,
    pub matrix: CMat,
}

impl Symmetrizer {
    pub fn idempotency_residual(&self) -> f64 {
        (&self.matrix * &self.matrix - &self.matrix).norm()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }
}

/// Permutation operator `P_π (v_1 ⊗ … ⊗ v_m) = v_π(1) ⊗ … ⊗ v_π(m)` on `(C²)^⊗m`.
pub fn permutation_operator(perm: &[usize]) -> CMat {
    let m = perm.len();
    let dim = 1usize << m;
    let mut p = CMat::zeros(dim, dim);
    for col in 0..dim {
        // bit (m-1-k) of `col` is the state of leg k
        let bit = |idx: usize, leg: usize| (idx >> (m - 1 - leg)) & 1;
        let mut row = 0;
        for k in 0..m {
            row |= bit(col, perm[k]) << (m - 1 - k);
        }
        p[(row, col)] = ONE;
    }
    p
}

pub fn symmetrizer(m: usize) -> Symmetrizer {
    assert!(m >= 1, "symmetrizer needs at least one leg");
    let perms = crate::linalg::permutations(m);
    let count = perms.len() as f64;
    let dim = 1usize << m;
    let mut acc = CMat::zeros(dim, dim);
    for perm in &perms {
        acc += permutation_operator(perm);
    }
    Symmetrizer { m, matrix: acc / re(count) }
}

/// Orthonormal basis of the image of `P⁺` on `(C²)^⊗m`, as columns.
///
/// Column `k` is the normalised symmetric state with `k` legs in the second
/// basis state, so the fused space carries the spin-m/2 matrices of
/// [`spin_matrices`] with `Sz = m/2 - k`.
pub fn symmetric_basis(m: usize) -> CMat {
    let dim = 1usize << m;
    let mut basis = CMat::zeros(dim, m + 1);
    for idx in 0..dim {
        let k = idx.count_ones() as usize;
        basis[(idx, k)] = ONE;
    }
    for k in 0..=m {
        let n = basis.column(k).norm();
        let mut col = basis.column_mut(k);
        col /= re(n);
    }
    basis
}

/// Restriction of `K^⊗m` to the symmetric subspace, in the basis of
/// [`symmetric_basis`].
pub fn fused_matrix(k: &CMat, m: usize) -> CMat {
    let mut power = k.clone();
    for _ in 1..m {
        power = kron(&power, k);
    }
    let basis = symmetric_basis(m);
    basis.adjoint() * power * basis
}

/// Embed `op` (acting on the tensor product of the listed legs, first leg most
/// significant) into the full product space with leg dimensions `dims`.
pub fn kron_embed(op: &CMat, legs: &[usize], dims: &[usize]) -> Result<CMat> {
    let mut seen = vec![false; dims.len()];
    for &l in legs {
        if l >= dims.len() || seen[l] {
            return Err(SovError::DimensionMismatch(format!("invalid leg list {legs:?}")));
        }
        seen[l] = true;
    }
    let sub: usize = legs.iter().map(|&l| dims[l]).product();
    if op.nrows() != sub || op.ncols() != sub {
        return Err(SovError::DimensionMismatch(format!(
            "operator is {}x{}, legs span {sub}",
            op.nrows(),
            op.ncols()
        )));
    }
    let total: usize = dims.iter().product();
    let digits = |mut idx: usize| {
        let mut d = vec![0usize; dims.len()];
        for leg in (0..dims.len()).rev() {
            d[leg] = idx % dims[leg];
            idx /= dims[leg];
        }
        d
    };
    let sub_index = |d: &[usize]| legs.iter().fold(0, |acc, &l| acc * dims[l] + d[l]);
    let mut out = CMat::zeros(total, total);
    for i in 0..total {
        let di = digits(i);
        for j in 0..total {
            let dj = digits(j);
            let rest_equal = (0..dims.len()).all(|l| seen[l] || di[l] == dj[l]);
            if rest_equal {
                let v = op[(sub_index(&di), sub_index(&dj))];
                if v != ZERO {
                    out[(i, j)] = v;
                }
            }
        }
    }
    Ok(out)
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on a single leg.
pub fn embed_site(op: &CMat, site: usize, dims: &[usize]) -> CMat {
    let left: usize = dims[..site].iter().product();
    let right: usize = dims[site + 1..].iter().product();
    kron(&kron(&identity(left), op), &identity(right))
}

/// Embeds a two-leg auxiliary operator given by its 2×2 blocks onto
/// aux legs `(a, b)` of `C² ⊗ C² ⊗ H`: returns the 4D×4D matrix of
/// `Σ E_ij ⊗ I ⊗ X_ij` (leg 1) or `Σ I ⊗ E_ij ⊗ X_ij` (leg 2).
pub fn lift_aux_blocks(blocks: &[[CMat; 2]; 2], leg: usize) -> CMat {
    let d = blocks[0][0].nrows();
    let mut out = CMat::zeros(4 * d, 4 * d);
    for i in 0..2 {
        for j in 0..2 {
            for other in 0..2 {
                let (r, c) = if leg == 0 { (2 * i + other, 2 * j + other) } else { (2 * other + i, 2 * other + j) };
                out.view_mut((r * d, c * d), (d, d)).copy_from(&blocks[i][j]);
            }
        }
    }
    out
}

/// Relative Yang–Baxter residual `R12(λ-μ)R13(λ)R23(μ) - R23(μ)R13(λ)R12(λ-μ)`.
pub fn ybe_residual(lambda: C64, mu: C64, eta: C64) -> f64 {
    let id2 = identity(2);
    let r12 = kron(&r_matrix(lambda - mu, eta).matrix, &id2);
    let r23 = kron(&id2, &r_matrix(mu, eta).matrix);
    let p23 = kron(&id2, &permutation_operator(&[1, 0]));
    let r13 = &p23 * kron(&r_matrix(lambda, eta).matrix, &id2) * &p23;
    let lhs = &r12 * &r13 * &r23;
    let rhs = &r23 * &r13 * &r12;
    crate::linalg::rel_residual(&(&lhs - &rhs), &lhs)
}

/// Relative RLL residual on `C² ⊗ C² ⊗ V^(2s)`.
pub fn rll_residual(lambda: C64, mu: C64, two_s: u32, eta: C64) -> Result<f64> {
    let l_lam = lax(lambda, two_s, eta)?;
    let l_mu = lax(mu, two_s, eta)?;
    let blocks = |l: &LocalOperator| [[l.block(0, 0), l.block(0, 1)], [l.block(1, 0), l.block(1, 1)]];
    let l1 = lift_aux_blocks(&blocks(&l_lam), 0);
    let l2 = lift_aux_blocks(&blocks(&l_mu), 1);
    let n = l_lam.dims.1;
    let r = kron(&r_matrix(lambda - mu, eta).matrix, &identity(n));
    let lhs = &r * &l1 * &l2;
    let rhs = &l2 * &l1 * &r;
    Ok(crate::linalg::rel_residual(&(&lhs - &rhs), &lhs))
}
