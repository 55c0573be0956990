//! Monodromy blocks, the transfer matrix and its fused hierarchy.
//!
//! The fused transfer matrices are produced by the three-term fusion
//! recursion; the projector construction over the symmetric auxiliary space
//! is kept as an independent route for cross-checks.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::linalg::{commutator, identity, kron, leibniz_det, re, rel_residual, CMat, C64, ONE};
use crate::model::{ChainSpec, Mat2};
use crate::repn::{embed_site, fused_matrix, lax_from_ops, lift_aux_blocks, r_matrix, spin_matrices, symmetric_basis};

/// The four operator entries of a (twisted) monodromy matrix at fixed λ.
#[derive(Debug, Clone)]
pub struct MonodromyBlocks {
    pub a: CMat,
    pub b: CMat,
    pub c: CMat,
    pub d: CMat,
}

impl MonodromyBlocks {
    fn from_array(m: [[CMat; 2]; 2]) -> Self {
        let [[a, b], [c, d]] = m;
        MonodromyBlocks { a, b, c, d }
    }

    pub fn as_array(&self) -> [[CMat; 2]; 2] {
        [[self.a.clone(), self.b.clone()], [self.c.clone(), self.d.clone()]]
    }

    /// Dense `2D × 2D` matrix, auxiliary index most significant.
    pub fn to_dense(&self) -> CMat {
        let n = self.a.nrows();
        let mut m = CMat::zeros(2 * n, 2 * n);
        for (i, row) in self.as_array().iter().enumerate() {
            for (j, blk) in row.iter().enumerate() {
                m.view_mut((i * n, j * n), (n, n)).copy_from(blk);
            }
        }
        m
    }

    pub fn entry(&self, i: usize, j: usize) -> &CMat {
        match (i, j) {
            (0, 0) => &self.a,
            (0, 1) => &self.b,
            (1, 0) => &self.c,
            _ => &self.d,
        }
    }
}

fn block_mul(x: &[[CMat; 2]; 2], y: &[[CMat; 2]; 2]) -> [[CMat; 2]; 2] {
    let e = |i: usize, j: usize| &x[i][0] * &y[0][j] + &x[i][1] * &y[1][j];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn scalar_block_mul(k: &Mat2, y: &[[CMat; 2]; 2]) -> [[CMat; 2]; 2] {
    let e = |i: usize, j: usize| &y[0][j] * k[i][0] + &y[1][j] * k[i][1];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// Untwisted monodromy `L_N(λ-ξ_N) ⋯ L_1(λ-ξ_1)` as 2×2 operator blocks.
pub fn untwisted_blocks(chain: &ChainSpec, lambda: C64) -> [[CMat; 2]; 2] {
    let dims = chain.dims();
    let dim = chain.dim();
    let mut acc = [[identity(dim), CMat::zeros(dim, dim)], [CMat::zeros(dim, dim), identity(dim)]];
    for (n, site) in chain.sites.iter().enumerate() {
        let ops = spin_matrices(site.spin.two_s() as u32).expect("validated spin");
        let l = lax_from_ops(lambda - site.xi, &ops, chain.eta);
        let blocks = [
            [embed_site(&l.block(0, 0), n, &dims), embed_site(&l.block(0, 1), n, &dims)],
            [embed_site(&l.block(1, 0), n, &dims), embed_site(&l.block(1, 1), n, &dims)],
        ];
        acc = block_mul(&blocks, &acc);
    }
    acc
}

/// `K · M^(I)(λ)` for an arbitrary 2×2 twist.
pub fn monodromy_with(chain: &ChainSpec, twist: &Mat2, lambda: C64) -> MonodromyBlocks {
    MonodromyBlocks::from_array(scalar_block_mul(twist, &untwisted_blocks(chain, lambda)))
}

pub fn monodromy(chain: &ChainSpec, lambda: C64) -> MonodromyBlocks {
    monodromy_with(chain, &chain.twist.matrix, lambda)
}

pub fn transfer_with(chain: &ChainSpec, twist: &Mat2, lambda: C64) -> CMat {
    let m = monodromy_with(chain, twist, lambda);
    m.a + m.d
}

/// `T^(K)(λ) = A^(K)(λ) + D^(K)(λ)`.
pub fn transfer(chain: &ChainSpec, lambda: C64) -> CMat {
    transfer_with(chain, &chain.twist.matrix, lambda)
}

/// `T^(K|l)(λ)` from the fusion recursion, `T^(K|0) = 1`.
pub fn fused_transfer(chain: &ChainSpec, level: usize, lambda: C64) -> CMat {
    fused_transfer_with(chain, &chain.twist.matrix, level, lambda)
}

pub fn fused_transfer_with(chain: &ChainSpec, twist: &Mat2, level: usize, lambda: C64) -> CMat {
    let dim = chain.dim();
    let det_k = twist[0][0] * twist[1][1] - twist[0][1] * twist[1][0];
    let mut prev = identity(dim);
    if level == 0 {
        return prev;
    }
    let mut cur = transfer_with(chain, twist, lambda);
    for l in 1..level {
        let shift = lambda + chain.eta * re(l as f64);
        let qdet = det_k * chain.a(shift) * chain.d(shift - chain.eta);
        let next = transfer_with(chain, twist, shift) * &cur - prev * qdet;
        prev = cur;
        cur = next;
    }
    cur
}

/// `tr_{V⁺} P⁺ M_1(λ+(a-1)η) ⋯ M_a(λ) P⁺`, traced in an orthonormal basis of
/// the symmetric auxiliary space.
pub fn fused_transfer_projector(chain: &ChainSpec, level: usize, lambda: C64) -> CMat {
    assert!(level >= 1, "fused level must be positive");
    let dim = chain.dim();
    let mons: Vec<MonodromyBlocks> = (0..level)
        .map(|leg| monodromy(chain, lambda + chain.eta * re((level - 1 - leg) as f64)))
        .collect();
    let basis = symmetric_basis(level);
    let proj = &basis * basis.adjoint();
    let aux = 1usize << level;
    let bit = |idx: usize, leg: usize| (idx >> (level - 1 - leg)) & 1;
    let mut total = CMat::zeros(dim, dim);
    for i in 0..aux {
        for j in 0..aux {
            let weight = proj[(j, i)];
            if weight.norm() == 0.0 {
                continue;
            }
            let mut term = identity(dim);
            for (leg, m) in mons.iter().enumerate() {
                term = &term * m.entry(bit(i, leg), bit(j, leg));
            }
            total += term * weight;
        }
    }
    total
}

/// `det_l D_l(T(λ))` expanded over permutations with commuting operator entries.
pub fn tridiagonal_operator_det(chain: &ChainSpec, level: usize, lambda: C64) -> CMat {
    let dim = chain.dim();
    let (k1, k2) = (chain.twist.k1, chain.twist.k2);
    let zero = CMat::zeros(dim, dim);
    let shift = |r: usize| lambda + chain.eta * re((level - 1 - r) as f64);
    let mut entries = vec![vec![zero.clone(); level]; level];
    for r in 0..level {
        entries[r][r] = transfer(chain, shift(r));
        if r + 1 < level {
            entries[r][r + 1] = identity(dim) * (-k1 * chain.a(shift(r)));
        }
        if r >= 1 {
            entries[r][r - 1] = identity(dim) * (-k2 * chain.d(shift(r)));
        }
    }
    leibniz_det(&entries, dim)
}

/// Relative residual of `A(λ)D(λ-η) - B(λ)C(λ-η) = det K·a(λ)d(λ-η)`.
pub fn quantum_det_operator_check(chain: &ChainSpec, lambda: C64) -> f64 {
    let m = monodromy(chain, lambda);
    let shifted = monodromy(chain, lambda - chain.eta);
    let lhs = &m.a * &shifted.d - &m.b * &shifted.c;
    let rhs = identity(chain.dim()) * chain.qdet(lambda);
    rel_residual(&(&lhs - &rhs), &(&m.a * &shifted.d))
}

/// `⊗_n X^(2s_n)` for a 2×2 matrix `X`.
pub fn global_fused(chain: &ChainSpec, x: &CMat) -> CMat {
    chain
        .sites
        .iter()
        .map(|s| fused_matrix(x, s.spin.two_s()))
        .reduce(|acc, m| kron(&acc, &m))
        .expect("non-empty chain")
}

/// `‖[M^(I)(λ), X_0 ⊗ 𝒳]‖` relative, with `𝒳 = ⊗ X^(2s_n)`.
pub fn symmetry_check_with(chain: &ChainSpec, x: &CMat, lambda: C64) -> f64 {
    let m = MonodromyBlocks::from_array(untwisted_blocks(chain, lambda)).to_dense();
    let g = kron(x, &global_fused(chain, x));
    rel_residual(&commutator(&m, &g), &(&m * &g))
}

pub fn symmetry_check(chain: &ChainSpec, lambda: C64) -> f64 {
    symmetry_check_with(chain, &chain.twist.as_mat(), lambda)
}

/// Relative RTT residual `R12(λ-μ)M1(λ)M2(μ) - M2(μ)M1(λ)R12(λ-μ)`.
pub fn rtt_residual(chain: &ChainSpec, lambda: C64, mu: C64) -> f64 {
    let m_l = monodromy(chain, lambda).as_array();
    let m_m = monodromy(chain, mu).as_array();
    let m1 = lift_aux_blocks(&m_l, 0);
    let m2 = lift_aux_blocks(&m_m, 1);
    let r = kron(&r_matrix(lambda - mu, chain.eta).matrix, &identity(chain.dim()));
    let lhs = &r * &m1 * &m2;
    let rhs = &m2 * &m1 * &r;
    rel_residual(&(&lhs - &rhs), &lhs)
}

/// Memoised evaluator for `T^(K|l)(λ)`.
///
/// The cache keys on the exact bit pattern of λ; concurrent readers share a
/// read lock and insertions take the write lock.
pub struct TransferEvaluator<'a> {
    chain: &'a ChainSpec,
    cache: RwLock<HashMap<(usize, u64, u64), Arc<CMat>>>,
}

impl<'a> TransferEvaluator<'a> {
    pub fn new(chain: &'a ChainSpec) -> Self {
        TransferEvaluator { chain, cache: RwLock::new(HashMap::new()) }
    }

    pub fn chain(&self) -> &ChainSpec {
        self.chain
    }

    fn key(level: usize, lambda: C64) -> (usize, u64, u64) {
        (level, lambda.re.to_bits(), lambda.im.to_bits())
    }

    fn lookup(&self, level: usize, lambda: C64) -> Option<Arc<CMat>> {
        self.cache.read().expect("cache lock").get(&Self::key(level, lambda)).cloned()
    }

    fn store(&self, level: usize, lambda: C64, m: CMat) -> Arc<CMat> {
        let arc = Arc::new(m);
        self.cache
            .write()
            .expect("cache lock")
            .entry(Self::key(level, lambda))
            .or_insert_with(|| arc.clone())
            .clone()
    }

    pub fn transfer(&self, lambda: C64) -> Arc<CMat> {
        self.fused(1, lambda)
    }

    pub fn fused(&self, level: usize, lambda: C64) -> Arc<CMat> {
        if let Some(m) = self.lookup(level, lambda) {
            return m;
        }
        let m = match level {
            0 => identity(self.chain.dim()),
            1 => transfer(self.chain, lambda),
            _ => {
                let l = level - 1;
                let shift = lambda + self.chain.eta * re(l as f64);
                let t = self.transfer(shift);
                let cur = self.fused(l, lambda);
                let prev = self.fused(l - 1, lambda);
                &*t * &*cur - &*prev * self.chain.qdet(shift)
            }
        };
        self.store(level, lambda, m)
    }

    pub fn cached_len(&self) -> usize {
        self.cache.read().expect("cache lock").len()
    }

    /// Largest relative commutator among all cached operators.
    pub fn max_commutator(&self) -> f64 {
        let ops: Vec<Arc<CMat>> = self.cache.read().expect("cache lock").values().cloned().collect();
        let mut worst: f64 = 0.0;
        for i in 0..ops.len() {
            for j in (i + 1)..ops.len() {
                worst = worst.max(rel_residual(&commutator(&ops[i], &ops[j]), &(&*ops[i] * &*ops[j])));
            }
        }
        worst
    }
}

/// Operator that is identically one on the chain space.
pub fn unit(chain: &ChainSpec) -> CMat {
    identity(chain.dim()) * ONE
}
