//! Covector SoV bases: the Sklyanin B-eigenbasis and the two bases generated
//! by fused transfer matrices acting on a generic covector.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SovError};
use crate::linalg::{c, commutator, covec_mul, equilibrated_rank, inverse, mat2, re, rel_residual, CMat, CVec, C64, ONE, ZERO};
use crate::model::ChainSpec;
use crate::monodromy::{global_fused, monodromy, MonodromyBlocks, TransferEvaluator};
use crate::repn::fused_matrix;

/// Multi-index `h = (h_1, …, h_N)` with `0 ≤ h_n ≤ 2s_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    /// All indices within `bounds` (inclusive) in lexicographic order.
    pub fn all(bounds: &[usize]) -> Vec<MultiIndex> {
        let total: usize = bounds.iter().map(|b| b + 1).product();
        (0..total).map(|p| Self::from_position(p, bounds)).collect()
    }

    pub fn from_position(mut p: usize, bounds: &[usize]) -> MultiIndex {
        let mut h = vec![0; bounds.len()];
        for n in (0..bounds.len()).rev() {
            h[n] = p % (bounds[n] + 1);
            p /= bounds[n] + 1;
        }
        MultiIndex(h)
    }

    pub fn position(&self, bounds: &[usize]) -> usize {
        self.0.iter().zip(bounds).fold(0, |acc, (&h, &b)| acc * (b + 1) + h)
    }

    /// `h ± e_n`, or `None` when the result leaves the box.
    pub fn shifted(&self, n: usize, delta: i64, bounds: &[usize]) -> Option<MultiIndex> {
        let v = self.0[n] as i64 + delta;
        if v < 0 || v > bounds[n] as i64 {
            return None;
        }
        let mut h = self.0.clone();
        h[n] = v as usize;
        Some(MultiIndex(h))
    }

    pub fn get(&self, n: usize) -> usize {
        self.0[n]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Sklyanin,
    Sov1,
    Sov2,
    QGenerated,
}

/// `D × D` matrix of covectors, rows in lexicographic multi-index order.
#[derive(Debug, Clone)]
pub struct CovectorBasis {
    pub rows: CMat,
    pub kind: BasisKind,
    pub source: CVec,
    pub bounds: Vec<usize>,
}

impl CovectorBasis {
    pub fn from_rows(rows: Vec<CVec>, kind: BasisKind, source: CVec, bounds: Vec<usize>) -> Self {
        let d = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        let rows = CMat::from_fn(d, m, |i, j| rows[i][j]);
        CovectorBasis { rows, kind, source, bounds }
    }

    pub fn dim(&self) -> usize {
        self.rows.nrows()
    }

    pub fn indices(&self) -> Vec<MultiIndex> {
        MultiIndex::all(&self.bounds)
    }

    pub fn row(&self, h: &MultiIndex) -> CVec {
        self.rows.row(h.position(&self.bounds)).transpose()
    }

    /// Row `h + delta·e_n`; the zero covector outside the box.
    pub fn shifted_row(&self, h: &MultiIndex, n: usize, delta: i64) -> CVec {
        match h.shifted(n, delta, &self.bounds) {
            Some(k) => self.row(&k),
            None => CVec::zeros(self.rows.ncols()),
        }
    }
}

/// `(rank, smallest singular value)` of the row-equilibrated basis matrix.
pub fn gram_rank(basis: &CovectorBasis, tol: f64) -> (usize, f64) {
    equilibrated_rank(&basis.rows, tol)
}

fn require_full_rank(basis: CovectorBasis, tol: f64) -> Result<CovectorBasis> {
    let (rank, _) = gram_rank(&basis, tol);
    if rank < basis.dim() {
        return Err(SovError::DegenerateBasis { rank, dim: basis.dim() });
    }
    Ok(basis)
}

fn bounds(chain: &ChainSpec) -> Vec<usize> {
    (0..chain.n_sites()).map(|n| chain.two_s(n)).collect()
}

/// `⊗_n (1, 0, …, 0)`.
pub fn reference_covector(chain: &ChainSpec) -> CVec {
    let mut v = CVec::zeros(chain.dim());
    v[0] = ONE;
    v
}

/// Seeded complex Gaussian covector.
pub fn random_covector(dim: usize, seed: u64) -> CVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CVec::from_fn(dim, |_, _| {
        let x: f64 = StandardNormal.sample(&mut rng);
        let y: f64 = StandardNormal.sample(&mut rng);
        c(x, y)
    })
}

/// `⊗_n ⟨S,n|`, requiring each local covector to generate its site under `K^(2s_n)`.
pub fn tensor_covector(chain: &ChainSpec, locals: &[CVec]) -> Result<CVec> {
    if locals.len() != chain.n_sites() {
        return Err(SovError::DimensionMismatch(format!("{} local covectors for {} sites", locals.len(), chain.n_sites())));
    }
    let k = chain.twist.as_mat();
    let mut out: Option<CVec> = None;
    for (n, local) in locals.iter().enumerate() {
        let two_s = chain.two_s(n);
        if local.len() != two_s + 1 {
            return Err(SovError::DimensionMismatch(format!("site {n} covector has length {}", local.len())));
        }
        let kf = fused_matrix(&k, two_s);
        let mut orbit = CMat::zeros(two_s + 1, two_s + 1);
        let mut v = local.clone();
        for r in 0..=two_s {
            orbit.set_row(r, &v.transpose());
            v = covec_mul(&v, &kf);
        }
        let (rank, _) = equilibrated_rank(&orbit, chain.tolerances.gram);
        if rank <= two_s {
            return Err(SovError::DegenerateBasis { rank, dim: two_s + 1 });
        }
        out = Some(match out {
            None => local.clone(),
            Some(acc) => crate::linalg::vec_kron(&acc, local),
        });
    }
    out.ok_or(SovError::EmptyChain)
}

pub fn random_tensor_covector(chain: &ChainSpec, seed: u64) -> Result<CVec> {
    let locals: Vec<CVec> =
        (0..chain.n_sites()).map(|n| random_covector(chain.two_s(n) + 1, seed.wrapping_add(n as u64))).collect();
    tensor_covector(chain, &locals)
}

/// Monodromy whose `B` entry the Sklyanin basis diagonalises: `M^(K)` when
/// `b ≠ 0`, otherwise `W⁻¹ M^(K) W`.
pub fn sklyanin_monodromy(chain: &ChainSpec, lambda: C64) -> MonodromyBlocks {
    let m = monodromy(chain, lambda);
    let Some(w) = chain.twist.conjugator else {
        return m;
    };
    let wi = inverse(&mat2(w)).expect("invertible conjugator");
    let blocks = m.as_array();
    let entry = |i: usize, j: usize| {
        let mut acc = CMat::zeros(chain.dim(), chain.dim());
        for (k, row) in blocks.iter().enumerate() {
            for (l, blk) in row.iter().enumerate() {
                let coef = wi[(i, k)] * w[l][j];
                if coef != ZERO {
                    acc += blk * coef;
                }
            }
        }
        acc
    };
    MonodromyBlocks { a: entry(0, 0), b: entry(0, 1), c: entry(1, 0), d: entry(1, 1) }
}

/// The `b` entry of the twist actually used (`b̄` of `W⁻¹KW` when conjugated).
pub fn sklyanin_b(chain: &ChainSpec) -> C64 {
    chain.twist.conjugated()[0][1]
}

/// The `a` and `d` entries of the twist actually used.
fn sklyanin_diag(chain: &ChainSpec) -> (C64, C64) {
    let k = chain.twist.conjugated();
    (k[0][0], k[1][1])
}

/// `𝗇 = ∏_{b<a} (ξ_a^(0) - ξ_b^(0))^{1/2}`, principal branch per factor.
pub fn sklyanin_norm(chain: &ChainSpec) -> C64 {
    let mut n = ONE;
    for a in 0..chain.n_sites() {
        for b in 0..a {
            n *= (chain.node(a, 0) - chain.node(b, 0)).sqrt();
        }
    }
    n
}

/// Covector the Sklyanin rows are generated from: `⟨0|` or `⟨0|𝒲⁻¹`.
pub fn sklyanin_source(chain: &ChainSpec) -> CVec {
    let zero = reference_covector(chain);
    match chain.twist.conjugator_mat() {
        None => zero,
        Some(w) => covec_mul(&zero, &global_fused(chain, &inverse(&w).expect("invertible conjugator"))),
    }
}

/// `⟨h|_Sk = 𝗇⁻¹ ⟨0| ∏_n ∏_{k<h_n} A(ξ_n^(k)) / (k1 a(ξ_n^(k)))`.
pub fn sklyanin_basis(chain: &ChainSpec) -> Result<CovectorBasis> {
    let k1 = chain.twist.k1;
    if k1.norm() == 0.0 {
        return Err(SovError::SingularTwist);
    }
    let bounds = bounds(chain);
    // normalised A at every node below the top one
    let steps: Vec<Vec<CMat>> = (0..chain.n_sites())
        .map(|n| {
            (0..bounds[n])
                .map(|k| {
                    let x = chain.node(n, k);
                    sklyanin_monodromy(chain, x).a / (k1 * chain.a(x))
                })
                .collect()
        })
        .collect();
    let source = sklyanin_source(chain) / sklyanin_norm(chain);
    let rows: Vec<CVec> = MultiIndex::all(&bounds)
        .par_iter()
        .map(|h| {
            let mut v = source.clone();
            for (n, site) in steps.iter().enumerate() {
                for op in &site[..h.get(n)] {
                    v = covec_mul(&v, op);
                }
            }
            v
        })
        .collect();
    require_full_rank(CovectorBasis::from_rows(rows, BasisKind::Sklyanin, source, bounds), chain.tolerances.gram)
}

fn row_residual(diff: &CVec, scale: f64) -> f64 {
    let s = scale.max(f64::MIN_POSITIVE);
    if diff.norm() == 0.0 {
        0.0
    } else {
        diff.norm() / s
    }
}

/// Largest relative residual of `⟨h|B(λ) = b ∏_n (λ - ξ_n^(h_n)) ⟨h|` over all rows.
pub fn verify_b_eigen(chain: &ChainSpec, basis: &CovectorBasis, lambda: C64) -> f64 {
    let b_op = sklyanin_monodromy(chain, lambda).b;
    let b = sklyanin_b(chain);
    let op_scale = b_op.norm() / (chain.dim() as f64).sqrt();
    basis
        .indices()
        .iter()
        .map(|h| {
            let row = basis.row(h);
            let lhs = covec_mul(&row, &b_op);
            let rhs = &row * (b * chain.node_product(&h.0, lambda));
            row_residual(&(&lhs - &rhs), lhs.norm().max(rhs.norm()).max(row.norm() * op_scale))
        })
        .fold(0.0, f64::max)
}

/// The eigenvalue polynomials `d_h(λ)` are pairwise distinct: smallest
/// distance between the root multisets of two different rows.
pub fn b_spectrum_separation(chain: &ChainSpec) -> f64 {
    let bounds = bounds(chain);
    let all = MultiIndex::all(&bounds);
    let mut best = f64::INFINITY;
    for i in 0..all.len() {
        for j in (i + 1)..all.len() {
            let gap = (0..chain.n_sites())
                .map(|n| (chain.node(n, all[i].get(n)) - chain.node(n, all[j].get(n))).norm())
                .fold(0.0, f64::max);
            best = best.min(gap);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShiftReport {
    pub a_action: f64,
    pub d_action: f64,
}

/// Checks the interpolated `A` and `D` actions on every Sklyanin row.
///
/// Both operators are degree-`N` polynomials with leading coefficients given
/// by the twist diagonal, so the Lagrange form over the `N` nodes of `h`
/// carries an extra `K_ii ∏_b (λ - ξ_b^(h_b))` term.
pub fn verify_shift_actions(chain: &ChainSpec, basis: &CovectorBasis, lambda: C64) -> ShiftReport {
    let m = sklyanin_monodromy(chain, lambda);
    let (ka, kd) = sklyanin_diag(chain);
    let (k1, k2) = (chain.twist.k1, chain.twist.k2);
    let n_sites = chain.n_sites();
    let (scale_a_op, scale_d_op) = (m.a.norm(), m.d.norm());
    let root_dim = (chain.dim() as f64).sqrt();
    let mut report = ShiftReport { a_action: 0.0, d_action: 0.0 };
    for h in basis.indices() {
        let row = basis.row(&h);
        let nodes: Vec<C64> = (0..n_sites).map(|n| chain.node(n, h.get(n))).collect();
        let full: C64 = nodes.iter().map(|x| lambda - x).product();
        let mut rhs_a = &row * (ka * full);
        let mut rhs_d = &row * (kd * full);
        let mut scale_a = rhs_a.norm().max(row.norm() * scale_a_op / root_dim);
        let mut scale_d = rhs_d.norm().max(row.norm() * scale_d_op / root_dim);
        for a in 0..n_sites {
            let mut weight = ONE;
            for b in 0..n_sites {
                if b != a {
                    weight *= (lambda - nodes[b]) / (nodes[a] - nodes[b]);
                }
            }
            let up = basis.shifted_row(&h, a, 1) * (weight * k1 * chain.a(nodes[a]));
            let down = basis.shifted_row(&h, a, -1) * (weight * k2 * chain.d(nodes[a]));
            scale_a = scale_a.max(up.norm());
            scale_d = scale_d.max(down.norm());
            rhs_a += up;
            rhs_d += down;
        }
        let lhs_a = covec_mul(&row, &m.a);
        let lhs_d = covec_mul(&row, &m.d);
        report.a_action = report.a_action.max(row_residual(&(&lhs_a - &rhs_a), scale_a.max(lhs_a.norm())));
        report.d_action = report.d_action.max(row_residual(&(&lhs_d - &rhs_d), scale_d.max(lhs_d.norm())));
    }
    report
}

/// `⟨h| = ⟨S| ∏_n T^(2s_n)(ξ_n^(2s_n-1))^{h_n}`.
pub fn sov_basis_1(chain: &ChainSpec, s: &CVec) -> Result<CovectorBasis> {
    check_source(chain, s)?;
    let ev = TransferEvaluator::new(chain);
    let bounds = bounds(chain);
    let powers: Vec<Vec<CMat>> = (0..chain.n_sites())
        .map(|n| {
            let op = ev.fused(bounds[n], chain.node(n, bounds[n] - 1));
            let mut acc = vec![crate::linalg::identity(chain.dim())];
            for k in 0..bounds[n] {
                let next = &acc[k] * &*op;
                acc.push(next);
            }
            acc
        })
        .collect();
    let rows = generate_rows(s, &bounds, &powers);
    require_full_rank(CovectorBasis::from_rows(rows, BasisKind::Sov1, s.clone(), bounds), chain.tolerances.gram)
}

/// Factor of site `n` in the second basis for `h_n`.
pub fn sov2_factor(chain: &ChainSpec, ev: &TransferEvaluator, n: usize, h: usize) -> CMat {
    let top = chain.two_s(n);
    let level = top - h;
    let mut scale = chain.twist.k2.powi(h as i32 - top as i32);
    for k in 0..level {
        scale /= chain.d(chain.node(n, top - k));
    }
    &*ev.fused(level, chain.node(n, top)) * scale
}

/// `⟨h| = ⟨S| ∏_n k2^{h_n-2s_n} T^(2s_n-h_n)(ξ_n^(2s_n)) / ∏_{k<2s_n-h_n} d(ξ_n^(2s_n-k))`.
pub fn sov_basis_2(chain: &ChainSpec, s: &CVec) -> Result<CovectorBasis> {
    check_source(chain, s)?;
    if chain.twist.k2.norm() == 0.0 || chain.twist.k1.norm() == 0.0 {
        return Err(SovError::SingularTwist);
    }
    let ev = TransferEvaluator::new(chain);
    let bounds = bounds(chain);
    let factors: Vec<Vec<CMat>> =
        (0..chain.n_sites()).map(|n| (0..=bounds[n]).map(|h| sov2_factor(chain, &ev, n, h)).collect()).collect();
    let rows = generate_rows(s, &bounds, &factors);
    require_full_rank(CovectorBasis::from_rows(rows, BasisKind::Sov2, s.clone(), bounds), chain.tolerances.gram)
}

fn check_source(chain: &ChainSpec, s: &CVec) -> Result<()> {
    if s.len() != chain.dim() {
        return Err(SovError::DimensionMismatch(format!("covector length {} for dimension {}", s.len(), chain.dim())));
    }
    Ok(())
}

fn generate_rows(s: &CVec, bounds: &[usize], factors: &[Vec<CMat>]) -> Vec<CVec> {
    MultiIndex::all(bounds)
        .par_iter()
        .map(|h| {
            let mut v = s.clone();
            for (n, site) in factors.iter().enumerate() {
                v = covec_mul(&v, &site[h.get(n)]);
            }
            v
        })
        .collect()
}

/// Largest relative residual of
/// `⟨h|T(ξ_n^(h_n)) = k1 a(ξ_n^(h_n)) ⟨h+e_n| + k2 d(ξ_n^(h_n)) ⟨h-e_n|`.
pub fn verify_separate_action(chain: &ChainSpec, basis: &CovectorBasis) -> f64 {
    let ev = TransferEvaluator::new(chain);
    let (k1, k2) = (chain.twist.k1, chain.twist.k2);
    let mut worst: f64 = 0.0;
    for h in basis.indices() {
        let row = basis.row(&h);
        for n in 0..chain.n_sites() {
            let x = chain.node(n, h.get(n));
            let lhs = covec_mul(&row, &ev.transfer(x));
            let up = basis.shifted_row(&h, n, 1) * (k1 * chain.a(x));
            let down = basis.shifted_row(&h, n, -1) * (k2 * chain.d(x));
            let scale = lhs.norm().max(up.norm()).max(down.norm());
            worst = worst.max(row_residual(&(lhs - up - down), scale));
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BasisComparison {
    pub scale: C64,
    pub max_row_difference: f64,
}

/// Fits `x ≈ α y` with one global scalar and reports the worst relative row mismatch.
pub fn compare_bases(x: &CovectorBasis, y: &CovectorBasis) -> BasisComparison {
    let num: C64 = y.rows.iter().zip(x.rows.iter()).map(|(b, a)| b.conj() * a).sum();
    let den: f64 = y.rows.iter().map(|b| b.norm_sqr()).sum();
    let scale = if den > 0.0 { num / re(den) } else { ZERO };
    let mut worst: f64 = 0.0;
    for i in 0..x.rows.nrows() {
        let a = x.rows.row(i);
        let b = y.rows.row(i) * scale;
        let s = a.norm().max(b.norm());
        if s > 0.0 {
            worst = worst.max((a - b).norm() / s);
        }
    }
    BasisComparison { scale, max_row_difference: worst }
}

/// `⟨2s_1, …, 2s_N|_Sk`.
pub fn sklyanin_top_covector(basis: &CovectorBasis) -> CVec {
    let top = MultiIndex(basis.bounds.clone());
    basis.row(&top)
}

/// Relative commutator of every operator used by the fused-transfer bases with `T(μ)`.
pub fn construction_operators_commute(chain: &ChainSpec, mu: C64) -> f64 {
    let ev = TransferEvaluator::new(chain);
    let t = ev.transfer(mu);
    let mut worst: f64 = 0.0;
    for n in 0..chain.n_sites() {
        let top = chain.two_s(n);
        let mut ops = vec![ev.fused(top, chain.node(n, top - 1))];
        ops.extend((0..=top).map(|l| ev.fused(l, chain.node(n, top))));
        for op in ops {
            worst = worst.max(rel_residual(&commutator(&op, &t), &(&*op * &*t)));
        }
    }
    worst
}
