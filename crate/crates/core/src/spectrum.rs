//! Transfer-matrix spectrum: the diagonalisation oracle, the discrete
//! determinant system on the node grid, and SoV eigenvector reconstruction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SovError};
use crate::linalg::{c, det, eig_simple, pair, re, singular_values, solve, CMat, CVec, C64, ONE, ZERO};
use crate::model::ChainSpec;
use crate::monodromy::TransferEvaluator;
use crate::sov::{CovectorBasis, MultiIndex};

/// `t(λ) = tr K ∏_a (λ - ξ_a^(0)) + Σ_a g_a(λ) x_a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvaluePolynomial {
    pub x: Vec<C64>,
    pub leading: C64,
    pub nodes: Vec<C64>,
}

impl EigenvaluePolynomial {
    pub fn new(chain: &ChainSpec, x: Vec<C64>) -> Self {
        let nodes = (0..chain.n_sites()).map(|n| chain.node(n, 0)).collect();
        EigenvaluePolynomial { x, leading: chain.twist.trace(), nodes }
    }

    /// Interpolation weight `g_a(λ) = ∏_{b≠a} (λ - ξ_b^(0)) / (ξ_a^(0) - ξ_b^(0))`.
    pub fn weight(&self, a: usize, lambda: C64) -> C64 {
        let xa = self.nodes[a];
        self.nodes
            .iter()
            .enumerate()
            .filter(|&(b, _)| b != a)
            .map(|(_, &xb)| (lambda - xb) / (xa - xb))
            .product()
    }

    pub fn eval(&self, lambda: C64) -> C64 {
        let top: C64 = self.nodes.iter().map(|&xb| lambda - xb).product::<C64>() * self.leading;
        top + (0..self.x.len()).map(|a| self.weight(a, lambda) * self.x[a]).sum::<C64>()
    }

    /// Term-wise magnitude bound for `eval`.
    pub fn eval_abs(&self, lambda: C64) -> f64 {
        let top: f64 = self.nodes.iter().map(|&xb| (lambda - xb).norm()).product::<f64>() * self.leading.norm();
        top + (0..self.x.len()).map(|a| (self.weight(a, lambda) * self.x[a]).norm()).sum::<f64>()
    }

    /// Ascending coefficients (degree `N`).
    pub fn coefficients(&self) -> Vec<C64> {
        let n = self.nodes.len();
        let mut out = vec![ZERO; n + 1];
        let mut add = |roots: &[C64], scale: C64| {
            let mut poly = vec![scale];
            for &r in roots {
                let mut next = vec![ZERO; poly.len() + 1];
                for (k, &p) in poly.iter().enumerate() {
                    next[k + 1] += p;
                    next[k] -= p * r;
                }
                poly = next;
            }
            for (k, p) in poly.into_iter().enumerate() {
                out[k] += p;
            }
        };
        add(&self.nodes, self.leading);
        for a in 0..n {
            let others: Vec<C64> = (0..n).filter(|&b| b != a).map(|b| self.nodes[b]).collect();
            let denom: C64 = others.iter().map(|&xb| self.nodes[a] - xb).product();
            add(&others, self.x[a] / denom);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.x.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-norm distance between the two `x` tuples.
    pub fn distance(&self, other: &Self) -> f64 {
        self.x.iter().zip(&other.x).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// `D_{t,n}`: tridiagonal with diagonal `t(ξ_n^(k))`, super-diagonal
/// `-k1 a(ξ_n^(k))` and sub-diagonal `-k2 d(ξ_n^(k+1))`.
pub fn discrete_matrix(chain: &ChainSpec, t: &EigenvaluePolynomial, n: usize) -> CMat {
    let size = chain.two_s(n) + 1;
    let (k1, k2) = (chain.twist.k1, chain.twist.k2);
    let mut m = CMat::zeros(size, size);
    for k in 0..size {
        let x = chain.node(n, k);
        m[(k, k)] = t.eval(x);
        if k + 1 < size {
            m[(k, k + 1)] = -k1 * chain.a(x);
            m[(k + 1, k)] = -k2 * chain.d(chain.node(n, k + 1));
        }
    }
    m
}

/// Determinant of `D_{t,n}` by the three-term recurrence, its absolute-value
/// majorant (used as the residual scale), and the derivative in every `x_a`.
fn recurrence(chain: &ChainSpec, t: &EigenvaluePolynomial, n: usize) -> (C64, f64, Vec<C64>) {
    let size = chain.two_s(n) + 1;
    let m = t.x.len();
    let qd = chain.twist.k1 * chain.twist.k2;
    let (mut p_prev, mut p) = (ONE, ZERO);
    let (mut s_prev, mut s) = (1.0, 0.0);
    let (mut dp_prev, mut dp) = (vec![ZERO; m], vec![ZERO; m]);
    for k in 0..size {
        let x = chain.node(n, k);
        let tk = t.eval(x);
        let tk_abs = t.eval_abs(x);
        let coupling = if k == 0 { ZERO } else { qd * chain.a(chain.node(n, k - 1)) * chain.d(x) };
        let (p_next, s_next) = if k == 0 {
            (tk, tk_abs)
        } else {
            (tk * p - coupling * p_prev, tk_abs * s + coupling.norm() * s_prev)
        };
        let dp_next: Vec<C64> = (0..m)
            .map(|a| {
                let g = t.weight(a, x);
                if k == 0 {
                    g
                } else {
                    g * p + tk * dp[a] - coupling * dp_prev[a]
                }
            })
            .collect();
        if k == 0 {
            p_prev = ONE;
            s_prev = 1.0;
            dp_prev = vec![ZERO; m];
        } else {
            p_prev = p;
            s_prev = s;
            dp_prev = dp;
        }
        p = p_next;
        s = s_next;
        dp = dp_next;
    }
    (p, s, dp)
}

/// `(det D_{t,n})_n`.
pub fn discrete_residuals(chain: &ChainSpec, t: &EigenvaluePolynomial) -> Vec<C64> {
    (0..chain.n_sites()).map(|n| recurrence(chain, t, n).0).collect()
}

/// `max_n |det D_{t,n}| / scale_n` with the absolute-recurrence scale.
pub fn relative_discrete_residual(chain: &ChainSpec, t: &EigenvaluePolynomial) -> f64 {
    (0..chain.n_sites())
        .map(|n| {
            let (p, s, _) = recurrence(chain, t, n);
            if p.norm() == 0.0 {
                0.0
            } else {
                p.norm() / s.max(f64::MIN_POSITIVE)
            }
        })
        .fold(0.0, f64::max)
}

/// Jacobian `∂ det D_{t,n} / ∂ x_a`.
pub fn discrete_jacobian(chain: &ChainSpec, t: &EigenvaluePolynomial) -> CMat {
    let n_sites = chain.n_sites();
    let mut j = CMat::zeros(n_sites, n_sites);
    for n in 0..n_sites {
        let (_, _, dp) = recurrence(chain, t, n);
        for (a, v) in dp.into_iter().enumerate() {
            j[(n, a)] = v;
        }
    }
    j
}

/// Smallest singular value of the Jacobian relative to its largest.
pub fn jacobian_conditioning(chain: &ChainSpec, t: &EigenvaluePolynomial) -> f64 {
    let sv = singular_values(&discrete_jacobian(chain, t));
    sv.last().copied().unwrap_or(0.0) / sv.first().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE)
}

/// One oracle eigenstate of `T(λ)`.
#[derive(Debug, Clone)]
pub struct OracleState {
    pub t: EigenvaluePolynomial,
    pub right: CVec,
    pub left: CVec,
}

#[derive(Debug, Clone)]
pub struct OracleSpectrum {
    pub states: Vec<OracleState>,
    pub probe: C64,
    pub gap: f64,
}

/// Diagonalises `T(λ₀)` at a seeded generic point and reads off
/// `x_a = ⟨w|T(ξ_a^(0))|v⟩ / ⟨w|v⟩` for every eigenpair.
pub fn brute_force_spectrum(chain: &ChainSpec) -> Result<OracleSpectrum> {
    let mut rng = ChaCha8Rng::seed_from_u64(chain.seed ^ 0x5eed_0ac1e);
    let ev = TransferEvaluator::new(chain);
    let mut best: Option<(C64, crate::linalg::EigenDecomposition, f64)> = None;
    for _ in 0..4 {
        let probe = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let t = ev.transfer(probe);
        let dec = eig_simple(&t);
        let scale = dec.values.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let gap = dec.min_gap() / scale;
        if best.as_ref().is_none_or(|b| gap > b.2) {
            best = Some((probe, dec, gap));
        }
    }
    let (probe, dec, gap) = best.expect("at least one probe");
    if gap < 1e-8 {
        return Err(SovError::NearDegenerateSpectrum { gap });
    }
    let node_ops: Vec<_> = (0..chain.n_sites()).map(|a| ev.transfer(chain.node(a, 0))).collect();
    let states = (0..dec.values.len())
        .map(|k| {
            let x = node_ops.iter().map(|op| dec.expectation(op, k)).collect();
            OracleState { t: EigenvaluePolynomial::new(chain, x), right: dec.right_vec(k), left: dec.left_vec(k) }
        })
        .collect();
    Ok(OracleSpectrum { states, probe, gap })
}

/// Spectrum for `k1 k2 = 0`: `t_h(λ) = tr K ∏_n (λ - ξ_n^(h_n))`.
pub fn closed_form_spectrum(chain: &ChainSpec) -> Vec<EigenvaluePolynomial> {
    let bounds: Vec<usize> = (0..chain.n_sites()).map(|n| chain.two_s(n)).collect();
    let lead = chain.twist.trace();
    MultiIndex::all(&bounds)
        .into_iter()
        .map(|h| {
            let x = (0..chain.n_sites()).map(|a| lead * chain.node_product(&h.0, chain.node(a, 0))).collect();
            EigenvaluePolynomial::new(chain, x)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NewtonOutcome {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Damped Newton iteration on `F(x) = (det D_{t,n})_n`.
pub fn newton_refine(chain: &ChainSpec, seed: &[C64]) -> (EigenvaluePolynomial, NewtonOutcome) {
    let mut t = EigenvaluePolynomial::new(chain, seed.to_vec());
    let norm = |t: &EigenvaluePolynomial| discrete_residuals(chain, t).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut f = norm(&t);
    let mut iterations = 0;
    for it in 0..50 {
        iterations = it;
        if relative_discrete_residual(chain, &t) < 1e-14 {
            break;
        }
        let rhs = CVec::from_vec(discrete_residuals(chain, &t).into_iter().map(|z| -z).collect());
        let Some(step) = solve(&discrete_jacobian(chain, &t), &rhs) else { break };
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let x: Vec<C64> = t.x.iter().zip(step.iter()).map(|(x, s)| x + s * damping).collect();
            let trial = EigenvaluePolynomial::new(chain, x);
            let ft = norm(&trial);
            if ft < f || ft == 0.0 {
                t = trial;
                f = ft;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        if !accepted || step.norm() * damping <= 1e-15 * (1.0 + t.max_abs()) {
            break;
        }
    }
    let residual = relative_discrete_residual(chain, &t);
    (t, NewtonOutcome { iterations, residual, converged: residual < 1e-10 })
}

#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub solutions: Vec<EigenvaluePolynomial>,
    pub outcomes: Vec<NewtonOutcome>,
    pub duplicates: usize,
    pub non_converged: usize,
}

fn same_solution(a: &EigenvaluePolynomial, b: &EigenvaluePolynomial) -> bool {
    a.distance(b) < 1e-6 * (1.0 + a.max_abs().max(b.max_abs()))
}

/// All solutions of the discrete system, seeded from the oracle unless
/// explicit seeds are supplied. Fails unless exactly `D` distinct solutions
/// are found.
pub fn solve_discrete_system(chain: &ChainSpec, seeds: Option<&[Vec<C64>]>) -> Result<DiscreteSolution> {
    let dim = chain.dim();
    if chain.twist.singular {
        let solutions = closed_form_spectrum(chain);
        let outcomes = solutions
            .iter()
            .map(|t| NewtonOutcome { iterations: 0, residual: relative_discrete_residual(chain, t), converged: true })
            .collect();
        return Ok(DiscreteSolution { solutions, outcomes, duplicates: 0, non_converged: 0 });
    }
    let seeds: Vec<Vec<C64>> = match seeds {
        Some(s) => s.to_vec(),
        None => brute_force_spectrum(chain)?.states.into_iter().map(|s| s.t.x).collect(),
    };
    let refined: Vec<(EigenvaluePolynomial, NewtonOutcome)> = seeds.par_iter().map(|s| newton_refine(chain, s)).collect();
    let mut solutions: Vec<EigenvaluePolynomial> = Vec::new();
    let mut outcomes = Vec::new();
    let (mut duplicates, mut non_converged) = (0, 0);
    for (t, outcome) in refined {
        if !outcome.converged {
            non_converged += 1;
            continue;
        }
        if solutions.iter().any(|s| same_solution(s, &t)) {
            duplicates += 1;
            continue;
        }
        solutions.push(t);
        outcomes.push(outcome);
    }
    if solutions.len() != dim {
        return Err(SovError::CountMismatch { found: solutions.len(), expected: dim });
    }
    Ok(DiscreteSolution { solutions, outcomes, duplicates, non_converged })
}

/// Pairs every element of `reference` with its nearest element of `found`;
/// fails unless this is a bijection. Returns the permutation and the largest
/// matching distance relative to `1 + max|x|`.
pub fn match_spectra(reference: &[EigenvaluePolynomial], found: &[EigenvaluePolynomial]) -> Option<(Vec<usize>, f64)> {
    if reference.len() != found.len() {
        return None;
    }
    let mut used = vec![false; found.len()];
    let mut perm = Vec::with_capacity(reference.len());
    let mut worst: f64 = 0.0;
    for r in reference {
        let (j, d) = found
            .iter()
            .enumerate()
            .map(|(j, f)| (j, r.distance(f) / (1.0 + r.max_abs())))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        if used[j] {
            return None;
        }
        used[j] = true;
        perm.push(j);
        worst = worst.max(d);
    }
    Some((perm, worst))
}

/// `t^(l)(ξ_n^(2s_n))` for `l = 0..=2s_n+1` from the scalar fusion recursion.
pub fn fused_eigenvalues(chain: &ChainSpec, t: &EigenvaluePolynomial) -> Vec<Vec<C64>> {
    (0..chain.n_sites())
        .map(|n| {
            let top = chain.two_s(n);
            let lambda = chain.node(n, top);
            let mut vals = vec![ONE, t.eval(lambda)];
            for l in 1..=top {
                let shift = lambda + chain.eta * re(l as f64);
                let next = t.eval(shift) * vals[l] - chain.qdet(shift) * vals[l - 1];
                vals.push(next);
            }
            vals
        })
        .collect()
}

/// Bottom-right `l × l` principal minor of `D_{t,n}`.
pub fn discrete_minor(chain: &ChainSpec, t: &EigenvaluePolynomial, n: usize, l: usize) -> C64 {
    let m = discrete_matrix(chain, t, n);
    let size = m.nrows();
    det(&m.view((size - l, size - l), (l, l)).into_owned())
}

/// `⟨h|t⟩` in the second fused basis, lexicographic order, normalised to one
/// at `h = (2s_1, …, 2s_N)`.
pub fn wavefunction_sov2(chain: &ChainSpec, t: &EigenvaluePolynomial) -> Vec<C64> {
    let fused = fused_eigenvalues(chain, t);
    let bounds: Vec<usize> = (0..chain.n_sites()).map(|n| chain.two_s(n)).collect();
    let k2 = chain.twist.k2;
    let local: Vec<Vec<C64>> = (0..chain.n_sites())
        .map(|n| {
            let top = bounds[n];
            (0..=top)
                .map(|h| {
                    let level = top - h;
                    let mut v = fused[n][level] * k2.powi(h as i32 - top as i32);
                    for k in 0..level {
                        v /= chain.d(chain.node(n, top - k));
                    }
                    v
                })
                .collect()
        })
        .collect();
    MultiIndex::all(&bounds).iter().map(|h| (0..chain.n_sites()).map(|n| local[n][h.get(n)]).product()).collect()
}

/// Largest relative violation of
/// `t(ξ_n^(h_n)) ψ(h) = k1 a ψ(h+e_n) + k2 d ψ(h-e_n)`.
pub fn wavefunction_separate_residual(chain: &ChainSpec, t: &EigenvaluePolynomial, psi: &[C64]) -> f64 {
    let bounds: Vec<usize> = (0..chain.n_sites()).map(|n| chain.two_s(n)).collect();
    let (k1, k2) = (chain.twist.k1, chain.twist.k2);
    let at = |h: Option<MultiIndex>| h.map_or(ZERO, |h| psi[h.position(&bounds)]);
    let mut worst: f64 = 0.0;
    for h in MultiIndex::all(&bounds) {
        for n in 0..chain.n_sites() {
            let x = chain.node(n, h.get(n));
            let lhs = t.eval(x) * psi[h.position(&bounds)];
            let up = k1 * chain.a(x) * at(h.shifted(n, 1, &bounds));
            let down = k2 * chain.d(x) * at(h.shifted(n, -1, &bounds));
            let scale = lhs.norm().max(up.norm()).max(down.norm());
            if scale > 0.0 {
                worst = worst.max((lhs - up - down).norm() / scale);
            }
        }
    }
    worst
}

/// Fully reconstructed eigenstate.
#[derive(Debug, Clone, Serialize)]
pub struct EigenRecord {
    pub t: EigenvaluePolynomial,
    pub fused: Vec<Vec<C64>>,
    pub wavefunction: Vec<C64>,
    #[serde(skip)]
    pub vector: CVec,
    pub discrete_residual: f64,
    pub eigen_residual: f64,
}

/// Relative residual of `T(μ)v = t(μ)v` maximised over the probes.
pub fn eigen_residual(chain: &ChainSpec, t: &EigenvaluePolynomial, v: &CVec, probes: &[C64]) -> f64 {
    let ev = TransferEvaluator::new(chain);
    probes
        .iter()
        .map(|&mu| {
            let tv = &*ev.transfer(mu) * v;
            let rhs = v * t.eval(mu);
            (&tv - &rhs).norm() / tv.norm().max(rhs.norm()).max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

/// Seeded generic probe points for eigen-relation checks.
pub fn probe_points(seed: u64, count: usize) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))).collect()
}

/// Solves `⟨h|v⟩ = ψ(h)` for `v` in the given basis.
pub fn eigenvector_from_sov(chain: &ChainSpec, t: &EigenvaluePolynomial, basis: &CovectorBasis) -> Result<EigenRecord> {
    let wavefunction = wavefunction_sov2(chain, t);
    let rhs = CVec::from_vec(wavefunction.clone());
    let vector = solve(&basis.rows, &rhs).ok_or(SovError::DegenerateBasis { rank: 0, dim: basis.dim() })?;
    let eigen_residual = eigen_residual(chain, t, &vector, &probe_points(chain.seed ^ 0x9e37, 3));
    if eigen_residual > 1e-7 {
        return Err(SovError::ResidualTooLarge { what: "eigenvector".into(), residual: eigen_residual, tolerance: 1e-7 });
    }
    Ok(EigenRecord {
        fused: fused_eigenvalues(chain, t),
        discrete_residual: relative_discrete_residual(chain, t),
        t: t.clone(),
        wavefunction,
        vector,
        eigen_residual,
    })
}

/// Records for every solution, in parallel.
pub fn reconstruct_all(
    chain: &ChainSpec,
    solutions: &[EigenvaluePolynomial],
    basis: &CovectorBasis,
) -> Result<Vec<EigenRecord>> {
    solutions.par_iter().map(|t| eigenvector_from_sov(chain, t, basis)).collect()
}

/// `|⟨u, v⟩| / (‖u‖ ‖v‖)` with the Hermitian product.
pub fn collinearity(u: &CVec, v: &CVec) -> f64 {
    u.dotc(v).norm() / (u.norm() * v.norm())
}

/// Bilinear pairing `⟨w|v⟩` used for the left-eigenvector overlap.
pub fn left_overlap(w: &CVec, v: &CVec) -> C64 {
    pair(w, v)
}
