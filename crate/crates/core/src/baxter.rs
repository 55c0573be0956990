//! Baxter TQ relation: node values of `Q`, the interpolation/Cramer
//! construction of the Q-polynomial, Wronskians, the Q-operator and the
//! covector basis it generates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SovError};
use crate::linalg::{c, condition_number, covec_mul, det, eig_simple, inverse, poly_eval, poly_roots, re, solve, CMat, CVec, C64, ONE, ZERO};
use crate::model::ChainSpec;
use crate::monodromy::TransferEvaluator;
use crate::sov::{sklyanin_basis, sklyanin_top_covector, BasisKind, CovectorBasis, MultiIndex};
use crate::spectrum::{fused_eigenvalues, EigenvaluePolynomial};

/// `𝖰_{t,n}^(h)` from the fused eigenvalues:
/// `𝖰^(2s-h) = k2^{-h} t^(h)(ξ^(2s)) / ∏_{k<h} d(ξ^(2s-k))`, indexed `[n][h]`.
pub fn q_values(chain: &ChainSpec, t: &EigenvaluePolynomial) -> Vec<Vec<C64>> {
    let fused = fused_eigenvalues(chain, t);
    (0..chain.n_sites())
        .map(|n| {
            let top = chain.two_s(n);
            let mut vals = vec![ZERO; top + 1];
            for l in 0..=top {
                let mut v = fused[n][l] / chain.twist.k2.powi(l as i32);
                for k in 0..l {
                    v /= chain.d(chain.node(n, top - k));
                }
                vals[top - l] = v;
            }
            vals
        })
        .collect()
}

/// The same values from the downward two-term recursion of the tridiagonal system.
pub fn q_values_recursive(chain: &ChainSpec, t: &EigenvaluePolynomial) -> Vec<Vec<C64>> {
    let (k1, k2) = (chain.twist.k1, chain.twist.k2);
    (0..chain.n_sites())
        .map(|n| {
            let top = chain.two_s(n);
            let mut vals = vec![ZERO; top + 1];
            vals[top] = ONE;
            for h in (1..=top).rev() {
                let x = chain.node(n, h);
                let above = if h < top { k1 * chain.a(x) * vals[h + 1] } else { ZERO };
                vals[h - 1] = (t.eval(x) * vals[h] - above) / (k2 * chain.d(x));
            }
            vals
        })
        .collect()
}

/// Interpolation nodes `ξ_b^(k)`, `k = 1..=2s_b`, in site-major order.
fn upper_nodes(chain: &ChainSpec) -> Vec<(usize, usize, C64)> {
    (0..chain.n_sites()).flat_map(|b| (1..=chain.two_s(b)).map(move |k| (b, k, chain.node(b, k)))).collect()
}

/// `∏_{(c,k)} (λ - ξ_c^(k)) / (ζ - ξ_c^(k))` over the upper nodes.
fn zeta_factor(nodes: &[(usize, usize, C64)], zeta: C64, lambda: C64) -> C64 {
    nodes.iter().map(|&(_, _, x)| (lambda - x) / (zeta - x)).product()
}

/// Lagrange basis polynomial of node `(b, h)` over `upper ∪ {ζ}`, at `λ`.
fn node_basis(nodes: &[(usize, usize, C64)], zeta: C64, idx: usize, lambda: C64) -> C64 {
    let xi = nodes[idx].2;
    let mut v = (lambda - zeta) / (xi - zeta);
    for (j, &(_, _, x)) in nodes.iter().enumerate() {
        if j != idx {
            v *= (lambda - x) / (xi - x);
        }
    }
    v
}

/// The `N × N` Cramer system fixing `q_b = Q(ξ_b^(2s_b))` once `Q(ζ) = 1`.
#[derive(Debug, Clone)]
pub struct CZetaSystem {
    pub zeta: C64,
    pub c: CMat,
    pub rhs: CVec,
    /// Node values `𝖰_b^(h)` the system was assembled from.
    pub q_nodes: Vec<Vec<C64>>,
    nodes: Vec<(usize, usize, C64)>,
    bottoms: Vec<C64>,
}

impl CZetaSystem {
    pub fn new(chain: &ChainSpec, q_nodes: Vec<Vec<C64>>, zeta: C64) -> Self {
        let nodes = upper_nodes(chain);
        let n = chain.n_sites();
        let bottoms: Vec<C64> = (0..n).map(|a| chain.node(a, 0)).collect();
        let mut cm = CMat::zeros(n, n);
        let mut rhs = CVec::zeros(n);
        for a in 0..n {
            let x = bottoms[a];
            cm[(a, a)] -= q_nodes[a][0];
            for (idx, &(b, h, _)) in nodes.iter().enumerate() {
                cm[(a, b)] += node_basis(&nodes, zeta, idx, x) * q_nodes[b][h];
            }
            rhs[a] = -zeta_factor(&nodes, zeta, x);
        }
        CZetaSystem { zeta, c: cm, rhs, q_nodes, nodes, bottoms }
    }

    /// `C_ζ(j)`: column `j` replaced by the right-hand side.
    pub fn column_replaced(&self, j: usize) -> CMat {
        let mut m = self.c.clone();
        m.set_column(j, &self.rhs);
        m
    }

    /// `q_j = det C_ζ(j) / det C_ζ`.
    pub fn cramer(&self) -> Result<Vec<C64>> {
        let d = det(&self.c);
        if d.norm() == 0.0 || condition_number(&self.c) > 1e12 {
            return Err(SovError::SingularCZeta { zeta: self.zeta });
        }
        Ok((0..self.c.ncols()).map(|j| det(&self.column_replaced(j)) / d).collect())
    }

    /// Rank-one `Δ_ζ(λ)` with `Q(λ) = det(C + Δ)/det C · ∏ (λ-ξ)/(ζ-ξ)`.
    pub fn delta(&self, lambda: C64) -> CMat {
        let n = self.c.nrows();
        let p = zeta_factor(&self.nodes, self.zeta, lambda);
        let mut u = CVec::zeros(n);
        for (idx, &(b, h, _)) in self.nodes.iter().enumerate() {
            u[b] += node_basis(&self.nodes, self.zeta, idx, lambda) * self.q_nodes[b][h] / p;
        }
        let mut m = CMat::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                m[(a, b)] = self.rhs[a] * u[b];
            }
        }
        m
    }

    /// `Q(λ)` from the determinant representation (normalised `Q(ζ) = 1`).
    pub fn determinant_value(&self, lambda: C64) -> C64 {
        det(&(&self.c + self.delta(lambda))) / det(&self.c) * zeta_factor(&self.nodes, self.zeta, lambda)
    }

    /// `Q(λ)` from the interpolation formula given the `q_b`.
    pub fn interpolate(&self, q: &[C64], lambda: C64) -> C64 {
        let mut v = zeta_factor(&self.nodes, self.zeta, lambda);
        for (idx, &(b, h, _)) in self.nodes.iter().enumerate() {
            v += node_basis(&self.nodes, self.zeta, idx, lambda) * q[b] * self.q_nodes[b][h];
        }
        v
    }

    /// Largest relative mismatch of the `N` conditions at `ξ_a^(0)`.
    pub fn left_out_residual(&self, q: &[C64]) -> f64 {
        self.bottoms
            .iter()
            .enumerate()
            .map(|(a, &x)| {
                let lhs = self.interpolate(q, x);
                let rhs = self.q_nodes[a][0] * q[a];
                let terms: f64 = self
                    .nodes
                    .iter()
                    .enumerate()
                    .map(|(idx, &(b, h, _))| (node_basis(&self.nodes, self.zeta, idx, x) * q[b] * self.q_nodes[b][h]).norm())
                    .sum();
                let scale = terms + zeta_factor(&self.nodes, self.zeta, x).norm() + rhs.norm();
                (lhs - rhs).norm() / scale.max(1e-300)
            })
            .fold(0.0, f64::max)
    }
}

/// Monic Baxter polynomial.
#[derive(Debug, Clone, Serialize)]
pub struct QPolynomial {
    /// Ascending coefficients, last one equal to one.
    pub coeffs: Vec<C64>,
    /// `Q(ξ_n^(h))`, indexed `[n][h]`.
    pub node_values: Vec<Vec<C64>>,
    pub zeta: C64,
    /// `Q(ζ)` after monic normalisation.
    pub q0: C64,
    pub left_out_residual: f64,
}

impl QPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, lambda: C64) -> C64 {
        poly_eval(&self.coeffs, lambda)
    }

    pub fn roots(&self) -> Vec<C64> {
        poly_roots(&self.coeffs)
    }

    pub fn from_coeffs(coeffs: Vec<C64>) -> Self {
        QPolynomial { coeffs, node_values: Vec::new(), zeta: ZERO, q0: ONE, left_out_residual: 0.0 }
    }
}

/// Coefficients of the polynomial of degree `< points.len()` through the
/// data, by a column-scaled Vandermonde least-squares solve.
pub fn fit_coefficients(points: &[C64], values: &[C64]) -> Vec<C64> {
    let m = points.len();
    let scale = points.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let v = CMat::from_fn(m, m, |i, k| (points[i] / re(scale)).powi(k as i32));
    let rhs = CVec::from_column_slice(values);
    let svd = v.svd(true, true);
    let y = svd.solve(&rhs, 1e-14).expect("svd solve");
    (0..m).map(|k| y[k] / re(scale).powi(k as i32)).collect()
}

/// Drops leading coefficients below `1e-9 · max|coef|` and normalises to monic.
pub fn monic_truncate(mut coeffs: Vec<C64>) -> Vec<C64> {
    let big = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    while coeffs.len() > 1 && coeffs.last().unwrap().norm() <= 1e-9 * big {
        coeffs.pop();
    }
    let lead = *coeffs.last().unwrap();
    coeffs.into_iter().map(|z| z / lead).collect()
}

/// Builds `Q_t` from the Cramer system at `ζ`, checks the left-out
/// conditions and returns the monic polynomial.
pub fn solve_q_polynomial(chain: &ChainSpec, t: &EigenvaluePolynomial, zeta: C64) -> Result<QPolynomial> {
    let q_nodes = q_values(chain, t);
    let sys = CZetaSystem::new(chain, q_nodes.clone(), zeta);
    let q = sys.cramer()?;
    let left_out_residual = sys.left_out_residual(&q);
    if left_out_residual > chain.tolerances.residual {
        return Err(SovError::ResidualTooLarge {
            what: "Q interpolation at bottom nodes".into(),
            residual: left_out_residual,
            tolerance: chain.tolerances.residual,
        });
    }
    let mut points = vec![zeta];
    let mut values = vec![ONE];
    for (b, h, x) in upper_nodes(chain) {
        points.push(x);
        values.push(q[b] * q_nodes[b][h]);
    }
    let raw = fit_coefficients(&points, &values);
    let lead = monic_lead(&raw);
    let coeffs = monic_truncate(raw);
    let node_values: Vec<Vec<C64>> =
        (0..chain.n_sites()).map(|n| (0..=chain.two_s(n)).map(|h| q_nodes[n][h] * q[n] / lead).collect()).collect();
    let poly = QPolynomial { coeffs, node_values, zeta, q0: ONE / lead, left_out_residual };
    check_roots(chain, &poly)?;
    Ok(poly)
}

fn monic_lead(coeffs: &[C64]) -> C64 {
    let big = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    *coeffs.iter().rev().find(|z| z.norm() > 1e-9 * big).unwrap_or(&ONE)
}

/// Rejects polynomials with a root on some `ξ_b^(2s_b)`.
pub fn check_roots(chain: &ChainSpec, q: &QPolynomial) -> Result<()> {
    let d = min_root_distance(chain, q);
    if d < chain.tolerances.zero {
        let (root, node) = q
            .roots()
            .into_iter()
            .flat_map(|r| (0..chain.n_sites()).map(move |b| (r, b)))
            .min_by(|x, y| {
                (x.0 - chain.node(x.1, chain.two_s(x.1))).norm().total_cmp(&(y.0 - chain.node(y.1, chain.two_s(y.1))).norm())
            })
            .map(|(r, b)| (r, chain.node(b, chain.two_s(b))))
            .unwrap_or((ZERO, ZERO));
        return Err(SovError::RootOnForbiddenNode { root, node });
    }
    Ok(())
}

/// Smallest distance between a root of `Q` and the top nodes `ξ_b^(2s_b)`.
pub fn min_root_distance(chain: &ChainSpec, q: &QPolynomial) -> f64 {
    q.roots()
        .iter()
        .flat_map(|r| (0..chain.n_sites()).map(move |b| (r - chain.node(b, chain.two_s(b))).norm()))
        .fold(f64::INFINITY, f64::min)
}

/// Seeded `ζ` at distance more than `|η|` from every node, with a
/// well-conditioned Cramer matrix for every supplied eigenvalue.
pub fn choose_zeta(chain: &ChainSpec, ts: &[EigenvaluePolynomial], seed: u64) -> Result<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid: Vec<C64> = chain.node_grid().all().map(|(_, _, x)| x).collect();
    let radius = grid.iter().map(|z| z.norm()).fold(1.0, f64::max) + 2.0;
    for _ in 0..200 {
        let zeta = c(rng.random_range(-radius..radius), rng.random_range(-radius..radius));
        if grid.iter().any(|x| (zeta - x).norm() <= chain.eta.norm()) {
            continue;
        }
        let ok = ts.iter().all(|t| condition_number(&CZetaSystem::new(chain, q_values(chain, t), zeta).c) < 1e8);
        if ok {
            return Ok(zeta);
        }
    }
    Err(SovError::SamplingExhausted(200))
}

/// `β(λ) = k1 a(λ)`.
pub fn beta(chain: &ChainSpec, lambda: C64) -> C64 {
    chain.twist.k1 * chain.a(lambda)
}

/// `|α Q(λ-2η) - β t(λ-η) Q(λ-η) + det_q Q(λ)| / (sum of term magnitudes)`, maximised.
pub fn tq_residual<F: Fn(C64) -> C64, G: Fn(C64) -> C64>(chain: &ChainSpec, t: F, q: G, samples: &[C64]) -> f64 {
    let eta = chain.eta;
    samples
        .iter()
        .map(|&l| {
            let alpha = beta(chain, l) * beta(chain, l - eta);
            let t1 = alpha * q(l - eta * re(2.0));
            let t2 = beta(chain, l) * t(l - eta) * q(l - eta);
            let t3 = chain.qdet(l) * q(l);
            let scale = t1.norm() + t2.norm() + t3.norm();
            if scale == 0.0 {
                0.0
            } else {
                (t1 - t2 + t3).norm() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// Shifted form `k1 a(λ) Q(λ-η) - t(λ) Q(λ) + k2 d(λ) Q(λ+η)`, relative.
pub fn tq_shifted_residual(chain: &ChainSpec, t: &EigenvaluePolynomial, q: &QPolynomial, samples: &[C64]) -> f64 {
    let eta = chain.eta;
    samples
        .iter()
        .map(|&l| {
            let t1 = chain.twist.k1 * chain.a(l) * q.eval(l - eta);
            let t2 = t.eval(l) * q.eval(l);
            let t3 = chain.twist.k2 * chain.d(l) * q.eval(l + eta);
            let scale = t1.norm() + t2.norm() + t3.norm();
            if scale == 0.0 {
                0.0
            } else {
                (t1 - t2 + t3).norm() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// `W_{P,Q}(λ) = Q(λ)P(λ-η) - P(λ)Q(λ-η)`.
pub fn wronskian(p: &QPolynomial, q: &QPolynomial, eta: C64, lambda: C64) -> C64 {
    q.eval(lambda) * p.eval(lambda - eta) - p.eval(lambda) * q.eval(lambda - eta)
}

/// Largest `|W_{P,Q}| / (|Q P| + |P Q|)` over the sample points.
pub fn wronskian_check(p: &QPolynomial, q: &QPolynomial, eta: C64, samples: &[C64]) -> f64 {
    samples
        .iter()
        .map(|&l| {
            let a = q.eval(l) * p.eval(l - eta);
            let b = p.eval(l) * q.eval(l - eta);
            let scale = a.norm() + b.norm();
            if scale == 0.0 {
                0.0
            } else {
                (a - b).norm() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// Relative spread of `ψ(h) / ∏_n Q(ξ_n^(h_n))` over all `h`.
pub fn sov_q_spread(chain: &ChainSpec, psi: &[C64], q: &QPolynomial) -> f64 {
    let bounds: Vec<usize> = (0..chain.n_sites()).map(|n| chain.two_s(n)).collect();
    let ratios: Vec<C64> = MultiIndex::all(&bounds)
        .iter()
        .enumerate()
        .map(|(p, h)| psi[p] / (0..chain.n_sites()).map(|n| q.eval(chain.node(n, h.get(n)))).product::<C64>())
        .collect();
    let mean = ratios.iter().sum::<C64>() / re(ratios.len() as f64);
    ratios.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max) / mean.norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QMethod {
    Eigenbasis,
    DeterminantRepresentation,
}

/// `𝖰(λ)` assembled on the simultaneous eigenbasis of the transfer matrix.
pub struct QOperator {
    pub zeta: C64,
    pub states: Vec<EigenvaluePolynomial>,
    pub polys: Vec<QPolynomial>,
    /// Per-state Cramer systems assembled from operator expectation values.
    systems: Vec<CZetaSystem>,
    eig: crate::linalg::EigenDecomposition,
}

impl QOperator {
    /// Diagonalises `T(λ₀)` and solves for every `Q_t` with a common `ζ`.
    pub fn build(chain: &ChainSpec, seed: u64) -> Result<Self> {
        let (k1, k2) = (chain.twist.k1, chain.twist.k2);
        if !chain.twist.has_distinct_eigenvalues() || k1.norm() == 0.0 || k2.norm() == 0.0 {
            return Err(SovError::SingularTwist);
        }
        let oracle = crate::spectrum::brute_force_spectrum(chain)?;
        let ev = TransferEvaluator::new(chain);
        let eig = eig_simple(&ev.transfer(oracle.probe));
        let states: Vec<EigenvaluePolynomial> = oracle.states.iter().map(|s| s.t.clone()).collect();
        let zeta = choose_zeta(chain, &states, seed)?;
        let polys = states.par_iter().map(|t| solve_q_polynomial(chain, t, zeta)).collect::<Result<Vec<_>>>()?;
        // operator node values 𝖰_{T,a}^(h) read off on each eigenvector
        let mut node_ops: Vec<Vec<CMat>> = Vec::new();
        for a in 0..chain.n_sites() {
            let top = chain.two_s(a);
            let mut ops = vec![CMat::zeros(1, 1); top + 1];
            for l in 0..=top {
                let mut s = ONE / k2.powi(l as i32);
                for k in 0..l {
                    s /= chain.d(chain.node(a, top - k));
                }
                ops[top - l] = &*ev.fused(l, chain.node(a, top)) * s;
            }
            node_ops.push(ops);
        }
        let systems = (0..states.len())
            .map(|k| {
                let q_nodes = node_ops.iter().map(|ops| ops.iter().map(|op| eig.expectation(op, k)).collect()).collect();
                CZetaSystem::new(chain, q_nodes, zeta)
            })
            .collect();
        Ok(QOperator { zeta, states, polys, systems, eig })
    }

    /// Eigenvalue index ordering matches `states` and `polys`.
    pub fn eval(&self, lambda: C64, method: QMethod) -> CMat {
        match method {
            QMethod::Eigenbasis => self.eig.assemble(|k| self.polys[k].eval(lambda) / self.polys[k].q0),
            QMethod::DeterminantRepresentation => self.eig.assemble(|k| self.systems[k].determinant_value(lambda)),
        }
    }

    /// Monic normalisation instead of `Q(ζ) = 1`.
    pub fn eval_monic(&self, lambda: C64) -> CMat {
        self.eig.assemble(|k| self.polys[k].eval(lambda))
    }

    pub fn right_vector(&self, k: usize) -> CVec {
        self.eig.right_vec(k)
    }

    pub fn left_vector(&self, k: usize) -> CVec {
        self.eig.left_vec(k)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Relative operator TQ residual with the monic `𝖰`.
pub fn operator_tq_residual(chain: &ChainSpec, qop: &QOperator, lambda: C64) -> f64 {
    let eta = chain.eta;
    let ev = TransferEvaluator::new(chain);
    let alpha = beta(chain, lambda) * beta(chain, lambda - eta);
    let t1 = qop.eval_monic(lambda - eta * re(2.0)) * alpha;
    let t2 = &*ev.transfer(lambda - eta) * qop.eval_monic(lambda - eta) * beta(chain, lambda);
    let t3 = qop.eval_monic(lambda) * chain.qdet(lambda);
    let scale = t1.norm() + t2.norm() + t3.norm();
    (t1 - t2 + t3).norm() / scale
}

/// `⟨L| = ⟨2s…2s|_Sk ∏_n 𝖰(ξ_n^(2s_n))⁻¹`.
pub fn canonical_l(chain: &ChainSpec, qop: &QOperator) -> Result<CVec> {
    let sk = sklyanin_basis(chain)?;
    let mut l = sklyanin_top_covector(&sk);
    for n in 0..chain.n_sites() {
        let x = chain.node(n, chain.two_s(n));
        let q = qop.eval_monic(x);
        let inv = inverse(&q).ok_or(SovError::NonInvertibleQ(x))?;
        if condition_number(&q) > 1e12 {
            return Err(SovError::NonInvertibleQ(x));
        }
        l = covec_mul(&l, &inv);
    }
    Ok(l)
}

/// `⟨h| = ⟨L| ∏_a 𝖰(ξ_a^(h_a))`.
pub fn sov_from_q(chain: &ChainSpec, qop: &QOperator, l: &CVec) -> Result<CovectorBasis> {
    let bounds: Vec<usize> = (0..chain.n_sites()).map(|n| chain.two_s(n)).collect();
    let q_at: Vec<Vec<CMat>> =
        (0..chain.n_sites()).map(|n| (0..=bounds[n]).map(|h| qop.eval_monic(chain.node(n, h))).collect()).collect();
    let rows: Vec<CVec> = MultiIndex::all(&bounds)
        .par_iter()
        .map(|h| {
            let mut v = l.clone();
            for (n, ops) in q_at.iter().enumerate() {
                v = covec_mul(&v, &ops[h.get(n)]);
            }
            v
        })
        .collect();
    let basis = CovectorBasis::from_rows(rows, BasisKind::QGenerated, l.clone(), bounds);
    let (rank, _) = crate::sov::gram_rank(&basis, chain.tolerances.gram);
    if rank < basis.dim() {
        return Err(SovError::DegenerateBasis { rank, dim: basis.dim() });
    }
    Ok(basis)
}

/// `min_t |⟨L|t⟩| / (‖L‖ ‖t‖)`: the generating covector must see every eigenvector.
pub fn min_overlap(qop: &QOperator, l: &CVec) -> f64 {
    (0..qop.len())
        .map(|k| {
            let v = qop.right_vector(k);
            crate::linalg::pair(l, &v).norm() / (l.norm() * v.norm())
        })
        .fold(f64::INFINITY, f64::min)
}

/// Seeded sample points for TQ and Wronskian checks.
pub fn sample_points(seed: u64, count: usize) -> Vec<C64> {
    crate::spectrum::probe_points(seed, count)
}

/// Solves the TQ problem for each eigenvalue at a second `ζ` and returns the
/// largest Wronskian between the two solutions.
pub fn uniqueness_spread(chain: &ChainSpec, ts: &[EigenvaluePolynomial], polys: &[QPolynomial], seed: u64) -> Result<f64> {
    let zeta = choose_zeta(chain, ts, seed)?;
    let samples = sample_points(seed ^ 0xabcd, 5);
    let mut worst: f64 = 0.0;
    for (t, q) in ts.iter().zip(polys) {
        let other = solve_q_polynomial(chain, t, zeta)?;
        worst = worst.max(wronskian_check(q, &other, chain.eta, &samples));
        if other.degree() == q.degree() {
            let diff = q.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let scale = q.coeffs.iter().map(|z| z.norm()).fold(1.0, f64::max);
            worst = worst.max(diff / scale);
        } else {
            worst = f64::INFINITY;
        }
    }
    Ok(worst)
}

/// Solves `M x = y` columnwise; helper for callers that need `𝖰⁻¹` applied to vectors.
pub fn apply_inverse(m: &CMat, v: &CVec) -> Option<CVec> {
    solve(m, v)
}
