//! Chain definition, twist handling, the scalar functions `a`, `d`, `det_q`
//! and the separated-variable node grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SovError};
use crate::linalg::{c, inverse, mat2, re, CMat, C64, ONE, ZERO};
use crate::repn::{fused_matrix, Spin};

pub type Mat2 = [[C64; 2]; 2];

/// Quasi-periodic twist `K` with its eigenvalues and, when `b = 0`, a
/// conjugator `W` such that `W⁻¹KW` has nonzero off-diagonal entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Twist {
    pub matrix: Mat2,
    pub k1: C64,
    pub k2: C64,
    pub conjugator: Option<Mat2>,
    /// `k1·k2 = 0`.
    pub singular: bool,
}

impl Twist {
    pub fn a(&self) -> C64 {
        self.matrix[0][0]
    }
    pub fn b(&self) -> C64 {
        self.matrix[0][1]
    }
    pub fn c(&self) -> C64 {
        self.matrix[1][0]
    }
    pub fn d(&self) -> C64 {
        self.matrix[1][1]
    }

    pub fn trace(&self) -> C64 {
        self.a() + self.d()
    }

    pub fn det(&self) -> C64 {
        self.a() * self.d() - self.b() * self.c()
    }

    pub fn as_mat(&self) -> CMat {
        mat2(self.matrix)
    }

    pub fn has_distinct_eigenvalues(&self) -> bool {
        (self.k1 - self.k2).norm() > 1e-12 * (self.k1.norm() + self.k2.norm()).max(1.0)
    }

    pub fn is_b_zero(&self) -> bool {
        self.b().norm() <= mat_scale(&self.matrix) * 1e-13
    }

    pub fn conjugator_mat(&self) -> Option<CMat> {
        self.conjugator.map(mat2)
    }

    /// `K̄ = W⁻¹ K W`, or `K` itself when no conjugation is needed.
    pub fn conjugated(&self) -> Mat2 {
        match self.conjugator {
            None => self.matrix,
            Some(w) => to_mat2(&(inverse(&mat2(w)).expect("invertible conjugator") * self.as_mat() * mat2(w))),
        }
    }

    /// Twist with the same eigenvalue labels but matrix `K̄`.
    pub fn conjugated_twist(&self) -> Twist {
        Twist { matrix: self.conjugated(), k1: self.k1, k2: self.k2, conjugator: None, singular: self.singular }
    }
}

fn mat_scale(m: &Mat2) -> f64 {
    m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max).max(1.0)
}

pub fn to_mat2(m: &CMat) -> Mat2 {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

/// Eigenvalues of a 2×2 matrix, sorted by (real part, imaginary part) descending.
pub fn twist_eigenvalues(k: &Mat2) -> (C64, C64) {
    let tr = k[0][0] + k[1][1];
    let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
    let disc = (tr * tr / re(4.0) - det).sqrt();
    let (x, y) = (tr / re(2.0) + disc, tr / re(2.0) - disc);
    let key = |z: &C64| (z.re, z.im);
    if key(&x) >= key(&y) {
        (x, y)
    } else {
        (y, x)
    }
}

pub fn twist_normalize(k: Mat2) -> Result<Twist> {
    let scale = mat_scale(&k);
    let tol = 1e-13 * scale;
    if k[0][1].norm() <= tol && k[1][0].norm() <= tol && (k[0][0] - k[1][1]).norm() <= tol {
        return Err(SovError::SimpleSpectrumViolation);
    }
    let (k1, k2) = twist_eigenvalues(&k);
    let singular = (k1 * k2).norm() <= tol * scale;
    let conjugator = if k[0][1].norm() <= tol {
        Some(choose_conjugator(&k, tol))
    } else {
        None
    };
    Ok(Twist { matrix: k, k1, k2, conjugator, singular })
}

fn choose_conjugator(k: &Mat2, tol: f64) -> Mat2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let hadamard = [[re(s), re(s)], [re(s), re(-s)]];
    let admissible = |w: &Mat2| {
        let wm = mat2(*w);
        let kb = inverse(&wm).expect("invertible") * mat2(*k) * wm;
        kb[(0, 1)].norm() > tol && kb[(1, 0)].norm() > tol
    };
    if k[1][0].norm() <= tol && admissible(&hadamard) {
        return hadamard;
    }
    // rotations with unit determinant, first admissible angle wins
    for step in 1..64 {
        let theta = std::f64::consts::PI * step as f64 / 67.0;
        let (sn, cs) = theta.sin_cos();
        let w = [[re(cs), re(-sn)], [re(sn), re(cs)]];
        if admissible(&w) {
            return w;
        }
    }
    hadamard
}

/// `K^(a)`: the restriction of `K^⊗a` to the symmetric subspace.
pub fn fused_twist(twist: &Twist, level: usize) -> CMat {
    fused_matrix(&twist.as_mat(), level)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub spin: Spin,
    pub xi: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub residual: f64,
    pub zero: f64,
    pub gram: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { residual: 1e-8, zero: 1e-6, gram: 1e-10 }
    }
}

/// Full model definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub eta: C64,
    pub sites: Vec<Site>,
    pub twist: Twist,
    pub tolerances: Tolerances,
    pub seed: u64,
}

/// `ξ_n^(k) = ξ_n - η/2 + (s_n - k) η` for `k = 0..=2s_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeGrid {
    pub nodes: Vec<Vec<C64>>,
}

impl NodeGrid {
    pub fn node(&self, n: usize, k: usize) -> C64 {
        self.nodes[n][k]
    }

    /// `ξ_n^(2s_n)`.
    pub fn top(&self, n: usize) -> C64 {
        *self.nodes[n].last().unwrap()
    }

    /// `ξ_n^(0)`.
    pub fn bottom(&self, n: usize) -> C64 {
        self.nodes[n][0]
    }

    pub fn all(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.nodes.iter().enumerate().flat_map(|(n, row)| row.iter().enumerate().map(move |(k, &x)| (n, k, x)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenericityReport {
    /// Smallest `|ξ_a - ξ_b - kη|` over the checked window.
    pub min_gap: f64,
    /// Smallest distance between grid nodes of different sites.
    pub min_node_distance: f64,
}

impl ChainSpec {
    /// Builds a chain and runs [`genericity_check`].
    pub fn new(eta: C64, sites: Vec<Site>, twist: Mat2, tolerances: Tolerances, seed: u64) -> Result<Self> {
        let chain = Self::unchecked(eta, sites, twist, tolerances, seed)?;
        genericity_check(&chain)?;
        Ok(chain)
    }

    /// Builds a chain without the genericity check (the twist is still
    /// normalised and must not be proportional to the identity).
    pub fn unchecked(eta: C64, sites: Vec<Site>, twist: Mat2, tolerances: Tolerances, seed: u64) -> Result<Self> {
        if sites.is_empty() {
            return Err(SovError::EmptyChain);
        }
        let twist = twist_normalize(twist)?;
        Ok(ChainSpec { eta, sites, twist, tolerances, seed })
    }

    /// Chain with seeded inhomogeneities drawn uniformly from the square of
    /// side 10 centred at the origin, redrawn until generic.
    pub fn random(eta: C64, spins: &[u32], twist: Mat2, tolerances: Tolerances, seed: u64) -> Result<Self> {
        let spins = spins.iter().map(|&s| Spin::new(s)).collect::<Result<Vec<_>>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..1000 {
            let sites = spins
                .iter()
                .map(|&spin| Site { spin, xi: c(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)) })
                .collect();
            match Self::new(eta, sites, twist, tolerances, seed) {
                Ok(chain) => return Ok(chain),
                Err(SovError::GenericityViolation { .. }) | Err(SovError::NodeCollision { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(SovError::SamplingExhausted(1000))
    }

    pub fn with_twist(&self, twist: Mat2) -> Result<Self> {
        let mut out = self.clone();
        out.twist = twist_normalize(twist)?;
        Ok(out)
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn two_s(&self, n: usize) -> usize {
        self.sites[n].spin.two_s()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s.spin.dim()).collect()
    }

    /// Hilbert-space dimension `∏(2s_n + 1)`.
    pub fn dim(&self) -> usize {
        self.dims().iter().product()
    }

    /// `N_s = Σ 2s_n`, the degree bound for Baxter polynomials.
    pub fn total_two_s(&self) -> usize {
        self.sites.iter().map(|s| s.spin.two_s()).sum()
    }

    pub fn max_two_s(&self) -> usize {
        self.sites.iter().map(|s| s.spin.two_s()).max().unwrap_or(0)
    }

    pub fn xi_minus(&self, n: usize) -> C64 {
        self.sites[n].xi - self.eta / re(2.0)
    }

    pub fn node(&self, n: usize, k: usize) -> C64 {
        let s = self.sites[n].spin.s();
        self.xi_minus(n) + self.eta * re(s - k as f64)
    }

    pub fn node_grid(&self) -> NodeGrid {
        let nodes = (0..self.n_sites())
            .map(|n| {
                let first = self.node(n, 0);
                (0..=self.two_s(n)).map(|k| first - self.eta * re(k as f64)).collect()
            })
            .collect();
        NodeGrid { nodes }
    }

    /// `a(λ) = ∏(λ - ξ_n⁻ + s_n η)`.
    pub fn a(&self, lambda: C64) -> C64 {
        (0..self.n_sites()).map(|n| lambda - self.xi_minus(n) + self.eta * re(self.sites[n].spin.s())).product()
    }

    /// `d(λ) = ∏(λ - ξ_n⁻ - s_n η)`.
    pub fn d(&self, lambda: C64) -> C64 {
        (0..self.n_sites()).map(|n| lambda - self.xi_minus(n) - self.eta * re(self.sites[n].spin.s())).product()
    }

    /// `det K · a(λ) · d(λ - η)`.
    pub fn qdet(&self, lambda: C64) -> C64 {
        self.twist.det() * self.a(lambda) * self.d(lambda - self.eta)
    }

    /// `∏_n (λ - ξ_n^(h_n))`.
    pub fn node_product(&self, h: &[usize], lambda: C64) -> C64 {
        h.iter().enumerate().map(|(n, &k)| lambda - self.node(n, k)).product()
    }
}

pub fn a_of(chain: &ChainSpec, lambda: C64) -> C64 {
    chain.a(lambda)
}

pub fn d_of(chain: &ChainSpec, lambda: C64) -> C64 {
    chain.d(lambda)
}

pub fn quantum_det_scalar(chain: &ChainSpec, lambda: C64) -> C64 {
    chain.qdet(lambda)
}

/// Verifies `|ξ_a - ξ_b - kη| > tol` for `|k| ≤ 2·max(2s) + 1` and that grid
/// nodes of different sites are pairwise distinct.
pub fn genericity_check(chain: &ChainSpec) -> Result<GenericityReport> {
    let tol = chain.tolerances.zero;
    let window = (2 * chain.max_two_s() + 1) as i64;
    let mut min_gap = f64::INFINITY;
    for a in 0..chain.n_sites() {
        for b in 0..chain.n_sites() {
            if a == b {
                continue;
            }
            for k in -window..=window {
                let gap = (chain.sites[a].xi - chain.sites[b].xi - chain.eta * re(k as f64)).norm();
                if gap <= tol {
                    return Err(SovError::GenericityViolation { a, b, k, gap });
                }
                min_gap = min_gap.min(gap);
            }
        }
    }
    let grid = chain.node_grid();
    let mut min_node_distance = f64::INFINITY;
    for (a, ha, x) in grid.all() {
        for (b, hb, y) in grid.all() {
            if a < b {
                let dist = (x - y).norm();
                if dist <= tol {
                    return Err(SovError::NodeCollision { a, ha, b, hb });
                }
                min_node_distance = min_node_distance.min(dist);
            }
        }
    }
    Ok(GenericityReport { min_gap, min_node_distance })
}

/// Diagonal 2×2 twist.
pub fn diag_twist(k1: C64, k2: C64) -> Mat2 {
    [[k1, ZERO], [ZERO, k2]]
}

pub fn identity_twist() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigenvalues, rel_diff};

    fn single_site(two_s: u32, xi: C64, eta: C64, twist: Mat2) -> ChainSpec {
        ChainSpec::new(eta, vec![Site { spin: Spin::new(two_s).unwrap(), xi }], twist, Tolerances::default(), 0).unwrap()
    }

    #[test]
    fn a_and_d_single_spin_half() {
        let chain = single_site(1, ZERO, ONE, diag_twist(re(2.0), ONE));
        for x in [re(0.3), c(-1.2, 0.7)] {
            assert!((chain.a(x) - (x + ONE)).norm() < 1e-15);
            assert!((chain.d(x) - x).norm() < 1e-15);
        }
    }

    #[test]
    fn node_grid_structure() {
        let chain = ChainSpec::random(c(0.9, 0.2), &[1, 2, 3], diag_twist(re(2.0), ONE), Tolerances::default(), 3).unwrap();
        let grid = chain.node_grid();
        for n in 0..chain.n_sites() {
            let s = chain.sites[n].spin.s();
            for k in 0..chain.two_s(n) {
                assert!((grid.node(n, k + 1) - (grid.node(n, k) - chain.eta)).norm() < 1e-14);
            }
            assert!((grid.bottom(n) - (chain.xi_minus(n) + chain.eta * re(s))).norm() < 1e-14);
            assert!((grid.top(n) - (chain.xi_minus(n) - chain.eta * re(s))).norm() < 1e-14);
            assert!(chain.d(grid.bottom(n)).norm() < 1e-12);
            assert!(chain.a(grid.top(n)).norm() < 1e-12);
        }
        let big = c(1e7, 3e6);
        assert!((chain.a(big) / chain.d(big) - ONE).norm() < 1e-5);
    }

    #[test]
    fn quantum_det_scalar_examples() {
        let chain = single_site(1, ZERO, ONE, diag_twist(ONE, re(-1.0)));
        let chain_id = ChainSpec { twist: Twist { matrix: identity_twist(), k1: ONE, k2: ONE, conjugator: None, singular: false }, ..chain.clone() };
        let x = c(0.4, -0.3);
        assert!((chain_id.qdet(x) - (x + ONE) * (x - ONE)).norm() < 1e-14);
        let chain2 = chain.with_twist(diag_twist(re(2.0), re(3.0))).unwrap();
        assert!((chain2.qdet(x) - re(6.0) * chain_id.qdet(x)).norm() < 1e-13);
        let top = chain.node_grid().top(0);
        assert_eq!(chain.qdet(top), ZERO);
    }

    #[test]
    fn twist_normalize_diagonal() {
        let t = twist_normalize(diag_twist(re(2.0), ONE)).unwrap();
        assert_eq!((t.k1, t.k2), (re(2.0), ONE));
        let kb = t.conjugated();
        assert!((kb[0][1] - re(0.5)).norm() < 1e-14);
        assert!(kb[1][0].norm() > 0.1);
    }

    #[test]
    fn twist_normalize_antiperiodic() {
        let t = twist_normalize([[ZERO, ONE], [ONE, ZERO]]).unwrap();
        assert!((t.k1 - ONE).norm() < 1e-15 && (t.k2 + ONE).norm() < 1e-15);
        assert!(t.conjugator.is_none());
    }

    #[test]
    fn twist_normalize_rejects_identity() {
        assert_eq!(twist_normalize(identity_twist()).unwrap_err(), SovError::SimpleSpectrumViolation);
        let t = twist_normalize(diag_twist(re(3.0), ZERO)).unwrap();
        assert!(t.singular);
    }

    #[test]
    fn lower_triangular_twist_gets_rotation() {
        let t = twist_normalize([[re(2.0), ZERO], [c(0.5, 1.0), re(-1.0)]]).unwrap();
        let kb = t.conjugated();
        assert!(kb[0][1].norm() > 1e-6 && kb[1][0].norm() > 1e-6);
        let w = t.conjugator_mat().unwrap();
        assert!((crate::linalg::det(&w) - ONE).norm() < 1e-13);
    }

    #[test]
    fn fused_twist_spectrum() {
        let t = twist_normalize(diag_twist(re(2.0), re(3.0))).unwrap();
        let k2 = fused_twist(&t, 2);
        let mut ev: Vec<f64> = eigenvalues(&k2).iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in ev.iter().zip([4.0, 6.0, 9.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(rel_diff(&fused_twist(&t, 1), &t.as_mat()) < 1e-15);
    }

    #[test]
    fn fused_twist_general_spectrum() {
        let k = [[c(1.3, 0.2), c(0.7, -0.1)], [c(0.4, 0.3), c(0.6, -0.5)]];
        let t = twist_normalize(k).unwrap();
        for level in 1..=5 {
            let ev = eigenvalues(&fused_twist(&t, level));
            for h in 1..=level + 1 {
                let want = t.k1.powi((level + 1 - h) as i32) * t.k2.powi((h - 1) as i32);
                let best = ev.iter().map(|z| (z - want).norm()).fold(f64::INFINITY, f64::min);
                assert!(best < 1e-10, "level {level} h {h}");
            }
            assert!(crate::linalg::min_pairwise_gap(&ev) > 1e-6);
        }
    }

    #[test]
    fn genericity() {
        let sites = |x2: f64| {
            vec![
                Site { spin: Spin::new(1).unwrap(), xi: ZERO },
                Site { spin: Spin::new(1).unwrap(), xi: re(x2) },
            ]
        };
        let tw = diag_twist(re(2.0), ONE);
        assert!(ChainSpec::new(ONE, sites(10.0), tw, Tolerances::default(), 0).is_ok());
        let err = ChainSpec::new(ONE, sites(1.0), tw, Tolerances::default(), 0).unwrap_err();
        assert!(matches!(err, SovError::GenericityViolation { .. }));
        for seed in 0..20 {
            assert!(ChainSpec::random(ONE, &[1, 2, 2], tw, Tolerances::default(), seed).is_ok());
        }
    }

    #[test]
    fn empty_chain_rejected() {
        let err = ChainSpec::new(ONE, vec![], diag_twist(re(2.0), ONE), Tolerances::default(), 0).unwrap_err();
        assert_eq!(err, SovError::EmptyChain);
    }
}
