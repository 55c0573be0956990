//! Dense complex linear algebra helpers shared by every module.
//!
//! Everything here works on `DMatrix<Complex64>` and is sized for desk-scale
//! chains (Hilbert dimension up to a few hundred).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Dense operator on the chain Hilbert space.
pub type Operator = CMat;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn frob(a: &CMat) -> f64 {
    a.norm()
}

/// `‖diff‖_F / max(1, ‖reference‖_F)`.
pub fn rel_residual(diff: &CMat, reference: &CMat) -> f64 {
    diff.norm() / reference.norm().max(1.0)
}

/// Relative distance between two matrices, scaled by the larger of the two.
pub fn rel_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// Covector-times-operator product `⟨v| op`, with covectors stored as columns.
pub fn covec_mul(v: &CVec, op: &CMat) -> CVec {
    op.tr_mul(v)
}

/// Bilinear pairing `⟨w|v⟩ = Σ w_i v_i` (no conjugation).
pub fn pair(w: &CVec, v: &CVec) -> C64 {
    w.iter().zip(v.iter()).map(|(a, b)| a * b).sum()
}

pub fn vec_kron(a: &CVec, b: &CVec) -> CVec {
    a.kronecker(b)
}

/// Matrix of the 2×2 array `[[a, b], [c, d]]`.
pub fn mat2(m: [[C64; 2]; 2]) -> CMat {
    CMat::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]])
}

pub fn det(m: &CMat) -> C64 {
    if m.nrows() == 0 {
        return ONE;
    }
    m.clone().lu().determinant()
}

pub fn solve(m: &CMat, rhs: &CVec) -> Option<CVec> {
    m.clone().lu().solve(rhs)
}

pub fn inverse(m: &CMat) -> Option<CMat> {
    m.clone().try_inverse()
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let sv = m.clone().svd(false, false).singular_values;
    let mut out: Vec<f64> = sv.iter().copied().collect();
    out.sort_by(|a, b| b.partial_cmp(a).unwrap());
    out
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number(m: &CMat) -> f64 {
    let sv = singular_values(m);
    let smin = *sv.last().unwrap_or(&0.0);
    if smin == 0.0 {
        f64::INFINITY
    } else {
        sv[0] / smin
    }
}

/// Numerical rank of `m` after scaling each row to unit norm.
///
/// Returns the rank at relative threshold `tol` together with the smallest
/// singular value of the equilibrated matrix.
pub fn equilibrated_rank(m: &CMat, tol: f64) -> (usize, f64) {
    let mut scaled = m.clone();
    for mut row in scaled.row_iter_mut() {
        let n = row.norm();
        if n > 0.0 {
            row /= re(n);
        }
    }
    let sv = singular_values(&scaled);
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > tol * smax.max(f64::MIN_POSITIVE)).count();
    (rank, sv.last().copied().unwrap_or(0.0))
}

/// Unit vector spanning the (numerical) kernel of `m`.
pub fn null_vector(m: &CMat) -> CVec {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^H");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("non-empty matrix");
    vt.row(k).adjoint()
}

/// Eigenvalues of a square complex matrix via the Schur form.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    let n = m.nrows();
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

/// Right/left eigen-decomposition for a matrix with simple spectrum.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<C64>,
    /// Right eigenvectors as columns.
    pub right: CMat,
    /// Left eigenvectors as columns, normalised so that `leftᵀ · right = I`.
    pub left: CMat,
}

impl EigenDecomposition {
    /// Smallest pairwise eigenvalue distance.
    pub fn min_gap(&self) -> f64 {
        min_pairwise_gap(&self.values)
    }

    pub fn right_vec(&self, k: usize) -> CVec {
        self.right.column(k).into_owned()
    }

    pub fn left_vec(&self, k: usize) -> CVec {
        self.left.column(k).into_owned()
    }

    /// `Σ_k f(k) |v_k⟩⟨w_k|`.
    pub fn assemble<F: Fn(usize) -> C64>(&self, f: F) -> CMat {
        let n = self.values.len();
        let mut diag = CMat::zeros(n, n);
        for k in 0..n {
            diag[(k, k)] = f(k);
        }
        &self.right * diag * self.left.transpose()
    }

    /// Eigenvalue of a commuting operator on the k-th eigenvector.
    pub fn expectation(&self, op: &CMat, k: usize) -> C64 {
        let v = self.right.column(k);
        let w = self.left.column(k);
        let ov = op * v;
        w.iter().zip(ov.iter()).map(|(a, b)| a * b).sum()
    }
}

pub fn min_pairwise_gap(values: &[C64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            gap = gap.min((values[i] - values[j]).norm());
        }
    }
    gap
}

/// Eigen-decomposition assuming every eigenvalue is simple.
///
/// Right vectors come from the kernel of `m - μ`, left vectors from the
/// kernel of `mᵀ - μ`; each pair is rescaled so that `wᵀv = 1`.
pub fn eig_simple(m: &CMat) -> EigenDecomposition {
    let n = m.nrows();
    let values = eigenvalues(m);
    let mut right = CMat::zeros(n, n);
    let mut left = CMat::zeros(n, n);
    let mt = m.transpose();
    for (k, &mu) in values.iter().enumerate() {
        let shift = CMat::from_diagonal_element(n, n, mu);
        let v = null_vector(&(m - &shift));
        let w = null_vector(&(&mt - &shift));
        let norm = pair(&w, &v);
        right.set_column(k, &v);
        left.set_column(k, &(w / norm));
    }
    EigenDecomposition { values, right, left }
}

/// Barycentric-free Lagrange weights `ℓ_i(x)` for the given nodes.
pub fn lagrange_weights(nodes: &[C64], x: C64) -> Vec<C64> {
    (0..nodes.len())
        .map(|i| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| (x - xj) / (nodes[i] - xj))
                .product()
        })
        .collect()
}

/// Value at `x` of the polynomial of minimal degree through `(nodes, values)`.
pub fn lagrange_eval(nodes: &[C64], values: &[C64], x: C64) -> C64 {
    lagrange_weights(nodes, x)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}

/// Horner evaluation; coefficients in ascending degree.
pub fn poly_eval(coeffs: &[C64], x: C64) -> C64 {
    coeffs.iter().rev().fold(ZERO, |acc, &a| acc * x + a)
}

/// Roots of a polynomial (ascending coefficients, nonzero leading term)
/// from the eigenvalues of its companion matrix.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let mut comp = CMat::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = ONE;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    eigenvalues(&comp)
}

/// Determinant of a square array of pairwise commuting operators by the
/// Leibniz permutation expansion. Intended for orders up to ~5.
pub fn leibniz_det(entries: &[Vec<CMat>], dim: usize) -> CMat {
    let n = entries.len();
    let mut total = CMat::zeros(dim, dim);
    for perm in permutations(n) {
        let sign = permutation_sign(&perm);
        let mut term = identity(dim);
        for (row, &col) in perm.iter().enumerate() {
            term = &term * &entries[row][col];
        }
        total += term * re(sign);
    }
    total
}

/// All permutations of `0..n` (Heap's algorithm order is not needed; this is
/// lexicographic).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

pub fn permutation_sign(perm: &[usize]) -> f64 {
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in (i + 1)..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
