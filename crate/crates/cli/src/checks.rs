//! Verification suites behind each command.

use serde::Serialize;
use sovchain::baxter::{
    canonical_l, min_overlap, min_root_distance, operator_tq_residual, q_values, q_values_recursive, sov_from_q,
    sov_q_spread, tq_residual, tq_shifted_residual, uniqueness_spread, QMethod, QOperator,
};
use sovchain::linalg::{c, commutator, condition_number, re, rel_diff, rel_residual, C64, ONE};
use sovchain::model::ChainSpec;
use sovchain::monodromy::{
    fused_transfer, fused_transfer_projector, monodromy, quantum_det_operator_check, rtt_residual, symmetry_check,
    tridiagonal_operator_det, TransferEvaluator,
};
use sovchain::repn::{rll_residual, ybe_residual};
use sovchain::sov::{
    compare_bases, construction_operators_commute, gram_rank, random_covector, sklyanin_basis, sklyanin_top_covector,
    sov_basis_1, sov_basis_2, verify_b_eigen, verify_separate_action, verify_shift_actions, CovectorBasis,
};
use sovchain::spectrum::{
    brute_force_spectrum, closed_form_spectrum, collinearity, eigen_residual, match_spectra, probe_points,
    reconstruct_all, relative_discrete_residual, solve_discrete_system, wavefunction_sov2, EigenvaluePolynomial,
};

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub suite: String,
    pub name: String,
    /// `null` when the quantity could not be computed.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SpectrumRow {
    pub index: usize,
    pub x: Vec<[f64; 2]>,
    pub discrete_residual: f64,
    pub newton_iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigen_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavefunction: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisChoice {
    Sklyanin,
    Sov1,
    Sov2,
    Q,
}

impl BasisChoice {
    pub fn name(self) -> &'static str {
        match self {
            BasisChoice::Sklyanin => "sklyanin",
            BasisChoice::Sov1 => "sov1",
            BasisChoice::Sov2 => "sov2",
            BasisChoice::Q => "q",
        }
    }
}

pub struct Context<'a> {
    pub chain: &'a ChainSpec,
    pub samples: usize,
    pub seed: u64,
}

impl Context<'_> {
    fn points(&self, salt: u64, count: usize) -> Vec<C64> {
        probe_points(self.seed ^ salt, count)
    }
}

/// Accumulates checks of one suite.
pub struct Suite {
    name: String,
    pub checks: Vec<Check>,
    pub spectrum: Option<Vec<SpectrumRow>>,
}

impl Suite {
    pub fn new(name: impl Into<String>) -> Self {
        Suite { name: name.into(), checks: Vec::new(), spectrum: None }
    }

    fn below(&mut self, name: &str, value: f64, tolerance: f64) {
        let pass = value.is_finite() && value < tolerance;
        let residual = if value.is_finite() { Some(value) } else { None };
        self.checks.push(Check { suite: self.name.clone(), name: name.into(), residual, tolerance, pass, error: None });
    }

    /// Exact predicate: residual 0 when it holds, 1 otherwise, against 0.5.
    fn holds(&mut self, name: &str, ok: bool) {
        self.below(name, if ok { 0.0 } else { 1.0 }, 0.5);
    }

    pub fn fail(&mut self, name: &str, error: impl ToString) {
        self.checks.push(Check {
            suite: self.name.clone(),
            name: name.into(),
            residual: None,
            tolerance: 0.0,
            pass: false,
            error: Some(error.to_string()),
        });
    }

    fn attempt<T, E: ToString>(&mut self, name: &str, r: Result<T, E>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.fail(name, e);
                None
            }
        }
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn algebra(ctx: &Context) -> Suite {
    let mut s = Suite::new("algebra");
    let chain = ctx.chain;
    let pts = ctx.points(0x01, 2 * ctx.samples);
    let draws: Vec<(C64, C64)> = pts.chunks(2).map(|p| (p[0], p[1])).collect();
    s.below("YBE", max_of(draws.iter().map(|&(l, m)| ybe_residual(l, m, chain.eta))), 1e-11);
    let mut spins: Vec<u32> = chain.sites.iter().map(|x| x.spin.two_s() as u32).collect();
    spins.sort_unstable();
    spins.dedup();
    for two_s in spins {
        let rll = draws.iter().map(|&(l, m)| rll_residual(l, m, two_s, chain.eta)).collect::<Result<Vec<_>, _>>();
        if let Some(v) = s.attempt(&format!("RLL two_s={two_s}"), rll) {
            s.below(&format!("RLL two_s={two_s}"), max_of(v), 1e-11);
        }
    }
    s.below("RTT", max_of(draws.iter().map(|&(l, m)| rtt_residual(chain, l, m))), 1e-11);
    s.below("twist symmetry", max_of(pts.iter().map(|&l| symmetry_check(chain, l))), 1e-10);
    s.below("quantum determinant operator", max_of(pts.iter().map(|&l| quantum_det_operator_check(chain, l))), 1e-10);
    let scalar = max_of(pts.iter().map(|&l| {
        let m = monodromy(chain, l);
        let sh = monodromy(chain, l - chain.eta);
        let q = &m.a * &sh.d - &m.b * &sh.c;
        let read = q.trace() / re(chain.dim() as f64);
        let expect = chain.qdet(l);
        (read - expect).norm() / expect.norm().max(1.0)
    }));
    s.below("quantum determinant scalar", scalar, 1e-10);
    s
}

pub fn fusion(ctx: &Context) -> Suite {
    let mut s = Suite::new("fusion");
    let chain = ctx.chain;
    let ev = TransferEvaluator::new(chain);
    let top_level = chain.max_two_s() + 1;
    let pts = ctx.points(0x02, ctx.samples.max(2));
    let mut comm: f64 = 0.0;
    for l in 1..=top_level {
        for m in 1..=top_level {
            let a = ev.fused(l, pts[0]);
            let b = ev.fused(m, pts[1]);
            comm = comm.max(rel_residual(&commutator(&a, &b), &(&*a * &*b)));
        }
    }
    s.below("fused transfer commutators", comm, 1e-10);
    let levels = top_level.min(4);
    let mut projector: f64 = 0.0;
    let mut tridiagonal: f64 = 0.0;
    for &lam in &pts {
        for l in 1..=levels {
            let rec = ev.fused(l, lam);
            projector = projector.max(rel_diff(&rec, &fused_transfer_projector(chain, l, lam)));
            tridiagonal = tridiagonal.max(rel_diff(&rec, &tridiagonal_operator_det(chain, l, lam)));
        }
    }
    s.below("recursion vs projector", projector, 1e-9);
    s.below("recursion vs tridiagonal determinant", tridiagonal, 1e-9);
    let mut central: f64 = 0.0;
    for n in 0..chain.n_sites() {
        let top = chain.node(n, chain.two_s(n));
        for l in (chain.two_s(n) + 1)..=(chain.two_s(n) + 2) {
            // size of the same polynomial on a circle of radius |η|/2 around the node
            let scale = max_of((0..4).map(|k| {
                let phase = c(0.0, std::f64::consts::FRAC_PI_2 * k as f64).exp();
                fused_transfer(chain, l, top + chain.eta * phase * re(0.5)).norm()
            }));
            central = central.max(fused_transfer(chain, l, top).norm() / scale);
        }
    }
    s.below("central zeros", central, 1e-9);
    s
}

fn rank_check(s: &mut Suite, chain: &ChainSpec, basis: &CovectorBasis) {
    s.holds("Gram rank equals dimension", gram_rank(basis, chain.tolerances.gram).0 == chain.dim());
}

pub fn basis(ctx: &Context, kind: BasisChoice) -> Suite {
    let mut s = Suite::new(format!("basis-{}", kind.name()));
    let chain = ctx.chain;
    match kind {
        BasisChoice::Sklyanin => {
            let Some(b) = s.attempt("construction", sklyanin_basis(chain)) else { return s };
            rank_check(&mut s, chain, &b);
            let mut lams = ctx.points(0x03, ctx.samples);
            lams.extend(chain.node_grid().all().map(|(_, _, x)| x));
            s.below("B eigen-relation", max_of(lams.iter().map(|&l| verify_b_eigen(chain, &b, l))), 1e-9);
            let shifts: Vec<_> = lams.iter().map(|&l| verify_shift_actions(chain, &b, l)).collect();
            s.below("A shift action", max_of(shifts.iter().map(|r| r.a_action)), 1e-8);
            s.below("D shift action", max_of(shifts.iter().map(|r| r.d_action)), 1e-8);
        }
        BasisChoice::Sov1 => {
            let source = random_covector(chain.dim(), ctx.seed);
            let Some(b) = s.attempt("construction", sov_basis_1(chain, &source)) else { return s };
            rank_check(&mut s, chain, &b);
            let pts = ctx.points(0x04, ctx.samples);
            s.below("construction operators commute", max_of(pts.iter().map(|&m| construction_operators_commute(chain, m))), 1e-10);
        }
        BasisChoice::Sov2 => {
            let source = random_covector(chain.dim(), ctx.seed);
            let Some(b) = s.attempt("construction", sov_basis_2(chain, &source)) else { return s };
            rank_check(&mut s, chain, &b);
            s.below("separate action", verify_separate_action(chain, &b), 1e-8);
            let Some(sk) = s.attempt("Sklyanin construction", sklyanin_basis(chain)) else { return s };
            let Some(from_top) = s.attempt("construction from Sklyanin top", sov_basis_2(chain, &sklyanin_top_covector(&sk)))
            else {
                return s;
            };
            s.below("identification with Sklyanin", compare_bases(&from_top, &sk).max_row_difference, 1e-7);
        }
        BasisChoice::Q => {
            let Some(qop) = s.attempt("Q-operator", QOperator::build(chain, ctx.seed)) else { return s };
            let Some(l) = s.attempt("canonical covector", canonical_l(chain, &qop)) else { return s };
            s.holds("covector overlaps every eigenvector", min_overlap(&qop, &l) > 0.0);
            let Some(b) = s.attempt("construction", sov_from_q(chain, &qop, &l)) else { return s };
            rank_check(&mut s, chain, &b);
            let Some(sk) = s.attempt("Sklyanin construction", sklyanin_basis(chain)) else { return s };
            s.below("identification with Sklyanin", compare_bases(&b, &sk).max_row_difference, 1e-7);
        }
    }
    s
}

fn perturbed(chain: &ChainSpec, reference: &[EigenvaluePolynomial], seed: u64) -> Vec<Vec<C64>> {
    let n = chain.n_sites();
    let noise = probe_points(seed, reference.len() * n);
    reference
        .iter()
        .enumerate()
        .map(|(k, t)| t.x.iter().enumerate().map(|(a, x)| x * (ONE + noise[k * n + a] * re(1e-4))).collect())
        .collect()
}

pub fn spectrum(ctx: &Context) -> Suite {
    let mut s = Suite::new("spectrum");
    let chain = ctx.chain;
    let Some(oracle) = s.attempt("brute-force spectrum", brute_force_spectrum(chain)) else { return s };
    let reference: Vec<_> = oracle.states.iter().map(|st| st.t.clone()).collect();
    let Some(solved) = s.attempt("discrete system", solve_discrete_system(chain, None)) else { return s };
    s.holds("distinct solutions equal dimension", solved.solutions.len() == chain.dim());
    let matching = match_spectra(&reference, &solved.solutions).map(|m| m.1).unwrap_or(f64::INFINITY);
    s.below("bijection with brute force", matching, 1e-8);
    s.below("discrete residual", max_of(solved.solutions.iter().map(|t| relative_discrete_residual(chain, t))), 1e-8);
    if chain.twist.singular {
        let closed = closed_form_spectrum(chain);
        s.below("closed form", match_spectra(&reference, &closed).map(|m| m.1).unwrap_or(f64::INFINITY), 1e-10);
    } else {
        let seeds = perturbed(chain, &reference, ctx.seed ^ 0x07);
        if let Some(again) = s.attempt("perturbed seeds", solve_discrete_system(chain, Some(&seeds))) {
            let m = match_spectra(&reference, &again.solutions).map(|m| m.1).unwrap_or(f64::INFINITY);
            s.below("perturbed seeds converge", m, 1e-8);
        }
    }
    let mut records = None;
    if !chain.twist.singular {
        let built = sov_basis_2(chain, &random_covector(chain.dim(), ctx.seed))
            .and_then(|b| reconstruct_all(chain, &solved.solutions, &b));
        if let Some(recs) = s.attempt("eigenvector reconstruction", built) {
            let mus = ctx.points(0x08, ctx.samples);
            s.below("T(mu) v = t(mu) v", max_of(recs.iter().map(|r| eigen_residual(chain, &r.t, &r.vector, &mus))), 1e-7);
            let worst = max_of(recs.iter().map(|r| {
                oracle
                    .states
                    .iter()
                    .min_by(|a, b| a.t.distance(&r.t).total_cmp(&b.t.distance(&r.t)))
                    .map(|best| 1.0 - collinearity(&best.right, &r.vector))
                    .unwrap_or(f64::INFINITY)
            }));
            s.below("collinear with brute force", worst, 1e-8);
            records = Some(recs);
        }
    }
    let rows = solved
        .solutions
        .iter()
        .zip(&solved.outcomes)
        .enumerate()
        .map(|(index, (t, outcome))| {
            let rec = records.as_ref().map(|r: &Vec<sovchain::spectrum::EigenRecord>| &r[index]);
            SpectrumRow {
                index,
                x: t.x.iter().map(|&z| pair(z)).collect(),
                discrete_residual: relative_discrete_residual(chain, t),
                newton_iterations: outcome.iterations,
                eigen_residual: rec.map(|r| r.eigen_residual),
                wavefunction: (!chain.twist.singular).then(|| wavefunction_sov2(chain, t).into_iter().map(pair).collect()),
            }
        })
        .collect();
    s.spectrum = Some(rows);
    s
}

pub fn baxter(ctx: &Context) -> Suite {
    let mut s = Suite::new("baxter");
    let chain = ctx.chain;
    let Some(qop) = s.attempt("Q polynomials", QOperator::build(chain, ctx.seed)) else { return s };
    let n_s = chain.total_two_s();
    s.holds("degree at most N_s", qop.polys.iter().all(|q| q.degree() <= n_s));
    let recursion = max_of(qop.states.iter().flat_map(|t| {
        let a = q_values(chain, t);
        let b = q_values_recursive(chain, t);
        a.into_iter()
            .flatten()
            .zip(b.into_iter().flatten())
            .map(|(x, y)| (x - y).norm() / (1.0 + x.norm()))
            .collect::<Vec<_>>()
    }));
    s.below("node values: closed form vs recursion", recursion, 1e-8);
    s.below("left-out interpolation conditions", max_of(qop.polys.iter().map(|q| q.left_out_residual)), 1e-8);
    let samples = ctx.points(0x09, ctx.samples * chain.n_sites());
    let tq = max_of(qop.states.iter().zip(&qop.polys).map(|(t, q)| tq_residual(chain, |x| t.eval(x), |x| q.eval(x), &samples)));
    s.below("TQ relation", tq, 1e-8);
    let shifted = max_of(qop.states.iter().zip(&qop.polys).map(|(t, q)| tq_shifted_residual(chain, t, q, &samples)));
    s.below("shifted TQ relation", shifted, 1e-8);
    let dist = qop.polys.iter().map(|q| min_root_distance(chain, q)).fold(f64::INFINITY, f64::min);
    s.holds("roots avoid top nodes", dist > chain.tolerances.zero);
    if let Some(spread) = s.attempt("uniqueness", uniqueness_spread(chain, &qop.states, &qop.polys, ctx.seed ^ 0x17)) {
        s.below("independent of zeta (Wronskian)", spread, 1e-8);
    }
    let fact = max_of(qop.states.iter().zip(&qop.polys).map(|(t, q)| sov_q_spread(chain, &wavefunction_sov2(chain, t), q)));
    s.below("wavefunction factorises into Q", fact, 1e-7);
    s
}

pub fn qop(ctx: &Context) -> Suite {
    let mut s = Suite::new("qop");
    let chain = ctx.chain;
    let Some(qop) = s.attempt("Q-operator", QOperator::build(chain, ctx.seed)) else { return s };
    let ev = TransferEvaluator::new(chain);
    let pts = ctx.points(0x0a, ctx.samples + 1);
    let comm = max_of(pts.windows(2).map(|w| {
        let q = qop.eval_monic(w[0]);
        let t = ev.transfer(w[1]);
        rel_residual(&commutator(&q, &t), &(&q * &*t))
    }));
    s.below("[Q, T]", comm, 1e-9);
    s.below("operator TQ", max_of(pts.iter().map(|&l| operator_tq_residual(chain, &qop, l))), 1e-8);
    let cond = max_of((0..chain.n_sites()).map(|a| condition_number(&qop.eval_monic(chain.node(a, chain.two_s(a))))));
    s.below("condition of Q at top nodes", cond, 1e8);
    let agree = max_of(pts.iter().map(|&l| rel_diff(&qop.eval(l, QMethod::Eigenbasis), &qop.eval(l, QMethod::DeterminantRepresentation))));
    s.below("eigenbasis vs determinant representation", agree, 1e-7);
    s
}
