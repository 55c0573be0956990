//! Acceptance suite. Runs without the libtest harness so that every criterion
//! prints exactly one PASS/FAIL line; the process exits non-zero on failure.

mod common;

use std::time::Instant;

use common::*;
use sovchain::baxter::{
    canonical_l, min_root_distance, operator_tq_residual, solve_q_polynomial, sov_from_q, sov_q_spread, tq_residual,
    uniqueness_spread, QMethod, QOperator,
};
use sovchain::linalg::{commutator, condition_number, eigenvalues, re, rel_diff, rel_residual, C64, ONE};
use sovchain::model::{fused_twist, ChainSpec};
use sovchain::monodromy::{
    fused_transfer, fused_transfer_projector, monodromy, quantum_det_operator_check, rtt_residual, TransferEvaluator,
};
use sovchain::repn::{rll_residual, ybe_residual};
use sovchain::sov::{
    compare_bases, gram_rank, random_covector, sklyanin_basis, sklyanin_top_covector, sov_basis_2, verify_b_eigen,
    verify_shift_actions,
};
use sovchain::spectrum::{
    brute_force_spectrum, closed_form_spectrum, collinearity, eigen_residual, match_spectra, reconstruct_all,
    relative_discrete_residual, solve_discrete_system, wavefunction_sov2,
};

/// One measured quantity and the strict upper bound it must stay below.
struct Measure {
    label: String,
    value: f64,
    bound: f64,
}

impl Measure {
    fn below(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Measure { label: label.into(), value, bound }
    }

    /// Exact predicate, recorded as 0 (holds) or 1 (fails) against bound 0.5.
    fn holds(label: impl Into<String>, ok: bool) -> Self {
        Measure { label: label.into(), value: if ok { 0.0 } else { 1.0 }, bound: 0.5 }
    }

    fn ok(&self) -> bool {
        self.value.is_finite() && self.value < self.bound
    }
}

type Outcome = Result<Vec<Measure>, String>;

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
}

fn criterion_1() -> Outcome {
    let pts = points(101, 40);
    let draws: Vec<(C64, C64)> = pts.chunks(2).map(|p| (p[0], p[1])).collect();
    let eta = ONE;
    let ybe = max_of(draws.iter().map(|&(l, m)| ybe_residual(l, m, eta)));
    let mut rll: f64 = 0.0;
    for two_s in 1..=3 {
        for &(l, m) in &draws {
            rll = rll.max(rll_residual(l, m, two_s, eta).map_err(|e| e.to_string())?);
        }
    }
    let mut out = vec![Measure::below("YBE", ybe, 1e-11), Measure::below("RLL", rll, 1e-11)];
    for (name, chain) in reference_chains() {
        let rtt = max_of(draws.iter().map(|&(l, m)| rtt_residual(&chain, l, m)));
        out.push(Measure::below(format!("RTT {name}"), rtt, 1e-11));
    }
    Ok(out)
}

fn criterion_2() -> Outcome {
    let mut out = Vec::new();
    let pts = points(202, 2);
    for (name, chain) in reference_chains() {
        let ev = TransferEvaluator::new(&chain);
        let mut worst: f64 = 0.0;
        for l in 1..=3 {
            for m in 1..=3 {
                let a = ev.fused(l, pts[0]);
                let b = ev.fused(m, pts[1]);
                worst = worst.max(rel_residual(&commutator(&a, &b), &(&*a * &*b)));
            }
        }
        out.push(Measure::below(format!("commutators {name}"), worst, 1e-10));
    }
    Ok(out)
}

fn criterion_3() -> Outcome {
    let mut out = Vec::new();
    let pts = points(303, 3);
    for (name, chain) in reference_chains() {
        let routes = max_of((1..=3).map(|l| {
            let lam = pts[l - 1];
            rel_diff(&fused_transfer(&chain, l, lam), &fused_transfer_projector(&chain, l, lam))
        }));
        out.push(Measure::below(format!("recursion vs projector {name}"), routes, 1e-9));
        let mut central: f64 = 0.0;
        for n in 0..chain.n_sites() {
            let top = chain.node(n, chain.two_s(n));
            for l in (chain.two_s(n) + 1)..=(chain.two_s(n) + 2) {
                // scale: size of the same polynomial on a circle of radius |η|/2 around the node
                let scale = max_of((0..4).map(|k| {
                    let phase = sovchain::linalg::c(0.0, std::f64::consts::FRAC_PI_2 * k as f64).exp();
                    fused_transfer(&chain, l, top + chain.eta * phase * re(0.5)).norm()
                }));
                central = central.max(fused_transfer(&chain, l, top).norm() / scale);
            }
        }
        out.push(Measure::below(format!("central zeros {name}"), central, 1e-9));
    }
    Ok(out)
}

fn criterion_4() -> Outcome {
    let mut out = Vec::new();
    let pts = points(404, 5);
    for (name, chain) in reference_chains() {
        let op = max_of(pts.iter().map(|&l| quantum_det_operator_check(&chain, l)));
        out.push(Measure::below(format!("operator identity {name}"), op, 1e-10));
        let scalar = max_of(pts.iter().map(|&l| {
            let m = monodromy(&chain, l);
            let s = monodromy(&chain, l - chain.eta);
            let q = &m.a * &s.d - &m.b * &s.c;
            let read = q.trace() / re(chain.dim() as f64);
            let expect = chain.twist.det() * chain.a(l) * chain.d(l - chain.eta);
            (read - expect).norm() / expect.norm().max(1.0)
        }));
        out.push(Measure::below(format!("scalar det K a d {name}"), scalar, 1e-10));
    }
    Ok(out)
}

fn criterion_5() -> Outcome {
    let mut out = Vec::new();
    for (name, chain) in reference_chains() {
        let basis = sklyanin_basis(&chain).map_err(|e| e.to_string())?;
        out.push(Measure::holds(format!("Gram rank D {name}"), gram_rank(&basis, chain.tolerances.gram).0 == chain.dim()));
        let mut lams = points(505, 3);
        lams.extend(chain.node_grid().all().map(|(_, _, x)| x));
        out.push(Measure::below(
            format!("B-eigen {name}"),
            max_of(lams.iter().map(|&l| verify_b_eigen(&chain, &basis, l))),
            1e-9,
        ));
        let shifts: Vec<_> = lams.iter().map(|&l| verify_shift_actions(&chain, &basis, l)).collect();
        out.push(Measure::below(format!("A action {name}"), max_of(shifts.iter().map(|s| s.a_action)), 1e-8));
        out.push(Measure::below(format!("D action {name}"), max_of(shifts.iter().map(|s| s.d_action)), 1e-8));
        let (k1, k2) = (chain.twist.k1, chain.twist.k2);
        let mut fused_err: f64 = 0.0;
        for a in 1..=4 {
            let mut got = eigenvalues(&fused_twist(&chain.twist, a));
            let expect: Vec<C64> = (1..=a + 1).map(|h| k1.powi((a + 1 - h) as i32) * k2.powi((h - 1) as i32)).collect();
            for e in expect {
                let (idx, d) = got
                    .iter()
                    .enumerate()
                    .map(|(i, g)| (i, (g - e).norm()))
                    .min_by(|x, y| x.1.total_cmp(&y.1))
                    .ok_or("empty spectrum")?;
                fused_err = fused_err.max(d);
                got.remove(idx);
            }
        }
        out.push(Measure::below(format!("fused twist spectrum {name}"), fused_err, 1e-10));
    }
    Ok(out)
}

fn criterion_6() -> Outcome {
    let mut out = Vec::new();
    for (name, chain) in reference_chains() {
        let sk = sklyanin_basis(&chain).map_err(|e| e.to_string())?;
        let b2 = sov_basis_2(&chain, &sklyanin_top_covector(&sk)).map_err(|e| e.to_string())?;
        out.push(Measure::below(format!("sov2 = Sklyanin {name}"), compare_bases(&b2, &sk).max_row_difference, 1e-7));
        let qop = QOperator::build(&chain, SEED).map_err(|e| e.to_string())?;
        let l = canonical_l(&chain, &qop).map_err(|e| e.to_string())?;
        let bq = sov_from_q(&chain, &qop, &l).map_err(|e| e.to_string())?;
        out.push(Measure::below(format!("Q-basis = Sklyanin {name}"), compare_bases(&bq, &sk).max_row_difference, 1e-7));
    }
    Ok(out)
}

fn perturbed_seeds(chain: &ChainSpec, seed: u64) -> Result<Vec<Vec<C64>>, String> {
    let oracle = brute_force_spectrum(chain).map_err(|e| e.to_string())?;
    let noise = points(seed, oracle.states.len() * chain.n_sites());
    Ok(oracle
        .states
        .iter()
        .enumerate()
        .map(|(k, s)| {
            s.t.x.iter().enumerate().map(|(a, x)| x * (ONE + noise[k * chain.n_sites() + a] * re(1e-4))).collect()
        })
        .collect())
}

fn criterion_7() -> Outcome {
    let mut out = Vec::new();
    for (name, chain) in reference_chains() {
        let oracle = brute_force_spectrum(&chain).map_err(|e| e.to_string())?;
        let reference: Vec<_> = oracle.states.iter().map(|s| s.t.clone()).collect();
        let seeds = perturbed_seeds(&chain, 707)?;
        let solved = solve_discrete_system(&chain, Some(&seeds)).map_err(|e| e.to_string())?;
        out.push(Measure::holds(format!("D distinct solutions {name}"), solved.solutions.len() == chain.dim()));
        let matching = match_spectra(&reference, &solved.solutions).map(|m| m.1).unwrap_or(f64::INFINITY);
        out.push(Measure::below(format!("bijection with oracle {name}"), matching, 1e-8));
        let resid = max_of(reference.iter().map(|t| relative_discrete_residual(&chain, t)));
        out.push(Measure::below(format!("oracle det residual {name}"), resid, 1e-8));
    }
    for (name, chain) in [("N=2", two_site(singular_twist())), ("N=3", three_site(singular_twist()))] {
        let oracle = brute_force_spectrum(&chain).map_err(|e| e.to_string())?;
        let reference: Vec<_> = oracle.states.iter().map(|s| s.t.clone()).collect();
        let closed = closed_form_spectrum(&chain);
        let m = match_spectra(&reference, &closed).map(|m| m.1).unwrap_or(f64::INFINITY);
        out.push(Measure::below(format!("k2=0 closed form {name}"), m, 1e-10));
    }
    Ok(out)
}

fn criterion_8() -> Outcome {
    let mut out = Vec::new();
    for (name, chain) in reference_chains() {
        let oracle = brute_force_spectrum(&chain).map_err(|e| e.to_string())?;
        let solved = solve_discrete_system(&chain, None).map_err(|e| e.to_string())?;
        let basis = sov_basis_2(&chain, &random_covector(chain.dim(), SEED)).map_err(|e| e.to_string())?;
        let records = reconstruct_all(&chain, &solved.solutions, &basis).map_err(|e| e.to_string())?;
        let mus = points(808, 3);
        let resid = max_of(records.iter().map(|r| eigen_residual(&chain, &r.t, &r.vector, &mus)));
        out.push(Measure::below(format!("T(mu)v = t(mu)v {name}"), resid, 1e-7));
        let mut worst_cos: f64 = 0.0;
        for r in &records {
            let best = oracle
                .states
                .iter()
                .min_by(|a, b| a.t.distance(&r.t).total_cmp(&b.t.distance(&r.t)))
                .ok_or("empty oracle")?;
            worst_cos = worst_cos.max(1.0 - collinearity(&best.right, &r.vector));
        }
        out.push(Measure::below(format!("1 - |cos| vs oracle {name}"), worst_cos, 1e-8));
        out.push(Measure::holds(format!("all D records {name}"), records.len() == chain.dim()));
    }
    Ok(out)
}

fn criterion_9() -> Outcome {
    let mut out = Vec::new();
    for (name, chain) in reference_chains() {
        let qop = QOperator::build(&chain, SEED).map_err(|e| e.to_string())?;
        let n_s = chain.total_two_s();
        out.push(Measure::holds(format!("deg Q <= N_s {name}"), qop.polys.iter().all(|q| q.degree() <= n_s)));
        out.push(Measure::holds(format!("some deg Q >= 1 {name}"), qop.polys.iter().any(|q| q.degree() >= 1)));
        let samples = points(909, 3 * chain.n_sites());
        let tq = max_of(qop.states.iter().zip(&qop.polys).map(|(t, q)| tq_residual(&chain, |x| t.eval(x), |x| q.eval(x), &samples)));
        out.push(Measure::below(format!("TQ residual {name}"), tq, 1e-8));
        let dist = qop.polys.iter().map(|q| min_root_distance(&chain, q)).fold(f64::INFINITY, f64::min);
        out.push(Measure::holds(format!("roots off top nodes {name} (min {dist:.3e})"), dist > 1e-6));
        let spread = uniqueness_spread(&chain, &qop.states, &qop.polys, SEED + 17).map_err(|e| e.to_string())?;
        out.push(Measure::below(format!("Wronskian uniqueness {name}"), spread, 1e-8));
    }
    let hand = hand_chain();
    let zeta = sovchain::linalg::c(3.0, 2.0);
    let t0 = sovchain::spectrum::EigenvaluePolynomial::new(&hand, vec![re(2.0)]);
    let t1 = sovchain::spectrum::EigenvaluePolynomial::new(&hand, vec![re(1.0)]);
    let q0 = solve_q_polynomial(&hand, &t0, zeta).map_err(|e| e.to_string())?;
    let q1 = solve_q_polynomial(&hand, &t1, zeta).map_err(|e| e.to_string())?;
    let err0 = if q0.degree() == 0 { (q0.coeffs[0] - ONE).norm() } else { f64::INFINITY };
    let err1 = if q1.degree() == 1 { (q1.coeffs[0] - re(2.0)).norm().max((q1.coeffs[1] - ONE).norm()) } else { f64::INFINITY };
    out.push(Measure::below("hand case Q = 1", err0, 1e-10));
    out.push(Measure::below("hand case Q = lambda + 2", err1, 1e-10));
    Ok(out)
}

fn criterion_10() -> Outcome {
    let mut out = Vec::new();
    for (name, chain) in reference_chains() {
        let qop = QOperator::build(&chain, SEED).map_err(|e| e.to_string())?;
        let pts = points(1010, 5);
        let ev = TransferEvaluator::new(&chain);
        let comm = max_of(pts.windows(2).map(|w| {
            let q = qop.eval_monic(w[0]);
            let t = ev.transfer(w[1]);
            rel_residual(&commutator(&q, &t), &(&q * &*t))
        }));
        out.push(Measure::below(format!("[Q, T] {name}"), comm, 1e-9));
        let tq = max_of(pts.iter().map(|&l| operator_tq_residual(&chain, &qop, l)));
        out.push(Measure::below(format!("operator TQ {name}"), tq, 1e-8));
        let cond = max_of((0..chain.n_sites()).map(|a| condition_number(&qop.eval_monic(chain.node(a, chain.two_s(a))))));
        out.push(Measure::below(format!("cond Q(top nodes) {name}"), cond, 1e8));
        let agree = max_of(pts.iter().map(|&l| {
            rel_diff(&qop.eval(l, QMethod::Eigenbasis), &qop.eval(l, QMethod::DeterminantRepresentation))
        }));
        out.push(Measure::below(format!("eigenbasis vs determinant {name}"), agree, 1e-7));
    }
    Ok(out)
}

fn criterion_11() -> Outcome {
    let mut out = Vec::new();
    for (name, chain) in reference_chains() {
        let qop = QOperator::build(&chain, SEED).map_err(|e| e.to_string())?;
        let spread = max_of(qop.states.iter().zip(&qop.polys).map(|(t, q)| sov_q_spread(&chain, &wavefunction_sov2(&chain, t), q)));
        out.push(Measure::below(format!("wavefunction / prod Q spread {name}"), spread, 1e-7));
    }
    Ok(out)
}

fn main() {
    let start = Instant::now();
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("algebra suite", criterion_1),
        ("commuting family", criterion_2),
        ("fusion route equivalence", criterion_3),
        ("quantum determinant", criterion_4),
        ("Sklyanin basis", criterion_5),
        ("basis identifications", criterion_6),
        ("spectrum completeness", criterion_7),
        ("eigenvectors", criterion_8),
        ("TQ suite", criterion_9),
        ("Q-operator", criterion_10),
        ("SoV-Q factorization", criterion_11),
    ];
    let mut failures = 0;
    for (k, (title, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(measures) => {
                let bad: Vec<&Measure> = measures.iter().filter(|m| !m.ok()).collect();
                let worst = measures
                    .iter()
                    .map(|m| (m, m.value / m.bound))
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(m, _)| format!("{} = {:.2e} (< {:.0e})", m.label, m.value, m.bound))
                    .unwrap_or_default();
                if bad.is_empty() {
                    println!("criterion {:>2} {title}: PASS  [worst: {worst}]", k + 1);
                } else {
                    failures += 1;
                    let detail: Vec<String> =
                        bad.iter().map(|m| format!("{} = {:.2e} (bound {:.0e})", m.label, m.value, m.bound)).collect();
                    println!("criterion {:>2} {title}: FAIL  [{}]", k + 1, detail.join("; "));
                }
            }
            Err(e) => {
                failures += 1;
                println!("criterion {:>2} {title}: FAIL  [error: {e}]", k + 1);
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    println!("acceptance runtime: {elapsed:.2} s (budget 60 s)");
    if elapsed > 60.0 {
        failures += 1;
        println!("runtime budget exceeded");
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}
