mod common;

use common::*;
use proptest::prelude::*;
use sovchain::linalg::{c, eigenvalues, pair, re, C64, ONE, ZERO};
use sovchain::model::{diag_twist, ChainSpec, Tolerances};
use sovchain::monodromy::{fused_transfer, monodromy_with};
use sovchain::sov::{random_covector, sov_basis_2, MultiIndex};
use sovchain::spectrum::{
    brute_force_spectrum, closed_form_spectrum, discrete_residuals, eigenvector_from_sov, fused_eigenvalues,
    jacobian_conditioning, match_spectra, relative_discrete_residual, solve_discrete_system, wavefunction_separate_residual,
    wavefunction_sov2, EigenvaluePolynomial,
};

#[test]
fn hand_chain_spectrum_and_solutions() {
    let chain = hand_chain();
    let solved = solve_discrete_system(&chain, None).unwrap();
    assert_eq!(solved.solutions.len(), 2);
    let mut x: Vec<f64> = solved.solutions.iter().map(|t| t.x[0].re).collect();
    x.sort_by(f64::total_cmp);
    // t_1(λ) = 3λ + 1 and t_0(λ) = 3λ + 2 at ξ^(0) = 0
    assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    for t in &solved.solutions {
        assert!((t.eval(re(1.0)) - t.eval(ZERO) - re(3.0)).norm() < 1e-12);
    }
}

#[test]
fn oracle_solutions_are_nondegenerate_roots() {
    for (_, chain) in reference_chains() {
        let solved = solve_discrete_system(&chain, None).unwrap();
        assert_eq!(solved.solutions.len(), chain.dim());
        assert_eq!(solved.duplicates, 0);
        for t in &solved.solutions {
            assert!(jacobian_conditioning(&chain, t) > 1e-8);
            let off = EigenvaluePolynomial::new(&chain, t.x.iter().enumerate().map(|(a, x)| if a == 0 { x + re(1e-3) } else { *x }).collect());
            assert!(relative_discrete_residual(&chain, &off) > 1e-8);
        }
    }
}

#[test]
fn newton_recovers_from_rough_seeds() {
    let chain = two_site(full_twist());
    let oracle = brute_force_spectrum(&chain).unwrap();
    let reference: Vec<_> = oracle.states.iter().map(|s| s.t.clone()).collect();
    let noise = points(55, chain.dim() * chain.n_sites());
    let seeds: Vec<Vec<C64>> = reference
        .iter()
        .enumerate()
        .map(|(k, t)| t.x.iter().enumerate().map(|(a, x)| x * (ONE + noise[k * 2 + a] * re(1e-2))).collect())
        .collect();
    let solved = solve_discrete_system(&chain, Some(&seeds)).unwrap();
    let (_, dist) = match_spectra(&reference, &solved.solutions).unwrap();
    assert!(dist < 1e-8);
}

#[test]
fn singular_twist_uses_closed_form() {
    for chain in [two_site(singular_twist()), three_site(singular_twist())] {
        let solved = solve_discrete_system(&chain, None).unwrap();
        assert_eq!(solved.solutions.len(), chain.dim());
        assert!(solved.outcomes.iter().all(|o| o.iterations == 0));
        let oracle: Vec<_> = brute_force_spectrum(&chain).unwrap().states.into_iter().map(|s| s.t).collect();
        assert!(match_spectra(&oracle, &solved.solutions).unwrap().1 < 1e-10);
        for t in &solved.solutions {
            let r = relative_discrete_residual(&chain, t);
            assert!(r < 1e-12, "{r}");
        }
    }
}

#[test]
fn pure_b_spectrum() {
    // K = diag(0, k2) gives T = k2 D, which is B for the twist k2 σ₁
    let k2 = c(0.8, -0.6);
    let chain = two_site(diag_twist(ZERO, k2));
    let oracle: Vec<_> = brute_force_spectrum(&chain).unwrap().states.into_iter().map(|s| s.t).collect();
    assert!(match_spectra(&oracle, &closed_form_spectrum(&chain)).unwrap().1 < 1e-10);

    let lam = c(0.45, 1.3);
    let sigma = [[ZERO, k2], [k2, ZERO]];
    let mut got = eigenvalues(&monodromy_with(&chain, &sigma, lam).b);
    let bounds = [1, 2];
    for h in MultiIndex::all(&bounds) {
        let expect = k2 * chain.node_product(&h.0, lam);
        let idx = (0..got.len()).min_by(|&i, &j| (got[i] - expect).norm().total_cmp(&(got[j] - expect).norm())).unwrap();
        assert!((got[idx] - expect).norm() < 1e-9 * (1.0 + expect.norm()));
        got.remove(idx);
    }
}

#[test]
fn fused_eigenvalues_match_fused_operators() {
    let chain = two_site(full_twist());
    let oracle = brute_force_spectrum(&chain).unwrap();
    for s in &oracle.states {
        let fused = fused_eigenvalues(&chain, &s.t);
        for n in 0..chain.n_sites() {
            let top = chain.node(n, chain.two_s(n));
            assert_eq!(fused[n][0], ONE);
            assert!((fused[n][1] - s.t.eval(top)).norm() < 1e-12 * (1.0 + fused[n][1].norm()));
            for l in 1..=chain.two_s(n) {
                let op = fused_transfer(&chain, l, top);
                let val = pair(&s.left, &(&op * &s.right));
                assert!((val - fused[n][l]).norm() < 1e-8 * (1.0 + val.norm()));
            }
            // on-shell: t^(2s+1)(ξ^(2s)) = det D_{t,n} = 0
            let last = fused[n][chain.two_s(n) + 1];
            assert!((last - discrete_residuals(&chain, &s.t)[n]).norm() < 1e-8 * (1.0 + fused[n][chain.two_s(n)].norm()));
        }
    }
}

#[test]
fn wavefunctions_satisfy_the_separate_equations() {
    for (_, chain) in reference_chains() {
        let solved = solve_discrete_system(&chain, None).unwrap();
        for t in &solved.solutions {
            let psi = wavefunction_sov2(&chain, t);
            assert!((psi.last().unwrap() - ONE).norm() < 1e-14);
            assert!(wavefunction_separate_residual(&chain, t, &psi) < 1e-8);
        }
    }
}

#[test]
fn reconstructed_vector_is_normalised_on_source() {
    let chain = two_site(full_twist());
    let s = random_covector(chain.dim(), 8);
    let basis = sov_basis_2(&chain, &s).unwrap();
    let solved = solve_discrete_system(&chain, None).unwrap();
    for t in &solved.solutions {
        let rec = eigenvector_from_sov(&chain, t, &basis).unwrap();
        assert!((pair(&s, &rec.vector) - ONE).norm() < 1e-10);
        assert!(rec.eigen_residual < 1e-7);
    }
}

#[test]
fn hand_wavefunction_value() {
    let chain = hand_chain();
    let t1 = EigenvaluePolynomial::new(&chain, vec![re(1.0)]);
    assert!((wavefunction_sov2(&chain, &t1)[0] - re(2.0)).norm() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn completeness_on_random_chains(seed in 0u64..10_000) {
        let chain = ChainSpec::random(ONE, &[1, 2], full_twist(), Tolerances::default(), seed).unwrap();
        let oracle: Vec<_> = brute_force_spectrum(&chain).unwrap().states.into_iter().map(|s| s.t).collect();
        let solved = solve_discrete_system(&chain, None).unwrap();
        prop_assert_eq!(solved.solutions.len(), chain.dim());
        prop_assert!(match_spectra(&oracle, &solved.solutions).unwrap().1 < 1e-8);
    }
}
