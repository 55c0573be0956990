#![allow(dead_code)]

use sovchain::linalg::{c, re, C64, ONE, ZERO};
use sovchain::model::{diag_twist, ChainSpec, Mat2, Site, Tolerances};
use sovchain::repn::Spin;

pub const SEED: u64 = 20240611;

pub fn full_twist() -> Mat2 {
    [[c(1.3, 0.2), c(0.7, -0.1)], [c(0.4, 0.3), c(0.6, -0.5)]]
}

pub fn diagonal_twist() -> Mat2 {
    diag_twist(c(1.5, 0.3), c(-0.4, 0.8))
}

/// `k2 = 0` with a nonzero upper-right entry.
pub fn singular_twist() -> Mat2 {
    [[c(1.4, 0.3), c(0.6, 0.0)], [ZERO, ZERO]]
}

pub fn two_site(twist: Mat2) -> ChainSpec {
    ChainSpec::random(ONE, &[1, 2], twist, Tolerances::default(), SEED).unwrap()
}

pub fn three_site(twist: Mat2) -> ChainSpec {
    ChainSpec::random(ONE, &[1, 1, 2], twist, Tolerances::default(), SEED + 1).unwrap()
}

/// `N = 1`, spin 1/2, `ξ = 0`, `η = 1`, `K = diag(2, 1)`.
pub fn hand_chain() -> ChainSpec {
    let sites = vec![Site { spin: Spin::new(1).unwrap(), xi: ZERO }];
    ChainSpec::new(ONE, sites, diag_twist(re(2.0), re(1.0)), Tolerances::default(), 0).unwrap()
}

pub fn reference_chains() -> Vec<(&'static str, ChainSpec)> {
    vec![
        ("N=2 full twist", two_site(full_twist())),
        ("N=2 diagonal twist", two_site(diagonal_twist())),
        ("N=3 full twist", three_site(full_twist())),
    ]
}

pub fn points(seed: u64, count: usize) -> Vec<C64> {
    sovchain::spectrum::probe_points(seed, count)
}
