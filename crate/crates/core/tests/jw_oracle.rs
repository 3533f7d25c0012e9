mod common;

use proptest::prelude::*;
use qetlab::eigensolve::spectrum;
use qetlab::models::{jordan_wigner, Boundary, FermionChainSpec, FermionKind};

fn spectral_gap(kind: FermionKind, size: usize, lambda: f64) -> f64 {
    let model = jordan_wigner(&FermionChainSpec { kind, size, lambda }, Boundary::Open).unwrap();
    let (a, b) = common::quadratic_form(kind, size, lambda);
    common::max_abs_diff(&spectrum(&model).unwrap(), &common::free_fermion_spectrum(&a, &b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kitaev_matches_bdg(size in 2usize..=6, lambda in -1.5f64..1.5) {
        prop_assert!(spectral_gap(FermionKind::Kitaev, size, lambda) < 1e-9);
    }

    #[test]
    fn ssh_matches_single_particle(cells in 2usize..=3, lambda in 0.0f64..1.0) {
        prop_assert!(spectral_gap(FermionKind::Ssh, cells, lambda) < 1e-9);
    }
}

#[test]
fn kitaev_ground_energy_at_the_sweet_spot() {
    // lambda = 1: L - 1 decoupled Majorana bonds of energy 2 each
    let (a, b) = common::quadratic_form(FermionKind::Kitaev, 5, 1.0);
    let e0 = common::free_fermion_spectrum(&a, &b)[0];
    assert!((e0 + 4.0).abs() < 1e-10, "{e0}");
}
