mod common;

use qfi_core::linalg::{max_abs, CMatrix};
use qfi_core::qfi::{classical_fisher, family_qfi, qfi, qfi_pure, sld, sld_residual, state_derivative};
use qfi_core::random::{random_channel, random_density, random_hermitian, random_povm, random_pure_state, rng_from_seed};
use qfi_core::state::{ParametricFamily, Povm};
use rand::Rng;

fn random_family(rng: &mut qfi_core::random::QfiRng, i: usize) -> ParametricFamily {
    let n = 1 + i % 3;
    let dim = 1 << n;
    let h = random_hermitian(rng, dim);
    match i % 3 {
        0 => ParametricFamily::new(random_pure_state(rng, n), h).unwrap(),
        1 => ParametricFamily::new(random_density(rng, n, dim), h).unwrap(),
        _ => ParametricFamily::new(random_density(rng, n, (dim / 2).max(1)), h).unwrap(),
    }
}

#[test]
fn noise_never_increases_qfi() {
    let mut rng = rng_from_seed(200);
    for i in 0..500 {
        let fam = random_family(&mut rng, i);
        let theta = rng.random_range(-1.5..1.5);
        let k = 1 + rng.random_range(0..3);
        let ch = random_channel(&mut rng, fam.dim(), k);
        let before = family_qfi(&fam, theta, None).unwrap();
        let after = family_qfi(&fam, theta, Some(&ch)).unwrap();
        assert!(after <= before + 1e-9, "pair {i}: {after} > {before}");
    }
}

#[test]
fn classical_fisher_is_bounded_by_qfi() {
    let mut rng = rng_from_seed(201);
    for i in 0..500 {
        let fam = random_family(&mut rng, i);
        let theta = rng.random_range(-1.5..1.5);
        let k = 2 + rng.random_range(0..4);
        let povm = Povm::new(random_povm(&mut rng, fam.dim(), k)).unwrap();
        let fc = classical_fisher(&povm, &fam, theta, None).unwrap();
        let fq = family_qfi(&fam, theta, None).unwrap();
        assert!(fc <= fq + 1e-8, "pair {i}: {fc} > {fq}");
    }
}

#[test]
fn derivative_matches_finite_differences() {
    let mut rng = rng_from_seed(202);
    let h = 1e-5;
    for i in 0..60 {
        let fam = random_family(&mut rng, i);
        let theta = rng.random_range(-1.5..1.5);
        let fd: CMatrix = (fam.evolve(theta + h).entries() - fam.evolve(theta - h).entries()) / qfi_core::linalg::real(2.0 * h);
        let exact = state_derivative(&fam, theta, None);
        assert!(max_abs(&(fd - exact)) < 1e-6, "family {i}");
    }
}

#[test]
fn sld_solves_its_defining_equation() {
    let mut rng = rng_from_seed(203);
    for i in 0..150 {
        let fam = random_family(&mut rng, i);
        let theta = rng.random_range(-1.5..1.5);
        let rho = fam.evolve(theta);
        let drho = state_derivative(&fam, theta, None);
        let l = sld(&rho, &drho).unwrap();
        assert!(sld_residual(&rho, &drho, l.matrix()) <= 1e-8, "family {i}");
    }
}

#[test]
fn pure_formula_agrees_with_sld_route() {
    let mut rng = rng_from_seed(204);
    for _ in 0..10 {
        let fam = ParametricFamily::new(random_pure_state(&mut rng, 2), random_hermitian(&mut rng, 4)).unwrap();
        for k in 0..20 {
            let theta = -2.0 + 0.2 * k as f64;
            let a = qfi_pure(&fam, theta).unwrap();
            let b = qfi(&fam.evolve(theta), &state_derivative(&fam, theta, None)).unwrap();
            assert!((a - b).abs() <= 1e-9 * a.max(1.0), "θ={theta}: {a} vs {b}");
        }
    }
}

#[test]
fn povm_with_non_finite_entries_is_rejected() {
    let mut m = CMatrix::identity(2, 2);
    m[(0, 0)] = qfi_core::linalg::real(f64::NAN);
    assert!(Povm::new(vec![m]).is_err());
}
