#![allow(dead_code)]

use qfi_core::channel::KrausChannel;
use qfi_core::linalg::{real, tensor_product, CMatrix};
use qfi_core::random::QfiRng;
use qfi_core::stabilizer::{immune_error_set, phase_flip_code, phase_flip_errors, PauliOperator};
use qfi_core::state::{HermitianObservable, ParametricFamily, Povm, PureState};
use rand::Rng;

pub fn pauli(s: &str) -> CMatrix {
    s.parse::<PauliOperator>().unwrap().dense().unwrap()
}

/// `|+…+>` with generator `Z^{⊗n}`.
pub fn scheme_family(n: usize) -> ParametricFamily {
    ParametricFamily::new(
        PureState::plus(n).unwrap(),
        HermitianObservable::new(PauliOperator::z_all(n).dense().unwrap()).unwrap(),
    )
    .unwrap()
}

pub fn immune_set(n: usize) -> Vec<PauliOperator> {
    let code = phase_flip_code(n).unwrap();
    immune_error_set(&code, &phase_flip_errors(n, n / 2), code.logical_x()).unwrap()
}

pub fn mixing(errors: &[CMatrix], probs: &[f64]) -> KrausChannel {
    KrausChannel::trace_preserving(
        errors.iter().zip(probs).map(|(e, &p)| e.scale(p.sqrt())).collect(),
    )
    .unwrap()
}

pub fn random_probs(rng: &mut QfiRng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

pub fn x_basis_povm(n: usize) -> Povm {
    let s = 1.0 / 2f64.sqrt();
    let h = CMatrix::from_row_slice(2, 2, &[real(s), real(s), real(s), real(-s)]);
    let u = (0..n).fold(CMatrix::identity(1, 1), |u, _| tensor_product(&u, &h));
    Povm::from_basis(&u).unwrap()
}
