use qfi_core::linalg::{max_abs, CMatrix};
use qfi_core::stabilizer::{pauli_commutes, pauli_multiply, phase_flip_code, PauliOperator};

fn all_paulis(n: usize) -> Vec<PauliOperator> {
    (0u32..1 << (2 * n))
        .map(|bits| {
            let x = (0..n).map(|q| bits >> q & 1 == 1).collect();
            let z = (0..n).map(|q| bits >> (n + q) & 1 == 1).collect();
            PauliOperator::from_parts(0, x, z).unwrap()
        })
        .collect()
}

#[test]
fn products_match_dense_exhaustively() {
    for n in 1..=3 {
        let ps = all_paulis(n);
        let dense: Vec<CMatrix> = ps.iter().map(|p| p.dense().unwrap()).collect();
        for (a, da) in ps.iter().zip(&dense) {
            for (b, db) in ps.iter().zip(&dense) {
                let ab = pauli_multiply(a, b).unwrap();
                assert!(max_abs(&(ab.dense().unwrap() - da * db)) < 1e-12, "{a} * {b}");
                let comm = da * db - db * da;
                assert_eq!(pauli_commutes(a, b).unwrap(), max_abs(&comm) < 1e-12, "{a}, {b}");
            }
        }
    }
}

#[test]
fn multiplication_is_associative() {
    let ps = all_paulis(3);
    // with a phase on one factor so the phase bookkeeping is exercised
    let phased: Vec<PauliOperator> = ps
        .iter()
        .map(|p| pauli_multiply(&"+iIII".parse().unwrap(), p).unwrap())
        .collect();
    for a in &ps {
        for b in &phased {
            let ab = pauli_multiply(a, b).unwrap();
            for c in ps.iter().step_by(3) {
                let left = pauli_multiply(&ab, c).unwrap();
                let right = pauli_multiply(a, &pauli_multiply(b, c).unwrap()).unwrap();
                assert_eq!(left, right);
            }
        }
    }
}

#[test]
fn logical_z_acts_on_codewords() {
    for n in [1usize, 3, 5] {
        let code = phase_flip_code(n).unwrap();
        let p = code.projector().unwrap();
        let z = PauliOperator::z_all(n).dense().unwrap();
        assert!(max_abs(&(&p * &z - &z * &p)) < 1e-12);
        let (zero, one) = code.codewords().unwrap();
        assert!((zero.expectation(&z).re - 1.0).abs() < 1e-12);
        assert!((one.expectation(&z).re + 1.0).abs() < 1e-12);
        let off = zero.amplitudes().dotc(&(&z * one.amplitudes()));
        assert!(off.norm() < 1e-12);
    }
}
