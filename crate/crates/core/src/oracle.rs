//! Brute-force density-matrix evaluation of the GHZ schemes, used to
//! cross-check the closed forms.

use crate::channel::{LocalChannel, SuperOperator};
use crate::error::{QfiError, Result};
use crate::linalg::hermitian_part;
use crate::qfi::{qfi, state_derivative};
use crate::schemes::{
    probe_for, sensing_generator, single_qubit_dephasing, DephasingAxis, DephasingScenario, SchemeKind,
};
use crate::stabilizer::{phase_flip_code, phase_flip_errors, recovery_channel};
use crate::state::{DensityMatrix, ParametricFamily};

/// Largest register the oracle will build (512-dimensional states).
pub const ORACLE_QUBIT_CAP: usize = 9;

fn check_oracle_cap(n: usize) -> Result<()> {
    if n > ORACLE_QUBIT_CAP {
        return Err(QfiError::CapExceeded {
            what: "brute-force oracle",
            requested: n,
            cap: ORACLE_QUBIT_CAP,
        });
    }
    Ok(())
}

/// Per-qubit bit-flip then phase-flip mixing on `n` qubits, followed by
/// block-wise syndrome recovery when `block_size > 1`.
pub fn scheme_noise(n_qubits: usize, block_size: usize, p_x: f64, p_z: f64) -> Result<LocalChannel> {
    let vx = single_qubit_dephasing(DephasingAxis::X, p_x)?;
    let vz = single_qubit_dephasing(DephasingAxis::Z, p_z)?;
    let mut ch = LocalChannel::new(n_qubits);
    for q in 0..n_qubits {
        ch = ch.then(q, vx.clone())?;
    }
    for q in 0..n_qubits {
        ch = ch.then(q, vz.clone())?;
    }
    if block_size > 1 {
        let code = phase_flip_code(block_size)?;
        let recovery = recovery_channel(&code, &phase_flip_errors(block_size, (block_size - 1) / 2))?;
        for b in 0..n_qubits / block_size {
            ch = ch.then(b * block_size, recovery.clone())?;
        }
    }
    Ok(ch)
}

/// QFI about ω of the densely simulated scheme.
pub fn scheme_qfi_oracle(kind: SchemeKind, scenario: &DephasingScenario) -> Result<f64> {
    scenario.validate()?;
    let (n_qubits, block) = match kind {
        SchemeKind::Raw => (scenario.n_total, 1),
        SchemeKind::Logical => (scenario.block_count() * scenario.block_size, scenario.block_size),
    };
    check_oracle_cap(n_qubits)?;
    let family = ParametricFamily::new(probe_for(kind, scenario)?, sensing_generator(kind, scenario)?)?;
    let noise = scheme_noise(n_qubits, block, scenario.p_x(), scenario.p_z())?;
    let rho = family.evolve(scenario.omega);
    let drho = state_derivative(&family, scenario.omega, None);
    let noisy = DensityMatrix::trusted(hermitian_part(&noise.apply_matrix(rho.entries())));
    let dnoisy = hermitian_part(&noise.apply_matrix(&drho));
    qfi(&noisy, &dnoisy)
}

/// Raw GHZ oracle with the flip probabilities given directly.
pub fn ghz_qfi_oracle(n: usize, t: f64, omega: f64, p_x: f64, p_z: f64) -> Result<f64> {
    check_oracle_cap(n)?;
    let scenario = DephasingScenario::new(n, 1, 0.0, 0.0, omega, t)?;
    let family = ParametricFamily::new(
        probe_for(SchemeKind::Raw, &scenario)?,
        sensing_generator(SchemeKind::Raw, &scenario)?,
    )?;
    let noise = scheme_noise(n, 1, p_x, p_z)?;
    let rho = family.evolve(omega);
    let drho = state_derivative(&family, omega, None);
    let noisy = DensityMatrix::trusted(hermitian_part(&noise.apply_matrix(rho.entries())));
    let dnoisy = hermitian_part(&noise.apply_matrix(&drho));
    qfi(&noisy, &dnoisy)
}
