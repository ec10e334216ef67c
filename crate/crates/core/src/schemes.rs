//! Noise channels and metrological scheme builders for GHZ-type probes.

use serde::{Deserialize, Serialize};

use crate::channel::{KrausChannel, LindbladGenerator, LocalChannel};
use crate::error::{QfiError, Result};
use crate::linalg::{identity, pauli_x, pauli_z, real, tensor_product, CMatrix, CVector, ONE, ZERO};
use crate::stabilizer::phase_flip_code;
use crate::state::{check_cap, HermitianObservable, PureState};

/// Largest register for which the full product of dephasing Kraus
/// operators is materialized.
pub const DENSE_KRAUS_CAP: usize = 9;

pub const TROTTER_THRESHOLD: f64 = 0.01;

/// Parameters of the GHZ frequency-estimation experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingScenario {
    /// Total qubit count `N`.
    pub n_total: usize,
    /// Phase-flip code block size `n` (odd).
    pub block_size: usize,
    pub gamma_x: f64,
    pub gamma_z: f64,
    pub omega: f64,
    pub time: f64,
}

impl DephasingScenario {
    pub fn new(
        n_total: usize,
        block_size: usize,
        gamma_x: f64,
        gamma_z: f64,
        omega: f64,
        time: f64,
    ) -> Result<Self> {
        let s = Self {
            n_total,
            block_size,
            gamma_x,
            gamma_z,
            omega,
            time,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_size == 0 || self.block_size % 2 == 0 {
            return Err(QfiError::InvalidArgument(format!(
                "block size must be odd and positive, got {}",
                self.block_size
            )));
        }
        if self.n_total < self.block_size {
            return Err(QfiError::InvalidArgument(format!(
                "need at least one block: N = {} < n = {}",
                self.n_total, self.block_size
            )));
        }
        for (name, v) in [
            ("gamma_x", self.gamma_x),
            ("gamma_z", self.gamma_z),
            ("time", self.time),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(QfiError::InvalidArgument(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        if !self.omega.is_finite() {
            return Err(QfiError::InvalidArgument("omega must be finite".into()));
        }
        Ok(())
    }

    /// `m = ⌊N/n⌋`; leftover qubits stay idle.
    pub fn block_count(&self) -> usize {
        self.n_total / self.block_size
    }

    pub fn p_x(&self) -> f64 {
        flip_probability(self.gamma_x, self.time)
    }

    pub fn p_z(&self) -> f64 {
        flip_probability(self.gamma_z, self.time)
    }

    pub fn with_time(&self, time: f64) -> Self {
        Self { time, ..*self }
    }

    pub fn with_block_size(&self, block_size: usize) -> Self {
        Self { block_size, ..*self }
    }
}

/// `p = (1 − e^{−γt})/2`.
pub fn flip_probability(gamma: f64, t: f64) -> f64 {
    -(-gamma * t).exp_m1() / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DephasingAxis {
    X,
    Z,
}

impl DephasingAxis {
    fn pauli(self) -> CMatrix {
        match self {
            DephasingAxis::X => pauli_x(),
            DephasingAxis::Z => pauli_z(),
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QfiError::InvalidArgument(format!(
            "probability must lie in [0, 1], got {p}"
        )));
    }
    Ok(())
}

/// `ρ ↦ (1−p)ρ + p σ ρ σ` on one qubit.
pub fn single_qubit_dephasing(axis: DephasingAxis, p: f64) -> Result<KrausChannel> {
    check_probability(p)?;
    KrausChannel::trace_preserving(vec![
        identity(2).scale((1.0 - p).sqrt()),
        axis.pauli().scale(p.sqrt()),
    ])
}

/// Product of single-qubit dephasing maps on all `n` qubits with its `2^n`
/// Kraus operators materialized.
pub fn dephasing_channel(axis: DephasingAxis, p: f64, n: usize) -> Result<KrausChannel> {
    check_probability(p)?;
    if n > DENSE_KRAUS_CAP {
        return Err(QfiError::CapExceeded {
            what: "dense dephasing channel",
            requested: n,
            cap: DENSE_KRAUS_CAP,
        });
    }
    let sigma = axis.pauli();
    let mut ops = vec![CMatrix::from_element(1, 1, ONE)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(ops.len() * 2);
        for op in &ops {
            next.push(tensor_product(op, &identity(2)).scale((1.0 - p).sqrt()));
            next.push(tensor_product(op, &sigma).scale(p.sqrt()));
        }
        ops = next;
    }
    KrausChannel::trace_preserving(ops)
}

/// Same map as [`dephasing_channel`], applied site by site.
pub fn dephasing_local(axis: DephasingAxis, p: f64, n: usize) -> Result<LocalChannel> {
    LocalChannel::uniform(n, &single_qubit_dephasing(axis, p)?)
}

/// `σ₋ = (X − iY)/2 = |1><0|`.
pub fn sigma_minus() -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(1, 0)] = ONE;
    m
}

/// Kraus pair `E₁ = ((√η+1)/2) I + ((√η−1)/2) Z`, `E₂ = √(1−η) σ₋`,
/// `η = e^{−γt}`.
pub fn spontaneous_emission_channel(gamma: f64, t: f64) -> Result<KrausChannel> {
    if !(gamma >= 0.0 && t >= 0.0) {
        return Err(QfiError::InvalidArgument(
            "rate and time must be nonnegative".into(),
        ));
    }
    let eta = (-gamma * t).exp();
    let s = eta.sqrt();
    let e1 = identity(2).scale((s + 1.0) / 2.0) + pauli_z().scale((s - 1.0) / 2.0);
    let e2 = sigma_minus().scale((1.0 - eta).max(0.0).sqrt());
    KrausChannel::trace_preserving(vec![e1, e2])
}

/// `D̂ρ = γ(σ₋ρσ₊ − ½{σ₊σ₋, ρ})`.
pub fn spontaneous_emission_generator(gamma: f64) -> LindbladGenerator {
    LindbladGenerator {
        rate: gamma,
        jumps: vec![sigma_minus()],
    }
}

/// `(|0…0> + |1…1>)/√2`.
pub fn ghz_probe(n: usize) -> Result<PureState> {
    if n == 0 {
        return Err(QfiError::InvalidArgument("GHZ probe needs at least one qubit".into()));
    }
    check_cap("GHZ probe", n)?;
    let dim = 1usize << n;
    let mut v = CVector::zeros(dim);
    let s = 1.0 / 2f64.sqrt();
    v[0] = real(s);
    v[dim - 1] = real(s);
    PureState::new(v)
}

/// `(|0̄>^{⊗m} + |1̄>^{⊗m})/√2` over `m` blocks of the `n`-qubit phase-flip code.
pub fn logical_ghz_probe(m: usize, n: usize) -> Result<PureState> {
    if m == 0 {
        return Err(QfiError::InvalidArgument("need at least one block".into()));
    }
    check_cap("logical GHZ probe", m * n)?;
    let (zero, one) = phase_flip_code(n)?.codewords()?;
    let mut all_zero = zero.amplitudes().clone();
    let mut all_one = one.amplitudes().clone();
    for _ in 1..m {
        all_zero = all_zero.kronecker(zero.amplitudes());
        all_one = all_one.kronecker(one.amplitudes());
    }
    PureState::normalized(all_zero + all_one)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeKind {
    /// Raw GHZ over all `N` qubits.
    Raw,
    /// Logical GHZ over `⌊N/n⌋` phase-flip blocks.
    Logical,
}

/// Number of qubits the scheme's probe occupies.
pub fn scheme_qubits(kind: SchemeKind, scenario: &DephasingScenario) -> usize {
    match kind {
        SchemeKind::Raw => scenario.n_total,
        SchemeKind::Logical => scenario.block_count() * scenario.block_size,
    }
}

/// `G = t·H` with `H = ½ Σ_i Z_i` (raw) or `H = ½ Σ_i Z̄^{[i]}` (logical), so
/// that the estimated parameter is ω.
pub fn sensing_generator(kind: SchemeKind, scenario: &DephasingScenario) -> Result<HermitianObservable> {
    scenario.validate()?;
    let n_qubits = scheme_qubits(kind, scenario);
    check_cap("sensing generator", n_qubits)?;
    let (blocks, width) = match kind {
        SchemeKind::Raw => (scenario.n_total, 1),
        SchemeKind::Logical => (scenario.block_count(), scenario.block_size),
    };
    let dim = 1usize << n_qubits;
    let block_mask = (1usize << width) - 1;
    let mut g = CMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let mut total = 0.0;
        for b in 0..blocks {
            let shift = n_qubits - (b + 1) * width;
            let parity = ((idx >> shift) & block_mask).count_ones() % 2;
            total += if parity == 0 { 1.0 } else { -1.0 };
        }
        g[(idx, idx)] = real(0.5 * scenario.time * total);
    }
    let _ = ZERO;
    Ok(HermitianObservable::new(g)?)
}

pub fn probe_for(kind: SchemeKind, scenario: &DephasingScenario) -> Result<PureState> {
    match kind {
        SchemeKind::Raw => ghz_probe(scenario.n_total),
        SchemeKind::Logical => logical_ghz_probe(scenario.block_count(), scenario.block_size),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogicalErrorProbabilities {
    pub p_bar_x: f64,
    pub p_bar_z: f64,
}

/// Binomial coefficient as a float; exact below 41, via log-gamma above.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= 40 {
        let k = k.min(n - k);
        let mut acc: u64 = 1;
        for i in 0..k {
            acc = acc * (n - i) as u64 / (i + 1) as u64;
        }
        acc as f64
    } else {
        statrs::function::factorial::ln_binomial(n as u64, k as u64).exp()
    }
}

/// Block-level error probabilities of the `n`-qubit phase-flip code with
/// physical flip probabilities `p_x`, `p_z`.
pub fn logical_flip_probabilities(n: usize, p_x: f64, p_z: f64) -> LogicalErrorProbabilities {
    let t = (n - 1) / 2;
    let p_bar_z = (0..=t)
        .map(|k| binomial(n, k) * p_z.powi((n - k) as i32) * (1.0 - p_z).powi(k as i32))
        .sum();
    let p_bar_x = if n == 1 {
        p_x
    } else {
        -(n as f64 * (-2.0 * p_x).ln_1p()).exp_m1() / 2.0
    };
    LogicalErrorProbabilities { p_bar_x, p_bar_z }
}

pub fn logical_error_probabilities(scenario: &DephasingScenario) -> Result<LogicalErrorProbabilities> {
    scenario.validate()?;
    Ok(logical_flip_probabilities(
        scenario.block_size,
        scenario.p_x(),
        scenario.p_z(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrotterReport {
    pub valid: bool,
    pub n_gx2t2: f64,
    pub n_w2t2: f64,
}

/// Short-time validity of the factorized noise model: `Nγ_x²t²` and `Nω²t²`
/// both below `threshold`.
pub fn trotter_validity(scenario: &DephasingScenario, threshold: f64) -> TrotterReport {
    let n = scenario.n_total as f64;
    let t2 = scenario.time * scenario.time;
    let n_gx2t2 = n * scenario.gamma_x * scenario.gamma_x * t2;
    let n_w2t2 = n * scenario.omega * scenario.omega * t2;
    TrotterReport {
        valid: n_gx2t2 < threshold && n_w2t2 < threshold,
        n_gx2t2,
        n_w2t2,
    }
}
