//! Linear maps on operators: Kraus channels, products of single-qubit
//! channels and Lindblad-type generators.

use crate::error::{QfiError, Result};
use crate::linalg::{anticommutator, commutator, identity, max_abs, CMatrix, I, ONE, ZERO};
use crate::state::DensityMatrix;

/// A linear map on square matrices of a fixed dimension.
pub trait SuperOperator {
    fn input_dim(&self) -> usize;

    fn output_dim(&self) -> usize {
        self.input_dim()
    }

    /// Action on an arbitrary (not necessarily Hermitian) matrix.
    fn apply_matrix(&self, m: &CMatrix) -> CMatrix;
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<CMatrix>,
    d_in: usize,
    d_out: usize,
}

impl KrausChannel {
    pub const TP_TOL: f64 = 1e-10;

    /// Any non-empty list of equally shaped operators; trace preservation is
    /// not required.
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| QfiError::InvalidArgument("channel needs at least one Kraus operator".into()))?;
        let (d_out, d_in) = first.shape();
        for op in &ops {
            if op.shape() != (d_out, d_in) {
                return Err(QfiError::DimensionMismatch {
                    expected: d_out,
                    found: op.nrows(),
                });
            }
        }
        Ok(Self { ops, d_in, d_out })
    }

    /// Like [`KrausChannel::new`] but rejects maps with `Σ E†E ≠ 1`.
    pub fn trace_preserving(ops: Vec<CMatrix>) -> Result<Self> {
        let ch = Self::new(ops)?;
        let dev = ch.completeness_error();
        if dev > Self::TP_TOL {
            return Err(QfiError::InvalidArgument(format!(
                "Kraus operators are not trace preserving (deviation {dev:.3e})"
            )));
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            ops: vec![identity(dim)],
            d_in: dim,
            d_out: dim,
        }
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::trace_preserving(vec![u])
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// `Σ_j E_j† E_j`.
    pub fn completeness(&self) -> CMatrix {
        let mut acc = CMatrix::zeros(self.d_in, self.d_in);
        for e in &self.ops {
            acc += e.adjoint() * e;
        }
        acc
    }

    pub fn completeness_error(&self) -> f64 {
        max_abs(&(self.completeness() - identity(self.d_in)))
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.completeness_error() <= Self::TP_TOL
    }

    pub fn apply(&self, state: &DensityMatrix) -> Result<DensityMatrix> {
        if state.dim() != self.d_in {
            return Err(QfiError::DimensionMismatch {
                expected: self.d_in,
                found: state.dim(),
            });
        }
        Ok(DensityMatrix::trusted(self.apply_matrix(state.entries())))
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &KrausChannel) -> Result<KrausChannel> {
        if first.d_out != self.d_in {
            return Err(QfiError::DimensionMismatch {
                expected: self.d_in,
                found: first.d_out,
            });
        }
        let mut ops = Vec::with_capacity(self.ops.len() * first.ops.len());
        for a in &self.ops {
            for b in &first.ops {
                ops.push(a * b);
            }
        }
        KrausChannel::new(ops)
    }
}

impl SuperOperator for KrausChannel {
    fn input_dim(&self) -> usize {
        self.d_in
    }

    fn output_dim(&self) -> usize {
        self.d_out
    }

    fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let mut acc = CMatrix::zeros(self.d_out, self.d_out);
        for e in &self.ops {
            acc += e * m * e.adjoint();
        }
        acc
    }
}

/// A sequence of channels, each acting on a contiguous block of qubits of an
/// `n`-qubit register, applied left to right. Never materializes the
/// register-wide product of Kraus operators.
#[derive(Debug, Clone)]
pub struct LocalChannel {
    n_qubits: usize,
    steps: Vec<(usize, KrausChannel)>,
}

impl LocalChannel {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            steps: Vec::new(),
        }
    }

    /// Appends `channel` acting on qubits `start..start + w`, where `2^w` is
    /// the channel's dimension.
    pub fn then(mut self, start: usize, channel: KrausChannel) -> Result<Self> {
        let dim = channel.input_dim();
        if !dim.is_power_of_two() || dim < 2 || channel.output_dim() != dim {
            return Err(QfiError::DimensionMismatch {
                expected: 2,
                found: dim,
            });
        }
        let width = dim.trailing_zeros() as usize;
        if start + width > self.n_qubits {
            return Err(QfiError::SiteOutOfRange {
                site: start + width - 1,
                n: self.n_qubits,
            });
        }
        self.steps.push((start, channel));
        Ok(self)
    }

    /// The same single-qubit channel on every site.
    pub fn uniform(n_qubits: usize, channel: &KrausChannel) -> Result<Self> {
        (0..n_qubits).try_fold(Self::new(n_qubits), |acc, s| acc.then(s, channel.clone()))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn steps(&self) -> &[(usize, KrausChannel)] {
        &self.steps
    }

    pub fn apply(&self, state: &DensityMatrix) -> Result<DensityMatrix> {
        if state.dim() != 1 << self.n_qubits {
            return Err(QfiError::DimensionMismatch {
                expected: 1 << self.n_qubits,
                found: state.dim(),
            });
        }
        Ok(DensityMatrix::trusted(self.apply_matrix(state.entries())))
    }
}

/// `Σ_k K_k m K_k†` with each `K_k` acting on qubits `start..start + w`.
fn apply_on_block(m: &CMatrix, n_qubits: usize, start: usize, ch: &KrausChannel) -> CMatrix {
    let dim = m.nrows();
    let bd = ch.input_dim();
    let width = bd.trailing_zeros() as usize;
    let shift = n_qubits - start - width;
    let mid_mask = (bd - 1) << shift;
    let mut out = CMatrix::zeros(dim, dim);
    let mut left = CMatrix::zeros(dim, dim);
    for k in ch.ops() {
        // left = K m (row mixing)
        for col in 0..dim {
            for r in 0..dim {
                let base = r & !mid_mask;
                let mi = (r & mid_mask) >> shift;
                let mut acc = ZERO;
                for mj in 0..bd {
                    acc += k[(mi, mj)] * m[(base | (mj << shift), col)];
                }
                left[(r, col)] = acc;
            }
        }
        // out += left K† (column mixing)
        for c in 0..dim {
            let base = c & !mid_mask;
            let mc = (c & mid_mask) >> shift;
            for mj in 0..bd {
                let kc = k[(mc, mj)].conj();
                if kc == ZERO {
                    continue;
                }
                let src = base | (mj << shift);
                for row in 0..dim {
                    let v = left[(row, src)] * kc;
                    out[(row, c)] += v;
                }
            }
        }
    }
    out
}

impl SuperOperator for LocalChannel {
    fn input_dim(&self) -> usize {
        1 << self.n_qubits
    }

    fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let mut cur = m.clone();
        for (site, ch) in &self.steps {
            cur = apply_on_block(&cur, self.n_qubits, *site, ch);
        }
        cur
    }
}

/// `ρ ↦ −i[H, ρ]`.
#[derive(Debug, Clone)]
pub struct HamiltonianGenerator {
    pub hamiltonian: CMatrix,
}

impl SuperOperator for HamiltonianGenerator {
    fn input_dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        commutator(&self.hamiltonian, m) * (-I)
    }
}

/// `ρ ↦ γ Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})`.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    pub rate: f64,
    pub jumps: Vec<CMatrix>,
}

impl SuperOperator for LindbladGenerator {
    fn input_dim(&self) -> usize {
        self.jumps.first().map(|j| j.nrows()).unwrap_or(0)
    }

    fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let mut acc = CMatrix::zeros(m.nrows(), m.ncols());
        for l in &self.jumps {
            let ldl = l.adjoint() * l;
            acc += l * m * l.adjoint() - anticommutator(&ldl, m).scale(0.5);
        }
        acc.scale(self.rate)
    }
}

pub const COMMUTE_TOL: f64 = 1e-10;

/// Whether `a∘b = b∘a` on every matrix unit `|i><j|`.
pub fn superoperators_commute(a: &dyn SuperOperator, b: &dyn SuperOperator) -> bool {
    let dim = a.input_dim();
    if b.input_dim() != dim || a.output_dim() != dim || b.output_dim() != dim {
        return false;
    }
    for i in 0..dim {
        for j in 0..dim {
            let mut unit = CMatrix::zeros(dim, dim);
            unit[(i, j)] = ONE;
            let ab = a.apply_matrix(&b.apply_matrix(&unit));
            let ba = b.apply_matrix(&a.apply_matrix(&unit));
            if max_abs(&(ab - ba)) > COMMUTE_TOL {
                return false;
            }
        }
    }
    true
}
