//! States, observables, measurements and unitary parametric families.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;

use crate::error::{QfiError, Result};
use crate::linalg::{
    hermiticity_error, identity, outer, pauli_x, pauli_y, pauli_z, real, tensor_product, trace,
    CMatrix, CVector, HermitianEigen, ONE,
};

pub const DEFAULT_QUBIT_CAP: usize = 12;

static QUBIT_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_QUBIT_CAP);

/// Largest qubit count for which dense states and operators are built.
pub fn dense_qubit_cap() -> usize {
    QUBIT_CAP.load(Ordering::Relaxed)
}

pub fn set_dense_qubit_cap(cap: usize) {
    QUBIT_CAP.store(cap.max(1), Ordering::Relaxed);
}

pub(crate) fn check_cap(what: &'static str, n: usize) -> Result<()> {
    let cap = dense_qubit_cap();
    if n > cap {
        return Err(QfiError::CapExceeded {
            what,
            requested: n,
            cap,
        });
    }
    Ok(())
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(QfiError::InvalidState(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
    n_qubits: usize,
}

impl PureState {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(amplitudes: CVector) -> Result<Self> {
        let n_qubits = qubits_for_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(QfiError::InvalidState(format!(
                "amplitude norm {norm} differs from 1"
            )));
        }
        Ok(Self {
            amplitudes,
            n_qubits,
        })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(QfiError::InvalidState("zero or non-finite vector".into()));
        }
        Self::new(amplitudes / real(norm))
    }

    /// Computational basis state `|index>` on `n` qubits.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_cap("basis state", n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(QfiError::InvalidArgument(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut v = CVector::zeros(dim);
        v[index] = ONE;
        Self::new(v)
    }

    /// `|+>^{⊗n}`.
    pub fn plus(n: usize) -> Result<Self> {
        check_cap("plus state", n)?;
        let dim = 1usize << n;
        Self::new(CVector::from_element(dim, real(1.0 / (dim as f64).sqrt())))
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            entries: outer(&self.amplitudes, &self.amplitudes),
            n_qubits: self.n_qubits,
        }
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        check_cap("tensor product state", self.n_qubits + other.n_qubits)?;
        Ok(PureState {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            n_qubits: self.n_qubits + other.n_qubits,
        })
    }

    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Equality up to a global phase: `|<a|b>| = 1` within 1e-10.
    pub fn same_ray(&self, other: &PureState) -> bool {
        self.dim() == other.dim() && (self.overlap(other).norm() - 1.0).abs() <= 1e-10
    }

    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        self.amplitudes.dotc(&(op * &self.amplitudes))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
    n_qubits: usize,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const EIGEN_FLOOR: f64 = -1e-10;

    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(QfiError::InvalidState("density matrix is not square".into()));
        }
        let n_qubits = qubits_for_dim(entries.nrows())?;
        let herm = hermiticity_error(&entries);
        if herm > Self::HERMITIAN_TOL {
            return Err(QfiError::InvalidState(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        let tr = trace(&entries);
        if (tr - ONE).norm() > Self::TRACE_TOL {
            return Err(QfiError::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = HermitianEigen::new(&entries).min_value();
        if min_eig < Self::EIGEN_FLOOR {
            return Err(QfiError::InvalidState(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { entries, n_qubits })
    }

    /// Wraps the output of an operation that preserves the density-matrix
    /// invariants by construction.
    pub(crate) fn trusted(entries: CMatrix) -> Self {
        let n_qubits = entries.nrows().trailing_zeros() as usize;
        Self { entries, n_qubits }
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_cap("maximally mixed state", n)?;
        let dim = 1usize << n;
        Ok(Self {
            entries: identity(dim).scale(1.0 / dim as f64),
            n_qubits: n,
        })
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    pub fn eigen(&self) -> HermitianEigen {
        HermitianEigen::new(&self.entries)
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.eigen().values.iter().filter(|&&p| p > tol).count()
    }

    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        (&self.entries * op).trace()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianObservable {
    entries: CMatrix,
}

impl HermitianObservable {
    pub const HERMITIAN_TOL: f64 = 1e-12;

    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(QfiError::InvalidArgument("observable is not square".into()));
        }
        let herm = hermiticity_error(&entries);
        if herm > Self::HERMITIAN_TOL {
            return Err(QfiError::InvalidArgument(format!(
                "observable not Hermitian (deviation {herm:.3e})"
            )));
        }
        Ok(Self { entries })
    }

    pub(crate) fn trusted(entries: CMatrix) -> Self {
        Self { entries }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            entries: CMatrix::zeros(dim, dim),
        }
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            entries: self.entries.scale(factor),
        }
    }

    pub fn sum<'a>(dim: usize, terms: impl IntoIterator<Item = &'a HermitianObservable>) -> Self {
        let mut acc = CMatrix::zeros(dim, dim);
        for t in terms {
            acc += &t.entries;
        }
        Self { entries: acc }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliLabel {
    X,
    Y,
    Z,
}

impl PauliLabel {
    pub fn matrix(self) -> CMatrix {
        match self {
            PauliLabel::X => pauli_x(),
            PauliLabel::Y => pauli_y(),
            PauliLabel::Z => pauli_z(),
        }
    }
}

/// Pauli `label` on `site`, identity elsewhere.
pub fn embed_pauli(label: PauliLabel, site: usize, n: usize) -> Result<HermitianObservable> {
    if site >= n {
        return Err(QfiError::SiteOutOfRange { site, n });
    }
    check_cap("embedded Pauli", n)?;
    let left = identity(1 << site);
    let right = identity(1 << (n - site - 1));
    let m = tensor_product(&tensor_product(&left, &label.matrix()), &right);
    Ok(HermitianObservable::trusted(m))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Probe {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl Probe {
    pub fn dim(&self) -> usize {
        match self {
            Probe::Pure(p) => p.dim(),
            Probe::Mixed(r) => r.dim(),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            Probe::Pure(p) => p.density(),
            Probe::Mixed(r) => r.clone(),
        }
    }
}

impl From<PureState> for Probe {
    fn from(p: PureState) -> Self {
        Probe::Pure(p)
    }
}

impl From<DensityMatrix> for Probe {
    fn from(r: DensityMatrix) -> Self {
        Probe::Mixed(r)
    }
}

/// `ρ_θ = e^{-iθG} ρ e^{iθG}` for a probe `ρ` and Hermitian generator `G`.
#[derive(Debug, Clone)]
pub struct ParametricFamily {
    probe: Probe,
    generator: HermitianObservable,
    spectrum: HermitianEigen,
}

impl ParametricFamily {
    pub fn new(probe: impl Into<Probe>, generator: HermitianObservable) -> Result<Self> {
        let probe = probe.into();
        if probe.dim() != generator.dim() {
            return Err(QfiError::DimensionMismatch {
                expected: probe.dim(),
                found: generator.dim(),
            });
        }
        let spectrum = HermitianEigen::new(generator.entries());
        Ok(Self {
            probe,
            generator,
            spectrum,
        })
    }

    pub fn probe(&self) -> &Probe {
        &self.probe
    }

    pub fn generator(&self) -> &HermitianObservable {
        &self.generator
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.probe, Probe::Pure(_))
    }

    /// Spread `λ_max − λ_min` of the generator.
    pub fn generator_spread(&self) -> f64 {
        self.spectrum.max_value() - self.spectrum.min_value()
    }

    /// `e^{-iθG}`.
    pub fn unitary(&self, theta: f64) -> CMatrix {
        self.spectrum
            .map(|lambda| Complex64::from_polar(1.0, -theta * lambda))
    }

    pub fn evolve(&self, theta: f64) -> DensityMatrix {
        if theta == 0.0 {
            return self.probe.density();
        }
        let u = self.unitary(theta);
        match &self.probe {
            Probe::Pure(p) => {
                let v = &u * p.amplitudes();
                DensityMatrix::trusted(outer(&v, &v))
            }
            Probe::Mixed(r) => DensityMatrix::trusted(&u * r.entries() * u.adjoint()),
        }
    }

    pub fn evolve_pure(&self, theta: f64) -> Result<PureState> {
        match &self.probe {
            Probe::Pure(p) => Ok(PureState {
                amplitudes: self.unitary(theta) * p.amplitudes(),
                n_qubits: p.n_qubits(),
            }),
            Probe::Mixed(_) => Err(QfiError::NotPure),
        }
    }

    /// The same generator acting on the probe already advanced by `theta`.
    pub fn advanced(&self, theta: f64) -> Self {
        let probe = match &self.probe {
            Probe::Pure(_) => Probe::Pure(self.evolve_pure(theta).expect("pure probe")),
            Probe::Mixed(_) => Probe::Mixed(self.evolve(theta)),
        };
        Self {
            probe,
            generator: self.generator.clone(),
            spectrum: self.spectrum.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    pub const TOL: f64 = 1e-10;

    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| QfiError::InvalidArgument("empty POVM".into()))?;
        let mut total = CMatrix::zeros(dim, dim);
        for (k, m) in elements.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(QfiError::DimensionMismatch {
                    expected: dim,
                    found: m.nrows(),
                });
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(QfiError::InvalidArgument(format!(
                    "POVM element {k} has non-finite entries"
                )));
            }
            if hermiticity_error(m) > Self::TOL {
                return Err(QfiError::InvalidArgument(format!(
                    "POVM element {k} is not Hermitian"
                )));
            }
            let min_eig = HermitianEigen::new(m).min_value();
            if min_eig < -Self::TOL {
                return Err(QfiError::InvalidArgument(format!(
                    "POVM element {k} has negative eigenvalue {min_eig:.3e}"
                )));
            }
            total += m;
        }
        let dev = crate::linalg::max_abs(&(total - identity(dim)));
        if !(dev <= Self::TOL) {
            return Err(QfiError::InvalidArgument(format!(
                "POVM elements do not sum to identity (deviation {dev:.3e})"
            )));
        }
        Ok(Self { elements })
    }

    /// Rank-one projectors onto the columns of a unitary.
    pub fn from_basis(basis: &CMatrix) -> Result<Self> {
        let elements = (0..basis.ncols())
            .map(|j| {
                let v = basis.column(j).into_owned();
                outer(&v, &v)
            })
            .collect();
        Self::new(elements)
    }

    pub fn computational(n: usize) -> Result<Self> {
        check_cap("computational basis POVM", n)?;
        Self::from_basis(&identity(1 << n))
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    /// Outcome probabilities `tr(M_x ρ)`, clamped at zero.
    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|m| (m * rho).trace().re.max(0.0))
            .collect()
    }
}
