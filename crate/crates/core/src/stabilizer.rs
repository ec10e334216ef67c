//! Pauli operators in symplectic form, stabilizer codes, the n-qubit
//! phase-flip code and QFI-immune error sets.
//!
//! A Pauli operator is stored as `i^phase · ⊗_q X^{x_q} Z^{z_q}`, so
//! `Y = i·XZ` has `x = z = 1` and contributes one unit of phase.

use std::fmt;
use std::str::FromStr;

use crate::channel::KrausChannel;
use crate::error::{QfiError, Result};
use crate::linalg::{anticommutator, identity, max_abs, pauli_x, pauli_z, tensor_product, CMatrix, I, ONE};
use crate::state::{check_cap, PureState};
use crate::state::Povm;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    phase: u8,
    x: Vec<bool>,
    z: Vec<bool>,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        Self {
            phase: 0,
            x: vec![false; n],
            z: vec![false; n],
        }
    }

    /// Builds `i^phase · X^x Z^z` directly from the symplectic data.
    pub fn from_parts(phase: u8, x: Vec<bool>, z: Vec<bool>) -> Result<Self> {
        if x.len() != z.len() {
            return Err(QfiError::PauliSizeMismatch(x.len(), z.len()));
        }
        Ok(Self {
            phase: phase % 4,
            x,
            z,
        })
    }

    /// `Π_{i∈sites} X_i`.
    pub fn x_on(sites: &[usize], n: usize) -> Result<Self> {
        let mut p = Self::identity(n);
        for &s in sites {
            if s >= n {
                return Err(QfiError::SiteOutOfRange { site: s, n });
            }
            p.x[s] = !p.x[s];
        }
        Ok(p)
    }

    /// `Π_{i∈sites} Z_i`.
    pub fn z_on(sites: &[usize], n: usize) -> Result<Self> {
        let mut p = Self::identity(n);
        for &s in sites {
            if s >= n {
                return Err(QfiError::SiteOutOfRange { site: s, n });
            }
            p.z[s] = !p.z[s];
        }
        Ok(p)
    }

    pub fn x_all(n: usize) -> Self {
        Self {
            phase: 0,
            x: vec![true; n],
            z: vec![false; n],
        }
    }

    pub fn z_all(n: usize) -> Self {
        Self {
            phase: 0,
            x: vec![false; n],
            z: vec![true; n],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.x.len()
    }

    /// Exponent `k` in the stored `i^k` prefactor.
    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    pub fn x_bits(&self) -> &[bool] {
        &self.x
    }

    pub fn z_bits(&self) -> &[bool] {
        &self.z
    }

    fn y_count(&self) -> usize {
        self.x.iter().zip(&self.z).filter(|(a, b)| **a && **b).count()
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).filter(|(a, b)| **a || **b).count()
    }

    pub fn is_hermitian(&self) -> bool {
        (self.phase as usize) % 2 == self.y_count() % 2
    }

    /// Same Pauli string with a `+1` phase in the text convention.
    pub fn without_sign(&self) -> Self {
        Self {
            phase: (self.y_count() % 4) as u8,
            x: self.x.clone(),
            z: self.z.clone(),
        }
    }

    pub fn multiply(&self, other: &PauliOperator) -> Result<PauliOperator> {
        if self.n_qubits() != other.n_qubits() {
            return Err(QfiError::PauliSizeMismatch(self.n_qubits(), other.n_qubits()));
        }
        // (X^a Z^b)(X^c Z^d) = (−1)^{b·c} X^{a+c} Z^{b+d}
        let swaps = self.z.iter().zip(&other.x).filter(|(b, c)| **b && **c).count();
        let phase = (self.phase as usize + other.phase as usize + 2 * swaps) % 4;
        Ok(PauliOperator {
            phase: phase as u8,
            x: self.x.iter().zip(&other.x).map(|(a, c)| a ^ c).collect(),
            z: self.z.iter().zip(&other.z).map(|(b, d)| b ^ d).collect(),
        })
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> Result<bool> {
        if self.n_qubits() != other.n_qubits() {
            return Err(QfiError::PauliSizeMismatch(self.n_qubits(), other.n_qubits()));
        }
        let form = (0..self.n_qubits())
            .filter(|&q| (self.x[q] && other.z[q]) ^ (self.z[q] && other.x[q]))
            .count();
        Ok(form % 2 == 0)
    }

    /// Dense `2^n × 2^n` matrix.
    pub fn dense(&self) -> Result<CMatrix> {
        check_cap("dense Pauli operator", self.n_qubits())?;
        let mut m = identity(1);
        for q in 0..self.n_qubits() {
            let mut f = identity(2);
            if self.x[q] {
                f = pauli_x();
            }
            if self.z[q] {
                f *= pauli_z();
            }
            m = tensor_product(&m, &f);
        }
        let ph = match self.phase {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        };
        Ok(m * ph)
    }

    /// Symplectic vector `(x | z)`.
    fn symplectic(&self) -> Vec<bool> {
        self.x.iter().chain(self.z.iter()).copied().collect()
    }
}

/// Group law of the Pauli group.
pub fn pauli_multiply(a: &PauliOperator, b: &PauliOperator) -> Result<PauliOperator> {
    a.multiply(b)
}

pub fn pauli_commutes(a: &PauliOperator, b: &PauliOperator) -> Result<bool> {
    a.commutes_with(b)
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown = (self.phase as usize + 4 - self.y_count() % 4) % 4;
        f.write_str(match shown {
            0 => "",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })?;
        for q in 0..self.n_qubits() {
            let ch = match (self.x[q], self.z[q]) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliOperator {
    type Err = QfiError;

    /// Optional phase in `{+, -, +i, -i}` (the Unicode minus `−` is accepted)
    /// followed by one of `IXYZ` per qubit, qubit 0 first.
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        let mut pos = 0;
        let mut phase = 0usize;
        if let Some(&c0) = chars.first() {
            match c0 {
                '+' => pos = 1,
                '-' | '−' => {
                    phase = 2;
                    pos = 1;
                }
                _ => {}
            }
        }
        if chars.get(pos) == Some(&'i') {
            phase += 1;
            pos += 1;
        }
        if pos == chars.len() {
            return Err(QfiError::Parse {
                column: pos + 1,
                message: "expected at least one of I, X, Y, Z".into(),
            });
        }
        let mut x = Vec::new();
        let mut z = Vec::new();
        for (k, &ch) in chars.iter().enumerate().skip(pos) {
            let (xb, zb) = match ch.to_ascii_uppercase() {
                'I' => (false, false),
                'X' => (true, false),
                'Y' => (true, true),
                'Z' => (false, true),
                other => {
                    return Err(QfiError::Parse {
                        column: k + 1,
                        message: format!("unexpected character '{other}'"),
                    })
                }
            };
            if xb && zb {
                phase += 1;
            }
            x.push(xb);
            z.push(zb);
        }
        Ok(PauliOperator {
            phase: (phase % 4) as u8,
            x,
            z,
        })
    }
}

/// Rank over GF(2) of a list of bit vectors.
fn gf2_rank(mut rows: Vec<Vec<bool>>) -> usize {
    let width = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col]) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in 0..rows.len() {
            if r != rank && rows[r][col] {
                let pivot_row = rows[rank].clone();
                for (a, b) in rows[r].iter_mut().zip(pivot_row) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerCode {
    generators: Vec<PauliOperator>,
    logical_x: PauliOperator,
    logical_z: PauliOperator,
    n: usize,
    k: usize,
}

impl StabilizerCode {
    pub fn new(
        generators: Vec<PauliOperator>,
        logical_x: PauliOperator,
        logical_z: PauliOperator,
    ) -> Result<Self> {
        let n = logical_x.n_qubits();
        for p in generators.iter().chain([&logical_z]) {
            if p.n_qubits() != n {
                return Err(QfiError::PauliSizeMismatch(n, p.n_qubits()));
            }
        }
        for (i, a) in generators.iter().enumerate() {
            if !a.is_hermitian() {
                return Err(QfiError::InvalidCode(format!("generator {a} is not Hermitian")));
            }
            for b in &generators[i + 1..] {
                if !a.commutes_with(b)? {
                    return Err(QfiError::InvalidCode(format!("generators {a} and {b} anticommute")));
                }
            }
            for l in [&logical_x, &logical_z] {
                if !a.commutes_with(l)? {
                    return Err(QfiError::InvalidCode(format!(
                        "logical {l} anticommutes with generator {a}"
                    )));
                }
            }
        }
        if logical_x.commutes_with(&logical_z)? {
            return Err(QfiError::InvalidCode("logical X and Z must anticommute".into()));
        }
        let rank = gf2_rank(generators.iter().map(|g| g.symplectic()).collect());
        if rank != generators.len() {
            return Err(QfiError::InvalidCode(format!(
                "generators are dependent (rank {rank} of {})",
                generators.len()
            )));
        }
        let k = n - generators.len();
        if k != 1 {
            return Err(QfiError::InvalidCode(format!(
                "only single logical qubit codes are supported (k = {k})"
            )));
        }
        Ok(Self {
            generators,
            logical_x,
            logical_z,
            n,
            k,
        })
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn logical_x(&self) -> &PauliOperator {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &PauliOperator {
        &self.logical_z
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `P = Π_g (I + g)/2`.
    pub fn projector(&self) -> Result<CMatrix> {
        check_cap("code projector", self.n)?;
        let dim = 1usize << self.n;
        let mut p = identity(dim);
        for g in &self.generators {
            p = p * (identity(dim) + g.dense()?).scale(0.5);
        }
        Ok(p)
    }

    /// Logical basis `(|0̄>, |1̄>)`: `|0̄>` is the normalized projection of the
    /// first computational basis state with nonzero overlap onto the `Z̄ = +1`
    /// code space (first nonzero amplitude made real positive) and
    /// `|1̄> = X̄|0̄>`.
    pub fn codewords(&self) -> Result<(PureState, PureState)> {
        let dim = 1usize << self.n;
        let zbar = self.logical_z.dense()?;
        let p0 = self.projector()? * (identity(dim) + zbar).scale(0.5);
        for col in 0..dim {
            let v = p0.column(col).into_owned();
            if v.norm() > 1e-6 {
                let lead = v.iter().find(|a| a.norm() > 1e-12).copied().unwrap_or(ONE);
                let v = v * (lead.conj() / crate::linalg::real(lead.norm()));
                let zero = PureState::normalized(v)?;
                let one = PureState::new(self.logical_x.dense()? * zero.amplitudes())?;
                return Ok((zero, one));
            }
        }
        Err(QfiError::InvalidCode("empty code space".into()))
    }
}

/// The `n`-qubit phase-flip code: generators `X_i X_{i+1}`, `Z̄ = Z_I`,
/// `X̄ = X_I`.
pub fn phase_flip_code(n: usize) -> Result<StabilizerCode> {
    if n == 0 || n % 2 == 0 {
        return Err(QfiError::InvalidArgument(format!(
            "phase-flip code needs an odd positive qubit count, got {n}"
        )));
    }
    let generators = (0..n - 1)
        .map(|i| PauliOperator::x_on(&[i, i + 1], n))
        .collect::<Result<Vec<_>>>()?;
    StabilizerCode::new(generators, PauliOperator::x_all(n), PauliOperator::z_all(n))
}

/// Anticommutes with at least one generator.
pub fn is_detectable(error: &PauliOperator, code: &StabilizerCode) -> Result<bool> {
    for g in code.generators() {
        if !error.commutes_with(g)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Every `Z_α` with `|α| ≤ t`, ordered by weight then lexicographically.
pub fn phase_flip_errors(n: usize, t: usize) -> Vec<PauliOperator> {
    let mut subsets: Vec<Vec<usize>> = (0u64..(1u64 << n))
        .map(|mask| (0..n).filter(|&q| mask >> (n - 1 - q) & 1 == 1).collect::<Vec<_>>())
        .filter(|s| s.len() <= t)
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    subsets
        .iter()
        .map(|s| PauliOperator::z_on(s, n).expect("sites in range"))
        .collect()
}

/// `correctable ∪ {E_j X̄}`.
pub fn immune_error_set(
    code: &StabilizerCode,
    correctable: &[PauliOperator],
    x_bar: &PauliOperator,
) -> Result<Vec<PauliOperator>> {
    for g in code.generators() {
        if !x_bar.commutes_with(g)? {
            return Err(QfiError::InvalidArgument(format!(
                "x_bar {x_bar} anticommutes with stabilizer generator {g}"
            )));
        }
    }
    let mut out = correctable.to_vec();
    for e in correctable {
        out.push(e.multiply(x_bar)?);
    }
    Ok(out)
}

/// Syndrome-measurement recovery: for each error in `correctable`, project
/// onto its syndrome space and undo it. Errors must have distinct syndromes
/// covering every syndrome value, so the result is trace preserving.
pub fn recovery_channel(code: &StabilizerCode, correctable: &[PauliOperator]) -> Result<KrausChannel> {
    check_cap("recovery channel", code.n())?;
    let dim = 1usize << code.n();
    let gens = code
        .generators()
        .iter()
        .map(|g| g.dense())
        .collect::<Result<Vec<_>>>()?;
    let mut seen = std::collections::HashSet::new();
    let mut ops = Vec::with_capacity(correctable.len());
    for e in correctable {
        let mut projector = identity(dim);
        let mut syndrome = Vec::with_capacity(gens.len());
        for (g, gd) in code.generators().iter().zip(&gens) {
            let flipped = !e.commutes_with(g)?;
            syndrome.push(flipped);
            let sign = if flipped { -1.0 } else { 1.0 };
            projector = projector * (identity(dim) + gd.scale(sign)).scale(0.5);
        }
        if !seen.insert(syndrome) {
            return Err(QfiError::InvalidCode(format!(
                "error {e} shares a syndrome with an earlier error"
            )));
        }
        ops.push(e.dense()?.adjoint() * projector);
    }
    KrausChannel::trace_preserving(ops)
}

/// Dense check that `x_bar` anticommutes with `ΔH_eff = PHP − <ψ|H|ψ>` on the
/// code space, i.e. `P{X̄, ΔH_eff}P = 0`.
pub fn anticommutes_with_effective_generator(
    code: &StabilizerCode,
    x_bar: &PauliOperator,
    h: &CMatrix,
    probe: &PureState,
) -> Result<bool> {
    if code.n() > 5 {
        return Err(QfiError::CapExceeded {
            what: "dense effective-generator check",
            requested: code.n(),
            cap: 5,
        });
    }
    let p = code.projector()?;
    let mean = probe.expectation(h);
    let delta = &p * h * &p - &p * mean;
    let xb = x_bar.dense()?;
    let ac = &p * anticommutator(&xb, &delta) * &p;
    Ok(max_abs(&ac) <= 1e-9)
}

/// Projectors onto the joint eigenspaces of the stabilizer generators and
/// `x_bar`.
pub fn optimal_measurement_povm(code: &StabilizerCode, x_bar: &PauliOperator) -> Result<Povm> {
    if code.k() != 1 {
        return Err(QfiError::InvalidCode(format!(
            "optimal measurement needs a two-dimensional code space (k = {})",
            code.k()
        )));
    }
    if !x_bar.is_hermitian() {
        return Err(QfiError::InvalidArgument(format!("x_bar {x_bar} is not Hermitian")));
    }
    let dim = 1usize << code.n();
    let mut observables = code
        .generators()
        .iter()
        .map(|g| g.dense())
        .collect::<Result<Vec<_>>>()?;
    observables.push(x_bar.dense()?);
    let mut elements = Vec::new();
    for signs in 0u64..(1u64 << observables.len()) {
        let mut proj = identity(dim);
        for (bit, obs) in observables.iter().enumerate() {
            let s = if signs >> bit & 1 == 0 { 1.0 } else { -1.0 };
            proj = proj * (identity(dim) + obs.scale(s)).scale(0.5);
        }
        if proj.trace().re > 0.5 {
            elements.push(proj);
        }
    }
    Povm::new(elements)
}
