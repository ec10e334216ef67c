//! Deciding whether a channel or a raw error set preserves the QFI.

use serde::Serialize;
use thiserror::Error;

use crate::channel::KrausChannel;
use crate::error::{QfiError, Result};
use crate::linalg::{
    columns_to_matrix, hermitian_part, hs_norm, identity, null_space, outer, psd_sqrt, real,
    CMatrix, CVector, HermitianEigen,
};
use crate::qfi::{sld, state_derivative, NoisyContext, SLD_CUTOFF};
use crate::random::{random_unitary, rng_from_seed};
use crate::state::{HermitianObservable, ParametricFamily, PureState};

/// Relative tolerance on Kraus-form residuals.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Absolute tolerance for the Hermiticity condition `⟨s_j|d_k⟩ = ⟨d_j|s_k⟩`.
pub const CONDITION_I_TOL: f64 = 1e-9;
/// Relative singular-value cutoff used to find linear dependencies.
pub const NULL_SPACE_TOL: f64 = 1e-10;
/// How far a dependency among the `s_j` may fail to annihilate the `d_j`.
pub const CONDITION_II_TOL: f64 = 1e-8;
/// Tolerance on `Q|s_j> = |d_j>` for a constructed extension.
pub const EXTENSION_TOL: f64 = 1e-8;
pub const KL_TOL: f64 = 1e-9;
pub const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreservationReport {
    pub preserved: bool,
    /// `max_j ‖(𝓛E_j − E_jL)√ρ‖_HS`.
    pub max_residual: f64,
    pub residuals: Vec<f64>,
    /// `Σ_j` of the squared residuals, i.e. the QFI loss.
    pub qfi_loss: f64,
    pub qfi_before: f64,
    pub qfi_after: f64,
}

/// Checks `𝓛_θ E_j √ρ_θ = E_j L_θ √ρ_θ` for every Kraus operator of `channel`.
pub fn check_preservation_known_channel(
    family: &ParametricFamily,
    theta: f64,
    channel: &KrausChannel,
) -> Result<PreservationReport> {
    let ctx = NoisyContext::new(family, theta, channel)?;
    let l = ctx.before.matrix();
    let mut residuals = Vec::with_capacity(channel.len());
    let mut preserved = true;
    for (e, r) in channel.ops().iter().zip(ctx.residuals(ctx.after.matrix(), channel)) {
        let scale = hs_norm(&(e * l * &ctx.sqrt_rho)).max(1.0);
        let res = hs_norm(&r);
        preserved &= res <= RESIDUAL_TOL * scale;
        residuals.push(res);
    }
    Ok(PreservationReport {
        preserved,
        max_residual: residuals.iter().cloned().fold(0.0, f64::max),
        qfi_loss: residuals.iter().map(|r| r * r).sum(),
        residuals,
        qfi_before: ctx.before.qfi,
        qfi_after: ctx.after.qfi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestableReport {
    pub cond_i: bool,
    pub cond_ii: bool,
    /// Largest `|⟨s_j|d_k⟩ − ⟨d_j|s_k⟩|` over all pairs.
    pub cond_i_violation: f64,
    /// First pair attaining the largest violation.
    pub worst_pair: Option<(usize, usize)>,
    /// `‖D N‖` with `N` spanning the dependencies among the `s_j`.
    pub cond_ii_residual: f64,
    /// Number of independent dependencies among the `s_j`.
    pub dependencies: usize,
    /// Number of vectors per family (errors × probe eigenvectors).
    pub family_size: usize,
}

impl TestableReport {
    pub fn preserved(&self) -> bool {
        self.cond_i && self.cond_ii
    }
}

fn pairwise_violation(s: &[CVector], d: &[CVector]) -> (f64, Option<(usize, usize)>) {
    let mut worst = 0.0;
    let mut at = None;
    for j in 0..s.len() {
        for k in 0..s.len() {
            let v = (s[j].dotc(&d[k]) - d[j].dotc(&s[k])).norm();
            if v > worst {
                worst = v;
                at = Some((j, k));
            }
        }
    }
    (worst, at)
}

/// Returns `(‖D N‖, dim N, passes)` where `N` spans the null space of the
/// matrix whose columns are `s`.
fn dependency_residual(s: &[CVector], d: &[CVector]) -> (f64, usize, bool) {
    if s.is_empty() {
        return (0.0, 0, true);
    }
    let dim = s[0].len();
    let s_mat = columns_to_matrix(dim, s);
    let d_mat = columns_to_matrix(dim, d);
    let n = null_space(&s_mat, NULL_SPACE_TOL);
    if n.ncols() == 0 {
        return (0.0, 0, true);
    }
    let res = (&d_mat * &n).norm();
    let scale = d_mat.norm().max(1.0);
    (res, n.ncols(), res <= CONDITION_II_TOL * scale)
}

fn report_from_vectors(s: &[CVector], d: &[CVector]) -> TestableReport {
    let (cond_i_violation, worst_pair) = pairwise_violation(s, d);
    let (cond_ii_residual, dependencies, cond_ii) = dependency_residual(s, d);
    TestableReport {
        cond_i: cond_i_violation <= CONDITION_I_TOL,
        cond_ii,
        cond_i_violation,
        worst_pair,
        cond_ii_residual,
        dependencies,
        family_size: s.len(),
    }
}

fn check_error_dims(dim: usize, errors: &[CMatrix]) -> Result<()> {
    for e in errors {
        if e.ncols() != dim {
            return Err(QfiError::DimensionMismatch {
                expected: dim,
                found: e.ncols(),
            });
        }
    }
    if let Some(first) = errors.first() {
        if errors.iter().any(|e| e.nrows() != first.nrows()) {
            return Err(QfiError::InvalidArgument(
                "error operators must share an output dimension".into(),
            ));
        }
    }
    Ok(())
}

/// Builds the families `s = {E_j|ψ_l>}` and `d = {E_j L_θ|ψ_l>}` over the
/// eigenvectors `|ψ_l>` of `ρ_θ` with nonzero eigenvalue (a single vector
/// for a pure probe).
fn testable_families(
    family: &ParametricFamily,
    theta: f64,
    errors: &[CMatrix],
) -> Result<(Vec<CVector>, Vec<CVector>)> {
    check_error_dims(family.dim(), errors)?;
    let rho = family.evolve(theta);
    let drho = state_derivative(family, theta, None);
    let l = sld(&rho, &drho)?.sld.entries().clone();
    let range: Vec<CVector> = if family.is_pure() {
        vec![family.evolve_pure(theta)?.amplitudes().clone()]
    } else {
        let eig = rho.eigen();
        let cutoff = SLD_CUTOFF;
        (0..eig.dim())
            .filter(|&i| eig.values[i] > cutoff)
            .map(|i| eig.vectors.column(i).into_owned())
            .collect()
    };
    let mut s = Vec::with_capacity(errors.len() * range.len());
    let mut d = Vec::with_capacity(errors.len() * range.len());
    for psi in &range {
        let lpsi = &l * psi;
        for e in errors {
            s.push(e * psi);
            d.push(e * &lpsi);
        }
    }
    Ok((s, d))
}

/// Checks whether the QFI of `family` at `theta` is preserved under the raw
/// error set, without computing the noisy SLD.
pub fn check_testable_conditions(
    family: &ParametricFamily,
    theta: f64,
    errors: &[CMatrix],
) -> Result<TestableReport> {
    let (s, d) = testable_families(family, theta, errors)?;
    Ok(report_from_vectors(&s, &d))
}

/// Same decision for `e^{−iθH}|ψ>` at `θ = 0`, in the form
/// `⟨ψ|{E_j†E_k, ΔH}|ψ⟩ = 0` plus dependencies carried over to `E_j H|ψ>`.
pub fn check_testable_unitary(
    probe: &PureState,
    h: &HermitianObservable,
    errors: &[CMatrix],
) -> Result<TestableReport> {
    if h.dim() != probe.dim() {
        return Err(QfiError::DimensionMismatch {
            expected: probe.dim(),
            found: h.dim(),
        });
    }
    check_error_dims(probe.dim(), errors)?;
    let psi = probe.amplitudes();
    let mean = probe.expectation(h.entries()).re;
    let delta_h = h.entries() - identity(probe.dim()).scale(mean);
    let s: Vec<CVector> = errors.iter().map(|e| e * psi).collect();
    let hs: Vec<CVector> = errors.iter().map(|e| e * (h.entries() * psi)).collect();
    let dh: Vec<CVector> = errors.iter().map(|e| e * (&delta_h * psi)).collect();

    let mut worst = 0.0;
    let mut worst_pair = None;
    for j in 0..s.len() {
        for k in 0..s.len() {
            // ⟨ψ|E_j†E_k ΔH|ψ⟩ + ⟨ψ|ΔH E_j†E_k|ψ⟩
            let v = (s[j].dotc(&dh[k]) + dh[j].dotc(&s[k])).norm();
            if v > worst {
                worst = v;
                worst_pair = Some((j, k));
            }
        }
    }
    let (cond_ii_residual, dependencies, cond_ii) = dependency_residual(&s, &hs);
    Ok(TestableReport {
        cond_i: worst <= CONDITION_I_TOL,
        cond_ii,
        cond_i_violation: worst,
        worst_pair,
        cond_ii_residual,
        dependencies,
        family_size: s.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtensionError {
    #[error("condition (i) violated: |<s_{j}|d_{k}> - <d_{j}|s_{k}>| = {violation:e}")]
    ConditionI { j: usize, k: usize, violation: f64 },
    #[error("condition (ii) violated: a dependency among the s vectors leaves residual {residual:e} on the d vectors")]
    ConditionII { residual: f64 },
    #[error("constructed operator misses a target by {residual:e}")]
    Numerical { residual: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Hermitian `Q` with `Q|s_j> = |d_j>` for every `j`, when one exists.
pub fn hermitian_extension(
    s: &[CVector],
    d: &[CVector],
) -> std::result::Result<HermitianObservable, ExtensionError> {
    if s.len() != d.len() {
        return Err(ExtensionError::InvalidInput(format!(
            "{} source vectors but {} targets",
            s.len(),
            d.len()
        )));
    }
    let Some(first) = s.first() else {
        return Err(ExtensionError::InvalidInput("empty vector families".into()));
    };
    let dim = first.len();
    if s.iter().chain(d).any(|v| v.len() != dim) {
        return Err(ExtensionError::InvalidInput(
            "all vectors must share a dimension".into(),
        ));
    }

    let (violation, pair) = pairwise_violation(s, d);
    if violation > CONDITION_I_TOL {
        let (j, k) = pair.expect("positive violation has a witness");
        return Err(ExtensionError::ConditionI { j, k, violation });
    }
    let (residual, _, ok) = dependency_residual(s, d);
    if !ok {
        return Err(ExtensionError::ConditionII { residual });
    }

    // Maximal independent subset by two-pass Gram–Schmidt.
    let max_norm = s.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut ortho: Vec<CVector> = Vec::new();
    let mut chosen = Vec::new();
    for (j, v) in s.iter().enumerate() {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &ortho {
                let proj = b.dotc(&w);
                w -= b * proj;
            }
        }
        let nrm = w.norm();
        if nrm > NULL_SPACE_TOL * max_norm.max(f64::MIN_POSITIVE) && nrm > 0.0 {
            ortho.push(w / real(nrm));
            chosen.push(j);
        }
    }
    if chosen.is_empty() {
        // Every s_j vanishes and, by (ii), so does every d_j.
        return Ok(HermitianObservable::zero(dim));
    }

    let s_sel = columns_to_matrix(dim, &chosen.iter().map(|&j| s[j].clone()).collect::<Vec<_>>());
    let d_sel = columns_to_matrix(dim, &chosen.iter().map(|&j| d[j].clone()).collect::<Vec<_>>());
    let g = hermitian_part(&(s_sel.adjoint() * &d_sel));
    let eig = HermitianEigen::new(&g);
    let s_t = &s_sel * &eig.vectors;
    let d_t = &d_sel * &eig.vectors;
    let gram = s_t.adjoint() * &s_t;
    let gram_inv = gram
        .try_inverse()
        .ok_or(ExtensionError::Numerical { residual: f64::INFINITY })?;
    let duals = &s_t * gram_inv;

    let c_scale = eig.values.iter().map(|c| c.abs()).fold(1.0, f64::max);
    let mut q = CMatrix::zeros(dim, dim);
    for (a, &c) in eig.values.iter().enumerate() {
        let dv = d_t.column(a).into_owned();
        if c.abs() > CONDITION_I_TOL * c_scale {
            q += outer(&dv, &dv).scale(1.0 / c);
        } else {
            let sv = duals.column(a).into_owned();
            let term = outer(&dv, &sv);
            q += &term + term.adjoint();
        }
    }
    let q = hermitian_part(&q);

    let residual = s
        .iter()
        .zip(d)
        .map(|(sv, dv)| (&q * sv - dv).norm() / dv.norm().max(1.0))
        .fold(0.0, f64::max);
    if residual > EXTENSION_TOL {
        return Err(ExtensionError::Numerical { residual });
    }
    Ok(HermitianObservable::trusted(q))
}

/// `s_j = E_j|ψ_l>`, `d_j = E_j L_θ|ψ_l>` as used by the testable conditions;
/// exposed so the extension can be built for a concrete scheme.
pub fn extension_families(
    family: &ParametricFamily,
    theta: f64,
    errors: &[CMatrix],
) -> Result<(Vec<CVector>, Vec<CVector>)> {
    testable_families(family, theta, errors)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnillLaflammeReport {
    pub correctable: bool,
    /// Largest deviation of `⟨φ_a|E_j†E_k|φ_b⟩` from `δ_ab c_jk`.
    pub max_violation: f64,
}

/// Knill–Laflamme conditions for `errors` on the span of `code_basis`.
pub fn knill_laflamme_check(
    code_basis: &[PureState],
    errors: &[CMatrix],
) -> Result<KnillLaflammeReport> {
    let Some(first) = code_basis.first() else {
        return Err(QfiError::InvalidArgument("empty code basis".into()));
    };
    let dim = first.dim();
    if code_basis.iter().any(|b| b.dim() != dim) {
        return Err(QfiError::InvalidArgument("code basis dimensions differ".into()));
    }
    check_error_dims(dim, errors)?;
    let mut gram_err: f64 = 0.0;
    for (a, u) in code_basis.iter().enumerate() {
        for (b, v) in code_basis.iter().enumerate() {
            let target = if a == b { 1.0 } else { 0.0 };
            gram_err = gram_err.max((u.overlap(v) - real(target)).norm());
        }
    }
    if gram_err > ORTHONORMAL_TOL {
        return Err(QfiError::NonOrthonormalBasis(gram_err));
    }

    let images: Vec<Vec<CVector>> = errors
        .iter()
        .map(|e| code_basis.iter().map(|b| e * b.amplitudes()).collect())
        .collect();
    let mut worst: f64 = 0.0;
    for ej in &images {
        for ek in &images {
            let c = ej[0].dotc(&ek[0]);
            for a in 0..code_basis.len() {
                for b in 0..code_basis.len() {
                    let m = ej[a].dotc(&ek[b]);
                    let dev = if a == b { (m - c).norm() } else { m.norm() };
                    worst = worst.max(dev);
                }
            }
        }
    }
    Ok(KnillLaflammeReport {
        correctable: worst <= KL_TOL,
        max_violation: worst,
    })
}

/// `K_i = Σ_j u_ij E_j` for a unitary `u`.
pub fn recombine_kraus(channel: &KrausChannel, u: &CMatrix) -> Result<KrausChannel> {
    let n = channel.len();
    if u.shape() != (n, n) {
        return Err(QfiError::DimensionMismatch {
            expected: n,
            found: u.nrows(),
        });
    }
    let ops = channel.ops();
    let (rows, cols) = ops[0].shape();
    let mixed = (0..n)
        .map(|i| {
            (0..n).fold(CMatrix::zeros(rows, cols), |acc, j| acc + &ops[j] * u[(i, j)])
        })
        .collect();
    KrausChannel::new(mixed)
}

/// Kraus recombination with a Haar-random unitary drawn from `seed`.
pub fn random_kraus_recombination(channel: &KrausChannel, seed: u64) -> Result<KrausChannel> {
    let u = random_unitary(&mut rng_from_seed(seed), channel.len());
    recombine_kraus(channel, &u)
}

/// Trace-preserving channel from a raw error list: operators rescaled by
/// `1/√(Σ_j ‖E_j†E_j‖)`, with `√(1 − Σ E_j†E_j)` appended when the rescaled
/// set is not already complete.
pub fn error_set_channel(errors: &[CMatrix]) -> Result<KrausChannel> {
    let Some(first) = errors.first() else {
        return Err(QfiError::InvalidArgument("empty error set".into()));
    };
    check_error_dims(first.ncols(), errors)?;
    let dim = first.ncols();
    if first.nrows() != dim {
        return Err(QfiError::InvalidArgument(
            "completion needs square error operators".into(),
        ));
    }
    let total: f64 = errors
        .iter()
        .map(|e| HermitianEigen::new(&(e.adjoint() * e)).max_value())
        .sum();
    if total <= 0.0 {
        return Err(QfiError::InvalidArgument("all error operators vanish".into()));
    }
    let scale = 1.0 / total.sqrt();
    let mut ops: Vec<CMatrix> = errors.iter().map(|e| e.scale(scale)).collect();
    let sum = ops
        .iter()
        .fold(CMatrix::zeros(dim, dim), |acc, e| acc + e.adjoint() * e);
    let rest = identity(dim) - sum;
    if rest.norm() > 1e-12 {
        ops.push(psd_sqrt(&hermitian_part(&rest)));
    }
    KrausChannel::trace_preserving(ops)
}
