//! Symmetric logarithmic derivatives, quantum and classical Fisher
//! information, QFI loss under a channel and the Ozawa error functional.

use crate::channel::{KrausChannel, SuperOperator};
use crate::error::{QfiError, Result};
use crate::linalg::{
    anticommutator, commutator, hermitian_part, hs_norm, max_abs, psd_sqrt, real, trace, CMatrix,
    CVector, HermitianEigen, I,
};
use crate::state::{DensityMatrix, HermitianObservable, ParametricFamily, Povm, Probe};

/// Relative eigenvalue-pair cutoff: pairs with `p_i + p_j` at or below
/// `SLD_CUTOFF · tr ρ` get a zero SLD matrix element.
pub const SLD_CUTOFF: f64 = 1e-12;

/// Largest tolerated derivative weight between two null eigenvectors.
pub const OFF_SUPPORT_TOL: f64 = 1e-8;

pub const PROBABILITY_FLOOR: f64 = 1e-14;
pub const SINGULAR_DERIVATIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SldResult {
    pub sld: HermitianObservable,
    pub support_dimension: usize,
    pub eigen_cutoff_used: f64,
    /// `tr(ρ L²)`, evaluated in the eigenbasis of ρ.
    pub qfi: f64,
}

impl SldResult {
    pub fn matrix(&self) -> &CMatrix {
        self.sld.entries()
    }
}

/// `dρ_θ/dθ = −i[G, ρ_θ]`, optionally pushed through a θ-independent channel.
pub fn state_derivative(
    family: &ParametricFamily,
    theta: f64,
    channel: Option<&dyn SuperOperator>,
) -> CMatrix {
    let rho = family.evolve(theta);
    let d = commutator(family.generator().entries(), rho.entries()) * (-I);
    let d = hermitian_part(&d);
    match channel {
        Some(ch) => hermitian_part(&ch.apply_matrix(&d)),
        None => d,
    }
}

/// The SLD `L` with `dρ = ½{L, ρ}` on the support of `ρ`.
pub fn sld(rho: &DensityMatrix, drho: &CMatrix) -> Result<SldResult> {
    if drho.shape() != (rho.dim(), rho.dim()) {
        return Err(QfiError::DimensionMismatch {
            expected: rho.dim(),
            found: drho.nrows(),
        });
    }
    let eig = rho.eigen();
    sld_with_eigen(&eig, trace(rho.entries()).re, drho)
}

pub(crate) fn sld_with_eigen(eig: &HermitianEigen, tr: f64, drho: &CMatrix) -> Result<SldResult> {
    let n = eig.dim();
    let cutoff = SLD_CUTOFF * tr;
    let d = eig.to_eigenbasis(drho);
    let scale = max_abs(drho).max(1.0);
    let p = &eig.values;
    let mut l = CMatrix::zeros(n, n);
    let mut qfi = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s = p[i] + p[j];
            if s > cutoff {
                let lij = d[(i, j)] * real(2.0 / s);
                l[(i, j)] = lij;
                qfi += 2.0 * d[(i, j)].norm_sqr() / s;
            } else if d[(i, j)].norm() > OFF_SUPPORT_TOL * scale {
                return Err(QfiError::NotDifferentiable {
                    weight: d[(i, j)].norm(),
                });
            }
        }
    }
    let support_dimension = p.iter().filter(|&&x| x > cutoff / 2.0).count();
    let l = hermitian_part(&eig.from_eigenbasis(&l));
    Ok(SldResult {
        sld: HermitianObservable::trusted(l),
        support_dimension,
        eigen_cutoff_used: cutoff,
        qfi: qfi.max(0.0),
    })
}

/// `F = tr(ρ L²)`.
pub fn qfi(rho: &DensityMatrix, drho: &CMatrix) -> Result<f64> {
    Ok(sld(rho, drho)?.qfi)
}

/// QFI of `family` at `theta`, optionally after `channel`.
pub fn family_qfi(
    family: &ParametricFamily,
    theta: f64,
    channel: Option<&dyn SuperOperator>,
) -> Result<f64> {
    let (rho, drho) = noisy_pair(family, theta, channel);
    qfi(&rho, &drho)
}

pub(crate) fn noisy_pair(
    family: &ParametricFamily,
    theta: f64,
    channel: Option<&dyn SuperOperator>,
) -> (DensityMatrix, CMatrix) {
    let rho = family.evolve(theta);
    let drho = state_derivative(family, theta, channel);
    let rho = match channel {
        Some(ch) => DensityMatrix::trusted(hermitian_part(&ch.apply_matrix(rho.entries()))),
        None => rho,
    };
    (rho, drho)
}

/// `4 Var(G)` on the evolved pure probe.
pub fn qfi_pure(family: &ParametricFamily, theta: f64) -> Result<f64> {
    let psi = family.evolve_pure(theta)?;
    let g = family.generator().entries();
    let mean = psi.expectation(g).re;
    let second = psi.expectation(&(g * g)).re;
    Ok((4.0 * (second - mean * mean)).max(0.0))
}

/// `(1 − |ψ_θ><ψ_θ|) d|ψ_θ>/dθ`.
pub fn covariant_derivative(family: &ParametricFamily, theta: f64) -> Result<CVector> {
    let psi = family.evolve_pure(theta)?;
    let v = psi.amplitudes();
    let dpsi = (family.generator().entries() * v) * (-I);
    let proj = v.dotc(&dpsi);
    Ok(dpsi - v * proj)
}

/// Classical Fisher information of `povm` on the family, optionally after
/// `channel`.
pub fn classical_fisher(
    povm: &Povm,
    family: &ParametricFamily,
    theta: f64,
    channel: Option<&dyn SuperOperator>,
) -> Result<f64> {
    let (rho, drho) = noisy_pair(family, theta, channel);
    classical_fisher_of(povm, rho.entries(), &drho)
}

pub fn classical_fisher_of(povm: &Povm, rho: &CMatrix, drho: &CMatrix) -> Result<f64> {
    if povm.dim() != rho.nrows() {
        return Err(QfiError::DimensionMismatch {
            expected: rho.nrows(),
            found: povm.dim(),
        });
    }
    let mut total = 0.0;
    for (outcome, m) in povm.elements().iter().enumerate() {
        let p = (m * rho).trace().re;
        let dp = (m * drho).trace().re;
        if p <= PROBABILITY_FLOOR {
            if dp.abs() > SINGULAR_DERIVATIVE_TOL {
                return Err(QfiError::SingularOutcome {
                    outcome,
                    probability: p,
                    derivative: dp,
                });
            }
            continue;
        }
        total += dp * dp / p;
    }
    Ok(total)
}

/// Both sides of the QFI-loss identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiLoss {
    /// `F(ρ_θ) − F(N(ρ_θ))`.
    pub direct: f64,
    /// `Σ_j ‖(𝓛 E_j − E_j L) √ρ_θ‖²_HS`.
    pub kraus_form: f64,
    pub qfi_before: f64,
    pub qfi_after: f64,
}

impl QfiLoss {
    pub fn discrepancy(&self) -> f64 {
        (self.direct - self.kraus_form).abs()
    }
}

/// Everything needed to evaluate Kraus-form residuals for one family and
/// channel at a fixed θ.
pub(crate) struct NoisyContext {
    pub sqrt_rho: CMatrix,
    pub before: SldResult,
    pub after: SldResult,
}

impl NoisyContext {
    pub fn new(family: &ParametricFamily, theta: f64, channel: &KrausChannel) -> Result<Self> {
        if channel.input_dim() != family.dim() {
            return Err(QfiError::DimensionMismatch {
                expected: family.dim(),
                found: channel.input_dim(),
            });
        }
        let rho = family.evolve(theta);
        let drho = state_derivative(family, theta, None);
        let before = sld(&rho, &drho)?;
        let noisy = DensityMatrix::trusted(hermitian_part(&channel.apply_matrix(rho.entries())));
        let dnoisy = hermitian_part(&channel.apply_matrix(&drho));
        let after = sld(&noisy, &dnoisy)?;
        let sqrt_rho = match family.probe() {
            // ρ_θ is rank one: √ρ = ρ.
            Probe::Pure(_) => rho.entries().clone(),
            Probe::Mixed(_) => psd_sqrt(rho.entries()),
        };
        Ok(Self {
            sqrt_rho,
            before,
            after,
        })
    }

    /// `(Q E − E L) √ρ` for each Kraus operator.
    pub fn residuals(&self, q: &CMatrix, channel: &KrausChannel) -> Vec<CMatrix> {
        let l = self.before.matrix();
        channel
            .ops()
            .iter()
            .map(|e| (q * e - e * l) * &self.sqrt_rho)
            .collect()
    }
}

pub fn qfi_loss(family: &ParametricFamily, theta: f64, channel: &KrausChannel) -> Result<QfiLoss> {
    let ctx = NoisyContext::new(family, theta, channel)?;
    let kraus_form: f64 = ctx
        .residuals(ctx.after.matrix(), channel)
        .iter()
        .map(|r| hs_norm(r).powi(2))
        .sum();
    Ok(QfiLoss {
        direct: ctx.before.qfi - ctx.after.qfi,
        kraus_form,
        qfi_before: ctx.before.qfi,
        qfi_after: ctx.after.qfi,
    })
}

/// `Σ_j ‖(Q E_j − E_j L_θ) √ρ_θ‖²_HS` for a Hermitian `Q` on the output space.
pub fn ozawa_error(
    family: &ParametricFamily,
    theta: f64,
    channel: &KrausChannel,
    q: &HermitianObservable,
) -> Result<f64> {
    if q.dim() != channel.output_dim() {
        return Err(QfiError::DimensionMismatch {
            expected: channel.output_dim(),
            found: q.dim(),
        });
    }
    let ctx = NoisyContext::new(family, theta, channel)?;
    Ok(ctx
        .residuals(q.entries(), channel)
        .iter()
        .map(|r| hs_norm(r).powi(2))
        .sum())
}

/// `½{L, ρ} − dρ` restricted to the support of ρ, as a Hilbert–Schmidt norm.
pub fn sld_residual(rho: &DensityMatrix, drho: &CMatrix, l: &CMatrix) -> f64 {
    let eig = rho.eigen();
    let cutoff = SLD_CUTOFF * trace(rho.entries()).re;
    let r = eig.to_eigenbasis(&(anticommutator(l, rho.entries()).scale(0.5) - drho));
    let mut acc = 0.0;
    for i in 0..eig.dim() {
        for j in 0..eig.dim() {
            if eig.values[i] + eig.values[j] > cutoff {
                acc += r[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}
