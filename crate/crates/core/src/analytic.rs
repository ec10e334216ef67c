//! Closed-form QFI of (logical) GHZ probes under bit- and phase-flip noise.
//!
//! For odd `N` the noisy GHZ state splits into orthogonal two-level sectors
//! labelled by the number `k ≤ (N−1)/2` of corrected bit flips. Sector `k`
//! carries weight `C(N,k)·a_k` and Bloch vector
//! `(x_k cos Nωt, y_k sin Nωt)`; its QFI is evaluated below in a form whose
//! terms are all nonnegative, so no precision is lost when the total QFI is
//! many orders of magnitude below `N²t²`.

use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::error::{QfiError, Result};
use crate::linalg::{identity, CMatrix};
use crate::qfi::{sld, SLD_CUTOFF};
use crate::schemes::{binomial, logical_error_probabilities, DephasingScenario, SchemeKind};
use crate::state::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockCoefficients {
    pub k: usize,
    /// `p_x^k (1−p_x)^{N−k} + p_x^{N−k} (1−p_x)^k`.
    pub a_k: f64,
    /// `(1−2p_z)^N`.
    pub x_k: f64,
    pub y_k: f64,
    /// `1 − x_k²`, evaluated without cancellation.
    pub one_minus_x_sq: f64,
    /// `1 − y_k²`, evaluated without cancellation.
    pub one_minus_y_sq: f64,
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&p) {
        return Err(QfiError::InvalidArgument(format!(
            "{name} must lie in [0, 1/2], got {p}"
        )));
    }
    Ok(())
}

fn check_odd(n: usize) -> Result<()> {
    if n % 2 == 0 {
        return Err(QfiError::InvalidArgument(format!(
            "closed form requires an odd qubit count, got {n}"
        )));
    }
    Ok(())
}

fn pow(p: f64, k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        p.powi(k as i32)
    }
}

pub fn block_coefficients(n: usize, k: usize, p_x: f64, p_z: f64) -> Result<BlockCoefficients> {
    check_odd(n)?;
    if k > (n - 1) / 2 {
        return Err(QfiError::InvalidArgument(format!(
            "sector index {k} outside 0..={}",
            (n - 1) / 2
        )));
    }
    check_probability("p_x", p_x)?;
    check_probability("p_z", p_z)?;
    let q = 1.0 - p_x;
    let a_k = pow(p_x, k) * pow(q, n - k) + pow(p_x, n - k) * pow(q, k);

    // x² = (1−2p_z)^{2N}
    let log_x = n as f64 * (-2.0 * p_z).ln_1p();
    let x_k = log_x.exp();
    let x_sq = (2.0 * log_x).exp();
    let one_minus_x_sq = -(2.0 * log_x).exp_m1();

    // r = (u − v)/(u + v) with u = (1−p_x)^{N−2k}, v = p_x^{N−2k}, written
    // as tanh(d/2), d = ln(u/v), so that neither power has to be formed.
    let d = (n - 2 * k) as f64 * ((1.0 - 2.0 * p_x) / p_x).ln_1p();
    let ratio = (d / 2.0).tanh();
    let sech_sq = (d / 2.0).cosh().powi(-2);
    let y_k = x_k * ratio;
    // 1 − y² = (1 − x²) + x²(1 − r²)
    let one_minus_y_sq = one_minus_x_sq + x_sq * sech_sq;
    Ok(BlockCoefficients {
        k,
        a_k,
        x_k,
        y_k,
        one_minus_x_sq,
        one_minus_y_sq,
    })
}

impl BlockCoefficients {
    /// QFI of the normalized sector state per unit `N²t²`, at phase
    /// `cos 2Nωt = c`.
    pub fn sector_qfi(&self, c: f64) -> f64 {
        let a = self.one_minus_x_sq;
        let b = self.one_minus_y_sq;
        if a == 0.0 {
            // Pure in-sector Bloch circle; no phase information is lost.
            return 1.0;
        }
        let x_sq = self.x_k * self.x_k;
        let y_sq = self.y_k * self.y_k;
        (x_sq * b * (1.0 - c) + y_sq * a * (1.0 + c)) / (a * (1.0 + c) + b * (1.0 - c))
    }

    /// `2(1−x²)(1−y²) / [2 − x² − y² + (y² − x²) cos 2Nωt]`, the fractional
    /// loss of the sector.
    pub fn sector_loss(&self, c: f64) -> f64 {
        let a = self.one_minus_x_sq;
        let b = self.one_minus_y_sq;
        if a * b == 0.0 {
            return 0.0;
        }
        2.0 * a * b / (a * (1.0 + c) + b * (1.0 - c))
    }
}

/// Largest `N` for which `C(N,k)·a_k` is formed directly; above it the
/// binomial can overflow while `a_k` underflows.
const DIRECT_WEIGHT_MAX_N: usize = 64;

/// `k·ln p`, with `0·ln 0 = 0`.
fn xlog(k: usize, p: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * p.ln()
    }
}

/// Sector weight `C(N,k)·a_k`.
fn sector_weight(n: usize, k: usize, p_x: f64, a_k: f64) -> f64 {
    if n <= DIRECT_WEIGHT_MAX_N {
        return binomial(n, k) * a_k;
    }
    let q = 1.0 - p_x;
    let l1 = xlog(k, p_x) + xlog(n - k, q);
    let l2 = xlog(n - k, p_x) + xlog(k, q);
    let hi = l1.max(l2);
    if hi == f64::NEG_INFINITY {
        return 0.0;
    }
    let log_a = hi + (-(l1 - l2).abs()).exp().ln_1p();
    (ln_binomial(n as u64, k as u64) + log_a).exp()
}

/// QFI about ω of the raw `N`-qubit GHZ probe after time `t` with flip
/// probabilities `p_x`, `p_z`.
pub fn ghz_qfi_exact(n: usize, t: f64, omega: f64, p_x: f64, p_z: f64) -> Result<f64> {
    let scale = (n as f64 * t).powi(2);
    let c = (2.0 * n as f64 * omega * t).cos();
    let mut total = 0.0;
    for k in 0..=(n - 1) / 2 {
        let b = block_coefficients(n, k, p_x, p_z)?;
        total += sector_weight(n, k, p_x, b.a_k) * b.sector_qfi(c);
    }
    Ok((scale * total).clamp(0.0, scale))
}

/// Same quantity assembled as `N²t² − N²t² Σ_k C(N,k) a_k loss_k`.
pub fn ghz_qfi_loss_form(n: usize, t: f64, omega: f64, p_x: f64, p_z: f64) -> Result<f64> {
    let scale = (n as f64 * t).powi(2);
    let c = (2.0 * n as f64 * omega * t).cos();
    let mut loss = 0.0;
    for k in 0..=(n - 1) / 2 {
        let b = block_coefficients(n, k, p_x, p_z)?;
        loss += sector_weight(n, k, p_x, b.a_k) * b.sector_loss(c);
    }
    Ok(scale - scale * loss)
}

/// `Σ_k C(N,k) a_k`, which equals one for odd `N`.
pub fn sector_weight_sum(n: usize, p_x: f64) -> Result<f64> {
    let mut s = 0.0;
    for k in 0..=(n - 1) / 2 {
        s += sector_weight(n, k, p_x, block_coefficients(n, k, p_x, 0.0)?.a_k);
    }
    Ok(s)
}

/// The logical scheme's QFI: the raw formula with `m = ⌊N/n⌋` blocks and
/// block-level flip probabilities.
pub fn logical_ghz_qfi_exact(scenario: &DephasingScenario) -> Result<f64> {
    scenario.validate()?;
    let m = scenario.block_count();
    if m % 2 == 0 {
        return Err(QfiError::EvenBlockCount(m));
    }
    let lp = logical_error_probabilities(scenario)?;
    ghz_qfi_exact(m, scenario.time, scenario.omega, lp.p_bar_x, lp.p_bar_z)
}

pub fn scheme_qfi_exact(kind: SchemeKind, scenario: &DephasingScenario) -> Result<f64> {
    match kind {
        SchemeKind::Raw => {
            scenario.validate()?;
            ghz_qfi_exact(
                scenario.n_total,
                scenario.time,
                scenario.omega,
                scenario.p_x(),
                scenario.p_z(),
            )
        }
        SchemeKind::Logical => logical_ghz_qfi_exact(scenario),
    }
}

/// `1/√(νF)`.
pub fn crb(f: f64, nu: u64) -> Result<f64> {
    if nu == 0 {
        return Err(QfiError::InvalidArgument("repetition count must be positive".into()));
    }
    if !(f > 0.0) || !f.is_finite() {
        return Err(QfiError::Unidentifiable(f));
    }
    Ok(1.0 / (nu as f64 * f).sqrt())
}

/// QFI of a two-level family: `tr[dρ² + det(ρ)^{-1} (1−ρ)dρ(1−ρ)dρ]`, with the
/// pure-state limit `2 tr(dρ²)` when `det ρ` vanishes.
pub fn two_level_qfi(rho: &DensityMatrix, drho: &CMatrix) -> Result<f64> {
    if rho.dim() != 2 || drho.shape() != (2, 2) {
        return Err(QfiError::DimensionMismatch {
            expected: 2,
            found: if rho.dim() != 2 { rho.dim() } else { drho.nrows() },
        });
    }
    let r = rho.entries();
    let det = (r[(0, 0)] * r[(1, 1)] - r[(0, 1)] * r[(1, 0)]).re;
    let d2 = (drho * drho).trace().re;
    if det > SLD_CUTOFF {
        let comp = identity(2) - r;
        let t = (&comp * drho * &comp * drho).trace().re;
        return Ok((d2 + t / det).max(0.0));
    }
    // Rank one: the general route rejects derivatives leaving the support.
    sld(rho, drho)?;
    Ok((2.0 * d2).max(0.0))
}
