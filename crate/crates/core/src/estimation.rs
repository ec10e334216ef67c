//! Monte Carlo check that maximum-likelihood estimation attains the
//! Cramér–Rao bound of a measurement.

use std::f64::consts::PI;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::Serialize;

use crate::analytic::crb;
use crate::channel::SuperOperator;
use crate::error::{QfiError, Result};
use crate::exec::Execution;
use crate::linalg::hermitian_part;
use crate::qfi::classical_fisher;
use crate::random::{rng_from_seed, rng_stream, RNG_ALGORITHM};
use crate::state::{ParametricFamily, Povm};

pub const GRID_POINTS: usize = 200;
pub const REFINE_WIDTH: f64 = 1e-8;
pub const FLAT_TOL: f64 = 1e-12;
/// Relative log-likelihood difference below which two maxima tie.
pub const TIE_TOL: f64 = 1e-9;

fn clamp_probs(p: &[f64]) -> Vec<f64> {
    p.iter().map(|&x| x.max(0.0)).collect()
}

/// `nu` independent outcomes drawn from `probs` using `rng`.
pub fn sample_from<R: Rng + ?Sized>(probs: &[f64], nu: usize, rng: &mut R) -> Result<Vec<usize>> {
    let weights = clamp_probs(probs);
    let dist = WeightedIndex::new(&weights)
        .map_err(|e| QfiError::InvalidArgument(format!("outcome distribution: {e}")))?;
    Ok((0..nu).map(|_| dist.sample(rng)).collect())
}

/// `nu` i.i.d. outcomes of `povm` on `state`, reproducible from `seed`.
pub fn sample_outcomes(povm: &Povm, state: &crate::state::DensityMatrix, nu: usize, seed: u64) -> Result<Vec<usize>> {
    if povm.dim() != state.dim() {
        return Err(QfiError::DimensionMismatch {
            expected: state.dim(),
            found: povm.dim(),
        });
    }
    sample_from(&povm.probabilities(state.entries()), nu, &mut rng_from_seed(seed))
}

pub fn outcome_counts(outcomes: &[usize], n_outcomes: usize) -> Vec<u64> {
    let mut counts = vec![0u64; n_outcomes];
    for &o in outcomes {
        counts[o] += 1;
    }
    counts
}

fn log_likelihood(counts: &[u64], probs: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&n, &p) in counts.iter().zip(probs) {
        if n == 0 {
            continue;
        }
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += n as f64 * p.ln();
    }
    acc
}

/// Golden-section maximization of `f` on `[a, b]` down to `REFINE_WIDTH`;
/// returns the best of the final bracket midpoint and the two endpoints.
fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let (lo, hi) = (a, b);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > REFINE_WIDTH {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Maximum-likelihood estimate of θ on `interval` from outcome counts.
///
/// A 200-point grid scan locates every local maximum, each is refined by
/// golden-section search, and the best refined value wins; maxima equal
/// within `TIE_TOL` are resolved toward the interval midpoint.
pub fn mle_estimate(
    counts: &[u64],
    model: &dyn Fn(f64) -> Vec<f64>,
    interval: (f64, f64),
) -> Result<f64> {
    let (lo, hi) = interval;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(QfiError::InvalidArgument(format!(
            "search interval must satisfy lo < hi, got ({lo}, {hi})"
        )));
    }
    let ll = |theta: f64| log_likelihood(counts, &model(theta));
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS).map(|i| lo + i as f64 * step).collect();
    let values: Vec<f64> = grid.iter().map(|&t| ll(t)).collect();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !max.is_finite() || max - min <= FLAT_TOL {
        return Err(QfiError::FlatLikelihood);
    }

    let mut candidates = Vec::new();
    for i in 0..GRID_POINTS {
        let left = if i == 0 { f64::NEG_INFINITY } else { values[i - 1] };
        let right = if i + 1 == GRID_POINTS { f64::NEG_INFINITY } else { values[i + 1] };
        if values[i].is_finite() && values[i] >= left && values[i] >= right {
            let a = grid[i.saturating_sub(1)];
            let b = grid[(i + 1).min(GRID_POINTS - 1)];
            let (mut t, mut v) = golden_max(&ll, a, b);
            // a maximum at the interval boundary is reported exactly there
            for edge in [lo, hi] {
                if (t - edge).abs() <= REFINE_WIDTH && ll(edge) >= v {
                    t = edge;
                    v = ll(edge);
                }
            }
            candidates.push((t, v));
        }
    }
    let best = candidates
        .iter()
        .map(|c| c.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_TOL * best.abs().max(1.0);
    let mid = 0.5 * (lo + hi);
    let theta = candidates
        .iter()
        .filter(|c| c.1 >= best - tol)
        .map(|c| c.0)
        .min_by(|x, y| (x - mid).abs().total_cmp(&(y - mid).abs()))
        .expect("a finite grid maximum exists");
    Ok(theta)
}

/// Outcome probabilities of `povm` on the (noisy) family at θ.
pub fn family_model<'a>(
    family: &'a ParametricFamily,
    povm: &'a Povm,
    channel: Option<&'a (dyn SuperOperator + Sync)>,
) -> impl Fn(f64) -> Vec<f64> + Sync + 'a {
    move |theta| {
        let rho = family.evolve(theta);
        let m = match channel {
            Some(ch) => hermitian_part(&ch.apply_matrix(rho.entries())),
            None => rho.into_entries(),
        };
        povm.probabilities(&m)
    }
}

/// `θ_true ± π/(2·spread(G))`: one fringe of the generator's phase.
pub fn default_interval(family: &ParametricFamily, theta_true: f64) -> Result<(f64, f64)> {
    let spread = family.generator_spread();
    if !(spread > 0.0) {
        return Err(QfiError::Unidentifiable(0.0));
    }
    let half = PI / (2.0 * spread);
    Ok((theta_true - half, theta_true + half))
}

#[derive(Debug, Clone)]
pub struct AttainmentConfig {
    pub theta_true: f64,
    pub nu: usize,
    pub trials: usize,
    pub seed: u64,
    /// Defaults to [`default_interval`].
    pub interval: Option<(f64, f64)>,
    pub execution: Execution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttainmentReport {
    pub scenario: String,
    pub nu: usize,
    pub trials: usize,
    pub seed: u64,
    pub rng: &'static str,
    pub theta_true: f64,
    pub interval: (f64, f64),
    pub mean_estimate: f64,
    pub bias: f64,
    pub empirical_std: f64,
    pub classical_fisher: f64,
    pub crb: f64,
    pub ratio: f64,
}

/// Runs `trials` independent experiments of `nu` shots each, estimates θ by
/// maximum likelihood and compares the spread of the estimates with
/// `1/√(ν F_classical)`. Trial `i` draws from stream `i` of `seed`.
pub fn crb_attainment_report(
    scenario: &str,
    family: &ParametricFamily,
    povm: &Povm,
    channel: Option<&(dyn SuperOperator + Sync)>,
    config: &AttainmentConfig,
) -> Result<AttainmentReport> {
    if config.trials < 2 {
        return Err(QfiError::InvalidArgument("need at least two trials".into()));
    }
    if config.nu == 0 {
        return Err(QfiError::InvalidArgument("nu must be positive".into()));
    }
    if povm.dim() != family.dim() {
        return Err(QfiError::DimensionMismatch {
            expected: family.dim(),
            found: povm.dim(),
        });
    }
    let fisher = classical_fisher(
        povm,
        family,
        config.theta_true,
        channel.map(|c| c as &dyn SuperOperator),
    )?;
    let bound = crb(fisher, config.nu as u64)?;
    let interval = match config.interval {
        Some(i) => i,
        None => default_interval(family, config.theta_true)?,
    };
    let model = family_model(family, povm, channel);
    let truth = model(config.theta_true);

    let estimates: Vec<Result<f64>> = config.execution.map_range(config.trials, |trial| {
        let mut rng = rng_stream(config.seed, trial as u64);
        let outcomes = sample_from(&truth, config.nu, &mut rng)?;
        let counts = outcome_counts(&outcomes, truth.len());
        mle_estimate(&counts, &model, interval)
    });
    let estimates = estimates.into_iter().collect::<Result<Vec<f64>>>()?;

    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let std = var.sqrt();
    Ok(AttainmentReport {
        scenario: scenario.to_string(),
        nu: config.nu,
        trials: config.trials,
        seed: config.seed,
        rng: RNG_ALGORITHM,
        theta_true: config.theta_true,
        interval,
        mean_estimate: mean,
        bias: mean - config.theta_true,
        empirical_std: std,
        classical_fisher: fisher,
        crb: bound,
        ratio: std / bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli_z;
    use crate::state::{HermitianObservable, PureState};

    fn cos_model(theta: f64) -> Vec<f64> {
        let c = theta.cos().powi(2);
        vec![c, 1.0 - c]
    }

    #[test]
    fn deterministic_outcome() {
        let povm = Povm::computational(1).unwrap();
        let rho = PureState::basis(1, 1).unwrap().density();
        let out = sample_outcomes(&povm, &rho, 50, 1).unwrap();
        assert!(out.iter().all(|&o| o == 1));
    }

    #[test]
    fn plus_in_z_basis() {
        let povm = Povm::computational(1).unwrap();
        let rho = PureState::plus(1).unwrap().density();
        let nu = 100_000;
        let out = sample_outcomes(&povm, &rho, nu, 9).unwrap();
        let zeros = out.iter().filter(|&&o| o == 0).count() as f64;
        let sigma = (nu as f64 * 0.25).sqrt();
        assert!((zeros - nu as f64 / 2.0).abs() < 3.0 * sigma);
        assert_eq!(out, sample_outcomes(&povm, &rho, nu, 9).unwrap());
    }

    #[test]
    fn boundary_maximum() {
        let est = mle_estimate(&[20, 0], &cos_model, (0.0, PI / 2.0)).unwrap();
        assert_eq!(est, 0.0);
    }

    #[test]
    fn symmetric_counts_give_midpoint() {
        let mid = PI / 4.0;
        let est = mle_estimate(&[50, 50], &cos_model, (mid - 0.5, mid + 0.5)).unwrap();
        assert!((est - mid).abs() < 1e-7);
    }

    #[test]
    fn mirrored_maxima_resolved_toward_midpoint() {
        // cos² is even in θ: ±0.3 tie exactly; the midpoint is 0.3.
        let counts = [91, 9];
        let est = mle_estimate(&counts, &cos_model, (0.3 - PI / 4.0, 0.3 + PI / 4.0)).unwrap();
        let expected = (0.91f64).sqrt().acos();
        assert!((est - expected).abs() < 1e-7, "{est}");
    }

    #[test]
    fn flat_likelihood_rejected() {
        let flat = |_t: f64| vec![0.5, 0.5];
        assert!(matches!(mle_estimate(&[3, 4], &flat, (0.0, 1.0)), Err(QfiError::FlatLikelihood)));
        assert!(mle_estimate(&[3, 4], &cos_model, (1.0, 0.0)).is_err());
    }

    #[test]
    fn single_qubit_attainment_is_reproducible() {
        let fam = ParametricFamily::new(
            PureState::plus(1).unwrap(),
            HermitianObservable::new(pauli_z().scale(0.5)).unwrap(),
        )
        .unwrap();
        // |±i> basis is the SLD eigenbasis at θ = 0
        let y_basis = crate::linalg::pauli_y();
        let eig = crate::linalg::HermitianEigen::new(&y_basis);
        let povm = Povm::from_basis(&eig.vectors).unwrap();
        let cfg = AttainmentConfig {
            theta_true: 0.0,
            nu: 1000,
            trials: 40,
            seed: 5,
            interval: None,
            execution: Execution::default(),
        };
        let a = crb_attainment_report("qubit", &fam, &povm, None, &cfg).unwrap();
        let b = crb_attainment_report(
            "qubit",
            &fam,
            &povm,
            None,
            &AttainmentConfig {
                execution: Execution::Sequential,
                ..cfg.clone()
            },
        )
        .unwrap();
        assert_eq!(a, b);
        assert!((a.classical_fisher - 1.0).abs() < 1e-9);
        assert!(a.ratio > 0.6 && a.ratio < 1.5, "{a:?}");
    }
}
