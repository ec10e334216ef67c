//! Parameter sweeps behind the CRB-versus-time and CRB-versus-N figures.

use serde::Serialize;

use crate::analytic::{crb, scheme_qfi_exact};
use crate::error::{QfiError, Result};
use crate::exec::Execution;
use crate::schemes::{DephasingScenario, SchemeKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSweepConfig {
    pub n_total: usize,
    pub omega: f64,
    pub gamma_x: f64,
    pub gamma_z: f64,
    pub block_sizes: Vec<usize>,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub nu: u64,
}

impl Default for TimeSweepConfig {
    fn default() -> Self {
        Self {
            n_total: 15,
            omega: 1e-3,
            gamma_x: 1e-3,
            gamma_z: 0.5,
            block_sizes: vec![1, 3, 5, 15],
            t_min: 0.01,
            t_max: 20.0,
            points: 200,
            nu: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeSweepRow {
    pub t: f64,
    pub n: usize,
    pub crb: f64,
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || points < 2 {
        return Err(QfiError::InvalidArgument(format!(
            "log grid needs 0 < lo < hi and at least two points, got [{lo}, {hi}] x {points}"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| (a + i as f64 * step).exp()).collect();
    grid[0] = lo;
    grid[points - 1] = hi;
    Ok(grid)
}

fn kind_for(block_size: usize) -> SchemeKind {
    if block_size == 1 {
        SchemeKind::Raw
    } else {
        SchemeKind::Logical
    }
}

/// CRB of each block size over the time grid; rows grouped by block size,
/// times ascending.
pub fn time_sweep(config: &TimeSweepConfig, exec: Execution) -> Result<Vec<TimeSweepRow>> {
    let times = log_grid(config.t_min, config.t_max, config.points)?;
    let mut jobs = Vec::with_capacity(times.len() * config.block_sizes.len());
    for &n in &config.block_sizes {
        let base = DephasingScenario::new(
            config.n_total,
            n,
            config.gamma_x,
            config.gamma_z,
            config.omega,
            times[0],
        )?;
        for &t in &times {
            jobs.push((n, base.with_time(t)));
        }
    }
    exec.map(&jobs, |(n, s)| {
        let f = scheme_qfi_exact(kind_for(*n), s)?;
        Ok(TimeSweepRow {
            t: s.time,
            n: *n,
            crb: crb(f, config.nu)?,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSweepConfig {
    pub omega: f64,
    pub time: f64,
    /// `(γ_x, γ_z)` pairs.
    pub noise: Vec<(f64, f64)>,
    pub block_size: usize,
    pub n_max: usize,
    pub nu: u64,
}

impl Default for SizeSweepConfig {
    fn default() -> Self {
        Self {
            omega: 1e-3,
            time: 1.0,
            noise: vec![(5e-4, 5e-3), (1e-3, 1e-2)],
            block_size: 3,
            n_max: 150,
            nu: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSweepRow {
    pub n_total: usize,
    pub scenario: String,
    pub crb: f64,
    pub inv_n: f64,
    pub inv_sqrt_n: f64,
    pub three_over_n: f64,
}

/// `N = n, 3n, 5n, … ≤ n_max`: the sizes for which both the raw GHZ state
/// and the logical GHZ state over `N/n` blocks have an odd qubit count.
pub fn size_grid(block_size: usize, n_max: usize) -> Vec<usize> {
    (0..)
        .map(|j| (2 * j + 1) * block_size)
        .take_while(|&n| n <= n_max)
        .collect()
}

pub fn scenario_label(kind: SchemeKind, block_size: usize, gamma_x: f64, gamma_z: f64) -> String {
    match kind {
        SchemeKind::Raw => format!("raw(gx={gamma_x:e},gz={gamma_z:e})"),
        SchemeKind::Logical => format!("logical{block_size}(gx={gamma_x:e},gz={gamma_z:e})"),
    }
}

/// Raw and logical CRB for every noise pair over [`size_grid`]; rows ordered
/// by noise pair, then raw before logical, then N.
pub fn size_sweep(config: &SizeSweepConfig, exec: Execution) -> Result<Vec<SizeSweepRow>> {
    let sizes = size_grid(config.block_size, config.n_max);
    if sizes.is_empty() {
        return Err(QfiError::InvalidArgument(format!(
            "n_max = {} is below the block size {}",
            config.n_max, config.block_size
        )));
    }
    let mut jobs = Vec::new();
    for &(gx, gz) in &config.noise {
        for kind in [SchemeKind::Raw, SchemeKind::Logical] {
            for &n in &sizes {
                let s = DephasingScenario::new(n, config.block_size, gx, gz, config.omega, config.time)?;
                jobs.push((kind, s));
            }
        }
    }
    exec.map(&jobs, |(kind, s)| {
        let f = scheme_qfi_exact(*kind, s)?;
        let n = s.n_total as f64;
        Ok(SizeSweepRow {
            n_total: s.n_total,
            scenario: scenario_label(*kind, s.block_size, s.gamma_x, s.gamma_z),
            crb: crb(f, config.nu)?,
            inv_n: 1.0 / n,
            inv_sqrt_n: 1.0 / n.sqrt(),
            three_over_n: 3.0 / n,
        })
    })
    .into_iter()
    .collect()
}
