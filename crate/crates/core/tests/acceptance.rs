//! Acceptance gate: runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use qfi_core::analytic::ghz_qfi_exact;
use qfi_core::channel::KrausChannel;
use qfi_core::estimation::{crb_attainment_report, AttainmentConfig};
use qfi_core::exec::Execution;
use qfi_core::figures::{scenario_label, size_sweep, time_sweep, SizeSweepConfig, SizeSweepRow, TimeSweepConfig, TimeSweepRow};
use qfi_core::linalg::{c, real, tensor_product, trace_distance, CMatrix, CVector};
use qfi_core::oracle::ghz_qfi_oracle;
use qfi_core::preservation::{check_preservation_known_channel, hermitian_extension, random_kraus_recombination, ExtensionError};
use qfi_core::qfi::{classical_fisher, qfi_loss};
use qfi_core::random::{random_channel, random_density, random_hermitian, random_pure_state, random_unitary, random_vector, rng_from_seed, QfiRng};
use qfi_core::schemes::SchemeKind;
use qfi_core::stabilizer::{immune_error_set, phase_flip_code, phase_flip_errors};
use qfi_core::state::{HermitianObservable, ParametricFamily, Povm, PureState};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

// --- shared scheme pieces -------------------------------------------------

fn pauli(s: &str) -> CMatrix {
    s.parse::<qfi_core::stabilizer::PauliOperator>().unwrap().dense().unwrap()
}

fn scheme_family(n: usize) -> ParametricFamily {
    let h = qfi_core::stabilizer::PauliOperator::z_all(n).dense().unwrap();
    ParametricFamily::new(PureState::plus(n).unwrap(), HermitianObservable::new(h).unwrap()).unwrap()
}

fn immune_set(n: usize) -> Vec<CMatrix> {
    let code = phase_flip_code(n).unwrap();
    immune_error_set(&code, &phase_flip_errors(n, n / 2), code.logical_x())
        .unwrap()
        .iter()
        .map(|e| e.dense().unwrap())
        .collect()
}

/// `ρ ↦ Σ_j p_j E_j ρ E_j†` for unitary `E_j`.
fn mixing(errors: &[CMatrix], probs: &[f64]) -> KrausChannel {
    KrausChannel::trace_preserving(
        errors.iter().zip(probs).map(|(e, &p)| e.scale(p.sqrt())).collect(),
    )
    .unwrap()
}

fn random_probs(rng: &mut QfiRng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

fn x_basis_povm(n: usize) -> Povm {
    let s = 1.0 / 2f64.sqrt();
    let h = CMatrix::from_row_slice(2, 2, &[real(s), real(s), real(s), real(-s)]);
    let mut u = CMatrix::identity(1, 1);
    for _ in 0..n {
        u = tensor_product(&u, &h);
    }
    Povm::from_basis(&u).unwrap()
}

// --- criteria --------------------------------------------------------------

fn closed_form_grid(gamma_z: f64, expected: impl Fn(usize, f64) -> f64) -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [3usize, 5, 15] {
        for t in [0.5, 1.0, 2.0] {
            let p_z = -(-gamma_z * t).exp_m1() / 2.0;
            for omega in [0.0, 1e-3, 0.7] {
                let f = ghz_qfi_exact(n, t, omega, 0.0, p_z).map_err(|e| e.to_string())?;
                let err = rel(f, expected(n, t));
                worst = worst.max(err);
                ensure(err <= 1e-12, || format!("N={n} t={t} ω={omega}: relative error {err:e}"))?;
            }
        }
    }
    Ok(format!("max relative error {worst:.1e}"))
}

fn criterion_1() -> Outcome {
    let g = 0.3;
    closed_form_grid(g, |n, t| (-2.0 * n as f64 * g * t).exp() * (n * n) as f64 * t * t)
}

fn criterion_2() -> Outcome {
    // transverse noise only: p_x > 0 while p_z = 0
    let mut worst: f64 = 0.0;
    for n in [3usize, 5, 15] {
        for t in [0.5, 1.0, 2.0] {
            for gamma_x in [0.1f64, 0.3, 2.0] {
                let p_x = -(-gamma_x * t).exp_m1() / 2.0;
                let f = ghz_qfi_exact(n, t, 1e-3, p_x, 0.0).map_err(|e| e.to_string())?;
                let err = rel(f, (n * n) as f64 * t * t);
                worst = worst.max(err);
                ensure(err <= 1e-12, || format!("N={n} t={t} γx={gamma_x}: relative error {err:e}"))?;
            }
        }
    }
    Ok(format!("max relative error {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let mut rng = rng_from_seed(3);
    let mut worst: f64 = 0.0;
    for n in [1usize, 3, 5, 7, 9] {
        for _ in 0..10 {
            let omega_t = rng.random_range(0.0..std::f64::consts::PI);
            let t = rng.random_range(0.2..2.0);
            let omega = omega_t / t;
            let p_x = rng.random_range(0.0..0.45);
            let p_z = rng.random_range(0.0..0.15);
            let a = ghz_qfi_exact(n, t, omega, p_x, p_z).map_err(|e| e.to_string())?;
            let o = ghz_qfi_oracle(n, t, omega, p_x, p_z).map_err(|e| e.to_string())?;
            let err = (a - o).abs() / o.max(1e-12);
            worst = worst.max(err);
            ensure(err <= 1e-7, || {
                format!("N={n} t={t} ω={omega} p_x={p_x} p_z={p_z}: analytic {a} vs oracle {o}")
            })?;
        }
    }
    Ok(format!("50 tuples, max relative deviation {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let theta = 0.3;
    let p = 0.1;
    let fam = scheme_family(3);
    let rho = fam.evolve(theta);
    let set = immune_set(3);
    let id = CMatrix::identity(8, 8);
    let mut channels: Vec<(String, KrausChannel, bool)> = set
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let altered = (e - &id).norm() > 1e-12;
            (format!("error #{i}"), mixing(&[id.clone(), e.clone()], &[1.0 - p, p]), altered)
        })
        .collect();
    let uniform = vec![1.0 / set.len() as f64; set.len()];
    channels.push(("uniform immune mixture".into(), mixing(&set, &uniform), true));

    let mut worst_loss: f64 = 0.0;
    let mut min_distance = f64::INFINITY;
    for (name, ch, altered) in &channels {
        let loss = qfi_loss(&fam, theta, ch).map_err(|e| e.to_string())?;
        let report = check_preservation_known_channel(&fam, theta, ch).map_err(|e| e.to_string())?;
        let l = loss.direct.abs().max(report.qfi_loss);
        worst_loss = worst_loss.max(l);
        ensure(l <= 1e-9 && report.preserved, || format!("{name}: QFI loss {l:e}"))?;
        if *altered {
            let noisy = ch.apply(&rho).map_err(|e| e.to_string())?;
            let d = trace_distance(noisy.entries(), rho.entries());
            min_distance = min_distance.min(d);
            ensure(d > 0.01, || format!("{name}: trace distance only {d:e}"))?;
        }
    }
    Ok(format!(
        "{} channels, max QFI loss {worst_loss:.1e}, min trace distance {min_distance:.3}",
        channels.len()
    ))
}

fn criterion_5() -> Outcome {
    let theta = 0.3;
    let fam = scheme_family(3);
    let set = immune_set(3);
    let mut rng = rng_from_seed(5);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let ch = mixing(&set, &random_probs(&mut rng, set.len()));
        let loss = qfi_loss(&fam, theta, &ch).map_err(|e| e.to_string())?;
        let fc = classical_fisher(&x_basis_povm(3), &fam, theta, Some(&ch)).map_err(|e| e.to_string())?;
        let err = (fc - loss.qfi_after).abs();
        worst = worst.max(err);
        ensure(err <= 1e-8, || format!("classical {fc} vs preserved QFI {}", loss.qfi_after))?;
        ensure((loss.qfi_after - 4.0).abs() <= 1e-8, || format!("preserved QFI {} ≠ 4", loss.qfi_after))?;
    }
    Ok(format!("5 random Z-mixing channels, max |F_C − F_Q| {worst:.1e}"))
}

fn criterion_6() -> Outcome {
    let mut rng = rng_from_seed(6);
    let mut worst: f64 = 0.0;
    let mut preserved_count = 0;
    for i in 0..200 {
        let theta = rng.random_range(-1.0..1.0);
        let (fam, ch) = if i % 4 == 0 {
            // a randomly rotated immune scheme: preserved by construction
            let v = random_unitary(&mut rng, 8);
            let probe = PureState::new(&v * PureState::plus(3).unwrap().amplitudes()).unwrap();
            let h = HermitianObservable::new(&v * pauli("ZZZ") * v.adjoint()).unwrap();
            let set: Vec<CMatrix> = immune_set(3).iter().map(|e| &v * e * v.adjoint()).collect();
            let probs = random_probs(&mut rng, set.len());
            (ParametricFamily::new(probe, h).unwrap(), mixing(&set, &probs))
        } else {
            let h = random_hermitian(&mut rng, 8);
            let fam = if i % 2 == 0 {
                ParametricFamily::new(random_density(&mut rng, 3, 8), h).unwrap()
            } else {
                ParametricFamily::new(random_pure_state(&mut rng, 3), h).unwrap()
            };
            let k = rng.random_range(1..=4);
            (fam, random_channel(&mut rng, 8, k))
        };
        let loss = qfi_loss(&fam, theta, &ch).map_err(|e| format!("pair {i}: {e}"))?;
        let d = loss.discrepancy();
        worst = worst.max(d);
        ensure(d <= 1e-8, || format!("pair {i}: direct {} vs Kraus form {}", loss.direct, loss.kraus_form))?;
        let verdict = check_preservation_known_channel(&fam, theta, &ch)
            .map_err(|e| e.to_string())?
            .preserved;
        preserved_count += verdict as usize;
        for r in 0..20 {
            let mixed = random_kraus_recombination(&ch, 1000 * i + r).map_err(|e| e.to_string())?;
            let again = check_preservation_known_channel(&fam, theta, &mixed)
                .map_err(|e| e.to_string())?
                .preserved;
            ensure(again == verdict, || format!("pair {i}: verdict flipped under recombination {r}"))?;
        }
    }
    Ok(format!(
        "200 pairs ({preserved_count} preserving), max identity discrepancy {worst:.1e}"
    ))
}

fn criterion_7() -> Outcome {
    let mut rng = rng_from_seed(7);
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let dim = rng.random_range(2..=8);
        let count = rng.random_range(1..=dim + 2);
        let mut s: Vec<CVector> = (0..count).map(|_| random_vector(&mut rng, dim)).collect();
        if i % 2 == 0 && count >= 2 {
            // explicit dependency among the sources
            let last = (0..count - 1).fold(CVector::zeros(dim), |acc, j| {
                acc + &s[j] * c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            s[count - 1] = last;
        }
        let q0 = random_hermitian(&mut rng, dim);
        let d: Vec<CVector> = s.iter().map(|v| q0.entries() * v).collect();
        let q = hermitian_extension(&s, &d).map_err(|e| format!("family {i}: {e}"))?;
        for (sj, dj) in s.iter().zip(&d) {
            let r = (q.entries() * sj - dj).norm();
            worst = worst.max(r);
            ensure(r <= 1e-8, || format!("family {i}: residual {r:e}"))?;
        }
    }

    let (mut named_i, mut named_ii) = (0, 0);
    for i in 0..500 {
        let dim = rng.random_range(3..=8);
        let k = rng.random_range(1..dim);
        let s: Vec<CVector> = (0..k).map(|_| random_vector(&mut rng, dim)).collect();
        let q0 = random_hermitian(&mut rng, dim);
        let mut d: Vec<CVector> = s.iter().map(|v| q0.entries() * v).collect();
        if i % 2 == 0 {
            for dj in &mut d {
                *dj += random_vector(&mut rng, dim);
            }
            match hermitian_extension(&s, &d) {
                Err(ExtensionError::ConditionI { .. }) => named_i += 1,
                other => return Err(format!("violated family {i} (condition i): got {other:?}")),
            }
        } else {
            // duplicate a combination of the sources, and push its target off
            // the span of the sources: condition (i) survives, (ii) does not
            let coeffs: Vec<_> = (0..k).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let s_new = (0..k).fold(CVector::zeros(dim), |acc, j| acc + &s[j] * coeffs[j]);
            let d_comb = (0..k).fold(CVector::zeros(dim), |acc, j| acc + &d[j] * coeffs[j]);
            let basis = qfi_core::linalg::columns_to_matrix(dim, &s);
            let mut w = random_vector(&mut rng, dim);
            let proj = &basis * basis.clone().pseudo_inverse(1e-12).unwrap() * &w;
            w -= proj;
            let w = &w / real(w.norm());
            let mut s2 = s.clone();
            s2.push(s_new);
            d.push(d_comb + w);
            match hermitian_extension(&s2, &d) {
                Err(ExtensionError::ConditionII { .. }) => named_ii += 1,
                other => return Err(format!("violated family {i} (condition ii): got {other:?}")),
            }
        }
    }
    Ok(format!(
        "500 consistent families (max residual {worst:.1e}); rejected {named_i} as (i) and {named_ii} as (ii)"
    ))
}

fn series(rows: &[TimeSweepRow], n: usize) -> Vec<(f64, f64)> {
    rows.iter().filter(|r| r.n == n).map(|r| (r.t, r.crb)).collect()
}

fn argmin(v: &[(f64, f64)]) -> usize {
    v.iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap()
}

fn criterion_8() -> Outcome {
    let rows = time_sweep(&TimeSweepConfig::default(), Execution::default()).map_err(|e| e.to_string())?;
    let s1 = series(&rows, 1);
    let s5 = series(&rows, 5);
    let i1 = argmin(&s1);
    let mut failures = Vec::new();
    if i1 == 0 || i1 + 1 == s1.len() || !s1[i1 + 1..].windows(2).any(|w| w[1].1 > w[0].1) {
        failures.push(format!("n=1 curve has no interior minimum (argmin index {i1})"));
    }
    let above: Vec<f64> = s1
        .iter()
        .zip(&s5)
        .skip(i1 + 1)
        .filter(|(a, b)| b.1 >= a.1)
        .map(|(a, _)| a.0)
        .collect();
    if let (Some(first), Some(last)) = (above.first(), above.last()) {
        failures.push(format!(
            "n=5 CRB not below n=1 at {} grid times past the n=1 optimum t={:.4} (t ∈ [{first:.4}, {last:.4}]; at the optimum n=1 gives {:.4}, n=5 {:.4})",
            above.len(),
            s1[i1].0,
            s1[i1].1,
            s5[i1].1
        ));
    }
    let minima: Vec<(usize, f64)> = [1usize, 3, 5, 15]
        .iter()
        .map(|&n| {
            let s = series(&rows, n);
            (n, s[argmin(&s)].1)
        })
        .collect();
    let best = minima.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    if best.0 != 15 {
        failures.push(format!("smallest minimum belongs to n={}", best.0));
    }
    let summary = format!("n=1 optimum at t={:.4}; minimum CRB per n {minima:.4?}", s1[i1].0);
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", failures.join("; ")))
    }
}

fn criterion_9() -> Outcome {
    let cfg = SizeSweepConfig::default();
    let rows = size_sweep(&cfg, Execution::default()).map_err(|e| e.to_string())?;
    let pick = |kind: SchemeKind, pair: usize| -> Vec<&SizeSweepRow> {
        let (gx, gz) = cfg.noise[pair];
        let label = scenario_label(kind, cfg.block_size, gx, gz);
        rows.iter().filter(|r| r.scenario == label).collect()
    };
    let mut failures = Vec::new();

    let (l0, l1) = (pick(SchemeKind::Logical, 0), pick(SchemeKind::Logical, 1));
    let mut worst_pair: f64 = 0.0;
    let mut pair_misses = Vec::new();
    let mut worst_factor: f64 = 1.0;
    for (a, b) in l0.iter().zip(&l1) {
        let d = rel(a.crb, b.crb);
        worst_pair = worst_pair.max(d);
        if d > 5e-3 {
            pair_misses.push(a.n_total);
        }
        for r in [a, b] {
            worst_factor = worst_factor.max((r.crb / r.three_over_n).max(r.three_over_n / r.crb));
        }
    }
    if !pair_misses.is_empty() {
        failures.push(format!(
            "(a) logical CRBs of the two noise pairs differ by more than 0.5% at N={pair_misses:?} (max {:.3}%)",
            100.0 * worst_pair
        ));
    }
    if worst_factor > 1.25 {
        failures.push(format!("(b) logical CRB off 3/N by factor {worst_factor:.3}"));
    }
    let mut crossings = Vec::new();
    for pair in 0..cfg.noise.len() {
        let raw = pick(SchemeKind::Raw, pair);
        // smallest N from which the raw CRB stays above 1/√N
        let crossing = (0..raw.len())
            .find(|&i| raw[i..].iter().all(|r| r.crb > r.inv_sqrt_n))
            .map(|i| raw[i].n_total);
        let last = raw.last().unwrap();
        match crossing {
            Some(n) => crossings.push(n),
            None => failures.push(format!(
                "(b) raw noise pair {:?}: CRB stays below 1/√N up to N={} (CRB·√N = {:.3} there)",
                cfg.noise[pair],
                last.n_total,
                last.crb / last.inv_sqrt_n
            )),
        }
    }
    let summary = format!(
        "logical pairs differ by at most {:.3}%, max factor to 3/N {worst_factor:.3}, raw crosses 1/√N at N={crossings:?}",
        100.0 * worst_pair
    );
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", failures.join("; ")))
    }
}

fn criterion_10() -> Outcome {
    let theta = 0.3;
    let cfg = AttainmentConfig {
        theta_true: theta,
        nu: 10_000,
        trials: 200,
        seed: 10,
        interval: None,
        execution: Execution::default(),
    };
    let single = crb_attainment_report("single-qubit", &scheme_family(1), &x_basis_povm(1), None, &cfg)
        .map_err(|e| e.to_string())?;
    let set = immune_set(3);
    let ch = mixing(&set, &random_probs(&mut rng_from_seed(11), set.len()));
    let three = crb_attainment_report("three-qubit immune", &scheme_family(3), &x_basis_povm(3), Some(&ch), &cfg)
        .map_err(|e| e.to_string())?;
    for r in [&single, &three] {
        ensure((0.9..=1.15).contains(&r.ratio), || {
            format!("{}: std/CRB = {:.4} (std {:.3e}, CRB {:.3e})", r.scenario, r.ratio, r.empirical_std, r.crb)
        })?;
    }
    Ok(format!("ratios {:.4} (1 qubit), {:.4} (3 qubits)", single.ratio, three.ratio))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 10] = [
        ("closed form, parallel dephasing only", criterion_1, 1),
        ("closed form, transverse dephasing only", criterion_2, 1),
        ("analytic formula vs brute force", criterion_3, 300),
        ("three-qubit immunity without recovery", criterion_4, 10),
        ("X-basis measurement attains preserved QFI", criterion_5, 10),
        ("QFI-loss identity and Kraus-freedom invariance", criterion_6, 120),
        ("Hermitian extension round trip", criterion_7, 30),
        ("CRB versus time, block sizes 1/3/5/15", criterion_8, 10),
        ("CRB versus N, raw and logical", criterion_9, 10),
        ("Monte Carlo attainment of the CRB", criterion_10, 120),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Err(format!("panicked: {msg}"))
            });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed > Duration::from_secs(*budget) {
                Err(format!("{detail}; over the {budget} s budget"))
            } else {
                Ok(detail)
            }
        });
        let secs = elapsed.as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2}: PASS  {name} [{secs:.2} s] {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name} [{secs:.2} s] {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
