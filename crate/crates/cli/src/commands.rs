use std::path::Path;

use num_complex::Complex64;
use qfi_core::analytic::{crb, scheme_qfi_exact};
use qfi_core::channel::KrausChannel;
use qfi_core::estimation::{crb_attainment_report, AttainmentConfig};
use qfi_core::exec::Execution;
use qfi_core::figures::{log_grid, size_grid, size_sweep, time_sweep, SizeSweepConfig, TimeSweepConfig};
use qfi_core::linalg::{identity, CMatrix, CVector};
use qfi_core::oracle::scheme_qfi_oracle;
use qfi_core::preservation::{check_preservation_known_channel, check_testable_conditions, error_set_channel};
use qfi_core::schemes::{ghz_probe, DephasingScenario, SchemeKind};
use qfi_core::stabilizer::{immune_error_set, optimal_measurement_povm, phase_flip_code, phase_flip_errors, PauliOperator};
use qfi_core::state::{embed_pauli, HermitianObservable, ParametricFamily, PauliLabel, PureState};
use qfi_core::QfiError;
use serde_json::json;

use crate::args::{Builder, CheckArgs, FigureArgs, Format, ImmuneArgs, MonteCarloArgs, QfiArgs, Scenario, SharedArgs, Sweep};
use crate::error::{CliError, CliResult};
use crate::output::{record_to_csv, Cell, Document};

/// Shared parameters with defaults filled in and ranges checked.
#[derive(Debug, Clone, Copy)]
pub struct Params {
    pub n_total: usize,
    pub block_size: usize,
    pub gamma_x: f64,
    pub gamma_z: f64,
    pub omega: f64,
    pub time: f64,
    pub nu: u64,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn nonnegative(flag: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(usage(format!("--{flag} must be a finite number ≥ 0 (got {v})")))
    }
}

fn positive(flag: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(usage(format!("--{flag} must be a finite number > 0 (got {v})")))
    }
}

fn finite(flag: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("--{flag} must be finite (got {v})")))
    }
}

fn odd_block(flag: &str, n: usize) -> CliResult<usize> {
    if n % 2 == 1 {
        Ok(n)
    } else {
        Err(usage(format!("--{flag} must be an odd positive integer (got {n}); the phase-flip code needs odd length")))
    }
}

impl Params {
    pub fn resolve(s: &SharedArgs, default_nu: u64) -> CliResult<Self> {
        let p = Params {
            n_total: s.n_total.unwrap_or(15),
            block_size: s.block_size.unwrap_or(3),
            gamma_x: s.gamma_x.unwrap_or(1e-3),
            gamma_z: s.gamma_z.unwrap_or(0.5),
            omega: s.omega.unwrap_or(1e-3),
            time: s.time.unwrap_or(1.0),
            nu: s.nu.unwrap_or(default_nu),
        };
        if p.n_total == 0 {
            return Err(usage("--n-total must be at least 1"));
        }
        odd_block("block-size", p.block_size)?;
        nonnegative("gamma-x", p.gamma_x)?;
        nonnegative("gamma-z", p.gamma_z)?;
        finite("omega", p.omega)?;
        positive("time", p.time)?;
        if p.nu == 0 {
            return Err(usage("--nu must be at least 1"));
        }
        Ok(p)
    }

    fn describe(&self, doc: &mut Document) {
        doc.meta("n_total", self.n_total)
            .meta("block_size", self.block_size)
            .meta("gamma_x", self.gamma_x)
            .meta("gamma_z", self.gamma_z)
            .meta("omega", self.omega)
            .meta("time", self.time)
            .meta("nu", self.nu);
    }
}

// --- qfi ---------------------------------------------------------------------

pub fn qfi(shared: &SharedArgs, a: &QfiArgs) -> CliResult<Document> {
    let p = Params::resolve(shared, 1)?;
    let blocks = if a.block_sizes.is_empty() { vec![p.block_size] } else { a.block_sizes.clone() };
    for &n in &blocks {
        odd_block("block-sizes", n)?;
    }
    let mut jobs: Vec<(usize, usize, f64)> = Vec::new();
    let mut doc = Document::new("qfi");
    p.describe(&mut doc);
    doc.meta("sweep", format!("{:?}", a.sweep).to_lowercase());
    match a.sweep {
        Sweep::None => {
            if a.t_min.is_some() || a.t_max.is_some() || a.points.is_some() || a.n_max.is_some() {
                return Err(usage("--t-min/--t-max/--points/--n-max need --sweep time or --sweep size"));
            }
            jobs.extend(blocks.iter().map(|&n| (n, p.n_total, p.time)));
        }
        Sweep::Time => {
            let (lo, hi, pts) = time_grid_args(a.t_min, a.t_max, a.points)?;
            doc.meta("t_min", lo).meta("t_max", hi).meta("points", pts);
            let times = log_grid(lo, hi, pts)?;
            for &n in &blocks {
                jobs.extend(times.iter().map(|&t| (n, p.n_total, t)));
            }
        }
        Sweep::Size => {
            let n_max = a.n_max.unwrap_or(150);
            doc.meta("n_max", n_max);
            for &n in &blocks {
                let sizes = size_grid(n, n_max);
                if sizes.is_empty() {
                    return Err(usage(format!("--n-max {n_max} is below block size {n}")));
                }
                jobs.extend(sizes.into_iter().map(|size| (n, size, p.time)));
            }
        }
    }
    if shared.oracle {
        if let Some(&(_, big, _)) = jobs.iter().find(|j| j.1 > qfi_core::oracle::ORACLE_QUBIT_CAP) {
            return Err(CliError::from(QfiError::CapExceeded {
                what: "brute-force oracle",
                requested: big,
                cap: qfi_core::oracle::ORACLE_QUBIT_CAP,
            }));
        }
    }

    doc.columns = ["N", "n", "t", "qfi_raw", "qfi_logical", "crb_raw", "crb_logical"]
        .map(String::from)
        .to_vec();
    if shared.oracle {
        doc.columns.extend(["qfi_oracle_raw", "qfi_oracle_logical"].map(String::from));
    }
    let rows = Execution::default().map(&jobs, |&(n, size, t)| -> Result<Vec<Cell>, QfiError> {
        let s = DephasingScenario::new(size, n, p.gamma_x, p.gamma_z, p.omega, t)?;
        let raw = scheme_qfi_exact(SchemeKind::Raw, &s)?;
        let logical = scheme_qfi_exact(SchemeKind::Logical, &s)?;
        let mut row = vec![
            Cell::Int(size as u64),
            Cell::Int(n as u64),
            Cell::Float(t),
            Cell::Float(raw),
            Cell::Float(logical),
            Cell::Float(crb(raw, p.nu)?),
            Cell::Float(crb(logical, p.nu)?),
        ];
        if shared.oracle {
            row.push(Cell::Float(scheme_qfi_oracle(SchemeKind::Raw, &s)?));
            row.push(Cell::Float(scheme_qfi_oracle(SchemeKind::Logical, &s)?));
        }
        Ok(row)
    });
    doc.rows = rows.into_iter().collect::<Result<_, _>>()?;
    Ok(doc)
}

fn time_grid_args(t_min: Option<f64>, t_max: Option<f64>, points: Option<usize>) -> CliResult<(f64, f64, usize)> {
    let lo = positive("t-min", t_min.unwrap_or(0.01))?;
    let hi = positive("t-max", t_max.unwrap_or(20.0))?;
    if hi <= lo {
        return Err(usage(format!("--t-max ({hi}) must exceed --t-min ({lo})")));
    }
    let pts = points.unwrap_or(200);
    if pts < 2 {
        return Err(usage(format!("--points must be at least 2 (got {pts})")));
    }
    Ok((lo, hi, pts))
}

// --- check -------------------------------------------------------------------

/// A Pauli string together with where it came from.
struct Located {
    op: PauliOperator,
    text: String,
    line: usize,
    column: usize,
}

fn parse_pauli_list(text: &str, origin: &str) -> CliResult<Vec<Located>> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        if line.trim_start().starts_with('#') {
            continue;
        }
        let mut offset = 0;
        for token in line.split(',') {
            let lead = token.len() - token.trim_start().len();
            let t = token.trim();
            if !t.is_empty() {
                let column = offset + lead + 1;
                let op = t.parse::<PauliOperator>().map_err(|e| match e {
                    QfiError::Parse { column: c, message } => {
                        usage(format!("{origin}:{}:{}: {message} in `{t}`", li + 1, column + c - 1))
                    }
                    other => usage(format!("{origin}:{}:{column}: {other}", li + 1)),
                })?;
                out.push(Located {
                    op,
                    text: t.to_string(),
                    line: li + 1,
                    column,
                });
            }
            offset += token.len() + 1;
        }
    }
    Ok(out)
}

fn parse_generator(spec: &str, n: usize) -> CliResult<HermitianObservable> {
    let dim = 1usize << n;
    let mut total = CMatrix::zeros(dim, dim);
    let mut offset = 0;
    for term in spec.split('+') {
        let t = term.trim();
        let column = offset + (term.len() - term.trim_start().len()) + 1;
        offset += term.len() + 1;
        if t.is_empty() {
            return Err(usage(format!("--generator:1:{column}: empty term")));
        }
        let (coef, pauli) = match t.split_once('*') {
            Some((c, p)) => (
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| usage(format!("--generator:1:{column}: bad coefficient `{}`", c.trim())))?,
                p.trim(),
            ),
            None => (1.0, t),
        };
        let op = pauli.parse::<PauliOperator>().map_err(|e| usage(format!("--generator:1:{column}: {e}")))?;
        if op.n_qubits() != n {
            return Err(CliError::from(QfiError::DimensionMismatch {
                expected: n,
                found: op.n_qubits(),
            }));
        }
        total += op.dense()?.scale(coef);
    }
    HermitianObservable::new(total).map_err(|e| usage(format!("--generator: {e}")))
}

fn read_probe(path: &Path) -> CliResult<PureState> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let mut amps = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let l = line.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = l.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        if fields.len() > 2 {
            return Err(usage(format!("{}:{}: expected `re [im]`, got {} fields", path.display(), li + 1, fields.len())));
        }
        let mut parts = [0.0; 2];
        for (k, f) in fields.iter().enumerate() {
            let col = line.find(f).unwrap_or(0) + 1;
            parts[k] = f
                .parse()
                .map_err(|_| usage(format!("{}:{}:{col}: not a number: `{f}`", path.display(), li + 1)))?;
        }
        amps.push(Complex64::new(parts[0], parts[1]));
    }
    if amps.len() < 2 || !amps.len().is_power_of_two() {
        return Err(usage(format!(
            "{}: need 2^n amplitudes, found {}",
            path.display(),
            amps.len()
        )));
    }
    Ok(PureState::normalized(CVector::from_vec(amps))?)
}

pub fn check(a: &CheckArgs) -> CliResult<serde_json::Value> {
    if !a.theta.is_finite() {
        return Err(usage("--theta must be finite"));
    }
    let (probe, n, label) = match &a.probe_file {
        Some(path) => {
            let psi = read_probe(path)?;
            let n = psi.n_qubits();
            (psi, n, format!("file:{}", path.display()))
        }
        None => {
            let n = a.qubits;
            if n == 0 || n > 9 {
                return Err(usage(format!("--qubits must be between 1 and 9 (got {n})")));
            }
            match a.builder.unwrap_or(Builder::Theorem3) {
                Builder::Theorem3 => (PureState::plus(n)?, n, "theorem3".to_string()),
                Builder::Ghz => (ghz_probe(n)?, n, "ghz".to_string()),
            }
        }
    };
    let generator = match (&a.generator, a.builder) {
        (Some(spec), _) => parse_generator(spec, n)?,
        (None, Some(Builder::Ghz)) => {
            let terms = (0..n)
                .map(|q| embed_pauli(PauliLabel::Z, q, n).map(|h| h.scale(0.5)))
                .collect::<Result<Vec<_>, _>>()?;
            HermitianObservable::sum(1 << n, terms.iter())
        }
        (None, _) => HermitianObservable::new(PauliOperator::z_all(n).dense()?)?,
    };

    let (text, origin) = match (&a.errors, &a.errors_file) {
        (Some(s), _) => (s.clone(), "--errors".to_string()),
        (None, Some(p)) => (
            std::fs::read_to_string(p).map_err(|e| CliError::io(format!("reading {}", p.display()), e))?,
            p.display().to_string(),
        ),
        (None, None) => return Err(usage("give the error set with --errors or --errors-file")),
    };
    let listed = parse_pauli_list(&text, &origin)?;
    if listed.is_empty() {
        return Err(usage(format!("{origin}: no Pauli strings found")));
    }
    for l in &listed {
        if l.op.n_qubits() != n {
            return Err(usage(format!(
                "{origin}:{}:{}: `{}` acts on {} qubits but the probe has {n}",
                l.line,
                l.column,
                l.text,
                l.op.n_qubits()
            )));
        }
    }
    let mut mats: Vec<CMatrix> = Vec::new();
    if !a.no_identity {
        mats.push(identity(1 << n));
    }
    for l in &listed {
        mats.push(l.op.dense()?);
    }

    let family = ParametricFamily::new(probe, generator)?;
    let testable = check_testable_conditions(&family, a.theta, &mats)?;
    let channel = error_set_channel(&mats)?;
    let report = check_preservation_known_channel(&family, a.theta, &channel)?;
    Ok(json!({
        "probe": label,
        "qubits": n,
        "theta": a.theta,
        "errors": listed.iter().map(|l| l.text.clone()).collect::<Vec<_>>(),
        "identity_added": !a.no_identity,
        "cond_i": testable.cond_i,
        "cond_ii": testable.cond_ii,
        "preserved": testable.preserved(),
        "cond_i_violation": testable.cond_i_violation,
        "cond_ii_residual": testable.cond_ii_residual,
        "residuals": report.residuals,
        "max_residual": report.max_residual,
        "qfi_before": report.qfi_before,
        "qfi_after": report.qfi_after,
        "qfi_loss": report.qfi_loss,
    }))
}

// --- immune-set --------------------------------------------------------------

pub fn immune_set(a: &ImmuneArgs) -> CliResult<Vec<String>> {
    let n = a.qubits;
    if n % 2 == 0 || n > 15 {
        return Err(usage(format!("--qubits must be odd, n = 2t+1 ≤ 15 (got {n})")));
    }
    let code = phase_flip_code(n)?;
    let set = immune_error_set(&code, &phase_flip_errors(n, (n - 1) / 2), code.logical_x())?;
    Ok(set.iter().map(|e| e.to_string()).collect())
}

// --- figure ------------------------------------------------------------------

fn parse_noise(spec: &str) -> CliResult<Vec<(f64, f64)>> {
    spec.split(',')
        .map(|pair| {
            let (x, z) = pair
                .split_once(':')
                .ok_or_else(|| usage(format!("--noise: expected `gx:gz`, got `{pair}`")))?;
            let parse = |s: &str, flag: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| usage(format!("--noise: bad {flag} `{s}`")))
                    .and_then(|v| nonnegative("noise", v))
            };
            Ok((parse(x, "gamma_x")?, parse(z, "gamma_z")?))
        })
        .collect()
}

pub fn figure(shared: &SharedArgs, a: &FigureArgs) -> CliResult<Document> {
    let mut doc = Document::new(&format!("figure {}", a.which));
    let nu = shared.nu.unwrap_or(1);
    if nu == 0 {
        return Err(usage("--nu must be at least 1"));
    }
    if a.which == 3 {
        let d = TimeSweepConfig::default();
        let (t_min, t_max, points) = time_grid_args(a.t_min.or(Some(d.t_min)), a.t_max.or(Some(d.t_max)), a.points.or(Some(d.points)))?;
        let cfg = TimeSweepConfig {
            n_total: shared.n_total.unwrap_or(d.n_total),
            omega: finite("omega", shared.omega.unwrap_or(d.omega))?,
            gamma_x: nonnegative("gamma-x", shared.gamma_x.unwrap_or(d.gamma_x))?,
            gamma_z: nonnegative("gamma-z", shared.gamma_z.unwrap_or(d.gamma_z))?,
            block_sizes: if a.block_sizes.is_empty() { d.block_sizes } else { a.block_sizes.clone() },
            t_min,
            t_max,
            points,
            nu,
        };
        for &n in &cfg.block_sizes {
            odd_block("block-sizes", n)?;
        }
        doc.meta("n_total", cfg.n_total)
            .meta("omega", cfg.omega)
            .meta("gamma_x", cfg.gamma_x)
            .meta("gamma_z", cfg.gamma_z)
            .meta("block_sizes", format!("{:?}", cfg.block_sizes))
            .meta("t_grid", format!("log-spaced [{t_min}, {t_max}] x {points}"))
            .meta("nu", nu);
        doc.columns = ["t", "n", "crb"].map(String::from).to_vec();
        doc.rows = time_sweep(&cfg, Execution::default())?
            .into_iter()
            .map(|r| vec![Cell::Float(r.t), Cell::Int(r.n as u64), Cell::Float(r.crb)])
            .collect();
    } else {
        let d = SizeSweepConfig::default();
        let noise = match (&a.noise, shared.gamma_x, shared.gamma_z) {
            (Some(spec), _, _) => parse_noise(spec)?,
            (None, None, None) => d.noise,
            (None, gx, gz) => vec![(
                nonnegative("gamma-x", gx.unwrap_or(0.0))?,
                nonnegative("gamma-z", gz.unwrap_or(0.0))?,
            )],
        };
        let cfg = SizeSweepConfig {
            omega: finite("omega", shared.omega.unwrap_or(d.omega))?,
            time: positive("time", shared.time.unwrap_or(d.time))?,
            noise,
            block_size: odd_block("block-size", shared.block_size.unwrap_or(d.block_size))?,
            n_max: a.n_max.unwrap_or(d.n_max),
            nu,
        };
        doc.meta("omega", cfg.omega)
            .meta("time", cfg.time)
            .meta("noise", format!("{:?}", cfg.noise))
            .meta("block_size", cfg.block_size)
            .meta("n_grid", format!("odd multiples of {} up to {}", cfg.block_size, cfg.n_max))
            .meta("nu", nu);
        doc.columns = ["N", "scenario", "crb", "1/N", "1/sqrt(N)", "3/N"].map(String::from).to_vec();
        doc.rows = size_sweep(&cfg, Execution::default())?
            .into_iter()
            .map(|r| {
                vec![
                    Cell::Int(r.n_total as u64),
                    Cell::Text(r.scenario),
                    Cell::Float(r.crb),
                    Cell::Float(r.inv_n),
                    Cell::Float(r.inv_sqrt_n),
                    Cell::Float(r.three_over_n),
                ]
            })
            .collect();
    }
    Ok(doc)
}

// --- montecarlo --------------------------------------------------------------

pub fn montecarlo(shared: &SharedArgs, a: &MonteCarloArgs) -> CliResult<serde_json::Value> {
    let nu = shared.nu.unwrap_or(10_000);
    if nu == 0 {
        return Err(usage("--nu must be at least 1"));
    }
    if a.trials < 2 {
        return Err(usage(format!("--trials must be at least 2 (got {})", a.trials)));
    }
    finite("theta", a.theta)?;
    if !(0.0..=1.0).contains(&a.mix) {
        return Err(usage(format!("--mix must lie in [0, 1] (got {})", a.mix)));
    }
    let n = match a.scenario {
        Scenario::SingleQubit => 1,
        Scenario::Theorem3 => {
            if a.qubits % 2 == 0 || a.qubits > 7 {
                return Err(usage(format!("--qubits must be odd and at most 7 (got {})", a.qubits)));
            }
            a.qubits
        }
    };
    let family = ParametricFamily::new(
        PureState::plus(n)?,
        HermitianObservable::new(PauliOperator::z_all(n).dense()?)?,
    )?;
    let code = phase_flip_code(n)?;
    let povm = optimal_measurement_povm(&code, code.logical_x())?;
    let (label, channel) = match a.scenario {
        Scenario::SingleQubit => ("single-qubit".to_string(), None),
        Scenario::Theorem3 => {
            let set = immune_error_set(&code, &phase_flip_errors(n, (n - 1) / 2), code.logical_x())?;
            let others = set.len() - 1;
            let mut ops = vec![identity(1 << n).scale((1.0 - a.mix).sqrt())];
            for e in &set[1..] {
                ops.push(e.dense()?.scale((a.mix / others as f64).sqrt()));
            }
            (format!("theorem3(n={n},mix={})", a.mix), Some(KrausChannel::trace_preserving(ops)?))
        }
    };
    let cfg = AttainmentConfig {
        theta_true: a.theta,
        nu: nu as usize,
        trials: a.trials,
        seed: shared.seed.unwrap_or(0),
        interval: None,
        execution: Execution::default(),
    };
    let report = crb_attainment_report(
        &label,
        &family,
        &povm,
        channel.as_ref().map(|c| c as &(dyn qfi_core::channel::SuperOperator + Sync)),
        &cfg,
    )?;
    Ok(serde_json::to_value(report).expect("report serializes"))
}

pub fn render_record(command: &str, record: &serde_json::Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(record).expect("record serializes");
            s.push('\n');
            s
        }
        Format::Csv => record_to_csv(command, record),
    }
}
