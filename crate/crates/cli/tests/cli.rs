use std::path::Path;
use std::process::{Command, Output};

fn qfi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfi")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = qfi(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows of a CSV document, split on commas outside quotes.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let split = |l: &str| {
        let mut cells = Vec::new();
        let mut cur = String::new();
        let mut quoted = false;
        for ch in l.chars() {
            match ch {
                '"' => quoted = !quoted,
                ',' if !quoted => cells.push(std::mem::take(&mut cur)),
                c => cur.push(c),
            }
        }
        cells.push(cur);
        cells
    };
    let header = split(lines.next().expect("header"));
    (header, lines.map(split).collect())
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&stdout(args)).expect("valid json")
}

#[test]
fn figure3_config_gives_four_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fig3.conf");
    std::fs::write(&cfg, "# figure 3\nn_total = 15\ngamma-x = 1e-3\ngamma-z = 0.5\nomega = 1e-3\n").unwrap();
    let text = stdout(&["--config", cfg.to_str().unwrap(), "figure", "3", "--points", "20"]);
    let (h, rows) = csv_rows(&text);
    let n = col(&h, "n");
    let mut series: Vec<&str> = rows.iter().map(|r| r[n].as_str()).collect();
    series.dedup();
    assert_eq!(series, ["1", "3", "5", "15"]);
    assert_eq!(rows.len(), 80);
}

#[test]
fn noiseless_bound_is_standard_limit_per_block() {
    let text = stdout(&[
        "--gamma-x", "0", "--gamma-z", "0", "--omega", "0.2", "--n-total", "15",
        "qfi", "--sweep", "time", "--block-sizes", "1,3,5,15", "--t-min", "0.5", "--t-max", "2", "--points", "5",
    ]);
    let (h, rows) = csv_rows(&text);
    let (cn, cb, ct) = (col(&h, "n"), col(&h, "N"), col(&h, "t"));
    for r in &rows {
        let n: f64 = r[cn].parse().unwrap();
        let big: f64 = r[cb].parse().unwrap();
        let t: f64 = r[ct].parse().unwrap();
        let crb_raw: f64 = r[col(&h, "crb_raw")].parse().unwrap();
        let crb_log: f64 = r[col(&h, "crb_logical")].parse().unwrap();
        let expect_raw = 1.0 / (big * t);
        assert!((crb_raw - expect_raw).abs() < 1e-9 * expect_raw, "{r:?}");
        let m = (big / n).floor();
        let expect_log = if n == 1.0 { expect_raw } else { 1.0 / (m * t) };
        assert!((crb_log - expect_log).abs() < 1e-9 * expect_log, "{r:?}");
    }
}

#[test]
fn oracle_agrees_on_three_qubits() {
    let text = stdout(&["--n-total", "3", "--oracle", "qfi"]);
    let (h, rows) = csv_rows(&text);
    for (a, b) in [("qfi_raw", "qfi_oracle_raw"), ("qfi_logical", "qfi_oracle_logical")] {
        let x: f64 = rows[0][col(&h, a)].parse().unwrap();
        let y: f64 = rows[0][col(&h, b)].parse().unwrap();
        assert!((x - y).abs() < 1e-7, "{a}: {x} vs {y}");
    }
}

#[test]
fn oracle_above_cap_is_numerical_error() {
    let out = qfi(&["--n-total", "30", "--oracle", "qfi"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_known_error_sets() {
    let v = json(&["check", "--builder", "theorem3", "--errors", "ZII,IZI,IIZ,XXX"]);
    assert_eq!(v["preserved"], true);
    let v = json(&["check", "--errors", "III"]);
    assert_eq!(v["preserved"], true);
    assert!(v["max_residual"].as_f64().unwrap() < 1e-12);
    assert!(v["qfi_loss"].as_f64().unwrap().abs() < 1e-12);
    let v = json(&["check", "--errors", "ZZZ"]);
    assert_eq!(v["preserved"], false);
}

#[test]
fn check_reports_parse_position() {
    let out = qfi(&["check", "--errors", "ZII, IQI"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1:"), "{err}");
}

#[test]
fn immune_sets() {
    assert_eq!(stdout(&["immune-set", "--qubits", "3"]).lines().count(), 8);
    assert_eq!(stdout(&["immune-set", "--qubits", "1"]).lines().collect::<Vec<_>>(), ["I", "X"]);
    let five = stdout(&["immune-set", "--qubits", "5"]);
    assert_eq!(five.lines().count(), 32);
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("e5.txt");
    std::fs::write(&file, &five).unwrap();
    let v = json(&["check", "--qubits", "5", "--errors-file", file.to_str().unwrap()]);
    assert_eq!(v["preserved"], true);
}

#[test]
fn figure4_is_deterministic_and_logical_series_close() {
    let a = stdout(&["figure", "4"]);
    assert_eq!(a, stdout(&["figure", "4"]));
    assert!(a.starts_with("# "));
    let (h, rows) = csv_rows(&a);
    assert_eq!(h, ["N", "scenario", "crb", "1/N", "1/sqrt(N)", "3/N"]);
    let logical: Vec<&Vec<String>> = rows.iter().filter(|r| r[1].starts_with("logical3")).collect();
    let half = logical.len() / 2;
    assert!(half > 0);
    for (x, y) in logical[..half].iter().zip(&logical[half..]) {
        assert_eq!(x[0], y[0]);
        let (p, q): (f64, f64) = (x[2].parse().unwrap(), y[2].parse().unwrap());
        let n: f64 = x[0].parse().unwrap();
        // the two noise levels separate slowly with N
        if n <= 100.0 {
            assert!((p - q).abs() / p.min(q) < 5e-3, "N={n}: {p} vs {q}");
        }
    }
}

#[test]
fn montecarlo_attains_bound_and_is_reproducible() {
    let v = json(&["montecarlo"]);
    let ratio = v["ratio"].as_f64().unwrap();
    assert!((0.85..=1.2).contains(&ratio), "ratio {ratio}");
    let a = qfi(&["--seed", "11", "montecarlo", "--trials", "30"]).stdout;
    let b = qfi(&["--seed", "11", "montecarlo", "--trials", "30"]).stdout;
    assert_eq!(a, b);
    assert_eq!(qfi(&["montecarlo", "--trials", "0"]).status.code(), Some(1));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "n-total = 9\ntime = 2\n").unwrap();
    let c = cfg.to_str().unwrap();
    let (h, rows) = csv_rows(&stdout(&["--config", c, "qfi"]));
    assert_eq!(rows[0][col(&h, "N")], "9");
    let (h, rows) = csv_rows(&stdout(&["--config", c, "--n-total", "21", "qfi"]));
    assert_eq!(rows[0][col(&h, "N")], "21");
    assert_eq!(rows[0][col(&h, "t")].parse::<f64>().unwrap(), 2.0);

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(qfi(&["--config", c, "qfi"]).status.code(), Some(1));
}

#[test]
fn exit_codes_and_output_file() {
    assert_eq!(qfi(&["--help"]).status.code(), Some(0));
    assert_eq!(qfi(&["qfi", "--block-sizes", "2"]).status.code(), Some(1));
    assert_eq!(qfi(&["--gamma-z", "-1", "qfi"]).status.code(), Some(1));
    assert_eq!(qfi(&["nonsense"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q.json");
    stdout(&["--format", "json", "--output", out.to_str().unwrap(), "qfi"]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(Path::new(&out)).unwrap()).unwrap();
    assert!(v["rows"].as_array().unwrap().len() == 1);
    assert_eq!(v["metadata"]["command"], "qfi");
}
