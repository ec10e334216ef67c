//! Flat `key = value` configuration files and their merge with flags.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::args::{Format, SharedArgs};
use crate::error::{CliError, CliResult};

pub const KEYS: [&str; 11] = [
    "n-total",
    "block-size",
    "gamma-x",
    "gamma-z",
    "omega",
    "time",
    "nu",
    "seed",
    "oracle",
    "format",
    "output",
];

pub fn parse(text: &str, origin: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "{origin}:{}: expected `key = value`, got `{line}`",
                i + 1
            )));
        };
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "{origin}:{}: unknown key `{key}` (known: {})",
                i + 1,
                KEYS.join(", ")
            )));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

pub fn load(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading config {}", path.display()), e))?;
    parse(&text, &path.display().to_string())
}

fn pick<T: FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str) -> CliResult<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{v}`"))),
    }
}

/// Shared flags after merging the config file underneath them.
pub fn resolve(flags: &SharedArgs) -> CliResult<SharedArgs> {
    let file = match &flags.config {
        Some(p) => load(p)?,
        None => BTreeMap::new(),
    };
    let format = match (flags.format, file.get("format")) {
        (Some(f), _) => Some(f),
        (None, Some(v)) => Some(match v.as_str() {
            "csv" => Format::Csv,
            "json" => Format::Json,
            _ => return Err(CliError::Usage(format!("config key `format`: expected csv or json, got `{v}`"))),
        }),
        (None, None) => None,
    };
    Ok(SharedArgs {
        n_total: pick(flags.n_total, &file, "n-total")?,
        block_size: pick(flags.block_size, &file, "block-size")?,
        gamma_x: pick(flags.gamma_x, &file, "gamma-x")?,
        gamma_z: pick(flags.gamma_z, &file, "gamma-z")?,
        omega: pick(flags.omega, &file, "omega")?,
        time: pick(flags.time, &file, "time")?,
        nu: pick(flags.nu, &file, "nu")?,
        seed: pick(flags.seed, &file, "seed")?,
        oracle: flags.oracle || pick::<bool>(None, &file, "oracle")?.unwrap_or(false),
        output: pick(flags.output.clone(), &file, "output")?,
        format,
        config: flags.config.clone(),
    })
}
