//! `key=value` config files that mirror the command-line flags.
//!
//! Each line `key=value` becomes `--key value`; `key=true` becomes a bare
//! `--key` and `key=false` is dropped. Blank lines and `#` comments are
//! ignored. The generated flags are placed before the user's own flags, so a
//! flag given on the command line wins.

use std::fs;
use std::path::Path;

use crate::error::{CliError, CliResult};

pub fn parse(text: &str) -> CliResult<Vec<String>> {
    let mut args = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Validation(format!("config line {}: expected key=value", n + 1))
        })?;
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        if key.is_empty() {
            return Err(CliError::Validation(format!(
                "config line {}: empty key",
                n + 1
            )));
        }
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            _ => {
                args.push(format!("--{key}"));
                args.push(value.to_string());
            }
        }
    }
    Ok(args)
}

/// Takes `--config PATH` out of `argv` and splices the file's flags in right
/// after the subcommand name.
pub fn expand(argv: Vec<String>, subcommands: &[&str]) -> CliResult<Vec<String>> {
    let mut out = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            path = Some(
                it.next()
                    .ok_or_else(|| CliError::Validation("--config needs a file path".into()))?,
            );
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            out.push(arg);
        }
    }
    let Some(path) = path else {
        return Ok(out);
    };
    let path = Path::new(&path);
    let text = fs::read_to_string(path).map_err(CliError::file(path))?;
    let extra = parse(&text)?;
    let at = out
        .iter()
        .position(|a| subcommands.contains(&a.as_str()))
        .map(|i| i + 1)
        .unwrap_or(out.len());
    out.splice(at..at, extra);
    Ok(out)
}
