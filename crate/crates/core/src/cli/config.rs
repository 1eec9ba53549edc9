//! `key value` config files merged into the argument list.

use std::ffi::OsString;
use std::path::Path;

use crate::error::{Error, Result};

/// Parses `key value` lines; `#` starts a comment, a bare key is a flag.
pub fn parse_config(text: &str) -> Result<Vec<(String, Option<String>)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = match line.split_once(char::is_whitespace) {
            Some((k, v)) => (k, Some(v.trim().to_string())),
            None => (line, None),
        };
        let key = key.trim_start_matches("--");
        if key.is_empty() || key == "config" {
            return Err(Error::Parse { line: i + 1, msg: format!("invalid config key '{key}'") });
        }
        out.push((key.to_string(), value));
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Inserts config entries right after the subcommand so that explicit flags,
/// which come later, override them.
pub fn expand_config(args: Vec<OsString>, subcommands: &[&str]) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path))?;
    let entries = parse_config(&text)?;
    let Some(pos) = args.iter().skip(1).position(|a| subcommands.contains(&&*a.to_string_lossy())) else {
        return Ok(args);
    };
    let mut inserted = Vec::new();
    for (k, v) in entries {
        match v.as_deref() {
            None | Some("true") => inserted.push(OsString::from(format!("--{k}"))),
            Some("false") => {}
            Some(v) => {
                inserted.push(OsString::from(format!("--{k}")));
                inserted.push(OsString::from(v));
            }
        }
    }
    let at = pos + 2;
    let mut out = args[..at].to_vec();
    out.extend(inserted);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}
