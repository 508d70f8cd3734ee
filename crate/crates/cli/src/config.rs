//! Flat `key = value` run files. Keys are flag names (with or without the
//! leading dashes); flags given on the command line win.

use std::fs;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub entries: Vec<(String, String)>,
}

pub fn parse(text: &str) -> Result<ConfigFile, String> {
    let mut command = None;
    let mut entries = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value, got {raw:?}", no + 1))?;
        let key = k.trim().trim_start_matches('-').to_string();
        let value = v.trim().to_string();
        if key.is_empty() {
            return Err(format!("line {}: empty key", no + 1));
        }
        if key == "command" {
            command = Some(value);
        } else {
            entries.push((key, value));
        }
    }
    Ok(ConfigFile { command, entries })
}

/// Removes `--config FILE` from `args` and splices the file's entries in
/// front of the user's own flags.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or("--config needs a file name")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let cfg = parse(&text)?;
    let mut out = vec![rest.first().cloned().unwrap_or_else(|| "pam".into())];
    let has_sub = rest.len() > 1 && !rest[1].starts_with('-');
    let user = if has_sub {
        out.push(rest[1].clone());
        &rest[2..]
    } else {
        let cmd = cfg.command.clone().ok_or("no subcommand given on the command line or in the config")?;
        out.push(cmd);
        &rest[1..]
    };
    // list-valued flags accumulate in clap, so drop file entries the user repeats
    let given: Vec<&str> = user
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a))
        .collect();
    for (k, v) in cfg.entries.iter().filter(|(k, _)| !given.contains(&k.as_str())) {
        match v.as_str() {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => {
                out.push(format!("--{k}"));
                out.push(v.clone());
            }
        }
    }
    out.extend(user.iter().cloned());
    Ok(out)
}
