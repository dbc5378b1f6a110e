//! Config files become command-line tokens placed before the user's own
//! arguments, so clap validates them and later flags win.

use std::path::Path;

use serde_json::Value;

/// Value of `--config` in `args`, if present.
pub fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

fn scalar(v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        other => Err(format!("unsupported config value {other}")),
    }
}

fn push(tokens: &mut Vec<String>, key: &str, value: String) {
    let flag = format!("--{}", key.trim().replace('_', "-"));
    match value.as_str() {
        "true" => tokens.push(flag),
        "false" => {}
        _ => {
            tokens.push(flag);
            tokens.push(value);
        }
    }
}

/// Parses a JSON object or `key = value` lines (`#` starts a comment) into
/// flag tokens. Arrays become comma-separated values; booleans toggle
/// switches.
pub fn config_tokens(text: &str) -> Result<Vec<String>, String> {
    let mut tokens = Vec::new();
    if text.trim_start().starts_with('{') {
        let map: serde_json::Map<String, Value> = serde_json::from_str(text).map_err(|e| format!("config: {e}"))?;
        for (k, v) in &map {
            let value = match v {
                Value::Array(items) => items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?.join(","),
                other => scalar(other)?,
            };
            push(&mut tokens, k, value);
        }
        return Ok(tokens);
    }
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value, got {line:?}", i + 1))?;
        push(&mut tokens, k, v.trim().to_string());
    }
    Ok(tokens)
}

/// `args` with the config file's tokens inserted after the program name.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path)).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let tokens = config_tokens(&text)?;
    let mut out = Vec::with_capacity(args.len() + tokens.len());
    let mut rest = args.into_iter();
    out.extend(rest.next());
    out.extend(tokens);
    out.extend(rest);
    Ok(out)
}
