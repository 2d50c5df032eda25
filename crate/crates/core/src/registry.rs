//! Parsing of `name(p1, p2, ...)` selectors shared by the named registries.

use crate::error::{Error, Result};

/// Splits `name(p1,p2,...)` or `name:p1,p2,...` into the name and its numeric parameters.
pub fn parse_name_params(spec: &str) -> Result<(String, Vec<f64>)> {
    let spec = spec.trim();
    let (name, rest) = match spec.find(['(', ':']) {
        Some(i) => (&spec[..i], spec[i + 1..].trim_end_matches(')')),
        None => (spec, ""),
    };
    let params = rest
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("parameter `{s}` of `{name}`: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok((name.trim().to_string(), params))
}
