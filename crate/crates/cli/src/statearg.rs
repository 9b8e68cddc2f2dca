//! State specs on the command line.
//!
//! Accepted forms:
//!
//! ```text
//! fock:5                       positional shorthand for the main parameter
//! cat:alpha=2,parity=odd       named parameters
//! number_phase:mu=0.3,spacing=4
//! fock_superposition:levels=6/10
//! @probe.json                  a serialized StateSpec
//! ```

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use phasesense::zoo::StateSpec;
use serde_json::{Map, Value};

/// Canonical family tag for a user-facing name.
fn family_tag(name: &str) -> Option<&'static str> {
    Some(match name {
        "fock" => "fock",
        "gaussian" | "squeezed" | "gaussian_squeezed" | "squeezed_vacuum" => "gaussian_squeezed",
        "cat" => "cat",
        "moon" => "moon",
        "gkp" => "gkp",
        "compass" => "compass",
        "number_phase" | "np" => "number_phase",
        "fock_superposition" | "superposition" => "fock_superposition",
        "coherent" => "coherent",
        _ => return None,
    })
}

fn shorthand_key(tag: &str) -> Option<&'static str> {
    Some(match tag {
        "fock" => "n",
        "gaussian_squeezed" => "mean_n",
        "cat" | "compass" | "coherent" => "alpha",
        "gkp" => "delta",
        "fock_superposition" => "levels",
        _ => return None,
    })
}

fn parse_value(key: &str, raw: &str) -> Result<Value> {
    if key == "levels" {
        let levels = raw
            .split(['/', ' '])
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<u64>().map(Value::from))
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("bad level list {raw:?}"))?;
        return Ok(Value::Array(levels));
    }
    if let Ok(i) = raw.parse::<u64>() {
        return Ok(Value::from(i));
    }
    if let Ok(x) = raw.parse::<f64>() {
        return Ok(Value::from(x));
    }
    Ok(Value::from(raw))
}

pub fn parse_state(text: &str) -> Result<StateSpec> {
    let text = text.trim();
    if let Some(path) = text.strip_prefix('@') {
        return load_state_file(Path::new(path));
    }
    let (name, params) = text.split_once(':').unwrap_or((text, ""));
    let name = name.trim().to_ascii_lowercase().replace('-', "_");
    let tag = family_tag(&name).ok_or_else(|| anyhow!("unknown state family {name:?}"))?;
    let mut obj = Map::new();
    obj.insert("family".into(), Value::from(tag));
    for part in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, raw) = match part.split_once('=') {
            Some((k, v)) => (k.trim().to_string(), v.trim()),
            None => {
                let key = shorthand_key(tag).ok_or_else(|| anyhow!("{tag} needs named parameters, got {part:?}"))?;
                if obj.contains_key(key) {
                    bail!("parameter {key} given twice in {text:?}");
                }
                (key.to_string(), part)
            }
        };
        let key = if key == "n" && tag == "gaussian_squeezed" { "mean_n".to_string() } else { key };
        obj.insert(key.clone(), parse_value(&key, raw)?);
    }
    let spec: StateSpec =
        serde_json::from_value(Value::Object(obj)).with_context(|| format!("cannot build a state from {text:?}"))?;
    spec.validate().with_context(|| format!("invalid state {text:?}"))?;
    Ok(spec)
}

pub fn load_state_file(path: &Path) -> Result<StateSpec> {
    let body = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec: StateSpec = serde_json::from_str(&body).with_context(|| format!("parsing {}", path.display()))?;
    spec.validate()?;
    Ok(spec)
}

/// Short label used in output rows, e.g. `fock:5`.
pub fn label(spec: &StateSpec) -> String {
    let v = serde_json::to_value(spec).expect("state specs serialize");
    let obj = v.as_object().expect("tagged enum");
    let params: Vec<String> = obj
        .iter()
        .filter(|(k, _)| k.as_str() != "family")
        .map(|(k, v)| match v {
            Value::Array(items) => {
                format!("{k}={}", items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("/"))
            }
            Value::String(s) => format!("{k}={s}"),
            other => format!("{k}={other}"),
        })
        .collect();
    format!("{}:{}", spec.family_name(), params.join(","))
}
