//! JSON file formats and canonical output.
//!
//! Complex entries are `[re, im]` pairs; matrices are arrays of rows.
//!
//! ```json
//! {"dim_in": 2, "dim_out": 2, "representation": "kraus",
//!  "kraus": [[[[1, 0], [0, 0]], [[0, 0], [0, 0]]], [[[0, 0], [0, 0]], [[0, 0], [1, 0]]]]}
//! ```
//!
//! Canonical output has sorted keys, floats with 17 significant digits and
//! two-space indentation.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::channel::{verify_cptp, Channel, HolevoChannel, KrausChannel, WeightedChoi};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerances, C64};
use crate::nullspace::SubspaceSpec;

fn parse_err(path: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        message: message.into(),
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    (0..m.cols())
                        .map(|j| {
                            let z = m[(i, j)];
                            Value::Array(vec![Value::from(z.re), Value::from(z.im)])
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn vector_to_json(v: &[C64]) -> Value {
    Value::Array(
        v.iter()
            .map(|z| Value::Array(vec![Value::from(z.re), Value::from(z.im)]))
            .collect(),
    )
}

fn real_from_json(v: &Value, path: &str) -> Result<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| parse_err(path, format!("expected a number, found {v}")))?;
    if !x.is_finite() {
        return Err(parse_err(path, "number is not finite"));
    }
    Ok(x)
}

fn complex_from_json(v: &Value, path: &str) -> Result<C64> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => Ok(C64::new(
            real_from_json(re, &format!("{path}[0]"))?,
            real_from_json(im, &format!("{path}[1]"))?,
        )),
        _ => Err(parse_err(path, "expected a [re, im] pair")),
    }
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| parse_err(path, "expected an array"))
}

/// Reads a matrix and checks it is `rows x cols`.
pub fn matrix_from_json(v: &Value, path: &str, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    let rs = array(v, path)?;
    if rs.len() != rows {
        return Err(parse_err(
            path,
            format!("expected {rows} rows, found {}", rs.len()),
        ));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (i, row) in rs.iter().enumerate() {
        let rp = format!("{path}[{i}]");
        let entries = array(row, &rp)?;
        if entries.len() != cols {
            return Err(parse_err(
                &rp,
                format!("expected {cols} entries, found {}", entries.len()),
            ));
        }
        for (j, z) in entries.iter().enumerate() {
            data.push(complex_from_json(z, &format!("{rp}[{j}]"))?);
        }
    }
    ComplexMatrix::new(rows, cols, data)
}

fn matrix_list(v: &Value, path: &str, rows: usize, cols: usize) -> Result<Vec<ComplexMatrix>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(k, m)| matrix_from_json(m, &format!("{path}[{k}]"), rows, cols))
        .collect()
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| parse_err(path, format!("missing field \"{key}\"")))
}

fn dimension(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    let v = field(obj, key, "$")?;
    match v.as_u64() {
        Some(n) if n >= 1 => Ok(n as usize),
        _ => Err(parse_err(key, "expected a positive integer")),
    }
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| parse_err("$", e.to_string()))
}

/// Builds a channel from its JSON form, checking shapes only.
pub fn channel_from_json(v: &Value) -> Result<Channel> {
    let obj = v
        .as_object()
        .ok_or_else(|| parse_err("$", "expected an object"))?;
    let d = dimension(obj, "dim_in")?;
    let e = dimension(obj, "dim_out")?;
    let tag = field(obj, "representation", "$")?
        .as_str()
        .ok_or_else(|| parse_err("representation", "expected a string"))?;
    for other in ["kraus", "holevo", "choi"] {
        if other != tag && obj.contains_key(other) {
            return Err(parse_err(
                other,
                format!("payload \"{other}\" present but representation is \"{tag}\""),
            ));
        }
    }
    match tag {
        "kraus" => {
            let ops = matrix_list(field(obj, "kraus", "$")?, "kraus", e, d)?;
            Ok(Channel::Kraus(
                KrausChannel::new(d, e, ops).map_err(|err| parse_err("kraus", err.to_string()))?,
            ))
        }
        "holevo" => {
            let h = field(obj, "holevo", "$")?
                .as_object()
                .ok_or_else(|| parse_err("holevo", "expected an object"))?;
            let states = matrix_list(field(h, "states", "holevo")?, "holevo.states", e, e)?;
            let effects = matrix_list(field(h, "effects", "holevo")?, "holevo.effects", d, d)?;
            if states.len() != effects.len() {
                return Err(parse_err(
                    "holevo",
                    format!("{} states but {} effects", states.len(), effects.len()),
                ));
            }
            if states.is_empty() {
                return Err(parse_err("holevo.states", "at least one pair is required"));
            }
            Ok(Channel::Holevo(HolevoChannel::from_parts(
                d, e, states, effects,
            )?))
        }
        "choi" => {
            let c = field(obj, "choi", "$")?
                .as_object()
                .ok_or_else(|| parse_err("choi", "expected an object"))?;
            let weights = array(field(c, "weights", "choi")?, "choi.weights")?
                .iter()
                .enumerate()
                .map(|(i, w)| real_from_json(w, &format!("choi.weights[{i}]")))
                .collect::<Result<Vec<f64>>>()?;
            let sigma = matrix_from_json(field(c, "sigma", "choi")?, "choi.sigma", d * e, d * e)?;
            let w = WeightedChoi::new(d, e, weights, sigma).map_err(|err| match err {
                Error::BadWeights(m) => parse_err("choi.weights", m),
                other => other,
            })?;
            Ok(Channel::Choi(w))
        }
        other => Err(parse_err(
            "representation",
            format!("unknown representation \"{other}\" (expected kraus, holevo or choi)"),
        )),
    }
}

/// Rejects channels that are not CPTP, naming the offending field.
pub fn validate_channel(ch: &Channel, tol: &Tolerances) -> Result<()> {
    if let Channel::Holevo(h) = ch {
        h.validate(tol)?;
    }
    let rep = verify_cptp(ch, tol);
    let field = match ch {
        Channel::Kraus(_) => "kraus",
        Channel::Holevo(_) => "holevo",
        Channel::Choi(_) => "choi.sigma",
    };
    if rep.tp_residual > tol.eps_recon {
        return Err(Error::Validation {
            path: field.into(),
            message: format!("not trace preserving (residual {:.3e})", rep.tp_residual),
        });
    }
    if rep.cp_lambda_min < -tol.eps_psd {
        return Err(Error::Validation {
            path: field.into(),
            message: format!(
                "not completely positive (Choi lambda_min {:.3e})",
                rep.cp_lambda_min
            ),
        });
    }
    Ok(())
}

pub fn parse_channel_str(text: &str, verify: bool, tol: &Tolerances) -> Result<Channel> {
    let ch = channel_from_json(&parse_json(text)?)?;
    if verify {
        validate_channel(&ch, tol)?;
    }
    Ok(ch)
}

pub fn parse_channel_file(path: &Path, verify: bool, tol: &Tolerances) -> Result<Channel> {
    parse_channel_str(&std::fs::read_to_string(path)?, verify, tol)
}

pub fn channel_to_json(ch: &Channel) -> Value {
    let mut obj = Map::new();
    obj.insert("dim_in".into(), Value::from(ch.dim_in()));
    obj.insert("dim_out".into(), Value::from(ch.dim_out()));
    obj.insert("representation".into(), Value::from(ch.representation()));
    match ch {
        Channel::Kraus(k) => {
            obj.insert(
                "kraus".into(),
                Value::Array(k.operators().iter().map(matrix_to_json).collect()),
            );
        }
        Channel::Holevo(h) => {
            let mut p = Map::new();
            p.insert(
                "states".into(),
                Value::Array(h.states().map(matrix_to_json).collect()),
            );
            p.insert(
                "effects".into(),
                Value::Array(h.effects().map(matrix_to_json).collect()),
            );
            obj.insert("holevo".into(), Value::Object(p));
        }
        Channel::Choi(c) => {
            let mut p = Map::new();
            p.insert("weights".into(), Value::from(c.weights().to_vec()));
            p.insert("sigma".into(), matrix_to_json(c.sigma()));
            obj.insert("choi".into(), Value::Object(p));
        }
    }
    Value::Object(obj)
}

pub fn write_channel_file(path: &Path, ch: &Channel) -> Result<()> {
    std::fs::write(path, to_canonical_json(&channel_to_json(ch)))?;
    Ok(())
}

pub fn subspace_from_json(v: &Value, tol: &Tolerances) -> Result<SubspaceSpec> {
    let obj = v
        .as_object()
        .ok_or_else(|| parse_err("$", "expected an object"))?;
    let d = dimension(obj, "dim")?;
    let gens = matrix_list(field(obj, "generators", "$")?, "generators", d, d)?;
    SubspaceSpec::new(d, gens, tol)
}

pub fn parse_subspace_file(path: &Path, tol: &Tolerances) -> Result<SubspaceSpec> {
    subspace_from_json(&parse_json(&std::fs::read_to_string(path)?)?, tol)
}

pub fn subspace_to_json(spec: &SubspaceSpec) -> Value {
    let mut obj = Map::new();
    obj.insert("dim".into(), Value::from(spec.dim()));
    obj.insert(
        "generators".into(),
        Value::Array(spec.generators().iter().map(matrix_to_json).collect()),
    );
    Value::Object(obj)
}

/// Reads `{"projection": matrix}`; the size is taken from the matrix.
pub fn parse_projection_file(path: &Path) -> Result<ComplexMatrix> {
    let v = parse_json(&std::fs::read_to_string(path)?)?;
    let p = v
        .as_object()
        .ok_or_else(|| parse_err("$", "expected an object"))
        .and_then(|o| field(o, "projection", "$"))?;
    let n = array(p, "projection")?.len();
    if n == 0 {
        return Err(parse_err("projection", "empty matrix"));
    }
    matrix_from_json(p, "projection", n, n)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// 17 significant digits; `-0` is written as `0`.
fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                write!(out, "{u}").unwrap();
            } else if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
            } else if items.iter().all(is_scalar) {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, indent);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (k, item) in items.iter().enumerate() {
                    out.push_str(&"  ".repeat(indent + 1));
                    write_value(out, item, indent + 1);
                    out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
                }
                out.push_str(&"  ".repeat(indent));
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                out.push_str(&"  ".repeat(indent + 1));
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*key], indent + 1);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
    }
}

/// Canonical text of a JSON value, ending in a newline.
pub fn to_canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}
