//! Deterministic CSV / JSON-lines export and run manifests.
//!
//! Records are any `Serialize` value. Objects are flattened to dotted column
//! names in CSV, keys are always emitted in sorted order, and floats are
//! rounded to 12 significant digits so identical records give identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_value::Value;
use sha2::{Digest, Sha256};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

/// Canonical form of one serialized value.
#[derive(Debug, Clone)]
pub enum Field {
    Null,
    Bool(bool),
    Int(i128),
    Float(f64),
    Str(String),
    Seq(Vec<Field>),
    Map(BTreeMap<String, Field>),
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Field::Null, Field::Null) => true,
            (Field::Bool(a), Field::Bool(b)) => a == b,
            (Field::Int(a), Field::Int(b)) => a == b,
            (Field::Float(a), Field::Float(b)) => a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()),
            (Field::Int(a), Field::Float(b)) | (Field::Float(b), Field::Int(a)) => *a as f64 == *b,
            (Field::Str(a), Field::Str(b)) => a == b,
            (Field::Seq(a), Field::Seq(b)) => a == b,
            (Field::Map(a), Field::Map(b)) => a == b,
            _ => false,
        }
    }
}

pub type Record = BTreeMap<String, Field>;

/// Rounds to 12 significant digits; the representation written to disk.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn canonical(v: Value, round: bool) -> Result<Field> {
    let rnd = |x: f64| if round { round_sig12(x) } else { x };
    Ok(match v {
        Value::Unit => Field::Null,
        Value::Bool(b) => Field::Bool(b),
        Value::U8(x) => Field::Int(x.into()),
        Value::U16(x) => Field::Int(x.into()),
        Value::U32(x) => Field::Int(x.into()),
        Value::U64(x) => Field::Int(x.into()),
        Value::I8(x) => Field::Int(x.into()),
        Value::I16(x) => Field::Int(x.into()),
        Value::I32(x) => Field::Int(x.into()),
        Value::I64(x) => Field::Int(x.into()),
        Value::F32(x) => Field::Float(rnd(x.into())),
        Value::F64(x) => Field::Float(rnd(x)),
        Value::Char(c) => Field::Str(c.to_string()),
        Value::String(s) => Field::Str(s),
        Value::Bytes(b) => Field::Seq(b.into_iter().map(|x| Field::Int(x.into())).collect()),
        Value::Option(None) => Field::Null,
        Value::Option(Some(v)) | Value::Newtype(v) => canonical(*v, round)?,
        Value::Seq(items) => Field::Seq(items.into_iter().map(|x| canonical(x, round)).collect::<Result<_>>()?),
        Value::Map(entries) => {
            let mut map = BTreeMap::new();
            for (k, v) in entries {
                let key = match canonical(k, round)? {
                    Field::Str(s) => s,
                    Field::Int(i) => i.to_string(),
                    Field::Bool(b) => b.to_string(),
                    other => return Err(Error::invalid(format!("unsupported map key {other:?}"))),
                };
                map.insert(key, canonical(v, round)?);
            }
            Field::Map(map)
        }
    })
}

/// Canonical record of a serializable value, which must serialize to an
/// object.
pub fn to_record<T: Serialize>(value: &T) -> Result<Record> {
    let v = serde_value::to_value(value).map_err(|e| Error::invalid(format!("cannot serialize record: {e}")))?;
    match canonical(v, true)? {
        Field::Map(m) => Ok(m),
        other => Err(Error::invalid(format!("record must serialize to an object, got {other:?}"))),
    }
}

fn flatten_into(prefix: &str, field: &Field, out: &mut BTreeMap<String, String>) {
    match field {
        Field::Map(m) if !m.is_empty() => {
            for (k, v) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_into(&key, v, out);
            }
        }
        _ => {
            out.insert(prefix.to_string(), csv_cell(field));
        }
    }
}

fn csv_cell(field: &Field) -> String {
    match field {
        Field::Null => String::new(),
        Field::Bool(b) => b.to_string(),
        Field::Int(i) => i.to_string(),
        Field::Float(x) => format_sci(*x),
        Field::Str(s) => s.clone(),
        Field::Seq(_) | Field::Map(_) => {
            let mut s = String::new();
            write_json(field, &mut s);
            s
        }
    }
}

/// `d.ddddddddddde±x`; non-finite values as `inf`, `-inf`, `NaN`.
pub fn format_sci(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.11e}")
    }
}

const JSON_POS_INF: &str = "Infinity";
const JSON_NEG_INF: &str = "-Infinity";
const JSON_NAN: &str = "NaN";

fn write_json(field: &Field, out: &mut String) {
    match field {
        Field::Null => out.push_str("null"),
        Field::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Field::Int(i) => write!(out, "{i}").unwrap(),
        Field::Float(x) => {
            if x.is_nan() {
                write_json_str(JSON_NAN, out);
            } else if x.is_infinite() {
                write_json_str(if *x > 0.0 { JSON_POS_INF } else { JSON_NEG_INF }, out);
            } else {
                // shortest round-trip form of the already-rounded value
                let mut s = format!("{x:?}");
                if !s.contains(['.', 'e', 'E']) {
                    s.push_str(".0");
                }
                out.push_str(&s);
            }
        }
        Field::Str(s) => write_json_str(s, out),
        Field::Seq(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_json(item, out);
            }
            out.push(']');
        }
        Field::Map(m) => {
            out.push('{');
            for (i, (k, v)) in m.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_json_str(k, out);
                out.push(':');
                write_json(v, out);
            }
            out.push('}');
        }
    }
}

fn write_json_str(s: &str, out: &mut String) {
    out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
}

/// One canonical JSON line (without newline) for a record.
pub fn json_line(record: &Record) -> String {
    let mut s = String::new();
    write_json(&Field::Map(record.clone()), &mut s);
    s
}

pub fn csv_string(records: &[Record]) -> Result<String> {
    let rows: Vec<BTreeMap<String, String>> = records
        .iter()
        .map(|r| {
            let mut out = BTreeMap::new();
            flatten_into("", &Field::Map(r.clone()), &mut out);
            out
        })
        .collect();
    let columns: BTreeSet<&String> = rows.iter().flat_map(|r| r.keys()).collect();
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    if !columns.is_empty() {
        w.write_record(columns.iter().map(|c| c.as_str())).map_err(to_err)?;
    }
    for row in &rows {
        w.write_record(columns.iter().map(|c| row.get(*c).map_or("", String::as_str)))
            .map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn jsonl_string(records: &[Record]) -> String {
    records.iter().map(|r| json_line(r) + "\n").collect()
}

/// Writes records to `path`; an empty CSV file has no header.
pub fn write_reports<T: Serialize>(records: &[T], format: Format, path: &Path) -> Result<()> {
    write_reports_with_header(records, format, path, &[])
}

/// As `write_reports`, but an empty record list still gets a CSV header made
/// of `empty_header` (sorted).
pub fn write_reports_with_header<T: Serialize>(
    records: &[T],
    format: Format,
    path: &Path,
    empty_header: &[&str],
) -> Result<()> {
    let records: Vec<Record> = records.iter().map(to_record).collect::<Result<_>>()?;
    let text = match format {
        Format::Csv if records.is_empty() => {
            if empty_header.is_empty() {
                String::new()
            } else {
                let mut sorted = empty_header.to_vec();
                sorted.sort_unstable();
                csv_string(&[sorted.iter().map(|c| (c.to_string(), Field::Null)).collect()])?
                    .lines()
                    .next()
                    .map(|h| format!("{h}\n"))
                    .unwrap_or_default()
            }
        }
        Format::Csv => csv_string(&records)?,
        Format::Jsonl => jsonl_string(&records),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

fn from_json(v: serde_json::Value) -> Field {
    use serde_json::Value as J;
    match v {
        J::Null => Field::Null,
        J::Bool(b) => Field::Bool(b),
        J::Number(n) => match n.as_i64() {
            Some(i) => Field::Int(i.into()),
            None => match n.as_u64() {
                Some(u) => Field::Int(u.into()),
                None => Field::Float(n.as_f64().unwrap_or(f64::NAN)),
            },
        },
        J::String(s) => match s.as_str() {
            JSON_POS_INF => Field::Float(f64::INFINITY),
            JSON_NEG_INF => Field::Float(f64::NEG_INFINITY),
            JSON_NAN => Field::Float(f64::NAN),
            _ => Field::Str(s),
        },
        J::Array(items) => Field::Seq(items.into_iter().map(from_json).collect()),
        J::Object(m) => Field::Map(m.into_iter().map(|(k, v)| (k, from_json(v))).collect()),
    }
}

/// Reads a JSON-lines file back into canonical records. The strings
/// `"Infinity"`, `"-Infinity"` and `"NaN"` are read as floats.
pub fn read_jsonl(path: &Path) -> Result<Vec<Record>> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match from_json(serde_json::from_str(&line)?) {
            Field::Map(m) => out.push(m),
            other => return Err(Error::invalid(format!("JSON line is not an object: {other:?}"))),
        }
    }
    Ok(out)
}

/// Hex SHA-256 of the canonical JSON form of `config`, at full float
/// precision.
pub fn config_digest<T: Serialize>(config: &T) -> Result<String> {
    let v = serde_value::to_value(config).map_err(|e| Error::invalid(format!("cannot serialize config: {e}")))?;
    let mut text = String::new();
    write_json(&canonical(v, false)?, &mut text);
    Ok(format!("{:x}", Sha256::digest(text.as_bytes())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub seed: u64,
    pub config_digest: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub module_list: Vec<String>,
}

impl RunManifest {
    pub fn new<T: Serialize>(config: &T, seed: u64, modules: &[&str]) -> Result<Self> {
        // SOURCE_DATE_EPOCH pins the timestamp for reproducible manifests
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or_else(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            });
        Ok(RunManifest {
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config_digest: config_digest(config)?,
            timestamp,
            module_list: modules.iter().map(|m| m.to_string()).collect(),
        })
    }

    /// Writes `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(dir.join("manifest.json"), text)?;
        Ok(())
    }
}
