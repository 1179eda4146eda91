//! Streaming readers for p-value files (CSV with a header, or JSON lines).

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::Deserialize;

use crate::cli::Format;
use crate::error::{CliError, CliResult};

/// One input hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamRecord {
    /// 1-based line of the record in the input.
    pub line: u64,
    pub p_value: f64,
    pub batch_id: Option<String>,
    /// True for a non-null.
    pub label: Option<bool>,
}

fn input_err(line: u64, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("line {line}: {msg}"))
}

fn parse_label(line: u64, s: &str) -> CliResult<Option<bool>> {
    match s.trim().to_ascii_lowercase().as_str() {
        "" => Ok(None),
        "0" | "null" | "false" | "h0" => Ok(Some(false)),
        "1" | "non-null" | "nonnull" | "alt" | "true" | "h1" => Ok(Some(true)),
        other => Err(input_err(line, format!("unknown label '{other}'"))),
    }
}

fn check_p(line: u64, p: f64) -> CliResult<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(input_err(line, format!("p-value {p} is outside [0, 1]")))
    }
}

pub fn format_for(path: &Path, explicit: Option<Format>) -> Format {
    explicit.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("ndjson") | Some("json") => Format::Jsonl,
        _ => Format::Csv,
    })
}

pub fn open(path: &Path, format: Format) -> CliResult<Box<dyn Iterator<Item = CliResult<StreamRecord>>>> {
    let reader: Box<dyn Read> = if path.as_os_str() == "-" {
        Box::new(std::io::stdin())
    } else {
        Box::new(File::open(path).map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?)
    };
    match format {
        Format::Csv => csv_records(reader),
        Format::Jsonl => Ok(jsonl_records(reader)),
    }
}

fn csv_records(reader: Box<dyn Read>) -> CliResult<Box<dyn Iterator<Item = CliResult<StreamRecord>>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| input_err(1, e))?.clone();
    if headers.iter().all(|h| h.is_empty()) {
        return Ok(Box::new(std::iter::empty()));
    }
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let p_col = col("p").or_else(|| col("p_value")).ok_or_else(|| input_err(1, "no 'p' column in header"))?;
    let batch_col = col("batch_id");
    let label_col = col("label");
    let mut failed = false;
    let iter = rdr.into_records().map_while(move |rec| {
        if failed {
            return None;
        }
        let out = (|| {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                input_err(line, e)
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            let field = |c: Option<usize>| c.and_then(|c| rec.get(c)).unwrap_or("");
            let raw = field(Some(p_col));
            let p: f64 = raw.parse().map_err(|_| input_err(line, format!("cannot parse p-value '{raw}'")))?;
            let batch = field(batch_col);
            Ok(StreamRecord {
                line,
                p_value: check_p(line, p)?,
                batch_id: (!batch.is_empty()).then(|| batch.to_string()),
                label: parse_label(line, field(label_col))?,
            })
        })();
        failed = out.is_err();
        Some(out)
    });
    Ok(Box::new(iter))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRecord {
    #[serde(alias = "p_value")]
    p: f64,
    #[serde(default)]
    batch_id: Option<serde_json::Value>,
    #[serde(default)]
    label: Option<serde_json::Value>,
}

fn jsonl_records(reader: Box<dyn Read>) -> Box<dyn Iterator<Item = CliResult<StreamRecord>>> {
    let mut failed = false;
    let iter = BufReader::new(reader)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
        .map_while(move |(idx, line)| {
            if failed {
                return None;
            }
            let n = idx as u64 + 1;
            let out = (|| {
                let text = line.map_err(|e| input_err(n, e))?;
                let rec: JsonRecord = serde_json::from_str(&text).map_err(|e| input_err(n, e))?;
                let batch_id = match rec.batch_id {
                    None | Some(serde_json::Value::Null) => None,
                    Some(serde_json::Value::String(s)) => Some(s),
                    Some(v) => Some(v.to_string()),
                };
                let label = match rec.label {
                    None | Some(serde_json::Value::Null) => None,
                    Some(serde_json::Value::Bool(b)) => Some(b),
                    Some(serde_json::Value::String(s)) => parse_label(n, &s)?,
                    Some(v) => parse_label(n, &v.to_string())?,
                };
                Ok(StreamRecord {
                    line: n,
                    p_value: check_p(n, rec.p)?,
                    batch_id,
                    label,
                })
            })();
            failed = out.is_err();
            Some(out)
        });
    Box::new(iter)
}
