//! CSV and JSON exchange formats for [`CurveTrace`].
//!
//! CSV: header `s,x,y,z` (or `t,x,y,z`), one sample per LF-terminated line,
//! numbers in shortest round-trip form. JSON: `{"meta": {...}, "samples":
//! [[s, x, y, z], ...]}` with the sampling parameter recorded under
//! `meta.parameter`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::frenet::{CurveTrace, ParamKind};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v:?}")
}

pub fn to_csv(trace: &CurveTrace) -> String {
    let mut out = String::with_capacity(32 * (trace.len() + 1));
    out.push_str(trace.parameter.as_str());
    out.push_str(",x,y,z\n");
    for &(s, p) in trace.samples() {
        let row = [s, p.x, p.y, p.z].map(format_number).join(",");
        out.push_str(&row);
        out.push('\n');
    }
    out
}

pub fn from_csv(text: &str) -> Result<CurveTrace> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    let parameter = match names.as_slice() {
        [p, "x", "y", "z"] => ParamKind::parse(p),
        _ => None,
    }
    .ok_or_else(|| Error::Parse(format!("expected header s,x,y,z or t,x,y,z, got {}", names.join(","))))?;

    let mut samples = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.len() != 4 {
            return Err(Error::Parse(format!("row {}: expected 4 fields, got {}", line + 1, record.len())));
        }
        let mut v = [0.0; 4];
        for (slot, field) in v.iter_mut().zip(record.iter()) {
            *slot = field
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {field:?}: {e}", line + 1)))?;
        }
        samples.push((v[0], Vec3::new(v[1], v[2], v[3])));
    }
    CurveTrace::new(parameter, samples).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Serialize, Deserialize)]
struct TraceDoc {
    meta: BTreeMap<String, Value>,
    samples: Vec<[f64; 4]>,
}

pub fn to_json(trace: &CurveTrace) -> String {
    let mut meta = trace.meta.clone();
    meta.insert("parameter".into(), trace.parameter.as_str().into());
    let doc = TraceDoc { meta, samples: trace.samples().iter().map(|&(s, p)| [s, p.x, p.y, p.z]).collect() };
    let mut out = serde_json::to_string(&doc).expect("trace values are finite");
    out.push('\n');
    out
}

pub fn from_json(text: &str) -> Result<CurveTrace> {
    let mut doc: TraceDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let parameter = match doc.meta.remove("parameter") {
        None => ParamKind::S,
        Some(Value::String(p)) => {
            ParamKind::parse(&p).ok_or_else(|| Error::Parse(format!("unknown parameter name {p:?}")))?
        }
        Some(v) => return Err(Error::Parse(format!("meta.parameter must be a string, got {v}"))),
    };
    let samples = doc.samples.into_iter().map(|[s, x, y, z]| (s, Vec3::new(x, y, z))).collect();
    let mut trace = CurveTrace::new(parameter, samples).map_err(|e| Error::Parse(e.to_string()))?;
    trace.meta = doc.meta;
    Ok(trace)
}

pub fn render(trace: &CurveTrace, format: Format) -> String {
    match format {
        Format::Csv => to_csv(trace),
        Format::Json => to_json(trace),
    }
}

pub fn parse(text: &str, format: Format) -> Result<CurveTrace> {
    match format {
        Format::Csv => from_csv(text),
        Format::Json => from_json(text),
    }
}

pub fn write_trace(path: &Path, trace: &CurveTrace, format: Format) -> Result<()> {
    fs::write(path, render(trace, format)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Reads a trace, choosing the format from the extension or, failing that,
/// from the first non-blank character.
pub fn read_trace(path: &Path) -> Result<CurveTrace> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let format = Format::from_path(path).unwrap_or_else(|| {
        if text.trim_start().starts_with('{') {
            Format::Json
        } else {
            Format::Csv
        }
    });
    parse(&text, format)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_trace() -> CurveTrace {
        CurveTrace::new(
            ParamKind::T,
            vec![(-0.5, Vec3::new(0.1, -2.0, 1e-17)), (0.0, Vec3::new(0.0, 0.0, 1.0)), (0.25, Vec3::new(3.0, 1e21, -0.3))],
        )
        .unwrap()
        .with_meta("command", "figure1")
        .with_meta("lambda", -1.8)
    }

    #[test]
    fn csv_layout() {
        let text = to_csv(&sample_trace());
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x,y,z"));
        assert_eq!(lines.next(), Some("-0.5,0.1,-2.0,1e-17"));
        assert!(text.ends_with('\n') && !text.contains('\r'));
    }

    #[test]
    fn json_layout_keeps_meta() {
        let text = to_json(&sample_trace());
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["meta"]["command"], "figure1");
        assert_eq!(v["meta"]["parameter"], "t");
        assert_eq!(v["samples"][1], serde_json::json!([0.0, 0.0, 0.0, 1.0]));
        let back = from_json(&text).unwrap();
        assert_eq!(back, sample_trace());
    }

    #[test]
    fn malformed_input_is_a_parse_error() {
        assert!(matches!(from_csv("a,b,c\n1,2,3\n"), Err(Error::Parse(_))));
        assert!(matches!(from_csv("s,x,y,z\n1,2,3,oops\n"), Err(Error::Parse(_))));
        assert!(matches!(from_csv("s,x,y,z\n1,0,0,0\n0,0,0,0\n"), Err(Error::Parse(_))));
        assert!(matches!(from_json("{\"samples\": 3}"), Err(Error::Parse(_))));
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e6..1e6f64, -1e-6..1e-6f64, any::<f64>().prop_filter("finite", |x| x.is_finite())]
    }

    proptest! {
        #[test]
        fn write_read_write_is_byte_identical(
            rows in prop::collection::vec((finite(), finite(), finite()), 0..40),
            start in -100.0..100.0f64,
            json in any::<bool>(),
        ) {
            let samples = rows.iter().enumerate().map(|(i, &(x, y, z))| (start + i as f64 * 0.125, Vec3::new(x, y, z))).collect();
            let trace = CurveTrace::new(ParamKind::S, samples).unwrap().with_meta("k", 1.5);
            let format = if json { Format::Json } else { Format::Csv };
            let first = render(&trace, format);
            let second = render(&parse(&first, format).unwrap(), format);
            prop_assert_eq!(first, second);
        }
    }
}
