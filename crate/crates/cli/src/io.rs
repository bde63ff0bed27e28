//! File formats: `%.12e` floats, CSV with a header row, NDJSON snapshots
//! and JSON documents.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

use scalarfield::evolve::Snapshot;
use scalarfield::greensolve::SteadyState;
use scalarfield::virial::DiagnosticsRecord;

/// C-style `%.12e`: `-1.234567890123e-05`.
pub fn fmt_e(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Parse a float written by [`fmt_e`] (or any Rust-parsable float).
pub fn parse_f64(s: &str) -> Result<f64> {
    let t = s.trim();
    match t {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => t.parse().map_err(|_| anyhow!("not a number: '{t}'")),
    }
}

/// Pretty JSON with every float as `%.12e` and non-finite floats as null.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| out.push_str(&"  ".repeat(d));
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64");
            out.push_str(&fmt_e(x));
        }
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_value(out, item, depth);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                pad(out, depth + 1);
                write_value(out, item, depth + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                pad(out, depth + 1);
                let _ = write!(out, "{}: ", Value::String(key.clone()));
                write_value(out, item, depth + 1);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)?).with_context(|| format!("writing {}", path.display()))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

pub fn local_column(a: f64, b: f64) -> String {
    format!("local_{a}_{b}")
}

pub const DIAGNOSTIC_COLUMNS: [&str; 9] = [
    "t",
    "E",
    "I",
    "dIdt_fd",
    "dIdt_formula",
    "H1w_v1",
    "L2w_v2",
    "sech_cross",
    "cum_integral",
];

pub fn write_diagnostics(path: &Path, records: &[DiagnosticsRecord], intervals: &[(f64, f64)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header: Vec<String> = DIAGNOSTIC_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(intervals.iter().map(|(a, b)| local_column(*a, *b)));
    w.write_record(&header)?;
    for r in records {
        let mut row: Vec<String> = [
            r.t,
            r.energy,
            r.virial,
            r.didt_fd,
            r.didt_formula,
            r.h1w_v1,
            r.l2w_v2,
            r.sech_cross,
            r.cum_integral,
        ]
        .iter()
        .map(|x| fmt_e(*x))
        .collect();
        row.extend(r.local.iter().map(|x| fmt_e(*x)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub const TERM_COLUMNS: [&str; 16] = [
    "t",
    "neg_B",
    "coef_quadratic",
    "cross",
    "nonlinear",
    "total",
    "damping",
    "sech_rate_fd",
    "sech_rate_formula",
    "sech_rate_damping",
    "sech_lower",
    "L2w_v1",
    "cum_v1",
    "orbital",
    "even_part",
    "magnitude",
];

pub fn write_terms(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(TERM_COLUMNS)?;
    for r in records {
        let row = [
            r.t,
            r.terms.neg_b,
            r.terms.coef_quadratic,
            r.terms.cross,
            r.terms.nonlinear,
            r.terms.total,
            r.terms.damping,
            r.sech_rate_fd,
            r.sech_rate_formula,
            r.sech_rate_damping,
            r.sech_lower,
            r.l2w_v1,
            r.cum_v1,
            r.orbital,
            r.even_part,
            r.terms.magnitude(),
        ];
        w.write_record(row.iter().map(|x| fmt_e(*x)))?;
    }
    w.flush()?;
    Ok(())
}

/// A parsed diagnostics CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsTable {
    pub intervals: Vec<(f64, f64)>,
    pub records: Vec<DiagnosticsRecord>,
}

pub fn read_diagnostics(path: &Path) -> Result<DiagnosticsTable> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.len() < DIAGNOSTIC_COLUMNS.len() || header[..DIAGNOSTIC_COLUMNS.len()] != DIAGNOSTIC_COLUMNS {
        bail!("{}: header must start with {}", path.display(), DIAGNOSTIC_COLUMNS.join(","));
    }
    let intervals = header[DIAGNOSTIC_COLUMNS.len()..]
        .iter()
        .map(|h| parse_local_column(h))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    for (line, row) in r.records().enumerate() {
        let row = row?;
        if row.len() != header.len() {
            bail!("{}: row {} has {} fields", path.display(), line + 2, row.len());
        }
        let x: Vec<f64> = row.iter().map(parse_f64).collect::<Result<_>>()?;
        records.push(DiagnosticsRecord {
            t: x[0],
            energy: x[1],
            virial: x[2],
            didt_fd: x[3],
            didt_formula: x[4],
            h1w_v1: x[5],
            l2w_v2: x[6],
            sech_cross: x[7],
            cum_integral: x[8],
            local: x[DIAGNOSTIC_COLUMNS.len()..].to_vec(),
            ..Default::default()
        });
    }
    Ok(DiagnosticsTable { intervals, records })
}

fn parse_local_column(h: &str) -> Result<(f64, f64)> {
    let rest = h
        .strip_prefix("local_")
        .ok_or_else(|| anyhow!("unexpected column '{h}'"))?;
    // Float display never contains an underscore.
    let (a, b) = rest
        .split_once('_')
        .ok_or_else(|| anyhow!("column '{h}' is not local_a_b"))?;
    Ok((parse_f64(a)?, parse_f64(b)?))
}

pub fn write_steady(path: &Path, state: &SteadyState) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["y", "U", "U_prime", "residual"])?;
    for i in 0..state.grid.len() {
        let row = [
            state.grid.y(i),
            state.xi + state.u_delta[i],
            state.du_delta[i],
            state.residual[i],
        ];
        w.write_record(row.iter().map(|x| fmt_e(*x)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshots(path: &Path, snapshots: &[Snapshot]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    let arr = |v: &[f64]| v.iter().map(|x| fmt_e(*x)).collect::<Vec<_>>().join(",");
    for s in snapshots {
        writeln!(
            w,
            "{{\"t\":{},\"y\":[{}],\"u\":[{}],\"ut\":[{}]}}",
            fmt_e(s.t),
            arr(&s.y),
            arr(&s.u),
            arr(&s.ut)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Two numeric columns `y,value`; a non-numeric first row is a header.
pub fn read_two_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let (mut y, mut v) = (Vec::new(), Vec::new());
    for (line, row) in r.records().enumerate() {
        let row = row?;
        if row.len() != 2 {
            bail!("{}: line {} needs two columns", path.display(), line + 1);
        }
        match (parse_f64(&row[0]), parse_f64(&row[1])) {
            (Ok(a), Ok(b)) => {
                y.push(a);
                v.push(b);
            }
            _ if line == 0 => continue,
            _ => bail!("{}: line {} is not numeric", path.display(), line + 1),
        }
    }
    Ok((y, v))
}
