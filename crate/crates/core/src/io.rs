//! CSV and JSON readers and writers.
//!
//! Floats are written as shortest round-trip decimals; non-finite values
//! become the strings `inf`, `-inf` and `nan` so that every file stays
//! parseable by the readers below.

use std::io::{Read, Write};

use serde::{de::DeserializeOwned, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gelfand::BifurcationRecord;
use crate::radial::Node;

pub const PROFILE_HEADER: [&str; 3] = ["r", "u", "ur"];
pub const DIAGRAM_HEADER: [&str; 6] = ["m", "lambda", "ur1", "F_m", "mu1", "stable"];

/// Shortest decimal that parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        ryu::Buffer::new().format_finite(x).to_string()
    }
}

pub fn parse_float(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        t => t.parse().map_err(|_| Error::Parse(format!("not a number: {t:?}"))),
    }
}

/// Serde adapter for `f64` fields that may hold non-finite values.
pub mod lenient_float {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&format_float(*x))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(x) => Ok(x),
            Repr::Text(t) => parse_float(&t).map_err(serde::de::Error::custom),
        }
    }
}

fn check_header(reader: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = reader.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse(format!(
            "unexpected CSV header {:?}, expected {:?}",
            header.iter().collect::<Vec<_>>(),
            expected
        )));
    }
    Ok(())
}

fn field(record: &csv::StringRecord, i: usize) -> Result<f64> {
    parse_float(record.get(i).ok_or_else(|| Error::Parse(format!("missing column {i}")))?)
}

/// Writes nodes as CSV with header `r,u,ur`.
pub fn write_profile_csv(out: impl Write, nodes: &[Node]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PROFILE_HEADER)?;
    for node in nodes {
        w.write_record([format_float(node.r), format_float(node.u), format_float(node.ur)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_profile_csv(input: impl Read) -> Result<Vec<Node>> {
    let mut reader = csv::Reader::from_reader(input);
    check_header(&mut reader, &PROFILE_HEADER)?;
    reader
        .records()
        .map(|record| {
            let record = record?;
            Ok(Node {
                r: field(&record, 0)?,
                u: field(&record, 1)?,
                ur: field(&record, 2)?,
            })
        })
        .collect()
}

/// Writes records as CSV with header `m,lambda,ur1,F_m,mu1,stable`.
pub fn write_diagram_csv(out: impl Write, records: &[BifurcationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DIAGRAM_HEADER)?;
    for r in records {
        w.write_record([
            format_float(r.m),
            format_float(r.lambda),
            format_float(r.ur1),
            format_float(r.f_m),
            format_float(r.mu1),
            r.stable.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_diagram_csv(input: impl Read) -> Result<Vec<BifurcationRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    check_header(&mut reader, &DIAGRAM_HEADER)?;
    reader
        .records()
        .map(|record| {
            let record = record?;
            let stable = match record.get(5).map(str::trim) {
                Some("true") => true,
                Some("false") => false,
                other => return Err(Error::Parse(format!("bad stable flag {other:?}"))),
            };
            Ok(BifurcationRecord {
                m: field(&record, 0)?,
                lambda: field(&record, 1)?,
                ur1: field(&record, 2)?,
                f_m: field(&record, 3)?,
                mu1: field(&record, 4)?,
                stable,
            })
        })
        .collect()
}

/// Pretty JSON followed by a newline.
pub fn write_json<T: Serialize + ?Sized>(mut out: impl Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(input: impl Read) -> Result<T> {
    Ok(serde_json::from_reader(input)?)
}
