//! Sweep CSV encoding. Floats are written with 17 significant digits so a
//! read-back reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use cohdist::SweepRecord;
use serde::Deserialize;

pub const HEADER: [&str; 9] = [
    "sample_id",
    "d",
    "channel",
    "param",
    "coherence",
    "disturbance",
    "extra_terms_json",
    "residual",
    "seed",
];

#[derive(Debug)]
pub enum CsvError {
    Io(std::io::Error),
    Format(String),
}

impl std::fmt::Display for CsvError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CsvError::Io(e) => write!(f, "{e}"),
            CsvError::Format(m) => write!(f, "malformed sweep CSV: {m}"),
        }
    }
}

impl From<csv::Error> for CsvError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => CsvError::Io(io),
                _ => unreachable!(),
            }
        } else {
            CsvError::Format(e.to_string())
        }
    }
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_records<W: Write>(out: W, records: &[SweepRecord]) -> Result<(), CsvError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        let extra =
            serde_json::to_string(&r.extra_terms).map_err(|e| CsvError::Format(e.to_string()))?;
        w.write_record([
            r.sample_id.to_string(),
            r.d.to_string(),
            r.channel_label.clone(),
            float(r.channel_param),
            float(r.coherence),
            float(r.disturbance),
            extra,
            float(r.residual),
            r.seed.to_string(),
        ])?;
    }
    w.flush().map_err(CsvError::Io)?;
    Ok(())
}

#[derive(Deserialize)]
struct Row {
    sample_id: usize,
    d: usize,
    channel: String,
    param: f64,
    coherence: f64,
    disturbance: f64,
    extra_terms_json: String,
    residual: f64,
    seed: u64,
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<SweepRecord>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(HEADER.iter().copied()) {
        // An entirely empty file has no header row at all; treat it as zero records.
        if headers.is_empty() {
            return Ok(Vec::new());
        }
        return Err(CsvError::Format(format!(
            "unexpected header {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row?;
        let extra_terms: BTreeMap<String, f64> = serde_json::from_str(&row.extra_terms_json)
            .map_err(|e| CsvError::Format(e.to_string()))?;
        out.push(SweepRecord {
            sample_id: row.sample_id,
            d: row.d,
            channel_label: row.channel,
            channel_param: row.param,
            coherence: row.coherence,
            disturbance: row.disturbance,
            extra_terms,
            residual: row.residual,
            seed: row.seed,
        });
    }
    Ok(out)
}
