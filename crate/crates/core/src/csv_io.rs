//! CSV persistence of sweep records and trajectories.
//!
//! Floats are written with 17 significant digits so that reading a file back
//! reproduces every value bit for bit.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scaling::SweepRecord;

pub const HEADER: [&str; 6] = ["T_i", "v_over_gamma", "E_final", "solver", "model_tag", "bath_tag"];

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Csv { row, message: format!("{other:?}") },
    }
}

pub fn write_records<W: Write>(records: &[SweepRecord], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            format_float(r.t_i),
            format_float(r.v_over_gamma),
            format_float(r.e_final),
            r.solver.to_string(),
            r.model_tag.clone(),
            r.bath_tag.clone(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_records(records, std::io::BufWriter::new(file))
}

/// Parses records; `row` in errors is the 1-based line of the file.
pub fn read_records<R: Read>(source: R) -> Result<Vec<SweepRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(Error::Csv { row: 1, message: format!("expected header {}", HEADER.join(",")) });
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let err = |message: String| Error::Csv { row: line, message };
        if row.len() != HEADER.len() {
            return Err(err(format!("expected {} fields, found {}", HEADER.len(), row.len())));
        }
        let float = |i: usize| -> Result<f64> {
            row[i].trim().parse::<f64>().map_err(|_| err(format!("{} is not a number: '{}'", HEADER[i], &row[i])))
        };
        let record = SweepRecord {
            t_i: float(0)?,
            v_over_gamma: float(1)?,
            e_final: float(2)?,
            solver: row[3].parse().map_err(|e: Error| err(e.to_string()))?,
            model_tag: row[4].to_string(),
            bath_tag: row[5].to_string(),
        };
        if !(record.t_i > 0.0) || !(record.v_over_gamma > 0.0) || !(0.0..=1.0).contains(&record.e_final) {
            return Err(err("need T_i > 0, v_over_gamma > 0 and 0 <= E_final <= 1".into()));
        }
        records.push(record);
    }
    Ok(records)
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    read_records(std::fs::File::open(path)?)
}

/// Writes named columns of equal length.
pub fn write_columns<W: Write>(names: &[&str], columns: &[Vec<f64>], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(names).map_err(csv_err)?;
    let rows = columns.first().map_or(0, Vec::len);
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| format_float(c[i]))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
