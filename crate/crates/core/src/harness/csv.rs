//! CSV output of sweep rows.

use std::path::Path;

use serde::Deserialize;

use crate::{Error, Result};

use super::sweep::SweepRow;

pub const CSV_HEADER: &str = "sweep_var,sweep_value,case,mean_rate_bps_hz,std_rate,n_seeds,mean_pj_w,mean_iters";

#[derive(Deserialize)]
struct Record {
    sweep_var: String,
    sweep_value: f64,
    case: String,
    mean_rate_bps_hz: f64,
    std_rate: f64,
    n_seeds: usize,
    mean_pj_w: f64,
    mean_iters: f64,
}

fn csv_err(e: csv::Error) -> Error {
    let at = e.position().map(|p| format!("CSV line {}: ", p.line())).unwrap_or_default();
    Error::Config(format!("{at}{e}"))
}

/// Renders rows as CSV text. Floats use the shortest representation that
/// parses back to the same value.
pub fn render_csv(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Domain("no rows to write".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.variable.clone(),
            r.value.to_string(),
            r.case.to_string(),
            r.mean_rate.to_string(),
            r.std_rate.to_string(),
            r.n_seeds.to_string(),
            r.mean_jam_power.to_string(),
            r.mean_iters.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV fields are UTF-8"))
}

/// Writes rows to `path`. Nothing is created when `rows` is empty.
pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let text = render_csv(rows)?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses text produced by [`render_csv`]. Failure counts are not part of
/// the format and come back as zero.
pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_err)?;
    if !header.iter().eq(CSV_HEADER.split(',')) {
        return Err(Error::Config("missing or unexpected CSV header".into()));
    }
    reader
        .deserialize::<Record>()
        .map(|rec| {
            let r = rec.map_err(csv_err)?;
            Ok(SweepRow {
                variable: r.sweep_var,
                value: r.sweep_value,
                case: r.case.parse()?,
                mean_rate: r.mean_rate_bps_hz,
                std_rate: r.std_rate,
                n_seeds: r.n_seeds,
                mean_jam_power: r.mean_pj_w,
                mean_iters: r.mean_iters,
                failures: 0,
                flagged: false,
            })
        })
        .collect()
}
