//! Result rows and their CSV / JSON files.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::Format;
use crate::{Error, Result};

/// Column order of the CSV files.
pub const CSV_HEADER: &str = "experiment,kind,t,delta,r_sausage,n_paths,n_walkers,seed,mean,std_error,n,wall_time_s,diag_escape_rate,diag_clip_count";

/// Marker appended to the `experiment` column of rows whose walkers ran out
/// of steps too often.
pub const INVALID_MARK: &str = "[invalid]";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub kind: String,
    pub t: f64,
    pub delta: f64,
    pub r_sausage: f64,
    pub n_paths: u64,
    pub n_walkers: u64,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
    pub wall_time_s: f64,
    pub diag_escape_rate: f64,
    pub diag_clip_count: u64,
}

impl ResultRow {
    pub fn is_invalid(&self) -> bool {
        self.experiment.ends_with(INVALID_MARK)
    }

    /// The experiment label without the invalid marker.
    pub fn label(&self) -> &str {
        self.experiment.trim_end_matches(INVALID_MARK)
    }
}

/// 17 significant digits, enough to round-trip every `f64`.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let enc = |e: csv::Error| Error::Precondition(format!("cannot encode row: {e}"));
    w.write_record(CSV_HEADER.split(',')).map_err(enc)?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.kind.clone(),
            float(r.t),
            float(r.delta),
            float(r.r_sausage),
            r.n_paths.to_string(),
            r.n_walkers.to_string(),
            r.seed.to_string(),
            float(r.mean),
            float(r.std_error),
            r.n.to_string(),
            float(r.wall_time_s),
            float(r.diag_escape_rate),
            r.diag_clip_count.to_string(),
        ])
        .map_err(enc)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Precondition(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Precondition(e.to_string()))
}

pub fn to_json_string(rows: &[ResultRow]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(rows).map_err(|e| Error::Precondition(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn encode(rows: &[ResultRow], format: Format) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Precondition("no rows to write".into()));
    }
    if let Some(r) = rows.iter().find(|r| {
        ![r.t, r.delta, r.r_sausage, r.mean, r.std_error, r.wall_time_s, r.diag_escape_rate]
            .iter()
            .all(|x| x.is_finite())
    }) {
        return Err(Error::Precondition(format!("row {} has a non-finite value", r.experiment)));
    }
    match format {
        Format::Csv => to_csv_string(rows),
        Format::Json => to_json_string(rows),
    }
}

/// Writes `text` to `path` through a temporary file in the same directory,
/// so a failed write leaves nothing behind.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_results(rows: &[ResultRow], path: &Path, format: Format) -> Result<()> {
    write_atomic(path, &encode(rows, format)?)
}

pub fn parse_csv(text: &str) -> std::result::Result<Vec<ResultRow>, String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| e.to_string())?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(format!("unexpected header {header:?}"));
    }
    r.deserialize().map(|row| row.map_err(|e| e.to_string())).collect()
}

pub fn parse_json(text: &str) -> std::result::Result<Vec<ResultRow>, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

pub fn read_results(path: &Path, format: Format) -> Result<Vec<ResultRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        Format::Csv => parse_csv(&text),
        Format::Json => parse_json(&text),
    }
    .map_err(|message| Error::Parse {
        path: path.into(),
        message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(i: u64) -> ResultRow {
        ResultRow {
            experiment: format!("lln/scaled_cap_{i}"),
            kind: "lln".into(),
            t: 100.0 * i as f64,
            delta: 0.1,
            r_sausage: 1.0,
            n_paths: 100,
            n_walkers: 20_000,
            seed: u64::MAX - i,
            mean: std::f64::consts::PI / 3.0,
            std_error: 1e-300,
            n: 100,
            wall_time_s: 0.0,
            diag_escape_rate: 1.0 / 3.0,
            diag_clip_count: 7,
        }
    }

    #[test]
    fn header_matches_field_order() {
        let v = serde_json::to_value(row(1)).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        let mut sorted = CSV_HEADER.split(',').collect::<Vec<_>>();
        sorted.sort();
        let mut k = keys.clone();
        k.sort();
        assert_eq!(k, sorted);
        let csv = to_csv_string(&[row(1)]).unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    }

    #[test]
    fn one_row_is_two_lines() {
        let s = encode(&[row(1)], Format::Csv).unwrap();
        assert_eq!(s.lines().count(), 2);
        assert!(s.ends_with('\n'));
        assert!(s.contains("1.0471975511965976e0"));
    }

    #[test]
    fn round_trip_both_formats() {
        let rows: Vec<_> = (0..5).map(row).collect();
        assert_eq!(parse_csv(&encode(&rows, Format::Csv).unwrap()).unwrap(), rows);
        let json = encode(&rows, Format::Json).unwrap();
        assert!(json.ends_with('\n'));
        assert_eq!(parse_json(&json).unwrap(), rows);
    }

    #[test]
    fn empty_and_non_finite_are_rejected() {
        assert!(encode(&[], Format::Csv).is_err());
        let mut r = row(1);
        r.mean = f64::NAN;
        assert!(encode(&[r], Format::Json).is_err());
    }

    #[test]
    fn atomic_write_and_rewrite() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        let rows: Vec<_> = (0..3).map(row).collect();
        write_results(&rows, &p, Format::Csv).unwrap();
        let first = std::fs::read(&p).unwrap();
        write_results(&rows, &p, Format::Csv).unwrap();
        assert_eq!(first, std::fs::read(&p).unwrap());
        assert_eq!(read_results(&p, Format::Csv).unwrap(), rows);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn unwritable_path_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("missing").join("out.csv");
        assert!(matches!(write_results(&[row(1)], &p, Format::Csv), Err(Error::Io { .. })));
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
