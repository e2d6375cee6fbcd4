use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradient::Backend;
use crate::optimizers::Method;

/// Columns of the results CSV, in order.
pub const CSV_HEADER: [&str; 10] = [
    "graph_id",
    "depth",
    "optimizer",
    "backend",
    "trial",
    "seed",
    "final_expectation",
    "success_prob",
    "evals_used",
    "wall_ms",
];

/// Identity of one grid cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub graph_id: String,
    pub depth: usize,
    pub optimizer: Method,
    pub backend: Backend,
    pub trial: u32,
}

/// Outcome of one optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub graph_id: String,
    pub depth: usize,
    pub optimizer: Method,
    pub backend: Backend,
    pub trial: u32,
    pub seed: u64,
    /// Best objective value seen by the optimizer.
    pub final_expectation: f64,
    /// Mass on optimal covers, when the experiment computes it.
    pub success_prob: Option<f64>,
    pub evals_used: u64,
    /// Optimized `[γ..., β...]`; empty when read back from CSV.
    #[serde(default)]
    pub params: Vec<f64>,
    /// Shot-free expectation of the backend state at `params`.
    #[serde(default)]
    pub exact_expectation: Option<f64>,
    pub wall_ms: u64,
}

impl RunRecord {
    pub fn key(&self) -> CellKey {
        CellKey {
            graph_id: self.graph_id.clone(),
            depth: self.depth,
            optimizer: self.optimizer,
            backend: self.backend,
            trial: self.trial,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    graph_id: String,
    depth: usize,
    optimizer: String,
    backend: String,
    trial: u32,
    seed: u64,
    final_expectation: f64,
    success_prob: Option<f64>,
    evals_used: u64,
    wall_ms: u64,
}

/// Writes records as CSV in the given order. With `wall_time` false the
/// `wall_ms` column is 0 so that identical runs give identical bytes.
pub fn write_csv<W: Write>(out: W, records: &[RunRecord], wall_time: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(CsvRow {
            graph_id: r.graph_id.clone(),
            depth: r.depth,
            optimizer: r.optimizer.name().to_owned(),
            backend: r.backend.name().to_owned(),
            trial: r.trial,
            seed: r.seed,
            final_expectation: r.final_expectation,
            success_prob: r.success_prob,
            evals_used: r.evals_used,
            wall_ms: if wall_time { r.wall_ms } else { 0 },
        })?;
    }
    if records.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Parses a results CSV. Columns may appear in any order, but all of
/// [`CSV_HEADER`] must be present.
pub fn read_csv<R: Read>(input: R, source_name: &str) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if let Some(missing) = CSV_HEADER.iter().find(|c| !headers.iter().any(|h| h == **c)) {
        return Err(Error::Parse {
            source_name: source_name.to_owned(),
            line: 1,
            message: format!("missing column `{missing}`"),
        });
    }
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<CsvRow>().enumerate() {
        let line = i + 2;
        let parse_err = |message: String| Error::Parse {
            source_name: source_name.to_owned(),
            line,
            message,
        };
        let row = row.map_err(|e| parse_err(e.to_string()))?;
        let optimizer = row.optimizer.parse::<Method>().map_err(|e| parse_err(e.to_string()))?;
        let backend = row.backend.parse::<Backend>().map_err(|e| parse_err(e.to_string()))?;
        out.push(RunRecord {
            graph_id: row.graph_id,
            depth: row.depth,
            optimizer,
            backend,
            trial: row.trial,
            seed: row.seed,
            final_expectation: row.final_expectation,
            success_prob: row.success_prob,
            evals_used: row.evals_used,
            params: Vec::new(),
            exact_expectation: None,
            wall_ms: row.wall_ms,
        });
    }
    Ok(out)
}

pub fn read_csv_file(path: &Path) -> Result<Vec<RunRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(trial: u32, success: Option<f64>) -> RunRecord {
        RunRecord {
            graph_id: "n3-01".into(),
            depth: 2,
            optimizer: Method::NelderMead,
            backend: Backend::Noisy,
            trial,
            seed: u64::MAX - 3,
            final_expectation: 2.0 + 0.1 * trial as f64,
            success_prob: success,
            evals_used: 400,
            params: vec![0.1, 0.2, 0.3, 0.4],
            exact_expectation: Some(2.05),
            wall_ms: 17,
        }
    }

    #[test]
    fn csv_round_trip_without_params() {
        let recs = vec![record(0, Some(0.25)), record(1, None)];
        let mut buf = Vec::new();
        write_csv(&mut buf, &recs, true).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&CSV_HEADER.join(",")));
        assert!(text.contains("n3-01,2,nelder_mead,noisy,1,18446744073709551612,2.1,,400,17"));
        let back = read_csv(buf.as_slice(), "mem").unwrap();
        for (a, b) in recs.iter().zip(&back) {
            assert_eq!(a.key(), b.key());
            assert_eq!(a.final_expectation, b.final_expectation);
            assert_eq!(a.success_prob, b.success_prob);
            assert!(b.params.is_empty());
        }
    }

    #[test]
    fn wall_time_is_zeroed_by_default() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[record(0, None)], false).unwrap();
        assert!(String::from_utf8(buf).unwrap().trim_end().ends_with(",400,0"));
    }

    #[test]
    fn empty_record_set_still_has_header() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[], false).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), CSV_HEADER.join(","));
    }

    #[test]
    fn missing_column_is_named() {
        let text = "graph_id,depth,optimizer,backend,trial,seed,final_expectation,evals_used,wall_ms\n";
        let err = read_csv(text.as_bytes(), "r.csv").unwrap_err().to_string();
        assert!(err.contains("success_prob"), "{err}");
    }

    #[test]
    fn bad_row_reports_line() {
        let mut text = CSV_HEADER.join(",");
        text.push_str("\ng,1,spsa,noisy,0,1,2.0,,10,0\ng,1,cobyla,noisy,0,1,2.0,,10,0\n");
        let err = read_csv(text.as_bytes(), "r.csv").unwrap_err().to_string();
        assert!(err.starts_with("r.csv:3:"), "{err}");
    }
}
