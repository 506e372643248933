//! Convergence history as CSV.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::adaptivity::{HistoryRow, Phase, RunHistory};
use crate::error::{Error, Result};

pub const HISTORY_HEADER: [&str; 14] = [
    "k",
    "j",
    "phase",
    "n_elements",
    "n_dofs",
    "n_marked",
    "eta",
    "lambda",
    "osc_u",
    "osc_f",
    "energy_error",
    "eps_k",
    "cg_iters",
    "wall_ms",
];

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn record(r: &HistoryRow) -> [String; 14] {
    [
        r.k.to_string(),
        r.j.to_string(),
        r.phase.as_str().to_string(),
        r.n_elements.to_string(),
        r.n_dofs.to_string(),
        r.n_marked.to_string(),
        real(r.eta),
        real(r.lambda),
        real(r.osc_u),
        real(r.osc_f),
        real(r.energy_error),
        real(r.eps_k),
        r.cg_iters.to_string(),
        real(r.wall_ms),
    ]
}

/// Streams rows to a CSV file, flushing after each one.
pub struct HistoryWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl HistoryWriter<BufWriter<File>> {
    pub fn create(path: &Path) -> Result<Self> {
        Self::new(BufWriter::new(File::create(path)?))
    }
}

impl<W: Write> HistoryWriter<W> {
    pub fn new(w: W) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        inner.write_record(HISTORY_HEADER)?;
        inner.flush()?;
        Ok(HistoryWriter { inner })
    }

    pub fn write(&mut self, row: &HistoryRow) -> Result<()> {
        self.inner.write_record(record(row))?;
        self.inner.flush()?;
        Ok(())
    }
}

pub fn export_history_csv(history: &RunHistory, path: &Path) -> Result<()> {
    let mut w = HistoryWriter::create(path)?;
    for row in &history.rows {
        w.write(row)?;
    }
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| Error::Parse {
        path: Default::default(),
        line: line as usize,
        col: i + 1,
        msg: format!("bad value `{raw}` in column `{}`", HISTORY_HEADER[i]),
    })
}

pub fn read_history_csv(path: &Path) -> Result<RunHistory> {
    let with_path = |e: Error| match e {
        Error::Parse { line, col, msg, .. } => Error::Parse {
            path: path.to_path_buf(),
            line,
            col,
            msg,
        },
        e => e,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        col: 0,
        msg: e.to_string(),
    })?;
    let header = reader.headers()?.clone();
    if header.iter().ne(HISTORY_HEADER.iter().copied()) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            col: 1,
            msg: "unexpected header".into(),
        });
    }
    let mut history = RunHistory::default();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = (|| -> Result<HistoryRow> {
            Ok(HistoryRow {
                k: field(&rec, 0, line)?,
                j: field(&rec, 1, line)?,
                phase: rec.get(2).unwrap_or("").parse::<Phase>()?,
                n_elements: field(&rec, 3, line)?,
                n_dofs: field(&rec, 4, line)?,
                n_marked: field(&rec, 5, line)?,
                eta: field(&rec, 6, line)?,
                lambda: field(&rec, 7, line)?,
                osc_u: field(&rec, 8, line)?,
                osc_f: field(&rec, 9, line)?,
                energy_error: field(&rec, 10, line)?,
                eps_k: field(&rec, 11, line)?,
                cg_iters: field(&rec, 12, line)?,
                wall_ms: field(&rec, 13, line)?,
            })
        })()
        .map_err(with_path)?;
        history.push(row);
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> HistoryRow {
        HistoryRow {
            k: 2,
            j: 3,
            phase: Phase::PdeExit,
            n_elements: 120,
            n_dofs: 70,
            n_marked: 0,
            eta: 0.1 + 0.2,
            lambda: 1.0 / 3.0,
            osc_u: 0.0,
            osc_f: 5e-300,
            energy_error: f64::NAN,
            eps_k: std::f64::consts::PI,
            cg_iters: 17,
            wall_ms: 12.5,
        }
    }

    #[test]
    fn empty_history_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        export_history_csv(&RunHistory::default(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, HISTORY_HEADER.join(",") + "\n");
    }

    #[test]
    fn one_event_gives_two_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        let mut h = RunHistory::default();
        h.push(sample());
        export_history_csv(&h, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        let mut h = RunHistory::default();
        h.push(sample());
        h.push(HistoryRow {
            eta: 1.0 - f64::EPSILON,
            ..sample()
        });
        export_history_csv(&h, &path).unwrap();
        let back = read_history_csv(&path).unwrap();
        for (a, b) in h.rows.iter().zip(&back.rows) {
            for (x, y) in [
                (a.eta, b.eta),
                (a.lambda, b.lambda),
                (a.osc_u, b.osc_u),
                (a.osc_f, b.osc_f),
                (a.energy_error, b.energy_error),
                (a.eps_k, b.eps_k),
                (a.wall_ms, b.wall_ms),
            ] {
                assert_eq!(x.to_bits(), y.to_bits());
            }
            assert_eq!((a.k, a.j, a.phase, a.n_dofs), (b.k, b.j, b.phase, b.n_dofs));
        }
    }

    #[test]
    fn bad_cell_is_located() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        let mut text = HISTORY_HEADER.join(",") + "\n";
        text.push_str("0,0,pde,1,1,0,x,0,0,0,0,0,0,0\n");
        std::fs::write(&path, text).unwrap();
        match read_history_csv(&path) {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (2, 7)),
            other => panic!("{other:?}"),
        }
    }
}
