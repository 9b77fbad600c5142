//! Metrics CSV: one header row, then one row per record, LF endings.
//! Rows are flushed as they are written, so any prefix of the file parses.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

pub const HEADER: &str = "step,elapsed_ms,evaluations,fit_ppm,test_ppm,p_threshold";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricsRecord {
    pub step: u64,
    pub elapsed_ms: u64,
    /// Single-sample forward passes spent on training decisions so far.
    pub evaluations: u64,
    pub fit_ppm: u32,
    pub test_ppm: Option<u32>,
    pub p_threshold: u32,
}

impl MetricsRecord {
    pub fn to_csv_row(&self) -> String {
        let test = self.test_ppm.map(|t| t.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.step, self.elapsed_ms, self.evaluations, self.fit_ppm, test, self.p_threshold
        )
    }

    pub fn parse_csv_row(line: &str) -> Option<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return None;
        }
        Some(Self {
            step: f[0].parse().ok()?,
            elapsed_ms: f[1].parse().ok()?,
            evaluations: f[2].parse().ok()?,
            fit_ppm: f[3].parse().ok()?,
            test_ppm: match f[4] {
                "" => None,
                t => Some(t.parse().ok()?),
            },
            p_threshold: f[5].parse().ok()?,
        })
    }
}

pub struct MetricsWriter {
    out: Option<BufWriter<File>>,
}

impl MetricsWriter {
    pub fn create(path: Option<&Path>) -> io::Result<Self> {
        let out = match path {
            Some(p) => {
                let mut w = BufWriter::new(File::create(p)?);
                writeln!(w, "{HEADER}")?;
                w.flush()?;
                Some(w)
            }
            None => None,
        };
        Ok(Self { out })
    }

    pub fn write(&mut self, record: &MetricsRecord) -> io::Result<()> {
        if let Some(w) = &mut self.out {
            writeln!(w, "{}", record.to_csv_row())?;
            w.flush()?;
        }
        Ok(())
    }
}

/// Reads a metrics file. Only newline-terminated rows count, so a file cut
/// short mid-row yields the complete rows before the cut.
pub fn read_metrics(path: &Path) -> io::Result<Vec<MetricsRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut complete: Vec<&str> = text.split('\n').collect();
    complete.pop();
    let mut lines = complete.into_iter();
    if lines.next() != Some(HEADER) {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "missing metrics header"));
    }
    lines
        .map(|l| {
            MetricsRecord::parse_csv_row(l)
                .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, format!("bad metrics row {l:?}")))
        })
        .collect()
}
