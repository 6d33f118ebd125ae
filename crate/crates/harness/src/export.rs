//! CSV and JSON export with a reproducibility header.
//!
//! CSV files carry `#`-prefixed metadata lines (version, config hash, seed,
//! SNR convention) before the column header; JSON files mirror the same
//! tables verbatim through serde.

use crate::error::{HarnessError, Result};
use crate::experiments::{BeamTable, ResultTable, RunMeta, TraceTable};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// Output format selector for the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

fn meta_header(meta: &RunMeta) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# slnrsim v{}", meta.version);
    let _ = writeln!(s, "# config_hash={}", meta.config_hash);
    let _ = writeln!(s, "# seed={}", meta.seed);
    let _ = writeln!(
        s,
        "# snr_db = -10*log10(noise_power); unit-norm aggregate precoders; unit-variance channel entries"
    );
    s
}

pub fn sweep_to_csv(table: &ResultTable) -> String {
    let mut s = meta_header(&table.meta);
    s.push_str("scheme,snr_db,mean_sum_rate_bps_hz,std_err,n_realizations\n");
    for row in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            row.scheme, row.snr_db, row.mean_sum_rate_bps_hz, row.std_err, row.n_realizations
        );
    }
    s
}

pub fn trace_to_csv(table: &TraceTable) -> String {
    let mut s = meta_header(&table.meta);
    let _ = writeln!(s, "# scheme={} snr_db={}", table.scheme, table.snr_db);
    s.push_str("generation,best_fitness,mean_fitness\n");
    for row in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{}",
            row.generation, row.best_fitness, row.mean_fitness
        );
    }
    s
}

pub fn beams_to_csv(table: &BeamTable) -> String {
    let mut s = meta_header(&table.meta);
    let _ = writeln!(s, "# scheme={}", table.scheme);
    s.push_str("angle_deg,node,gain_linear,gain_db\n");
    for row in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            row.angle_deg, row.node, row.gain_linear, row.gain_db
        );
    }
    s
}

pub fn to_json<T: Serialize>(table: &T) -> String {
    let mut s = serde_json::to_string_pretty(table).expect("tables serialize");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| HarnessError::Io {
                path: parent.display().to_string(),
                source,
            })?;
        }
    }
    std::fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Scheme;
    use crate::experiments::{SweepRow, TraceRow};

    fn meta() -> RunMeta {
        RunMeta {
            version: "0.1.0".into(),
            config_hash: "00ff".into(),
            seed: 7,
        }
    }

    #[test]
    fn sweep_csv_schema() {
        let table = ResultTable {
            meta: meta(),
            rows: vec![SweepRow {
                scheme: Scheme::DigitalSlnr,
                snr_db: -12.0,
                mean_sum_rate_bps_hz: 0.5,
                std_err: 0.01,
                n_realizations: 500,
            }],
        };
        let csv = sweep_to_csv(&table);
        assert!(csv.contains("scheme,snr_db,mean_sum_rate_bps_hz,std_err,n_realizations"));
        assert!(csv.contains("digital_slnr,-12,0.5,0.01,500"));
        assert!(csv.starts_with("# slnrsim"));
        assert!(csv.contains("# seed=7"));
    }

    #[test]
    fn trace_csv_schema() {
        let table = TraceTable {
            meta: meta(),
            scheme: Scheme::HybridSlnr,
            snr_db: 10.0,
            rows: vec![TraceRow {
                generation: 0,
                best_fitness: 1.25,
                mean_fitness: 0.75,
            }],
        };
        let csv = trace_to_csv(&table);
        assert!(csv.contains("generation,best_fitness,mean_fitness"));
        assert!(csv.contains("0,1.25,0.75"));
    }
}
