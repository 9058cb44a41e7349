//! Result emission: CSV rows for plotting and JSON with a full config
//! echo.

use std::io::{self, Write};

use serde::Serialize;

use super::{ExperimentConfig, ResultRow};
use crate::{Error, Result};

pub const CSV_HEADER: &str =
    "p,trials,mp_failures,pp_rescues,decoding_failures,logical_failures,ler,ler_ci_low,ler_ci_high,mean_iters,mean_win_k";

pub fn write_csv(rows: &[ResultRow], out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.p,
            r.trials,
            r.mp_failures,
            r.pp_rescues,
            r.decoding_failures,
            r.logical_failures,
            r.ler,
            r.ler_ci_low,
            r.ler_ci_high,
            r.mean_iters,
            r.mean_win_k
        )?;
    }
    Ok(())
}

pub fn csv_string(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("write to vec");
    String::from_utf8(buf).expect("csv is utf-8")
}

#[derive(Serialize)]
struct JsonReport<'a> {
    seed: u64,
    config: &'a ExperimentConfig,
    rows: &'a [ResultRow],
}

pub fn write_json(
    cfg: &ExperimentConfig,
    rows: &[ResultRow],
    out: &mut impl Write,
) -> io::Result<()> {
    let report = JsonReport {
        seed: cfg.seed,
        config: cfg,
        rows,
    };
    serde_json::to_writer_pretty(&mut *out, &report)?;
    writeln!(out)
}

/// Parses the `rows` array back out of an emitted JSON report.
pub fn rows_from_json(text: &str) -> Result<Vec<ResultRow>> {
    #[derive(serde::Deserialize)]
    struct Rows {
        rows: Vec<ResultRow>,
    }
    let parsed: Rows =
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(parsed.rows)
}
