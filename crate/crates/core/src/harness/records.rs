//! CSV output of sweep records.

use std::io::{Read, Write};
use std::path::Path;

use super::sweep::ResultRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 12] = [
    "param",
    "value",
    "scheme",
    "trial",
    "seed",
    "throughput_nats",
    "throughput_bits",
    "t01",
    "t02",
    "tau_sum",
    "mm_iters",
    "elapsed_ms",
];

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn write_csv<W: Write>(records: &[ResultRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.param.name().to_string(),
            sci(r.value),
            r.scheme.name().to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            sci(r.throughput_nats),
            sci(r.throughput_bits),
            sci(r.t01),
            sci(r.t02),
            sci(r.tau_sum),
            r.mm_iters.to_string(),
            sci(r.elapsed_ms),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[ResultRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file =
        std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_csv(records, std::io::BufWriter::new(file))
}

/// Reads records back. Failed rows come back with NaN fields and no error
/// message, since the message is not part of the table.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(csv_err)?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    let mut out = Vec::new();
    for (line, row) in rd.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let bad = |what: &str| Error::Config(format!("row {}: bad {what}", line + 1));
        let f = |i: usize| row[i].parse::<f64>().map_err(|_| bad(CSV_HEADER[i]));
        let throughput_nats = f(5)?;
        out.push(ResultRecord {
            param: row[0].parse()?,
            value: f(1)?,
            scheme: row[2].parse()?,
            trial: row[3].parse().map_err(|_| bad("trial"))?,
            seed: row[4].parse().map_err(|_| bad("seed"))?,
            throughput_nats,
            throughput_bits: f(6)?,
            t01: f(7)?,
            t02: f(8)?,
            tau_sum: f(9)?,
            mm_iters: row[10].parse().map_err(|_| bad("mm_iters"))?,
            elapsed_ms: f(11)?,
            error: throughput_nats.is_nan().then(|| "failed".to_string()),
        });
    }
    Ok(out)
}
