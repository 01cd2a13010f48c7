use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sweep::SweepRecord;
use super::tables::{AmplificationRow, OptimalSigma};
use super::SweepConfig;
use crate::error::{Error, Result};
use crate::samplers::Method;

pub const CSV_HEADER: [&str; 10] = [
    "method",
    "n",
    "epsilon",
    "sigma",
    "msd",
    "msd_stderr",
    "accept_rate",
    "nonfinite",
    "seed",
    "walltime_s",
];

const AMPLIFICATION_HEADER: [&str; 8] = [
    "method",
    "n",
    "epsilon",
    "sigma_opt",
    "msd_opt",
    "ratio",
    "endpoint",
    "stagnant",
];

/// JSON maps NaN to null; this keeps the round trip lossless.
pub(crate) mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Writes the sweep CSV. Floats use the shortest round-trip form, so equal
/// records give equal bytes.
pub fn write_records_csv<W: Write>(records: &[SweepRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in records {
        out.write_record([
            r.method.name().to_string(),
            r.n.to_string(),
            r.epsilon.to_string(),
            r.sigma.to_string(),
            r.msd.to_string(),
            r.msd_stderr.to_string(),
            r.accept_rate.to_string(),
            r.nonfinite.to_string(),
            r.seed.to_string(),
            r.walltime_s.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    write_records_csv(records, BufWriter::new(File::create(path)?))
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    row.get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::InvalidParameter(format!("line {line}: bad {} field", CSV_HEADER[i])))
}

/// Parses a CSV written by [`write_records_csv`]. Cells that failed have
/// NaN MSDs and no error text.
pub fn read_records_csv<R: Read>(r: R) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::InvalidParameter(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut out = Vec::new();
    for (k, row) in rdr.records().enumerate() {
        let row = row?;
        let line = k as u64 + 2;
        let method: Method = field(&row, 0, line)?;
        out.push(SweepRecord {
            method,
            n: field(&row, 1, line)?,
            epsilon: field(&row, 2, line)?,
            sigma: field(&row, 3, line)?,
            msd: field(&row, 4, line)?,
            msd_stderr: field(&row, 5, line)?,
            accept_rate: field(&row, 6, line)?,
            nonfinite: field(&row, 7, line)?,
            seed: field(&row, 8, line)?,
            walltime_s: field(&row, 9, line)?,
            replicas: 1,
            error: None,
        });
    }
    Ok(out)
}

/// Everything needed to replay and audit a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub schema_version: u32,
    pub config: SweepConfig,
    pub records: Vec<SweepRecord>,
    pub optima: Vec<OptimalSigma>,
    /// `(cell description, message)` for every failed cell.
    pub errors: Vec<(String, String)>,
}

impl SweepSummary {
    pub fn new(config: &SweepConfig, records: &[SweepRecord]) -> Self {
        let optima = super::tables::optima_by_cell(records).unwrap_or_default();
        let errors = records
            .iter()
            .filter_map(|r| {
                r.error.as_ref().map(|e| {
                    (
                        format!("{} n={} eps={} sigma={}", r.method, r.n, r.epsilon, r.sigma),
                        e.clone(),
                    )
                })
            })
            .collect();
        Self {
            schema_version: config.schema_version,
            config: config.clone(),
            records: records.to_vec(),
            optima,
            errors,
        }
    }
}

pub fn emit_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn emit_amplification_csv<W: Write>(rows: &[AmplificationRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(AMPLIFICATION_HEADER)?;
    for r in rows {
        out.write_record([
            r.method.name().to_string(),
            r.n.to_string(),
            r.epsilon.to_string(),
            r.sigma_opt.to_string(),
            r.msd_opt.to_string(),
            r.ratio.to_string(),
            r.endpoint.to_string(),
            r.stagnant.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Fixed-width text table; `*` marks optima on a grid endpoint and `!` a
/// stagnant cell.
pub fn render_amplification(rows: &[AmplificationRow]) -> String {
    let mut s = format!(
        "{:<14} {:>4} {:>12} {:>10} {:>12} {:>10}\n",
        "method", "n", "epsilon", "sigma*", "msd*", "ratio"
    );
    for r in rows {
        let flag = match (r.endpoint, r.stagnant) {
            (_, true) => "!",
            (true, false) => "*",
            _ => "",
        };
        let sigma = if r.sigma_opt.is_nan() {
            "-".to_string()
        } else {
            format!("{:.4}", r.sigma_opt)
        };
        s.push_str(&format!(
            "{:<14} {:>4} {:>12.6e} {:>10} {:>12.5e} {:>10.3}{}\n",
            r.method.name(),
            r.n,
            r.epsilon,
            sigma,
            r.msd_opt,
            r.ratio,
            flag
        ));
    }
    s
}
