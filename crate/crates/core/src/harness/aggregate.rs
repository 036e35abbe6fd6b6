//! Seed-averaged regret curves with normal-approximation 95% bands.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::harness::regret::RunRecord;

pub const AGGREGATE_HEADER: [&str; 5] =
    ["episode", "mean_regret", "ci_lower", "ci_upper", "n_seeds"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateRow {
    pub episode: usize,
    pub mean_regret: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub n_seeds: usize,
}

/// Mean cumulative regret across runs at every episode, `mean +- 1.96 sd / sqrt(n)`.
pub fn aggregate(records: &[RunRecord]) -> Result<Vec<AggregateRow>> {
    let first = records.first().ok_or(Error::NoPolicies)?;
    let k = first.episodes();
    if records.iter().any(|r| r.episodes() != k) {
        return Err(Error::InvalidParameter(
            "runs to aggregate have different lengths".into(),
        ));
    }
    let n = records.len();
    Ok((0..k)
        .map(|i| {
            let mean = records.iter().map(|r| r.cumulative_regret[i]).sum::<f64>() / n as f64;
            let sd = if n > 1 {
                let ss: f64 = records
                    .iter()
                    .map(|r| (r.cumulative_regret[i] - mean).powi(2))
                    .sum();
                (ss / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            let half = 1.96 * sd / (n as f64).sqrt();
            AggregateRow {
                episode: i + 1,
                mean_regret: mean,
                ci_lower: mean - half,
                ci_upper: mean + half,
                n_seeds: n,
            }
        })
        .collect())
}

pub fn write_aggregate_csv<W: Write>(rows: &[AggregateRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER)?;
    for r in rows {
        w.write_record([
            r.episode.to_string(),
            r.mean_regret.to_string(),
            r.ci_lower.to_string(),
            r.ci_upper.to_string(),
            r.n_seeds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_aggregate_csv<R: Read>(input: R) -> Result<Vec<AggregateRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != AGGREGATE_HEADER {
        return Err(Error::MalformedCsv(format!(
            "unexpected header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| -> Result<&str> {
            record
                .get(i)
                .ok_or_else(|| Error::MalformedCsv(format!("row {} is short", line + 1)))
        };
        let num = |i: usize| -> Result<f64> {
            let text = field(i)?;
            text.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    Error::MalformedCsv(format!("row {}: bad number `{text}`", line + 1))
                })
        };
        let int = |i: usize| -> Result<usize> {
            let text = field(i)?;
            text.parse::<usize>()
                .map_err(|_| Error::MalformedCsv(format!("row {}: bad integer `{text}`", line + 1)))
        };
        rows.push(AggregateRow {
            episode: int(0)?,
            mean_regret: num(1)?,
            ci_lower: num(2)?,
            ci_upper: num(3)?,
            n_seeds: int(4)?,
        });
    }
    Ok(rows)
}
