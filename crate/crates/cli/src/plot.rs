//! The `plotdata` subcommand: collapse a results CSV into one row per
//! (instance, method, scheme, K) with means and standard errors, ready for
//! plotting.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use crate::run::RESULTS_SCHEMA;

#[derive(Args)]
pub struct PlotArgs {
    /// Results CSV produced by `run`.
    #[arg(long)]
    pub input: PathBuf,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub const PLOT_HEADER: [&str; 10] = [
    "schema",
    "instance",
    "method",
    "scheme",
    "k",
    "trials",
    "mean_objective",
    "stderr_objective",
    "mean_rel_gap",
    "stderr_rel_gap",
];

#[derive(Default)]
struct Bucket {
    objectives: Vec<f64>,
    rel_gaps: Vec<f64>,
}

fn mean_stderr(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Some((mean, (var / n).sqrt()))
}

pub fn cmd_plotdata(args: PlotArgs) -> Result<()> {
    let mut reader = csv::Reader::from_path(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("input is missing the `{name}` column"))
    };
    let (c_schema, c_instance, c_method, c_scheme, c_k) = (
        col("schema")?,
        col("instance")?,
        col("method")?,
        col("scheme")?,
        col("k")?,
    );
    let (c_objective, c_rel_gap) = (col("objective")?, col("rel_gap")?);

    let mut buckets: BTreeMap<(String, String, String, u64), Bucket> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        if &record[c_schema] != RESULTS_SCHEMA {
            bail!("unsupported results schema `{}`", &record[c_schema]);
        }
        let k: u64 = match record[c_k].parse() {
            Ok(k) => k,
            Err(_) => continue, // methods without a sample size aggregate nowhere
        };
        let key = (
            record[c_instance].to_string(),
            record[c_method].to_string(),
            record[c_scheme].to_string(),
            k,
        );
        let bucket = buckets.entry(key).or_default();
        if let Ok(v) = record[c_objective].parse::<f64>() {
            bucket.objectives.push(v);
        }
        if let Ok(g) = record[c_rel_gap].parse::<f64>() {
            bucket.rel_gaps.push(g);
        }
    }

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(PLOT_HEADER)?;
    for ((instance, method, scheme, k), bucket) in &buckets {
        let obj = mean_stderr(&bucket.objectives);
        let gap = mean_stderr(&bucket.rel_gaps);
        let fmt = |v: Option<(f64, f64)>, pick_mean: bool| -> String {
            v.map(|(m, s)| format!("{}", if pick_mean { m } else { s }))
                .unwrap_or_default()
        };
        writer.write_record([
            "plot-v1".to_string(),
            instance.clone(),
            method.clone(),
            scheme.clone(),
            k.to_string(),
            bucket.objectives.len().to_string(),
            fmt(obj, true),
            fmt(obj, false),
            fmt(gap, true),
            fmt(gap, false),
        ])?;
    }
    let bytes = writer.into_inner().context("flushing csv")?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
        }
        None => print!("{}", String::from_utf8(bytes).expect("csv is utf-8")),
    }
    Ok(())
}
