//! The `bound` subcommand: evaluate a guarantee on an instance, print the
//! symbol table with provenance, and optionally replay the guarantee over
//! seeded trials to measure its empirical violation rate.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use colrand::bounds::{
    build_report, empirical_violation_rate, BoundArgs, BoundKind, BoundReport, SymbolSource,
    ViolationReport,
};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    /// Generic dual-norm bound with a supplied gamma.
    DualBound,
    /// Generic reduced-cost bound with a supplied chi.
    ReducedCost,
    NearFeasibility,
    PosteriorDual,
    PosteriorSlack,
    TotallyUnimodular,
    Mdp,
    Covering,
    Packing,
    Groupwise,
    Lipschitz,
}

impl From<KindArg> for BoundKind {
    fn from(k: KindArg) -> BoundKind {
        match k {
            KindArg::DualBound => BoundKind::DualBound,
            KindArg::ReducedCost => BoundKind::ReducedCost,
            KindArg::NearFeasibility => BoundKind::NearFeasibility,
            KindArg::PosteriorDual => BoundKind::PosteriorDual,
            KindArg::PosteriorSlack => BoundKind::PosteriorSlack,
            KindArg::TotallyUnimodular => BoundKind::TotallyUnimodular,
            KindArg::Mdp => BoundKind::Mdp,
            KindArg::Covering => BoundKind::Covering,
            KindArg::Packing => BoundKind::Packing,
            KindArg::Groupwise => BoundKind::Groupwise,
            KindArg::Lipschitz => BoundKind::Lipschitz,
        }
    }
}

#[derive(Args)]
pub struct BoundCmdArgs {
    /// Instance JSON file.
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Box constant; defaults to the column count when enumerable (a uniform
    /// distribution then gets a unit box).
    #[arg(long, alias = "C")]
    pub c: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Sample size (rounds per group for the groupwise kind).
    #[arg(long, alias = "K", default_value_t = 100)]
    pub k: usize,
    /// Dual-norm cap for --kind dual-bound.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Reduced-cost-norm cap for --kind reduced-cost.
    #[arg(long)]
    pub chi: Option<f64>,
    /// Seed for the sampled solve behind a-posteriori kinds and for the
    /// violation replay.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Replay the guarantee over this many trials and report the violation
    /// rate.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Output JSON path (report plus optional violation block).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct BoundOutput {
    report: BoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<ViolationReport>,
}

fn source_label(source: SymbolSource) -> &'static str {
    match source {
        SymbolSource::Computed => "computed",
        SymbolSource::Supplied => "supplied",
        SymbolSource::Unavailable => "unavailable",
    }
}

fn print_report(report: &BoundReport) {
    println!("kind: {:?}   instance: {}", report.kind, report.instance);
    println!("{:<16} {:>20}  source", "symbol", "value");
    for s in &report.symbols {
        let value = s.value.map(|v| format!("{v:.10}")).unwrap_or_else(|| "-".into());
        println!("{:<16} {:>20}  {}", s.name, value, source_label(s.source));
    }
    println!("{:<16} {:>20.10}  computed", "term", report.sampling_error_term);
    match report.total_bound {
        Some(t) => println!("{:<16} {:>20.10}  computed", "total", t),
        None => println!("{:<16} {:>20}  unavailable", "total", "-"),
    }
}

pub fn cmd_bound(args: BoundCmdArgs) -> Result<()> {
    let instance = super::load_instance(&args.instance)?;
    let c = match args.c {
        Some(c) => c,
        None => {
            let n = instance
                .oracle()
                .num_columns()
                .context("--c is required for families without an enumerable column space")?;
            println!("note: --c defaulted to the column count n = {n}");
            n as f64
        }
    };
    let bound_args = BoundArgs {
        c,
        delta: args.delta,
        k: args.k,
        gamma: args.gamma,
        chi: args.chi,
        seed: args.seed,
        ..BoundArgs::default()
    };
    let kind: BoundKind = args.kind.into();
    let report = build_report(&instance, kind, &bound_args)?;
    print_report(&report);
    let violation = match args.trials {
        Some(trials) => {
            let v = empirical_violation_rate(&instance, kind, &bound_args, trials)?;
            println!(
                "violations: {}/{} trials ({} feasible), rate {:.4}",
                v.violations, v.trials, v.feasible_trials, v.rate
            );
            Some(v)
        }
        None => None,
    };
    if let Some(out) = &args.out {
        let output = BoundOutput { report, violation };
        let mut text = serde_json::to_string_pretty(&output)?;
        text.push('\n');
        std::fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
        println!("wrote {}", out.display());
    }
    Ok(())
}
