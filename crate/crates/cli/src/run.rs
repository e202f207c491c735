//! The `run` subcommand: execute a method over a K-sweep and seeded trials,
//! in parallel across trials, and emit a fixed-schema results CSV.
//!
//! Every row is a pure function of (instance, config, trial index): trial
//! seeds derive from the master seed and the job coordinates, results are
//! collected in job order, and timing columns are the only fields that vary
//! between repeated invocations.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use colrand::colgen::{run_cg, run_cg_cold, warm_start_from_cr, CgOptions, InitProvenance};
use colrand::cr::{
    run_cr_groupwise, run_cr_iid, solve_distributional, solve_exact, solve_near_feasibility,
    CrRun,
};
use colrand::lp::{optimality_gap, SimplexOptions, SolveStatus};
use colrand::oracles::Instance;
use colrand::rng::Stream;
use colrand::sampling::sample_iid;

pub const RESULTS_SCHEMA: &str = "results-v1";
/// Column-space enumeration cap for exact references.
pub const ENUM_CAP: u64 = 200_000;

pub const CSV_HEADER: [&str; 19] = [
    "schema",
    "instance",
    "method",
    "scheme",
    "k",
    "n_r",
    "trial",
    "seed",
    "status",
    "objective",
    "ref_objective",
    "abs_gap",
    "rel_gap",
    "sampling_ms",
    "solve_ms",
    "cg_iterations",
    "cg_init",
    "columns_built",
    "resamples",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Column-randomized solve at each K.
    Cr,
    /// Column generation to termination.
    Cg,
    /// Column randomization followed by warm-started column generation.
    CgWarm,
    /// Exact solve of the complete problem (enumerable families).
    Exact,
    /// Box-constrained distributional counterpart.
    Distr,
    /// Minimum-total-infeasibility value of the sampled program.
    Feas,
}

impl Method {
    fn label(self) -> &'static str {
        match self {
            Method::Cr => "cr",
            Method::Cg => "cg",
            Method::CgWarm => "cg-warm",
            Method::Exact => "exact",
            Method::Distr => "distr",
            Method::Feas => "feas",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Iid,
    Groupwise,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RefArg {
    /// Exact enumeration when possible, else converged column generation,
    /// else no reference.
    Auto,
    Exact,
    Cg,
    None,
}

#[derive(Args)]
pub struct RunArgs {
    /// Instance JSON file.
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum)]
    pub method: Method,
    /// Sample sizes to sweep (comma separated).
    #[arg(long, alias = "K", value_delimiter = ',')]
    pub k: Vec<usize>,
    #[arg(long, value_enum, default_value_t = SchemeArg::Iid)]
    pub scheme: SchemeArg,
    /// Rounds per group for the groupwise scheme.
    #[arg(long = "n-r")]
    pub n_r: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Master seed; trial seeds derive from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Box constant for the distributional counterpart (defaults to the
    /// column count, which turns a uniform distribution into a unit box).
    #[arg(long, alias = "C")]
    pub c: Option<f64>,
    /// Re-draw an infeasible sample up to this many times before recording
    /// the outcome.
    #[arg(long, default_value_t = 0)]
    pub resample_on_infeasible: usize,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = RefArg::Auto)]
    pub reference: RefArg,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Default)]
struct Row {
    method: &'static str,
    scheme: &'static str,
    k: Option<usize>,
    n_r: Option<usize>,
    trial: usize,
    seed: u64,
    status: &'static str,
    objective: Option<f64>,
    abs_gap: Option<f64>,
    rel_gap: Option<f64>,
    sampling_ms: f64,
    solve_ms: f64,
    cg_iterations: Option<usize>,
    cg_init: Option<&'static str>,
    columns_built: Option<usize>,
    resamples: Option<usize>,
}

fn status_label(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::Unbounded => "unbounded",
        SolveStatus::IterationLimit => "iteration-limit",
    }
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn fmt_opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

struct RunContext {
    instance: Instance,
    reference: Option<f64>,
    opts: SimplexOptions,
    master_seed: u64,
    resample_cap: usize,
    groupwise: bool,
    /// Box constant for the distributional method.
    distr_c: Option<f64>,
}

impl RunContext {
    /// Seed of a trial's sample: a pure function of (master, K-slot, trial,
    /// resample attempt).
    fn sample_seed(&self, k_slot: usize, trial: usize, attempt: usize) -> u64 {
        Stream::new(self.master_seed)
            .derive_named("run")
            .derive(k_slot as u64)
            .derive(trial as u64)
            .derive(attempt as u64)
            .next_u64()
    }

    /// Runs a sampled solve with the resample-on-infeasible policy.
    fn sampled_run(&self, k_slot: usize, trial: usize) -> Result<(CrRun, u64, usize)> {
        let mut attempt = 0;
        loop {
            let seed = self.sample_seed(k_slot, trial, attempt);
            let run = if self.groupwise {
                run_cr_groupwise(&self.instance, k_slot, seed, &self.opts)?
            } else {
                run_cr_iid(&self.instance, k_slot, seed, &self.opts)?
            };
            if run.status() != SolveStatus::Infeasible || attempt >= self.resample_cap {
                return Ok((run, seed, attempt));
            }
            attempt += 1;
        }
    }

    fn gaps(&self, objective: f64) -> (Option<f64>, Option<f64>) {
        let Some(reference) = self.reference else {
            return (None, None);
        };
        let abs = optimality_gap(self.instance.objective(), reference, objective);
        let rel = (reference.abs() > 1e-9).then(|| abs / reference.abs());
        (Some(abs), rel)
    }
}

fn scheme_label(groupwise: bool) -> &'static str {
    if groupwise {
        "groupwise"
    } else {
        "iid"
    }
}

fn cr_row(ctx: &RunContext, k_slot: usize, trial: usize) -> Result<Row> {
    let (run, seed, attempt) = ctx.sampled_run(k_slot, trial)?;
    let (abs_gap, rel_gap) = if run.status() == SolveStatus::Optimal {
        ctx.gaps(run.objective())
    } else {
        (None, None)
    };
    Ok(Row {
        method: "cr",
        scheme: scheme_label(ctx.groupwise),
        k: Some(run.sample.len()),
        n_r: ctx.groupwise.then_some(k_slot),
        trial,
        seed,
        status: status_label(run.status()),
        objective: (run.status() == SolveStatus::Optimal).then(|| run.objective()),
        abs_gap,
        rel_gap,
        sampling_ms: run.sampling_ms,
        solve_ms: run.solve_ms,
        columns_built: Some(run.columns_built),
        resamples: Some(attempt),
        ..Row::default()
    })
}

fn feas_row(ctx: &RunContext, k_slot: usize, trial: usize) -> Result<Row> {
    let seed = ctx.sample_seed(k_slot, trial, 0);
    let t0 = std::time::Instant::now();
    let sample = if ctx.groupwise {
        colrand::sampling::sample_groupwise(&ctx.instance.oracle(), k_slot, seed)?
    } else {
        sample_iid(&ctx.instance.oracle(), k_slot, seed)
    };
    let sampling_ms = t0.elapsed().as_secs_f64() * 1e3;
    let t1 = std::time::Instant::now();
    let value = solve_near_feasibility(&ctx.instance, &sample, &ctx.opts)?;
    Ok(Row {
        method: "feas",
        scheme: scheme_label(ctx.groupwise),
        k: Some(sample.len()),
        n_r: ctx.groupwise.then_some(k_slot),
        trial,
        seed,
        status: "optimal",
        objective: Some(value),
        sampling_ms,
        solve_ms: t1.elapsed().as_secs_f64() * 1e3,
        columns_built: Some(sample.len()),
        ..Row::default()
    })
}

fn cg_warm_row(ctx: &RunContext, k_slot: usize, trial: usize, cg_opts: &CgOptions) -> Result<Row> {
    let (run, seed, attempt) = ctx.sampled_run(k_slot, trial)?;
    if run.status() != SolveStatus::Optimal {
        return Ok(Row {
            method: "cg-warm",
            scheme: scheme_label(ctx.groupwise),
            k: Some(run.sample.len()),
            n_r: ctx.groupwise.then_some(k_slot),
            trial,
            seed,
            status: status_label(run.status()),
            sampling_ms: run.sampling_ms,
            solve_ms: run.solve_ms,
            columns_built: Some(run.columns_built),
            resamples: Some(attempt),
            ..Row::default()
        });
    }
    let init = warm_start_from_cr(&ctx.instance, &run)?;
    let t0 = std::time::Instant::now();
    let cg = run_cg(&ctx.instance, init, InitProvenance::CrWarmStart, cg_opts)?;
    let solve_ms = run.solve_ms + t0.elapsed().as_secs_f64() * 1e3;
    let (abs_gap, rel_gap) = ctx.gaps(cg.objective());
    Ok(Row {
        method: "cg-warm",
        scheme: scheme_label(ctx.groupwise),
        k: Some(run.sample.len()),
        n_r: ctx.groupwise.then_some(k_slot),
        trial,
        seed,
        status: if cg.converged { "optimal" } else { "iteration-limit" },
        objective: Some(cg.objective()),
        abs_gap,
        rel_gap,
        sampling_ms: run.sampling_ms,
        solve_ms,
        cg_iterations: Some(cg.iterations),
        cg_init: Some("cr"),
        columns_built: Some(cg.columns.len()),
        resamples: Some(attempt),
    })
}

fn cg_row(ctx: &RunContext, trial: usize, cg_opts: &CgOptions) -> Result<Row> {
    let seed = ctx.sample_seed(0, trial, 0);
    let t0 = std::time::Instant::now();
    let cg = run_cg_cold(&ctx.instance, seed, cg_opts)?;
    let solve_ms = t0.elapsed().as_secs_f64() * 1e3;
    let (abs_gap, rel_gap) = ctx.gaps(cg.objective());
    Ok(Row {
        method: "cg",
        scheme: "iid",
        trial,
        seed,
        status: if cg.converged { "optimal" } else { "iteration-limit" },
        objective: Some(cg.objective()),
        abs_gap,
        rel_gap,
        solve_ms,
        cg_iterations: Some(cg.iterations),
        cg_init: Some("cold"),
        columns_built: Some(cg.columns.len()),
        ..Row::default()
    })
}

/// Reference optimum in precedence order: exact enumeration, then converged
/// column generation, then none.
fn resolve_reference(
    instance: &Instance,
    how: RefArg,
    opts: &SimplexOptions,
) -> Result<Option<f64>> {
    let exact = || -> Result<f64> {
        let res = solve_exact(instance, ENUM_CAP, opts)?;
        if res.status != SolveStatus::Optimal {
            bail!("complete problem is {:?}", res.status);
        }
        Ok(res.objective)
    };
    let cg = || -> Result<f64> {
        let run = run_cg_cold(instance, 0, &CgOptions::default())?;
        if !run.converged {
            bail!("column generation hit its iteration cap");
        }
        Ok(run.objective())
    };
    match how {
        RefArg::None => Ok(None),
        RefArg::Exact => exact().map(Some),
        RefArg::Cg => cg().map(Some),
        RefArg::Auto => {
            if instance.oracle().num_columns().is_some_and(|n| n <= ENUM_CAP) {
                exact().map(Some)
            } else if colrand::colgen::has_pricer(instance) {
                cg().map(Some)
            } else {
                Ok(None)
            }
        }
    }
}

pub fn cmd_run(args: RunArgs) -> Result<()> {
    let instance = super::load_instance(&args.instance)?;
    let groupwise = args.scheme == SchemeArg::Groupwise;
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let needs_k = matches!(args.method, Method::Cr | Method::CgWarm | Method::Feas);
    let k_slots: Vec<usize> = if groupwise {
        let n_r = args.n_r.context("--n-r is required with --scheme groupwise")?;
        if n_r == 0 {
            bail!("--n-r must be at least 1");
        }
        vec![n_r]
    } else {
        args.k.clone()
    };
    if needs_k && k_slots.is_empty() {
        bail!("--k list must be nonempty for this method");
    }
    let opts = SimplexOptions::default();
    let reference = resolve_reference(&instance, args.reference, &opts)?;
    let ctx = RunContext {
        instance,
        reference,
        opts,
        master_seed: args.seed,
        resample_cap: args.resample_on_infeasible,
        groupwise,
        distr_c: args.c,
    };
    let cg_opts = CgOptions::default();

    // One job per (K-slot, trial), kept in deterministic order; the worker
    // pool only changes who computes a row, never its content or position.
    let jobs: Vec<(usize, usize)> = match args.method {
        Method::Cr | Method::CgWarm | Method::Feas => k_slots
            .iter()
            .flat_map(|&k| (0..args.trials).map(move |t| (k, t)))
            .collect(),
        Method::Cg => (0..args.trials).map(|t| (0, t)).collect(),
        Method::Exact | Method::Distr => vec![(0, 0)],
    };
    let threads = super::resolve_threads(args.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building worker pool")?;
    let file = std::fs::File::create(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(CSV_HEADER)?;
    writer.flush()?;
    // Completed rows are flushed incrementally, in job order: each worker
    // parks its row in the ordered buffer and whoever holds the lock drains
    // the ready prefix to the file.
    let sink = std::sync::Mutex::new(RowSink {
        writer,
        pending: std::collections::BTreeMap::new(),
        next: 0,
        instance: ctx.instance.name.clone(),
        reference: ctx.reference,
        written: 0,
    });
    let row_count = jobs.len();
    let result: Result<Vec<()>> = pool.install(|| {
        use rayon::prelude::*;
        jobs.par_iter()
            .enumerate()
            .map(|(index, &(k, trial))| {
                let row = execute_job(&ctx, args.method, k, trial, &cg_opts)?;
                sink.lock().expect("sink lock").push(index, row)
            })
            .collect()
    });
    result?;
    let mut sink = sink.into_inner().expect("sink lock");
    assert_eq!(sink.written, row_count, "row buffer not fully drained");
    sink.writer.flush().context("flushing csv")?;
    println!(
        "wrote {} ({} rows, method {})",
        args.out.display(),
        row_count,
        args.method.label()
    );
    Ok(())
}

struct RowSink {
    writer: csv::Writer<std::fs::File>,
    pending: std::collections::BTreeMap<usize, Row>,
    next: usize,
    instance: String,
    reference: Option<f64>,
    written: usize,
}

impl RowSink {
    fn push(&mut self, index: usize, row: Row) -> Result<()> {
        self.pending.insert(index, row);
        while let Some(row) = self.pending.remove(&self.next) {
            self.write_row(&row)?;
            self.next += 1;
            self.written += 1;
        }
        Ok(())
    }

    fn write_row(&mut self, row: &Row) -> Result<()> {
        self.writer.write_record([
            RESULTS_SCHEMA.to_string(),
            self.instance.clone(),
            row.method.to_string(),
            row.scheme.to_string(),
            fmt_opt_usize(row.k),
            fmt_opt_usize(row.n_r),
            row.trial.to_string(),
            row.seed.to_string(),
            row.status.to_string(),
            fmt_opt_f64(row.objective),
            fmt_opt_f64(self.reference),
            fmt_opt_f64(row.abs_gap),
            fmt_opt_f64(row.rel_gap),
            format!("{:.3}", row.sampling_ms),
            format!("{:.3}", row.solve_ms),
            fmt_opt_usize(row.cg_iterations),
            row.cg_init.unwrap_or_default().to_string(),
            fmt_opt_usize(row.columns_built),
            fmt_opt_usize(row.resamples),
        ])?;
        self.writer.flush()?;
        Ok(())
    }
}

fn execute_job(
    ctx: &RunContext,
    method: Method,
    k: usize,
    trial: usize,
    cg_opts: &CgOptions,
) -> Result<Row> {
    match method {
        Method::Cr => cr_row(ctx, k, trial),
        Method::Feas => feas_row(ctx, k, trial),
        Method::CgWarm => cg_warm_row(ctx, k, trial, cg_opts),
        Method::Cg => cg_row(ctx, trial, cg_opts),
        Method::Exact => {
            let t0 = std::time::Instant::now();
            let res = solve_exact(&ctx.instance, ENUM_CAP, &ctx.opts)?;
            let (abs_gap, rel_gap) = if res.status == SolveStatus::Optimal {
                ctx.gaps(res.objective)
            } else {
                (None, None)
            };
            Ok(Row {
                method: "exact",
                scheme: "iid",
                status: status_label(res.status),
                objective: (res.status == SolveStatus::Optimal).then_some(res.objective),
                abs_gap,
                rel_gap,
                solve_ms: t0.elapsed().as_secs_f64() * 1e3,
                ..Row::default()
            })
        }
        Method::Distr => {
            let n = ctx
                .instance
                .oracle()
                .num_columns()
                .context("distributional counterpart needs an enumerable instance")?;
            let c = ctx.distr_c.unwrap_or(n as f64);
            let t0 = std::time::Instant::now();
            let d = solve_distributional(&ctx.instance, c, ENUM_CAP, &ctx.opts)?;
            let (abs_gap, rel_gap) = if d.result.status == SolveStatus::Optimal {
                ctx.gaps(d.result.objective)
            } else {
                (None, None)
            };
            Ok(Row {
                method: "distr",
                scheme: "iid",
                status: status_label(d.result.status),
                objective: (d.result.status == SolveStatus::Optimal)
                    .then_some(d.result.objective),
                abs_gap,
                rel_gap,
                solve_ms: t0.elapsed().as_secs_f64() * 1e3,
                ..Row::default()
            })
        }
    }
}
