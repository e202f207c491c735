//! Experiment harness: generate instances, run sampled/column-generation/
//! exact solves over seeded trials, compute gap-bound reports, and aggregate
//! result files.

mod bound;
mod plot;
mod run;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use colrand::oracles::{generate, GenSpec, Instance};

#[derive(Parser)]
#[command(name = "colrand", version, about = "Column-randomized linear programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file.
    Generate(GenerateArgs),
    /// Run a solve method over seeded trials and write a results CSV.
    Run(run::RunArgs),
    /// Compute a gap-bound report, optionally with an empirical violation
    /// test, and write it as JSON.
    Bound(bound::BoundCmdArgs),
    /// Aggregate a results CSV into per-(instance, method, K) means.
    Plotdata(plot::PlotArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    CuttingStock,
    Choice,
    Mdp,
    Covering,
    Packing,
    Transportation,
}

#[derive(Args)]
struct GenerateArgs {
    /// Instance family.
    #[arg(long, value_enum)]
    family: Family,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path for the instance JSON.
    #[arg(long)]
    out: PathBuf,
    /// Demand types (cutting-stock).
    #[arg(long)]
    demand_types: Option<usize>,
    /// Stock roll width (cutting-stock).
    #[arg(long)]
    roll_width: Option<u32>,
    /// Product count (choice).
    #[arg(long)]
    products: Option<usize>,
    /// Assortment count (choice).
    #[arg(long)]
    assortments: Option<usize>,
    /// State count (mdp).
    #[arg(long)]
    states: Option<usize>,
    /// Action count (mdp).
    #[arg(long)]
    actions: Option<usize>,
    /// Discount factor (mdp).
    #[arg(long)]
    discount: Option<f64>,
    /// Row count (covering/packing).
    #[arg(long)]
    rows: Option<usize>,
    /// Column count (covering/packing).
    #[arg(long)]
    columns: Option<usize>,
    /// Supply nodes (transportation).
    #[arg(long)]
    supplies: Option<usize>,
    /// Demand nodes (transportation).
    #[arg(long)]
    demands: Option<usize>,
}

fn require<T>(value: Option<T>, flag: &str, family: &str) -> Result<T> {
    value.with_context(|| format!("--{flag} is required for --family {family}"))
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let spec = match args.family {
        Family::CuttingStock => GenSpec::CuttingStock {
            demand_types: require(args.demand_types, "demand-types", "cutting-stock")?,
            roll_width: require(args.roll_width, "roll-width", "cutting-stock")?,
        },
        Family::Choice => GenSpec::Choice {
            products: require(args.products, "products", "choice")?,
            assortments: require(args.assortments, "assortments", "choice")?,
        },
        Family::Mdp => GenSpec::Mdp {
            states: require(args.states, "states", "mdp")?,
            actions: require(args.actions, "actions", "mdp")?,
            discount: require(args.discount, "discount", "mdp")?,
        },
        Family::Covering => GenSpec::Covering {
            rows: require(args.rows, "rows", "covering")?,
            columns: require(args.columns, "columns", "covering")?,
        },
        Family::Packing => GenSpec::Packing {
            rows: require(args.rows, "rows", "packing")?,
            columns: require(args.columns, "columns", "packing")?,
        },
        Family::Transportation => GenSpec::Transportation {
            supplies: require(args.supplies, "supplies", "transportation")?,
            demands: require(args.demands, "demands", "transportation")?,
        },
    };
    let instance = generate(&spec, args.seed)?;
    std::fs::write(&args.out, instance.to_json())
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {} ({})", args.out.display(), instance.name);
    Ok(())
}

fn load_instance(path: &PathBuf) -> Result<Instance> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Instance::from_json(&text)?)
}

/// Worker count: flag, then COLRAND_THREADS, then the machine's parallelism.
fn resolve_threads(flag: Option<usize>) -> Result<usize> {
    if let Some(t) = flag {
        if t == 0 {
            bail!("--threads must be positive");
        }
        return Ok(t);
    }
    if let Ok(env) = std::env::var("COLRAND_THREADS") {
        let t: usize = env
            .parse()
            .with_context(|| format!("COLRAND_THREADS={env} is not a thread count"))?;
        if t == 0 {
            bail!("COLRAND_THREADS must be positive");
        }
        return Ok(t);
    }
    Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(args) => cmd_generate(args),
        Command::Run(args) => run::cmd_run(args),
        Command::Bound(args) => bound::cmd_bound(args),
        Command::Plotdata(args) => plot::cmd_plotdata(args),
    }
}
