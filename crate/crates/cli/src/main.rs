//! `fiblab`: check, prove, classify and rediscover Fibonacci identities, and
//! build Fibonacci cube spirals.

mod commands;
mod output;
mod records;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "fiblab", version, about = "Exact verification lab for Fibonacci identities")]
pub struct Cli {
    /// Output style: human-readable text or one JSON record per line.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub output: Format,
    /// Write all output to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact numeric sweep of every identity in a file.
    Check(CheckArgs),
    /// Symbolic proof of every identity in a file.
    Prove(ProveArgs),
    /// Degree profile and class of every identity in a file.
    Classify(InputArgs),
    /// Operations on the bundled corpus (or another catalog file).
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Integer-relation search for cubic identities.
    Search(SearchArgs),
    /// Generate a Fibonacci cube arrangement.
    Spiral(SpiralArgs),
    /// Generate and prove an umbral shift identity.
    Umbral(UmbralArgs),
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// Catalog file or plain identity list (`-` for stdin).
    pub file: PathBuf,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Override a parameter range, e.g. `k=0..3` (repeatable).
    #[arg(long = "grid", value_name = "NAME=LO..HI")]
    pub grid: Vec<String>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Consecutive values swept per index from its lower bound.
    #[arg(long, default_value_t = 300)]
    pub range: u64,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug)]
pub struct ProveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Include per-case Binet residuals.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Subcommand, Debug)]
pub enum CatalogAction {
    /// Verify every entry numerically, symbolically or both.
    Verify {
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        /// Catalog to verify instead of the bundled corpus.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Consecutive values swept per index.
        #[arg(long, default_value_t = 300)]
        range: u64,
    },
    /// List entries with their stated placement.
    List {
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Print the catalog in canonical form.
    Show {
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ModeArg {
    Numeric,
    Symbolic,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ProductsArg {
    Cubes,
    Split12,
    Distinct,
    All,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    /// Offset window, e.g. `-1..1`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: String,
    /// Target columns, e.g. `triple:0,signed:0..6,fib:1,one,sign`.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    pub targets: String,
    /// Which degree-3 products of window atoms enter the basis.
    #[arg(long, value_enum, default_value_t = ProductsArg::All)]
    pub products: ProductsArg,
    /// Number of consecutive sample indices (default: basis size + 10).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Maximum number of terms in a relation.
    #[arg(long, default_value_t = 3)]
    pub max_terms: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum GeometryArg {
    Json,
    Obj,
}

#[derive(Args, Debug)]
pub struct SpiralArgs {
    /// Map family: 1, 2 or 3.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub map: u8,
    /// Number of cubes.
    #[arg(long, default_value_t = 15)]
    pub n: usize,
    /// Emit geometry in this format.
    #[arg(long, value_enum)]
    pub format: Option<GeometryArg>,
    /// Emit the packing report and fail if an exact property does not hold.
    #[arg(long)]
    pub check: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum VariantArg {
    Plus,
    Minus,
}

#[derive(Args, Debug)]
pub struct UmbralArgs {
    /// Umbral power.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub p: u32,
    #[arg(long, value_enum, default_value_t = VariantArg::Plus)]
    pub variant: VariantArg,
}

fn configure_threads() {
    let Ok(v) = std::env::var("FIBLAB_THREADS") else {
        return;
    };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("fiblab: FIBLAB_THREADS ignored: {e}");
            }
        }
        _ => eprintln!("fiblab: FIBLAB_THREADS must be a positive integer (got `{v}`)"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_threads();
    let mut sink = output::Sink::new(cli.output);
    let result = commands::run(&cli.command, &mut sink);
    if let Err(e) = sink.flush(cli.out.as_deref()) {
        eprintln!("fiblab: {e}");
        return ExitCode::from(1);
    }
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("fiblab: {e}");
            ExitCode::from(1)
        }
    }
}
