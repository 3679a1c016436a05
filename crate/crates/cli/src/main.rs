mod commands;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::Format;

/// Exact Haar integration, partition categories and matrix-model diagnostics
/// for easy quantum groups.
#[derive(Debug, Parser)]
#[command(name = "qwein", version)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Largest partition size enumerated (also read from QWEIN_MAX_LEGS).
    #[arg(long, global = true)]
    pub max_legs: Option<usize>,

    /// Largest monomial degree handed to the integrator.
    #[arg(long, global = true)]
    pub max_degree: Option<usize>,

    /// Largest dense matrix or index sweep, in cells.
    #[arg(long, global = true)]
    pub max_cells: Option<u128>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Haar integral of a monomial, e.g. --group O+:3 --monomial "u(1,1) u(1,1)".
    Integrate(IntegrateArgs),
    /// Moments of the main character, or the N -> infinity table of a category.
    Char(CharArgs),
    /// Moments of the truncated character chi_t.
    Truncated(TruncatedArgs),
    /// List the members of a category between two words.
    Enumerate(EnumerateArgs),
    /// Category generated by partitions, up to a leg bound.
    Closure(ClosureArgs),
    /// Whether a partition belongs to a category.
    Membership(MembershipArgs),
    /// Gram and Weingarten matrices on a fixed-point basis.
    Gram(GramArgs),
    /// Matrix model diagnostics.
    #[command(subcommand)]
    Model(ModelCommand),
    /// Brute-force integral over a finite group (S:N, H:N, K<s>:N).
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    /// Group id such as O:3, U*~:2, S+:4 or OS3:2.
    #[arg(long)]
    pub group: String,
    #[arg(long)]
    pub monomial: String,
    /// Monte Carlo sample count instead of exact integration (O:N and U:N only).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CharArgs {
    #[arg(
        long,
        required_unless_present = "category",
        conflicts_with = "category"
    )]
    pub group: Option<String>,
    /// Power of chi with plain exponents.
    #[arg(long, conflicts_with = "word")]
    pub k: Option<usize>,
    /// Colored word for chi^e, e.g. obob.
    #[arg(long, allow_hyphen_values = true)]
    pub word: Option<String>,
    /// Category for the asymptotic table |D(0, k)|.
    #[arg(long)]
    pub category: Option<String>,
    #[arg(long, default_value_t = 8)]
    pub max_k: usize,
}

#[derive(Debug, Args)]
pub struct TruncatedArgs {
    #[arg(long)]
    pub group: String,
    /// Truncation parameter in (0, 1], as a fraction.
    #[arg(long)]
    pub t: String,
    #[arg(long, required_unless_present = "word", conflicts_with = "word")]
    pub k: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub word: Option<String>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub category: String,
    /// Lower legs of D(0, legs), with plain or alternating colors.
    #[arg(long, required_unless_present = "lower", conflicts_with_all = ["upper", "lower"])]
    pub legs: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub upper: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lower: Option<String>,
}

#[derive(Debug, Args)]
pub struct ClosureArgs {
    /// Generator partition in text form; repeat for several.
    #[arg(long = "generator", required = true)]
    pub generators: Vec<String>,
    #[arg(long, default_value_t = 6)]
    pub bound: usize,
    /// Named category to compare the closure against.
    #[arg(long)]
    pub compare: Option<String>,
    /// Print every member.
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Args)]
pub struct MembershipArgs {
    #[arg(long)]
    pub category: String,
    #[arg(long)]
    pub partition: String,
}

#[derive(Debug, Args)]
pub struct GramArgs {
    #[arg(long)]
    pub category: String,
    #[arg(long, allow_hyphen_values = true)]
    pub word: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub twisted: bool,
}

#[derive(Debug, Args)]
pub struct ModelSource {
    /// Model id, e.g. ONstar:3, s3points, counit:2.
    #[arg(long, required_unless_present = "file", conflicts_with = "file")]
    pub model: Option<String>,
    /// Model definition in the qwein-model/1 text format.
    #[arg(long)]
    pub file: Option<std::path::PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ModelCommand {
    /// Check T_e^2 = T_e for all words up to a length.
    Stationarity {
        #[command(flatten)]
        source: ModelSource,
        #[arg(long, default_value_t = 3)]
        pmax: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Cesaro average of truncated integrals.
    Cesaro {
        #[command(flatten)]
        source: ModelSource,
        #[arg(long)]
        monomial: String,
        #[arg(long, default_value_t = 10_000)]
        depth: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Transfer matrix T_e, or the truncated integral (T_e^r) of a monomial.
    Transfer {
        #[command(flatten)]
        source: ModelSource,
        #[arg(
            long,
            allow_hyphen_values = true,
            required_unless_present = "monomial",
            conflicts_with = "monomial"
        )]
        word: Option<String>,
        #[arg(long)]
        monomial: Option<String>,
        #[arg(long, default_value_t = 1, requires = "monomial")]
        r: usize,
        /// Monte Carlo sample count (Haar-parametrized models only).
        #[arg(long, conflicts_with = "monomial")]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub group: String,
    #[arg(long)]
    pub monomial: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(report) => {
            print!("{}", report.render(cli.format));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_bound_violation() { 3 } else { 2 })
        }
    }
}
