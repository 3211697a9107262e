//! `acyc`: command-line front end for the cyclicity toolkit.
//!
//! Results go to stdout as JSON with sorted keys (CSV for `survey --csv`). Exit codes:
//! 0 success, 1 a verification failed, 2 invalid input, 3 resource or I/O error.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "acyc", version, about = "Cyclicity of elliptic-curve reductions in arithmetic progressions")]
pub struct Cli {
    /// Worker threads for prime sweeps (default: available cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Validate the inputs and stop before computing anything.
    #[arg(long, global = true)]
    pub dry_run: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// The curve [1,0,1,32271697,-1200056843302] and its family point (3/5, -28910265879522405941333082).
    #[value(name = "example-1-4")]
    Example,
}

#[derive(Args, Debug, Clone)]
pub struct CurveArgs {
    /// Weierstrass coefficients `a1,a2,a3,a4,a6` (or `A,B` for a short model).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "preset", required_unless_present = "preset")]
    pub model: Option<String>,

    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Args, Debug, Clone)]
pub struct PointArgs {
    /// Family parameter, e.g. `3/5`.
    #[arg(long, allow_hyphen_values = true, requires = "d0", conflicts_with = "preset", required_unless_present = "preset")]
    pub t0: Option<String>,

    /// Quadratic twist parameter.
    #[arg(long, allow_hyphen_values = true, requires = "t0")]
    pub d0: Option<String>,

    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Args, Debug, Clone)]
pub struct WitnessSource {
    /// Generate the witness from a rational `u0`.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["t0", "preset"])]
    pub u0: Option<String>,

    #[arg(long, allow_hyphen_values = true, requires = "d0", conflicts_with = "preset")]
    pub t0: Option<String>,

    #[arg(long, allow_hyphen_values = true, requires = "t0")]
    pub d0: Option<String>,

    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Args, Debug, Clone)]
pub struct GroupArgs {
    /// Level of the group.
    #[arg(long)]
    pub m: Option<u32>,

    /// Generator as `a,b,c,d` for the matrix (a b; c d); repeatable.
    #[arg(long = "gen", allow_hyphen_values = true)]
    pub gens: Vec<String>,

    /// A named group instead of generators.
    #[arg(long, value_enum, conflicts_with_all = ["m", "gens"])]
    pub named: Option<NamedGroup>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NamedGroup {
    /// GL2(Z/6Z).
    Gl2_6,
    /// The Borel subgroup mod 2.
    B2,
    /// The split Cartan subgroup mod 3.
    Cs3,
    /// B(2) × C_s(3) at level 6.
    G6,
    /// The index-2 subgroup of G6 underlying the family.
    G6Tilde,
    /// The order-4 image of the example curve.
    Example,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count good primes p <= x, p ≡ a mod n, with cyclic reduction.
    Count {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        a: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        x: u64,
    },
    /// Group structure of every reduction up to x, with an optional cache.
    Survey {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        x: u64,
        #[arg(long, requires = "n")]
        a: Option<u64>,
        #[arg(long, requires = "a")]
        n: Option<u64>,
        /// JSON-lines cache file (also settable via ACYC_CACHE).
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Emit `p,status,N,d,e,cyclic` rows instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// The curve family over (t0, d0).
    Family {
        #[command(subcommand)]
        command: FamilyCommand,
    },
    /// Shorthand for `family witness`.
    Witness(WitnessArgs),
    /// Check the headline example: no cyclic primes ≡ 3, 5 mod 8 and the torsion dichotomy.
    VerifyExample {
        #[arg(long, default_value_t = 100_000)]
        x: u64,
    },
    /// Sweep a witness certificate's admissible classes for cyclic primes.
    VerifyWitness {
        #[command(flatten)]
        source: WitnessSource,
        #[arg(long, default_value_t = 10_000)]
        x: u64,
    },
    /// Evaluate C_{E,a,n} from Galois data.
    Constant {
        /// Galois data as JSON.
        #[arg(long, conflicts_with_all = ["preset", "full_image"])]
        data: Option<PathBuf>,
        #[arg(long, value_enum, conflicts_with = "full_image")]
        preset: Option<Preset>,
        /// Open image everywhere (the default when no data is given).
        #[arg(long)]
        full_image: bool,
        #[arg(long, default_value_t = 1)]
        a: u64,
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[arg(long, default_value_t = 1000)]
        cutoff: u64,
        /// Also report the truncated Möbius sum up to this level.
        #[arg(long)]
        d_max: Option<u64>,
    },
    /// Subgroups of GL2(Z/mZ).
    Group {
        #[command(subcommand)]
        command: GroupCommand,
    },
    /// Compare splitting predictions with full torsion over a prime range.
    CrossCheckLemma {
        #[command(flatten)]
        curve: CurveArgs,
        /// Division field as `l=m1,m2,...` (square-free labels); repeatable.
        #[arg(long = "field", allow_hyphen_values = true)]
        fields: Vec<String>,
        #[arg(long, default_value_t = 2000)]
        x: u64,
    },
}

#[derive(Args, Debug)]
pub struct WitnessArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub u0: String,
    /// Also sweep the certificate up to x.
    #[arg(long)]
    pub x: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum FamilyCommand {
    /// Values of f, g, a4, a6, j, Δ, h2, h3 at (t0, d0).
    Eval(PointArgs),
    /// Integral short model at (t0, d0).
    Specialize(PointArgs),
    /// Witness certificate for a rational u0.
    Witness(WitnessArgs),
}

#[derive(Subcommand, Debug)]
pub enum GroupCommand {
    /// Order of the generated group.
    Closure(GroupArgs),
    /// Genus of the associated modular curve, with relative levels.
    Genus(GroupArgs),
    /// The acyclicity criterion on the example level-6 data.
    CheckAcyclicity,
    /// All abelian-quotient witness data for a group.
    SearchWitness(GroupArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(k) = cli.workers {
        if k == 0 {
            return commands::report_error(&commands::CliError::Input("--workers must be positive".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            return commands::report_error(&commands::CliError::Resource(e.to_string()));
        }
    }
    match commands::run(&cli) {
        Ok(out) => {
            // A closed pipe (e.g. `| head`) is not an error of the command.
            let _ = writeln!(std::io::stdout().lock(), "{}", out.text);
            if out.verified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => commands::report_error(&e),
    }
}
