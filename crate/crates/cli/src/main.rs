use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use commands::{CliError, Output};

#[derive(Parser, Debug)]
#[command(name = "wronski", version, about = "Wronskians, polynomial spaces, Bethe equations and Schubert counts")]
struct Cli {
    /// Print machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,

    /// Coefficient field: `rational` or `extension:<minpoly>`; overrides the file.
    #[arg(long, global = true)]
    field: Option<String>,

    /// Record wall-clock time in reports.
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    /// Number of Newton starts.
    #[arg(long, default_value_t = 200)]
    pub starts: usize,

    #[arg(long, env = "WRONSKI_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Residual norm accepted as critical.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,

    /// `w` (fewest variables), `identity`, `all`, or a permutation like `2,1`.
    #[arg(long, default_value = "w")]
    pub sector: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a problem file and print K_i, T_i and l_i.
    Validate { problem: PathBuf },

    /// Littlewood-Richardson coefficients and intersection numbers.
    Lr {
        #[arg(long, conflicts_with_all = ["lambda", "mu", "nu", "box_dims"])]
        problem: Option<PathBuf>,
        /// Parts such as `2,1`.
        #[arg(long, requires_all = ["mu", "box_dims"])]
        lambda: Option<String>,
        #[arg(long)]
        mu: Option<String>,
        /// Print one coefficient instead of the whole product.
        #[arg(long)]
        nu: Option<String>,
        /// Rows and columns of the box.
        #[arg(long = "box", num_args = 2, value_names = ["R", "C"])]
        box_dims: Option<Vec<usize>>,
    },

    /// Find critical points of the master function numerically.
    BetheSolve {
        #[arg(long)]
        problem: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        /// Certify these coordinates exactly instead (comma separated, level by level).
        #[arg(long)]
        candidate: Option<String>,
    },

    /// Local multiplicity of a solution of a polynomial system.
    Mult {
        #[arg(long)]
        system: PathBuf,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, value_parser = ["exact", "numeric"], default_value = "exact")]
        mode: String,
        /// Slice positive-dimensional solution sets with random hyperplanes.
        #[arg(long)]
        slice: bool,
        #[arg(long, default_value_t = 20)]
        max_order: usize,
    },

    /// Build the space of polynomials attached to a tuple.
    Reproduce {
        #[arg(long)]
        tuple: PathBuf,
    },

    /// Solve Wr(y, u) = T for u.
    WronskianSolve {
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long = "T", allow_hyphen_values = true)]
        t: String,
    },

    /// Translate master-function data into a basic situation.
    FromMaster { master: PathBuf },

    /// Compare the Schubert count with certified critical points.
    Verify {
        problem: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        /// Skip the reproduction run on exactly certified tuples.
        #[arg(long)]
        no_space: bool,
    },
}

fn run(cli: Cli) -> Result<Output, CliError> {
    let field = cli.field.as_deref().map(commands::field_flag).transpose()?;
    let field = field.as_ref();
    match cli.command {
        Command::Validate { problem } => commands::validate(&problem, field),
        Command::Lr {
            problem,
            lambda,
            mu,
            nu,
            box_dims,
        } => commands::lr(problem.as_deref(), lambda, mu, nu, box_dims, field),
        Command::BetheSolve {
            problem,
            solve,
            candidate,
        } => commands::bethe_solve(&problem, &solve, candidate.as_deref(), field, cli.timing),
        Command::Mult {
            system,
            point,
            mode,
            slice,
            max_order,
        } => commands::mult(&system, &point, &mode, slice, max_order, field),
        Command::Reproduce { tuple } => commands::reproduce(&tuple, field),
        Command::WronskianSolve { y, t } => commands::wronskian_solve(&y, &t, field),
        Command::FromMaster { master } => commands::from_master(&master, field),
        Command::Verify {
            problem,
            solve,
            no_space,
        } => commands::verify(&problem, &solve, !no_space, field, cli.timing),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json = cli.json;
    match run(cli) {
        Ok(out) => {
            if json {
                println!("{}", out.json);
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            if json {
                println!("{}", serde_json::json!({ "error": e.message, "exit_code": e.code }));
            }
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
