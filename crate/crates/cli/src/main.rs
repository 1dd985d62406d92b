//! `ordwalk`: ordinal walks, coherent families and Cech models from the command line.
//!
//! Exit codes: 0 computed or property holds, 1 property violated, 2 fuel
//! exhausted or undecided, 3 input error.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map};

use report::{envelope, from_error, Ctx, EXIT_INPUT};

#[derive(Parser, Debug)]
#[command(name = "ordwalk", version, about = "Ordinal walks, coherent families and Cech cohomology models")]
struct Cli {
    /// Print the JSON report instead of a summary.
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Step budget for walks, comparisons and profiles.
    #[arg(long, global = true, default_value_t = 100_000)]
    fuel: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Ordinal notation below epsilon_0.
    #[command(subcommand)]
    Ord(OrdCmd),
    /// Walks along a C-system.
    #[command(subcommand)]
    Walk(WalkCmd),
    /// Functions on ordinals.
    #[command(subcommand)]
    Fun(FunCmd),
    /// Indexed families, trivializations and the game.
    #[command(subcommand)]
    Coh(CohCmd),
    /// Cech complexes of finite cover models.
    #[command(subcommand)]
    Cech(CechCmd),
    /// The acceptance battery.
    Suite(SuiteArgs),
}

#[derive(Subcommand, Debug)]
pub enum OrdCmd {
    /// Canonical form and class.
    Parse { x: String },
    Compare { a: String, b: String },
    Add { a: String, b: String },
    Classify { x: String },
    /// The n-th term of the fundamental sequence.
    Fund { x: String, n: u64 },
}

#[derive(Args, Debug)]
pub struct Pair {
    /// `canonical`, `full`, or a JSON file.
    #[arg(long, default_value = "canonical")]
    pub csystem: String,
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub beta: String,
}

#[derive(Subcommand, Debug)]
pub enum WalkCmd {
    Trace(Pair),
    Rho {
        #[arg(long, default_value_t = 1)]
        kind: u8,
        #[command(flatten)]
        pair: Pair,
    },
    Maxl(Pair),
    /// `min_above`, `otp_below` and `max_below` of `C_beta` at `alpha`.
    Ladder(Pair),
    /// Compare `rho(., beta)` with `rho(., gamma)` below `beta`.
    Profile {
        #[arg(long, default_value_t = 1)]
        kind: u8,
        #[arg(long, default_value = "canonical")]
        csystem: String,
        #[arg(long)]
        beta: String,
        #[arg(long)]
        gamma: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum FunCmd {
    Eval {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        at: String,
    },
    /// `sum` (needs --with), `negate`, `restrict` (needs --beta).
    Combine {
        #[arg(long)]
        op: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        with: Option<PathBuf>,
        #[arg(long)]
        beta: Option<String>,
    },
    Compare {
        /// `exact`, `modFinite`, `modBounded` or `modLocallyConstant`.
        #[arg(long, default_value = "modFinite")]
        mode: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        with: PathBuf,
    },
    Transform {
        /// `del`, `del_inv`, `shift_r` or `shift_r_inv`.
        #[arg(long)]
        dir: String,
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum CohCmd {
    /// Coherence of a family, with the least failing tuple.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "modFinite")]
        mode: String,
    },
    /// The coboundary family.
    D {
        #[arg(long = "in")]
        input: PathBuf,
    },
    Trivialize {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Extend a trivialization of the part below xi.
    Extend {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        xi: String,
    },
    Stretch {
        #[arg(long = "in")]
        input: PathBuf,
        /// JSON club rule file; the identity if absent.
        #[arg(long)]
        rule: Option<PathBuf>,
        #[arg(long)]
        delta: String,
    },
    /// Play Even's strategy against a seeded adversary, or make Even's move on a saved history.
    Game {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        stages: usize,
        /// Group as JSON, e.g. '{"rank":1,"torsion":[]}'.
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        noise: bool,
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Distinct restrictions per level of a 1-family.
    Tree {
        #[arg(long = "in")]
        input: PathBuf,
        /// Probe points; random ones from the seed are added.
        #[arg(long, value_delimiter = ',')]
        probe: Vec<String>,
        #[arg(long, default_value_t = 32)]
        random: usize,
    },
    /// The 1-family of rho functions on the given indices.
    Rho {
        #[arg(long, default_value_t = 1)]
        kind: u8,
        #[arg(long, default_value = "canonical")]
        csystem: String,
        #[arg(long, value_delimiter = ',', required = true)]
        indices: Vec<String>,
        #[arg(long)]
        group: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum CechCmd {
    Complex {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        max_degree: Option<usize>,
    },
    Cohomology {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Chain map and induced maps of a refinement.
    Refine {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        max_degree: Option<usize>,
    },
    /// Connecting map and exactness around one degree.
    Les {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// The prism identity for a cochain on the cover by initial segments.
    Homotopy {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        degree: Option<usize>,
    },
}

#[derive(Args, Debug)]
pub struct SuiteArgs {
    /// `quick` or `full`.
    #[arg(long, default_value = "quick")]
    pub profile: String,
    /// Run a single check by id.
    #[arg(long)]
    pub check: Option<String>,
    /// Mutation: flip the sign of face I in d^J, given as `J,I`.
    #[arg(long)]
    pub flip_face: Option<String>,
}

fn command_name(cmd: &Cmd) -> String {
    let sub = |d: &dyn std::fmt::Debug| format!("{d:?}").split([' ', '(', '{']).next().unwrap_or_default().to_lowercase();
    match cmd {
        Cmd::Ord(c) => format!("ord {}", sub(c)),
        Cmd::Walk(c) => format!("walk {}", sub(c)),
        Cmd::Fun(c) => format!("fun {}", sub(c)),
        Cmd::Coh(c) => format!("coh {}", sub(c)),
        Cmd::Cech(c) => format!("cech {}", sub(c)),
        Cmd::Suite(_) => "suite".into(),
    }
}

/// Arguments that determine the result; `--out` and `--json` only route it.
fn digest_args(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args.iter().skip(1) {
        if skip {
            skip = false;
        } else if a == "--out" {
            skip = true;
        } else if !(a.starts_with("--out=") || a == "--json") {
            out.push(a.clone());
        }
    }
    out
}

/// Prints a line, ignoring a closed stdout so that piping into `head` is quiet.
fn emit(s: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{s}");
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let mut ctx = Ctx::new(cli.seed, cli.fuel, &digest_args(&args));
    let name = command_name(&cli.cmd);
    let run = match &cli.cmd {
        Cmd::Ord(c) => commands::ord(&mut ctx, c),
        Cmd::Walk(c) => commands::walk(&mut ctx, c),
        Cmd::Fun(c) => commands::fun(&mut ctx, c),
        Cmd::Coh(c) => commands::coh(&mut ctx, c),
        Cmd::Cech(c) => commands::cech(&mut ctx, c),
        Cmd::Suite(a) => commands::suite(&mut ctx, a),
    };
    let mut body = Map::new();
    let (code, text) = match run {
        Ok(r) => {
            let code = r.exit_code();
            body.insert("outcome".into(), serde_json::to_value(r.outcome).unwrap());
            body.insert("exit_code".into(), json!(code));
            body.insert("result".into(), r.result);
            body.insert("witnesses".into(), json!(r.witnesses));
            (code, r.text)
        }
        Err(e) => {
            let (code, w) = from_error(&e);
            let outcome = match code {
                1 => "fail",
                2 => "unknown",
                _ => "error",
            };
            body.insert("outcome".into(), json!(outcome));
            body.insert("exit_code".into(), json!(code));
            body.insert("witnesses".into(), json!([w]));
            (code, format!("{outcome}: {e}"))
        }
    };
    let report = envelope(&name, &ctx, body);
    let rendered = serde_json::to_string_pretty(&report).unwrap();
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, format!("{rendered}\n")) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_INPUT as u8);
            }
            if !cli.json {
                emit(&text);
            }
        }
        None if cli.json => emit(&rendered),
        None => emit(&text),
    }
    ExitCode::from(code as u8)
}
