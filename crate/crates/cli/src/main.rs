use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

mod commands;

/// Certified computations in relatively free nil algebras.
///
/// Results are cached under $NILCERT_CACHE_DIR (default
/// $XDG_CACHE_HOME/nilcert, then $HOME/.cache/nilcert).
#[derive(Parser, Debug)]
#[command(name = "nilcert", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Characteristic of the ground field: 0 or a prime.
    #[arg(long = "char", global = true, default_value_t = 0)]
    pub chr: u64,
    /// Largest component (number of words) that may be solved.
    #[arg(long, global = true)]
    pub budget_cols: Option<u64>,
    /// Seed for random test matrices.
    #[arg(long, global = true, default_value_t = 20_240_601)]
    pub seed: u64,
    /// Also write the JSON output to this file.
    #[arg(long = "json", global = true, value_name = "OUT")]
    pub json_out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ExprSource {
    /// Expression, e.g. "x1^2 x2^2 x1 x2 - 2 x2 x1".
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    pub expr: Option<String>,
    /// File holding the expression.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether a combination vanishes in N_{n,d}.
    ZeroTest {
        #[command(flatten)]
        source: ExprSource,
        /// Number of letters (at least the letters used).
        #[arg(long)]
        letters: Option<usize>,
        /// Also quotient by commutators uv − vu (trace criterion).
        #[arg(long)]
        cyclic: bool,
        /// Nil index: 2 or 3.
        #[arg(long, default_value_t = 3)]
        nil_index: u8,
    },
    /// Dimension of one multihomogeneous component.
    Dim {
        /// Multidegree, e.g. 3,2,1.
        #[arg(long)]
        mdeg: String,
        #[arg(long)]
        cyclic: bool,
        #[arg(long, default_value_t = 3)]
        nil_index: u8,
    },
    /// Nilpotency degree C(n,d,K) with certificates.
    Nildeg {
        #[arg(long)]
        letters: usize,
        #[arg(long, default_value_t = 3)]
        nil_index: u8,
    },
    /// Check that a named functional annihilates every identity row.
    FunctionalCheck {
        /// six-word, square-count, parity-even or parity-odd.
        #[arg(long)]
        functional: String,
        #[arg(long)]
        mdeg: String,
    },
    /// Expand σ_k of a sum of words and test it on random matrices.
    Amitsur {
        #[arg(long)]
        k: usize,
        /// Summands separated by '+', e.g. "x1 + x2 x3".
        #[arg(long)]
        expr: String,
        /// Number of random evaluations.
        #[arg(long, default_value_t = 3)]
        trials: usize,
    },
    /// Decide decomposability of tr(U), s2(U) or det(X) modulo (R+)^2.
    TraceDecompose {
        #[command(flatten)]
        source: ExprSource,
    },
    /// Table of computed C (1) or D (2) values against known ones.
    Report {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        theorem: u8,
        /// Letters, e.g. 2..5 or 3.
        #[arg(long, default_value = "1..4")]
        letters_range: String,
    },
    /// Re-check a certificate or a saved command output.
    Verify {
        file: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = commands::run(&cli);
    let text = serde_json::to_string_pretty(&out.value).expect("JSON output") + "\n";
    print!("{text}");
    if let Some(path) = &cli.common.json_out {
        if let Err(e) = nilcert::cache::write_file_atomic(path, text.as_bytes()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    if let Some(msg) = &out.message {
        eprintln!("{msg}");
    }
    ExitCode::from(out.exit)
}

/// What a command prints and how it exits.
pub struct Output {
    pub value: Value,
    pub exit: u8,
    pub message: Option<String>,
}

impl Output {
    pub fn ok(command: &str, result: Value) -> Output {
        Output::with_exit(command, result, 0)
    }

    pub fn with_exit(command: &str, result: Value, exit: u8) -> Output {
        Output {
            value: json!({ "schema_version": nilcert::certificate::SCHEMA_VERSION, "command": command, "result": result }),
            exit,
            message: None,
        }
    }

    pub fn error(command: &str, exit: u8, error: Value) -> Output {
        let message = error.get("message").and_then(Value::as_str).map(|m| format!("error: {m}"));
        Output {
            value: json!({ "schema_version": nilcert::certificate::SCHEMA_VERSION, "command": command, "error": error }),
            exit,
            message,
        }
    }
}
