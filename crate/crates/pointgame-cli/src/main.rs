//! `pointgame`: batch verification, generation, conversion and compilation of point games.
//!
//! Exit codes: 0 accepted, 1 rejected, 2 usage or input error.

mod commands;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pointgame", version, about = "Exact point-game verification and protocol compilation")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone)]
pub struct Global {
    /// Print a machine-readable JSON report
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomized subroutines
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// PSD slack tolerance for protocol-layer checks
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output path for generated documents
    #[arg(short = 'o', long = "output", global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Verify a time-dependent point game
    VerifyTdpg {
        file: PathBuf,
        /// Also require every transition to be strictly valid
        #[arg(long)]
        strict: bool,
    },
    /// Verify a time-independent point game
    VerifyTipg { file: PathBuf },
    /// Generate the truncated bias-1/6 ladder
    GenSixth {
        #[arg(long, default_value_t = 100)]
        gamma: u64,
    },
    /// Generate a family game, searching parameters unless all of --eps, --gamma, --zstar are given
    GenFamily {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value = "1/50")]
        gap: String,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        gamma: Option<u64>,
        #[arg(long)]
        zstar: Option<String>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Search feasible family parameters
    SearchFamily {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value = "1/50")]
        gap: String,
        #[command(flatten)]
        budget: Budget,
    },
    /// Convert between TIPG and TDPG, or strictify a TDPG
    Convert {
        file: PathBuf,
        /// Target form; defaults to the other game type
        #[arg(long, value_parser = ["tipg", "tdpg", "strict"])]
        to: Option<String>,
        #[arg(long, default_value = "1/100")]
        eps: String,
    },
    /// Compile a strict TDPG into an upper-bounded protocol
    Compile {
        file: PathBuf,
        /// Starting value of the dual's large-eigenvalue parameter
        #[arg(long)]
        lambda0: Option<f64>,
        /// Replace projections by flagged unitaries, loosening the bound by n·ε
        #[arg(long)]
        flags: Option<f64>,
    },
    /// Verify an upper-bounded protocol
    VerifyUbp {
        file: PathBuf,
        /// Also read the point game back out and verify it
        #[arg(long)]
        extract: bool,
        /// Run the cheating see-saw for both parties (small protocols only)
        #[arg(long)]
        cheat: bool,
        #[arg(long, default_value_t = 200)]
        iters: usize,
    },
    /// Dip-Dip-Boom recursions, dual bound and certificate
    Ddb {
        /// Comma-separated p₁..pₙ with pₙ = 1
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<String>,
        /// Print the recursion table
        #[arg(long)]
        report: bool,
        /// Run the cheating-Bob see-saw
        #[arg(long)]
        seesaw: bool,
        #[arg(long, default_value_t = 300)]
        iters: usize,
        /// Memory register dimension of the cheater
        #[arg(long, default_value_t = 4)]
        mem: usize,
    },
    /// verify, convert, strictify, compile, verify-ubp, extract and verify again
    Roundtrip {
        file: PathBuf,
        /// Conversion and strictification ε
        #[arg(long, default_value = "1/10")]
        eps: String,
    },
}

#[derive(Args, Clone, Copy)]
pub struct Budget {
    /// Largest z*/ε tried
    #[arg(long, default_value_t = 320)]
    pub max_j0: u64,
    /// Largest Γ tried
    #[arg(long, default_value_t = 1 << 15)]
    pub max_gamma: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.jobs {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("error: --jobs must be a positive integer");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli.global, cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            if cli.global.json {
                commands::out(&format!("{}\n", serde_json::json!({ "error": e.message, "exit": e.code })));
            } else {
                eprintln!("error: {}", e.message);
            }
            ExitCode::from(e.code)
        }
    }
}
