use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polycert::certificate::Cert;
use polycert::checker::{check, CheckOutcome, CheckerPolyhedron};
use polycert::trace::gen::{gen, Profile};
use polycert::trace::{parse, print, replay, OracleVerdict, ReplayOptions};

#[derive(Parser)]
#[command(name = "polycert", version, about = "Certified convex polyhedra: trace replay and certificate checking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a trace file.
    Replay {
        file: PathBuf,
        /// Check every certificate with the independent checker.
        #[arg(long)]
        check_certs: bool,
        /// Compare results with brute-force oracles (small dimensions only).
        #[arg(long)]
        oracle: bool,
        /// Write per-operation records and bucket statistics as JSON.
        #[arg(long, value_name = "OUT")]
        stats: Option<PathBuf>,
    },
    /// Check an inclusion or emptiness certificate between two polyhedra.
    Check { p1: PathBuf, p2: PathBuf, cert: PathBuf },
    /// Print a random trace.
    Gen {
        #[arg(long)]
        seed: u64,
        /// box, octagon, loop-chain or mixed.
        #[arg(long)]
        profile: Profile,
        #[arg(long, default_value_t = 100)]
        ops: usize,
    },
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Replay { file, check_certs, oracle, stats } => {
            let ops = parse(&read(&file)?).map_err(|e| format!("{}: {e}", file.display()))?;
            let report = replay(&ops, ReplayOptions { check_certs, oracle }).map_err(|e| format!("{}: {e}", file.display()))?;
            for r in &report.records {
                for f in &r.cert_failures {
                    eprintln!("line {}: certificate rejected: {f}", r.line);
                }
                match &r.oracle {
                    Some(OracleVerdict::Fail(m)) => eprintln!("line {}: oracle mismatch: {m}", r.line),
                    Some(OracleVerdict::Skipped(m)) => eprintln!("line {}: oracle skipped: {m}", r.line),
                    _ => {}
                }
            }
            print!("{}", report.table());
            println!(
                "{} operations, {} certificates checked, {} rejected, {} oracle mismatches",
                report.records.len(),
                report.certs_checked,
                report.cert_failures,
                report.oracle_failures
            );
            if let Some(out) = stats {
                let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
                std::fs::write(&out, json).map_err(|e| format!("{}: {e}", out.display()))?;
            }
            Ok(report.passed())
        }
        Command::Check { p1, p2, cert } => {
            let a: CheckerPolyhedron = read(&p1)?.parse().map_err(|e| format!("{}: {e}", p1.display()))?;
            let b: CheckerPolyhedron = read(&p2)?.parse().map_err(|e| format!("{}: {e}", p2.display()))?;
            let c: Cert = read(&cert)?.parse().map_err(|e| format!("{}: {e}", cert.display()))?;
            match check(&a, &b, &c) {
                CheckOutcome::Value => {
                    println!("accepted");
                    Ok(true)
                }
                CheckOutcome::Error(e) => {
                    println!("rejected: {e}");
                    Ok(false)
                }
            }
        }
        Command::Gen { seed, profile, ops } => {
            print!("{}", print(&gen(seed, profile, ops)));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
