use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use discgrp::Tolerance;
use discgrp_cli::{load_graph, parse_ranks, run, sample, write_report, CliError, RunConfig, Suite};

const POLYNOMIAL_HELP: &str = "\
Graph JSON: {\"vertices\":[\"v1\",...], \"edges\":[{\"name\":\"e1\",\"src\":\"v1\",\"rng\":\"v1\"},...], \"multiplicities\":{\"v1\":2,...}}

Polynomials in the eval suite use the grammar `a{v1:1,v2:0} + (2+0i)*e1.e1.e2`:
an algebra part a{vertex:coefficient,...} plus coefficient*word terms, where a
word e1.e2... is nonzero only when s(e_i) = r(e_{i+1}).

Exit codes: 0 all selected suites pass, 1 a suite failed or was inconclusive,
2 hypotheses not met, 3 unreadable or invalid input.";

#[derive(Parser, Debug)]
#[command(name = "discgrp", version, about = "Verification harness for automorphisms of intertwiner unit balls", after_help = POLYNOMIAL_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run verification suites and write a JSON report.
    Run {
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated suites.
        #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
        suite: Vec<Suite>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Absolute tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Sampled and accepted points satisfy ‖η‖ ≤ 1 − margin.
        #[arg(long, default_value_t = 0.05)]
        margin: f64,
        /// Amplification ranks, e.g. `v1=2,v2=1`; unnamed vertices get 1.
        #[arg(long, value_parser = parse_ranks)]
        morita_ranks: Option<std::collections::BTreeMap<String, usize>>,
        /// Report path; without it the report JSON goes to stdout and the
        /// summary to stderr.
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Print one seeded sample of the unit ball as JSON.
    Sample {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.95)]
        radius: f64,
    },
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run {
            graph,
            suite,
            seed,
            trials,
            tol,
            margin,
            morita_ranks,
            output,
        } => {
            let cfg = RunConfig {
                graph,
                suites: suite,
                seed,
                trials,
                tol: Tolerance::new(tol, margin)?,
                morita_ranks,
                output,
            };
            let report = run(&cfg)?;
            match &cfg.output {
                Some(path) => {
                    write_report(&report, path)?;
                    emit(report.summary().trim_end());
                }
                None => {
                    eprint!("{}", report.summary());
                    emit(&serde_json::to_string_pretty(&report).expect("report is serializable"));
                }
            }
            Ok(report.exit_code())
        }
        Command::Sample { graph, seed, radius } => {
            let ctx = load_graph(&graph)?;
            let s = sample(&ctx, seed, radius)?;
            emit(&serde_json::to_string_pretty(&s).expect("sample is serializable"));
            Ok(0)
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
