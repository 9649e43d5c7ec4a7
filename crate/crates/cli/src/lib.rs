//! Command-line harness for the disc-automorphism verification suites.
//!
//! `run` loads a graph, executes the selected suites with seeded trials and
//! produces a [`Report`]; `sample` prints one seeded point of the unit ball.

pub mod config;
pub mod report;
pub mod suites;

use std::fs;
use std::path::Path;
use std::time::Instant;

use discgrp::intertwiners::{intertwiner_to_json, pattern, sample_disc, IntertwinerJson};
use discgrp::{CorrespondenceContext, IntertwinerSpace};
use serde::{Deserialize, Serialize};

pub use config::{parse_ranks, resolve_ranks, trial_seed, RunConfig, Suite};
pub use report::{Report, Status, SuiteReport, SCHEMA};

use report::{ConfigEcho, SuiteRun};
use suites::{hypotheses, run_suite, SuiteInput};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write `{path}`: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] discgrp::Error),
}

impl CliError {
    /// Process exit status: 3 for unreadable or invalid input.
    pub fn exit_code(&self) -> i32 {
        3
    }
}

pub fn load_graph(path: &Path) -> Result<CorrespondenceContext, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })?;
    Ok(CorrespondenceContext::from_json_str(&text)?)
}

/// Executes every selected suite in canonical order.
///
/// A suite whose hypotheses fail is reported as `hypotheses_not_met` when
/// requested by name and as `skipped` under `all`.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let ctx = load_graph(&cfg.graph)?;
    let ranks = resolve_ranks(&ctx, cfg.morita_ranks.as_ref())?;
    let selected = Suite::expand(&cfg.suites);
    if selected.is_empty() {
        return Err(CliError::Input("no suite selected".into()));
    }
    let input = SuiteInput {
        ctx: &ctx,
        cfg,
        ranks: &ranks,
    };
    let mut reports = Vec::new();
    for suite in selected {
        let start = Instant::now();
        let outcome = match hypotheses(suite, &ctx) {
            Err(reason) => Err(reason),
            Ok(()) => match run_suite(suite, &input) {
                Err(discgrp::Error::HypothesesNotMet(reason)) => Err(reason),
                Err(e) => {
                    let mut run = SuiteRun::new();
                    let repro = report::Reproducer::new(trial_seed(cfg.seed, suite, 0), 0);
                    run.error("setup", &e, &repro);
                    Ok(run)
                }
                Ok(run) => Ok(run),
            },
        };
        let elapsed_ms = start.elapsed().as_millis() as u64;
        let report = match outcome {
            Ok(run) => run.finish(suite.name(), elapsed_ms),
            Err(reason) => {
                let mut r = SuiteRun::new().finish(suite.name(), elapsed_ms);
                r.status = if cfg.is_all() {
                    Status::Skipped
                } else {
                    Status::HypothesesNotMet
                };
                r.note = Some(reason);
                r
            }
        };
        reports.push(report);
    }
    let mut report = Report {
        schema: SCHEMA.to_string(),
        config: ConfigEcho {
            graph: cfg.graph.display().to_string(),
            suites: cfg.suites.iter().map(|s| s.name().to_string()).collect(),
            seed: cfg.seed,
            trials: cfg.trials,
            tol: cfg.tol.abs_tol,
            margin: cfg.tol.margin,
            morita_ranks: ranks,
        },
        graph: ctx.to_spec(),
        status: Status::Pass,
        suites: reports,
    };
    report.status = match report.exit_code() {
        0 => Status::Pass,
        2 => Status::HypothesesNotMet,
        _ => Status::Fail,
    };
    Ok(report)
}

pub fn write_report(report: &Report, path: &Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report).expect("report is serializable");
    fs::write(path, text + "\n").map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Output of `discgrp sample`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub seed: u64,
    pub radius_cap: f64,
    pub norm: f64,
    /// Allowed `vertex,edge` blocks.
    pub pattern: Vec<String>,
    /// Number of complex parameters, the dimension of the intertwiner space.
    pub parameters: usize,
    pub intertwiner: IntertwinerJson,
}

pub fn sample(ctx: &CorrespondenceContext, seed: u64, radius_cap: f64) -> Result<Sample, CliError> {
    if !(radius_cap > 0.0 && radius_cap < 1.0) {
        return Err(CliError::Input(format!("--radius must lie in (0, 1), got {radius_cap}")));
    }
    let eta = sample_disc(ctx, seed, radius_cap);
    let g = ctx.graph();
    Ok(Sample {
        seed,
        radius_cap,
        norm: eta.norm(),
        pattern: pattern(ctx)
            .cells()
            .into_iter()
            .map(|(v, e)| format!("{},{}", g.vertices()[v], g.edges()[e].name))
            .collect(),
        parameters: ctx.dimension(),
        intertwiner: intertwiner_to_json(ctx, &eta),
    })
}
