use std::collections::BTreeMap;
use std::fmt::Write as _;

use discgrp::correspondence::GraphSpec;
use discgrp::intertwiners::intertwiner_to_json;
use discgrp::linalg::CMatrix;
use discgrp::{AdmissibleIsometry, CorrespondenceContext, DiscAutomorphism, Intertwiner};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const SCHEMA: &str = "discgrp/1";

/// Failures kept per suite; the count is still exact.
const MAX_FAILURES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    HypothesesNotMet,
    Skipped,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
            Status::HypothesesNotMet => "HYPOTHESES NOT MET",
            Status::Skipped => "SKIPPED",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// The worst observed value must not exceed the limit.
    AtMost,
    /// The worst observed value must exceed the limit.
    Above,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub trials: usize,
    pub worst: f64,
    pub bound: Bound,
    pub limit: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reproducer {
    pub seed: u64,
    pub trial: usize,
    pub inputs: Value,
}

impl Reproducer {
    pub fn new(seed: u64, trial: usize) -> Self {
        Reproducer {
            seed,
            trial,
            inputs: Value::Null,
        }
    }

    pub fn with(&self, inputs: Value) -> Self {
        Reproducer {
            inputs,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub check: String,
    pub value: Option<f64>,
    pub message: String,
    pub reproducer: Reproducer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub status: Status,
    pub note: Option<String>,
    pub checks: Vec<CheckRow>,
    pub max_residual: f64,
    pub witnesses: Vec<Value>,
    pub failure_count: usize,
    pub failures: Vec<Failure>,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub graph: String,
    pub suites: Vec<String>,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    pub margin: f64,
    pub morita_ranks: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub config: ConfigEcho,
    pub graph: GraphSpec,
    pub status: Status,
    pub suites: Vec<SuiteReport>,
}

impl Report {
    /// 0 when every selected suite passed or was skipped, 1 on any failure
    /// or inconclusive search, 2 when only hypotheses were unmet.
    pub fn exit_code(&self) -> i32 {
        let statuses: Vec<_> = self.suites.iter().map(|s| s.status).collect();
        if statuses.iter().any(|s| matches!(s, Status::Fail | Status::Inconclusive)) {
            1
        } else if statuses.contains(&Status::HypothesesNotMet) {
            2
        } else {
            0
        }
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "discgrp report ({}) graph={} seed={} trials={}",
            self.schema, self.config.graph, self.config.seed, self.config.trials
        );
        for s in &self.suites {
            let _ = write!(
                out,
                "  {:<10} {:<18} checks={:<3} max residual {:.3e}  {} ms",
                s.suite,
                s.status.label(),
                s.checks.len(),
                s.max_residual,
                s.elapsed_ms
            );
            if let Some(note) = &s.note {
                let _ = write!(out, "  ({note})");
            }
            out.push('\n');
            for c in s.checks.iter().filter(|c| !c.passed) {
                let op = match c.bound {
                    Bound::AtMost => "<=",
                    Bound::Above => ">",
                };
                let _ = writeln!(out, "      failed {}: {:.3e} (needs {op} {:.0e})", c.name, c.worst, c.limit);
            }
        }
        let _ = writeln!(out, "overall: {}", self.status.label());
        out
    }
}

/// Accumulates check rows and failures for one suite.
#[derive(Debug, Default)]
pub struct SuiteRun {
    rows: BTreeMap<String, CheckRow>,
    order: Vec<String>,
    pub witnesses: Vec<Value>,
    failures: Vec<Failure>,
    failure_count: usize,
    pub note: Option<String>,
    inconclusive: bool,
}

impl SuiteRun {
    pub fn new() -> Self {
        Self::default()
    }

    fn row(&mut self, name: &str, bound: Bound, limit: f64) -> &mut CheckRow {
        if !self.rows.contains_key(name) {
            self.order.push(name.to_string());
            let worst = match bound {
                Bound::AtMost => 0.0,
                Bound::Above => f64::INFINITY,
            };
            self.rows.insert(
                name.to_string(),
                CheckRow {
                    name: name.to_string(),
                    trials: 0,
                    worst,
                    bound,
                    limit,
                    passed: true,
                },
            );
        }
        self.rows.get_mut(name).expect("row inserted above")
    }

    /// Records a residual that must stay at or below `limit`.
    pub fn at_most(&mut self, name: &str, value: f64, limit: f64, repro: &Reproducer) {
        let row = self.row(name, Bound::AtMost, limit);
        row.trials += 1;
        row.worst = row.worst.max(value);
        let ok = value <= limit;
        row.passed &= ok;
        if !ok {
            self.fail(name, Some(value), format!("{value:.3e} exceeds {limit:.0e}"), repro);
        }
    }

    /// Records a certificate that must strictly exceed `limit`.
    pub fn above(&mut self, name: &str, value: f64, limit: f64, repro: &Reproducer) {
        let row = self.row(name, Bound::Above, limit);
        row.trials += 1;
        row.worst = row.worst.min(value);
        let ok = value > limit;
        row.passed &= ok;
        if !ok {
            self.fail(name, Some(value), format!("{value:.3e} does not exceed {limit:.0e}"), repro);
        }
    }

    /// Records a trial that could not be completed.
    pub fn error(&mut self, name: &str, err: &discgrp::Error, repro: &Reproducer) {
        let row = self.row(name, Bound::AtMost, 0.0);
        row.trials += 1;
        row.passed = false;
        self.fail(name, None, err.to_string(), repro);
    }

    fn fail(&mut self, check: &str, value: Option<f64>, message: String, repro: &Reproducer) {
        self.failure_count += 1;
        if self.failures.len() < MAX_FAILURES {
            self.failures.push(Failure {
                check: check.to_string(),
                value,
                message,
                reproducer: repro.clone(),
            });
        }
    }

    pub fn mark_inconclusive(&mut self, note: String) {
        self.inconclusive = true;
        self.note = Some(note);
    }

    pub fn finish(self, suite: &str, elapsed_ms: u64) -> SuiteReport {
        let mut rows = self.rows;
        let checks: Vec<CheckRow> = self
            .order
            .iter()
            .map(|n| rows.remove(n).expect("ordered rows exist"))
            .collect();
        let max_residual = checks
            .iter()
            .filter(|c| c.bound == Bound::AtMost)
            .map(|c| c.worst)
            .fold(0.0, f64::max);
        let status = if checks.iter().any(|c| !c.passed) {
            Status::Fail
        } else if self.inconclusive {
            Status::Inconclusive
        } else {
            Status::Pass
        };
        SuiteReport {
            suite: suite.to_string(),
            status,
            note: self.note,
            checks,
            max_residual,
            witnesses: self.witnesses,
            failure_count: self.failure_count,
            failures: self.failures,
            elapsed_ms,
        }
    }
}

pub fn dense(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn intertwiner_json(ctx: &CorrespondenceContext, eta: &Intertwiner) -> Value {
    serde_json::to_value(intertwiner_to_json(ctx, eta)).expect("intertwiner JSON is serializable")
}

pub fn isometry_json(omega: &AdmissibleIsometry) -> Value {
    json!({ "u": dense(omega.u()), "v_adj": dense(omega.v_adj()) })
}

/// `(ω, γ*)` with `γ*` in block form.
pub fn automorphism_json(ctx: &CorrespondenceContext, g: &DiscAutomorphism) -> Value {
    json!({ "omega": isometry_json(g.omega()), "gamma": intertwiner_json(ctx, g.gamma()) })
}

/// `(ω, γ*)` with `γ*` as a dense matrix, for spaces without a graph layout.
pub fn automorphism_json_dense(g: &DiscAutomorphism) -> Value {
    json!({ "omega": isometry_json(g.omega()), "gamma": dense(g.gamma().matrix()) })
}
