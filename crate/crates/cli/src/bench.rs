//! Reproduction run over the benchmark registry with expectation checks.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use firsyn::analysis::GateVerdict;
use firsyn::firdesign::{is_monotone, verify_stabilizing, DesignOutcome};

use crate::commands::{analyze, design, sweep, DesignMethod, DesignRequest};
use crate::error::CliError;
use crate::plot::{rows, sweep_csv, sweep_svg, write_file};
use crate::registry::BenchmarkEntry;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub seed: u64,
    pub runs: usize,
    pub max_order: usize,
    pub workers: Option<usize>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self { seed: 0, runs: 10, max_order: 5, workers: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchCheck {
    pub system: String,
    pub check: String,
    pub expected: String,
    pub observed: String,
}

impl BenchCheck {
    pub fn passed(&self) -> bool {
        self.expected == self.observed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemRun {
    pub id: String,
    pub sweep: Vec<DesignOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub checks: Vec<BenchCheck>,
    pub runs: Vec<SystemRun>,
    pub seconds: f64,
}

impl BenchReport {
    pub fn mismatches(&self) -> Vec<&BenchCheck> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn all_met(&self) -> bool {
        self.mismatches().is_empty()
    }

    /// `0` when every expectation is met, `3` otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.all_met() {
            0
        } else {
            3
        }
    }

    pub fn summary_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["system", "check", "expected", "observed", "status"]).expect("in-memory write");
        for c in &self.checks {
            let status = if c.passed() { "ok" } else { "mismatch" };
            w.write_record([c.system.as_str(), &c.check, &c.expected, &c.observed, status]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV of UTF-8 fields")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let status = if c.passed() { "ok      " } else { "MISMATCH" };
            let _ = writeln!(s, "{status} {:8} {:24} expected {:16} observed {}", c.system, c.check, c.expected, c.observed);
        }
        let _ = writeln!(s, "{} of {} checks met in {:.1} s", self.checks.len() - self.mismatches().len(), self.checks.len(), self.seconds);
        s
    }
}

fn gate_label(v: GateVerdict) -> &'static str {
    match v {
        GateVerdict::NecessaryConditionHolds => "holds",
        GateVerdict::Fails => "fails",
        GateVerdict::NotApplicableMimo => "not-applicable-mimo",
    }
}

fn feasibility_label(designed: bool) -> &'static str {
    if designed {
        "feasible"
    } else {
        "infeasible"
    }
}

fn order_set(orders: impl Iterator<Item = usize>) -> String {
    let v: Vec<String> = orders.map(|o| o.to_string()).collect();
    if v.is_empty() {
        "none".into()
    } else {
        v.join(" ")
    }
}

fn run_entry(entry: &BenchmarkEntry, opts: &BenchOptions, out: Option<&Path>) -> Result<(Vec<BenchCheck>, SystemRun), CliError> {
    let file = entry.system_file();
    let exp = &entry.expected;
    let mut checks = Vec::new();
    let mut check = |name: &str, expected: String, observed: String| {
        checks.push(BenchCheck { system: entry.id.into(), check: name.into(), expected, observed });
    };

    let analysis = analyze(&file)?;
    check("strong_stabilizability", gate_label(exp.strong_stabilizability).into(), gate_label(analysis.gate).into());

    let convex = |order: usize| -> Result<bool, CliError> {
        let req = DesignRequest {
            order,
            method: DesignMethod::Convex,
            runs: opts.runs,
            seed: opts.seed,
            margin: 0.0,
            workers: opts.workers,
        };
        Ok(design(&file, &req)?.designed)
    };
    let at0 = convex(0)?;
    check("convex_order0", feasibility_label(exp.convex_order0_feasible).into(), feasibility_label(at0).into());
    if !exp.convex_order0_feasible {
        for order in 1..=2 {
            check(&format!("convex_order{order}"), "infeasible".into(), feasibility_label(convex(order)?).into());
        }
    }

    let cfg = DesignRequest {
        order: opts.max_order,
        method: DesignMethod::Direct,
        runs: opts.runs,
        seed: opts.seed,
        margin: 0.0,
        workers: opts.workers,
    }
    .optimizer();
    let outcomes = sweep(&file, opts.max_order, &cfg)?;
    let expected_orders = match exp.min_stabilizing_order {
        Some(min) => order_set(min..=opts.max_order),
        None => order_set(std::iter::empty()),
    };
    let observed_orders = order_set(outcomes.iter().filter(|o| o.best_rho < 1.0).map(|o| o.order));
    check("stabilizing_orders", expected_orders, observed_orders);
    check("monotone_best_rho", "true".into(), is_monotone(&outcomes).to_string());

    let sys = file.model.to_state_space()?;
    let mut verified = true;
    for o in outcomes.iter().filter(|o| o.best_rho < 1.0) {
        verified &= verify_stabilizing(&sys, &o.best_gains, opts.seed)?.passed();
    }
    check("designs_verified", "true".into(), verified.to_string());

    if let Some(dir) = out {
        let table = rows(&outcomes);
        write_file(&dir.join(format!("{}_analysis.json", entry.id)), &format!("{:#}\n", analysis.to_json()))?;
        write_file(&dir.join(format!("{}_sweep.csv", entry.id)), &sweep_csv(&table))?;
        write_file(&dir.join(format!("{}_sweep.svg", entry.id)), &sweep_svg(&format!("{}: {}", entry.id, entry.description), &table))?;
    }
    Ok((checks, SystemRun { id: entry.id.into(), sweep: outcomes }))
}

/// Runs analysis, the convex design pattern and the order sweep for every
/// registry entry. Artifacts and `summary.csv` go to `out` when given.
pub fn run_bench(registry: &[BenchmarkEntry], opts: &BenchOptions, out: Option<&Path>) -> Result<BenchReport, CliError> {
    let start = Instant::now();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut report = BenchReport { checks: Vec::new(), runs: Vec::new(), seconds: 0.0 };
    for entry in registry {
        let (checks, run) = run_entry(entry, opts, out)?;
        report.checks.extend(checks);
        report.runs.push(run);
    }
    report.seconds = start.elapsed().as_secs_f64();
    if let Some(dir) = out {
        write_file(&dir.join("summary.csv"), &report.summary_csv())?;
    }
    Ok(report)
}
