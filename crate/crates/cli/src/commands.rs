//! Analysis, design and approximation reports behind the subcommands.

use std::fmt::Write as _;

use firsyn::analysis::{
    pbh_detectable, pbh_stabilizable, pip_check, strong_stabilizability_gate, GateVerdict, PipReport, RootKind,
    PBH_TOL, PIP_TOL,
};
use firsyn::firdesign::{
    approximation_tail, fir_approximate, order_sweep, verify_stabilizing, DesignOutcome, Method, OptimizerConfig,
    Verification,
};
use firsyn::lmi::{sof_convex_solve, SolverOptions};
use firsyn::matlib::spectral_radius;
use firsyn::sysmodel::{tf_to_ss_with_feedthrough, DynamicController, FirGains, PlantModel, StateSpaceSystem};
use firsyn::Error;
use serde_json::{json, Value};

use crate::document::{GainsFile, SystemFile};
use crate::error::CliError;

/// JSON has no infinity; unbounded values are written as the string `"inf"`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x > 0.0 {
        json!("inf")
    } else if x < 0.0 {
        json!("-inf")
    } else {
        json!("nan")
    }
}

/// State-space realization used for analysis. The feedthrough term of a
/// biproper transfer function is dropped.
fn analysis_realization(model: &PlantModel) -> Result<StateSpaceSystem, CliError> {
    Ok(match model {
        PlantModel::StateSpace(s) => s.clone(),
        PlantModel::TransferFunction(tf) => tf_to_ss_with_feedthrough(tf)?.0,
    })
}

fn gate_name(v: GateVerdict) -> &'static str {
    match v {
        GateVerdict::NecessaryConditionHolds => "holds",
        GateVerdict::Fails => "fails",
        GateVerdict::NotApplicableMimo => "not-applicable-mimo",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub name: String,
    pub states: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub stabilizable: bool,
    pub detectable: bool,
    pub open_loop_rho: f64,
    pub gate: GateVerdict,
    pub pip: Option<PipReport>,
}

pub fn analyze(file: &SystemFile) -> Result<AnalysisReport, CliError> {
    let sys = analysis_realization(&file.model)?;
    let pip = if file.model.is_siso() { Some(pip_check(&file.model.to_transfer_function()?, PIP_TOL)?) } else { None };
    Ok(AnalysisReport {
        name: file.name.clone(),
        states: sys.states(),
        inputs: sys.inputs(),
        outputs: sys.outputs(),
        stabilizable: pbh_stabilizable(&sys, PBH_TOL)?,
        detectable: pbh_detectable(&sys, PBH_TOL)?,
        open_loop_rho: spectral_radius(sys.a())?,
        gate: strong_stabilizability_gate(&file.model, PIP_TOL)?,
        pip,
    })
}

fn pip_json(p: &PipReport) -> Value {
    json!({
        "holds": p.holds,
        "unstable_real_zeros": p.unstable_real_zeros.iter().map(|&z| num(z)).collect::<Vec<_>>(),
        "unstable_real_poles": p.unstable_real_poles,
        "interval_pole_counts": p.interval_pole_counts.iter()
            .map(|c| json!({"lower": num(c.lower), "upper": num(c.upper), "poles": c.poles}))
            .collect::<Vec<_>>(),
        "cancellations": p.cancellations.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>(),
        "borderline": p.borderline.iter()
            .map(|b| json!({
                "kind": match b.kind { RootKind::Pole => "pole", RootKind::Zero => "zero" },
                "value": [b.value.re, b.value.im],
            }))
            .collect::<Vec<_>>(),
    })
}

impl AnalysisReport {
    pub fn fir_design_impossible(&self) -> bool {
        self.gate == GateVerdict::Fails || !self.stabilizable || !self.detectable
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "states": self.states,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "stabilizable": self.stabilizable,
            "detectable": self.detectable,
            "open_loop_rho": num(self.open_loop_rho),
            "strong_stabilizability": gate_name(self.gate),
            "pip": self.pip.as_ref().map(pip_json),
            "fir_design_impossible": self.fir_design_impossible(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "system {}: {} states, {} inputs, {} outputs", self.name, self.states, self.inputs, self.outputs);
        let _ = writeln!(s, "  stabilizable:        {}", self.stabilizable);
        let _ = writeln!(s, "  detectable:          {}", self.detectable);
        let _ = writeln!(s, "  open-loop rho(A):    {:.6}", self.open_loop_rho);
        match &self.pip {
            Some(p) => {
                let zeros: Vec<String> = p.unstable_real_zeros.iter().map(|z| format!("{z}")).collect();
                let _ = writeln!(s, "  parity interlacing:  {}", if p.holds { "holds" } else { "fails" });
                let _ = writeln!(s, "    unstable real zeros: [{}]", zeros.join(", "));
                let _ = writeln!(s, "    unstable real poles: {:?}", p.unstable_real_poles);
                for c in &p.interval_pole_counts {
                    let _ = writeln!(s, "    poles in ({}, {}): {}", c.lower, c.upper, c.poles);
                }
                if !p.cancellations.is_empty() {
                    let _ = writeln!(s, "    cancelled pole-zero pairs: {}", p.cancellations.len());
                }
                for b in &p.borderline {
                    let _ = writeln!(s, "    warning: {:?} {} lies on the unit circle boundary", b.kind, b.value);
                }
            }
            None => {
                let _ = writeln!(s, "  parity interlacing:  not applicable (MIMO)");
            }
        }
        if self.fir_design_impossible() {
            let _ = writeln!(s, "  verdict: no stabilizing FIR controller exists, FIR design is impossible");
        } else if self.gate == GateVerdict::NecessaryConditionHolds {
            let _ = writeln!(s, "  verdict: necessary condition for FIR stabilization holds");
        } else {
            let _ = writeln!(s, "  verdict: no necessary-condition test available, try a design");
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DesignMethod {
    Convex,
    Direct,
    Evolutionary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignRequest {
    pub order: usize,
    pub method: DesignMethod,
    pub runs: usize,
    pub seed: u64,
    pub margin: f64,
    pub workers: Option<usize>,
}

impl DesignRequest {
    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            runs_per_order: self.runs,
            seed: self.seed,
            stability_margin: self.margin,
            method: if self.method == DesignMethod::Evolutionary { Method::Evolutionary } else { Method::DirectSearch },
            workers: self.workers,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignReport {
    pub name: String,
    pub method: DesignMethod,
    pub order: usize,
    pub designed: bool,
    pub gains: Option<FirGains>,
    pub verification: Option<Verification>,
    /// Solver-specific diagnostic: the achieved LMI margin or the run spread.
    pub detail: Value,
    pub message: String,
}

/// Plants must be strictly proper state-space models for synthesis.
pub fn design_plant(file: &SystemFile) -> Result<StateSpaceSystem, CliError> {
    Ok(file.model.to_state_space()?)
}

pub fn design(file: &SystemFile, req: &DesignRequest) -> Result<DesignReport, CliError> {
    let sys = design_plant(file)?;
    let (gains, detail, mut message) = match req.method {
        DesignMethod::Convex => {
            let opts = SolverOptions { seed: req.seed, ..Default::default() };
            match sof_convex_solve(&sys, req.order, &opts) {
                Ok(out) => {
                    let detail = json!({
                        "lmi_margin": out.feasibility.achieved_margin,
                        "iterations": out.feasibility.iterations,
                        "contraction_rate": out.contraction_rate,
                    });
                    let msg = if out.gains.is_some() { "LMI feasible" } else { "LMI numerically infeasible" };
                    (out.gains, detail, msg.to_owned())
                }
                Err(Error::Degenerate(why)) => (None, json!({"degenerate": why}), format!("LMI solution unusable: {why}")),
                Err(e) => return Err(e.into()),
            }
        }
        DesignMethod::Direct | DesignMethod::Evolutionary => {
            let sweep = order_sweep(&sys, req.order, &req.optimizer())?;
            let last = sweep.last().expect("sweep covers order 0");
            let detail = json!({
                "best_rho": num(last.best_rho),
                "median_rho": num(last.median_rho),
                "per_run_rhos": last.per_run_rhos.iter().map(|&r| num(r)).collect::<Vec<_>>(),
                "evals": last.evals_used,
            });
            if last.is_stabilizing(req.margin) {
                (Some(last.best_gains.clone()), detail, format!("best rho {:.6}", last.best_rho))
            } else {
                (None, detail, format!("best rho {:.6} does not meet 1 - margin = {}", last.best_rho, 1.0 - req.margin))
            }
        }
    };
    let verification = gains.as_ref().map(|g| verify_stabilizing(&sys, g, req.seed)).transpose()?;
    let designed = match &verification {
        Some(v) => v.lyapunov_certified && v.rho < 1.0 - req.margin,
        None => false,
    };
    match &verification {
        Some(v) if !designed => message = format!("{message}; verification failed (rho {:.6})", v.rho),
        Some(v) if !v.decay_passed => message = format!("{message}; slow decay, 500 steps do not reach 1e-6"),
        _ => {}
    }
    Ok(DesignReport { name: file.name.clone(), method: req.method, order: req.order, designed, gains, verification, detail, message })
}

impl DesignReport {
    pub fn gains_file(&self) -> Option<GainsFile> {
        let g = self.gains.as_ref()?;
        let v = self.verification.as_ref()?;
        Some(
            GainsFile::new(format!("{}-fir{}", self.name, self.order), g.clone())
                .with("rho", num(v.rho))
                .with("lyapunov_certified", json!(v.lyapunov_certified))
                .with("decay_passed", json!(v.decay_passed)),
        )
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "method": format!("{:?}", self.method).to_lowercase(),
            "order": self.order,
            "designed": self.designed,
            "rho": self.verification.as_ref().map(|v| num(v.rho)),
            "lyapunov_certified": self.verification.as_ref().map(|v| v.lyapunov_certified),
            "decay_passed": self.verification.as_ref().map(|v| v.decay_passed),
            "gains": self.gains_file().map(|g| g.to_value()),
            "detail": self.detail,
            "message": self.message,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let status = if self.designed { "designed" } else { "not designed" };
        let _ = writeln!(s, "{} order {} ({:?}): {}", self.name, self.order, self.method, status);
        let _ = writeln!(s, "  {}", self.message);
        if let Some(v) = &self.verification {
            let _ = writeln!(s, "  closed-loop rho:      {:.9}", v.rho);
            let _ = writeln!(s, "  Lyapunov certificate: {}", if v.lyapunov_certified { "found" } else { "not found" });
            let _ = writeln!(s, "  decay check:          {}", if v.decay_passed { "passed" } else { "failed" });
        }
        if let Some(g) = &self.gains {
            for (i, f) in g.gains().iter().enumerate() {
                let _ = writeln!(s, "  F{i} = {:?}", f.to_rows());
            }
        }
        s
    }
}

pub fn sweep(file: &SystemFile, max_order: usize, cfg: &OptimizerConfig) -> Result<Vec<DesignOutcome>, CliError> {
    Ok(order_sweep(&design_plant(file)?, max_order, cfg)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Approximation {
    pub gains: FirGains,
    pub tail: f64,
}

pub fn approximate(ctl: &DynamicController, order: usize) -> Result<Approximation, CliError> {
    Ok(Approximation { gains: fir_approximate(ctl, order)?, tail: approximation_tail(ctl, order)? })
}
