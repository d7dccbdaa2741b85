use std::time::Instant;

use facloc::instances::{Assignment, FlpmInstance, Instance, Kind, NccInstance, SirpflInstance};
use facloc::jms::{solve_flpm, JmsConfig};
use facloc::lp::flp_lp_lowerbound;
use facloc::oracle::{brute_flpm, brute_ncc, brute_sirpfl};
use facloc::reductions::{ncc_to_flpm, sirpfl_to_ncc, solve_ncc, solve_sirpfl, ExactScheduleOracle};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub oracle: bool,
    pub lp_bound: bool,
    pub trace: bool,
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlgorithmInfo {
    pub id: &'static str,
    pub tol: f64,
    pub pipeline: Vec<&'static str>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub instance_digest: String,
    pub kind: Kind,
    pub algorithm: AlgorithmInfo,
    pub n_facilities: usize,
    pub n_clients: usize,
    pub horizon: Option<usize>,
    pub costs: Value,
    pub total_cost: f64,
    pub solution: Value,
    pub oracle_cost: Option<f64>,
    pub lp_bound: Option<f64>,
    pub ratio: Option<f64>,
    pub lp_ratio: Option<f64>,
    pub wall_millis: f64,
}

pub struct SolveOutput {
    pub report: RunReport,
    /// JSON lines of the primal-dual run, when requested.
    pub trace: Option<Vec<String>>,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn ratio(cost: f64, reference: Option<f64>) -> Option<f64> {
    reference.filter(|&r| r > 0.0).map(|r| cost / r)
}

fn trace_lines(inst: &FlpmInstance, cfg: &JmsConfig) -> Result<Vec<String>, CliError> {
    let run = solve_flpm(inst, &JmsConfig { trace: true, ..*cfg })?;
    Ok(run.trace.unwrap_or_default().iter().map(|e| e.to_json_line(inst)).collect())
}

struct Solved {
    pipeline: Vec<&'static str>,
    costs: Value,
    total: f64,
    solution: Value,
    oracle: Option<f64>,
    lp: Option<f64>,
    trace: Option<Vec<String>>,
}

fn lp_bound(inst: &FlpmInstance) -> Result<f64, CliError> {
    flp_lp_lowerbound(inst).map_err(|e| CliError::Other(e.into()))
}

fn solve_flpm_kind(inst: &FlpmInstance, opts: &SolveOptions, cfg: &JmsConfig) -> Result<Solved, CliError> {
    let run = solve_flpm(inst, &JmsConfig { trace: opts.trace, ..*cfg })?;
    let sol = &run.solution;
    sol.validate(inst, opts.tol.max(1e-9)).map_err(|e| CliError::Other(anyhow::anyhow!("solution check: {e}")))?;
    let assignment: serde_json::Map<String, Value> = sol
        .assignment
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let v = match a {
                Assignment::Facility(i) => json!(inst.facilities[*i].id),
                Assignment::Penalty => json!("penalty"),
            };
            (inst.clients[j].id.to_string(), v)
        })
        .collect();
    Ok(Solved {
        pipeline: vec!["jms"],
        costs: serde_json::to_value(sol.costs).expect("plain numbers"),
        total: sol.costs.total,
        solution: json!({
            "open": sol.open.iter().map(|&i| inst.facilities[i].id).collect::<Vec<_>>(),
            "assignment": assignment,
        }),
        oracle: if opts.oracle { Some(brute_flpm(inst, false)?.0) } else { None },
        lp: if opts.lp_bound { Some(lp_bound(inst)?) } else { None },
        trace: run.trace.map(|t| t.iter().map(|e| e.to_json_line(inst)).collect()),
    })
}

fn ncc_solution(inst: &NccInstance, open: &[usize]) -> Value {
    let assignment: serde_json::Map<String, Value> = (0..inst.clients.len())
        .map(|j| {
            let i = *open
                .iter()
                .min_by(|&&a, &&b| inst.dist[j][a].total_cmp(&inst.dist[j][b]).then(a.cmp(&b)))
                .expect("nonempty open set");
            (inst.clients[j].id.to_string(), json!(inst.facilities[i].id))
        })
        .collect();
    json!({
        "open": open.iter().map(|&i| inst.facilities[i].id).collect::<Vec<_>>(),
        "assignment": assignment,
    })
}

fn solve_ncc_kind(inst: &NccInstance, opts: &SolveOptions, cfg: &JmsConfig) -> Result<Solved, CliError> {
    let run = solve_ncc(inst, cfg)?;
    let recomputed = inst.cost_of(&run.open);
    if run.open.is_empty() || (recomputed - run.cost).abs() > 1e-7 * (1.0 + recomputed) {
        return Err(CliError::Other(anyhow::anyhow!("solution check: reported cost {} vs {recomputed}", run.cost)));
    }
    let opening: f64 = run.open.iter().map(|&i| inst.facilities[i].opening_cost).sum();
    let reduced = if opts.lp_bound || opts.trace { Some(ncc_to_flpm(inst)?.0) } else { None };
    Ok(Solved {
        pipeline: vec!["ncc_to_flpm", "jms"],
        costs: json!({ "opening": opening, "connection": run.cost - opening, "total": run.cost }),
        total: run.cost,
        solution: ncc_solution(inst, &run.open),
        oracle: if opts.oracle { Some(brute_ncc(inst, false)?.0) } else { None },
        lp: match (&reduced, opts.lp_bound) {
            (Some(r), true) => Some(lp_bound(r)?),
            _ => None,
        },
        trace: match (&reduced, opts.trace) {
            (Some(r), true) => Some(trace_lines(r, cfg)?),
            _ => None,
        },
    })
}

fn solve_sirpfl_kind(inst: &SirpflInstance, opts: &SolveOptions, cfg: &JmsConfig) -> Result<Solved, CliError> {
    let schedules = ExactScheduleOracle::for_instance(inst);
    let run = solve_sirpfl(inst, &schedules, cfg)?;
    run.plan
        .validate(inst, opts.tol.max(1e-9))
        .map_err(|e| CliError::Other(anyhow::anyhow!("plan check: {e}")))?;
    let reduced = if opts.lp_bound || opts.trace {
        let (ncc, _) = sirpfl_to_ncc(inst, &schedules)?;
        Some(ncc_to_flpm(&ncc)?.0)
    } else {
        None
    };
    Ok(Solved {
        pipeline: vec!["sirpfl_to_ncc", "ncc_to_flpm", "jms", "lift_solution"],
        costs: serde_json::to_value(run.plan.costs).expect("plain numbers"),
        total: run.plan.costs.total,
        solution: run.plan.to_json(inst),
        oracle: if opts.oracle { Some(brute_sirpfl(inst, false)?.0) } else { None },
        lp: match (&reduced, opts.lp_bound) {
            (Some(r), true) => Some(lp_bound(r)?),
            _ => None,
        },
        trace: match (&reduced, opts.trace) {
            (Some(r), true) => Some(trace_lines(r, cfg)?),
            _ => None,
        },
    })
}

/// Runs the pipeline matching the instance kind.
pub fn run(instance: &Instance, instance_digest: String, opts: &SolveOptions) -> Result<SolveOutput, CliError> {
    instance.validate()?;
    let start = Instant::now();
    let cfg = JmsConfig { tol: opts.tol, trace: false };
    let (solved, nf, nc, horizon) = match instance {
        Instance::Flpm(i) => (solve_flpm_kind(i, opts, &cfg)?, i.facilities.len(), i.clients.len(), None),
        Instance::Ncc(i) => (solve_ncc_kind(i, opts, &cfg)?, i.facilities.len(), i.clients.len(), None),
        Instance::Sirpfl(i) => {
            (solve_sirpfl_kind(i, opts, &cfg)?, i.facilities.len(), i.clients.len(), Some(i.horizon))
        }
    };
    let report = RunReport {
        instance_digest,
        kind: instance.kind(),
        algorithm: AlgorithmInfo { id: "primal-dual-penalized", tol: opts.tol, pipeline: solved.pipeline },
        n_facilities: nf,
        n_clients: nc,
        horizon,
        costs: solved.costs,
        total_cost: solved.total,
        solution: solved.solution,
        oracle_cost: solved.oracle,
        lp_bound: solved.lp,
        ratio: ratio(solved.total, solved.oracle),
        lp_ratio: ratio(solved.total, solved.lp),
        wall_millis: start.elapsed().as_secs_f64() * 1000.0,
    };
    Ok(SolveOutput { report, trace: solved.trace })
}
