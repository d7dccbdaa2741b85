use serde::Serialize;

use super::{lift_solution, ncc_to_flpm, sirpfl_to_ncc, ReductionError, ScheduleOracle, SirpflPlan};
use crate::instances::{NccInstance, SirpflInstance};
use crate::jms::{solve_flpm, JmsConfig};

#[derive(Clone, Debug, Serialize)]
pub struct NccRun {
    pub open: Vec<usize>,
    pub cost: f64,
    /// Cost of the reduced penalized instance as returned by the primal-dual run.
    pub reduced_cost: f64,
    /// Whether the primal-dual run opened nothing and the best single
    /// facility was used instead.
    pub fallback: bool,
}

/// Concave-cost facility location through the multiplicity reduction and
/// the primal-dual algorithm.
///
/// The reduced instance may prefer paying every penalty; since a concave
/// cost instance must open something, the best single facility is taken in
/// that case.
pub fn solve_ncc(inst: &NccInstance, cfg: &JmsConfig) -> Result<NccRun, ReductionError> {
    if inst.facilities.is_empty() {
        return Err(ReductionError::NoFacilities);
    }
    let (reduced, _) = ncc_to_flpm(inst)?;
    let run = solve_flpm(&reduced, cfg)?;
    let reduced_cost = run.solution.costs.total;
    let (open, fallback) = if run.solution.open.is_empty() {
        let best = (0..inst.facilities.len())
            .min_by(|&a, &b| inst.cost_of(&[a]).total_cmp(&inst.cost_of(&[b])).then(a.cmp(&b)))
            .expect("nonempty");
        (vec![best], true)
    } else {
        (run.solution.open, false)
    };
    Ok(NccRun {
        cost: inst.cost_of(&open),
        open,
        reduced_cost,
        fallback,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SirpflRun {
    pub plan: SirpflPlan,
    pub ncc: NccRun,
}

/// Inventory routing with facility location: per-client schedule envelopes,
/// then the concave-cost pipeline, then the recorded schedules.
pub fn solve_sirpfl(
    inst: &SirpflInstance,
    oracle: &dyn ScheduleOracle,
    cfg: &JmsConfig,
) -> Result<SirpflRun, ReductionError> {
    if inst.facilities.is_empty() {
        return Err(ReductionError::NoFacilities);
    }
    let (ncc_inst, map) = sirpfl_to_ncc(inst, oracle)?;
    let ncc = solve_ncc(&ncc_inst, cfg)?;
    let plan = lift_solution(&ncc.open, inst, &map)?;
    Ok(SirpflRun { plan, ncc })
}
