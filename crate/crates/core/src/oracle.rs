//! Exhaustive exact solvers used as ground truth. They enumerate without
//! pruning and refuse inputs beyond desk scale unless explicitly forced.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::instances::{FlSolution, FlpmInstance, NccInstance, SirpflInstance};
use crate::lotsizing::{iap_exact, Delivery, DemandSeries, LotSizingError, Schedule};
use crate::reductions::SirpflPlan;

pub const MAX_FLPM_FACILITIES: usize = 12;
pub const MAX_LOTSIZING_HORIZON: usize = 12;
pub const MAX_SIRPFL_FACILITIES: usize = 4;
pub const MAX_SIRPFL_CLIENTS: usize = 4;
pub const MAX_SIRPFL_HORIZON: usize = 4;
pub const MAX_SIRPFL_DEMAND: f64 = 3.0;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("oracle scale guard: {0}")]
    ScaleGuard(String),
    #[error(transparent)]
    LotSizing(#[from] LotSizingError),
}

fn guard(ok: bool, force: bool, what: impl FnOnce() -> String) -> Result<(), OracleError> {
    if ok || force {
        Ok(())
    } else {
        Err(OracleError::ScaleGuard(what()))
    }
}

/// Optimal penalized facility location over all facility subsets, the empty
/// one included.
pub fn brute_flpm(inst: &FlpmInstance, force: bool) -> Result<(f64, FlSolution), OracleError> {
    let n = inst.n_facilities();
    guard(n <= MAX_FLPM_FACILITIES, force, || format!("{n} facilities > {MAX_FLPM_FACILITIES}"))?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 0u64..(1u64 << n) {
        let open: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let cost = inst.cost_of(&open);
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, open));
        }
    }
    let (value, open) = best.expect("at least the empty set");
    Ok((value, FlSolution::from_open(inst, &open)))
}

/// Optimal concave-cost facility location over nonempty facility subsets.
pub fn brute_ncc(inst: &NccInstance, force: bool) -> Result<(f64, Vec<usize>), OracleError> {
    let n = inst.facilities.len();
    guard(n <= MAX_FLPM_FACILITIES, force, || format!("{n} facilities > {MAX_FLPM_FACILITIES}"))?;
    guard(n > 0, false, || "no facilities".into())?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 1u64..(1u64 << n) {
        let open: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let cost = inst.cost_of(&open);
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, open));
        }
    }
    Ok(best.expect("nonempty"))
}

/// Uncapacitated lot sizing by enumerating the set of delivery days; each
/// demand is served by the chosen day with the cheapest holding.
pub fn brute_lotsizing(series: &DemandSeries, k: f64, force: bool) -> Result<f64, OracleError> {
    Ok(brute_lotsizing_schedule(series, k, force)?.0)
}

pub fn brute_lotsizing_schedule(
    series: &DemandSeries,
    k: f64,
    force: bool,
) -> Result<(f64, Schedule), OracleError> {
    let t_len = series.horizon();
    guard(t_len <= MAX_LOTSIZING_HORIZON, force, || {
        format!("horizon {t_len} > {MAX_LOTSIZING_HORIZON}")
    })?;
    let serving = |mask: u64, t: usize| -> Option<usize> {
        (0..=t)
            .filter(|&s| mask >> s & 1 == 1)
            .min_by(|&a, &b| series.holding(a, t).total_cmp(&series.holding(b, t)).then(a.cmp(&b)))
    };
    let mut best: Option<(f64, u64)> = None;
    'subsets: for mask in 1u64..(1u64 << t_len) {
        let mut cost = k * mask.count_ones() as f64;
        for t in 0..t_len {
            if series.demand(t) > 0.0 {
                match serving(mask, t) {
                    Some(s) => cost += series.demand(t) * series.holding(s, t),
                    None => continue 'subsets,
                }
            }
        }
        if best.is_none_or(|(b, _)| cost < b) {
            best = Some((cost, mask));
        }
    }
    let (value, mask) = best.expect("delivering every day is feasible");
    let mut by_day: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
    for t in 0..t_len {
        if series.demand(t) > 0.0 {
            let s = serving(mask, t).expect("feasible subset");
            by_day.entry(s).or_default().insert(t, series.demand(t));
        }
    }
    let schedule = Schedule {
        deliveries: by_day.into_iter().map(|(day, units)| Delivery { day, units }).collect(),
    };
    Ok((value, schedule))
}

/// Optimal inventory routing with facility location: every nonempty facility
/// subset, every client-to-open-facility choice, exact per-client schedules.
pub fn brute_sirpfl(inst: &SirpflInstance, force: bool) -> Result<(f64, SirpflPlan), OracleError> {
    let n_fac = inst.facilities.len();
    let n_cli = inst.clients.len();
    guard(n_fac <= MAX_SIRPFL_FACILITIES, force, || format!("{n_fac} facilities > {MAX_SIRPFL_FACILITIES}"))?;
    guard(n_cli <= MAX_SIRPFL_CLIENTS, force, || format!("{n_cli} clients > {MAX_SIRPFL_CLIENTS}"))?;
    guard(inst.horizon <= MAX_SIRPFL_HORIZON, force, || format!("horizon {} > {MAX_SIRPFL_HORIZON}", inst.horizon))?;
    let small = inst.clients.iter().all(|c| {
        c.demands.iter().all(|&u| u.fract() == 0.0 && u <= MAX_SIRPFL_DEMAND)
    });
    guard(small, force, || format!("demands must be integers <= {MAX_SIRPFL_DEMAND}"))?;
    guard(n_fac > 0, false, || "no facilities".into())?;

    let mut cache: HashMap<(usize, usize), (f64, Schedule)> = HashMap::new();
    for j in 0..n_cli {
        let series = DemandSeries::from_client(&inst.clients[j])?;
        for i in 0..n_fac {
            let x = inst.dist[j][i];
            let entry = if inst.capacity.is_infinite() {
                brute_lotsizing_schedule(&series, x, true)?
            } else {
                let s = iap_exact(&series, x, inst.capacity, inst.splittable)?;
                (s.cost_at(&series, x), s)
            };
            cache.insert((j, i), entry);
        }
    }

    let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
    for mask in 1u64..(1u64 << n_fac) {
        let open: Vec<usize> = (0..n_fac).filter(|&i| mask >> i & 1 == 1).collect();
        let opening: f64 = open.iter().map(|&i| inst.facilities[i].opening_cost).sum();
        // Every assignment of clients to open facilities, as mixed-radix digits.
        let combos = open.len().pow(n_cli as u32);
        for code in 0..combos {
            let mut rest = code;
            let mut assignment = Vec::with_capacity(n_cli);
            let mut cost = opening;
            for j in 0..n_cli {
                let i = open[rest % open.len()];
                rest /= open.len();
                cost += cache[&(j, i)].0;
                assignment.push(i);
            }
            if best.as_ref().is_none_or(|(b, _, _)| cost < *b) {
                best = Some((cost, open.clone(), assignment));
            }
        }
    }
    let (value, open, assignment) = best.expect("nonempty facility set");
    let schedules = assignment
        .iter()
        .enumerate()
        .map(|(j, &i)| cache[&(j, i)].1.clone())
        .collect();
    Ok((value, SirpflPlan::new(inst, open, assignment, schedules)))
}
