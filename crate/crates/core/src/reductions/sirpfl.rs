use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use super::{distinct_distances, ReductionError};
use crate::instances::{NccClient, NccInstance, SirpflInstance};
use crate::lotsizing::{
    iap_exact, value_envelope, wagner_whitin, DemandSeries, LotSizingError, Schedule, ValueLine,
};

/// Per-client delivery planner invoked at each facility distance.
pub trait ScheduleOracle {
    fn schedule(&self, series: &DemandSeries, delivery_cost: f64) -> Result<Schedule, LotSizingError>;
}

impl<F> ScheduleOracle for F
where
    F: Fn(&DemandSeries, f64) -> Result<Schedule, LotSizingError>,
{
    fn schedule(&self, series: &DemandSeries, delivery_cost: f64) -> Result<Schedule, LotSizingError> {
        self(series, delivery_cost)
    }
}

/// Optimal schedules: the dynamic program when uncapacitated with monotone
/// holding, the exhaustive solver otherwise.
#[derive(Clone, Copy, Debug)]
pub struct ExactScheduleOracle {
    pub capacity: f64,
    pub splittable: bool,
}

impl ExactScheduleOracle {
    pub fn for_instance(inst: &SirpflInstance) -> Self {
        Self { capacity: inst.capacity, splittable: inst.splittable }
    }
}

impl ScheduleOracle for ExactScheduleOracle {
    fn schedule(&self, series: &DemandSeries, delivery_cost: f64) -> Result<Schedule, LotSizingError> {
        if self.capacity.is_infinite() {
            match wagner_whitin(series, delivery_cost) {
                Err(LotSizingError::NonMonotoneHolding { .. }) => {}
                other => return other,
            }
        }
        iap_exact(series, delivery_cost, self.capacity, self.splittable)
    }
}

/// Schedules realizing each client's concave cost function.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleMap {
    /// `schedules[j][b]` realizes breakpoint `b` of `g_j` (origin first).
    pub schedules: Vec<Vec<Schedule>>,
    /// `facility_point[j][i]`: breakpoint of `g_j` at facility `i`'s distance.
    pub facility_point: Vec<Vec<usize>>,
}

/// Builds the concave-cost instance whose `g_j` is the lower envelope of the
/// oracle's schedules at every facility distance of `j`, plus the all
/// just-in-time schedule anchoring `g_j(0) = 0`.
pub fn sirpfl_to_ncc(
    inst: &SirpflInstance,
    oracle: &dyn ScheduleOracle,
) -> Result<(NccInstance, ScheduleMap), ReductionError> {
    inst.validate()?;
    let mut clients = Vec::with_capacity(inst.clients.len());
    let mut map = ScheduleMap {
        schedules: Vec::with_capacity(inst.clients.len()),
        facility_point: Vec::with_capacity(inst.clients.len()),
    };
    for (j, c) in inst.clients.iter().enumerate() {
        let series = DemandSeries::from_client(c)?;
        let (xs, point) = distinct_distances(&inst.dist[j]);
        let mut family: Vec<Schedule> = xs
            .iter()
            .map(|&x| oracle.schedule(&series, x))
            .collect::<Result<_, _>>()?;
        family.push(series.just_in_time(inst.capacity));
        let lines: Vec<ValueLine> = family.iter().map(|s| s.value_line(&series)).collect();
        let env = value_envelope(&lines, &xs)?;
        clients.push(NccClient { id: c.id, g: env.g });
        map.schedules.push(env.achieving.iter().map(|&a| family[a].clone()).collect());
        map.facility_point.push(point);
    }
    let ncc = NccInstance {
        facilities: inst.facilities.clone(),
        clients,
        dist: inst.dist.clone(),
    };
    Ok((ncc, map))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PlanCosts {
    pub opening: f64,
    /// Per-delivery distance charges.
    pub delivery: f64,
    pub holding: f64,
    pub total: f64,
}

/// Open facilities, each client's facility and its delivery schedule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SirpflPlan {
    pub open: Vec<usize>,
    pub assignment: Vec<usize>,
    pub schedules: Vec<Schedule>,
    pub costs: PlanCosts,
}

impl SirpflPlan {
    /// Builds a plan and prices it.
    pub fn new(inst: &SirpflInstance, open: Vec<usize>, assignment: Vec<usize>, schedules: Vec<Schedule>) -> Self {
        let costs = plan_costs(inst, &open, &assignment, &schedules);
        Self { open, assignment, schedules, costs }
    }

    /// Checks open assignments, schedule feasibility (capacity and
    /// unsplittability included) and the cost decomposition.
    pub fn validate(&self, inst: &SirpflInstance, tol: f64) -> Result<(), String> {
        if self.assignment.len() != inst.clients.len() || self.schedules.len() != inst.clients.len() {
            return Err("plan must cover every client".into());
        }
        if self.open.is_empty() {
            return Err("no facility is open".into());
        }
        for (j, &i) in self.assignment.iter().enumerate() {
            if !self.open.contains(&i) {
                return Err(format!("client {j} assigned to closed facility {i}"));
            }
            let series = DemandSeries::from_client(&inst.clients[j]).map_err(|e| e.to_string())?;
            self.schedules[j]
                .validate(&series, inst.capacity, inst.splittable, tol)
                .map_err(|e| format!("client {j}: {e}"))?;
        }
        let want = plan_costs(inst, &self.open, &self.assignment, &self.schedules);
        let close = |a: f64, b: f64| (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()));
        if !(close(want.opening, self.costs.opening)
            && close(want.delivery, self.costs.delivery)
            && close(want.holding, self.costs.holding)
            && close(want.total, self.costs.total))
        {
            return Err(format!("recorded costs {:?} differ from recomputed {:?}", self.costs, want));
        }
        Ok(())
    }

    /// JSON form keyed by ids; days are 1-based.
    pub fn to_json(&self, inst: &SirpflInstance) -> Value {
        let fid = |i: usize| inst.facilities[i].id;
        let cid = |j: usize| inst.clients[j].id.to_string();
        let assignment: BTreeMap<String, u32> =
            self.assignment.iter().enumerate().map(|(j, &i)| (cid(j), fid(i))).collect();
        let schedules: serde_json::Map<String, Value> = self
            .schedules
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let deliveries: Vec<Value> = s
                    .deliveries
                    .iter()
                    .map(|d| {
                        let units: serde_json::Map<String, Value> =
                            d.units.iter().map(|(&t, &q)| ((t + 1).to_string(), json!(q))).collect();
                        json!({ "day": d.day + 1, "units": units })
                    })
                    .collect();
                (cid(j), Value::Array(deliveries))
            })
            .collect();
        json!({
            "open": self.open.iter().map(|&i| fid(i)).collect::<Vec<_>>(),
            "assignment": assignment,
            "schedules": schedules,
            "costs": self.costs,
        })
    }
}

fn plan_costs(inst: &SirpflInstance, open: &[usize], assignment: &[usize], schedules: &[Schedule]) -> PlanCosts {
    let mut costs = PlanCosts {
        opening: open.iter().map(|&i| inst.facilities[i].opening_cost).sum(),
        ..PlanCosts::default()
    };
    for (j, (&i, s)) in assignment.iter().zip(schedules).enumerate() {
        let series = DemandSeries::from_client(&inst.clients[j]).expect("validated client");
        let line = s.value_line(&series);
        costs.delivery += line.deliveries * inst.dist[j][i];
        costs.holding += line.holding;
    }
    costs.total = costs.opening + costs.delivery + costs.holding;
    costs
}

/// Assigns each client to its nearest open facility (lowest index on ties)
/// and gives it the schedule recorded at that distance.
pub fn lift_solution(
    open: &[usize],
    inst: &SirpflInstance,
    map: &ScheduleMap,
) -> Result<SirpflPlan, ReductionError> {
    let mut open = open.to_vec();
    open.sort_unstable();
    open.dedup();
    if open.is_empty() {
        return Err(ReductionError::EmptyOpenSet);
    }
    let mut assignment = Vec::with_capacity(inst.clients.len());
    let mut schedules = Vec::with_capacity(inst.clients.len());
    for j in 0..inst.clients.len() {
        let i = *open
            .iter()
            .min_by(|&&a, &&b| inst.dist[j][a].total_cmp(&inst.dist[j][b]).then(a.cmp(&b)))
            .expect("nonempty");
        assignment.push(i);
        schedules.push(map.schedules[j][map.facility_point[j][i]].clone());
    }
    Ok(SirpflPlan::new(inst, open, assignment, schedules))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{Facility, SirpflClient};

    fn client(id: u32, demands: &[f64], rate: f64) -> SirpflClient {
        let t_len = demands.len();
        SirpflClient {
            id,
            demands: demands.to_vec(),
            holding: (0..t_len)
                .map(|s| (0..t_len).map(|t| if t >= s { rate * (t - s) as f64 } else { 0.0 }).collect())
                .collect(),
        }
    }

    fn inst(fs: &[f64], clients: Vec<SirpflClient>, dist: Vec<Vec<f64>>) -> SirpflInstance {
        SirpflInstance {
            facilities: fs.iter().enumerate().map(|(i, &f)| Facility { id: 10 + i as u32, opening_cost: f }).collect(),
            horizon: clients[0].demands.len(),
            clients,
            dist,
            capacity: f64::INFINITY,
            splittable: true,
        }
    }

    #[test]
    fn one_day_demand_is_plain_distance() {
        let i = inst(&[1.0, 2.0], vec![client(0, &[1.0], 1.0)], vec![vec![1.0, 3.0]]);
        let (ncc, _) = sirpfl_to_ncc(&i, &ExactScheduleOracle::for_instance(&i)).unwrap();
        assert_eq!(ncc.clients[0].g.breakpoints(), &[(0.0, 0.0), (1.0, 1.0), (3.0, 3.0)]);
    }

    #[test]
    fn envelope_matches_optimal_values() {
        let c = client(0, &[1.0, 1.0, 1.0], 1.0);
        let i = inst(&[0.0, 0.0], vec![c.clone()], vec![vec![1.0, 3.0]]);
        let (ncc, map) = sirpfl_to_ncc(&i, &ExactScheduleOracle::for_instance(&i)).unwrap();
        let series = DemandSeries::from_client(&c).unwrap();
        for (x, want) in [(1.0, 3.0), (3.0, 6.0)] {
            let opt = wagner_whitin(&series, x).unwrap().cost_at(&series, x);
            assert_eq!(opt, want);
            assert!((ncc.clients[0].g.eval(x) - opt).abs() < 1e-12);
        }
        assert_eq!(map.facility_point[0], vec![1, 2]);
    }

    #[test]
    fn identical_clients_share_functions() {
        let i = inst(
            &[1.0, 1.0],
            vec![client(0, &[1.0, 2.0], 0.3), client(1, &[1.0, 2.0], 0.3)],
            vec![vec![0.5, 1.5], vec![0.5, 1.5]],
        );
        let (ncc, _) = sirpfl_to_ncc(&i, &ExactScheduleOracle::for_instance(&i)).unwrap();
        assert_eq!(ncc.clients[0].g, ncc.clients[1].g);
    }

    #[test]
    fn single_facility_plan_cost() {
        let i = inst(&[2.0], vec![client(0, &[1.0, 1.0], 0.5), client(1, &[0.0, 3.0], 0.5)], vec![vec![1.0], vec![2.0]]);
        let (ncc, map) = sirpfl_to_ncc(&i, &ExactScheduleOracle::for_instance(&i)).unwrap();
        let plan = lift_solution(&[0], &i, &map).unwrap();
        plan.validate(&i, 1e-9).unwrap();
        let want = 2.0 + ncc.clients[0].g.eval(1.0) + ncc.clients[1].g.eval(2.0);
        assert!((plan.costs.total - want).abs() < 1e-12);
        assert!((ncc.cost_of(&[0]) - want).abs() < 1e-12);
        let js = plan.to_json(&i);
        assert_eq!(js["open"], json!([10]));
        assert_eq!(js["assignment"]["1"], json!(10));
        assert_eq!(js["schedules"]["1"][0]["day"], json!(2));
        assert!(matches!(lift_solution(&[], &i, &map), Err(ReductionError::EmptyOpenSet)));
    }

    #[test]
    fn capacitated_plans_respect_capacity() {
        let mut i = inst(&[1.0], vec![client(0, &[2.0, 1.0, 2.0], 0.2)], vec![vec![3.0]]);
        i.capacity = 2.0;
        i.splittable = false;
        let (_, map) = sirpfl_to_ncc(&i, &ExactScheduleOracle::for_instance(&i)).unwrap();
        let plan = lift_solution(&[0], &i, &map).unwrap();
        plan.validate(&i, 1e-9).unwrap();
        assert!(plan.schedules[0].deliveries.iter().all(|d| d.load() <= 2.0));
    }
}
