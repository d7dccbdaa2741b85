use serde::Serialize;

use super::FlpmInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Assignment {
    Facility(usize),
    Penalty,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub opening: f64,
    pub connection: f64,
    pub penalty: f64,
    pub total: f64,
}

/// Open facilities (indices, ascending) and each client's fate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlSolution {
    pub open: Vec<usize>,
    pub assignment: Vec<Assignment>,
    pub costs: CostBreakdown,
}

impl FlSolution {
    /// Connects every client to its nearest open facility (lowest index on
    /// ties) when that is no farther than its penalty, and pays the penalty
    /// otherwise.
    pub fn from_open(inst: &FlpmInstance, open: &[usize]) -> Self {
        let mut open = open.to_vec();
        open.sort_unstable();
        open.dedup();
        let mut costs = CostBreakdown {
            opening: open.iter().map(|&i| inst.facilities[i].opening_cost).sum(),
            ..CostBreakdown::default()
        };
        let assignment = inst
            .clients
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let nearest = open.iter().copied().min_by(|&a, &b| {
                    inst.dist[j][a].total_cmp(&inst.dist[j][b]).then(a.cmp(&b))
                });
                match nearest {
                    Some(i) if inst.dist[j][i] <= c.penalty => {
                        costs.connection += c.multiplicity * inst.dist[j][i];
                        Assignment::Facility(i)
                    }
                    _ => {
                        costs.penalty += c.multiplicity * c.penalty;
                        Assignment::Penalty
                    }
                }
            })
            .collect();
        costs.total = costs.opening + costs.connection + costs.penalty;
        Self {
            open,
            assignment,
            costs,
        }
    }

    /// Checks that assignments use open facilities and that the recorded
    /// costs add up.
    pub fn validate(&self, inst: &FlpmInstance, tol: f64) -> Result<(), String> {
        if self.assignment.len() != inst.n_clients() {
            return Err("assignment length differs from client count".into());
        }
        let mut recomputed = CostBreakdown {
            opening: self.open.iter().map(|&i| inst.facilities[i].opening_cost).sum(),
            ..CostBreakdown::default()
        };
        for (j, a) in self.assignment.iter().enumerate() {
            let c = &inst.clients[j];
            match *a {
                Assignment::Facility(i) => {
                    if !self.open.contains(&i) {
                        return Err(format!("client {j} assigned to closed facility {i}"));
                    }
                    recomputed.connection += c.multiplicity * inst.dist[j][i];
                }
                Assignment::Penalty => {
                    if c.penalty.is_infinite() {
                        return Err(format!("client {j} has infinite penalty but is unserved"));
                    }
                    recomputed.penalty += c.multiplicity * c.penalty;
                }
            }
        }
        recomputed.total = recomputed.opening + recomputed.connection + recomputed.penalty;
        let close = |a: f64, b: f64| (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()));
        if !(close(recomputed.opening, self.costs.opening)
            && close(recomputed.connection, self.costs.connection)
            && close(recomputed.penalty, self.costs.penalty)
            && close(recomputed.total, self.costs.total))
        {
            return Err(format!(
                "recorded costs {:?} differ from recomputed {:?}",
                self.costs, recomputed
            ));
        }
        Ok(())
    }
}
