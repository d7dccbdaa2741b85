use super::{FrError, FrSolution};
use crate::instances::FlpmInstance;

/// Program points read off a primal-dual run, one per facility taken as a
/// star centre: the clients that could be served there (`d <= p`) and that
/// see some opened facility, ordered by their freeze time.
///
/// The freeze time of client `j` is `min` over opened `i` of
/// `max(opening time of i, d_ij)`; `r[j][i]` is the distance from `j` to the
/// nearest facility opened strictly before client `i`'s freeze time, capped
/// at `j`'s own freeze time. Requires unit multiplicities.
pub fn extract_stars(
    inst: &FlpmInstance,
    open_times: &[Option<f64>],
    tol: f64,
) -> Result<Vec<(usize, FrSolution)>, FrError> {
    if open_times.len() != inst.n_facilities() {
        return Err(FrError::Dimension("one opening time per facility".into()));
    }
    if inst.clients.iter().any(|c| c.multiplicity != 1.0) {
        return Err(FrError::Other("extraction needs unit multiplicities".into()));
    }
    let opened: Vec<(usize, f64)> = open_times
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.map(|t| (i, t)))
        .collect();
    let freeze: Vec<Option<f64>> = (0..inst.n_clients())
        .map(|j| {
            opened
                .iter()
                .map(|&(i, tau)| tau.max(inst.dist[j][i]))
                .min_by(f64::total_cmp)
        })
        .collect();
    let mut stars = Vec::new();
    for centre in 0..inst.n_facilities() {
        let mut members: Vec<usize> = (0..inst.n_clients())
            .filter(|&j| freeze[j].is_some() && inst.dist[j][centre] <= inst.clients[j].penalty)
            .collect();
        if members.is_empty() {
            continue;
        }
        members.sort_by(|&a, &b| freeze[a].unwrap().total_cmp(&freeze[b].unwrap()).then(a.cmp(&b)));
        let k = members.len();
        let t: Vec<f64> = members.iter().map(|&j| freeze[j].unwrap()).collect();
        let mut r = vec![vec![0.0; k]; k];
        for a in 0..k {
            for b in (a + 1)..k {
                let before = opened
                    .iter()
                    .filter(|&&(_, tau)| tau < t[b] - tol)
                    .map(|&(i, _)| inst.dist[members[a]][i])
                    .fold(f64::INFINITY, f64::min);
                r[a][b] = before.min(t[a]);
            }
        }
        let sol = FrSolution::new(
            t,
            members.iter().map(|&j| inst.dist[j][centre]).collect(),
            members.iter().map(|&j| inst.clients[j].penalty).collect(),
            r,
            inst.facilities[centre].opening_cost,
        );
        stars.push((centre, sol));
    }
    Ok(stars)
}

#[cfg(test)]
mod tests {
    use super::super::check_feasible_p;
    use super::*;
    use crate::instances::{Facility, FlpmClient};
    use crate::jms::{solve_flpm, JmsConfig};

    #[test]
    fn two_client_star() {
        let inst = FlpmInstance {
            facilities: vec![Facility { id: 0, opening_cost: 2.0 }],
            clients: vec![
                FlpmClient { id: 0, penalty: f64::INFINITY, multiplicity: 1.0 },
                FlpmClient { id: 1, penalty: f64::INFINITY, multiplicity: 1.0 },
            ],
            dist: vec![vec![1.0], vec![1.0]],
        };
        let run = solve_flpm(&inst, &JmsConfig::default()).unwrap();
        let stars = extract_stars(&inst, &run.open_times, 1e-9).unwrap();
        assert_eq!(stars.len(), 1);
        let s = &stars[0].1;
        assert_eq!(s.t, vec![2.0, 2.0]);
        assert_eq!(s.r[0][1], 2.0);
        assert!(check_feasible_p(s, 1e-9).unwrap().is_empty());
    }
}
