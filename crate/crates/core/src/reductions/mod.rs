//! Cost-preserving reductions between the facility-location variants and
//! lifting of solutions back to the source problem.

mod pipeline;
mod sirpfl;

pub use pipeline::{solve_ncc, solve_sirpfl, NccRun, SirpflRun};
pub use sirpfl::{
    lift_solution, sirpfl_to_ncc, ExactScheduleOracle, PlanCosts, ScheduleMap, ScheduleOracle,
    SirpflPlan,
};

use serde::Serialize;
use thiserror::Error;

use crate::instances::{ConcaveFn, FlpmClient, FlpmInstance, InstanceError, NccInstance};
use crate::jms::JmsError;
use crate::lotsizing::LotSizingError;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    LotSizing(#[from] LotSizingError),
    #[error(transparent)]
    Jms(#[from] JmsError),
    #[error("client {client}: g(0) = {value}, but the reduction needs g(0) = 0")]
    NonzeroOrigin { client: usize, value: f64 },
    #[error("distances must be positive and strictly increasing")]
    BadDistances,
    #[error("at least one facility must be open")]
    EmptyOpenSet,
    #[error("instance has no facilities")]
    NoFacilities,
}

/// Relative tolerance under which two facility distances count as equal.
const TIE_TOL: f64 = 1e-12;

/// Sorted distinct positive distances of one client, plus for each facility
/// its position in `[0] ++ distances` (0 for a co-located facility).
pub(crate) fn distinct_distances(row: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
    let mut xs: Vec<f64> = Vec::new();
    let mut point = vec![0usize; row.len()];
    for i in order {
        let d = row[i];
        if d <= 0.0 {
            continue;
        }
        match xs.last() {
            Some(&last) if d - last <= TIE_TOL * (1.0 + last) => {}
            _ => xs.push(d),
        }
        point[i] = xs.len();
    }
    (xs, point)
}

/// Multiplicities of the co-located clients replacing one concave-cost
/// client: with chords taken from the origin, `m_k` is the drop in slope at
/// `d_k` and the last entry is the final slope.
pub fn multiplicities(g: &ConcaveFn, dists: &[f64]) -> Result<Vec<f64>, ReductionError> {
    if dists.is_empty()
        || dists[0] <= 0.0
        || dists.windows(2).any(|w| w[0] >= w[1])
        || dists.iter().any(|d| !d.is_finite())
    {
        return Err(ReductionError::BadDistances);
    }
    if g.at_zero() != 0.0 {
        return Err(ReductionError::NonzeroOrigin { client: 0, value: g.at_zero() });
    }
    let mut xs = vec![0.0];
    xs.extend_from_slice(dists);
    let ys: Vec<f64> = xs.iter().map(|&x| g.eval(x)).collect();
    let slopes: Vec<f64> = (1..xs.len()).map(|k| (ys[k] - ys[k - 1]) / (xs[k] - xs[k - 1])).collect();
    let n = slopes.len();
    Ok((0..n)
        .map(|k| {
            let m = if k + 1 < n { slopes[k] - slopes[k + 1] } else { slopes[k] };
            m.max(0.0)
        })
        .collect())
}

/// For one source client: the distinct distances, and for each the created
/// client index in the reduced instance (None when its multiplicity is 0).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClientExpansion {
    pub distances: Vec<f64>,
    pub multiplicities: Vec<f64>,
    pub created: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NccToFlpmMap {
    pub clients: Vec<ClientExpansion>,
}

/// Replaces every concave-cost client by co-located clients with penalties at
/// its distinct facility distances, so that every open set costs the same in
/// both instances.
pub fn ncc_to_flpm(inst: &NccInstance) -> Result<(FlpmInstance, NccToFlpmMap), ReductionError> {
    inst.validate()?;
    let mut clients = Vec::new();
    let mut dist = Vec::new();
    let mut map = NccToFlpmMap { clients: Vec::with_capacity(inst.clients.len()) };
    for (j, c) in inst.clients.iter().enumerate() {
        if c.g.at_zero() != 0.0 {
            return Err(ReductionError::NonzeroOrigin { client: j, value: c.g.at_zero() });
        }
        let (xs, _) = distinct_distances(&inst.dist[j]);
        let ms = if xs.is_empty() { Vec::new() } else { multiplicities(&c.g, &xs)? };
        let mut created = Vec::with_capacity(xs.len());
        for (&x, &m) in xs.iter().zip(&ms) {
            if m > 0.0 {
                created.push(Some(clients.len()));
                clients.push(FlpmClient {
                    id: clients.len() as u32,
                    penalty: x,
                    multiplicity: m,
                });
                dist.push(inst.dist[j].clone());
            } else {
                created.push(None);
            }
        }
        map.clients.push(ClientExpansion { distances: xs, multiplicities: ms, created });
    }
    let reduced = FlpmInstance {
        facilities: inst.facilities.clone(),
        clients,
        dist,
    };
    Ok((reduced, map))
}

/// Balance point of the opening and service factors when the service side is
/// inflated by an `alpha`-approximate per-client subroutine.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LambdaFixedPoint {
    /// Root of `λ = alpha · (1 + 2e^{−λ})`.
    pub lambda_f: f64,
    /// `max{λ_f, alpha (1 + 2e^{−λ_f})}`, equal to `lambda_f` at the root.
    pub ratio: f64,
    /// Whether the root lies in the range `λ_f ≥ 1.6774` where the bifactor
    /// family is stated to exist.
    pub in_bifactor_range: bool,
}

pub const BIFACTOR_LAMBDA_MIN: f64 = 1.6774;

pub fn capacitated_lambda(alpha: f64) -> LambdaFixedPoint {
    assert!(alpha >= 1.0, "alpha must be at least 1");
    let h = |l: f64| l - alpha * (1.0 + 2.0 * (-l).exp());
    let (mut lo, mut hi) = (alpha, 3.0 * alpha);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda_f = 0.5 * (lo + hi);
    LambdaFixedPoint {
        lambda_f,
        ratio: lambda_f.max(alpha * (1.0 + 2.0 * (-lambda_f).exp())),
        in_bifactor_range: lambda_f >= BIFACTOR_LAMBDA_MIN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{Facility, NccClient};

    fn g(points: &[(f64, f64)]) -> ConcaveFn {
        ConcaveFn::new(points.to_vec()).unwrap()
    }

    fn eq15(ms: &[f64], ds: &[f64], k: usize) -> f64 {
        (0..k).map(|i| ms[i] * ds[i]).sum::<f64>() + (k..ds.len()).map(|i| ms[i] * ds[k]).sum::<f64>()
    }

    #[test]
    fn three_breakpoints() {
        let f = g(&[(0.0, 0.0), (1.0, 1.0), (2.0, 1.5), (4.0, 2.0)]);
        let ds = [1.0, 2.0, 4.0];
        let ms = multiplicities(&f, &ds).unwrap();
        assert_eq!(ms, vec![0.5, 0.25, 0.25]);
        for (k, want) in [1.0, 1.5, 2.0].into_iter().enumerate() {
            assert!((eq15(&ms, &ds, k) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_function_loads_last_client() {
        let f = ConcaveFn::linear(1.5).unwrap();
        assert_eq!(multiplicities(&f, &[0.5, 1.0, 3.0]).unwrap(), vec![0.0, 0.0, 1.5]);
    }

    #[test]
    fn flat_tail() {
        let f = g(&[(0.0, 0.0), (1.0, 1.0), (2.0, 1.0)]);
        assert_eq!(multiplicities(&f, &[1.0, 3.0]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn rejects_offset_origin() {
        let f = g(&[(0.0, 1.0), (1.0, 2.0)]);
        assert!(matches!(multiplicities(&f, &[1.0]), Err(ReductionError::NonzeroOrigin { .. })));
        assert!(matches!(multiplicities(&ConcaveFn::linear(1.0).unwrap(), &[2.0, 1.0]), Err(ReductionError::BadDistances)));
    }

    fn ncc(row: Vec<f64>, f: ConcaveFn) -> NccInstance {
        NccInstance {
            facilities: (0..row.len()).map(|i| Facility { id: i as u32, opening_cost: 1.0 }).collect(),
            clients: vec![NccClient { id: 0, g: f }],
            dist: vec![row],
        }
    }

    #[test]
    fn two_facility_reduction_preserves_cost() {
        let inst = ncc(vec![1.0, 2.0], g(&[(0.0, 0.0), (1.0, 1.0), (2.0, 1.5)]));
        let (red, map) = ncc_to_flpm(&inst).unwrap();
        let pm: Vec<(f64, f64)> = red.clients.iter().map(|c| (c.penalty, c.multiplicity)).collect();
        assert_eq!(pm, vec![(1.0, 0.5), (2.0, 0.5)]);
        assert_eq!(map.clients[0].created, vec![Some(0), Some(1)]);
        assert!((red.cost_of(&[1]) - inst.cost_of(&[1])).abs() < 1e-12);
        assert!((red.cost_of(&[1]) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn single_facility_uses_origin_chord() {
        let inst = ncc(vec![2.0], g(&[(0.0, 0.0), (1.0, 1.0), (3.0, 2.0)]));
        let (red, _) = ncc_to_flpm(&inst).unwrap();
        assert_eq!(red.clients.len(), 1);
        assert_eq!(red.clients[0].penalty, 2.0);
        assert!((red.clients[0].multiplicity - 1.5 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn tied_distances_collapse() {
        let inst = ncc(vec![1.0, 1.0], ConcaveFn::linear(2.0).unwrap());
        let (red, map) = ncc_to_flpm(&inst).unwrap();
        assert_eq!(red.clients.len(), 1);
        assert_eq!(map.clients[0].distances, vec![1.0]);
    }

    #[test]
    fn distinct_distances_marks_colocated() {
        let (xs, point) = distinct_distances(&[2.0, 0.0, 1.0, 2.0]);
        assert_eq!(xs, vec![1.0, 2.0]);
        assert_eq!(point, vec![2, 0, 1, 2]);
    }

    #[test]
    fn fixed_points() {
        let three = capacitated_lambda(3.0);
        assert!((three.lambda_f - 3.23594).abs() < 1e-3);
        assert!((three.ratio - 3.236).abs() < 1e-3);
        assert!((capacitated_lambda(6.0).ratio - 6.029).abs() < 1e-3);
        let one = capacitated_lambda(1.0);
        assert!((one.lambda_f - 1.0 - 2.0 * (-one.lambda_f).exp()).abs() < 1e-12);
        assert!(!one.in_bifactor_range);
    }
}
