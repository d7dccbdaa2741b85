//! Single-client delivery scheduling: uncapacitated lot sizing, the exact
//! capacitated inventory access problem at desk scale, and the concave value
//! envelopes built from schedule families.

mod envelope;
mod iap;

pub use envelope::{sequential_envelope, value_envelope, Envelope, SequenceOutcome};
pub use iap::{iap_exact, IAP_MAX_DEMAND, IAP_MAX_HORIZON};

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::instances::SirpflClient;
use crate::lp::LpError;

#[derive(Debug, Error, PartialEq)]
pub enum LotSizingError {
    #[error("invalid demand series: {0}")]
    InvalidSeries(String),
    #[error(
        "holding costs are not monotone in earliness (h[{early}][{due}] < h[{late}][{due}]); \
         use the exhaustive lot-sizing solver instead"
    )]
    NonMonotoneHolding { early: usize, late: usize, due: usize },
    #[error("instance exceeds the exact solver's scale guard: {0}")]
    ScaleGuard(String),
    #[error("demand on day {day} exceeds the capacity of an unsplittable delivery")]
    Infeasible { day: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Demands and holding costs of one client over days `0..T`.
#[derive(Clone, Debug, PartialEq)]
pub struct DemandSeries {
    demands: Vec<f64>,
    holding: Vec<Vec<f64>>,
}

impl DemandSeries {
    pub fn new(demands: Vec<f64>, holding: Vec<Vec<f64>>) -> Result<Self, LotSizingError> {
        let t_len = demands.len();
        let bad = |s: String| Err(LotSizingError::InvalidSeries(s));
        if t_len == 0 {
            return bad("empty horizon".into());
        }
        if holding.len() != t_len || holding.iter().any(|r| r.len() != t_len) {
            return bad(format!("holding must be a {t_len}x{t_len} table"));
        }
        if demands.iter().any(|u| !(u.is_finite() && *u >= 0.0)) {
            return bad("demands must be finite and >= 0".into());
        }
        if !demands.iter().any(|&u| u > 0.0) {
            return bad("at least one positive demand is required".into());
        }
        for s in 0..t_len {
            for t in s..t_len {
                if !(holding[s][t].is_finite() && holding[s][t] >= 0.0) {
                    return bad(format!("holding[{s}][{t}] must be finite and >= 0"));
                }
            }
            if demands[s] > 0.0 && holding[s][s] != 0.0 {
                return bad(format!("holding[{s}][{s}] must be 0 at a demand point"));
            }
        }
        Ok(Self { demands, holding })
    }

    pub fn from_client(c: &SirpflClient) -> Result<Self, LotSizingError> {
        Self::new(c.demands.clone(), c.holding.clone())
    }

    pub fn horizon(&self) -> usize {
        self.demands.len()
    }

    pub fn demand(&self, t: usize) -> f64 {
        self.demands[t]
    }

    pub fn demands(&self) -> &[f64] {
        &self.demands
    }

    /// Per-unit cost of serving day `t`'s demand from a delivery on day `s <= t`.
    pub fn holding(&self, s: usize, t: usize) -> f64 {
        debug_assert!(s <= t);
        self.holding[s][t]
    }

    pub fn total_demand(&self) -> f64 {
        self.demands.iter().sum()
    }

    pub fn demand_days(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.horizon()).filter(|&t| self.demands[t] > 0.0)
    }

    /// First violation of `h[s][t] >= h[s'][t]` for `s <= s' <= t` among
    /// demand days `t`.
    pub fn monotonicity_violation(&self) -> Option<(usize, usize, usize)> {
        for t in self.demand_days() {
            for s in 0..t {
                if self.holding[s][t] < self.holding[s + 1][t] {
                    return Some((s, s + 1, t));
                }
            }
        }
        None
    }

    /// Every demand delivered on its due day: zero holding cost.
    pub fn just_in_time(&self, capacity: f64) -> Schedule {
        let mut deliveries = Vec::new();
        for t in self.demand_days() {
            let mut left = self.demands[t];
            while left > 0.0 {
                let q = left.min(capacity);
                deliveries.push(Delivery {
                    day: t,
                    units: BTreeMap::from([(t, q)]),
                });
                left -= q;
            }
        }
        Schedule { deliveries }
    }
}

/// Cost `deliveries · x + holding` of a schedule at per-delivery price `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValueLine {
    pub deliveries: f64,
    pub holding: f64,
}

impl ValueLine {
    pub fn at(&self, x: f64) -> f64 {
        self.deliveries * x + self.holding
    }
}

/// One shipment: its day and the units carried for each due day.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Delivery {
    pub day: usize,
    pub units: BTreeMap<usize, f64>,
}

impl Delivery {
    pub fn load(&self) -> f64 {
        self.units.values().sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Schedule {
    pub deliveries: Vec<Delivery>,
}

impl Schedule {
    pub fn value_line(&self, series: &DemandSeries) -> ValueLine {
        let holding = self
            .deliveries
            .iter()
            .flat_map(|d| d.units.iter().map(move |(&t, &q)| q * series.holding(d.day, t)))
            .sum();
        ValueLine {
            deliveries: self.deliveries.len() as f64,
            holding,
        }
    }

    pub fn cost_at(&self, series: &DemandSeries, x: f64) -> f64 {
        self.value_line(series).at(x)
    }

    /// Checks that every demand is fully served no later than its due day,
    /// loads respect `capacity`, and, when unsplittable, that each demand
    /// arrives in exactly one delivery.
    pub fn validate(
        &self,
        series: &DemandSeries,
        capacity: f64,
        splittable: bool,
        tol: f64,
    ) -> Result<(), String> {
        let t_len = series.horizon();
        let mut served = vec![0.0; t_len];
        let mut carriers = vec![0usize; t_len];
        for (k, d) in self.deliveries.iter().enumerate() {
            if d.day >= t_len {
                return Err(format!("delivery {k} on day {} beyond the horizon", d.day));
            }
            for (&t, &q) in &d.units {
                if t >= t_len || t < d.day {
                    return Err(format!("delivery {k} on day {} serves due day {t}", d.day));
                }
                if q < -tol {
                    return Err(format!("delivery {k} carries negative units"));
                }
                served[t] += q;
                if q > tol {
                    carriers[t] += 1;
                }
            }
            if d.load() > capacity + tol * (1.0 + capacity.min(1e12)) {
                return Err(format!("delivery {k} carries {} > capacity {capacity}", d.load()));
            }
        }
        for t in 0..t_len {
            let u = series.demand(t);
            if (served[t] - u).abs() > tol * (1.0 + u) {
                return Err(format!("day {t} demand {u} served {}", served[t]));
            }
            if !splittable && u > 0.0 && carriers[t] != 1 {
                return Err(format!("unsplittable day {t} demand split across {} deliveries", carriers[t]));
            }
        }
        Ok(())
    }
}

/// Optimal uncapacitated lot sizing by the `O(T²)` dynamic program over the
/// last delivery day. Requires holding costs that grow with earliness.
pub fn wagner_whitin(series: &DemandSeries, delivery_cost: f64) -> Result<Schedule, LotSizingError> {
    if let Some((early, late, due)) = series.monotonicity_violation() {
        return Err(LotSizingError::NonMonotoneHolding { early, late, due });
    }
    let t_len = series.horizon();
    // best[t]: cheapest way to serve days 0..t; from[t]: delivery day of the
    // last block, or None when day t-1 carries no demand and is skipped.
    let mut best = vec![f64::INFINITY; t_len + 1];
    let mut from: Vec<Option<usize>> = vec![None; t_len + 1];
    best[0] = 0.0;
    for t in 1..=t_len {
        if series.demand(t - 1) == 0.0 {
            best[t] = best[t - 1];
        }
        for s in 0..t {
            let block: f64 = (s..t).map(|tau| series.demand(tau) * series.holding(s, tau)).sum();
            let cost = best[s] + delivery_cost + block;
            if cost < best[t] {
                best[t] = cost;
                from[t] = Some(s);
            }
        }
    }
    let mut deliveries = Vec::new();
    let mut t = t_len;
    while t > 0 {
        match from[t] {
            None => t -= 1,
            Some(s) => {
                let units: BTreeMap<usize, f64> = (s..t)
                    .filter(|&tau| series.demand(tau) > 0.0)
                    .map(|tau| (tau, series.demand(tau)))
                    .collect();
                if !units.is_empty() {
                    deliveries.push(Delivery { day: s, units });
                }
                t = s;
            }
        }
    }
    deliveries.reverse();
    Ok(Schedule { deliveries })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn linear_series(demands: &[f64], rate: f64) -> DemandSeries {
        let t_len = demands.len();
        let holding = (0..t_len)
            .map(|s| (0..t_len).map(|t| if t >= s { rate * (t - s) as f64 } else { 0.0 }).collect())
            .collect();
        DemandSeries::new(demands.to_vec(), holding).unwrap()
    }

    #[test]
    fn single_delivery_when_batching_pays() {
        let series = linear_series(&[1.0, 1.0, 1.0], 1.0);
        let s = wagner_whitin(&series, 3.0).unwrap();
        assert_eq!(s.cost_at(&series, 3.0), 6.0);
        s.validate(&series, f64::INFINITY, true, 1e-9).unwrap();
    }

    #[test]
    fn free_deliveries_cost_nothing() {
        let series = linear_series(&[1.0, 2.0, 0.0, 1.0], 1.0);
        let s = wagner_whitin(&series, 0.0).unwrap();
        assert_eq!(s.cost_at(&series, 0.0), 0.0);
        assert_eq!(s.deliveries.len(), 3);
    }

    #[test]
    fn expensive_deliveries_collapse_to_day_one() {
        let series = linear_series(&[1.0, 2.0, 3.0], 0.5);
        let k = 100.0;
        let s = wagner_whitin(&series, k).unwrap();
        assert_eq!(s.deliveries.len(), 1);
        assert_eq!(s.deliveries[0].day, 0);
        assert_eq!(s.cost_at(&series, k), k + 0.5 * 2.0 + 1.0 * 3.0);
    }

    #[test]
    fn leading_zero_demand_days_are_skipped() {
        let series = linear_series(&[0.0, 0.0, 2.0], 1.0);
        let s = wagner_whitin(&series, 1.0).unwrap();
        assert_eq!(s.deliveries.len(), 1);
        assert_eq!(s.deliveries[0].day, 2);
        assert_eq!(s.cost_at(&series, 1.0), 1.0);
    }

    #[test]
    fn rejects_non_monotone_holding() {
        let holding = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let mut h = holding.clone();
        h[1][1] = 0.0;
        h[0][1] = 0.0;
        let ok = DemandSeries::new(vec![1.0, 1.0], h).unwrap();
        assert!(wagner_whitin(&ok, 1.0).is_ok());
        let bad = DemandSeries::new(vec![1.0, 1.0], vec![vec![0.0, 0.0], vec![0.0, 0.0]])
            .and_then(|_| DemandSeries::new(vec![1.0, 0.0, 1.0], vec![
                vec![0.0, 0.0, 0.5],
                vec![0.0, 0.0, 2.0],
                vec![0.0, 0.0, 0.0],
            ]))
            .unwrap();
        assert_eq!(
            wagner_whitin(&bad, 1.0),
            Err(LotSizingError::NonMonotoneHolding { early: 0, late: 1, due: 2 })
        );
    }

    #[test]
    fn just_in_time_splits_by_capacity() {
        let series = linear_series(&[5.0, 0.0, 2.0], 1.0);
        let s = series.just_in_time(2.0);
        assert_eq!(s.deliveries.len(), 4);
        assert_eq!(s.value_line(&series).holding, 0.0);
        s.validate(&series, 2.0, true, 1e-9).unwrap();
        assert!(s.validate(&series, 2.0, false, 1e-9).is_err());
    }

    #[test]
    fn series_validation() {
        assert!(DemandSeries::new(vec![0.0], vec![vec![0.0]]).is_err());
        assert!(DemandSeries::new(vec![1.0], vec![vec![0.5]]).is_err());
        assert!(DemandSeries::new(vec![1.0], vec![]).is_err());
    }
}
