use std::collections::{BTreeMap, HashMap};

use super::{wagner_whitin, Delivery, DemandSeries, LotSizingError, Schedule};
use crate::lp::{simplex_solve, LinearProgram, LpOutcome, RowSense, Sense};

pub const IAP_MAX_HORIZON: usize = 10;
pub const IAP_MAX_DEMAND: f64 = 50.0;

const EPS: f64 = 1e-9;

/// Exact inventory access problem at desk scale: per-delivery cost `k`,
/// per-delivery capacity `capacity` (`INFINITY` for none).
pub fn iap_exact(
    series: &DemandSeries,
    k: f64,
    capacity: f64,
    splittable: bool,
) -> Result<Schedule, LotSizingError> {
    if series.horizon() > IAP_MAX_HORIZON {
        return Err(LotSizingError::ScaleGuard(format!(
            "horizon {} > {IAP_MAX_HORIZON}",
            series.horizon()
        )));
    }
    if series.total_demand() > IAP_MAX_DEMAND {
        return Err(LotSizingError::ScaleGuard(format!(
            "total demand {} > {IAP_MAX_DEMAND}",
            series.total_demand()
        )));
    }
    if !(capacity > 0.0) {
        return Err(LotSizingError::InvalidSeries("capacity must be positive".into()));
    }
    if capacity.is_infinite() {
        return Ok(uncapacitated(series, k));
    }
    if splittable {
        splittable_exact(series, k, capacity)
    } else {
        if let Some(day) = series.demand_days().find(|&t| series.demand(t) > capacity) {
            return Err(LotSizingError::Infeasible { day });
        }
        Ok(unsplittable_exact(series, k, capacity))
    }
}

/// Without capacity every delivery day serves each later demand from the
/// cheapest chosen day; enumerate the delivery-day subsets.
fn uncapacitated(series: &DemandSeries, k: f64) -> Schedule {
    if series.monotonicity_violation().is_none() {
        if let Ok(s) = wagner_whitin(series, k) {
            return s;
        }
    }
    let t_len = series.horizon();
    let mut best: Option<(f64, u32)> = None;
    for mask in 1u32..(1 << t_len) {
        if let Some(c) = subset_cost(series, k, mask) {
            if best.is_none_or(|(b, _)| c < b) {
                best = Some((c, mask));
            }
        }
    }
    let (_, mask) = best.expect("delivering on every day is feasible");
    let mut by_day: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
    for t in series.demand_days() {
        let s = cheapest_day(series, mask, t).expect("feasible subset");
        by_day.entry(s).or_default().insert(t, series.demand(t));
    }
    Schedule {
        deliveries: by_day.into_iter().map(|(day, units)| Delivery { day, units }).collect(),
    }
}

fn cheapest_day(series: &DemandSeries, mask: u32, t: usize) -> Option<usize> {
    (0..=t)
        .filter(|&s| mask & (1 << s) != 0)
        .min_by(|&a, &b| series.holding(a, t).total_cmp(&series.holding(b, t)).then(b.cmp(&a)))
}

fn subset_cost(series: &DemandSeries, k: f64, mask: u32) -> Option<f64> {
    let mut cost = 0.0;
    let mut used = 0u32;
    for t in series.demand_days() {
        let s = cheapest_day(series, mask, t)?;
        used |= 1 << s;
        cost += series.demand(t) * series.holding(s, t);
    }
    Some(cost + k * used.count_ones() as f64)
}

fn ceil_div(a: f64, b: f64) -> usize {
    ((a / b) - EPS).ceil().max(0.0) as usize
}

/// Enumerates delivery counts per day, then routes units by a transportation
/// LP; keeps the cheapest.
fn splittable_exact(series: &DemandSeries, k: f64, capacity: f64) -> Result<Schedule, LotSizingError> {
    let t_len = series.horizon();
    let days: Vec<usize> = series.demand_days().collect();
    let suffix: Vec<f64> = (0..t_len)
        .map(|s| (s..t_len).map(|t| series.demand(t)).sum())
        .collect();
    let max_total = ceil_div(series.total_demand(), capacity) + t_len;
    let cap_per_day: Vec<usize> = suffix.iter().map(|&r| ceil_div(r, capacity)).collect();

    let mut best: Option<(f64, Vec<usize>, Vec<Vec<f64>>)> = None;
    let mut counts = vec![0usize; t_len];
    enumerate_counts(
        0,
        0,
        &mut counts,
        &cap_per_day,
        max_total,
        series,
        capacity,
        &mut |counts: &[usize]| -> Result<(), LotSizingError> {
            let fixed = k * counts.iter().sum::<usize>() as f64;
            if let Some((b, _, _)) = &best {
                if fixed >= *b - EPS * (1.0 + b.abs()) {
                    return Ok(());
                }
            }
            if let Some((h, flows)) = route(series, &days, counts, capacity)? {
                let total = fixed + h;
                if best.as_ref().is_none_or(|(b, _, _)| total < *b - EPS * (1.0 + b.abs())) {
                    best = Some((total, counts.to_vec(), flows));
                }
            }
            Ok(())
        },
    )?;
    let (_, counts, flows) = best.expect("just-in-time counts are feasible");
    Ok(split_flows(series, &days, &counts, &flows, capacity))
}

#[allow(clippy::too_many_arguments)]
fn enumerate_counts(
    s: usize,
    used: usize,
    counts: &mut Vec<usize>,
    cap_per_day: &[usize],
    max_total: usize,
    series: &DemandSeries,
    capacity: f64,
    visit: &mut dyn FnMut(&[usize]) -> Result<(), LotSizingError>,
) -> Result<(), LotSizingError> {
    let t_len = counts.len();
    if s == t_len {
        return visit(counts);
    }
    // Units due by day s must fit into deliveries on days 0..=s.
    let due: f64 = (0..=s).map(|t| series.demand(t)).sum();
    let prior: usize = counts[..s].iter().sum();
    for n in 0..=cap_per_day[s].min(max_total - used) {
        if (prior + n) as f64 * capacity + EPS < due {
            continue;
        }
        counts[s] = n;
        enumerate_counts(s + 1, used + n, counts, cap_per_day, max_total, series, capacity, visit)?;
    }
    counts[s] = 0;
    Ok(())
}

/// Min-cost routing of demand to delivery days given per-day capacity
/// `counts[s] * capacity`. Returns the holding cost and flows `[s][idx]`.
fn route(
    series: &DemandSeries,
    days: &[usize],
    counts: &[usize],
    capacity: f64,
) -> Result<Option<(f64, Vec<Vec<f64>>)>, LotSizingError> {
    let t_len = series.horizon();
    let mut vars: Vec<(usize, usize)> = Vec::new();
    for s in 0..t_len {
        if counts[s] == 0 {
            continue;
        }
        for (idx, &t) in days.iter().enumerate() {
            if t >= s {
                vars.push((s, idx));
            }
        }
    }
    let objective = vars.iter().map(|&(s, idx)| series.holding(s, days[idx])).collect();
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for (idx, &t) in days.iter().enumerate() {
        let terms: Vec<(usize, f64)> = vars
            .iter()
            .enumerate()
            .filter(|(_, &(_, q))| q == idx)
            .map(|(v, _)| (v, 1.0))
            .collect();
        lp.add_sparse(&terms, RowSense::Eq, series.demand(t));
    }
    for s in 0..t_len {
        if counts[s] == 0 {
            continue;
        }
        let terms: Vec<(usize, f64)> = vars
            .iter()
            .enumerate()
            .filter(|(_, &(d, _))| d == s)
            .map(|(v, _)| (v, 1.0))
            .collect();
        lp.add_sparse(&terms, RowSense::Le, counts[s] as f64 * capacity);
    }
    match simplex_solve(&lp)? {
        LpOutcome::Optimal(sol) => {
            let mut flows = vec![vec![0.0; days.len()]; t_len];
            for (v, &(s, idx)) in vars.iter().enumerate() {
                flows[s][idx] = sol.x[v].max(0.0);
            }
            Ok(Some((sol.value, flows)))
        }
        _ => Ok(None),
    }
}

/// Packs each day's routed units into deliveries of at most `capacity`.
fn split_flows(
    series: &DemandSeries,
    days: &[usize],
    counts: &[usize],
    flows: &[Vec<f64>],
    capacity: f64,
) -> Schedule {
    let mut deliveries = Vec::new();
    for s in 0..series.horizon() {
        if counts[s] == 0 {
            continue;
        }
        let mut current = Delivery { day: s, units: BTreeMap::new() };
        let mut room = capacity;
        for (idx, &t) in days.iter().enumerate() {
            let mut q = flows[s][idx];
            while q > EPS {
                if room <= EPS {
                    deliveries.push(std::mem::replace(
                        &mut current,
                        Delivery { day: s, units: BTreeMap::new() },
                    ));
                    room = capacity;
                }
                let take = q.min(room);
                *current.units.entry(t).or_insert(0.0) += take;
                q -= take;
                room -= take;
            }
        }
        if !current.units.is_empty() {
            deliveries.push(current);
        }
    }
    Schedule { deliveries }
}

/// Enumerates the delivery day of every demand point and packs each day's
/// demands into the fewest deliveries.
fn unsplittable_exact(series: &DemandSeries, k: f64, capacity: f64) -> Schedule {
    let days: Vec<usize> = series.demand_days().collect();
    let mut packer = BinPacker::new(capacity);
    let mut choice = vec![0usize; days.len()];
    let mut best: Option<(f64, Vec<usize>)> = None;
    assign_days(series, &days, 0, 0.0, &mut choice, k, &mut packer, &mut best);
    let (_, choice) = best.expect("just-in-time assignment is feasible");
    let mut deliveries = Vec::new();
    for s in 0..series.horizon() {
        let items: Vec<usize> = (0..days.len()).filter(|&q| choice[q] == s).collect();
        if items.is_empty() {
            continue;
        }
        let sizes: Vec<f64> = items.iter().map(|&q| series.demand(days[q])).collect();
        for bin in packer.pack(&sizes).1 {
            let units = bin.into_iter().map(|b| (days[items[b]], sizes[b])).collect();
            deliveries.push(Delivery { day: s, units });
        }
    }
    Schedule { deliveries }
}

#[allow(clippy::too_many_arguments)]
fn assign_days(
    series: &DemandSeries,
    days: &[usize],
    q: usize,
    holding: f64,
    choice: &mut Vec<usize>,
    k: f64,
    packer: &mut BinPacker,
    best: &mut Option<(f64, Vec<usize>)>,
) {
    if best.as_ref().is_some_and(|(b, _)| holding >= *b) {
        return;
    }
    if q == days.len() {
        let mut cost = holding;
        for s in 0..series.horizon() {
            let sizes: Vec<f64> = (0..days.len())
                .filter(|&x| choice[x] == s)
                .map(|x| series.demand(days[x]))
                .collect();
            if !sizes.is_empty() {
                cost += k * packer.count(&sizes) as f64;
            }
        }
        if best.as_ref().is_none_or(|(b, _)| cost < *b - EPS * (1.0 + b.abs())) {
            *best = Some((cost, choice.clone()));
        }
        return;
    }
    for s in 0..=days[q] {
        choice[q] = s;
        let h = holding + series.demand(days[q]) * series.holding(s, days[q]);
        assign_days(series, days, q + 1, h, choice, k, packer, best);
    }
}

/// Exact bin packing by branch and bound, seeded with first-fit decreasing.
struct BinPacker {
    capacity: f64,
    memo: HashMap<Vec<u64>, usize>,
}

impl BinPacker {
    fn new(capacity: f64) -> Self {
        Self { capacity, memo: HashMap::new() }
    }

    fn count(&mut self, sizes: &[f64]) -> usize {
        let mut key: Vec<u64> = sizes.iter().map(|x| x.to_bits()).collect();
        key.sort_unstable();
        if let Some(&n) = self.memo.get(&key) {
            return n;
        }
        let n = self.pack(sizes).0;
        self.memo.insert(key, n);
        n
    }

    /// Minimum bin count and the bins as indices into `sizes`.
    fn pack(&self, sizes: &[f64]) -> (usize, Vec<Vec<usize>>) {
        let mut order: Vec<usize> = (0..sizes.len()).collect();
        order.sort_by(|&a, &b| sizes[b].total_cmp(&sizes[a]).then(a.cmp(&b)));
        let fits = |load: f64, x: f64| load + x <= self.capacity + EPS;

        let mut ffd: Vec<(f64, Vec<usize>)> = Vec::new();
        for &it in &order {
            match ffd.iter_mut().find(|(load, _)| fits(*load, sizes[it])) {
                Some(bin) => {
                    bin.0 += sizes[it];
                    bin.1.push(it);
                }
                None => ffd.push((sizes[it], vec![it])),
            }
        }
        let lower = ceil_div(sizes.iter().sum(), self.capacity).max(1);
        if ffd.len() <= lower {
            return (ffd.len(), ffd.into_iter().map(|(_, b)| b).collect());
        }
        let mut best = ffd.into_iter().map(|(_, b)| b).collect::<Vec<_>>();
        let mut bins: Vec<(f64, Vec<usize>)> = Vec::new();
        self.branch(sizes, &order, 0, &mut bins, &mut best, lower);
        (best.len(), best)
    }

    fn branch(
        &self,
        sizes: &[f64],
        order: &[usize],
        pos: usize,
        bins: &mut Vec<(f64, Vec<usize>)>,
        best: &mut Vec<Vec<usize>>,
        lower: usize,
    ) -> bool {
        if best.len() <= lower {
            return true;
        }
        if pos == order.len() {
            if bins.len() < best.len() {
                *best = bins.iter().map(|(_, b)| b.clone()).collect();
            }
            return best.len() <= lower;
        }
        let it = order[pos];
        let x = sizes[it];
        for b in 0..bins.len() {
            if bins[b].0 + x <= self.capacity + EPS {
                // Bins with equal load are interchangeable.
                if bins[..b].iter().any(|(l, _)| *l == bins[b].0) {
                    continue;
                }
                bins[b].0 += x;
                bins[b].1.push(it);
                let done = self.branch(sizes, order, pos + 1, bins, best, lower);
                bins[b].1.pop();
                bins[b].0 -= x;
                if done {
                    return true;
                }
            }
        }
        if bins.len() + 1 < best.len() {
            bins.push((x, vec![it]));
            let done = self.branch(sizes, order, pos + 1, bins, best, lower);
            bins.pop();
            if done {
                return true;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lotsizing::tests::linear_series;

    #[test]
    fn unit_capacity_forces_one_unit_per_delivery() {
        let series = linear_series(&[1.0, 1.0], 1.0);
        let s = iap_exact(&series, 2.0, 1.0, true).unwrap();
        assert!((s.cost_at(&series, 2.0) - 4.0).abs() < 1e-9);
        s.validate(&series, 1.0, true, 1e-9).unwrap();
    }

    #[test]
    fn unsplittable_pair_delivers_daily() {
        let series = linear_series(&[2.0, 2.0], 1.0);
        let s = iap_exact(&series, 5.0, 2.0, false).unwrap();
        assert!((s.cost_at(&series, 5.0) - 10.0).abs() < 1e-9);
        s.validate(&series, 2.0, false, 1e-9).unwrap();
    }

    #[test]
    fn splittable_batches_up_to_capacity() {
        let series = linear_series(&[1.0, 1.0, 1.0], 0.1);
        let s = iap_exact(&series, 5.0, 2.0, true).unwrap();
        // Day 0 carries days 0 and 1; day 2 gets its own delivery.
        assert!((s.cost_at(&series, 5.0) - 10.1).abs() < 1e-9);
        s.validate(&series, 2.0, true, 1e-9).unwrap();
    }

    #[test]
    fn splittable_can_beat_unsplittable() {
        let series = linear_series(&[2.0, 2.0, 2.0], 0.1);
        let sp = iap_exact(&series, 10.0, 3.0, true).unwrap().cost_at(&series, 10.0);
        let un = iap_exact(&series, 10.0, 3.0, false).unwrap().cost_at(&series, 10.0);
        assert!(sp < un - 1e-9);
    }

    #[test]
    fn uncapacitated_matches_dynamic_program() {
        let series = linear_series(&[1.0, 0.0, 2.0, 1.0], 0.7);
        for k in [0.0, 0.5, 1.0, 3.0, 10.0] {
            let a = iap_exact(&series, k, f64::INFINITY, true).unwrap().cost_at(&series, k);
            let b = wagner_whitin(&series, k).unwrap().cost_at(&series, k);
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_oversized_unsplittable_demand() {
        let series = linear_series(&[3.0], 1.0);
        assert_eq!(iap_exact(&series, 1.0, 2.0, false), Err(LotSizingError::Infeasible { day: 0 }));
    }

    #[test]
    fn scale_guard() {
        let series = linear_series(&[1.0; 11], 1.0);
        assert!(matches!(iap_exact(&series, 1.0, 2.0, true), Err(LotSizingError::ScaleGuard(_))));
    }

    #[test]
    fn bin_packing_beats_first_fit_decreasing() {
        // First-fit decreasing needs three bins here.
        let p = BinPacker::new(1.0);
        assert_eq!(p.pack(&[0.5, 0.35, 0.35, 0.3, 0.25, 0.25]).0, 2);
        let q = BinPacker::new(1.0);
        assert_eq!(q.pack(&[0.6, 0.6, 0.4, 0.4]).0, 2);
    }
}
