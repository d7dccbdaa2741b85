use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    ConcaveFn, Facility, FlpmClient, FlpmInstance, Instance, InstanceError, MetricSpace,
    NccClient, NccInstance, SirpflClient, SirpflInstance,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Every penalty infinite, unit multiplicities.
    Ufl,
    /// Mixed finite and infinite penalties, unit multiplicities.
    Flp,
    /// Mixed penalties and fractional multiplicities.
    Flpm,
    Ncc,
    SirpflUncapacitated,
    SirpflSplittable,
    SirpflUnsplittable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorParams {
    pub n_facilities: usize,
    pub n_clients: usize,
    pub variant: Variant,
    /// Time horizon for the inventory routing variants.
    pub horizon: usize,
    /// Delivery capacity for the capacitated variants (default 3).
    pub capacity: Option<f64>,
    pub seed: u64,
}

impl GeneratorParams {
    pub fn new(n_facilities: usize, n_clients: usize, variant: Variant, seed: u64) -> Self {
        Self {
            n_facilities,
            n_clients,
            variant,
            horizon: 3,
            capacity: None,
            seed,
        }
    }
}

/// A generated instance together with the full metric over
/// facilities (indices `0..n_fac`) followed by clients.
#[derive(Clone, Debug)]
pub struct Generated {
    pub instance: Instance,
    pub metric: MetricSpace,
}

/// Draws a random instance, deterministic in `params.seed`.
///
/// Facilities and clients are uniform points in the unit square with
/// Euclidean distances. Ranges:
/// - opening cost: `U[0.1, 1.5]` (FL variants), `U[0.5, 3.0]` (inventory routing)
/// - penalty (FLP/FLPM): `inf` with probability 0.4, otherwise `U[0.05, 1.0]`
/// - multiplicity (FLPM): `U[0.5, 3.0]`
/// - NCC `g`: 1 to 4 linear pieces from the origin, piece widths `U[0.1, 0.6]`,
///   slopes drawn from `U[0, 2]` and sorted decreasingly
/// - demands: integers `0..=3` per day with at least one positive day, capped
///   at the capacity when unsplittable
/// - holding: `h_{s,t} = c (t - s)` with `c ~ U[0.05, 0.5]` per client
pub fn generate_random(params: &GeneratorParams) -> Result<Generated, InstanceError> {
    if params.n_facilities == 0 {
        return Err(InstanceError::invalid("n_facilities", "must be positive"));
    }
    if params.n_clients == 0 {
        return Err(InstanceError::invalid("n_clients", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n_fac = params.n_facilities;
    let n_cli = params.n_clients;
    let points: Vec<(f64, f64)> = (0..n_fac + n_cli)
        .map(|_| (rng.gen::<f64>(), rng.gen::<f64>()))
        .collect();
    let metric = MetricSpace::euclidean(&points);
    let dist: Vec<Vec<f64>> = (0..n_cli)
        .map(|j| (0..n_fac).map(|i| metric.dist[n_fac + j][i]).collect())
        .collect();
    let sirpfl = matches!(
        params.variant,
        Variant::SirpflUncapacitated | Variant::SirpflSplittable | Variant::SirpflUnsplittable
    );
    let facilities: Vec<Facility> = (0..n_fac)
        .map(|i| Facility {
            id: i as u32,
            opening_cost: if sirpfl {
                rng.gen_range(0.5..3.0)
            } else {
                rng.gen_range(0.1..1.5)
            },
        })
        .collect();

    let instance = match params.variant {
        Variant::Ufl | Variant::Flp | Variant::Flpm => {
            let clients = (0..n_cli)
                .map(|j| {
                    let penalty = if params.variant == Variant::Ufl || rng.gen_bool(0.4) {
                        f64::INFINITY
                    } else {
                        rng.gen_range(0.05..1.0)
                    };
                    let multiplicity = if params.variant == Variant::Flpm {
                        rng.gen_range(0.5..3.0)
                    } else {
                        1.0
                    };
                    FlpmClient {
                        id: j as u32,
                        penalty,
                        multiplicity,
                    }
                })
                .collect();
            Instance::Flpm(FlpmInstance {
                facilities,
                clients,
                dist,
            })
        }
        Variant::Ncc => {
            let clients = (0..n_cli)
                .map(|j| {
                    Ok(NccClient {
                        id: j as u32,
                        g: random_concave(&mut rng)?,
                    })
                })
                .collect::<Result<Vec<_>, InstanceError>>()?;
            Instance::Ncc(NccInstance {
                facilities,
                clients,
                dist,
            })
        }
        Variant::SirpflUncapacitated | Variant::SirpflSplittable | Variant::SirpflUnsplittable => {
            if params.horizon == 0 {
                return Err(InstanceError::invalid("T", "horizon must be positive"));
            }
            let capacity = match params.variant {
                Variant::SirpflUncapacitated => f64::INFINITY,
                _ => params.capacity.unwrap_or(3.0),
            };
            if capacity.is_nan() || capacity <= 0.0 {
                return Err(InstanceError::invalid("U", "capacity must be positive"));
            }
            let splittable = params.variant != Variant::SirpflUnsplittable;
            let max_demand = if splittable { 3 } else { capacity.min(3.0).floor() as u32 };
            if max_demand == 0 {
                return Err(InstanceError::invalid(
                    "U",
                    "unsplittable capacity below one unit leaves no feasible demand",
                ));
            }
            let t_len = params.horizon;
            let clients = (0..n_cli)
                .map(|j| {
                    let mut demands: Vec<f64> = (0..t_len)
                        .map(|_| rng.gen_range(0..=max_demand) as f64)
                        .collect();
                    if demands.iter().all(|&u| u == 0.0) {
                        let t = rng.gen_range(0..t_len);
                        demands[t] = rng.gen_range(1..=max_demand) as f64;
                    }
                    let rate = rng.gen_range(0.05..0.5);
                    let holding = (0..t_len)
                        .map(|s| {
                            (0..t_len)
                                .map(|t| if t >= s { rate * (t - s) as f64 } else { 0.0 })
                                .collect()
                        })
                        .collect();
                    SirpflClient {
                        id: j as u32,
                        demands,
                        holding,
                    }
                })
                .collect();
            Instance::Sirpfl(SirpflInstance {
                facilities,
                clients,
                dist,
                horizon: t_len,
                capacity,
                splittable,
            })
        }
    };
    instance.validate()?;
    Ok(Generated { instance, metric })
}

fn random_concave(rng: &mut ChaCha8Rng) -> Result<ConcaveFn, InstanceError> {
    let pieces = rng.gen_range(1..=4);
    let mut slopes: Vec<f64> = (0..pieces).map(|_| rng.gen_range(0.0..2.0)).collect();
    slopes.sort_by(|a, b| b.total_cmp(a));
    let mut points = vec![(0.0, 0.0)];
    let (mut x, mut y) = (0.0, 0.0);
    for slope in slopes {
        let width = rng.gen_range(0.1..0.6);
        x += width;
        y += slope * width;
        points.push((x, y));
    }
    ConcaveFn::new(points)
}
