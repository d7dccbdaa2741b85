//! Problem instances: the facility location variants and the star inventory
//! routing problem, with validation, a JSON document format, an ORLIB reader
//! and a seeded random generator.

mod concave;
mod format;
mod generate;
mod metric;
mod orlib;
mod solution;

pub use concave::ConcaveFn;
pub use format::{parse_instance, serialize_instance};
pub use generate::{generate_random, Generated, GeneratorParams, Variant};
pub use metric::{validate_metric, MetricSpace, MetricViolation};
pub use orlib::{read_orlib, OrlibInstance};
pub use solution::{Assignment, CostBreakdown, FlSolution};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used wherever a caller does not supply one.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed document: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("document kind is `{found}` but `{expected}` was requested")]
    KindMismatch { expected: Kind, found: Kind },
    #[error("ORLIB input truncated: expected {expected} tokens, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("ORLIB input has {extra} trailing tokens beyond the declared sizes")]
    TrailingTokens { extra: usize },
    #[error("ORLIB token {index} (`{token}`) is not a number")]
    BadToken { index: usize, token: String },
}

impl InstanceError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        InstanceError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Flpm,
    Ncc,
    Sirpfl,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kind::Flpm => "flpm",
            Kind::Ncc => "ncc",
            Kind::Sirpfl => "sirpfl",
        })
    }
}

impl std::str::FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flpm" => Ok(Kind::Flpm),
            "ncc" => Ok(Kind::Ncc),
            "sirpfl" => Ok(Kind::Sirpfl),
            other => Err(format!("unknown instance kind `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Facility {
    pub id: u32,
    pub opening_cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlpmClient {
    pub id: u32,
    /// `f64::INFINITY` encodes a client that must be served.
    pub penalty: f64,
    pub multiplicity: f64,
}

/// Facility location with penalties and multiplicities.
///
/// `dist[j][i]` is the distance between client `j` and facility `i`.
/// Plain UFL is the special case `penalty = ∞, multiplicity = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlpmInstance {
    pub facilities: Vec<Facility>,
    pub clients: Vec<FlpmClient>,
    pub dist: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NccClient {
    pub id: u32,
    pub g: ConcaveFn,
}

/// Facility location where client `j` pays `g_j(distance)` to connect.
#[derive(Clone, Debug, PartialEq)]
pub struct NccInstance {
    pub facilities: Vec<Facility>,
    pub clients: Vec<NccClient>,
    pub dist: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SirpflClient {
    pub id: u32,
    /// `demands[t]` units due by day `t` (0-based).
    pub demands: Vec<f64>,
    /// `holding[s][t]` per-unit cost of delivering on day `s` for demand due
    /// on day `t`; only entries with `s <= t` are meaningful.
    pub holding: Vec<Vec<f64>>,
}

/// Star inventory routing with facility location.
#[derive(Clone, Debug, PartialEq)]
pub struct SirpflInstance {
    pub facilities: Vec<Facility>,
    pub clients: Vec<SirpflClient>,
    pub dist: Vec<Vec<f64>>,
    pub horizon: usize,
    /// Units per delivery; `f64::INFINITY` for the uncapacitated variant.
    pub capacity: f64,
    pub splittable: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Flpm(FlpmInstance),
    Ncc(NccInstance),
    Sirpfl(SirpflInstance),
}

impl Instance {
    pub fn kind(&self) -> Kind {
        match self {
            Instance::Flpm(_) => Kind::Flpm,
            Instance::Ncc(_) => Kind::Ncc,
            Instance::Sirpfl(_) => Kind::Sirpfl,
        }
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        match self {
            Instance::Flpm(i) => i.validate(),
            Instance::Ncc(i) => i.validate(),
            Instance::Sirpfl(i) => i.validate(),
        }
    }
}

fn validate_facilities(facilities: &[Facility]) -> Result<(), InstanceError> {
    let mut seen = std::collections::HashSet::new();
    for (i, fac) in facilities.iter().enumerate() {
        if !seen.insert(fac.id) {
            return Err(InstanceError::invalid(
                format!("facilities[{i}].id"),
                format!("duplicate facility id {}", fac.id),
            ));
        }
        if !(fac.opening_cost.is_finite() && fac.opening_cost >= 0.0) {
            return Err(InstanceError::invalid(
                format!("facilities[{i}].opening_cost"),
                format!("must be finite and >= 0, got {}", fac.opening_cost),
            ));
        }
    }
    Ok(())
}

fn validate_ids<I: Iterator<Item = u32>>(ids: I) -> Result<(), InstanceError> {
    let mut seen = std::collections::HashSet::new();
    for (j, id) in ids.enumerate() {
        if !seen.insert(id) {
            return Err(InstanceError::invalid(
                format!("clients[{j}].id"),
                format!("duplicate client id {id}"),
            ));
        }
    }
    Ok(())
}

fn validate_dist(dist: &[Vec<f64>], n_cli: usize, n_fac: usize) -> Result<(), InstanceError> {
    if dist.len() != n_cli {
        return Err(InstanceError::invalid(
            "dist",
            format!("expected {n_cli} rows (one per client), found {}", dist.len()),
        ));
    }
    for (j, row) in dist.iter().enumerate() {
        if row.len() != n_fac {
            return Err(InstanceError::invalid(
                format!("dist[{j}]"),
                format!("expected {n_fac} entries (one per facility), found {}", row.len()),
            ));
        }
        if let Some(i) = row.iter().position(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(InstanceError::invalid(
                format!("dist[{j}][{i}]"),
                format!("distance must be finite and >= 0, got {}", row[i]),
            ));
        }
    }
    Ok(())
}

impl FlpmInstance {
    pub fn validate(&self) -> Result<(), InstanceError> {
        validate_facilities(&self.facilities)?;
        validate_ids(self.clients.iter().map(|c| c.id))?;
        for (j, c) in self.clients.iter().enumerate() {
            if c.penalty.is_nan() || c.penalty <= 0.0 {
                return Err(InstanceError::invalid(
                    format!("clients[{j}].penalty"),
                    format!("must lie in (0, inf], got {}", c.penalty),
                ));
            }
            if !(c.multiplicity.is_finite() && c.multiplicity > 0.0) {
                return Err(InstanceError::invalid(
                    format!("clients[{j}].multiplicity"),
                    format!("must be finite and > 0, got {}", c.multiplicity),
                ));
            }
        }
        validate_dist(&self.dist, self.clients.len(), self.facilities.len())
    }

    pub fn n_facilities(&self) -> usize {
        self.facilities.len()
    }

    pub fn n_clients(&self) -> usize {
        self.clients.len()
    }

    /// Opening cost of `open` plus the cheapest connect-or-pay cost of every
    /// client given that set.
    pub fn cost_of(&self, open: &[usize]) -> f64 {
        let opening: f64 = open.iter().map(|&i| self.facilities[i].opening_cost).sum();
        let service: f64 = self
            .clients
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let nearest = open
                    .iter()
                    .map(|&i| self.dist[j][i])
                    .fold(f64::INFINITY, f64::min);
                c.multiplicity * nearest.min(c.penalty)
            })
            .sum();
        opening + service
    }
}

impl NccInstance {
    pub fn validate(&self) -> Result<(), InstanceError> {
        validate_facilities(&self.facilities)?;
        validate_ids(self.clients.iter().map(|c| c.id))?;
        validate_dist(&self.dist, self.clients.len(), self.facilities.len())
    }

    /// Cost of opening `open` (nonempty) and connecting every client to its
    /// cheapest open facility.
    pub fn cost_of(&self, open: &[usize]) -> f64 {
        assert!(!open.is_empty(), "NCC cost needs at least one open facility");
        let opening: f64 = open.iter().map(|&i| self.facilities[i].opening_cost).sum();
        let service: f64 = self
            .clients
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let nearest = open
                    .iter()
                    .map(|&i| self.dist[j][i])
                    .fold(f64::INFINITY, f64::min);
                c.g.eval(nearest)
            })
            .sum();
        opening + service
    }
}

impl SirpflInstance {
    pub fn validate(&self) -> Result<(), InstanceError> {
        validate_facilities(&self.facilities)?;
        validate_ids(self.clients.iter().map(|c| c.id))?;
        validate_dist(&self.dist, self.clients.len(), self.facilities.len())?;
        if self.horizon == 0 {
            return Err(InstanceError::invalid("T", "horizon must be a positive integer"));
        }
        if self.capacity.is_nan() || self.capacity <= 0.0 {
            return Err(InstanceError::invalid(
                "U",
                format!("capacity must be positive or inf, got {}", self.capacity),
            ));
        }
        let t_len = self.horizon;
        for (j, c) in self.clients.iter().enumerate() {
            if c.demands.len() != t_len {
                return Err(InstanceError::invalid(
                    format!("clients[{j}].demands"),
                    format!("expected {t_len} entries, found {}", c.demands.len()),
                ));
            }
            if let Some(t) = c.demands.iter().position(|u| !(u.is_finite() && *u >= 0.0)) {
                return Err(InstanceError::invalid(
                    format!("clients[{j}].demands[{t}]"),
                    "demand must be finite and >= 0",
                ));
            }
            if !c.demands.iter().any(|&u| u > 0.0) {
                return Err(InstanceError::invalid(
                    format!("clients[{j}].demands"),
                    "client needs at least one positive demand",
                ));
            }
            if c.holding.len() != t_len || c.holding.iter().any(|row| row.len() != t_len) {
                return Err(InstanceError::invalid(
                    format!("clients[{j}].holding"),
                    format!("expected a {t_len}x{t_len} table"),
                ));
            }
            for s in 0..t_len {
                for t in s..t_len {
                    let h = c.holding[s][t];
                    if !(h.is_finite() && h >= 0.0) {
                        return Err(InstanceError::invalid(
                            format!("clients[{j}].holding[{s}][{t}]"),
                            format!("holding cost must be finite and >= 0, got {h}"),
                        ));
                    }
                }
                if c.demands[s] > 0.0 && c.holding[s][s] != 0.0 {
                    return Err(InstanceError::invalid(
                        format!("clients[{j}].holding[{s}][{s}]"),
                        "same-day holding cost must be 0 at every demand point",
                    ));
                }
            }
            if self.capacity.is_finite() && !self.splittable {
                if let Some(t) = c.demands.iter().position(|&u| u > self.capacity) {
                    return Err(InstanceError::invalid(
                        format!("clients[{j}].demands[{t}]"),
                        "unsplittable demand exceeds the delivery capacity",
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_flpm() -> FlpmInstance {
        FlpmInstance {
            facilities: vec![Facility { id: 0, opening_cost: 2.0 }],
            clients: vec![
                FlpmClient { id: 0, penalty: f64::INFINITY, multiplicity: 1.0 },
                FlpmClient { id: 1, penalty: 0.5, multiplicity: 2.0 },
            ],
            dist: vec![vec![1.0], vec![1.0]],
        }
    }

    #[test]
    fn flpm_cost_uses_penalty_when_cheaper() {
        let inst = tiny_flpm();
        inst.validate().unwrap();
        assert_eq!(inst.cost_of(&[0]), 2.0 + 1.0 + 2.0 * 0.5);
        assert_eq!(inst.cost_of(&[]), f64::INFINITY);
    }

    #[test]
    fn rejects_zero_multiplicity_and_duplicate_ids() {
        let mut inst = tiny_flpm();
        inst.clients[1].multiplicity = 0.0;
        assert!(matches!(inst.validate(), Err(InstanceError::Invalid { field, .. }) if field == "clients[1].multiplicity"));
        let mut inst = tiny_flpm();
        inst.clients[1].id = 0;
        assert!(inst.validate().is_err());
    }

    #[test]
    fn sirpfl_requires_free_same_day_holding() {
        let inst = SirpflInstance {
            facilities: vec![Facility { id: 0, opening_cost: 1.0 }],
            clients: vec![SirpflClient {
                id: 0,
                demands: vec![1.0, 0.0],
                holding: vec![vec![0.5, 1.0], vec![0.0, 0.0]],
            }],
            dist: vec![vec![1.0]],
            horizon: 2,
            capacity: f64::INFINITY,
            splittable: true,
        };
        let err = inst.validate().unwrap_err();
        assert!(err.to_string().contains("holding[0][0]"));
    }
}
