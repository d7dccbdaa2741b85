//! Factor-revealing program laboratory: feasibility checks and objective
//! evaluation for the penalized program and its penalty-free relaxations,
//! the constructive chain between them, exact small-k maximization, and
//! extraction of program points from primal-dual traces.

mod chain;
mod extract;
mod solve;

pub use chain::{
    build_phat, random_feasible, run_chain, step1_z, step2_discretize, ChainOutcome, Phat, Step2,
};
pub use extract::extract_stars;
pub use solve::{solve_p, solve_phat, FrOptimum, SOLVE_PHAT_MAX_K, SOLVE_P_MAX_K};

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FrError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("sum of weighted distances is zero")]
    ZeroDenominator,
    #[error("k = {k} exceeds the solver limit {max}")]
    ScaleGuard { k: usize, max: usize },
    #[error("input is not feasible: {0}")]
    Infeasible(String),
    #[error("discretization scale overflows: {0}")]
    Overflow(String),
    #[error("{0}")]
    Other(String),
}

/// A point `(t, d, r, p, f)`; `r[j][i]` is meaningful for `j < i` only.
/// `z` is set after the ratio substitution, `m` after discretization.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrSolution {
    pub k: usize,
    pub t: Vec<f64>,
    pub d: Vec<f64>,
    pub p: Vec<f64>,
    pub r: Vec<Vec<f64>>,
    pub f: f64,
    pub z: Option<Vec<f64>>,
    pub m: Option<Vec<u64>>,
}

impl FrSolution {
    pub fn new(t: Vec<f64>, d: Vec<f64>, p: Vec<f64>, r: Vec<Vec<f64>>, f: f64) -> Self {
        Self { k: t.len(), t, d, p, r, f, z: None, m: None }
    }

    fn check_dims(&self) -> Result<(), FrError> {
        let k = self.k;
        let bad = |what: &str| Err(FrError::Dimension(what.to_string()));
        if self.t.len() != k || self.d.len() != k || self.p.len() != k {
            return bad("t, d and p must have length k");
        }
        if self.r.len() != k || self.r.iter().any(|row| row.len() != k) {
            return bad("r must be k x k");
        }
        if self.z.as_ref().is_some_and(|z| z.len() != k) {
            return bad("z must have length k");
        }
        if self.m.as_ref().is_some_and(|m| m.len() != k) {
            return bad("m must have length k");
        }
        Ok(())
    }

    /// Scales every length-like component by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut s = self.clone();
        s.t.iter_mut().chain(s.d.iter_mut()).chain(s.p.iter_mut()).for_each(|x| *x *= c);
        s.r.iter_mut().flatten().for_each(|x| *x *= c);
        s.f *= c;
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Violation {
    /// Opening budget for client `l` exceeds `f`.
    Opening { l: usize, lhs: f64, f: f64 },
    TMonotone { i: usize },
    RMonotone { j: usize, i: usize },
    Metric { j: usize, i: usize },
    RExceedsT { i: usize, l: usize },
    PBelowD { i: usize },
    Negative { name: String },
    ZRange { i: usize },
    ZGrid { i: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Opening { l, lhs, f } => write!(out, "opening budget at l={l}: {lhs} > f={f}"),
            Violation::TMonotone { i } => write!(out, "t[{i}] > t[{}]", i + 1),
            Violation::RMonotone { j, i } => write!(out, "r[{j}][{i}] < r[{j}][{}]", i + 1),
            Violation::Metric { j, i } => write!(out, "t[{i}] > r[{j}][{i}] + d[{i}] + d[{j}]"),
            Violation::RExceedsT { i, l } => write!(out, "r[{i}][{l}] > t[{i}]"),
            Violation::PBelowD { i } => write!(out, "p[{i}] < d[{i}]"),
            Violation::Negative { name } => write!(out, "{name} is negative"),
            Violation::ZRange { i } => write!(out, "z[{i}] outside [0, 1]"),
            Violation::ZGrid { i } => write!(out, "z[{i}] is not a multiple of 1/M"),
        }
    }
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

fn exceeds(lhs: f64, rhs: f64, tol: f64) -> bool {
    lhs > rhs + tol * (1.0 + rhs.abs().min(1e12))
}

/// Left-hand side of the opening constraint for client `l`, with per-term
/// weights and the per-term value function `term(x, i)` applied to
/// `x = r[i][l]` for `i < l` and `x = t[l]` for `i >= l`.
fn opening_lhs(s: &FrSolution, l: usize, term: impl Fn(f64, usize) -> f64) -> f64 {
    (0..s.k)
        .map(|i| if i < l { term(s.r[i][l], i) } else { term(s.t[l], i) })
        .sum()
}

/// Constraints shared by every program in the chain: ordering of `t`,
/// monotone `r`, the metric bound and nonnegativity.
fn structural(s: &FrSolution, tol: f64, with_r_vs_t: bool, out: &mut Vec<Violation>) {
    let k = s.k;
    for i in 0..k.saturating_sub(1) {
        if exceeds(s.t[i], s.t[i + 1], tol) {
            out.push(Violation::TMonotone { i });
        }
    }
    for j in 0..k {
        for i in (j + 1)..k.saturating_sub(1) {
            if exceeds(s.r[j][i + 1], s.r[j][i], tol) {
                out.push(Violation::RMonotone { j, i });
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            if exceeds(s.t[i], s.r[j][i] + s.d[i] + s.d[j], tol) {
                out.push(Violation::Metric { j, i });
            }
        }
    }
    if with_r_vs_t {
        for i in 0..k {
            for l in (i + 1)..k {
                if exceeds(s.r[i][l], s.t[i], tol) {
                    out.push(Violation::RExceedsT { i, l });
                }
            }
        }
    }
    let neg = |x: f64| x < -tol;
    for i in 0..k {
        if neg(s.t[i]) {
            out.push(Violation::Negative { name: format!("t[{i}]") });
        }
        if neg(s.d[i]) {
            out.push(Violation::Negative { name: format!("d[{i}]") });
        }
        for l in (i + 1)..k {
            if neg(s.r[i][l]) {
                out.push(Violation::Negative { name: format!("r[{i}][{l}]") });
            }
        }
    }
    if neg(s.f) {
        out.push(Violation::Negative { name: "f".into() });
    }
}

/// Violated constraints of the penalized program, the opening constraint
/// evaluated literally with its minima.
pub fn check_feasible_p(s: &FrSolution, tol: f64) -> Result<Vec<Violation>, FrError> {
    s.check_dims()?;
    let mut out = Vec::new();
    for l in 0..s.k {
        let lhs = opening_lhs(s, l, |x, i| pos(x.min(s.p[i]) - s.d[i]));
        if exceeds(lhs, s.f, tol) {
            out.push(Violation::Opening { l, lhs, f: s.f });
        }
    }
    structural(s, tol, true, &mut out);
    for i in 0..s.k {
        if s.p[i] < s.d[i] - tol * (1.0 + s.d[i]) {
            out.push(Violation::PBelowD { i });
        }
        if s.p[i] < -tol {
            out.push(Violation::Negative { name: format!("p[{i}]") });
        }
    }
    Ok(out)
}

fn z_of(s: &FrSolution) -> Result<&[f64], FrError> {
    s.z.as_deref().ok_or_else(|| FrError::Dimension("z is required".into()))
}

/// Violated constraints of the ratio-substituted program.
pub fn check_feasible_p1(s: &FrSolution, tol: f64) -> Result<Vec<Violation>, FrError> {
    s.check_dims()?;
    let z = z_of(s)?;
    let mut out = Vec::new();
    for l in 0..s.k {
        let lhs = opening_lhs(s, l, |x, i| z[i] * pos(x - s.d[i]));
        if exceeds(lhs, s.f, tol) {
            out.push(Violation::Opening { l, lhs, f: s.f });
        }
    }
    structural(s, tol, true, &mut out);
    for (i, &zi) in z.iter().enumerate() {
        if zi < -tol || zi > 1.0 + tol {
            out.push(Violation::ZRange { i });
        }
    }
    Ok(out)
}

/// The ratio-substituted program with `z` restricted to multiples of `1/M`.
pub fn check_feasible_p2(s: &FrSolution, scale: u64, tol: f64) -> Result<Vec<Violation>, FrError> {
    let mut out = check_feasible_p1(s, tol)?;
    for (i, &zi) in z_of(s)?.iter().enumerate() {
        let x = zi * scale as f64;
        if (x - x.round()).abs() > tol * (1.0 + x) {
            out.push(Violation::ZGrid { i });
        }
    }
    Ok(out)
}

/// The penalty-free program with integral client weights `m`.
pub fn check_feasible_phat(s: &FrSolution, m: &[u64], tol: f64) -> Result<Vec<Violation>, FrError> {
    s.check_dims()?;
    if m.len() != s.k {
        return Err(FrError::Dimension("m must have length k".into()));
    }
    let mut out = Vec::new();
    for l in 0..s.k {
        let lhs = opening_lhs(s, l, |x, i| m[i] as f64 * pos(x - s.d[i]));
        if exceeds(lhs, s.f, tol) {
            out.push(Violation::Opening { l, lhs, f: s.f });
        }
    }
    structural(s, tol, false, &mut out);
    Ok(out)
}

fn ratio(num: f64, den: f64) -> Result<f64, FrError> {
    if den <= 0.0 {
        Err(FrError::ZeroDenominator)
    } else {
        Ok(num / den)
    }
}

/// `(Σ min{t_i, p_i} − λ_f f) / Σ d_i`.
pub fn eval_p(s: &FrSolution, lambda_f: f64) -> Result<f64, FrError> {
    s.check_dims()?;
    let num: f64 = (0..s.k).map(|i| s.t[i].min(s.p[i])).sum::<f64>() - lambda_f * s.f;
    ratio(num, s.d.iter().sum())
}

/// `(Σ d_i + z_i (t_i − d_i) − λ_f f) / Σ d_i`; also the value in the
/// discretized program.
pub fn eval_p1(s: &FrSolution, lambda_f: f64) -> Result<f64, FrError> {
    s.check_dims()?;
    let z = z_of(s)?;
    let num: f64 = (0..s.k).map(|i| s.d[i] + z[i] * (s.t[i] - s.d[i])).sum::<f64>() - lambda_f * s.f;
    ratio(num, s.d.iter().sum())
}

/// `(Σ m_i t_i − λ_f f) / Σ m_i d_i`.
pub fn eval_phat(s: &FrSolution, m: &[u64], lambda_f: f64) -> Result<f64, FrError> {
    s.check_dims()?;
    if m.len() != s.k {
        return Err(FrError::Dimension("m must have length k".into()));
    }
    let num: f64 = (0..s.k).map(|i| m[i] as f64 * s.t[i]).sum::<f64>() - lambda_f * s.f;
    ratio(num, (0..s.k).map(|i| m[i] as f64 * s.d[i]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn one(t: f64, d: f64, p: f64, f: f64) -> FrSolution {
        FrSolution::new(vec![t], vec![d], vec![p], vec![vec![0.0]], f)
    }

    #[test]
    fn single_client_feasible() {
        assert!(check_feasible_p(&one(1.0, 1.0, 1.0, 0.0), 0.0).unwrap().is_empty());
    }

    #[test]
    fn single_client_opening_violation() {
        let v = check_feasible_p(&one(2.0, 1.0, 2.0, 0.5), 1e-9).unwrap();
        assert_eq!(v, vec![Violation::Opening { l: 0, lhs: 1.0, f: 0.5 }]);
    }

    #[test]
    fn r_above_t_is_reported() {
        let s = FrSolution::new(
            vec![1.0, 2.0],
            vec![1.0, 1.0],
            vec![f64::INFINITY; 2],
            vec![vec![0.0, 3.0], vec![0.0, 0.0]],
            10.0,
        );
        let v = check_feasible_p(&s, 1e-9).unwrap();
        assert!(v.contains(&Violation::RExceedsT { i: 0, l: 1 }));
    }

    #[test]
    fn dimension_mismatch() {
        let mut s = one(1.0, 1.0, 1.0, 0.0);
        s.d.push(1.0);
        assert!(matches!(check_feasible_p(&s, 0.0), Err(FrError::Dimension(_))));
    }

    #[test]
    fn objective_values() {
        assert_eq!(eval_p(&one(1.0, 1.0, 1.0, 0.0), 1.0).unwrap(), 1.0);
        assert_eq!(eval_p(&one(2.0, 1.0, 1.5, 1.0), 1.0).unwrap(), 0.5);
        assert_eq!(eval_p(&one(2.0, 0.0, 1.5, 1.0), 1.0), Err(FrError::ZeroDenominator));
    }

    #[test]
    fn infinite_penalty_uses_t() {
        assert_eq!(eval_p(&one(3.0, 1.0, f64::INFINITY, 2.0), 1.0).unwrap(), 1.0);
        assert!(check_feasible_p(&one(3.0, 1.0, f64::INFINITY, 2.0), 1e-9).unwrap().is_empty());
    }
}
