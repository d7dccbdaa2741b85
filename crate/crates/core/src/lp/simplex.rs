//! Dense two-phase tableau simplex with Bland's anti-cycling rule.

use serde::Serialize;
use thiserror::Error;

const PIVOT_EPS: f64 = 1e-9;
const FEAS_EPS: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// `sense cᵀx` subject to row constraints and `lower <= x <= upper`.
///
/// Bounds default to `[0, ∞)`; either side may be infinite.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, sense: RowSense, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { coeffs, sense, rhs });
        self
    }

    /// Adds a row given as sparse `(variable, coefficient)` pairs.
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], sense: RowSense, rhs: f64) -> &mut Self {
        let mut coeffs = vec![0.0; self.n_vars()];
        for &(v, c) in terms {
            coeffs[v] += c;
        }
        self.add(coeffs, sense, rhs)
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.n_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Dimension(format!(
                "{n} objective coefficients but {} lower / {} upper bounds",
                self.lower.len(),
                self.upper.len()
            )));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite("objective".into()));
        }
        for (r, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(LpError::Dimension(format!(
                    "row {r} has {} coefficients, expected {n}",
                    row.coeffs.len()
                )));
            }
            if row.coeffs.iter().any(|c| !c.is_finite()) || !row.rhs.is_finite() {
                return Err(LpError::NonFinite(format!("row {r}")));
            }
        }
        for v in 0..n {
            let (lo, hi) = (self.lower[v], self.upper[v]);
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(LpError::Bounds { var: v, lower: lo, upper: hi });
            }
        }
        Ok(())
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.constraints {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            let v = match row.sense {
                RowSense::Le => lhs - row.rhs,
                RowSense::Ge => row.rhs - lhs,
                RowSense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (v, &xv) in x.iter().enumerate() {
            worst = worst.max(self.lower[v] - xv).max(xv - self.upper[v]);
        }
        worst
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("inconsistent dimensions: {0}")]
    Dimension(String),
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
    #[error("variable {var} has invalid bounds [{lower}, {upper}]")]
    Bounds { var: usize, lower: f64, upper: f64 },
}

/// How an original variable is expressed through nonnegative columns.
#[derive(Clone, Copy)]
enum Column {
    /// `x = offset + y`
    Shifted { col: usize, offset: f64 },
    /// `x = offset - y`
    Mirrored { col: usize, offset: f64 },
    /// `x = y⁺ - y⁻`
    Free { pos: usize, neg: usize },
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c];
            if factor != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost · y` over the columns flagged in `allowed`.
    /// Returns `false` if the objective is unbounded below.
    fn minimize(&mut self, cost: &[f64], allowed: &[bool]) -> bool {
        loop {
            let entering = (0..self.width).find(|&c| {
                if !allowed[c] || self.basis.contains(&c) {
                    return false;
                }
                let reduced = cost[c]
                    - self
                        .basis
                        .iter()
                        .zip(&self.rows)
                        .map(|(&b, row)| cost[b] * row[c])
                        .sum::<f64>();
                reduced < -PIVOT_EPS
            });
            let Some(c) = entering else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - PIVOT_EPS
                                || (ratio <= lratio + PIVOT_EPS && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            self.pivot(r, c);
        }
    }
}

/// Solves `lp` to optimality, or reports infeasibility or unboundedness.
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    lp.check()?;
    let n = lp.n_vars();

    // Rewrite every variable through nonnegative columns.
    let mut columns = Vec::with_capacity(n);
    let mut n_struct = 0;
    let mut upper_rows: Vec<(usize, f64)> = Vec::new();
    for v in 0..n {
        let (lo, hi) = (lp.lower[v], lp.upper[v]);
        if lo.is_finite() {
            columns.push(Column::Shifted { col: n_struct, offset: lo });
            if hi.is_finite() {
                upper_rows.push((n_struct, hi - lo));
            }
            n_struct += 1;
        } else if hi.is_finite() {
            columns.push(Column::Mirrored { col: n_struct, offset: hi });
            n_struct += 1;
        } else {
            columns.push(Column::Free { pos: n_struct, neg: n_struct + 1 });
            n_struct += 2;
        }
    }

    // Rows over the structural columns, rhs shifted by variable offsets.
    let mut rows: Vec<(Vec<f64>, RowSense, f64)> = Vec::new();
    for con in &lp.constraints {
        let mut coeffs = vec![0.0; n_struct];
        let mut rhs = con.rhs;
        for (v, &a) in con.coeffs.iter().enumerate() {
            match columns[v] {
                Column::Shifted { col, offset } => {
                    coeffs[col] += a;
                    rhs -= a * offset;
                }
                Column::Mirrored { col, offset } => {
                    coeffs[col] -= a;
                    rhs -= a * offset;
                }
                Column::Free { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
            }
        }
        rows.push((coeffs, con.sense, rhs));
    }
    for &(col, width) in &upper_rows {
        let mut coeffs = vec![0.0; n_struct];
        coeffs[col] = 1.0;
        rows.push((coeffs, RowSense::Le, width));
    }
    for row in rows.iter_mut() {
        if row.2 < 0.0 {
            for a in row.0.iter_mut() {
                *a = -*a;
            }
            row.2 = -row.2;
            row.1 = match row.1 {
                RowSense::Le => RowSense::Ge,
                RowSense::Ge => RowSense::Le,
                RowSense::Eq => RowSense::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != RowSense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != RowSense::Le).count();
    let width = n_struct + n_slack + n_art;
    let art_start = n_struct + n_slack;
    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        width,
    };
    let (mut next_slack, mut next_art) = (n_struct, art_start);
    for (coeffs, sense, rhs) in rows {
        let mut row = vec![0.0; width + 1];
        row[..n_struct].copy_from_slice(&coeffs);
        row[width] = rhs;
        match sense {
            RowSense::Le => {
                row[next_slack] = 1.0;
                tab.basis.push(next_slack);
                next_slack += 1;
            }
            RowSense::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
                row[next_art] = 1.0;
                tab.basis.push(next_art);
                next_art += 1;
            }
            RowSense::Eq => {
                row[next_art] = 1.0;
                tab.basis.push(next_art);
                next_art += 1;
            }
        }
        tab.rows.push(row);
    }

    // Phase 1: drive the artificial columns to zero.
    if n_art > 0 {
        let mut cost = vec![0.0; width];
        for c in cost.iter_mut().skip(art_start) {
            *c = 1.0;
        }
        let allowed = vec![true; width];
        tab.minimize(&cost, &allowed);
        let infeasibility: f64 = (0..m)
            .filter(|&r| tab.basis[r] >= art_start)
            .map(|r| tab.rhs(r))
            .sum();
        let scale = 1.0 + tab.rows.iter().map(|r| r[width].abs()).fold(0.0, f64::max);
        if infeasibility > FEAS_EPS * scale {
            return Ok(LpOutcome::Infeasible);
        }
        for r in 0..m {
            if tab.basis[r] >= art_start {
                if let Some(c) = (0..art_start).find(|&c| tab.rows[r][c].abs() > PIVOT_EPS) {
                    tab.pivot(r, c);
                }
            }
        }
    }

    // Phase 2 over the structural and slack columns.
    let flip = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut cost = vec![0.0; width];
    for (v, &c) in lp.objective.iter().enumerate() {
        match columns[v] {
            Column::Shifted { col, .. } => cost[col] += flip * c,
            Column::Mirrored { col, .. } => cost[col] -= flip * c,
            Column::Free { pos, neg } => {
                cost[pos] += flip * c;
                cost[neg] -= flip * c;
            }
        }
    }
    let allowed: Vec<bool> = (0..width).map(|c| c < art_start).collect();
    if !tab.minimize(&cost, &allowed) {
        return Ok(LpOutcome::Unbounded);
    }

    let mut y = vec![0.0; width];
    for (r, &b) in tab.basis.iter().enumerate() {
        y[b] = tab.rhs(r);
    }
    let x: Vec<f64> = columns
        .iter()
        .map(|col| match *col {
            Column::Shifted { col, offset } => offset + y[col],
            Column::Mirrored { col, offset } => offset - y[col],
            Column::Free { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpOutcome::Optimal(LpSolution { value, x }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(lp: &LinearProgram) -> LpSolution {
        simplex_solve(lp).unwrap().optimal().expect("optimal")
    }

    #[test]
    fn single_variable_max() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        lp.add(vec![1.0], RowSense::Le, 3.0);
        assert!((solve(&lp).value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_face() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.add(vec![1.0, 1.0], RowSense::Le, 1.0);
        let s = solve(&lp);
        assert!((s.value - 1.0).abs() < 1e-12);
        assert!(lp.max_violation(&s.x) < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        lp.add(vec![1.0], RowSense::Ge, 2.0).add(vec![1.0], RowSense::Le, 1.0);
        assert_eq!(simplex_solve(&lp).unwrap(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, -1.0]);
        lp.add(vec![1.0, -1.0], RowSense::Ge, 0.0);
        assert_eq!(simplex_solve(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn equality_rows_and_general_bounds() {
        // min x - y, x + y = 4, -1 <= x <= 3, y free, y <= 10
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, -1.0]);
        lp.add(vec![1.0, 1.0], RowSense::Eq, 4.0);
        lp.set_bounds(0, -1.0, 3.0).set_bounds(1, f64::NEG_INFINITY, 10.0);
        let s = solve(&lp);
        assert!((s.value - (-1.0 - 5.0)).abs() < 1e-9, "{s:?}");
        assert!(lp.max_violation(&s.x) < 1e-9);

        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0]);
        lp.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
        lp.add(vec![2.0], RowSense::Ge, -6.0);
        assert!((solve(&lp).value + 3.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 2.0]);
        lp.add(vec![1.0, 1.0], RowSense::Eq, 1.0)
            .add(vec![2.0, 2.0], RowSense::Eq, 2.0);
        assert!((solve(&lp).value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dimension_errors() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 2.0]);
        lp.add(vec![1.0], RowSense::Eq, 1.0);
        assert!(matches!(simplex_solve(&lp), Err(LpError::Dimension(_))));
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0]);
        lp.set_bounds(0, 2.0, 1.0);
        assert!(matches!(simplex_solve(&lp), Err(LpError::Bounds { .. })));
    }
}
