use rayon::prelude::*;
use serde::Serialize;

use super::{FrError, FrSolution};
use crate::lp::{simplex_solve, LinearProgram, LpOutcome, RowSense, Sense};

pub const SOLVE_PHAT_MAX_K: usize = 4;
pub const SOLVE_P_MAX_K: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrOptimum {
    pub k: usize,
    pub lambda_f: f64,
    /// `INFINITY` when some pattern is unbounded.
    pub value: f64,
    pub argmax: Option<FrSolution>,
    pub patterns_solved: usize,
}

/// Column layout shared by both solvers.
struct Cols {
    k: usize,
    extra: usize,
}

impl Cols {
    fn t(&self, i: usize) -> usize {
        i
    }
    fn d(&self, i: usize) -> usize {
        self.k + i
    }
    fn r(&self, j: usize, i: usize) -> usize {
        debug_assert!(j < i);
        // Row-major over pairs j < i.
        2 * self.k + j * self.k - j * (j + 1) / 2 + (i - j - 1)
    }
    fn f(&self) -> usize {
        2 * self.k + self.k * (self.k - 1) / 2
    }
    fn p(&self, i: usize) -> usize {
        self.f() + 1 + i
    }
    fn a(&self, i: usize) -> usize {
        self.f() + 1 + self.k + i
    }
    fn len(&self) -> usize {
        self.f() + 1 + self.extra
    }
}

/// Ordering, monotone `r` and the metric bound.
fn add_structural(lp: &mut LinearProgram, c: &Cols) {
    let k = c.k;
    for i in 0..k.saturating_sub(1) {
        lp.add_sparse(&[(c.t(i), 1.0), (c.t(i + 1), -1.0)], RowSense::Le, 0.0);
    }
    for j in 0..k {
        for i in (j + 1)..k.saturating_sub(1) {
            lp.add_sparse(&[(c.r(j, i + 1), 1.0), (c.r(j, i), -1.0)], RowSense::Le, 0.0);
        }
    }
    for i in 0..k {
        for j in 0..i {
            lp.add_sparse(
                &[(c.t(i), 1.0), (c.r(j, i), -1.0), (c.d(i), -1.0), (c.d(j), -1.0)],
                RowSense::Le,
                0.0,
            );
        }
    }
}

fn unpack(x: &[f64], c: &Cols, with_p: bool) -> FrSolution {
    let k = c.k;
    let mut r = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..i {
            r[j][i] = x[c.r(j, i)];
        }
    }
    let p = if with_p { (0..k).map(|i| x[c.p(i)]).collect() } else { vec![f64::INFINITY; k] };
    FrSolution::new(
        (0..k).map(|i| x[c.t(i)]).collect(),
        (0..k).map(|i| x[c.d(i)]).collect(),
        p,
        r,
        x[c.f()],
    )
}

/// Best over patterns: highest value, lowest pattern index on ties.
fn best_of(results: Vec<(u64, f64, Option<Vec<f64>>)>) -> Option<(u64, f64, Option<Vec<f64>>)> {
    results.into_iter().max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
}

/// Exact maximum of `(Σ m_i t_i − λ_f f) / Σ m_i d_i` over the penalty-free
/// program with weights `m`, by enumerating which `[·]⁺` terms are active.
pub fn solve_phat(k: usize, m: &[u64], lambda_f: f64) -> Result<FrOptimum, FrError> {
    if k == 0 || k > SOLVE_PHAT_MAX_K {
        return Err(FrError::ScaleGuard { k, max: SOLVE_PHAT_MAX_K });
    }
    if m.len() != k {
        return Err(FrError::Dimension("m must have length k".into()));
    }
    if m.iter().all(|&x| x == 0) {
        return Err(FrError::ZeroDenominator);
    }
    let c = Cols { k, extra: 0 };
    // Terms (l, i) with nonzero weight: x = r[i][l] for i < l, t[l] otherwise.
    let terms: Vec<(usize, usize)> = (0..k)
        .flat_map(|l| (0..k).map(move |i| (l, i)))
        .filter(|&(_, i)| m[i] > 0)
        .collect();
    let x_col = |l: usize, i: usize| if i < l { c.r(i, l) } else { c.t(l) };
    let mut objective = vec![0.0; c.len()];
    for i in 0..k {
        objective[c.t(i)] = m[i] as f64;
    }
    objective[c.f()] = -lambda_f;
    let mut base = LinearProgram::new(Sense::Maximize, objective);
    add_structural(&mut base, &c);
    let norm: Vec<(usize, f64)> = (0..k).map(|i| (c.d(i), m[i] as f64)).collect();
    base.add_sparse(&norm, RowSense::Eq, 1.0);

    let n_patterns = 1u64 << terms.len();
    let results: Vec<(u64, f64, Option<Vec<f64>>)> = (0..n_patterns)
        .into_par_iter()
        .filter_map(|pattern| {
            let mut lp = base.clone();
            let mut rows: Vec<Vec<(usize, f64)>> = vec![vec![(c.f(), -1.0)]; k];
            for (q, &(l, i)) in terms.iter().enumerate() {
                let x = x_col(l, i);
                if pattern >> q & 1 == 1 {
                    let w = m[i] as f64;
                    rows[l].push((x, w));
                    rows[l].push((c.d(i), -w));
                    lp.add_sparse(&[(x, -1.0), (c.d(i), 1.0)], RowSense::Le, 0.0);
                } else {
                    lp.add_sparse(&[(x, 1.0), (c.d(i), -1.0)], RowSense::Le, 0.0);
                }
            }
            for row in rows {
                lp.add_sparse(&row, RowSense::Le, 0.0);
            }
            match simplex_solve(&lp).expect("well-formed program") {
                LpOutcome::Optimal(s) => Some((pattern, s.value, Some(s.x))),
                LpOutcome::Unbounded => Some((pattern, f64::INFINITY, None)),
                LpOutcome::Infeasible => None,
            }
        })
        .collect();
    let (_, value, x) = best_of(results).ok_or_else(|| FrError::Other("no feasible pattern".into()))?;
    let argmax = x.map(|x| {
        let mut s = unpack(&x, &c, false);
        s.m = Some(m.to_vec());
        s
    });
    Ok(FrOptimum { k, lambda_f, value, argmax, patterns_solved: n_patterns as usize })
}

/// Exact maximum of the penalized program. Each opening term
/// `[min{x, p_i} − d_i]⁺` takes one of three linear forms: `x − d_i`
/// (`d_i <= x <= p_i`), `p_i − d_i` (`p_i <= x`) or 0 (`x <= min{p_i, d_i}`).
pub fn solve_p(k: usize, lambda_f: f64) -> Result<FrOptimum, FrError> {
    if k == 0 || k > SOLVE_P_MAX_K {
        return Err(FrError::ScaleGuard { k, max: SOLVE_P_MAX_K });
    }
    let c = Cols { k, extra: 2 * k };
    let terms: Vec<(usize, usize)> = (0..k).flat_map(|l| (0..k).map(move |i| (l, i))).collect();
    let x_col = |l: usize, i: usize| if i < l { c.r(i, l) } else { c.t(l) };
    let mut objective = vec![0.0; c.len()];
    for i in 0..k {
        objective[c.a(i)] = 1.0;
    }
    objective[c.f()] = -lambda_f;
    let mut base = LinearProgram::new(Sense::Maximize, objective);
    add_structural(&mut base, &c);
    for i in 0..k {
        for l in (i + 1)..k {
            base.add_sparse(&[(c.r(i, l), 1.0), (c.t(i), -1.0)], RowSense::Le, 0.0);
        }
        base.add_sparse(&[(c.d(i), 1.0), (c.p(i), -1.0)], RowSense::Le, 0.0);
        base.add_sparse(&[(c.a(i), 1.0), (c.t(i), -1.0)], RowSense::Le, 0.0);
        base.add_sparse(&[(c.a(i), 1.0), (c.p(i), -1.0)], RowSense::Le, 0.0);
    }
    let norm: Vec<(usize, f64)> = (0..k).map(|i| (c.d(i), 1.0)).collect();
    base.add_sparse(&norm, RowSense::Eq, 1.0);

    let n_patterns = 3u64.pow(terms.len() as u32);
    let results: Vec<(u64, f64, Option<Vec<f64>>)> = (0..n_patterns)
        .into_par_iter()
        .filter_map(|pattern| {
            let mut lp = base.clone();
            let mut rows: Vec<Vec<(usize, f64)>> = vec![vec![(c.f(), -1.0)]; k];
            let mut code = pattern;
            for &(l, i) in &terms {
                let x = x_col(l, i);
                let case = code % 3;
                code /= 3;
                match case {
                    0 => {
                        rows[l].push((x, 1.0));
                        rows[l].push((c.d(i), -1.0));
                        lp.add_sparse(&[(x, 1.0), (c.p(i), -1.0)], RowSense::Le, 0.0);
                        lp.add_sparse(&[(x, -1.0), (c.d(i), 1.0)], RowSense::Le, 0.0);
                    }
                    1 => {
                        rows[l].push((c.p(i), 1.0));
                        rows[l].push((c.d(i), -1.0));
                        lp.add_sparse(&[(c.p(i), 1.0), (x, -1.0)], RowSense::Le, 0.0);
                    }
                    _ => {
                        lp.add_sparse(&[(x, 1.0), (c.p(i), -1.0)], RowSense::Le, 0.0);
                        lp.add_sparse(&[(x, 1.0), (c.d(i), -1.0)], RowSense::Le, 0.0);
                    }
                }
            }
            for row in rows {
                lp.add_sparse(&row, RowSense::Le, 0.0);
            }
            match simplex_solve(&lp).expect("well-formed program") {
                LpOutcome::Optimal(s) => Some((pattern, s.value, Some(s.x))),
                LpOutcome::Unbounded => Some((pattern, f64::INFINITY, None)),
                LpOutcome::Infeasible => None,
            }
        })
        .collect();
    let (_, value, x) = best_of(results).ok_or_else(|| FrError::Other("no feasible pattern".into()))?;
    let argmax = x.map(|x| unpack(&x, &c, true));
    Ok(FrOptimum { k, lambda_f, value, argmax, patterns_solved: n_patterns as usize })
}

#[cfg(test)]
mod tests {
    use super::super::{check_feasible_p, check_feasible_phat, eval_p, eval_phat};
    use super::*;

    #[test]
    fn single_client_phat() {
        let o = solve_phat(1, &[1], 1.0).unwrap();
        assert!((o.value - 1.0).abs() < 1e-9);
        assert_eq!(o.patterns_solved, 2);
    }

    #[test]
    fn single_client_p() {
        let o = solve_p(1, 1.0).unwrap();
        assert!((o.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn argmax_is_feasible_and_attains_value() {
        let o = solve_phat(2, &[1, 2], 1.0).unwrap();
        let s = o.argmax.unwrap();
        assert!(check_feasible_phat(&s, &[1, 2], 1e-7).unwrap().is_empty());
        assert!((eval_phat(&s, &[1, 2], 1.0).unwrap() - o.value).abs() < 1e-7);
        let o = solve_p(2, 1.0).unwrap();
        let s = o.argmax.unwrap();
        assert!(check_feasible_p(&s, 1e-7).unwrap().is_empty(), "{s:?}");
        assert!((eval_p(&s, 1.0).unwrap() - o.value).abs() < 1e-7);
    }

    #[test]
    fn guards() {
        assert_eq!(solve_phat(5, &[1; 5], 1.0), Err(FrError::ScaleGuard { k: 5, max: 4 }));
        assert_eq!(solve_p(4, 1.0), Err(FrError::ScaleGuard { k: 4, max: 3 }));
        assert_eq!(solve_phat(2, &[0, 0], 1.0), Err(FrError::ZeroDenominator));
    }

    #[test]
    fn two_clients_bracket() {
        let v = solve_phat(2, &[1, 1], 1.0).unwrap().value;
        assert!((1.0 - 1e-9..=2.0).contains(&v), "{v}");
    }
}
