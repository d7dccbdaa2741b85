//! Dense linear programming and the facility-location LP relaxation.

mod simplex;

pub use simplex::{
    simplex_solve, Constraint, LinearProgram, LpError, LpOutcome, LpSolution, RowSense, Sense,
};

use crate::instances::FlpmInstance;

/// Optimal value of the standard LP relaxation of `inst`:
///
/// minimize `Σ f_i y_i + Σ_j m_j (Σ_i d_ij x_ij + p_j z_j)`
/// subject to `Σ_i x_ij + z_j = 1`, `x_ij <= y_i`, everything nonnegative.
/// Clients with infinite penalty get no `z_j` column.
pub fn flp_lp_lowerbound(inst: &FlpmInstance) -> Result<f64, LpError> {
    let n_fac = inst.n_facilities();
    let n_cli = inst.n_clients();
    let y = |i: usize| i;
    let x = |j: usize, i: usize| n_fac + j * n_fac + i;
    let mut z_col = vec![None; n_cli];
    let mut n_vars = n_fac + n_cli * n_fac;
    for (j, c) in inst.clients.iter().enumerate() {
        if c.penalty.is_finite() {
            z_col[j] = Some(n_vars);
            n_vars += 1;
        }
    }
    let mut objective = vec![0.0; n_vars];
    for (i, fac) in inst.facilities.iter().enumerate() {
        objective[y(i)] = fac.opening_cost;
    }
    for (j, c) in inst.clients.iter().enumerate() {
        for i in 0..n_fac {
            objective[x(j, i)] = c.multiplicity * inst.dist[j][i];
        }
        if let Some(z) = z_col[j] {
            objective[z] = c.multiplicity * c.penalty;
        }
    }
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for j in 0..n_cli {
        let mut terms: Vec<(usize, f64)> = (0..n_fac).map(|i| (x(j, i), 1.0)).collect();
        if let Some(z) = z_col[j] {
            terms.push((z, 1.0));
        }
        lp.add_sparse(&terms, RowSense::Eq, 1.0);
        for i in 0..n_fac {
            lp.add_sparse(&[(x(j, i), 1.0), (y(i), -1.0)], RowSense::Le, 0.0);
        }
    }
    match simplex_solve(&lp)? {
        LpOutcome::Optimal(s) => Ok(s.value),
        // A client with infinite penalty and no facility has no fractional
        // assignment either.
        LpOutcome::Infeasible => Ok(f64::INFINITY),
        LpOutcome::Unbounded => unreachable!("objective is bounded below by zero"),
    }
}
