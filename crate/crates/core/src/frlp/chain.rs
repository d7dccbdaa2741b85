use rand::Rng;
use serde::Serialize;

use super::{
    check_feasible_p, check_feasible_p1, check_feasible_p2, check_feasible_phat, eval_p, eval_p1,
    eval_phat, pos, FrError, FrSolution,
};

/// Ceiling that ignores floating-point noise just above an integer.
fn ceil_robust(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * (1.0 + x.abs()) {
        r
    } else {
        x.ceil()
    }
}

/// Replaces penalties and minima by ratios
/// `z_i = (min{t_i, p_i} − d_i) / (t_i − d_i)` (0 when `t_i <= d_i`).
pub fn step1_z(s: &FrSolution) -> FrSolution {
    let z = (0..s.k)
        .map(|i| {
            if s.t[i] > s.d[i] {
                ((s.t[i].min(s.p[i]) - s.d[i]) / (s.t[i] - s.d[i])).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    FrSolution { z: Some(z), ..s.clone() }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Step2 {
    pub sol: FrSolution,
    /// Copies per unit of opening slack.
    pub n: u64,
    /// Grid resolution: `z'` is a multiple of `1/M`.
    pub scale: u64,
}

/// Rounds `z` up to the grid `1/M` with `N = ⌈λ_f f / ε⌉` and
/// `M = N ⌈max_{z_i > 0} 1/z_i⌉`, and inflates `f` by `(N+1)/N`.
/// `N` is at least 1 and an all-zero `z` uses 1 for the maximum.
pub fn step2_discretize(s1: &FrSolution, lambda_f: f64, eps: f64) -> Result<Step2, FrError> {
    let z = s1.z.as_ref().ok_or_else(|| FrError::Dimension("z is required".into()))?;
    if !(eps > 0.0) {
        return Err(FrError::Other("epsilon must be positive".into()));
    }
    let n = ceil_robust(lambda_f * s1.f / eps).max(1.0);
    let inv = z
        .iter()
        .filter(|&&zi| zi > 0.0)
        .map(|&zi| ceil_robust(1.0 / zi))
        .fold(1.0, f64::max);
    let scale = n * inv;
    if !(scale.is_finite() && scale <= (1u64 << 52) as f64) {
        return Err(FrError::Overflow(format!("M = {scale}")));
    }
    let z2: Vec<f64> = z.iter().map(|&zi| ceil_robust(zi * scale) / scale).collect();
    let sol = FrSolution {
        z: Some(z2),
        f: (n + 1.0) / n * s1.f,
        ..s1.clone()
    };
    Ok(Step2 { sol, n: n as u64, scale: scale as u64 })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Phat {
    pub m: Vec<u64>,
    /// `(t, d, r)` unchanged with `f̂ = M f'`.
    pub literal: FrSolution,
    /// The point whose value dominates the discretized one: `literal`, or
    /// the unit witness when that scores lower.
    pub sol: FrSolution,
    /// Whether `sol` is the unit witness `t = d = 1, r = 0, f = 0` (value 1).
    pub witness: bool,
}

/// `m_i = M z'_i` and `f̂ = M f'` on the same `(t, d, r)`.
///
/// The literal solution dominates only when the value is at least 1; below
/// that the unit witness, feasible for every `m`, is returned instead. An
/// all-zero `m` is replaced by all ones so the ratio is defined.
pub fn build_phat(s2: &Step2, lambda_f: f64) -> Result<Phat, FrError> {
    let z = s2.sol.z.as_ref().ok_or_else(|| FrError::Dimension("z is required".into()))?;
    let m_scale = s2.scale as f64;
    let mut m = Vec::with_capacity(z.len());
    for &zi in z {
        let x = zi * m_scale;
        if (x - x.round()).abs() > 1e-6 * (1.0 + x) {
            return Err(FrError::Other(format!("m = {x} is not integral")));
        }
        m.push(x.round() as u64);
    }
    let k = s2.sol.k;
    let witness_sol = || {
        let mut w = FrSolution::new(vec![1.0; k], vec![1.0; k], vec![f64::INFINITY; k], vec![vec![0.0; k]; k], 0.0);
        w.z = None;
        w
    };
    let mut literal = FrSolution {
        f: m_scale * s2.sol.f,
        z: None,
        m: Some(m.clone()),
        ..s2.sol.clone()
    };
    if m.iter().all(|&x| x == 0) {
        let m = vec![1; k];
        literal.m = Some(m.clone());
        let mut sol = witness_sol();
        sol.m = Some(m.clone());
        return Ok(Phat { m, literal, sol, witness: true });
    }
    let v_literal = eval_phat(&literal, &m, lambda_f)?;
    let v2 = eval_p1(&s2.sol, lambda_f)?;
    if v_literal + 1e-12 >= v2 || v2 > 1.0 {
        return Ok(Phat { m, sol: literal.clone(), literal, witness: false });
    }
    let mut sol = witness_sol();
    sol.m = Some(m.clone());
    Ok(Phat { m, literal, sol, witness: true })
}

/// Values and feasibility along the chain for one starting point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainOutcome {
    pub v_p: f64,
    pub v_p1: f64,
    pub v_p2: f64,
    pub v_phat: f64,
    pub m: Vec<u64>,
    pub scale: u64,
    pub witness: bool,
    pub feasible_p: bool,
    pub feasible_p1: bool,
    pub feasible_p2: bool,
    pub feasible_phat: bool,
    /// `v_p <= v_p1` within tol.
    pub step1_holds: bool,
    /// `v_p == v_p1` within tol; fails only when some `t_i < d_i`.
    pub step1_exact: bool,
    /// `v_p1 <= v_p2 + ε` within tol.
    pub step2_holds: bool,
    /// `v_p2 <= v_phat` within tol.
    pub final_holds: bool,
    /// `v_p <= v_phat + ε` within tol.
    pub chain_holds: bool,
}

impl ChainOutcome {
    pub fn all_hold(&self) -> bool {
        self.feasible_p
            && self.feasible_p1
            && self.feasible_p2
            && self.feasible_phat
            && self.step1_holds
            && self.step2_holds
            && self.final_holds
            && self.chain_holds
    }
}

pub fn run_chain(s: &FrSolution, lambda_f: f64, eps: f64, tol: f64) -> Result<ChainOutcome, FrError> {
    let feasible_p = check_feasible_p(s, tol)?.is_empty();
    let v_p = eval_p(s, lambda_f)?;
    let s1 = step1_z(s);
    let feasible_p1 = check_feasible_p1(&s1, tol)?.is_empty();
    let v_p1 = eval_p1(&s1, lambda_f)?;
    let s2 = step2_discretize(&s1, lambda_f, eps)?;
    let feasible_p2 = check_feasible_p2(&s2.sol, s2.scale, tol)?.is_empty();
    let v_p2 = eval_p1(&s2.sol, lambda_f)?;
    let ph = build_phat(&s2, lambda_f)?;
    let feasible_phat = check_feasible_phat(&ph.sol, &ph.m, tol)?.is_empty();
    let v_phat = eval_phat(&ph.sol, &ph.m, lambda_f)?;
    Ok(ChainOutcome {
        v_p,
        v_p1,
        v_p2,
        v_phat,
        scale: s2.scale,
        witness: ph.witness,
        feasible_p,
        feasible_p1,
        feasible_p2,
        feasible_phat,
        step1_holds: v_p <= v_p1 + tol,
        step1_exact: (v_p - v_p1).abs() <= tol,
        step2_holds: v_p1 <= v_p2 + eps + tol,
        final_holds: v_p2 <= v_phat + tol,
        chain_holds: v_p <= v_phat + eps + tol,
        m: ph.m,
    })
}

/// Random feasible point of the penalized program with `Σ d_i = 1` and the
/// smallest feasible `f`. About 30% of penalties are infinite.
pub fn random_feasible<R: Rng>(k: usize, rng: &mut R) -> FrSolution {
    assert!(k >= 1);
    loop {
        let d: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mut t: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..2.0)).collect();
        t.sort_by(f64::total_cmp);
        // Lower bound on r[j][i] implied by the metric constraint at i' >= i
        // and monotonicity of r.
        let lb = |j: usize, i: usize| (i..k).map(|q| pos(t[q] - d[q] - d[j])).fold(0.0, f64::max);
        if (0..k.saturating_sub(1)).any(|j| lb(j, j + 1) > t[j]) {
            continue;
        }
        let mut r = vec![vec![0.0; k]; k];
        for j in 0..k {
            let mut upper = t[j];
            for i in (j + 1)..k {
                let low = lb(j, i);
                let x = if upper > low { rng.gen_range(low..=upper) } else { low };
                r[j][i] = x;
                upper = x;
            }
        }
        let p: Vec<f64> = (0..k)
            .map(|i| if rng.gen_bool(0.3) { f64::INFINITY } else { d[i] + rng.gen_range(0.0..2.0) })
            .collect();
        let mut s = FrSolution::new(t, d, p, r, 0.0);
        s.f = (0..k)
            .map(|l| {
                (0..k)
                    .map(|i| {
                        let x = if i < l { s.r[i][l] } else { s.t[l] };
                        pos(x.min(s.p[i]) - s.d[i])
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        let total: f64 = s.d.iter().sum();
        if total <= 1e-6 {
            continue;
        }
        return s.scaled(1.0 / total);
    }
}
