use facloc::frlp::{random_feasible, run_chain, solve_p, solve_phat, FrSolution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct ChainSummary {
    pub points: usize,
    pub eps: f64,
    pub seed: u64,
    /// Points where every inequality and every feasibility check held.
    pub held: usize,
    pub step1: usize,
    pub step2: usize,
    #[serde(rename = "final")]
    pub last: usize,
    pub end_to_end: usize,
    pub feasible: usize,
    pub step1_exact: usize,
    pub witness_used: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrlpReport {
    pub k: usize,
    pub lambda_f: f64,
    /// `P` (penalized) or `Phat` (weighted, penalty-free).
    pub program: &'static str,
    pub m: Option<Vec<u64>>,
    /// `null` when unbounded.
    pub o_k: Option<f64>,
    pub unbounded: bool,
    pub argmax: Option<FrSolution>,
    pub patterns_solved: usize,
    pub chain: Option<ChainSummary>,
}

pub struct FrlpOptions {
    pub k: usize,
    pub lambda_f: f64,
    pub m: Option<Vec<u64>>,
    pub chain_check: Option<usize>,
    pub eps: f64,
    pub seed: u64,
}

fn chain(k: usize, lambda_f: f64, points: usize, eps: f64, seed: u64) -> Result<ChainSummary, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = ChainSummary {
        points,
        eps,
        seed,
        held: 0,
        step1: 0,
        step2: 0,
        last: 0,
        end_to_end: 0,
        feasible: 0,
        step1_exact: 0,
        witness_used: 0,
    };
    for _ in 0..points {
        let o = run_chain(&random_feasible(k, &mut rng), lambda_f, eps, 1e-7)?;
        s.held += o.all_hold() as usize;
        s.step1 += o.step1_holds as usize;
        s.step2 += o.step2_holds as usize;
        s.last += o.final_holds as usize;
        s.end_to_end += o.chain_holds as usize;
        s.feasible += (o.feasible_p && o.feasible_p1 && o.feasible_p2 && o.feasible_phat) as usize;
        s.step1_exact += o.step1_exact as usize;
        s.witness_used += o.witness as usize;
    }
    Ok(s)
}

pub fn run(opts: &FrlpOptions) -> Result<FrlpReport, CliError> {
    if !(opts.lambda_f.is_finite() && opts.lambda_f >= 0.0) {
        return Err(CliError::Input("--lambda-f must be finite and nonnegative".into()));
    }
    if !(opts.eps > 0.0) {
        return Err(CliError::Input("--eps must be positive".into()));
    }
    let (program, opt) = match &opts.m {
        Some(m) => ("Phat", solve_phat(opts.k, m, opts.lambda_f)?),
        None => ("P", solve_p(opts.k, opts.lambda_f)?),
    };
    let chain = match opts.chain_check {
        Some(n) => Some(chain(opts.k, opts.lambda_f, n, opts.eps, opts.seed)?),
        None => None,
    };
    Ok(FrlpReport {
        k: opts.k,
        lambda_f: opts.lambda_f,
        program,
        m: opts.m.clone(),
        o_k: opt.value.is_finite().then_some(opt.value),
        unbounded: opt.value.is_infinite(),
        argmax: opt.argmax,
        patterns_solved: opt.patterns_solved,
        chain,
    })
}
