//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero when any fails.

use std::process::ExitCode;
use std::time::Instant;

use facloc::frlp::{check_feasible_p, extract_stars, random_feasible, run_chain, solve_p, solve_phat};
use facloc::instances::{
    generate_random, ConcaveFn, FlpmInstance, GeneratorParams, Instance, NccInstance, SirpflInstance,
    Variant,
};
use facloc::jms::{solve_flpm, JmsConfig};
use facloc::lotsizing::{wagner_whitin, DemandSeries};
use facloc::lp::{flp_lp_lowerbound, simplex_solve, LinearProgram, LpOutcome, RowSense, Sense};
use facloc::oracle::{brute_flpm, brute_lotsizing, brute_sirpfl};
use facloc::reductions::{capacitated_lambda, multiplicities, ncc_to_flpm, solve_sirpfl, ExactScheduleOracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LAMBDA_F: f64 = 1.11;
const LAMBDA_C: f64 = 1.78;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn flp_suite() -> Vec<FlpmInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..500u64)
        .map(|s| {
            let nf = rng.gen_range(1..=5);
            let nc = rng.gen_range(1..=7);
            match generate_random(&GeneratorParams::new(nf, nc, Variant::Flp, 1000 + s)).unwrap().instance {
                Instance::Flpm(i) => i,
                _ => unreachable!(),
            }
        })
        .collect()
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u64..(1u64 << n)).map(move |mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect())
}

fn c1_bifactor(suite: &[FlpmInstance]) -> Outcome {
    let start = Instant::now();
    let mut worst = f64::NEG_INFINITY;
    let mut checks = 0usize;
    for inst in suite {
        let alg = solve_flpm(inst, &JmsConfig::default()).unwrap().solution.costs.total;
        for s in subsets(inst.n_facilities()) {
            let f_s: f64 = s.iter().map(|&i| inst.facilities[i].opening_cost).sum();
            let rest = inst.cost_of(&s) - f_s;
            worst = worst.max(alg - (LAMBDA_F * f_s + LAMBDA_C * rest));
            checks += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-6 && secs < 120.0,
        format!("{checks} (instance, S) pairs, max slack violation {worst:.3e}, {secs:.2}s"),
    )
}

fn c2_ratio(suite: &[FlpmInstance]) -> Outcome {
    let mut max_ratio: f64 = 0.0;
    let mut bad = 0;
    for inst in suite {
        let alg = solve_flpm(inst, &JmsConfig::default()).unwrap().solution.costs.total;
        let (opt, _) = brute_flpm(inst, false).unwrap();
        if opt > 0.0 {
            let r = alg / opt;
            max_ratio = max_ratio.max(r);
            if r > LAMBDA_C + 1e-6 {
                bad += 1;
            }
        } else if alg > 1e-9 {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("empirical max ratio {max_ratio:.6} over {} instances", suite.len()))
}

fn c3_reduction_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for s in 0..200u64 {
        let nf = rng.gen_range(1..=5);
        let nc = rng.gen_range(1..=6);
        let inst: NccInstance = match generate_random(&GeneratorParams::new(nf, nc, Variant::Ncc, 3000 + s))
            .unwrap()
            .instance
        {
            Instance::Ncc(i) => i,
            _ => unreachable!(),
        };
        let (reduced, _) = ncc_to_flpm(&inst).unwrap();
        for set in subsets(nf) {
            let a = inst.cost_of(&set);
            let b = reduced.cost_of(&set);
            worst = worst.max((a - b).abs() / (1.0 + a.abs()));
        }
    }
    outcome(worst <= 1e-9, format!("200 instances, max relative gap {worst:.3e}"))
}

fn random_concave(rng: &mut ChaCha8Rng) -> ConcaveFn {
    let pieces = rng.gen_range(1..=5);
    let mut slopes: Vec<f64> = (0..pieces).map(|_| rng.gen_range(0.0..3.0)).collect();
    slopes.sort_by(|a, b| b.total_cmp(a));
    let mut pts = vec![(0.0, 0.0)];
    for s in slopes {
        let (x, y) = *pts.last().unwrap();
        let w = rng.gen_range(0.05..0.8);
        pts.push((x + w, y + s * w));
    }
    ConcaveFn::new(pts).unwrap()
}

fn c4_multiplicity_system() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let g = random_concave(&mut rng);
        let n = rng.gen_range(1..=6);
        let mut d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..3.0)).collect();
        // Include some breakpoints exactly.
        for &(x, _) in g.breakpoints().iter().skip(1) {
            if rng.gen_bool(0.3) {
                d.push(x);
            }
        }
        d.sort_by(f64::total_cmp);
        d.dedup();
        let m = multiplicities(&g, &d).unwrap();
        for k in 0..d.len() {
            let terms: Vec<f64> = (0..d.len()).map(|i| m[i] * d[i].min(d[k])).collect();
            let lhs: f64 = terms.iter().sum();
            let rhs = g.eval(d[k]);
            let scale = rhs.abs().max(terms.iter().map(|t| t.abs()).sum::<f64>()).max(f64::MIN_POSITIVE);
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    outcome(worst <= 1e-12, format!("1000 functions, max relative residual {worst:.3e}"))
}

/// Cumulative per-day storage costs give holding that is nonincreasing in
/// the delivery day, on a 0.25 grid.
fn monotone_series(rng: &mut ChaCha8Rng, t_len: usize) -> DemandSeries {
    let mut demands: Vec<f64> = (0..t_len).map(|_| rng.gen_range(0..=4) as f64).collect();
    if demands.iter().all(|&u| u == 0.0) {
        demands[rng.gen_range(0..t_len)] = 1.0;
    }
    let step: Vec<f64> = (0..t_len).map(|_| rng.gen_range(0..=4) as f64 * 0.25).collect();
    let holding = (0..t_len)
        .map(|s| (0..t_len).map(|t| if t >= s { step[s..t].iter().sum() } else { 0.0 }).collect())
        .collect();
    DemandSeries::new(demands, holding).unwrap()
}

fn c5_wagner_whitin() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let t_len = rng.gen_range(1..=8);
        let series = monotone_series(&mut rng, t_len);
        let k = rng.gen_range(0..=20) as f64 * 0.5;
        let dp = wagner_whitin(&series, k).unwrap().cost_at(&series, k);
        let brute = brute_lotsizing(&series, k, false).unwrap();
        worst = worst.max((dp - brute).abs());
    }
    outcome(worst <= 1e-9, format!("1000 instances, max abs gap {worst:.3e}"))
}

fn sirpfl_suite(variant: Variant, seed: u64, count: u64) -> Vec<SirpflInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|s| {
            let mut p = GeneratorParams::new(rng.gen_range(1..=4), rng.gen_range(1..=4), variant, seed * 1000 + s);
            p.horizon = rng.gen_range(1..=4);
            if variant != Variant::SirpflUncapacitated {
                p.capacity = Some(rng.gen_range(2..=3) as f64);
            }
            match generate_random(&p).unwrap().instance {
                Instance::Sirpfl(i) => i,
                _ => unreachable!(),
            }
        })
        .collect()
}

/// (max ratio, failures) of the pipeline against the oracle on a suite.
fn sirpfl_ratio(suite: &[SirpflInstance]) -> (f64, usize) {
    let mut max_ratio: f64 = 0.0;
    let mut bad = 0;
    for inst in suite {
        let run = solve_sirpfl(inst, &ExactScheduleOracle::for_instance(inst), &JmsConfig::default()).unwrap();
        if run.plan.validate(inst, 1e-9).is_err() {
            bad += 1;
            continue;
        }
        let (opt, _) = brute_sirpfl(inst, false).unwrap();
        let r = run.plan.costs.total / opt;
        max_ratio = max_ratio.max(r);
        if r > LAMBDA_C + 1e-6 {
            bad += 1;
        }
    }
    (max_ratio, bad)
}

fn c6_sirpfl_uncapacitated() -> Outcome {
    let suite = sirpfl_suite(Variant::SirpflUncapacitated, 6, 100);
    let (r, bad) = sirpfl_ratio(&suite);
    outcome(bad == 0, format!("100 instances, max ratio {r:.6}, {bad} failures (bound 1.78; 1.488 needs LP rounding)"))
}

fn c7_sirpfl_capacitated() -> Outcome {
    let s = sirpfl_suite(Variant::SirpflSplittable, 7, 100);
    let u = sirpfl_suite(Variant::SirpflUnsplittable, 17, 100);
    let (rs, bs) = sirpfl_ratio(&s);
    let (ru, bu) = sirpfl_ratio(&u);
    outcome(
        bs + bu == 0,
        format!("splittable max ratio {rs:.6} ({bs} failures), unsplittable max ratio {ru:.6} ({bu} failures)"),
    )
}

fn c8_fixed_points() -> Outcome {
    let a = capacitated_lambda(3.0);
    let b = capacitated_lambda(6.0);
    let pass = (a.lambda_f - 3.23594).abs() <= 1e-3 && (a.ratio - 3.236).abs() <= 1e-3 && (b.ratio - 6.029).abs() <= 1e-3;
    outcome(
        pass,
        format!("alpha=3: lambda_f {:.5}, ratio {:.5}; alpha=6: ratio {:.5}", a.lambda_f, a.ratio, b.ratio),
    )
}

fn c9_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut s1, mut s2, mut s3, mut all, mut feas, mut exact) = (0, 0, 0, 0, 0, 0);
    let mut trials = 0;
    for k in 1..=3 {
        for _ in 0..100 {
            let s = random_feasible(k, &mut rng);
            let o = run_chain(&s, 1.0, 0.01, 1e-7).unwrap();
            trials += 1;
            s1 += o.step1_holds as usize;
            s2 += o.step2_holds as usize;
            s3 += o.final_holds as usize;
            all += o.chain_holds as usize;
            exact += o.step1_exact as usize;
            feas += (o.feasible_p && o.feasible_p1 && o.feasible_p2 && o.feasible_phat) as usize;
        }
    }
    let pass = [s1, s2, s3, all, feas].iter().all(|&c| c == trials);
    outcome(
        pass,
        format!(
            "{trials} points: step1 {s1}, step2 {s2}, final {s3}, end-to-end {all}, feasible {feas}; step1 exact in {exact}"
        ),
    )
}

fn c10_solver() -> Outcome {
    let base = solve_phat(1, &[1], 1.0).unwrap().value;
    let mut ok = (base - 1.0).abs() <= 1e-6;
    let mut report = vec![format!("phat(1,(1),1) = {base:.6}")];
    for lambda in [1.0, LAMBDA_F] {
        let o: Vec<f64> = (1..=3).map(|k| solve_p(k, lambda).unwrap().value).collect();
        ok &= o.windows(2).all(|w| w[0] <= w[1] + 1e-7);
        if lambda == LAMBDA_F {
            ok &= o.iter().all(|&v| v <= LAMBDA_C + 1e-7);
        }
        report.push(format!("o_k at {lambda}: {o:.4?}"));
    }
    outcome(ok, report.join("; "))
}

fn random_lp(rng: &mut ChaCha8Rng) -> (LinearProgram, LinearProgram) {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=6);
    let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(0.1..2.0)).collect()).collect();
    let b: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..5.0)).collect();
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..3.0)).collect();
    let mut primal = LinearProgram::new(Sense::Maximize, c.clone());
    for i in 0..m {
        primal.add(a[i].clone(), RowSense::Le, b[i]);
    }
    let mut dual = LinearProgram::new(Sense::Minimize, b);
    for j in 0..n {
        dual.add((0..m).map(|i| a[i][j]).collect(), RowSense::Ge, c[j]);
    }
    (primal, dual)
}

fn c11_lp(suite: &[FlpmInstance]) -> Outcome {
    let mut above = 0;
    for inst in suite {
        let lb = flp_lp_lowerbound(inst).unwrap();
        let (opt, _) = brute_flpm(inst, false).unwrap();
        if lb > opt + 1e-7 * (1.0 + opt) {
            above += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut gap: f64 = 0.0;
    let mut non_optimal = 0;
    for _ in 0..200 {
        let (p, d) = random_lp(&mut rng);
        match (simplex_solve(&p).unwrap(), simplex_solve(&d).unwrap()) {
            (LpOutcome::Optimal(x), LpOutcome::Optimal(y)) => gap = gap.max((x.value - y.value).abs()),
            _ => non_optimal += 1,
        }
    }
    outcome(
        above == 0 && non_optimal == 0 && gap <= 1e-6,
        format!("LP bound above OPT on {above}/{} instances; max duality gap {gap:.3e} over 200 LPs", suite.len()),
    )
}

fn c12_extraction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut stars, mut bad) = (0, 0);
    for s in 0..100u64 {
        let nf = rng.gen_range(1..=5);
        let nc = rng.gen_range(1..=7);
        let inst = match generate_random(&GeneratorParams::new(nf, nc, Variant::Flp, 12_000 + s)).unwrap().instance {
            Instance::Flpm(i) => i,
            _ => unreachable!(),
        };
        let run = solve_flpm(&inst, &JmsConfig::default()).unwrap();
        for (_, sol) in extract_stars(&inst, &run.open_times, 1e-9).unwrap() {
            stars += 1;
            if !check_feasible_p(&sol, 1e-7).unwrap().is_empty() {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("{stars} stars from 100 instances, {bad} infeasible"))
}

fn main() -> ExitCode {
    let flp = flp_suite();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 bifactor (1.11, 1.78) for every S", Box::new(|| c1_bifactor(&flp))),
        ("2 ratio against exact optimum", Box::new(|| c2_ratio(&flp))),
        ("3 concave-cost reduction exactness", Box::new(c3_reduction_exactness)),
        ("4 multiplicity equations", Box::new(c4_multiplicity_system)),
        ("5 lot-sizing dynamic program", Box::new(c5_wagner_whitin)),
        ("6 uncapacitated inventory routing", Box::new(c6_sirpfl_uncapacitated)),
        ("7 capacitated inventory routing", Box::new(c7_sirpfl_capacitated)),
        ("8 capacitated fixed points", Box::new(c8_fixed_points)),
        ("9 program chain", Box::new(c9_chain)),
        ("10 factor-revealing solver", Box::new(c10_solver)),
        ("11 LP sanity", Box::new(|| c11_lp(&flp))),
        ("12 dual feasibility of traces", Box::new(c12_extraction)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("[{}] criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
