use std::time::Instant;

use clap::ValueEnum;
use facloc::instances::{generate_random, serialize_instance, GeneratorParams, Instance, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::solve::{self, SolveOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Flp,
    Ncc,
    #[value(name = "sirpfl-u")]
    #[serde(rename = "sirpfl-u")]
    SirpflU,
    #[value(name = "sirpfl-s")]
    #[serde(rename = "sirpfl-s")]
    SirpflS,
    #[value(name = "sirpfl-us")]
    #[serde(rename = "sirpfl-us")]
    SirpflUs,
}

impl Suite {
    fn variant(self) -> Variant {
        match self {
            Suite::Flp => Variant::Flp,
            Suite::Ncc => Variant::Ncc,
            Suite::SirpflU => Variant::SirpflUncapacitated,
            Suite::SirpflS => Variant::SirpflSplittable,
            Suite::SirpflUs => Variant::SirpflUnsplittable,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Suite::Flp => "flp",
            Suite::Ncc => "ncc",
            Suite::SirpflU => "sirpfl-u",
            Suite::SirpflS => "sirpfl-s",
            Suite::SirpflUs => "sirpfl-us",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub instance_id: String,
    pub variant: &'static str,
    pub n_fac: Option<usize>,
    pub n_cli: Option<usize>,
    #[serde(rename = "T")]
    pub t: Option<usize>,
    pub alg_cost: Option<f64>,
    pub opt_cost: Option<f64>,
    pub lp_bound: Option<f64>,
    pub ratio: Option<f64>,
    pub lp_ratio: Option<f64>,
    pub millis: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Aggregate {
    pub max_ratio: Option<f64>,
    pub mean_ratio: Option<f64>,
    pub max_lp_ratio: Option<f64>,
    pub mean_lp_ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub suite: Suite,
    pub count: usize,
    pub seed: u64,
    pub rows: Vec<Row>,
    pub aggregate: Aggregate,
}

pub struct BenchOptions {
    pub suite: Suite,
    pub count: usize,
    pub seed: u64,
    pub parallel: bool,
    pub timing: bool,
}

/// Instance `index` of a suite: sizes and contents depend only on
/// `(seed, index)`.
pub fn suite_instance(suite: Suite, seed: u64, index: usize) -> Result<Instance, CliError> {
    let instance_seed = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed);
    let params = match suite {
        Suite::Flp | Suite::Ncc => {
            GeneratorParams::new(rng.gen_range(1..=5), rng.gen_range(1..=7), suite.variant(), instance_seed)
        }
        _ => {
            let mut p =
                GeneratorParams::new(rng.gen_range(1..=4), rng.gen_range(1..=4), suite.variant(), instance_seed);
            p.horizon = rng.gen_range(1..=4);
            p
        }
    };
    Ok(generate_random(&params)?.instance)
}

fn one(opts: &BenchOptions, index: usize) -> Result<Row, CliError> {
    let inst = suite_instance(opts.suite, opts.seed, index)?;
    let digest = solve::digest(serialize_instance(&inst).as_bytes());
    let start = Instant::now();
    let out = solve::run(&inst, digest, &SolveOptions { oracle: true, lp_bound: true, trace: false, tol: 1e-9 })?;
    let millis = start.elapsed().as_secs_f64() * 1000.0;
    let r = out.report;
    Ok(Row {
        instance_id: index.to_string(),
        variant: opts.suite.name(),
        n_fac: Some(r.n_facilities),
        n_cli: Some(r.n_clients),
        t: r.horizon,
        alg_cost: Some(r.total_cost),
        opt_cost: r.oracle_cost,
        lp_bound: r.lp_bound,
        ratio: r.ratio,
        lp_ratio: r.lp_ratio,
        millis: Some(if opts.timing { millis } else { 0.0 }),
    })
}

fn max_mean(values: impl Iterator<Item = f64>) -> (Option<f64>, Option<f64>) {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return (None, None);
    }
    (Some(v.iter().copied().fold(f64::NEG_INFINITY, f64::max)), Some(v.iter().sum::<f64>() / v.len() as f64))
}

pub fn run(opts: &BenchOptions) -> Result<BenchReport, CliError> {
    let rows: Vec<Row> = if opts.parallel {
        (0..opts.count).into_par_iter().map(|i| one(opts, i)).collect::<Result<_, _>>()?
    } else {
        (0..opts.count).map(|i| one(opts, i)).collect::<Result<_, _>>()?
    };
    let (max_ratio, mean_ratio) = max_mean(rows.iter().filter_map(|r| r.ratio));
    let (max_lp_ratio, mean_lp_ratio) = max_mean(rows.iter().filter_map(|r| r.lp_ratio));
    Ok(BenchReport {
        suite: opts.suite,
        count: opts.count,
        seed: opts.seed,
        rows,
        aggregate: Aggregate { max_ratio, mean_ratio, max_lp_ratio, mean_lp_ratio },
    })
}

fn summary_row(label: &str, variant: &'static str, ratio: Option<f64>, lp_ratio: Option<f64>) -> Row {
    Row {
        instance_id: label.to_string(),
        variant,
        n_fac: None,
        n_cli: None,
        t: None,
        alg_cost: None,
        opt_cost: None,
        lp_bound: None,
        ratio,
        lp_ratio,
        millis: None,
    }
}

/// Per-instance rows followed by `max` and `mean` summary rows.
pub fn to_csv(report: &BenchReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let name = report.suite.name();
    let a = &report.aggregate;
    let extra = [
        summary_row("max", name, a.max_ratio, a.max_lp_ratio),
        summary_row("mean", name, a.mean_ratio, a.mean_lp_ratio),
    ];
    for row in report.rows.iter().chain(&extra) {
        w.serialize(row).map_err(|e| CliError::Other(e.into()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Other(anyhow::anyhow!("{e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
