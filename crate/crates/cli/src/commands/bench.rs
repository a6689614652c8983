use std::hint::black_box;
use std::time::Instant;

use clap::Args;
use rand::Rng;
use serde::Serialize;
use tpmdp_core::lp_oracle::{census_log10, constraint_census};
use tpmdp_core::mechanism::rng::{stream_rng, Domain};
use tpmdp_core::{allocate, ThresholdInstance};

use crate::{csv_writer, CliResult, Globals, SCHEMA_VERSION};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated party counts.
    #[arg(long, value_delimiter = ',', default_value = "10000,100000,1000000")]
    pub sweep: Vec<usize>,
    /// Threshold as a fraction of n (rounded down, at most n - 1).
    #[arg(long, default_value_t = 0.5)]
    pub t_frac: f64,
    /// Timed repetitions per party count; the median is reported.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub schema_version: u32,
    pub n: usize,
    pub t: usize,
    pub alloc_ns: u128,
    /// Exact constraint count; empty when it exceeds 128 bits.
    pub census: Option<u128>,
    pub log10_census: f64,
}

/// Fully active instance with requirements uniform on `[0.5, 5]`.
pub fn bench_instance(n: usize, t: usize, seed: u64) -> ThresholdInstance {
    let mut rng = stream_rng(seed, Domain::Population, n as u64);
    let sg: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..5.0)).collect();
    ThresholdInstance::all_active(t, sg).expect("benchmark instance is valid")
}

pub fn threshold_for(n: usize, t_frac: f64) -> usize {
    ((t_frac * n as f64).floor() as usize).min(n.saturating_sub(1))
}

/// Median wall time of `allocate` over `reps` runs, in nanoseconds.
pub fn median_allocate_ns(inst: &ThresholdInstance, reps: usize) -> u128 {
    let mut times: Vec<u128> = (0..reps.max(1))
        .map(|_| {
            let start = Instant::now();
            black_box(allocate(black_box(inst)));
            start.elapsed().as_nanos()
        })
        .collect();
    times.sort_unstable();
    times[times.len() / 2]
}

pub fn bench_row(n: usize, t_frac: f64, reps: usize, seed: u64) -> BenchRow {
    let t = threshold_for(n, t_frac);
    let inst = bench_instance(n, t, seed);
    BenchRow {
        schema_version: SCHEMA_VERSION,
        n,
        t,
        alloc_ns: median_allocate_ns(&inst, reps),
        census: constraint_census(n, t, n),
        log10_census: census_log10(n, t, n),
    }
}

pub fn run(globals: &Globals, args: BenchArgs) -> CliResult {
    if !(0.0..=1.0).contains(&args.t_frac) {
        return Err(anyhow::anyhow!("--t-frac must lie in [0, 1]").into());
    }
    if let Some(n) = args.sweep.iter().find(|&&n| n == 0) {
        return Err(anyhow::anyhow!("party count {n} in --sweep must be positive").into());
    }
    let seed = globals.seed.unwrap_or(0);
    let mut out = csv_writer(globals.out.as_deref())?;
    for &n in &args.sweep {
        out.serialize(bench_row(n, args.t_frac, args.reps, seed))?;
    }
    out.flush()?;
    Ok(())
}
