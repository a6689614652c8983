use clap::Args;
use rand::Rng;
use serde::Serialize;
use tpmdp_core::allocator::{allocate_with_plan, DEFAULT_SLACK_TOL};
use tpmdp_core::lp_oracle::{solve_instance, MAX_SOLVE_PARTIES};
use tpmdp_core::mechanism::rng::{stream_rng, Domain};
use tpmdp_core::{feasibility_check, Allocation, ThresholdInstance};

use crate::instance::InstanceArgs;
use crate::{csv_writer, CliError, CliResult, Globals, SCHEMA_VERSION};

/// Largest relative gap between the allocator and the LP optimum that still passes.
pub const GAP_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Check this many random instances instead of one given instance.
    #[arg(long)]
    pub random: Option<usize>,
    /// Largest party count accepted (at most 12).
    #[arg(long, default_value_t = 8)]
    pub max_n: usize,
    /// Halve the largest allocated variance before checking feasibility.
    #[arg(long)]
    pub inject_infeasible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub schema_version: u32,
    pub case: usize,
    pub n: usize,
    pub t: usize,
    pub active_count: usize,
    pub subcase: &'static str,
    pub allocate_total: f64,
    pub oracle_total: f64,
    pub rel_gap: f64,
    pub feasible: bool,
}

impl VerifyRow {
    pub fn passed(&self) -> bool {
        self.feasible && self.rel_gap <= GAP_TOLERANCE
    }
}

/// Random requirements with frequent ties and zeros.
pub fn random_sigma_gamma(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| match rng.random_range(0..8) {
            0 => 0.0,
            1..=3 => rng.random_range(1..=6) as f64 * 0.5,
            _ => rng.random_range(0.01..10.0),
        })
        .collect()
}

pub fn random_instance(rng: &mut impl Rng, max_n: usize) -> ThresholdInstance {
    let n = rng.random_range(1..=max_n);
    let t = rng.random_range(0..n);
    let mask: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    let sg = random_sigma_gamma(rng, n);
    ThresholdInstance::from_mask(t, mask, sg).expect("generated instance is valid")
}

fn halve_largest(alloc: &Allocation) -> Allocation {
    let mut v = alloc.variances.clone();
    if let Some(i) = (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])) {
        v[i] *= 0.5;
    }
    Allocation::from_variances(v)
}

pub fn verify_instance(
    case: usize,
    inst: &ThresholdInstance,
    inject_infeasible: bool,
) -> tpmdp_core::Result<VerifyRow> {
    let (alloc, plan) = allocate_with_plan(inst);
    let exact = solve_instance(inst)?;
    let checked = if inject_infeasible {
        halve_largest(&alloc)
    } else {
        alloc.clone()
    };
    let feasible = feasibility_check(inst, &checked, DEFAULT_SLACK_TOL).feasible;
    let rel_gap =
        (alloc.total - exact.total).abs() / alloc.total.abs().max(exact.total.abs()).max(1.0);
    Ok(VerifyRow {
        schema_version: SCHEMA_VERSION,
        case,
        n: inst.n(),
        t: inst.t(),
        active_count: inst.active_count(),
        subcase: plan.subcase.as_str(),
        allocate_total: alloc.total,
        oracle_total: exact.total,
        rel_gap,
        feasible,
    })
}

pub fn run(globals: &Globals, args: VerifyArgs) -> CliResult {
    if args.max_n == 0 || args.max_n > MAX_SOLVE_PARTIES {
        return Err(anyhow::anyhow!("--max-n must lie in [1, {MAX_SOLVE_PARTIES}]").into());
    }
    let seed = globals.seed.unwrap_or(0);
    let instances: Vec<ThresholdInstance> = match args.random {
        Some(count) => {
            if !args.instance.is_empty() {
                return Err(anyhow::anyhow!("--random cannot be combined with an instance").into());
            }
            let mut rng = stream_rng(seed, Domain::Repetition, 0);
            (0..count)
                .map(|_| random_instance(&mut rng, args.max_n))
                .collect()
        }
        None => {
            let inst = args.instance.resolve(globals.config.as_deref(), seed)?;
            if inst.n() > args.max_n {
                return Err(anyhow::Error::msg(format!(
                    "instance has n = {} parties, above --max-n {}",
                    inst.n(),
                    args.max_n
                ))
                .into());
            }
            vec![inst]
        }
    };

    let mut out = csv_writer(globals.out.as_deref())?;
    let mut failures = 0;
    for (case, inst) in instances.iter().enumerate() {
        let row = verify_instance(case, inst, args.inject_infeasible)
            .map_err(|e| CliError::Verification(e.to_string()))?;
        if !row.passed() {
            failures += 1;
        }
        out.serialize(&row)?;
    }
    out.flush()?;
    if failures > 0 {
        return Err(CliError::Verification(format!(
            "{failures} of {} instances failed",
            instances.len()
        )));
    }
    Ok(())
}
