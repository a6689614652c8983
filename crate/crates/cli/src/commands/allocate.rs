use clap::Args;
use serde::Serialize;
use tpmdp_core::allocator::{allocate_with_plan, DEFAULT_SLACK_TOL};
use tpmdp_core::feasibility_check;

use crate::instance::InstanceArgs;
use crate::{csv_writer, CliError, CliResult, Globals, SCHEMA_VERSION};

#[derive(Debug, Args)]
pub struct AllocateArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
}

#[derive(Serialize)]
struct PartyRow {
    schema_version: u32,
    party: usize,
    active: bool,
    sigma_gamma: f64,
    variance: f64,
}

pub fn run(globals: &Globals, args: AllocateArgs) -> CliResult {
    let inst = args
        .instance
        .resolve(globals.config.as_deref(), globals.seed.unwrap_or(0))?;
    let (alloc, plan) = allocate_with_plan(&inst);
    let report = feasibility_check(&inst, &alloc, DEFAULT_SLACK_TOL);

    eprintln!(
        "n={} t={} active={} subcase={} total={} feasible={}",
        inst.n(),
        inst.t(),
        inst.active_count(),
        plan.subcase,
        alloc.total,
        report.feasible
    );
    let mut out = csv_writer(globals.out.as_deref())?;
    for (i, &v) in alloc.variances.iter().enumerate() {
        out.serialize(PartyRow {
            schema_version: SCHEMA_VERSION,
            party: i,
            active: inst.is_active(i),
            sigma_gamma: inst.sigma_gamma()[i],
            variance: v,
        })?;
    }
    out.flush()?;

    if report.feasible {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "allocation violates a constraint: {:?}",
            report.worst
        )))
    }
}
