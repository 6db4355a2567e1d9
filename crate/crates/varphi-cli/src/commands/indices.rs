//! `indices`: growth diagnostics for the two configured Young functions.

use serde::Serialize;
use varphi::young::YoungFunctionSpec;

use crate::commands::Ctx;
use crate::fail::CliError;
use crate::output::{to_json_pretty, Rendered};

#[derive(Serialize)]
struct FamilyJson {
    index_lo: f64,
    index_hi: f64,
    doubling_estimate: f64,
    doubling_bound: f64,
    sqrt_convex: bool,
}

#[derive(Serialize)]
struct IndicesJson {
    config_hash: String,
    phi1: FamilyJson,
    phi2: FamilyJson,
}

fn family_json(spec: &YoungFunctionSpec, key: &str) -> Result<FamilyJson, CliError> {
    let (lo, hi) = spec
        .indices()
        .map_err(|e| CliError::Validation(format!("{key}: {e}")))?;
    Ok(FamilyJson {
        index_lo: lo,
        index_hi: hi,
        doubling_estimate: spec.estimate_delta2(),
        doubling_bound: 2.0f64.powf(hi),
        sqrt_convex: spec.check_sqrt_convexity(),
    })
}

pub fn run(ctx: &Ctx) -> Result<Rendered, CliError> {
    let problem = ctx.cfg.build_problem(ctx.seed)?;
    let summary = IndicesJson {
        config_hash: ctx.config_hash.clone(),
        phi1: family_json(problem.phi1(), "phi1")?,
        phi2: family_json(problem.phi2(), "phi2")?,
    };
    let stdout = to_json_pretty(&summary);
    let files = vec![("indices.json".to_string(), stdout.clone())];
    Ok(Rendered {
        stdout,
        files,
        failure: None,
    })
}
