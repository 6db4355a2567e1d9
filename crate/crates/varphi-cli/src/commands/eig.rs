//! `eig`: solve for the principal quotient value A, the threshold B and the
//! auxiliary value lambda_m; emit one JSON summary and, on request, the
//! minimizer as CSV.

use serde::Serialize;
use varphi::eigensolve::{lambda_m, minimize_rayleigh_a, minimize_rayleigh_b_seeded};

use crate::commands::Ctx;
use crate::fail::CliError;
use crate::output::{minimizer_csv, to_json_pretty, Rendered, ReportJson, SolveJson};

#[derive(Serialize)]
struct EigJson {
    config_hash: String,
    seed: u64,
    dimension: usize,
    nodes: Vec<usize>,
    condition_report: ReportJson,
    a: SolveJson,
    b: SolveJson,
    b_le_a: bool,
    lambda_m: SolveJson,
}

pub fn run(ctx: &Ctx) -> Result<Rendered, CliError> {
    if ctx.emit_minimizer && !ctx.has_out {
        return Err(CliError::Validation(
            "--emit-minimizer needs --out <dir> for the CSV".into(),
        ));
    }
    let problem = ctx.cfg.build_problem(ctx.seed)?;
    let opts = ctx.cfg.build_solver_options(ctx.seed)?;

    let a = minimize_rayleigh_a(&problem, &opts)?;
    // Seed B with the A-minimizer: at any critical point of the A-quotient
    // both quotients agree, so this start already realizes B <= A.
    let b = minimize_rayleigh_b_seeded(&problem, &opts, std::slice::from_ref(&a.minimizer))?;
    let m = lambda_m(&problem, &opts)?;

    let summary = EigJson {
        config_hash: ctx.config_hash.clone(),
        seed: ctx.seed,
        dimension: problem.grid().dimension(),
        nodes: problem.grid().nodes_per_axis().to_vec(),
        condition_report: ReportJson::from(problem.condition_report()),
        a: SolveJson::from(&a),
        b: SolveJson::from(&b),
        b_le_a: b.value <= a.value + 1e-6 * (1.0 + a.value.abs()),
        lambda_m: SolveJson::from(&m),
    };
    let stdout = to_json_pretty(&summary);

    let mut files = vec![("eig.json".to_string(), stdout.clone())];
    if ctx.emit_minimizer {
        files.push(("minimizer.csv".to_string(), minimizer_csv(&a.minimizer)));
    }

    let mut unconverged = Vec::new();
    for (name, solve) in [("A", &a), ("B", &b), ("lambda_m", &m)] {
        if !solve.converged {
            unconverged.push(name);
        }
    }
    let failure = if unconverged.is_empty() {
        None
    } else {
        Some(CliError::Solver(format!(
            "not converged: {}",
            unconverged.join(", ")
        )))
    };

    Ok(Rendered {
        stdout,
        files,
        failure,
    })
}
