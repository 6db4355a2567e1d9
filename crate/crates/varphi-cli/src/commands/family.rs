//! `family`: classify a list of lambda values against the computed interval
//! [B, A]. Above A an eigenfunction is produced and verified; below B the
//! energy descent must collapse to zero; in between no claim is made.

use varphi::eigensolve::{
    minimize_rayleigh_a, minimize_rayleigh_b, solve_t, TRIVIAL_THRESHOLD,
};

use crate::commands::Ctx;
use crate::fail::CliError;
use crate::output::{fmt_f64, Rendered};

const DEFAULT_RESIDUAL_TOL: f64 = 1e-4;

pub fn run(ctx: &Ctx) -> Result<Rendered, CliError> {
    let section = ctx.cfg.family.as_ref().ok_or_else(|| {
        CliError::Validation("family command needs a [family] section with `lambdas`".into())
    })?;
    if section.lambdas.is_empty() {
        return Err(CliError::Validation("[family] lambdas must be non-empty".into()));
    }
    let residual_tol = section.residual_tol.unwrap_or(DEFAULT_RESIDUAL_TOL);

    let problem = ctx.cfg.build_problem(ctx.seed)?;
    let opts = ctx.cfg.build_solver_options(ctx.seed)?;
    let a = minimize_rayleigh_a(&problem, &opts)?;
    let b = minimize_rayleigh_b(&problem, &opts)?;

    let mut out = String::new();
    out.push_str(&format!("A,{}\n", fmt_f64(a.value)));
    out.push_str(&format!("B,{}\n", fmt_f64(b.value)));
    out.push_str("lambda,classification,t_min,residual,converged\n");

    let mut unresolved_claims = Vec::new();
    for &lambda in &section.lambdas {
        let t = solve_t(&problem, lambda, &opts)?;
        let nontrivial = t.minimizer.max_abs() > TRIVIAL_THRESHOLD;
        let classification = if lambda > a.value {
            if nontrivial && t.residual < residual_tol {
                "eigenvalue"
            } else {
                unresolved_claims.push(lambda);
                "unresolved"
            }
        } else if lambda < b.value {
            if nontrivial {
                unresolved_claims.push(lambda);
                "unresolved"
            } else {
                "no nontrivial critical point found"
            }
        } else {
            "unresolved"
        };
        out.push_str(&format!(
            "{},{classification},{},{},{}\n",
            fmt_f64(lambda),
            fmt_f64(t.value),
            fmt_f64(t.residual),
            t.converged
        ));
    }

    let failure = if unresolved_claims.is_empty() {
        None
    } else {
        Some(CliError::Solver(format!(
            "could not verify the expected outcome at lambda = {}",
            unresolved_claims
                .iter()
                .map(|l| fmt_f64(*l))
                .collect::<Vec<_>>()
                .join(", ")
        )))
    };

    let files = vec![("family.csv".to_string(), out.clone())];
    Ok(Rendered {
        stdout: out,
        files,
        failure,
    })
}
