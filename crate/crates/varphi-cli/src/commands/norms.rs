//! `norms`: Luxemburg norms and modulars of the configured instance. The
//! potential is measured in its own L^{r(x)} space; the reference bump
//! profile exercises the zero-order and gradient norms.

use serde::Serialize;
use varphi::grid::FieldRef;
use varphi::lebesgue::{luxemburg_norm, modular, orlicz_luxemburg_norm, DEFAULT_NORM_TOL};

use crate::commands::Ctx;
use crate::fail::CliError;
use crate::output::{to_json_pretty, Rendered};

#[derive(Serialize)]
struct NormsJson {
    config_hash: String,
    potential_norm_r: f64,
    potential_modular_r: f64,
    bump_norm_q1: f64,
    bump_norm_q2: f64,
    bump_norm_m: f64,
    bump_gradient_norm_phi1: f64,
    bump_gradient_norm_phi2: f64,
}

pub fn run(ctx: &Ctx) -> Result<Rendered, CliError> {
    let problem = ctx.cfg.build_problem(ctx.seed)?;
    let grid = problem.grid();
    let v = problem.potential();
    let bump = grid.bump_function();
    let grad = grid.gradient_magnitude(&bump);

    let summary = NormsJson {
        config_hash: ctx.config_hash.clone(),
        potential_norm_r: luxemburg_norm(grid, v, problem.r(), DEFAULT_NORM_TOL)?,
        potential_modular_r: modular(grid, v, problem.r()),
        bump_norm_q1: luxemburg_norm(grid, &bump, problem.q1(), DEFAULT_NORM_TOL)?,
        bump_norm_q2: luxemburg_norm(grid, &bump, problem.q2(), DEFAULT_NORM_TOL)?,
        bump_norm_m: luxemburg_norm(grid, &bump, problem.m(), DEFAULT_NORM_TOL)?,
        bump_gradient_norm_phi1: orlicz_luxemburg_norm(
            grid,
            FieldRef::Cell(&grad),
            problem.phi1(),
            DEFAULT_NORM_TOL,
        )?,
        bump_gradient_norm_phi2: orlicz_luxemburg_norm(
            grid,
            FieldRef::Cell(&grad),
            problem.phi2(),
            DEFAULT_NORM_TOL,
        )?,
    };
    let stdout = to_json_pretty(&summary);
    let files = vec![("norms.json".to_string(), stdout.clone())];
    Ok(Rendered {
        stdout,
        files,
        failure: None,
    })
}
