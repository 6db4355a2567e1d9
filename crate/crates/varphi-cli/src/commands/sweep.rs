//! `sweep`: lower-envelope values over a radius list, with a monotonicity
//! verdict, an optional continuity probe and an optional zero-radius search
//! that adds the set-function column mu = -a_star(R) for R >= R0.

use varphi::potopt::{a_star, a_star_sweep, find_zero_radius, BallSpec};

use crate::commands::Ctx;
use crate::fail::CliError;
use crate::output::{fmt_f64, Rendered};

pub fn run(ctx: &Ctx) -> Result<Rendered, CliError> {
    let section = ctx.cfg.sweep.as_ref().ok_or_else(|| {
        CliError::Validation("sweep command needs a [sweep] section with `radii`".into())
    })?;
    if section.radii.is_empty() {
        return Err(CliError::Validation("[sweep] radii must be non-empty".into()));
    }

    let problem = ctx.cfg.build_problem(ctx.seed)?;
    let opts = ctx.cfg.build_solver_options(ctx.seed)?;
    let r_field = problem.r().clone();

    let rows = a_star_sweep(&problem, &r_field, &section.radii, &opts)?;

    let r0 = match &section.find_zero {
        Some(fz) => Some(find_zero_radius(&problem, &r_field, fz.r_max, &opts)?),
        None => None,
    };

    let mut csv = String::new();
    csv.push_str("R,a_star,converged,iterations,residual");
    if r0.is_some() {
        csv.push_str(",mu");
    }
    csv.push('\n');
    let mut max_increase: f64 = 0.0;
    for (k, row) in rows.iter().enumerate() {
        if k > 0 {
            max_increase = max_increase.max(row.a_star - rows[k - 1].a_star);
        }
        csv.push_str(&format!(
            "{},{},{},{},{}",
            fmt_f64(row.radius),
            fmt_f64(row.a_star),
            row.converged,
            row.iterations,
            fmt_f64(row.residual)
        ));
        if let Some(r0) = r0 {
            csv.push(',');
            // The set function is defined on annuli outside the zero radius.
            if row.radius >= r0 {
                csv.push_str(&fmt_f64(-row.a_star));
            }
        }
        csv.push('\n');
    }

    let mut summary = String::new();
    summary.push_str(&format!(
        "monotone_nonincreasing,{}\n",
        max_increase <= 0.0
    ));
    summary.push_str(&format!("max_increase,{}\n", fmt_f64(max_increase)));
    if let Some(r0) = r0 {
        summary.push_str(&format!("zero_radius,{}\n", fmt_f64(r0)));
    }

    let mut probe_csv = None;
    if let Some(probe) = &section.probe {
        if probe.deltas.is_empty() {
            return Err(CliError::Validation("[sweep.probe] deltas must be non-empty".into()));
        }
        let value_at = |radius: f64| -> Result<f64, CliError> {
            let ball = BallSpec::new(radius, r_field.clone())?;
            Ok(a_star(&problem, &ball, &opts)?.0)
        };
        let base = value_at(probe.radius)?;
        let mut text = String::from("delta,a_star,abs_diff,ratio\n");
        let mut prev_diff: Option<f64> = None;
        for &delta in &probe.deltas {
            let v = value_at(probe.radius * (1.0 + delta))?;
            let diff = (v - base).abs();
            let ratio = prev_diff.map(|p| if p > 0.0 { diff / p } else { 0.0 });
            text.push_str(&format!(
                "{},{},{},{}\n",
                fmt_f64(delta),
                fmt_f64(v),
                fmt_f64(diff),
                ratio.map(fmt_f64).unwrap_or_default()
            ));
            prev_diff = Some(diff);
        }
        summary.push_str(&format!("probe_radius,{}\n", fmt_f64(probe.radius)));
        probe_csv = Some(text);
    }

    // stdout carries everything; --out splits the machine-readable blocks
    // into their own files.
    let mut stdout = csv.clone();
    stdout.push('\n');
    stdout.push_str(&summary);
    if let Some(p) = &probe_csv {
        stdout.push('\n');
        stdout.push_str(p);
    }

    let mut files = vec![("sweep.csv".to_string(), csv)];
    if let Some(p) = probe_csv {
        files.push(("probe.csv".to_string(), p));
    }

    let failure = rows
        .iter()
        .any(|row| !row.converged)
        .then(|| CliError::Solver("sweep contains unconverged rows".into()));

    Ok(Rendered {
        stdout,
        files,
        failure,
    })
}
