//! `check`: print the structural condition report and exit 0 only when every
//! condition holds.

use crate::commands::Ctx;
use crate::fail::CliError;
use crate::output::{fmt_f64, Rendered};

const CHAIN_LABELS: [&str; 11] = [
    "(phi2)_0", "(phi2)^0", "q2-", "q2+", "m-", "m+", "q1-", "q1+", "(phi1)_0",
    "(phi1)^0", "N",
];

pub fn run(ctx: &Ctx) -> Result<Rendered, CliError> {
    let problem = ctx.cfg.build_problem(ctx.seed)?;
    let report = problem.condition_report();
    let v = &report.chain_values;

    // The chain alternates strict and weak steps; `true` marks a strict `<`.
    let steps: [(String, f64, f64, bool); 11] = [
        ("1 < (phi2)_0".into(), 1.0, v[0], true),
        (step_label(0, 1, false), v[0], v[1], false),
        (step_label(1, 2, true), v[1], v[2], true),
        (step_label(2, 3, false), v[2], v[3], false),
        (step_label(3, 4, false), v[3], v[4], false),
        (step_label(4, 5, false), v[4], v[5], false),
        (step_label(5, 6, false), v[5], v[6], false),
        (step_label(6, 7, false), v[6], v[7], false),
        (step_label(7, 8, true), v[7], v[8], true),
        (step_label(8, 9, false), v[8], v[9], false),
        (step_label(9, 10, true), v[9], v[10], true),
    ];

    let mut out = String::new();
    out.push_str("exponent chain:\n");
    let mut first_violation: Option<String> = None;
    for (label, lo, hi, strict) in &steps {
        let ok = if *strict { lo < hi } else { lo <= hi };
        out.push_str(&format!(
            "  {label:<22} {} {} {}   {}\n",
            fmt_f64(*lo),
            if *strict { "<" } else { "<=" },
            fmt_f64(*hi),
            if ok { "ok" } else { "VIOLATED" }
        ));
        if !ok && first_violation.is_none() {
            first_violation = Some(label.clone());
        }
    }

    let growth_ok = report.pass_3;
    out.push_str(&format!(
        "growth bound q1+ < N(phi2)_0/(N-(phi2)_0): {} < {}   {}\n",
        fmt_f64(v[7]),
        fmt_f64(report.sobolev_bound),
        if growth_ok { "ok" } else { "VIOLATED" }
    ));
    if !growth_ok && first_violation.is_none() {
        first_violation = Some("q1+ < N(phi2)_0/(N-(phi2)_0)".into());
    }

    let integrability_ok = report.pass_4;
    out.push_str(&format!(
        "potential integrability r(x) > N/m- at every node: {}\n",
        if integrability_ok { "ok" } else { "VIOLATED" }
    ));
    if !integrability_ok && first_violation.is_none() {
        first_violation = Some("r(x) > N/m-".into());
    }

    out.push_str(&format!("dimension: {}\n", report.dimension));
    out.push_str(&format!(
        "relaxed mode: {}\n",
        if report.relaxed_mode { "yes" } else { "no" }
    ));

    let failure = first_violation
        .map(|label| CliError::Validation(format!("condition violated: {label}")));
    Ok(Rendered {
        stdout: out,
        files: Vec::new(),
        failure,
    })
}

fn step_label(a: usize, b: usize, strict: bool) -> String {
    format!(
        "{} {} {}",
        CHAIN_LABELS[a],
        if strict { "<" } else { "<=" },
        CHAIN_LABELS[b]
    )
}
