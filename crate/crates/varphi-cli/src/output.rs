//! Deterministic rendering: JSON mirrors with fixed field order, CSV with `.`
//! decimals and LF endings, and the config hash embedded in every summary.

use serde::Serialize;
use sha2::{Digest, Sha256};
use varphi::eigensolve::EigenResult;
use varphi::grid::GridFunction;
use varphi::young::ConditionReport;

/// What a command produced: a stdout payload, optional named files for
/// `--out`, and an optional deferred failure. Output is printed and written
/// before the failure code is raised, so diagnostics survive a bad exit.
pub struct Rendered {
    pub stdout: String,
    pub files: Vec<(String, String)>,
    pub failure: Option<crate::fail::CliError>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Shortest round-trip decimal form; `Display` for f64 is stable for a given
/// bit pattern, which is all the determinism contract needs.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

#[derive(Serialize)]
pub struct ReportJson {
    pub chain_values: Vec<f64>,
    pub pass_2: bool,
    pub pass_3: bool,
    pub pass_4: bool,
    pub sobolev_bound: f64,
    pub dimension: usize,
    pub relaxed_mode: bool,
}

impl From<&ConditionReport> for ReportJson {
    fn from(r: &ConditionReport) -> Self {
        ReportJson {
            chain_values: r.chain_values.clone(),
            pass_2: r.pass_2,
            pass_3: r.pass_3,
            pass_4: r.pass_4,
            sobolev_bound: r.sobolev_bound,
            dimension: r.dimension,
            relaxed_mode: r.relaxed_mode,
        }
    }
}

#[derive(Serialize)]
pub struct SolveJson {
    pub value: f64,
    pub residual: f64,
    pub converged: bool,
    pub restarts_used: usize,
    pub iterations: usize,
}

impl From<&EigenResult> for SolveJson {
    fn from(r: &EigenResult) -> Self {
        SolveJson {
            value: r.value,
            residual: r.residual,
            converged: r.converged,
            restarts_used: r.restarts_used,
            iterations: r.iterations,
        }
    }
}

/// One nodal value per line, full float precision.
pub fn minimizer_csv(u: &GridFunction) -> String {
    let mut out = String::from("value\n");
    for v in &u.values {
        out.push_str(&fmt_f64(*v));
        out.push('\n');
    }
    out
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}
