//! TOML run configuration: problem description, solver options and
//! command-specific parameters. A parsed config builds the grid, the Young
//! function pair, the exponent fields and the potential; field errors carry
//! the offending key.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use varphi::eigensolve::SolverOptions;
use varphi::functionals::ProblemSpec;
use varphi::grid::{Grid, GridFunction};
use varphi::lebesgue::ExponentField;
use varphi::young::YoungFunctionSpec;

use crate::expr;
use crate::fail::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub phi1: FamilyConfig,
    pub phi2: FamilyConfig,
    pub exponents: ExponentsConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Base RNG seed; `--seed` on the command line takes precedence.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub family: Option<FamilyCommand>,
    #[serde(default)]
    pub sweep: Option<SweepCommand>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Node count per axis; the list length fixes the dimension (1 to 3).
    pub nodes: Vec<usize>,
    /// Per-axis `[lo, hi]`; defaults to the unit box.
    #[serde(default)]
    pub extents: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    /// One of `power`, `log_power`, `power_over_log`, `tabulated`.
    pub family: String,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub s: Option<f64>,
    /// `(t, phi(t))` samples for the tabulated family.
    #[serde(default)]
    pub points: Option<Vec<[f64; 2]>>,
}

/// Exponent fields accept a bare number or a coordinate expression string.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Constant(f64),
    Expression(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsConfig {
    pub q1: FieldSpec,
    pub q2: FieldSpec,
    pub m: FieldSpec,
    pub r: FieldSpec,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Constant { value: f64 },
    Expression { expr: String },
    /// Nodal values uniform in [-amplitude, amplitude], drawn from the run seed.
    Random { amplitude: f64 },
    /// One nodal value per line, row-major over the grid.
    File { path: String },
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig::Constant { value: 0.0 }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub initial_step: Option<f64>,
    #[serde(default)]
    pub backtrack: Option<f64>,
    #[serde(default)]
    pub armijo: Option<f64>,
    #[serde(default)]
    pub grad_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyCommand {
    pub lambdas: Vec<f64>,
    /// Residual bound for declaring an eigenfunction; defaults to 1e-4.
    #[serde(default)]
    pub residual_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCommand {
    pub radii: Vec<f64>,
    #[serde(default)]
    pub probe: Option<ProbeConfig>,
    #[serde(default)]
    pub find_zero: Option<FindZeroConfig>,
}

/// Continuity probe: re-solve at radius*(1+delta) for each delta and report
/// the successive difference ratios.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub radius: f64,
    pub deltas: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FindZeroConfig {
    pub r_max: f64,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn effective_seed(&self, cli_seed: Option<u64>) -> u64 {
        cli_seed.or(self.seed).unwrap_or(0x5eed)
    }

    pub fn build_grid(&self) -> Result<Grid, CliError> {
        let nodes = &self.grid.nodes;
        match &self.grid.extents {
            Some(extents) => {
                let pairs: Vec<(f64, f64)> =
                    extents.iter().map(|&[lo, hi]| (lo, hi)).collect();
                Ok(Grid::new(&pairs, nodes)?)
            }
            None => {
                let unit: Vec<(f64, f64)> = nodes.iter().map(|_| (0.0, 1.0)).collect();
                Ok(Grid::new(&unit, nodes)?)
            }
        }
    }

    pub fn build_problem(&self, seed: u64) -> Result<ProblemSpec, CliError> {
        let grid = self.build_grid()?;
        let phi1 = build_family(&self.phi1, "phi1")?;
        let phi2 = build_family(&self.phi2, "phi2")?;
        let q1 = build_exponent(&grid, &self.exponents.q1, "q1")?;
        let q2 = build_exponent(&grid, &self.exponents.q2, "q2")?;
        let m = build_exponent(&grid, &self.exponents.m, "m")?;
        let r = build_exponent(&grid, &self.exponents.r, "r")?;
        let potential = build_potential(&grid, &self.potential, seed)?;
        Ok(ProblemSpec::new(grid, phi1, phi2, q1, q2, m, r, potential)?)
    }

    pub fn build_solver_options(&self, seed: u64) -> Result<SolverOptions, CliError> {
        let d = SolverOptions::default();
        let s = &self.solver;
        Ok(SolverOptions {
            restarts: s.restarts.unwrap_or(d.restarts),
            max_iterations: s.max_iterations.unwrap_or(d.max_iterations),
            initial_step: s.initial_step.unwrap_or(d.initial_step),
            backtrack: s.backtrack.unwrap_or(d.backtrack),
            armijo: s.armijo.unwrap_or(d.armijo),
            grad_tol: s.grad_tol.unwrap_or(d.grad_tol),
            seed,
        })
    }
}

fn build_family(cfg: &FamilyConfig, key: &str) -> Result<YoungFunctionSpec, CliError> {
    let need_p = || {
        cfg.p.ok_or_else(|| {
            CliError::Validation(format!("{key}: family `{}` needs `p`", cfg.family))
        })
    };
    let spec = match cfg.family.as_str() {
        "power" => YoungFunctionSpec::power(need_p()?),
        "log_power" => {
            let s = cfg.s.ok_or_else(|| {
                CliError::Validation(format!("{key}: family `log_power` needs `s`"))
            })?;
            YoungFunctionSpec::log_power(need_p()?, s)
        }
        "power_over_log" => YoungFunctionSpec::power_over_log(need_p()?),
        "tabulated" => {
            let points = cfg.points.clone().ok_or_else(|| {
                CliError::Validation(format!("{key}: family `tabulated` needs `points`"))
            })?;
            YoungFunctionSpec::tabulated(points.into_iter().map(|[t, v]| (t, v)).collect())
        }
        other => {
            return Err(CliError::Validation(format!(
                "{key}: unknown family `{other}` (expected power, log_power, power_over_log or tabulated)"
            )))
        }
    };
    spec.map_err(|e| CliError::Validation(format!("{key}: {e}")))
}

fn build_exponent(
    grid: &Grid,
    spec: &FieldSpec,
    key: &str,
) -> Result<ExponentField, CliError> {
    let field = match spec {
        FieldSpec::Constant(v) => ExponentField::constant(grid, *v),
        FieldSpec::Expression(src) => {
            let ast = expr::parse(src)
                .map_err(|e| CliError::Validation(format!("{key}: {e}")))?;
            ExponentField::sample(grid, |x| ast.eval(x))
        }
    };
    field.map_err(|e| CliError::Validation(format!("{key}: {e}")))
}

fn build_potential(
    grid: &Grid,
    cfg: &PotentialConfig,
    seed: u64,
) -> Result<GridFunction, CliError> {
    match cfg {
        PotentialConfig::Constant { value } => Ok(grid.sample(|_| *value, false)),
        PotentialConfig::Expression { expr: src } => {
            let ast = expr::parse(src)
                .map_err(|e| CliError::Validation(format!("potential: {e}")))?;
            Ok(grid.sample(|x| ast.eval(x), false))
        }
        PotentialConfig::Random { amplitude } => {
            if !(*amplitude >= 0.0) || !amplitude.is_finite() {
                return Err(CliError::Validation(
                    "potential: amplitude must be finite and >= 0".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x706f74);
            let values = (0..grid.node_count())
                .map(|_| rng.gen_range(-amplitude..=*amplitude))
                .collect();
            Ok(grid.function_from(values, false)?)
        }
        PotentialConfig::File { path } => {
            let text = std::fs::read_to_string(path)?;
            let mut values = Vec::new();
            for (line_no, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let v: f64 = line.parse().map_err(|_| {
                    CliError::Validation(format!(
                        "potential file {path} line {}: not a number: `{line}`",
                        line_no + 1
                    ))
                })?;
                values.push(v);
            }
            if values.len() != grid.node_count() {
                return Err(CliError::Validation(format!(
                    "potential file {path}: expected {} values, found {}",
                    grid.node_count(),
                    values.len()
                )));
            }
            Ok(grid.function_from(values, false)?)
        }
    }
}
