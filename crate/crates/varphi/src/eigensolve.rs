//! Multi-start minimization of the Rayleigh-type quotients, the free energy
//! T(u, lambda) = J(u) - lambda I(u), and the weak-form residual that
//! certifies eigenfunction candidates.
//!
//! The optimizer is steepest descent with Armijo backtracking plus a 1-D
//! search over the ray {s u : s > 0} each iteration. The quotients are not
//! scale-invariant, so the ray search does the work a normalization step
//! would do in the homogeneous case.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::Error;
use crate::functionals::{ProblemSpec, QuotientValue};
use crate::grid::GridFunction;
use crate::young::{ConditionReport, YoungFunctionSpec};

/// Iterates with sup norm below this are treated as collapsed to zero.
pub const TRIVIAL_THRESHOLD: f64 = 1e-6;
/// Collapse is declared final well below the reporting threshold: with the
/// slowest admissible zero-order exponent the residual of a near-zero
/// iterate decays like its sup norm to a power barely above zero, so a
/// generous gap keeps the reported residual negligible.
const COLLAPSE_FLOOR: f64 = 1e-13;
/// Forced shrink factor when a ray offers no negative energy value.
const COLLAPSE_FACTOR: f64 = 1e-3;
/// Break a descent run after this many iterations without a relative value
/// improvement of at least `PROGRESS_EPS`; rounding noise in the objective
/// keeps Armijo nominally accepting long after real progress has stopped.
const PROGRESS_WINDOW: usize = 100;
const PROGRESS_EPS: f64 = 1e-14;
/// Ray scans whose values are flat to this relative tolerance keep the
/// current scale (the scale-invariant case has no preferred ray point).
const RAY_FLAT_EPS: f64 = 1e-12;
/// Ray search scan window (log10 half-width) and sample count.
const RAY_WINDOW_DECADES: f64 = 3.0;
const RAY_SCAN_POINTS: usize = 25;
const RAY_REFINE_STEPS: usize = 48;
const RAY_WINDOW_SHIFTS: usize = 3;
/// Line search bounds.
const MAX_BACKTRACKS: usize = 60;
const STEP_GROWTH: f64 = 2.0;
const MAX_STEP: f64 = 1e8;
const MIN_STEP: f64 = 1e-18;
/// Memory of the nonmonotone (GLL) acceptance rule: a trial step passes when
/// it improves on the worst of this many recent values. Spectral
/// (Barzilai-Borwein) trial steps need the slack; forcing monotonicity makes
/// them collapse back to the steepest-descent crawl on flat valleys.
const GLL_WINDOW: usize = 8;

/// Spectral trial step from consecutive iterate/gradient pairs: the
/// least-squares secant fit <s,s>/<s,y> of the local inverse curvature.
/// `dir` and `pdir` hold minus the gradients. None when curvature along the
/// secant is not positive; caller falls back to the carried step.
fn bb_step(u: &[f64], pu: &[f64], dir: &[f64], pdir: &[f64]) -> Option<f64> {
    let mut ss = 0.0f64;
    let mut sy = 0.0f64;
    for i in 0..u.len() {
        let s = u[i] - pu[i];
        let y = pdir[i] - dir[i];
        ss += s * s;
        sy += s * y;
    }
    if ss.is_finite() && sy.is_finite() && sy > 0.0 && ss > 0.0 {
        Some((ss / sy).clamp(MIN_STEP, MAX_STEP))
    } else {
        None
    }
}

/// Ring of recently accepted objective values for the GLL reference.
struct ValueWindow {
    values: [f64; GLL_WINDOW],
    len: usize,
    next: usize,
}

impl ValueWindow {
    fn new() -> Self {
        ValueWindow {
            values: [0.0; GLL_WINDOW],
            len: 0,
            next: 0,
        }
    }

    fn push(&mut self, v: f64) {
        self.values[self.next] = v;
        self.next = (self.next + 1) % GLL_WINDOW;
        self.len = (self.len + 1).min(GLL_WINDOW);
    }

    fn reference(&self, current: f64) -> f64 {
        let mut worst = current;
        for k in 0..self.len {
            worst = worst.max(self.values[k]);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Number of independent starts: the first uses the bump profile, the
    /// rest are random. At least 1.
    pub restarts: usize,
    /// Iteration cap per start.
    pub max_iterations: usize,
    /// First trial step of the very first line search.
    pub initial_step: f64,
    /// Multiplicative backtracking factor in (0, 1).
    pub backtrack: f64,
    /// Armijo sufficient-decrease constant in (0, 1).
    pub armijo: f64,
    /// Convergence threshold on the normalized weak residual.
    pub grad_tol: f64,
    /// Seed for the random restarts.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            restarts: 8,
            max_iterations: 20_000,
            initial_step: 1.0,
            backtrack: 0.5,
            armijo: 1e-4,
            // Steepest descent hits an f64 rounding floor on the normalized
            // residual around 1e-6 at desk-scale grids; the default sits a
            // little above it.
            grad_tol: 5e-6,
            seed: 0x5eed,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<(), Error> {
        if self.restarts == 0 {
            return Err(Error::Invalid("restarts must be at least 1".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Invalid("backtrack factor must lie in (0, 1)".into()));
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return Err(Error::Invalid("armijo constant must lie in (0, 1)".into()));
        }
        if !(self.grad_tol > 0.0) || !(self.initial_step > 0.0) {
            return Err(Error::Invalid("tolerances and steps must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one solver call: the best start by (value, start index).
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub value: f64,
    pub minimizer: GridFunction,
    /// Normalized weak residual of the winning iterate at `value`.
    pub residual: f64,
    pub converged: bool,
    pub restarts_used: usize,
    /// Iterations summed over all starts.
    pub iterations: usize,
    pub condition_report: ConditionReport,
}

/// Which quotient the generic descent minimizes.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Objective {
    /// J(u) / I(u).
    RayleighA,
    /// The threshold quotient with phi(t) t numerator and plain modulars.
    RayleighB,
    /// Phi-sum numerator over the |u|^m / m modular.
    AuxiliaryM,
}

impl Objective {
    fn parts(self, p: &ProblemSpec, u: &GridFunction) -> (f64, f64) {
        match self {
            Objective::RayleighA => (p.j(u), p.i(u)),
            Objective::RayleighB => p.b_parts(u),
            Objective::AuxiliaryM => p.m_parts(u),
        }
    }

    fn grads(self, p: &ProblemSpec, u: &GridFunction) -> (Vec<f64>, Vec<f64>) {
        match self {
            Objective::RayleighA => (p.grad_j(u), p.grad_i(u)),
            Objective::RayleighB => p.grad_b(u),
            Objective::AuxiliaryM => p.grad_m(u),
        }
    }
}

/// Value of an objective along the ray s -> f(s u), evaluated many times per
/// iteration. When both Young families are pure powers and the exponents are
/// constant fields, every integral scales by a known power of s and the ray
/// costs O(1) per point; otherwise the cached fields are re-integrated.
enum RayProfile<'a> {
    PowerSums {
        num: Vec<(f64, f64)>,
        den: Vec<(f64, f64)>,
    },
    Sampled {
        problem: &'a ProblemSpec,
        objective: Objective,
        base: &'a GridFunction,
    },
}

impl<'a> RayProfile<'a> {
    fn build(problem: &'a ProblemSpec, objective: Objective, u: &'a GridFunction) -> Self {
        let powers = match (problem.phi1(), problem.phi2()) {
            (&YoungFunctionSpec::Power { p: p1 }, &YoungFunctionSpec::Power { p: p2 }) => {
                Some((p1, p2))
            }
            _ => None,
        };
        let constant_fields = problem.q1().is_constant()
            && problem.q2().is_constant()
            && problem.m().is_constant();
        if let (Some((p1, p2)), true) = (powers, constant_fields) {
            let part1 = problem.gradient_value(u, |g| g.powf(p1));
            let part2 = problem.gradient_value(u, |g| g.powf(p2));
            let q1 = problem.q1().inf();
            let q2 = problem.q2().inf();
            let m = problem.m().inf();
            let grid = problem.grid();
            let mut pot = 0.0;
            let mut mod_q1 = 0.0;
            let mut mod_q2 = 0.0;
            let mut mod_m = 0.0;
            for (flat, &uv) in u.values.iter().enumerate() {
                let a = uv.abs();
                if a == 0.0 {
                    continue;
                }
                let w = grid.node_weight(flat);
                pot += w * problem.potential().values[flat] * a.powf(m);
                mod_q1 += w * a.powf(q1);
                mod_q2 += w * a.powf(q2);
                mod_m += w * a.powf(m);
            }
            let (num, den) = match objective {
                Objective::RayleighA => (
                    vec![(part1, p1), (part2, p2), (pot / m, m)],
                    vec![(mod_q1 / q1, q1), (mod_q2 / q2, q2)],
                ),
                Objective::RayleighB => (
                    vec![(p1 * part1, p1), (p2 * part2, p2), (pot, m)],
                    vec![(mod_q1, q1), (mod_q2, q2)],
                ),
                Objective::AuxiliaryM => (
                    vec![(part1, p1), (part2, p2)],
                    vec![(mod_m / m, m)],
                ),
            };
            RayProfile::PowerSums { num, den }
        } else {
            RayProfile::Sampled {
                problem,
                objective,
                base: u,
            }
        }
    }

    /// Numerator and denominator of the objective at s * u.
    fn parts_at(&self, s: f64) -> (f64, f64) {
        match self {
            RayProfile::PowerSums { num, den } => {
                let n = num
                    .iter()
                    .map(|&(c, e)| if c == 0.0 { 0.0 } else { c * s.powf(e) })
                    .sum();
                let d = den
                    .iter()
                    .map(|&(c, e)| if c == 0.0 { 0.0 } else { c * s.powf(e) })
                    .sum();
                (n, d)
            }
            RayProfile::Sampled {
                problem,
                objective,
                base,
            } => objective.parts(problem, &base.scale(s)),
        }
    }

    fn quotient_at(&self, s: f64) -> f64 {
        let (n, d) = self.parts_at(s);
        n / d
    }

    fn energy_at(&self, s: f64, lambda: f64) -> f64 {
        let (n, d) = self.parts_at(s);
        n - lambda * d
    }
}

/// Log-scale scan plus golden-section refinement of f over s > 0, with the
/// window re-centered when the minimum lands on an edge. A scan that is flat
/// to rounding keeps the current scale s = center.
fn ray_minimum(f: &dyn Fn(f64) -> f64, center: f64) -> (f64, f64) {
    let mut center = center.log10();
    let mut best = (1.0, f64::INFINITY);
    for _ in 0..=RAY_WINDOW_SHIFTS {
        let lo = center - RAY_WINDOW_DECADES;
        let step = 2.0 * RAY_WINDOW_DECADES / (RAY_SCAN_POINTS - 1) as f64;
        let mut values = [0.0f64; RAY_SCAN_POINTS];
        let mut arg = 0usize;
        let mut min_val = f64::INFINITY;
        let mut max_val = f64::NEG_INFINITY;
        for (k, slot) in values.iter_mut().enumerate() {
            let v = f(10f64.powf(lo + step * k as f64));
            *slot = v;
            if v < min_val {
                min_val = v;
                arg = k;
            }
            max_val = max_val.max(v);
        }
        if max_val - min_val <= RAY_FLAT_EPS * (1.0 + min_val.abs()) {
            return (10f64.powf(center), f(10f64.powf(center)));
        }
        if arg > 0 && arg + 1 < RAY_SCAN_POINTS {
            // Interior minimum: golden-section on the log axis.
            let mut a = lo + step * (arg - 1) as f64;
            let mut b = lo + step * (arg + 1) as f64;
            let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
            let mut x1 = b - inv_phi * (b - a);
            let mut x2 = a + inv_phi * (b - a);
            let mut f1 = f(10f64.powf(x1));
            let mut f2 = f(10f64.powf(x2));
            for _ in 0..RAY_REFINE_STEPS {
                if f1 <= f2 {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - inv_phi * (b - a);
                    f1 = f(10f64.powf(x1));
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + inv_phi * (b - a);
                    f2 = f(10f64.powf(x2));
                }
            }
            let mid = 10f64.powf(0.5 * (a + b));
            let fm = f(mid);
            return if fm <= min_val {
                (mid, fm)
            } else {
                (10f64.powf(lo + step * arg as f64), min_val)
            };
        }
        best = (10f64.powf(lo + step * arg as f64), min_val);
        // Edge minimum: shift the window and look again.
        center += if arg == 0 {
            -RAY_WINDOW_DECADES
        } else {
            RAY_WINDOW_DECADES
        };
    }
    best
}

/// Euclidean norm squared of a nodal vector.
fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn shifted(u: &GridFunction, d: &[f64], t: f64) -> GridFunction {
    GridFunction {
        values: u
            .values
            .iter()
            .zip(d.iter())
            .map(|(a, b)| a + t * b)
            .collect(),
        dirichlet_zero: u.dirichlet_zero,
    }
}

/// Normalized weak defect of the residual identity at (u, lambda): the
/// largest over interior nodal test functions of
/// |<J'(u), v> - lambda <I'(u), v>| scaled by the node weight, 1 + |lambda|
/// and 1 + I(u).
pub fn residual_weak(problem: &ProblemSpec, u: &GridFunction, lambda: f64) -> Result<f64, Error> {
    if u.is_zero() {
        return Err(Error::ZeroFunction("residual undefined at zero"));
    }
    let gj = problem.grad_j(u);
    let gi = problem.grad_i(u);
    Ok(residual_from_grads(
        problem,
        &gj,
        &gi,
        lambda,
        problem.i(u),
    ))
}

fn residual_from_grads(
    problem: &ProblemSpec,
    gnum: &[f64],
    gden: &[f64],
    lambda: f64,
    den_value: f64,
) -> f64 {
    let grid = problem.grid();
    let scale = (1.0 + lambda.abs()) * (1.0 + den_value);
    let mut worst = 0.0f64;
    for flat in 0..grid.node_count() {
        if grid.is_boundary(flat) {
            continue;
        }
        let defect = (gnum[flat] - lambda * gden[flat]).abs() / (grid.node_weight(flat) * scale);
        worst = worst.max(defect);
    }
    worst
}

struct RestartOutcome {
    value: f64,
    iterate: GridFunction,
    residual: f64,
    converged: bool,
    iterations: usize,
}

/// One descent run on a quotient objective from a fixed start.
fn descend_quotient(
    problem: &ProblemSpec,
    objective: Objective,
    start: &GridFunction,
    opts: &SolverOptions,
) -> RestartOutcome {
    let mut u = start.clone();
    let mut step = opts.initial_step;
    let mut iterations = 0;
    let mut converged = false;
    let mut best_seen = f64::MAX;
    let mut best_u: Option<GridFunction> = None;
    let mut since_progress = 0usize;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut recent = ValueWindow::new();

    // Put the start on its optimal ray point first.
    let profile = RayProfile::build(problem, objective, &u);
    let (s0, _) = ray_minimum(&|s| profile.quotient_at(s), 1.0);
    u = u.scale(s0);

    for _ in 0..opts.max_iterations {
        iterations += 1;
        let (num, den) = objective.parts(problem, &u);
        if !(den > 1e-300) || !num.is_finite() {
            break;
        }
        let lambda = num / den;
        let (gnum, gden) = objective.grads(problem, &u);
        let residual = residual_from_grads(problem, &gnum, &gden, lambda, den);
        if residual < opts.grad_tol {
            converged = true;
            break;
        }

        // Steepest descent direction of the quotient, spectral trial step.
        let mut dir = vec![0.0f64; gnum.len()];
        for i in 0..dir.len() {
            dir[i] = -(gnum[i] - lambda * gden[i]) / den;
        }
        let slope = -norm_sq(&dir);
        let trial = prev
            .as_ref()
            .and_then(|(pu, pd)| bb_step(&u.values, pu, &dir, pd))
            .unwrap_or((step * STEP_GROWTH).min(MAX_STEP));
        prev = Some((u.values.clone(), dir.clone()));
        let reference = recent.reference(lambda);
        let mut value = lambda;
        let mut t = trial;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let cand = shifted(&u, &dir, t);
            let (cn, cd) = objective.parts(problem, &cand);
            if cd > 1e-300 {
                let cval = cn / cd;
                if cval <= reference + opts.armijo * t * slope {
                    u = cand;
                    value = cval;
                    step = t;
                    accepted = true;
                    break;
                }
            }
            t *= opts.backtrack;
            if t < MIN_STEP {
                break;
            }
        }

        // Rescale along the ray; cheap for power-sum instances.
        let profile = RayProfile::build(problem, objective, &u);
        let (s_best, v_best) = ray_minimum(&|s| profile.quotient_at(s), 1.0);
        if v_best < value {
            u = u.scale(s_best);
            value = v_best;
        }
        recent.push(value);

        if value < best_seen - PROGRESS_EPS * (1.0 + best_seen.abs()) {
            best_seen = value;
            best_u = Some(u.clone());
            since_progress = 0;
        } else {
            since_progress += 1;
            if since_progress >= PROGRESS_WINDOW || (!accepted && v_best >= lambda) {
                break;
            }
        }
    }

    // Report the final iterate's own value and residual; an unconverged run
    // falls back to the best value seen, since the nonmonotone search may
    // stop mid-excursion.
    if !converged {
        if let Some(b) = best_u {
            u = b;
        }
    }
    let (num, den) = objective.parts(problem, &u);
    let value = num / den;
    let residual = if den > 1e-300 && value.is_finite() {
        let (gnum, gden) = objective.grads(problem, &u);
        residual_from_grads(problem, &gnum, &gden, value, den)
    } else {
        f64::INFINITY
    };
    converged = converged || residual < opts.grad_tol;

    RestartOutcome {
        value,
        iterate: u,
        residual,
        converged,
        iterations,
    }
}

/// One descent run on the free energy T(., lambda) from a fixed start.
fn descend_energy(
    problem: &ProblemSpec,
    lambda: f64,
    start: &GridFunction,
    opts: &SolverOptions,
) -> RestartOutcome {
    let mut u = start.clone();
    let mut step = opts.initial_step;
    let mut iterations = 0;
    let mut converged = false;
    let mut collapsed = false;
    let mut best_seen = f64::MAX;
    let mut best_u: Option<GridFunction> = None;
    let mut since_progress = 0usize;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut recent = ValueWindow::new();

    for _ in 0..opts.max_iterations {
        iterations += 1;
        if u.max_abs() < COLLAPSE_FLOOR {
            // Collapsed to the trivial minimum; T -> 0 from above.
            collapsed = true;
            break;
        }
        let gj = problem.grad_j(&u);
        let gi = problem.grad_i(&u);
        let residual = residual_from_grads(problem, &gj, &gi, lambda, problem.i(&u));
        if residual < opts.grad_tol {
            converged = true;
            break;
        }

        let mut dir = vec![0.0f64; gj.len()];
        for i in 0..dir.len() {
            dir[i] = -(gj[i] - lambda * gi[i]);
        }
        let slope = -norm_sq(&dir);
        let tval = problem.t(&u, lambda);
        let trial = prev
            .as_ref()
            .and_then(|(pu, pd)| bb_step(&u.values, pu, &dir, pd))
            .unwrap_or((step * STEP_GROWTH).min(MAX_STEP));
        prev = Some((u.values.clone(), dir.clone()));
        let reference = recent.reference(tval);
        let mut value = tval;
        let mut t = trial;
        for _ in 0..MAX_BACKTRACKS {
            let cand = shifted(&u, &dir, t);
            let cval = problem.t(&cand, lambda);
            if cval <= reference + opts.armijo * t * slope {
                u = cand;
                value = cval;
                step = t;
                break;
            }
            t *= opts.backtrack;
            if t < MIN_STEP {
                break;
            }
        }

        let profile = RayProfile::build(problem, Objective::RayleighA, &u);
        let (s_best, v_best) = ray_minimum(&|s| profile.energy_at(s, lambda), 1.0);
        if v_best < value {
            u = u.scale(s_best);
            value = v_best;
        } else if value >= 0.0 && v_best >= 0.0 {
            // Nothing negative anywhere on this ray: drive the start toward
            // the trivial minimum rather than polishing a positive value.
            u = u.scale(COLLAPSE_FACTOR);
            value = problem.t(&u, lambda);
        }
        recent.push(value);

        if value < best_seen - PROGRESS_EPS * (1.0 + best_seen.abs()) {
            best_seen = value;
            best_u = Some(u.clone());
            since_progress = 0;
        } else {
            since_progress += 1;
            if since_progress >= PROGRESS_WINDOW {
                break;
            }
        }
    }

    if !(converged || collapsed) {
        if let Some(b) = best_u {
            u = b;
        }
    }
    let value = problem.t(&u, lambda);
    let residual = if u.is_zero() {
        0.0
    } else {
        let gj = problem.grad_j(&u);
        let gi = problem.grad_i(&u);
        residual_from_grads(problem, &gj, &gi, lambda, problem.i(&u))
    };
    converged = converged || collapsed || residual < opts.grad_tol;

    RestartOutcome {
        value,
        iterate: u,
        residual,
        converged,
        iterations,
    }
}

/// Newton polish depth: outer damped-Newton steps, inner CG cap per step.
const NEWTON_STEPS: usize = 40;
const CG_CAP: usize = 600;
/// Relative forcing term for the inner CG solve.
const CG_FORCING: f64 = 0.1;
/// Assembly budget of the fixed-point polish, as a multiple of the per-start
/// iteration cap.
const POLISH_BUDGET_FACTOR: usize = 4;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

/// Matrix-free damped Newton on grad T(., lambda) = 0, warm-started inside
/// the target basin. The Newton system is solved by truncated CG with
/// Hessian-vector products taken as forward differences of the gradient;
/// negative curvature or the iteration cap fall back to the partial CG
/// direction. First-order descent resolves the value of the shallow well
/// near the quotient infimum long before its strong-form residual, which is
/// exactly the regime where curvature-independent steps are needed.
/// `iterations` counts gradient/energy assemblies so the caller's budget
/// stays comparable with the descent loops.
fn newton_energy(
    problem: &ProblemSpec,
    lambda: f64,
    start: &GridFunction,
    opts: &SolverOptions,
) -> RestartOutcome {
    let n = start.values.len();
    let gradt = |u: &GridFunction| -> Vec<f64> {
        let gj = problem.grad_j(u);
        let gi = problem.grad_i(u);
        let mut g = vec![0.0f64; n];
        for i in 0..n {
            g[i] = gj[i] - lambda * gi[i];
        }
        g
    };
    let as_fn = |values: Vec<f64>| GridFunction {
        values,
        dirichlet_zero: start.dirichlet_zero,
    };

    let mut u = start.clone();
    let mut iterations = 0usize;
    let mut converged = false;

    for _ in 0..NEWTON_STEPS {
        if u.max_abs() < COLLAPSE_FLOOR || iterations >= opts.max_iterations {
            break;
        }
        let g = gradt(&u);
        iterations += 1;
        let residual = {
            let gj = problem.grad_j(&u);
            let gi = problem.grad_i(&u);
            residual_from_grads(problem, &gj, &gi, lambda, problem.i(&u))
        };
        iterations += 1;
        if residual < opts.grad_tol {
            converged = true;
            break;
        }

        let gnorm = dot(&g, &g).sqrt();
        if !(gnorm > 0.0) || !gnorm.is_finite() {
            break;
        }
        let hv_eps = 1e-8 * (1.0 + u.max_abs());

        // CG on H d = -g, truncated.
        let mut d = vec![0.0f64; n];
        let mut r: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        let target = (CG_FORCING * gnorm).max(1e-300);
        for _ in 0..CG_CAP {
            if rr.sqrt() <= target || iterations >= opts.max_iterations {
                break;
            }
            let pnorm = dot(&p, &p).sqrt();
            if !(pnorm > 0.0) {
                break;
            }
            let eps = hv_eps / pnorm;
            let shifted_u = as_fn(
                u.values
                    .iter()
                    .zip(&p)
                    .map(|(a, b)| a + eps * b)
                    .collect(),
            );
            let hp: Vec<f64> = gradt(&shifted_u)
                .iter()
                .zip(&g)
                .map(|(a, b)| (a - b) / eps)
                .collect();
            iterations += 1;
            let php = dot(&p, &hp);
            if !(php > 1e-300 * pnorm * pnorm) || !php.is_finite() {
                // Negative or numerically zero curvature: keep the partial
                // solution; fall back to steepest descent on a first-step
                // breakdown.
                if dot(&d, &d) == 0.0 {
                    d = r.clone();
                }
                break;
            }
            let alpha = rr / php;
            for i in 0..n {
                d[i] += alpha * p[i];
                r[i] -= alpha * hp[i];
            }
            let rr_next = dot(&r, &r);
            let beta = rr_next / rr;
            rr = rr_next;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
        }
        if dot(&d, &d) == 0.0 {
            break;
        }

        // Damped acceptance on the energy value.
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            d = g.iter().map(|x| -x).collect();
            slope = -gnorm * gnorm;
        }
        let tval = problem.t(&u, lambda);
        iterations += 1;
        let mut t = 1.0f64;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let cand = as_fn(
                u.values
                    .iter()
                    .zip(&d)
                    .map(|(a, b)| a + t * b)
                    .collect(),
            );
            let cval = problem.t(&cand, lambda);
            iterations += 1;
            if cval <= tval + opts.armijo * t * slope {
                u = cand;
                accepted = true;
                break;
            }
            t *= opts.backtrack;
            if t < MIN_STEP {
                break;
            }
        }
        if !accepted {
            break;
        }
    }

    let value = problem.t(&u, lambda);
    let residual = if u.is_zero() {
        0.0
    } else {
        let gj = problem.grad_j(&u);
        let gi = problem.grad_i(&u);
        residual_from_grads(problem, &gj, &gi, lambda, problem.i(&u))
    };
    converged = converged || residual < opts.grad_tol;

    RestartOutcome {
        value,
        iterate: u,
        residual,
        converged,
        iterations,
    }
}

/// Deterministic start list: caller-provided warm starts first, then the bump
/// profile, then seeded random functions.
fn start_list(
    problem: &ProblemSpec,
    opts: &SolverOptions,
    warm: &[GridFunction],
) -> Vec<GridFunction> {
    let grid = problem.grid();
    let mut starts: Vec<GridFunction> = warm
        .iter()
        .filter(|u| !u.is_zero())
        .cloned()
        .collect();
    starts.push(grid.bump_function());
    for k in 1..opts.restarts {
        starts.push(grid.random_test_function(opts.seed.wrapping_add(k as u64)));
    }
    starts
}

fn merge(
    problem: &ProblemSpec,
    outcomes: Vec<RestartOutcome>,
) -> EigenResult {
    let mut best = 0usize;
    for (k, o) in outcomes.iter().enumerate() {
        let b = &outcomes[best];
        let better = (o.converged && !b.converged && o.value <= b.value)
            || o.value < b.value - 0.0;
        if better {
            best = k;
        }
    }
    let iterations = outcomes.iter().map(|o| o.iterations).sum();
    let restarts_used = outcomes.len();
    let chosen = outcomes.into_iter().nth(best).expect("at least one start");
    EigenResult {
        value: chosen.value,
        minimizer: chosen.iterate,
        residual: chosen.residual,
        converged: chosen.converged,
        restarts_used,
        iterations,
        condition_report: problem.condition_report().clone(),
    }
}

fn minimize_quotient(
    problem: &ProblemSpec,
    objective: Objective,
    opts: &SolverOptions,
    warm: &[GridFunction],
) -> Result<EigenResult, Error> {
    opts.validate()?;
    let outcomes: Vec<RestartOutcome> = start_list(problem, opts, warm)
        .iter()
        .map(|s| descend_quotient(problem, objective, s, opts))
        .collect();
    Ok(merge(problem, outcomes))
}

/// Budgeted fixed-point refinement for the A-quotient: from the best descent
/// iterate, alternate "solve grad T(., lambda) = 0 warm from u" with
/// "lambda <- J(u)/I(u)". Each round enforces the weak identity at its own
/// lambda and a negative energy value at lambda forces the quotient below
/// lambda, so the reported residual is exactly the mismatch the rounds
/// contract. This rescues fine multi-dimensional grids where the raw
/// quotient descent reaches the right value plateau long before its residual
/// resolves. The rounds share `POLISH_BUDGET_FACTOR` times the per-start
/// iteration cap, counted in gradient/energy assemblies.
fn polish_rayleigh_a(problem: &ProblemSpec, result: &mut EigenResult, opts: &SolverOptions) {
    let mut budget = opts.max_iterations.saturating_mul(POLISH_BUDGET_FACTOR);
    while budget > 0 && !result.converged && result.value.is_finite() {
        let round_opts = SolverOptions {
            max_iterations: budget,
            ..*opts
        };
        let round = newton_energy(problem, result.value, &result.minimizer, &round_opts);
        result.iterations += round.iterations;
        budget = budget.saturating_sub(round.iterations.max(1));
        if round.iterate.max_abs() <= TRIVIAL_THRESHOLD {
            // The energy run fell to zero: lambda already sits at or below
            // the attainable infimum, so keep the current iterate.
            break;
        }
        let q = match problem.rayleigh_a(&round.iterate) {
            Ok(q) => q,
            Err(_) => break,
        };
        let residual =
            residual_weak(problem, &round.iterate, q.value).unwrap_or(f64::INFINITY);
        // Keep the round if it helped either the value or the residual;
        // near the fixed point the value is static to rounding while the
        // residual is still contracting.
        let value_slack = PROGRESS_EPS * (1.0 + result.value.abs());
        if !(q.value <= result.value + value_slack) && residual >= result.residual {
            break;
        }
        let value_static = (result.value - q.value).abs() <= value_slack;
        let slow = residual >= 0.5 * result.residual;
        result.value = q.value;
        result.minimizer = round.iterate;
        result.residual = residual;
        result.converged = residual < opts.grad_tol;
        if value_static && slow {
            break;
        }
    }
}

/// Best value of J(u)/I(u) over the multi-start descent.
pub fn minimize_rayleigh_a(problem: &ProblemSpec, opts: &SolverOptions) -> Result<EigenResult, Error> {
    let mut result = minimize_quotient(problem, Objective::RayleighA, opts, &[])?;
    polish_rayleigh_a(problem, &mut result, opts);
    Ok(result)
}

/// As `minimize_rayleigh_a` with caller-provided warm starts tried first.
pub fn minimize_rayleigh_a_seeded(
    problem: &ProblemSpec,
    opts: &SolverOptions,
    warm: &[GridFunction],
) -> Result<EigenResult, Error> {
    let mut result = minimize_quotient(problem, Objective::RayleighA, opts, warm)?;
    polish_rayleigh_a(problem, &mut result, opts);
    Ok(result)
}

/// Best value of the threshold quotient. A single-start A-minimization seeds
/// the search: at any critical point of the A-quotient both quotients agree,
/// so the threshold value never exceeds the A value by more than the solve
/// tolerance.
pub fn minimize_rayleigh_b(problem: &ProblemSpec, opts: &SolverOptions) -> Result<EigenResult, Error> {
    opts.validate()?;
    let lite = SolverOptions {
        restarts: 1,
        ..*opts
    };
    let a_seed = minimize_quotient(problem, Objective::RayleighA, &lite, &[])?;
    minimize_quotient(problem, Objective::RayleighB, opts, &[a_seed.minimizer])
}

/// As `minimize_rayleigh_b` with explicit warm starts (skips the internal
/// A-solve).
pub fn minimize_rayleigh_b_seeded(
    problem: &ProblemSpec,
    opts: &SolverOptions,
    warm: &[GridFunction],
) -> Result<EigenResult, Error> {
    minimize_quotient(problem, Objective::RayleighB, opts, warm)
}

/// Multi-start minimization of T(., lambda). A quotient-informed start is
/// added so any lambda above the best quotient value immediately exposes a
/// negative energy direction; below the threshold every start collapses to
/// the trivial minimum.
pub fn solve_t(
    problem: &ProblemSpec,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<EigenResult, Error> {
    opts.validate()?;
    let lite = SolverOptions {
        restarts: 1,
        ..*opts
    };
    let informed = minimize_quotient(problem, Objective::RayleighA, &lite, &[])?;
    solve_t_seeded(problem, lambda, opts, &[informed.minimizer])
}

/// As `solve_t` with caller-provided warm starts tried first.
pub fn solve_t_seeded(
    problem: &ProblemSpec,
    lambda: f64,
    opts: &SolverOptions,
    warm: &[GridFunction],
) -> Result<EigenResult, Error> {
    opts.validate()?;
    let outcomes: Vec<RestartOutcome> = start_list(problem, opts, warm)
        .iter()
        .map(|s| descend_energy(problem, lambda, s, opts))
        .collect();
    Ok(merge(problem, outcomes))
}

/// Smallest value of the auxiliary quotient with the |u|^m / m denominator.
pub fn lambda_m(problem: &ProblemSpec, opts: &SolverOptions) -> Result<EigenResult, Error> {
    minimize_quotient(problem, Objective::AuxiliaryM, opts, &[])
}

/// J/I quotient along the ray t -> t u, for exhibiting the blow-up at both
/// ends of the scale axis.
pub fn blowup_profile(
    problem: &ProblemSpec,
    u: &GridFunction,
    t_values: &[f64],
) -> Result<Vec<QuotientValue>, Error> {
    if u.is_zero() {
        return Err(Error::ZeroFunction("profile undefined at zero"));
    }
    let mut out = Vec::with_capacity(t_values.len());
    for &t in t_values {
        if !(t > 0.0) {
            return Err(Error::Invalid("profile scales must be positive".into()));
        }
        out.push(problem.rayleigh_a(&u.scale(t))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::lebesgue::ExponentField;

    /// Power 2 / Power 2, q1 = q2 = m = 2, V = 0 on [0, 1]: the quotient is
    /// 2 int |u'|^2 / int u^2 and the bump start is already the exact
    /// discrete eigenvector.
    fn homogeneous_1d(nodes: usize) -> ProblemSpec {
        let grid = Grid::unit_box(1, nodes).unwrap();
        let two = ExponentField::constant(&grid, 2.0).unwrap();
        ProblemSpec::new(
            grid.clone(),
            YoungFunctionSpec::power(2.0).unwrap(),
            YoungFunctionSpec::power(2.0).unwrap(),
            two.clone(),
            two.clone(),
            two.clone(),
            two,
            grid.zero_function(false),
        )
        .unwrap()
    }

    fn conforming_1d(nodes: usize, v: f64) -> ProblemSpec {
        let grid = Grid::unit_box(1, nodes).unwrap();
        let q2 = ExponentField::constant(&grid, 1.5).unwrap();
        let m = ExponentField::constant(&grid, 1.7).unwrap();
        let q1 = ExponentField::constant(&grid, 2.0).unwrap();
        let r = ExponentField::constant(&grid, 2.0).unwrap();
        let pot = grid.sample(|_| v, false);
        ProblemSpec::new(
            grid,
            YoungFunctionSpec::power(2.5).unwrap(),
            YoungFunctionSpec::power(1.3).unwrap(),
            q1,
            q2,
            m,
            r,
            pot,
        )
        .unwrap()
    }

    fn quick_opts() -> SolverOptions {
        SolverOptions {
            restarts: 2,
            max_iterations: 30_000,
            grad_tol: 5e-6,
            ..SolverOptions::default()
        }
    }

    #[test]
    fn options_validation() {
        let p = homogeneous_1d(9);
        let bad = SolverOptions {
            restarts: 0,
            ..SolverOptions::default()
        };
        assert!(minimize_rayleigh_a(&p, &bad).is_err());
        let bad = SolverOptions {
            grad_tol: 0.0,
            ..SolverOptions::default()
        };
        assert!(minimize_rayleigh_a(&p, &bad).is_err());
    }

    #[test]
    fn homogeneous_value_matches_tridiagonal_eigenvalue() {
        // Smallest eigenvalue of the second-difference operator:
        // (4 / h^2) sin^2(pi h / 2); the quotient doubles it.
        let nodes = 33;
        let p = homogeneous_1d(nodes);
        let h = p.grid().spacing()[0];
        let exact = 4.0 / (h * h) * (core::f64::consts::PI * h / 2.0).sin().powi(2);
        let r = minimize_rayleigh_a(&p, &quick_opts()).unwrap();
        assert!(r.converged, "residual {}", r.residual);
        assert!(
            (r.value - 2.0 * exact).abs() < 1e-8 * exact,
            "value {} vs {}",
            r.value,
            2.0 * exact
        );
        assert!(r.minimizer.max_abs() > TRIVIAL_THRESHOLD);
    }

    #[test]
    fn b_below_a_and_positive() {
        let p = conforming_1d(33, -0.5);
        let opts = quick_opts();
        let a = minimize_rayleigh_a(&p, &opts).unwrap();
        let b = minimize_rayleigh_b(&p, &opts).unwrap();
        assert!(a.converged && b.converged);
        assert!(b.value <= a.value + 1e-6, "B {} vs A {}", b.value, a.value);
        assert!(b.value > 0.0);
    }

    #[test]
    fn restart_merge_is_monotone_in_restarts() {
        let p = conforming_1d(17, -0.3);
        let base = SolverOptions {
            restarts: 1,
            max_iterations: 2000,
            ..SolverOptions::default()
        };
        let one = minimize_rayleigh_a(&p, &base).unwrap();
        let more = minimize_rayleigh_a(
            &p,
            &SolverOptions {
                restarts: 4,
                ..base
            },
        )
        .unwrap();
        assert!(more.value <= one.value + 1e-12);
        assert_eq!(more.restarts_used, 4);
    }

    #[test]
    fn residual_weak_contract() {
        let p = conforming_1d(33, -0.5);
        let r = minimize_rayleigh_a(&p, &quick_opts()).unwrap();
        assert!(r.converged);
        let at_min = residual_weak(&p, &r.minimizer, r.value).unwrap();
        assert!(at_min < 5e-6, "residual {at_min}");
        assert_eq!(at_min, r.residual);
        let perturbed = residual_weak(&p, &r.minimizer, r.value + 1.0).unwrap();
        assert!(perturbed > 1e-4);
        let zero = p.grid().zero_function(true);
        assert!(residual_weak(&p, &zero, 1.0).is_err());
    }

    #[test]
    fn solve_t_collapses_below_threshold() {
        let p = conforming_1d(33, 0.0);
        let opts = quick_opts();
        let b = minimize_rayleigh_b(&p, &opts).unwrap();
        let r = solve_t(&p, b.value - 0.5, &opts).unwrap();
        assert!(r.minimizer.max_abs() < TRIVIAL_THRESHOLD);
        assert!(r.value >= -1e-10);

        // lambda = 0 with V = 0: J >= 0, trivial minimum.
        let r0 = solve_t(&p, 0.0, &opts).unwrap();
        assert!(r0.minimizer.max_abs() < TRIVIAL_THRESHOLD);
        assert!(r0.value >= -1e-12);
    }

    #[test]
    fn solve_t_goes_negative_above_a() {
        let p = conforming_1d(33, 0.0);
        let opts = quick_opts();
        let a = minimize_rayleigh_a(&p, &opts).unwrap();
        let r = solve_t(&p, a.value + 0.5, &opts).unwrap();
        assert!(r.value < 0.0, "T {}", r.value);
        assert!(r.minimizer.max_abs() > TRIVIAL_THRESHOLD);
        assert!(r.converged, "residual {}", r.residual);
        let resid = residual_weak(&p, &r.minimizer, a.value + 0.5).unwrap();
        assert!(resid < 5e-6, "residual {resid}");
    }

    #[test]
    fn lambda_m_positive_and_potential_free() {
        let pa = conforming_1d(33, -1.0);
        let pb = conforming_1d(33, 2.0);
        let opts = quick_opts();
        let la = lambda_m(&pa, &opts).unwrap();
        let lb = lambda_m(&pb, &opts).unwrap();
        assert!(la.value > 0.0);
        assert!((la.value - lb.value).abs() < 1e-9 * (1.0 + la.value));
    }

    #[test]
    fn blowup_profile_contract() {
        let p = conforming_1d(33, 0.0);
        let r = minimize_rayleigh_a(&p, &quick_opts()).unwrap();
        let ts = [1e-3, 1.0, 1e3];
        let prof = blowup_profile(&p, &r.minimizer, &ts).unwrap();
        let center = p.rayleigh_a(&r.minimizer).unwrap().value;
        assert_eq!(prof[1].value, center);
        assert!(prof[0].value > center);
        assert!(prof[2].value > center);

        assert!(blowup_profile(&p, &r.minimizer, &[0.0]).is_err());
        let zero = p.grid().zero_function(true);
        assert!(blowup_profile(&p, &zero, &[1.0]).is_err());
    }
}
