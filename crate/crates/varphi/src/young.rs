//! Young function toolkit: generators phi, primitives Phi, inverses, the
//! complementary function Phi*, growth indices and the structural conditions
//! that decide whether an instance is conforming or relaxed.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::Error;
use crate::lebesgue::ExponentField;

/// Log-spaced scan window used for indices, the doubling estimate and the
/// convexity check. The infimum/supremum over all t > 0 is not finitely
/// computable, so every scan-based quantity is an approximation over this
/// window.
pub const SCAN_T_MIN: f64 = 1e-6;
pub const SCAN_T_MAX: f64 = 1e6;
/// Number of scan points for index estimation on tabulated generators.
pub const SCAN_POINTS: usize = 4096;

/// Base quadrature tolerance, applied relative to an a-priori bound on the
/// integral (t*phi(t) dominates Phi(t)), with an absolute floor so that tiny
/// arguments still converge.
const QUAD_TOL: f64 = 1e-10;
const QUAD_MAX_DEPTH: u32 = 40;
const QUAD_SCALE_FLOOR: f64 = 1e-300;

/// Below this magnitude PowerOverLog switches to its series form around 0.
const SERIES_CUTOFF: f64 = 1e-12;

/// Minimum number of tabulated samples accepted at construction.
const TABULATED_MIN_SAMPLES: usize = 2;
/// Minimum number of tabulated samples for a meaningful index scan.
const TABULATED_MIN_FOR_INDICES: usize = 4;

/// A generator phi of a Young function, odd and strictly increasing with
/// phi(0) = 0. Phi(t) is the integral of phi from 0 to t.
#[derive(Debug, Clone, PartialEq)]
pub enum YoungFunctionSpec {
    /// phi(t) = p|t|^{p-2} t, so Phi(t) = |t|^p. Requires p > 1.
    Power { p: f64 },
    /// phi(t) = log(1 + |t|^s) |t|^{p-2} t. Requires p > 1 and s > 0;
    /// indices are (p, p+s) for every s > 0.
    LogPower { p: f64, s: f64 },
    /// phi(t) = |t|^{p-2} t / log(1 + |t|) with phi(0) = 0. Requires p > 2.
    PowerOverLog { p: f64 },
    /// phi given by samples (t_i, phi(t_i)) with t_i > 0, strictly increasing
    /// in both coordinates. Linear interpolation, linear continuation past the
    /// last sample, and the segment from the origin to the first sample.
    Tabulated { samples: Vec<(f64, f64)> },
}

impl YoungFunctionSpec {
    pub fn power(p: f64) -> Result<Self, Error> {
        let spec = YoungFunctionSpec::Power { p };
        spec.validate()?;
        Ok(spec)
    }

    pub fn log_power(p: f64, s: f64) -> Result<Self, Error> {
        let spec = YoungFunctionSpec::LogPower { p, s };
        spec.validate()?;
        Ok(spec)
    }

    pub fn power_over_log(p: f64) -> Result<Self, Error> {
        let spec = YoungFunctionSpec::PowerOverLog { p };
        spec.validate()?;
        Ok(spec)
    }

    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self, Error> {
        let spec = YoungFunctionSpec::Tabulated { samples };
        spec.validate()?;
        Ok(spec)
    }

    /// Parameter checks plus a sampled monotonicity check of the generated phi
    /// on a log grid (oddness and phi(0) = 0 hold by construction).
    pub fn validate(&self) -> Result<(), Error> {
        match self {
            YoungFunctionSpec::Power { p } => {
                if !p.is_finite() || *p <= 1.0 {
                    return Err(Error::Invalid(format!("Power requires p > 1, got p = {p}")));
                }
            }
            YoungFunctionSpec::LogPower { p, s } => {
                if !p.is_finite() || *p <= 1.0 {
                    return Err(Error::Invalid(format!(
                        "LogPower requires p > 1, got p = {p}"
                    )));
                }
                if !s.is_finite() || *s <= 0.0 {
                    return Err(Error::Invalid(format!(
                        "LogPower requires s > 0, got s = {s}"
                    )));
                }
            }
            YoungFunctionSpec::PowerOverLog { p } => {
                if !p.is_finite() || *p <= 2.0 {
                    return Err(Error::Invalid(format!(
                        "PowerOverLog requires p > 2, got p = {p}"
                    )));
                }
            }
            YoungFunctionSpec::Tabulated { samples } => {
                if samples.len() < TABULATED_MIN_SAMPLES {
                    return Err(Error::Invalid(format!(
                        "tabulated generator needs at least {TABULATED_MIN_SAMPLES} samples, got {}",
                        samples.len()
                    )));
                }
                let mut prev = (0.0, 0.0);
                for (i, &(t, v)) in samples.iter().enumerate() {
                    if !t.is_finite() || !v.is_finite() {
                        return Err(Error::Invalid(format!("tabulated sample {i} not finite")));
                    }
                    if t <= prev.0 || v <= prev.1 {
                        return Err(Error::Invalid(format!(
                            "tabulated samples must increase strictly in both coordinates at index {i}"
                        )));
                    }
                    prev = (t, v);
                }
            }
        }
        // Sampled sanity: strictly increasing along a log grid.
        let mut last = 0.0;
        for k in 0..64 {
            let t = log_grid_point(k, 64);
            let v = self.phi_eval(t);
            if !v.is_finite() || v <= last {
                return Err(Error::Invalid(String::from(
                    "generated phi is not strictly increasing on the sample grid",
                )));
            }
            last = v;
        }
        Ok(())
    }

    /// phi(t). Odd in t, zero at zero, total on the reals.
    pub fn phi_eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return -self.phi_eval(-t);
        }
        if t == 0.0 {
            return 0.0;
        }
        match self {
            YoungFunctionSpec::Power { p } => p * t.powf(p - 1.0),
            YoungFunctionSpec::LogPower { p, s } => t.powf(*s).ln_1p() * t.powf(p - 1.0),
            YoungFunctionSpec::PowerOverLog { p } => {
                if t < SERIES_CUTOFF {
                    // log(1+t) = t (1 - t/2 + O(t^2)), so phi = t^{p-2} (1 + t/2 + ...)
                    t.powf(p - 2.0) * (1.0 + 0.5 * t)
                } else {
                    t.powf(p - 1.0) / t.ln_1p()
                }
            }
            YoungFunctionSpec::Tabulated { samples } => tabulated_eval(samples, t),
        }
    }

    /// Derivative phi'(t) for t != 0 (even in t); used by the B-quotient
    /// gradient. One-sided slopes for tabulated generators.
    pub fn phi_derivative(&self, t: f64) -> f64 {
        let t = t.abs();
        if t == 0.0 {
            return match self {
                YoungFunctionSpec::Power { p } => {
                    if *p == 2.0 {
                        2.0
                    } else if *p > 2.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                }
                _ => 0.0,
            };
        }
        match self {
            YoungFunctionSpec::Power { p } => p * (p - 1.0) * t.powf(p - 2.0),
            YoungFunctionSpec::LogPower { p, s } => {
                let ts = t.powf(*s);
                s * ts / (1.0 + ts) * t.powf(p - 2.0) + (p - 1.0) * ts.ln_1p() * t.powf(p - 2.0)
            }
            YoungFunctionSpec::PowerOverLog { p } => {
                let l = t.ln_1p();
                (p - 1.0) * t.powf(p - 2.0) / l - t.powf(p - 1.0) / ((1.0 + t) * l * l)
            }
            YoungFunctionSpec::Tabulated { samples } => tabulated_slope(samples, t),
        }
    }

    /// Phi(t), the primitive of phi. Closed form for Power, exact piecewise
    /// integration for Tabulated, adaptive Simpson quadrature otherwise.
    pub fn phi_capital(&self, t: f64) -> Result<f64, Error> {
        let t = t.abs();
        if t == 0.0 {
            return Ok(0.0);
        }
        match self {
            YoungFunctionSpec::Power { p } => Ok(t.powf(*p)),
            YoungFunctionSpec::Tabulated { samples } => Ok(tabulated_primitive(samples, t)),
            _ => {
                let scale = (t * self.phi_eval(t)).max(QUAD_SCALE_FLOOR);
                singular_endpoint_integral(&|s| self.phi_eval(s), t, QUAD_TOL * scale)
            }
        }
    }

    /// Same as `phi_capital` but never fails: on quadrature trouble the best
    /// available estimate is returned. Used by energy hot paths whose contract
    /// has no error channel.
    pub(crate) fn phi_capital_lossy(&self, t: f64) -> f64 {
        match self.phi_capital(t) {
            Ok(v) | Err(Error::Quadrature { achieved: v, .. }) => v,
            Err(_) => f64::NAN,
        }
    }

    /// Inverse of phi: the unique x with phi(x) = s, odd in s. Closed form for
    /// Power, monotone bracketing plus bisection otherwise.
    pub fn phi_inverse(&self, s: f64) -> f64 {
        if s < 0.0 {
            return -self.phi_inverse(-s);
        }
        if s == 0.0 {
            return 0.0;
        }
        if let YoungFunctionSpec::Power { p } = self {
            return (s / p).powf(1.0 / (p - 1.0));
        }
        // Expand the bracket upward until phi(hi) >= s.
        let mut hi = 1.0f64;
        let mut lo = 0.0f64;
        let mut guard = 0;
        while self.phi_eval(hi) < s {
            lo = hi;
            hi *= 2.0;
            guard += 1;
            if guard > 4096 {
                return f64::INFINITY;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.phi_eval(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The complementary function Phi*(t), the integral of phi^{-1} from 0 to
    /// t. Closed form for Power, quadrature otherwise.
    pub fn phi_star(&self, t: f64) -> Result<f64, Error> {
        let t = t.abs();
        if t == 0.0 {
            return Ok(0.0);
        }
        if let YoungFunctionSpec::Power { p } = self {
            // integral of (s/p)^{1/(p-1)}: (p-1)/p * t^{p'} / p^{1/(p-1)}, p' = p/(p-1)
            let pc = p / (p - 1.0);
            return Ok((p - 1.0) / p * t.powf(pc) / p.powf(1.0 / (p - 1.0)));
        }
        let scale = (t * self.phi_inverse(t)).max(QUAD_SCALE_FLOOR);
        let value = singular_endpoint_integral(&|s| self.phi_inverse(s), t, QUAD_TOL * scale)?;
        #[cfg(debug_assertions)]
        {
            // Young's inequality self check at s = t.
            let cap = self.phi_capital(t).unwrap_or(f64::INFINITY);
            debug_assert!(t * t <= cap + value + 1e-8 * (1.0 + cap + value));
        }
        Ok(value)
    }

    /// Growth indices (phi_lower, phi_upper): the infimum and supremum of
    /// t phi(t) / Phi(t) over t > 0. Closed forms for the named families, a
    /// scan over the log window for tabulated generators.
    pub fn indices(&self) -> Result<(f64, f64), Error> {
        match self {
            YoungFunctionSpec::Power { p } => Ok((*p, *p)),
            YoungFunctionSpec::LogPower { p, s } => Ok((*p, p + s)),
            YoungFunctionSpec::PowerOverLog { p } => Ok((p - 1.0, *p)),
            YoungFunctionSpec::Tabulated { samples } => {
                if samples.len() < TABULATED_MIN_FOR_INDICES {
                    return Err(Error::Invalid(format!(
                        "index scan needs at least {TABULATED_MIN_FOR_INDICES} tabulated samples, got {}",
                        samples.len()
                    )));
                }
                let mut lower = f64::INFINITY;
                let mut upper = f64::NEG_INFINITY;
                for k in 0..SCAN_POINTS {
                    let t = log_grid_point(k, SCAN_POINTS);
                    let ratio = t * tabulated_eval(samples, t) / tabulated_primitive(samples, t);
                    lower = lower.min(ratio);
                    upper = upper.max(ratio);
                }
                Ok((lower, upper))
            }
        }
    }

    /// Scan estimate of the doubling constant: sup over the log window of
    /// Phi(2t)/Phi(t). Equals 2^p for Power generators.
    pub fn estimate_delta2(&self) -> f64 {
        let mut sup = f64::NEG_INFINITY;
        for k in 0..512 {
            let t = log_grid_point(k, 512);
            let num = self.phi_capital_lossy(2.0 * t);
            let den = self.phi_capital_lossy(t);
            if den > 0.0 && num.is_finite() {
                sup = sup.max(num / den);
            }
        }
        sup
    }

    /// Midpoint-convexity check of t -> Phi(sqrt(t)) on a sampled grid.
    pub fn check_sqrt_convexity(&self) -> bool {
        self.sqrt_convexity_violation().is_none()
    }

    /// First violating triple (a, mid, b) of the midpoint convexity check, if
    /// any.
    pub fn sqrt_convexity_violation(&self) -> Option<(f64, f64, f64)> {
        let g = |t: f64| self.phi_capital_lossy(t.sqrt());
        let mut a = log_grid_point(0, 512);
        let mut ga = g(a);
        for k in 1..512 {
            let b = log_grid_point(k, 512);
            let gb = g(b);
            let mid = 0.5 * (a + b);
            let gm = g(mid);
            let bound = 0.5 * (ga + gb);
            if gm > bound + 1e-9 * bound.abs().max(1e-300) {
                return Some((a, mid, b));
            }
            a = b;
            ga = gb;
        }
        None
    }
}

/// Structural report on one problem instance: the full inequality chain, the
/// embedding bound and the pointwise potential-integrability condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// The eleven chained quantities, in print order:
    /// (phi2)_0, (phi2)^0, q2-, q2+, m-, m+, q1-, q1+, (phi1)_0, (phi1)^0, N.
    pub chain_values: Vec<f64>,
    /// The chain 1 < (phi2)_0 <= (phi2)^0 < q2- <= q2+ <= m- <= m+ <= q1- <=
    /// q1+ < (phi1)_0 <= (phi1)^0 < N, strict and weak steps exactly as
    /// printed.
    pub pass_2: bool,
    /// q1+ < N (phi2)_0 / (N - (phi2)_0).
    pub pass_3: bool,
    /// r(x) > N / m- at every node.
    pub pass_4: bool,
    /// N (phi2)_0 / (N - (phi2)_0); infinite when (phi2)_0 >= N.
    pub sobolev_bound: f64,
    /// Spatial dimension N >= 1.
    pub dimension: usize,
    /// True when any structural condition fails or N < 3. Solvers accept
    /// relaxed instances but stamp results as non-conforming.
    pub relaxed_mode: bool,
}

/// Evaluates the structural conditions for a full parameter set. Never fails:
/// unusable indices (for example an invalid tabulated generator) degrade to a
/// failed chain and relaxed mode.
pub fn check_conditions(
    phi1: &YoungFunctionSpec,
    phi2: &YoungFunctionSpec,
    q1: &ExponentField,
    q2: &ExponentField,
    m: &ExponentField,
    r: &ExponentField,
    dimension: usize,
) -> ConditionReport {
    let nan = (f64::NAN, f64::NAN);
    let (p1_lo, p1_hi) = phi1.indices().unwrap_or(nan);
    let (p2_lo, p2_hi) = phi2.indices().unwrap_or(nan);
    let n = dimension as f64;

    let chain_values = alloc::vec![
        p2_lo,
        p2_hi,
        q2.inf(),
        q2.sup(),
        m.inf(),
        m.sup(),
        q1.inf(),
        q1.sup(),
        p1_lo,
        p1_hi,
        n,
    ];
    let v = &chain_values;
    let pass_2 = 1.0 < v[0]
        && v[0] <= v[1]
        && v[1] < v[2]
        && v[2] <= v[3]
        && v[3] <= v[4]
        && v[4] <= v[5]
        && v[5] <= v[6]
        && v[6] <= v[7]
        && v[7] < v[8]
        && v[8] <= v[9]
        && v[9] < v[10];

    let sobolev_bound = if p2_lo < n {
        n * p2_lo / (n - p2_lo)
    } else {
        f64::INFINITY
    };
    let pass_3 = q1.sup() < sobolev_bound;

    let threshold = n / m.inf();
    let pass_4 = r.values().iter().all(|&rx| rx > threshold);

    let relaxed_mode = !(pass_2 && pass_3 && pass_4) || dimension < 3;
    ConditionReport {
        chain_values,
        pass_2,
        pass_3,
        pass_4,
        sobolev_bound,
        dimension,
        relaxed_mode,
    }
}

/// k-th point of a log-spaced grid over the scan window.
fn log_grid_point(k: usize, points: usize) -> f64 {
    let frac = k as f64 / (points - 1) as f64;
    SCAN_T_MIN * (SCAN_T_MAX / SCAN_T_MIN).powf(frac)
}

fn tabulated_eval(samples: &[(f64, f64)], t: f64) -> f64 {
    let (t0, v0) = samples[0];
    if t <= t0 {
        return v0 * t / t0;
    }
    for pair in samples.windows(2) {
        let (ta, va) = pair[0];
        let (tb, vb) = pair[1];
        if t <= tb {
            return va + (vb - va) * (t - ta) / (tb - ta);
        }
    }
    let (ta, va) = samples[samples.len() - 2];
    let (tb, vb) = samples[samples.len() - 1];
    vb + (vb - va) / (tb - ta) * (t - tb)
}

fn tabulated_slope(samples: &[(f64, f64)], t: f64) -> f64 {
    let (t0, v0) = samples[0];
    if t <= t0 {
        return v0 / t0;
    }
    for pair in samples.windows(2) {
        let (ta, va) = pair[0];
        let (tb, vb) = pair[1];
        if t <= tb {
            return (vb - va) / (tb - ta);
        }
    }
    let (ta, va) = samples[samples.len() - 2];
    let (tb, vb) = samples[samples.len() - 1];
    (vb - va) / (tb - ta)
}

/// Exact integral of the piecewise-linear interpolant from 0 to t >= 0.
fn tabulated_primitive(samples: &[(f64, f64)], t: f64) -> f64 {
    let (t0, v0) = samples[0];
    if t <= t0 {
        // Triangle under the segment from the origin.
        let v = v0 * t / t0;
        return 0.5 * v * t;
    }
    let mut acc = 0.5 * v0 * t0;
    for pair in samples.windows(2) {
        let (ta, va) = pair[0];
        let (tb, vb) = pair[1];
        if t <= tb {
            let v = va + (vb - va) * (t - ta) / (tb - ta);
            return acc + 0.5 * (va + v) * (t - ta);
        }
        acc += 0.5 * (va + vb) * (tb - ta);
    }
    let (ta, va) = samples[samples.len() - 2];
    let (tb, vb) = samples[samples.len() - 1];
    let slope = (vb - va) / (tb - ta);
    let dt = t - tb;
    acc + vb * dt + 0.5 * slope * dt * dt
}

/// Adaptive Simpson with Richardson correction. `tol` is absolute over the
/// whole interval.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, Error> {
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut worst = 0.0f64;
    let value = simpson_step(
        f,
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        tol,
        QUAD_MAX_DEPTH,
        &mut worst,
    );
    if worst > tol {
        return Err(Error::Quadrature {
            requested: tol,
            achieved: value,
        });
    }
    Ok(value)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    worst: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 {
        *worst = worst.max(delta.abs() / 15.0);
        return left + right + delta / 15.0;
    }
    if delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, worst)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, worst)
}
