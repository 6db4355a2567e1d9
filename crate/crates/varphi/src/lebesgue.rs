//! Variable-exponent Lebesgue and Orlicz norm machinery: modulars, Luxemburg
//! norms by monotone bisection, and the Hoelder pairing bound.

use alloc::format;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::Error;
use crate::grid::{FieldRef, Grid, GridFunction};
use crate::young::YoungFunctionSpec;

/// Default relative tolerance of the Luxemburg bisection; all downstream
/// tolerances derive from it.
pub const DEFAULT_NORM_TOL: f64 = 1e-10;

/// Initial lower bracket factor relative to max|u|.
const BRACKET_LO_FACTOR: f64 = 1e-9;
/// Geometric bracket expansion factor.
const BRACKET_GROWTH: f64 = 10.0;
const BRACKET_MAX_EXPANSIONS: usize = 700;
const BISECT_MAX_ITERATIONS: usize = 500;

/// A continuous exponent sampled at the nodes, all values strictly above 1,
/// with cached extrema.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField {
    values: Vec<f64>,
    inf: f64,
    sup: f64,
}

impl ExponentField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self, Error> {
        if values.len() != grid.node_count() {
            return Err(Error::Invalid(format!(
                "exponent field has {} values, grid has {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        Self::from_values(values)
    }

    pub fn constant(grid: &Grid, q: f64) -> Result<Self, Error> {
        Self::new(grid, alloc::vec![q; grid.node_count()])
    }

    /// Samples a closure of the node coordinates.
    pub fn sample(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self, Error> {
        let values = (0..grid.node_count())
            .map(|flat| f(&grid.node_coords(flat)[..grid.dimension()]))
            .collect();
        Self::new(grid, values)
    }

    fn from_values(values: Vec<f64>) -> Result<Self, Error> {
        let mut inf = f64::INFINITY;
        let mut sup = f64::NEG_INFINITY;
        for (i, &q) in values.iter().enumerate() {
            if !q.is_finite() || q <= 1.0 {
                return Err(Error::Invalid(format!(
                    "exponent values must be finite and > 1, node {i} has {q}"
                )));
            }
            inf = inf.min(q);
            sup = sup.max(q);
        }
        Ok(ExponentField { values, inf, sup })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Cached minimum (the q- of the analysis).
    pub fn inf(&self) -> f64 {
        self.inf
    }

    /// Cached maximum (the q+ of the analysis).
    pub fn sup(&self) -> f64 {
        self.sup
    }

    pub fn is_constant(&self) -> bool {
        self.inf == self.sup
    }

    /// Pointwise conjugate exponent r(x)/(r(x)-1).
    pub fn conjugate(&self) -> Result<Self, Error> {
        Self::from_values(self.values.iter().map(|&r| r / (r - 1.0)).collect())
    }
}

/// The modular of u: integral of |u(x)|^{q(x)} with nodal weights.
pub fn modular(grid: &Grid, u: &GridFunction, q: &ExponentField) -> f64 {
    debug_assert_eq!(u.values.len(), q.values.len());
    let mut acc = 0.0;
    for (flat, (&v, &qx)) in u.values.iter().zip(q.values.iter()).enumerate() {
        acc += grid.node_weight(flat) * v.abs().powf(qx);
    }
    acc
}

/// Luxemburg norm: the infimum of mu > 0 with modular(u/mu) <= 1, found by
/// bisection on the strictly decreasing map mu -> modular(u/mu). Returns 0
/// for the zero function; `tol` is relative.
pub fn luxemburg_norm(
    grid: &Grid,
    u: &GridFunction,
    q: &ExponentField,
    tol: f64,
) -> Result<f64, Error> {
    debug_assert_eq!(u.values.len(), q.values.len());
    let weights: Vec<f64> = (0..u.values.len()).map(|i| grid.node_weight(i)).collect();
    let modular_at = |mu: f64| {
        let mut acc = 0.0;
        for ((&v, &qx), &w) in u.values.iter().zip(q.values.iter()).zip(weights.iter()) {
            acc += w * (v.abs() / mu).powf(qx);
        }
        acc
    };
    luxemburg_bisect(u.max_abs(), grid.volume(), &modular_at, tol)
}

/// Orlicz Luxemburg norm: infimum of k > 0 with integral of Phi(field/k)
/// at most 1. Accepts nodal or cell fields.
pub fn orlicz_luxemburg_norm(
    grid: &Grid,
    field: FieldRef<'_>,
    spec: &YoungFunctionSpec,
    tol: f64,
) -> Result<f64, Error> {
    let modular_at = |k: f64| field.integrate_map(grid, |v| spec.phi_capital_lossy(v.abs() / k));
    luxemburg_bisect(field.max_abs(), grid.volume(), &modular_at, tol)
}

/// Shared bisection on a continuous, strictly decreasing modular-in-mu.
fn luxemburg_bisect(
    max_abs: f64,
    volume: f64,
    modular_at: &dyn Fn(f64) -> f64,
    tol: f64,
) -> Result<f64, Error> {
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("tolerance must be > 0, got {tol}")));
    }
    if max_abs == 0.0 {
        return Ok(0.0);
    }
    let mut lo = max_abs * BRACKET_LO_FACTOR;
    let mut hi = max_abs * (1.0 + volume);
    let mut expansions = 0;
    while modular_at(lo) <= 1.0 {
        hi = lo;
        lo /= BRACKET_GROWTH;
        expansions += 1;
        if expansions > BRACKET_MAX_EXPANSIONS || lo == 0.0 {
            return Err(Error::Bracket(format!(
                "no lower bracket below {lo:e} with modular above 1"
            )));
        }
    }
    expansions = 0;
    while modular_at(hi) > 1.0 {
        lo = hi;
        hi *= BRACKET_GROWTH;
        expansions += 1;
        if expansions > BRACKET_MAX_EXPANSIONS || !hi.is_finite() {
            return Err(Error::Bracket(format!(
                "no upper bracket above {hi:e} with modular at most 1"
            )));
        }
    }
    for _ in 0..BISECT_MAX_ITERATIONS {
        if hi - lo <= tol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if modular_at(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Hoelder pairing: returns (|integral of u v|, (1/p- + 1/p'-) |u|_p |v|_p').
/// The first component never exceeds the second.
pub fn holder_pairing(
    grid: &Grid,
    u: &GridFunction,
    v: &GridFunction,
    p: &ExponentField,
) -> Result<(f64, f64), Error> {
    let mut pairing = 0.0;
    for (flat, (&a, &b)) in u.values.iter().zip(v.values.iter()).enumerate() {
        pairing += grid.node_weight(flat) * a * b;
    }
    let conj = p.conjugate()?;
    let nu = luxemburg_norm(grid, u, p, DEFAULT_NORM_TOL)?;
    let nv = luxemburg_norm(grid, v, &conj, DEFAULT_NORM_TOL)?;
    let rhs = (1.0 / p.inf() + 1.0 / conj.inf()) * nu * nv;
    Ok((pairing.abs(), rhs))
}
