//! The energy functionals J, I and T, their first variations, both Rayleigh
//! quotients, and the empirical potential-control constant.
//!
//! Gradient terms live on cells, zero-order terms on nodes, and every
//! variation formula below is the exact derivative of the corresponding
//! discrete energy, so finite-difference checks pass at machine level.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::Error;
use crate::grid::{Grid, GridFunction};
use crate::lebesgue::{luxemburg_norm, ExponentField, DEFAULT_NORM_TOL};
use crate::young::{check_conditions, ConditionReport, YoungFunctionSpec};

/// Magnitudes below this are treated as exact zero in the limit-safe
/// evaluations of a(t) t = phi(t) and |u|^{e-2} u.
const ZERO_BRANCH: f64 = 1e-300;

/// A full problem instance on one grid. The structural report is recomputed
/// at construction and travels with every solver result.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    grid: Grid,
    phi1: YoungFunctionSpec,
    phi2: YoungFunctionSpec,
    q1: ExponentField,
    q2: ExponentField,
    m: ExponentField,
    r: ExponentField,
    potential: GridFunction,
    condition_report: ConditionReport,
}

/// Numerator, denominator and their ratio for a Rayleigh-type quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotientValue {
    pub numerator: f64,
    pub denominator: f64,
    pub value: f64,
}

impl QuotientValue {
    fn new(numerator: f64, denominator: f64) -> Self {
        QuotientValue {
            numerator,
            denominator,
            value: numerator / denominator,
        }
    }
}

/// |u|^{e-2} u with the continuous zero extension at u = 0.
#[inline]
pub(crate) fn pow_signed(u: f64, e: f64) -> f64 {
    if u.abs() < ZERO_BRANCH {
        0.0
    } else {
        u.abs().powf(e - 2.0) * u
    }
}

#[allow(clippy::too_many_arguments)]
impl ProblemSpec {
    pub fn new(
        grid: Grid,
        phi1: YoungFunctionSpec,
        phi2: YoungFunctionSpec,
        q1: ExponentField,
        q2: ExponentField,
        m: ExponentField,
        r: ExponentField,
        potential: GridFunction,
    ) -> Result<Self, Error> {
        phi1.validate()?;
        phi2.validate()?;
        let n = grid.node_count();
        for (name, len) in [
            ("q1", q1.values().len()),
            ("q2", q2.values().len()),
            ("m", m.values().len()),
            ("r", r.values().len()),
            ("V", potential.values.len()),
        ] {
            if len != n {
                return Err(Error::Invalid(format!(
                    "field {name} has {len} values, grid has {n} nodes"
                )));
            }
        }
        let condition_report = check_conditions(&phi1, &phi2, &q1, &q2, &m, &r, grid.dimension());
        Ok(ProblemSpec {
            grid,
            phi1,
            phi2,
            q1,
            q2,
            m,
            r,
            potential,
            condition_report,
        })
    }

    /// Same instance with a different potential.
    pub fn with_potential(&self, potential: GridFunction) -> Result<Self, Error> {
        ProblemSpec::new(
            self.grid.clone(),
            self.phi1.clone(),
            self.phi2.clone(),
            self.q1.clone(),
            self.q2.clone(),
            self.m.clone(),
            self.r.clone(),
            potential,
        )
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn phi1(&self) -> &YoungFunctionSpec {
        &self.phi1
    }
    pub fn phi2(&self) -> &YoungFunctionSpec {
        &self.phi2
    }
    pub fn q1(&self) -> &ExponentField {
        &self.q1
    }
    pub fn q2(&self) -> &ExponentField {
        &self.q2
    }
    pub fn m(&self) -> &ExponentField {
        &self.m
    }
    pub fn r(&self) -> &ExponentField {
        &self.r
    }
    pub fn potential(&self) -> &GridFunction {
        &self.potential
    }
    pub fn condition_report(&self) -> &ConditionReport {
        &self.condition_report
    }

    /// J(u): both gradient energies plus the potential term
    /// integral of V/m |u|^m.
    pub fn j(&self, u: &GridFunction) -> f64 {
        let grad = self.gradient_value(u, |g| {
            self.phi1.phi_capital_lossy(g) + self.phi2.phi_capital_lossy(g)
        });
        grad + self.potential_term(u)
    }

    /// The potential part of J alone.
    pub fn potential_term(&self, u: &GridFunction) -> f64 {
        let mut acc = 0.0;
        for (flat, &v) in u.values.iter().enumerate() {
            let vx = self.potential.values[flat];
            if vx != 0.0 {
                let mx = self.m.values()[flat];
                acc += self.grid.node_weight(flat) * vx / mx * v.abs().powf(mx);
            }
        }
        acc
    }

    /// I(u): integral of |u|^{q1}/q1 + |u|^{q2}/q2.
    pub fn i(&self, u: &GridFunction) -> f64 {
        let mut acc = 0.0;
        for (flat, &v) in u.values.iter().enumerate() {
            let a = v.abs();
            if a == 0.0 {
                continue;
            }
            let q1 = self.q1.values()[flat];
            let q2 = self.q2.values()[flat];
            acc += self.grid.node_weight(flat) * (a.powf(q1) / q1 + a.powf(q2) / q2);
        }
        acc
    }

    /// T(u, lambda) = J(u) - lambda I(u).
    pub fn t(&self, u: &GridFunction, lambda: f64) -> f64 {
        self.j(u) - lambda * self.i(u)
    }

    /// First variation of J at u in direction v:
    /// integral of (a1+a2)(|grad u|) grad u . grad v plus the potential term,
    /// with a_i(t) = phi_i(t)/t extended by zero at t = 0.
    pub fn gateaux_j(&self, u: &GridFunction, v: &GridFunction) -> f64 {
        let mut gu = Vec::new();
        let mut gv = Vec::new();
        self.grid.gradient_vectors(u, &mut gu);
        self.grid.gradient_vectors(v, &mut gv);
        let d = self.grid.dimension();
        let vol = self.grid.cell_volume();
        let mut acc = 0.0;
        for (cu, cv) in gu.iter().zip(gv.iter()) {
            let mut dot = 0.0;
            let mut g2 = 0.0;
            for k in 0..d {
                dot += cu[k] * cv[k];
                g2 += cu[k] * cu[k];
            }
            let g = g2.sqrt();
            if g < ZERO_BRANCH {
                continue;
            }
            let a_sum = (self.phi1.phi_eval(g) + self.phi2.phi_eval(g)) / g;
            acc += vol * a_sum * dot;
        }
        for (flat, (&uv, &vv)) in u.values.iter().zip(v.values.iter()).enumerate() {
            let vx = self.potential.values[flat];
            if vx != 0.0 {
                let mx = self.m.values()[flat];
                acc += self.grid.node_weight(flat) * vx * pow_signed(uv, mx) * vv;
            }
        }
        acc
    }

    /// First variation of I at u in direction v.
    pub fn gateaux_i(&self, u: &GridFunction, v: &GridFunction) -> f64 {
        let mut acc = 0.0;
        for (flat, (&uv, &vv)) in u.values.iter().zip(v.values.iter()).enumerate() {
            let q1 = self.q1.values()[flat];
            let q2 = self.q2.values()[flat];
            acc += self.grid.node_weight(flat) * (pow_signed(uv, q1) + pow_signed(uv, q2)) * vv;
        }
        acc
    }

    /// The eigenvalue quotient J(u)/I(u).
    pub fn rayleigh_a(&self, u: &GridFunction) -> Result<QuotientValue, Error> {
        if u.is_zero() {
            return Err(Error::ZeroFunction("quotient undefined at zero"));
        }
        Ok(QuotientValue::new(self.j(u), self.i(u)))
    }

    /// The threshold quotient: numerator with phi_i(t) t in place of Phi_i and
    /// the plain V |u|^m term, denominator the plain sum of modulars.
    pub fn rayleigh_b(&self, u: &GridFunction) -> Result<QuotientValue, Error> {
        if u.is_zero() {
            return Err(Error::ZeroFunction("quotient undefined at zero"));
        }
        let (num, den) = self.b_parts(u);
        Ok(QuotientValue::new(num, den))
    }

    pub(crate) fn b_parts(&self, u: &GridFunction) -> (f64, f64) {
        let mut num =
            self.gradient_value(u, |g| (self.phi1.phi_eval(g) + self.phi2.phi_eval(g)) * g);
        let mut den = 0.0;
        for (flat, &v) in u.values.iter().enumerate() {
            let w = self.grid.node_weight(flat);
            let a = v.abs();
            if a == 0.0 {
                continue;
            }
            let mx = self.m.values()[flat];
            num += w * self.potential.values[flat] * a.powf(mx);
            den += w * (a.powf(self.q1.values()[flat]) + a.powf(self.q2.values()[flat]));
        }
        (num, den)
    }

    /// Parts of the auxiliary quotient: Phi-sum numerator and the
    /// integral of |u|^m / m denominator.
    pub(crate) fn m_parts(&self, u: &GridFunction) -> (f64, f64) {
        let num = self.gradient_value(u, |g| {
            self.phi1.phi_capital_lossy(g) + self.phi2.phi_capital_lossy(g)
        });
        let mut den = 0.0;
        for (flat, &v) in u.values.iter().enumerate() {
            let a = v.abs();
            if a == 0.0 {
                continue;
            }
            let mx = self.m.values()[flat];
            den += self.grid.node_weight(flat) * a.powf(mx) / mx;
        }
        (num, den)
    }

    /// Empirical lower estimate of a constant C with
    /// |int V/m |u|^m| <= eps int (Phi1+Phi2)(|grad u|) + C |V|_r int(|u|^{m-} + |u|^{m+}),
    /// maximized over `samples` random test functions.
    pub fn lemma1_empirical(
        &self,
        epsilon: f64,
        samples: usize,
        seed: u64,
    ) -> Result<f64, Error> {
        if samples == 0 {
            return Err(Error::Invalid("need at least one sample".into()));
        }
        if self.potential.is_zero() {
            return Ok(0.0);
        }
        let v_norm = luxemburg_norm(&self.grid, &self.potential, &self.r, DEFAULT_NORM_TOL)?;
        let m_lo = self.m.inf();
        let m_hi = self.m.sup();
        let mut best = f64::NEG_INFINITY;
        for s in 0..samples {
            let u = self.grid.random_test_function(seed.wrapping_add(s as u64));
            let pot = self.potential_term(&u).abs();
            let grad = self.gradient_value(&u, |g| {
                self.phi1.phi_capital_lossy(g) + self.phi2.phi_capital_lossy(g)
            });
            let mut mass = 0.0;
            for (flat, &uv) in u.values.iter().enumerate() {
                let a = uv.abs();
                mass += self.grid.node_weight(flat) * (a.powf(m_lo) + a.powf(m_hi));
            }
            let ratio = (pot - epsilon * grad) / (v_norm * mass);
            best = best.max(ratio);
        }
        Ok(best)
    }

    /// Sum over cells of vol * f(|grad u| on the cell).
    pub(crate) fn gradient_value(&self, u: &GridFunction, f: impl Fn(f64) -> f64) -> f64 {
        let mut vectors = Vec::new();
        self.grid.gradient_vectors(u, &mut vectors);
        let d = self.grid.dimension();
        let vol = self.grid.cell_volume();
        let mut acc = 0.0;
        for g in &vectors {
            let mut g2 = 0.0;
            for gk in g.iter().take(d) {
                g2 += gk * gk;
            }
            acc += f(g2.sqrt());
        }
        acc * vol
    }

    /// Scatter assembly of the gradient-part derivative: for a cell energy
    /// vol * f(g), `coef(g)` must return f'(g)/g; the result accumulates
    /// coef(g) * G_k dG_k/du over cells, with boundary entries zeroed.
    fn assemble_gradient_part(&self, u: &GridFunction, coef: impl Fn(f64) -> f64) -> Vec<f64> {
        let d = self.grid.dimension();
        let vol = self.grid.cell_volume();
        let edge_pairs = (1usize << (d - 1)) as f64;
        let h = self.grid.spacing();
        let mut vectors = Vec::new();
        self.grid.gradient_vectors(u, &mut vectors);
        let mut grad = vec![0.0f64; self.grid.node_count()];
        for (cell, g) in vectors.iter().enumerate() {
            let mut g2 = 0.0;
            for gk in g.iter().take(d) {
                g2 += gk * gk;
            }
            let mag = g2.sqrt();
            if mag < ZERO_BRANCH {
                continue;
            }
            let c = vol * coef(mag);
            let mut q = [0.0f64; 3];
            for k in 0..d {
                q[k] = c * g[k] / (edge_pairs * h[k]);
            }
            for (mask, corner) in self.grid.cell_corners(cell).into_iter().enumerate() {
                let mut contrib = 0.0;
                for (k, qk) in q.iter().enumerate().take(d) {
                    if mask & (1 << k) != 0 {
                        contrib += qk;
                    } else {
                        contrib -= qk;
                    }
                }
                grad[corner] += contrib;
            }
        }
        for flat in 0..grad.len() {
            if self.grid.is_boundary(flat) {
                grad[flat] = 0.0;
            }
        }
        grad
    }

    /// Nodal gradient of J with respect to interior nodal values.
    pub fn grad_j(&self, u: &GridFunction) -> Vec<f64> {
        let mut grad = self.assemble_gradient_part(u, |g| {
            (self.phi1.phi_eval(g) + self.phi2.phi_eval(g)) / g
        });
        for (flat, &uv) in u.values.iter().enumerate() {
            if self.grid.is_boundary(flat) {
                continue;
            }
            let vx = self.potential.values[flat];
            if vx != 0.0 {
                grad[flat] +=
                    self.grid.node_weight(flat) * vx * pow_signed(uv, self.m.values()[flat]);
            }
        }
        grad
    }

    /// Nodal gradient of I with respect to interior nodal values.
    pub fn grad_i(&self, u: &GridFunction) -> Vec<f64> {
        let mut grad = vec![0.0f64; self.grid.node_count()];
        for (flat, &uv) in u.values.iter().enumerate() {
            if self.grid.is_boundary(flat) {
                continue;
            }
            let q1 = self.q1.values()[flat];
            let q2 = self.q2.values()[flat];
            grad[flat] = self.grid.node_weight(flat) * (pow_signed(uv, q1) + pow_signed(uv, q2));
        }
        grad
    }

    /// Nodal gradients of the B-quotient numerator and denominator.
    pub(crate) fn grad_b(&self, u: &GridFunction) -> (Vec<f64>, Vec<f64>) {
        let mut gnum = self.assemble_gradient_part(u, |g| {
            let phi_sum = self.phi1.phi_eval(g) + self.phi2.phi_eval(g);
            let dphi_sum = self.phi1.phi_derivative(g) + self.phi2.phi_derivative(g);
            (dphi_sum * g + phi_sum) / g
        });
        let mut gden = vec![0.0f64; self.grid.node_count()];
        for (flat, &uv) in u.values.iter().enumerate() {
            if self.grid.is_boundary(flat) {
                continue;
            }
            let w = self.grid.node_weight(flat);
            let vx = self.potential.values[flat];
            let mx = self.m.values()[flat];
            if vx != 0.0 {
                gnum[flat] += w * vx * mx * pow_signed(uv, mx);
            }
            let q1 = self.q1.values()[flat];
            let q2 = self.q2.values()[flat];
            gden[flat] = w * (q1 * pow_signed(uv, q1) + q2 * pow_signed(uv, q2));
        }
        (gnum, gden)
    }

    /// Nodal gradients of the auxiliary quotient parts from `m_parts`.
    pub(crate) fn grad_m(&self, u: &GridFunction) -> (Vec<f64>, Vec<f64>) {
        let gnum = self.assemble_gradient_part(u, |g| {
            (self.phi1.phi_eval(g) + self.phi2.phi_eval(g)) / g
        });
        let mut gden = vec![0.0f64; self.grid.node_count()];
        for (flat, &uv) in u.values.iter().enumerate() {
            if self.grid.is_boundary(flat) {
                continue;
            }
            gden[flat] = self.grid.node_weight(flat) * pow_signed(uv, self.m.values()[flat]);
        }
        (gnum, gden)
    }
}
