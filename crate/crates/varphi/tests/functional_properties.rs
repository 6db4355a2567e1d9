//! Cross-family finite-difference validation of the first variations, the
//! quotient criticality identity, and the structural inequalities of the
//! energy functionals.

use varphi::functionals::ProblemSpec;
use varphi::grid::{Grid, GridFunction};
use varphi::lebesgue::{modular, ExponentField};
use varphi::young::YoungFunctionSpec;

fn problem_with(phi1: YoungFunctionSpec, phi2: YoungFunctionSpec, v_amp: f64) -> ProblemSpec {
    let grid = Grid::unit_box(2, 9).unwrap();
    let q1 = ExponentField::sample(&grid, |x| 2.0 + 0.2 * x[0]).unwrap();
    let q2 = ExponentField::sample(&grid, |x| 1.5 + 0.1 * x[1]).unwrap();
    let m = ExponentField::constant(&grid, 1.8).unwrap();
    let r = ExponentField::constant(&grid, 2.5).unwrap();
    let v = grid.sample(|x| v_amp * (5.0 * x[0] - 3.0 * x[1]).sin(), false);
    ProblemSpec::new(grid, phi1, phi2, q1, q2, m, r, v).unwrap()
}

fn perturbed(grid: &Grid, u: &GridFunction, v: &GridFunction, eps: f64) -> GridFunction {
    grid.function_from(
        u.values
            .iter()
            .zip(&v.values)
            .map(|(a, b)| a + eps * b)
            .collect(),
        true,
    )
    .unwrap()
}

/// Central finite differences reproduce both first variations across the
/// three analytic families.
#[test]
fn gateaux_matches_finite_differences_all_families() {
    let cases = [
        (
            YoungFunctionSpec::power(2.5).unwrap(),
            YoungFunctionSpec::power(1.3).unwrap(),
        ),
        (
            YoungFunctionSpec::log_power(2.0, 1.0).unwrap(),
            YoungFunctionSpec::power(1.4).unwrap(),
        ),
        (
            YoungFunctionSpec::power_over_log(3.0).unwrap(),
            YoungFunctionSpec::log_power(1.5, 0.5).unwrap(),
        ),
    ];
    let eps = 1e-6;
    for (phi1, phi2) in cases {
        let p = problem_with(phi1, phi2, -0.7);
        let grid = p.grid();
        for seed in 0..25 {
            let u = grid.random_test_function(2 * seed);
            let v = grid.random_test_function(2 * seed + 1);

            let fd_j = (p.j(&perturbed(grid, &u, &v, eps))
                - p.j(&perturbed(grid, &u, &v, -eps)))
                / (2.0 * eps);
            let an_j = p.gateaux_j(&u, &v);
            assert!(
                (fd_j - an_j).abs() <= 1e-5 * (1.0 + an_j.abs()),
                "seed {seed}: J' {an_j} vs FD {fd_j}"
            );

            let fd_i = (p.i(&perturbed(grid, &u, &v, eps))
                - p.i(&perturbed(grid, &u, &v, -eps)))
                / (2.0 * eps);
            let an_i = p.gateaux_i(&u, &v);
            assert!(
                (fd_i - an_i).abs() <= 1e-5 * (1.0 + an_i.abs()),
                "seed {seed}: I' {an_i} vs FD {fd_i}"
            );
        }
    }
}

/// d/deps of the quotient at eps = 0 equals the quotient-rule combination of
/// the two first variations.
#[test]
fn quotient_criticality_identity() {
    let p = problem_with(
        YoungFunctionSpec::power(2.5).unwrap(),
        YoungFunctionSpec::power(1.3).unwrap(),
        -0.4,
    );
    let grid = p.grid();
    let eps = 1e-6;
    for seed in 0..20 {
        let u = grid.random_test_function(100 + 2 * seed);
        let v = grid.random_test_function(101 + 2 * seed);
        let q = |w: &GridFunction| p.j(w) / p.i(w);
        let fd = (q(&perturbed(grid, &u, &v, eps)) - q(&perturbed(grid, &u, &v, -eps)))
            / (2.0 * eps);
        let iu = p.i(&u);
        let analytic = (p.gateaux_j(&u, &v) * iu - p.j(&u) * p.gateaux_i(&u, &v)) / (iu * iu);
        assert!(
            (fd - analytic).abs() <= 1e-5 * (1.0 + analytic.abs()),
            "seed {seed}: {analytic} vs {fd}"
        );
    }
}

/// J without potential is nonnegative and vanishes only at zero.
#[test]
fn potential_free_energy_positive() {
    let p = problem_with(
        YoungFunctionSpec::power(2.5).unwrap(),
        YoungFunctionSpec::power(1.3).unwrap(),
        0.0,
    );
    let grid = p.grid();
    assert_eq!(p.j(&grid.zero_function(true)), 0.0);
    for seed in 0..20 {
        let u = grid.random_test_function(500 + seed);
        assert!(p.j(&u) > 0.0);
    }
}

/// I dominates the first modular scaled by the reciprocal sup exponent.
#[test]
fn i_dominates_scaled_modular() {
    let p = problem_with(
        YoungFunctionSpec::power(2.5).unwrap(),
        YoungFunctionSpec::power(1.3).unwrap(),
        0.0,
    );
    let grid = p.grid();
    for seed in 0..20 {
        let u = grid.random_test_function(700 + seed);
        let bound = modular(grid, &u, p.q1()) / p.q1().sup();
        assert!(p.i(&u) >= bound * (1.0 - 1e-12));
    }
}

/// The threshold-quotient numerator dominates the index-weighted Phi sums:
/// t phi(t) >= (lower index) Phi(t) pointwise.
#[test]
fn threshold_numerator_dominates_energy() {
    let p = problem_with(
        YoungFunctionSpec::log_power(2.0, 1.0).unwrap(),
        YoungFunctionSpec::power(1.3).unwrap(),
        0.0,
    );
    let grid = p.grid();
    let (lo1, _) = p.phi1().indices().unwrap();
    let (lo2, _) = p.phi2().indices().unwrap();
    for seed in 0..20 {
        let u = grid.random_test_function(900 + seed);
        let b = p.rayleigh_b(&u).unwrap();
        let g = grid.gradient_magnitude(&u);
        let vol = grid.cell_volume();
        let mut bound = 0.0;
        for &t in &g.values {
            bound += vol
                * (lo1 * p.phi1().phi_capital(t).unwrap()
                    + lo2 * p.phi2().phi_capital(t).unwrap());
        }
        assert!(
            b.numerator >= bound * (1.0 - 1e-9),
            "numerator {} vs bound {bound}",
            b.numerator
        );
    }
}
