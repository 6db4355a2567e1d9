//! Acceptance gate: one test per release criterion, each printing a single
//! PASS/FAIL line (visible with `--nocapture`). Tolerances are pinned here
//! and are not to be loosened without recording why.

use std::process::Command;

use varphi::eigensolve::{
    blowup_profile, lambda_m, minimize_rayleigh_a, minimize_rayleigh_a_seeded,
    minimize_rayleigh_b_seeded, solve_t_seeded, SolverOptions, TRIVIAL_THRESHOLD,
};
use varphi::functionals::ProblemSpec;
use varphi::grid::{Grid, GridFunction};
use varphi::lebesgue::{luxemburg_norm, modular, ExponentField, DEFAULT_NORM_TOL};
use varphi::potopt::{a_star, a_star_sweep, find_zero_radius, mu_set_function, BallSpec};
use varphi::young::{YoungFunctionSpec, SCAN_T_MAX, SCAN_T_MIN};

fn verdict(name: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("acceptance {name}: PASS");
    } else {
        println!("acceptance {name}: FAIL");
        panic!("{name}: {}", failures.join(" | "));
    }
}

fn check(failures: &mut Vec<String>, ok: bool, msg: impl FnOnce() -> String) {
    if !ok {
        failures.push(msg());
    }
}

/// The structural parameter set every condition holds for in three
/// dimensions; reused at several grid sizes.
fn conforming(grid: Grid, potential: GridFunction) -> ProblemSpec {
    ProblemSpec::new(
        grid.clone(),
        YoungFunctionSpec::power(2.5).unwrap(),
        YoungFunctionSpec::power(1.3).unwrap(),
        ExponentField::constant(&grid, 2.0).unwrap(),
        ExponentField::constant(&grid, 1.5).unwrap(),
        ExponentField::constant(&grid, 1.7).unwrap(),
        ExponentField::constant(&grid, 2.0).unwrap(),
        potential,
    )
    .unwrap()
}

fn bounded_random_potential(grid: &Grid, amplitude: f64, seed: u64) -> GridFunction {
    let raw = grid.random_test_function(seed);
    GridFunction {
        values: raw.values.iter().map(|x| x * amplitude).collect(),
        dirichlet_zero: false,
    }
}

/// Power 2 pair with every zero-order exponent equal to 2: the quotient is
/// scale-free and the discrete spectrum is known in closed form.
fn homogeneous_1d(nodes: usize) -> ProblemSpec {
    let grid = Grid::unit_box(1, nodes).unwrap();
    ProblemSpec::new(
        grid.clone(),
        YoungFunctionSpec::power(2.0).unwrap(),
        YoungFunctionSpec::power(2.0).unwrap(),
        ExponentField::constant(&grid, 2.0).unwrap(),
        ExponentField::constant(&grid, 2.0).unwrap(),
        ExponentField::constant(&grid, 2.0).unwrap(),
        ExponentField::constant(&grid, 2.0).unwrap(),
        grid.zero_function(false),
    )
    .unwrap()
}

#[test]
fn acceptance_young_growth_indices() {
    let mut failures = Vec::new();
    let cases: [(YoungFunctionSpec, f64, f64); 3] = [
        (YoungFunctionSpec::power(2.5).unwrap(), 2.5, 2.5),
        (YoungFunctionSpec::log_power(2.0, 0.8).unwrap(), 2.0, 2.0 + 0.8),
        (YoungFunctionSpec::power_over_log(2.6).unwrap(), 2.6 - 1.0, 2.6),
    ];
    for (k, (spec, lo_want, hi_want)) in cases.iter().enumerate() {
        let (lo, hi) = spec.indices().unwrap();
        check(&mut failures, lo == *lo_want && hi == *hi_want, || {
            format!("case {k}: indices ({lo}, {hi}) != ({lo_want}, {hi_want})")
        });

        // 4096 log-spaced abscissas over the full scan range.
        let (t0, t1) = (SCAN_T_MIN.ln(), SCAN_T_MAX.ln());
        let mut worst_low = f64::INFINITY;
        let mut worst_high = f64::NEG_INFINITY;
        for j in 0..4096 {
            let t = (t0 + (t1 - t0) * j as f64 / 4095.0).exp();
            let ratio = t * spec.phi_eval(t) / spec.phi_capital(t).unwrap();
            worst_low = worst_low.min(ratio);
            worst_high = worst_high.max(ratio);
        }
        check(
            &mut failures,
            worst_low >= lo - 1e-8 && worst_high <= hi + 1e-8,
            || format!("case {k}: sampled ratio range [{worst_low}, {worst_high}] outside [{lo}, {hi}]"),
        );
    }
    verdict("young_growth_indices", failures);
}

#[test]
fn acceptance_luxemburg_norm_relations() {
    let mut failures = Vec::new();

    // Constant function on a volume-3 box: |c|_p = |c| |Omega|^{1/p}.
    let grid = Grid::new(&[(0.0, 2.0), (0.0, 1.5)], &[17, 17]).unwrap();
    let p = 1.7;
    let q_const = ExponentField::constant(&grid, p).unwrap();
    let c = -2.3f64;
    let u_const = grid.sample(|_| c, false);
    let norm = luxemburg_norm(&grid, &u_const, &q_const, DEFAULT_NORM_TOL).unwrap();
    let want = c.abs() * 3.0f64.powf(1.0 / p);
    check(&mut failures, (norm - want).abs() <= 1e-8 * want, || {
        format!("constant norm {norm} != {want}")
    });

    // Modular/norm power bounds for 1000 random (u, q) pairs.
    let unit = Grid::unit_box(2, 9).unwrap();
    let tol = 1e-6;
    for k in 0..1000u64 {
        let phase = k as f64 * 0.37;
        let q = ExponentField::sample(&unit, |x| {
            1.1 + 1.4 * (x[0] * 2.1 + x[1] * 1.3 + phase).sin().abs()
        })
        .unwrap();
        let scale = 10f64.powf(((k % 41) as f64 / 40.0) * 4.0 - 2.0);
        let u = unit.random_test_function(k).scale(scale);
        if u.is_zero() {
            continue;
        }
        let n = luxemburg_norm(&unit, &u, &q, DEFAULT_NORM_TOL).unwrap();
        let rho = modular(&unit, &u, &q);
        let slack = tol * (1.0 + rho);
        let (lo_pow, hi_pow) = if n >= 1.0 {
            (q.inf(), q.sup())
        } else {
            (q.sup(), q.inf())
        };
        let lo_bound = n.powf(lo_pow);
        let hi_bound = n.powf(hi_pow);
        check(
            &mut failures,
            rho >= lo_bound - slack && rho <= hi_bound + slack,
            || format!("pair {k}: modular {rho} outside [{lo_bound}, {hi_bound}] at norm {n}"),
        );
        if failures.len() > 5 {
            break;
        }
    }
    verdict("luxemburg_norm_relations", failures);
}

#[test]
fn acceptance_gateaux_matches_finite_differences() {
    let mut failures = Vec::new();
    let grid = Grid::unit_box(2, 33).unwrap();
    let q1 = ExponentField::sample(&grid, |x| 2.0 + 0.2 * x[0]).unwrap();
    let q2 = ExponentField::sample(&grid, |x| 1.5 + 0.1 * x[1]).unwrap();
    let m = ExponentField::constant(&grid, 1.8).unwrap();
    let r = ExponentField::constant(&grid, 2.5).unwrap();
    let v_field = grid.sample(|x| 0.4 * (5.0 * x[0] - 3.0 * x[1]).sin(), false);

    let families: [(YoungFunctionSpec, YoungFunctionSpec); 3] = [
        (
            YoungFunctionSpec::power(2.5).unwrap(),
            YoungFunctionSpec::power(1.3).unwrap(),
        ),
        (
            YoungFunctionSpec::log_power(2.2, 0.6).unwrap(),
            YoungFunctionSpec::power(1.3).unwrap(),
        ),
        (
            YoungFunctionSpec::power_over_log(2.7).unwrap(),
            YoungFunctionSpec::log_power(1.4, 0.4).unwrap(),
        ),
    ];

    let eps = 1e-6;
    for (fam_idx, (phi1, phi2)) in families.iter().enumerate() {
        let problem = ProblemSpec::new(
            grid.clone(),
            phi1.clone(),
            phi2.clone(),
            q1.clone(),
            q2.clone(),
            m.clone(),
            r.clone(),
            v_field.clone(),
        )
        .unwrap();
        for k in 0..100u64 {
            let u = grid.random_test_function(10_000 + k);
            let v = grid.random_test_function(20_000 + k);
            let shift = |s: f64| {
                let vals = u
                    .values
                    .iter()
                    .zip(&v.values)
                    .map(|(a, b)| a + s * b)
                    .collect();
                grid.function_from(vals, true).unwrap()
            };
            let plus = shift(eps);
            let minus = shift(-eps);

            let fd_j = (problem.j(&plus) - problem.j(&minus)) / (2.0 * eps);
            let gt_j = problem.gateaux_j(&u, &v);
            let rel_j = (fd_j - gt_j).abs() / gt_j.abs().max(1e-12);
            check(&mut failures, rel_j < 1e-5, || {
                format!("family {fam_idx} pair {k}: J derivative rel err {rel_j:e}")
            });

            let fd_i = (problem.i(&plus) - problem.i(&minus)) / (2.0 * eps);
            let gt_i = problem.gateaux_i(&u, &v);
            let rel_i = (fd_i - gt_i).abs() / gt_i.abs().max(1e-12);
            check(&mut failures, rel_i < 1e-5, || {
                format!("family {fam_idx} pair {k}: I derivative rel err {rel_i:e}")
            });
            if failures.len() > 5 {
                break;
            }
        }
    }
    verdict("gateaux_matches_finite_differences", failures);
}

#[test]
fn acceptance_homogeneous_oracle_refinement() {
    let mut failures = Vec::new();
    let opts = SolverOptions {
        restarts: 2,
        ..SolverOptions::default()
    };

    // The smallest eigenvalue of the second-difference operator on n-1
    // interior nodes is (4/h^2) sin^2(pi h / 2); the quotient doubles it.
    let laplace_min = |nodes: usize| {
        let h = 1.0 / (nodes - 1) as f64;
        let s = (core::f64::consts::PI * h / 2.0).sin();
        4.0 / (h * h) * s * s
    };

    let a65 = minimize_rayleigh_a(&homogeneous_1d(65), &opts).unwrap();
    let oracle = 2.0 * laplace_min(65);
    let rel = (a65.value - oracle).abs() / oracle;
    check(&mut failures, rel <= 1e-6, || {
        format!("65-node value {} vs oracle {oracle}: rel {rel:e}", a65.value)
    });

    let continuum = 2.0 * core::f64::consts::PI * core::f64::consts::PI;
    let mut errors = Vec::new();
    for nodes in [65usize, 129, 257] {
        let a = minimize_rayleigh_a(&homogeneous_1d(nodes), &opts).unwrap();
        errors.push((a.value - continuum).abs());
    }
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        check(&mut failures, ratio > 3.5, || {
            format!("refinement not second order: errors {errors:?}")
        });
    }
    check(&mut failures, errors[2] < 1e-3 * continuum, || {
        format!("finest error {} too large", errors[2])
    });
    verdict("homogeneous_oracle_refinement", failures);
}

#[test]
fn acceptance_eigen_structure_3d() {
    let mut failures = Vec::new();
    let grid = Grid::unit_box(3, 17).unwrap();
    let problem = conforming(grid.clone(), bounded_random_potential(&grid, 0.3, 77));
    assert!(!problem.condition_report().relaxed_mode);

    let opts = SolverOptions {
        restarts: 2,
        grad_tol: 5e-5,
        max_iterations: 4000,
        ..SolverOptions::default()
    };
    let a = minimize_rayleigh_a(&problem, &opts).unwrap();
    check(&mut failures, a.residual < 1e-4, || {
        format!("A residual {} not below 1e-4", a.residual)
    });

    let b = minimize_rayleigh_b_seeded(&problem, &opts, std::slice::from_ref(&a.minimizer)).unwrap();
    check(&mut failures, b.value <= a.value + 1e-6, || {
        format!("B {} above A {}", b.value, a.value)
    });

    let above = solve_t_seeded(&problem, a.value + 0.5, &opts, std::slice::from_ref(&a.minimizer)).unwrap();
    check(&mut failures, above.value < 0.0, || {
        format!("T at A+0.5 is {}", above.value)
    });
    check(&mut failures, above.residual < 1e-4, || {
        format!("T residual {} not below 1e-4", above.residual)
    });
    check(
        &mut failures,
        above.minimizer.max_abs() > TRIVIAL_THRESHOLD,
        || "critical point above A is trivial".into(),
    );

    let eight = SolverOptions {
        restarts: 8,
        ..opts
    };
    let below = solve_t_seeded(&problem, b.value - 0.5, &eight, std::slice::from_ref(&a.minimizer)).unwrap();
    check(
        &mut failures,
        below.minimizer.max_abs() <= TRIVIAL_THRESHOLD,
        || {
            format!(
                "nontrivial iterate below B: sup {} value {}",
                below.minimizer.max_abs(),
                below.value
            )
        },
    );
    verdict("eigen_structure_3d", failures);
}

#[test]
fn acceptance_auxiliary_value_sign_flip() {
    let mut failures = Vec::new();
    let grid = Grid::unit_box(3, 9).unwrap();
    let problem = conforming(grid.clone(), grid.zero_function(false));
    let opts = SolverOptions {
        restarts: 2,
        ..SolverOptions::default()
    };

    let lm = lambda_m(&problem, &opts).unwrap();
    check(&mut failures, lm.value > 0.0, || {
        format!("auxiliary value {} not positive", lm.value)
    });

    let shifted = problem
        .with_potential(grid.sample(|_| -lm.value, false))
        .unwrap();
    let a = minimize_rayleigh_a_seeded(&shifted, &opts, std::slice::from_ref(&lm.minimizer)).unwrap();
    check(&mut failures, a.value <= 1e-6, || {
        format!("A under the shifted potential is {}", a.value)
    });
    check(&mut failures, a.value >= -1e-6, || {
        format!("A under the shifted potential dipped to {}", a.value)
    });
    verdict("auxiliary_value_sign_flip", failures);
}

#[test]
fn acceptance_lower_envelope_sweep() {
    let mut failures = Vec::new();
    let grid = Grid::unit_box(1, 65).unwrap();
    let problem = conforming(grid.clone(), grid.zero_function(false));
    let r_field = ExponentField::constant(&grid, 2.0).unwrap();
    let opts = SolverOptions {
        restarts: 2,
        max_iterations: 6000,
        ..SolverOptions::default()
    };

    let r_ref = 2.0;
    let radii: Vec<f64> = [0.0, 0.5, 1.0, 2.0, 4.0].iter().map(|s| s * r_ref).collect();
    let rows = a_star_sweep(&problem, &r_field, &radii, &opts).unwrap();

    check(&mut failures, rows[0].a_star > 0.0, || {
        format!("free value {} not positive", rows[0].a_star)
    });
    let slack = 2.0 * opts.grad_tol;
    for w in rows.windows(2) {
        check(&mut failures, w[1].a_star <= w[0].a_star + slack, || {
            format!("increase {} -> {}", w[0].a_star, w[1].a_star)
        });
    }

    // Continuity probe at two interior radii: halving the relative bump
    // must shrink the response.
    let value_at = |radius: f64| {
        let ball = BallSpec::new(radius, r_field.clone()).unwrap();
        a_star(&problem, &ball, &opts).unwrap().0
    };
    for radius in [2.0, 4.0] {
        let base = value_at(radius);
        let d_big = (value_at(radius * 1.1) - base).abs();
        let d_small = (value_at(radius * 1.05) - base).abs();
        check(&mut failures, d_small < d_big, || {
            format!("probe at {radius}: halving ratio {}", d_small / d_big)
        });
    }

    let r0 = find_zero_radius(&problem, &r_field, 30.0, &opts).unwrap();
    let at_zero = value_at(r0).abs();
    let budget = 1e-3 * rows[0].a_star;
    check(&mut failures, at_zero < budget, || {
        format!("|a_star({r0})| = {at_zero} not below {budget}")
    });

    let mut last_mu = f64::NEG_INFINITY;
    for radius in [r0, 1.2 * r0, 1.5 * r0] {
        let mu = mu_set_function(&problem, &r_field, radius, r0, &opts).unwrap();
        check(&mut failures, mu >= last_mu - slack, || {
            format!("set function fell: {mu} after {last_mu}")
        });
        last_mu = mu;
    }
    verdict("lower_envelope_sweep", failures);
}

#[test]
fn acceptance_homogeneous_radius_decrement() {
    let mut failures = Vec::new();
    let grid = Grid::unit_box(1, 33).unwrap();
    let q = 2.0;
    let problem = ProblemSpec::new(
        grid.clone(),
        YoungFunctionSpec::power(2.0).unwrap(),
        YoungFunctionSpec::power(2.0).unwrap(),
        ExponentField::constant(&grid, q).unwrap(),
        ExponentField::constant(&grid, q).unwrap(),
        ExponentField::constant(&grid, q).unwrap(),
        ExponentField::constant(&grid, 2.0).unwrap(),
        grid.zero_function(false),
    )
    .unwrap();
    let r_field = ExponentField::constant(&grid, 2.0).unwrap();
    let opts = SolverOptions {
        restarts: 2,
        ..SolverOptions::default()
    };
    let rows = a_star_sweep(&problem, &r_field, &[1.0, 2.0], &opts).unwrap();
    let decrement = rows[0].a_star - rows[1].a_star;
    let (r1, r2) = (1.0, 2.0);
    check(&mut failures, decrement >= (r2 - r1) / 2.0 - 1e-4, || {
        format!(
            "decrement {decrement} below {} (values {} -> {})",
            (r2 - r1) / 2.0 - 1e-4,
            rows[0].a_star,
            rows[1].a_star
        )
    });
    verdict("homogeneous_radius_decrement", failures);
}

/// The quotient along t*u must leave any bounded window as t -> 0 or
/// t -> infinity; the pinned factor at t = 1e-3 is stricter than the
/// structural growth of this parameter set allows, and the shortfall is
/// reported rather than papered over.
#[test]
fn acceptance_blowup_profile() {
    let mut failures = Vec::new();
    let grid = Grid::unit_box(1, 33).unwrap();
    let problem = conforming(grid.clone(), bounded_random_potential(&grid, 0.3, 77));
    let opts = SolverOptions {
        restarts: 2,
        ..SolverOptions::default()
    };
    let a = minimize_rayleigh_a(&problem, &opts).unwrap();
    let profile = blowup_profile(&problem, &a.minimizer, &[1e-3, 1e3]).unwrap();
    for (t, point) in [1e-3, 1e3].iter().zip(&profile) {
        let factor = point.value / a.value;
        check(&mut failures, factor > 10.0, || {
            format!("factor at t={t} is {factor} (quotient {} vs minimum {})", point.value, a.value)
        });
    }
    verdict("blowup_profile", failures);
}

#[test]
fn acceptance_cli_byte_determinism() {
    let mut failures = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        r#"
seed = 4242

[grid]
nodes = [17]

[phi1]
family = "power"
p = 2.0

[phi2]
family = "power"
p = 2.0

[exponents]
q1 = 2.0
q2 = 2.0
m = 2.0
r = 2.0

[solver]
restarts = 2

[sweep]
radii = [0.0, 0.5]
probe = { radius = 0.5, deltas = [0.2, 0.1] }
"#,
    )
    .unwrap();

    let run = |cmd: &str, out_name: &str| {
        let out_dir = dir.path().join(out_name);
        let output = Command::new(env!("CARGO_BIN_EXE_varphi-cli"))
            .arg(cmd)
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&out_dir)
            .arg("--emit-minimizer")
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "{cmd}: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        let mut bytes = output.stdout;
        let mut names: Vec<_> = std::fs::read_dir(&out_dir)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        for name in names {
            bytes.extend_from_slice(&std::fs::read(out_dir.join(name)).unwrap());
        }
        bytes
    };

    for cmd in ["eig", "sweep"] {
        let first = run(cmd, &format!("{cmd}-first"));
        let second = run(cmd, &format!("{cmd}-second"));
        check(&mut failures, first == second, || {
            format!("{cmd}: outputs differ between identical runs")
        });
    }
    verdict("cli_byte_determinism", failures);
}
