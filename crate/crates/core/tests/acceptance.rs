//! Acceptance suite. Each test prints one `[PASS]`/`[FAIL]` line with the
//! measured quantities. Run with
//! `cargo test --test acceptance -- --nocapture --test-threads=1`.

mod common;

use std::f64::consts::PI;
use std::fs;
use std::process::Command;
use std::time::Instant;

use bifrac::bounds::{epsilon_threshold, phi, phi_minimum, sigma_value, BoundsContext};
use bifrac::contraction::*;
use bifrac::linear::*;
use bifrac::problem::{bundled_quadratics, ProblemSpec, CONTINUITY_PAIRS};
use bifrac::spectral::*;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian_at(grid: Grid3, c: [f64; 3]) -> ScalarField {
    ScalarField::from_fn(grid, |x| {
        (-((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2))).exp()
    })
    .unwrap()
}

/// Demo problem on an `n^3` grid at `eps = fraction * eps_max`.
fn demo_solver(n: usize, fraction: f64) -> FixedPointSolver {
    let p = ProblemSpec::demo().with_grid(Grid3::new(20.0, n).unwrap());
    let eps_max = FixedPointSolver::prepare(&p, 1.0, None).unwrap().context().unwrap().epsilon_max;
    FixedPointSolver::prepare(&p.with_epsilon(fraction * eps_max), 1.0, None).unwrap()
}

const OPTS: IterationOptions = IterationOptions {
    tol: 1e-10,
    max_iter: 200,
};

#[test]
fn criterion_01_phi_closed_form() {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..50 {
        for j in 0..50 {
            let alpha = 0.1 + (10.0 - 0.1) * i as f64 / 49.0;
            let s = 0.26 + (0.74 - 0.26) * j as f64 / 49.0;
            let (_, closed) = phi_minimum(alpha, s).unwrap();
            let (_, brute) = brute_minimum(|r| phi(alpha, s, r), 1e-3, 1e3);
            worst = worst.max(rel_err(closed, brute));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(
        "criterion 1 (phi minimum closed form)",
        worst <= 1e-8 && secs < 5.0,
        &format!("max rel err {worst:.2e} (tol 1e-8), {secs:.2}s (limit 5s)"),
    );
}

#[test]
fn criterion_02_spectral_fidelity() {
    let t = Instant::now();
    let grid = Grid3::new(20.0, 32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut round, mut planch) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let values: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = ScalarField::new(grid, values).unwrap();
        let spec = forward_transform(&f).unwrap();
        let back = inverse_transform(&spec).unwrap();
        round = round.max(l2_norm(&back.sub(&f).unwrap()) / l2_norm(&f));
        let spectral = spec.l2_norm_squared().sqrt();
        planch = planch.max(rel_err(spectral, l2_norm(&f)));
    }
    let g = Grid3::new(20.0, 64).unwrap();
    let spec = forward_transform(&gaussian_at(g, [0.0; 3])).unwrap();
    let gauss = spec
        .coefficients()
        .iter()
        .zip(g.frequency_magnitudes())
        .map(|(c, p)| (c - gaussian_hat(1.0, 1.0, p)).norm())
        .fold(0.0, f64::max);
    let secs = t.elapsed().as_secs_f64();
    verdict(
        "criterion 2 (spectral fidelity)",
        round <= 1e-12 && planch <= 1e-12 && gauss <= 1e-8 && secs < 30.0,
        &format!(
            "round trip {round:.2e}, Plancherel {planch:.2e} (tol 1e-12); Gaussian transform {gauss:.2e} (tol 1e-8); {secs:.2}s"
        ),
    );
}

#[test]
fn criterion_03_linear_solver_exactness() {
    let t = Instant::now();
    let (s1, s2) = (0.4, 0.8);
    let grid = Grid3::new(20.0, 64).unwrap();

    let k = 2.0 * PI / 20.0;
    let mut eigen = 0.0f64;
    for (a, b, c) in [(1.0f64, 0.0f64, 0.0f64), (2.0, -1.0, 3.0), (5.0, 5.0, 0.0)] {
        let p0 = k * (a * a + b * b + c * c).sqrt();
        let wave = ScalarField::from_fn(grid, |x| (k * (a * x[0] + b * x[1] + c * x[2])).cos()).unwrap();
        let u = solve_double_fractional(&wave.scale(double_symbol(p0, s1, s2)), s1, s2, ZeroModePolicy::Drop).unwrap();
        eigen = eigen.max(linf_norm(&u.sub(&wave).unwrap()));
    }

    let f = gaussian_at(grid, [0.0; 3]);
    let u = solve_double_fractional(&f, s1, s2, ZeroModePolicy::Drop).unwrap();
    let fh = forward_transform(&f).unwrap();
    let mut r = forward_transform(&apply_double_operator(&u, s1, s2).unwrap()).unwrap().add(&fh.scale(-1.0)).unwrap();
    r.coefficients_mut()[0] = Default::default();
    let residual = (r.l2_norm_squared() / fh.l2_norm_squared()).sqrt();

    let continuum = (4.0
        * PI
        * radial_integral(
            |p| p * p * gaussian_hat(1.0, 1.0, p).powi(2) / (p.powf(2.0 * s1) + p.powf(2.0 * s2)).powi(2),
            40.0,
        ))
    .sqrt();
    let torus = l2_norm(&u);
    let norm_err = rel_err(torus, continuum);
    let secs = t.elapsed().as_secs_f64();
    verdict(
        "criterion 3 (linear solver exactness)",
        eigen <= 1e-12 && residual <= 1e-12 && norm_err <= 0.02 && secs < 30.0,
        &format!(
            "eigenfunction err {eigen:.2e}, operator residual {residual:.2e} (tol 1e-12); \
             ||u|| torus {torus:.6} vs continuum {continuum:.6}: rel err {norm_err:.4} (tol 0.02); {secs:.2}s"
        ),
    );
}

#[test]
fn criterion_04_regularity_identity() {
    let t = Instant::now();
    let p = ProblemSpec::demo();
    let mut worst = 0.0f64;
    for m in 0..p.n_components {
        let f = p.influx_field(m).unwrap();
        let (s1, s2) = (p.orders.s1[m], p.orders.s2[m]);
        let u0 = solve_double_fractional(&f, s1, s2, ZeroModePolicy::Drop).unwrap();
        worst = worst.max(regularity_check(&u0, &f, s1, s2).unwrap());
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(
        "criterion 4 (regularity identity)",
        worst <= 1e-10 && secs < 10.0,
        &format!("max relative residual {worst:.2e} (tol 1e-10), {secs:.2}s"),
    );
}

#[test]
fn criterion_05_contraction() {
    let t = Instant::now();
    let solver = demo_solver(48, 0.9);
    let ctx = *solver.context().unwrap();
    let es = ctx.contraction_factor();
    let ratios = solver.contraction_ratios(20, 5).unwrap();
    let images = solver.self_map_norms(20, 6).unwrap();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let max_image = images.iter().copied().fold(0.0, f64::max);
    let secs = t.elapsed().as_secs_f64();
    verdict(
        "criterion 5 (strict contraction of B_rho)",
        max_ratio <= es && max_ratio < 1.0 && max_image <= ctx.rho && secs < 180.0,
        &format!(
            "max Lipschitz ratio {max_ratio:.3e} <= eps*sigma {es:.4}; max ||tau v|| {max_image:.3e} <= rho {}; {secs:.1}s",
            ctx.rho
        ),
    );
}

#[test]
fn criterion_06_fixed_point() {
    let t = Instant::now();
    let solver = demo_solver(64, 0.9);
    let es = solver.context().unwrap().contraction_factor();
    let r = solver.run(OPTS).unwrap();
    let geometric = r.step_norms.windows(2).all(|w| w[1] < w[0])
        && r.contraction_estimates.iter().all(|&q| q <= es);
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let start = random_ball_sample(solver.problem().grid, 2, 1.0, &mut rng).unwrap();
    let again = solver.run_from(start, OPTS).unwrap();
    let gap = vector_h2_norm(&again.u_p.sub(&r.u_p).unwrap()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    verdict(
        "criterion 6 (fixed point)",
        r.converged && geometric && r.final_residual <= 1e-8 && gap <= 1e-9 && secs < 180.0,
        &format!(
            "converged {} in {} its, step ratios {:?} <= {es:.4}, residual {:.2e} (tol 1e-8), restart gap {gap:.2e} (tol 1e-9), {secs:.1}s",
            r.converged,
            r.iterations,
            r.contraction_estimates.iter().map(|q| format!("{q:.2e}")).collect::<Vec<_>>(),
            r.final_residual
        ),
    );
}

#[test]
fn criterion_07_epsilon_scaling() {
    let t = Instant::now();
    let p = ProblemSpec::demo();
    let sweep = sweep_epsilon(&p, 1.0, &[0.125, 0.25, 0.5, 1.0], OPTS).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let converged = sweep.rows.iter().all(|r| r.converged);
    verdict(
        "criterion 7 (eps scaling of ||u_p||)",
        converged && (sweep.slope - 1.0).abs() <= 0.05 && secs < 600.0,
        &format!("log-log slope {:.5} (target 1.00 +- 0.05), all converged {converged}, {secs:.1}s", sweep.slope),
    );
}

#[test]
fn criterion_08_continuity() {
    let t = Instant::now();
    let p = ProblemSpec::demo();
    let q = bundled_quadratics();
    let mut lines = Vec::new();
    let mut ok = true;
    for &(a, b) in CONTINUITY_PAIRS.iter() {
        let out = continuity_experiment(&p, &q[a], &q[b], 1.0, OPTS).unwrap();
        ok &= out.holds();
        lines.push(format!("({a},{b}): {:.3e} <= {:.3e}", out.lhs, out.rhs));
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(
        "criterion 8 (continuity in g)",
        ok && secs < 600.0,
        &format!("{}; {secs:.1}s", lines.join(", ")),
    );
}

#[test]
fn criterion_09_solvability_regimes() {
    let t = Instant::now();
    let h = 20.0 / 64.0;
    let boxes = [10.0, 20.0, 40.0];
    let s2 = 0.95;
    let gauss = |g: &Grid3| Ok(gaussian_at(*g, [0.0; 3]));
    let dipole = |g: &Grid3| gaussian_at(*g, [1.0, 0.0, 0.0]).sub(&gaussian_at(*g, [-1.0, 0.0, 0.0]));

    let a = box_sweep(gauss, 0.85, s2, h, &boxes).unwrap();
    let b = box_sweep(dipole, 0.85, s2, h, &boxes).unwrap();
    let c = box_sweep(gauss, 0.5, s2, h, &boxes).unwrap();
    let target = 4.0 * 0.85 - 3.0;
    let a_ok = (a.fitted_exponent - target).abs() <= 0.25 * target;
    let b_ok = b.relative_changes.iter().all(|&d| d <= 0.05);
    let c_ok = c.relative_changes.iter().all(|&d| d <= 0.05);
    let secs = t.elapsed().as_secs_f64();
    let norms = |s: &BoxSweep| s.rows.iter().map(|r| format!("{:.4}", r.u_l2_squared)).collect::<Vec<_>>().join("/");
    verdict(
        "criterion 9 (solvability regimes under box growth)",
        a_ok && b_ok && c_ok && secs < 600.0,
        &format!(
            "(a) exponent {:.3} vs {target:.2} +- 25% [{}] ||u||^2 {}; (b) dipole changes {:?} (tol 0.05) [{}] ||u||^2 {}; \
             (c) s1=0.5 changes {:?} (tol 0.05) [{}] ||u||^2 {}; {secs:.1}s",
            a.fitted_exponent,
            if a_ok { "ok" } else { "fail" },
            norms(&a),
            b.relative_changes.iter().map(|d| format!("{d:.3}")).collect::<Vec<_>>(),
            if b_ok { "ok" } else { "fail" },
            norms(&b),
            c.relative_changes.iter().map(|d| format!("{d:.3}")).collect::<Vec<_>>(),
            if c_ok { "ok" } else { "fail" },
            norms(&c),
        ),
    );
}

#[test]
fn criterion_10_bounds_duality() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a = rng.random_range(0.2501..0.7499);
        let b = rng.random_range(0.2501..0.7499);
        let u0 = rng.random_range(0.0..20.0);
        let rho = rng.random_range(0.01..=1.0);
        let ctx = BoundsContext::assemble(
            u0,
            rng.random_range(0.01..50.0),
            rng.random_range(0.01..50.0),
            rng.random_range(0.01..50.0),
            f64::min(a, b),
            f64::max(a, b),
            rho,
            0.0,
        )
        .unwrap();
        let product = epsilon_threshold(&ctx, rho).unwrap() * sigma_value(&ctx).unwrap();
        worst = worst.max(rel_err(product, rho / (u0 + 1.0)));
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(
        "criterion 10 (threshold/sigma duality)",
        worst <= 1e-12 && secs < 1.0,
        &format!("max rel err {worst:.2e} (tol 1e-12), {secs:.4}s"),
    );
}

/// Removes the `"wall_clock_seconds":<number>` member from compact report text.
fn without_wall_clock(text: &str) -> String {
    let key = "\"wall_clock_seconds\":";
    let start = text.find(key).expect("report has a wall-clock field");
    let rest = &text[start + key.len()..];
    let end = rest.find([',', '}']).unwrap();
    format!("{}{}", &text[..start], &rest[end..])
}

#[test]
fn criterion_11_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/demo.json");
    let mut texts = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_bifrac"))
            .args(["solve", "--config", config, "--seed", "42", "--out", out.to_str().unwrap()])
            .status()
            .unwrap();
        assert!(status.success());
        texts.push(fs::read_to_string(out.join("report.json")).unwrap());
    }
    let same = without_wall_clock(&texts[0]) == without_wall_clock(&texts[1]);
    verdict(
        "criterion 11 (determinism of solve)",
        same,
        &format!("reports of {} bytes identical modulo wall clock: {same}", texts[0].len()),
    );
}
