mod common;

use std::f64::consts::PI;

use bifrac::bounds::c2_ball_norm;
use bifrac::contraction::*;
use bifrac::nonlinearity::{Monomial, Nonlinearity};
use bifrac::problem::{bundled_quadratics, load_problem, ProblemSpec, ValidationMode};
use bifrac::spectral::*;
use bifrac::Error;
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Demo problem on an `n^3` grid with `eps = fraction * eps_max` for that grid.
fn demo_at(n: usize, fraction: f64) -> (ProblemSpec, f64) {
    let p = ProblemSpec::demo().with_grid(Grid3::new(20.0, n).unwrap());
    let eps_max = FixedPointSolver::prepare(&p, 1.0, None).unwrap().context().unwrap().epsilon_max;
    (p.with_epsilon(fraction * eps_max), eps_max)
}

const OPTS: IterationOptions = IterationOptions {
    tol: 1e-10,
    max_iter: 200,
};

#[test]
fn tau_matches_real_space_oracle() {
    let text = r#"{"N":1,"grid":{"L":8.0,"n":16},"orders":{"s1":[0.4],"s2":[0.8]},"epsilon":[0.5],
        "kernels":[[{"A":1.0,"a":1.0,"center":[0,0,0]}]],"influxes":[[{"A":1.0,"a":1.0,"center":[0,0,0]}]],
        "g":[{"monomials":[{"powers":[2],"coeff":1.0}]}]}"#;
    let p = load_problem(text, ValidationMode::Nonlinear).unwrap();
    let grid = p.grid;
    let u0 = base_solution(&p).unwrap();
    let out = apply_tau(&VectorField::zeros(grid, 1), &p, &u0).unwrap();

    let n = 16;
    let g: Vec<f64> = u0.component(0).values().iter().map(|v| v * v).collect();
    let conv = periodic_convolution(p.kernel_field(0).unwrap().values(), &g, n, grid.spacing());
    // Explicit DFT, symbol division, explicit inverse DFT.
    let dp = 2.0 * PI / grid.box_length();
    let k_of = |i: usize| if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
    let mut expected = vec![0.0; n * n * n];
    for kx in 0..n {
        for ky in 0..n {
            for kz in 0..n {
                if kx + ky + kz == 0 {
                    continue;
                }
                let p_vec = [k_of(kx) * dp, k_of(ky) * dp, k_of(kz) * dp];
                let pn = (p_vec[0].powi(2) + p_vec[1].powi(2) + p_vec[2].powi(2)).sqrt();
                let (mut re, mut im) = (0.0, 0.0);
                for (j, v) in conv.iter().enumerate() {
                    let x = grid.position(j);
                    let ph = -(p_vec[0] * x[0] + p_vec[1] * x[1] + p_vec[2] * x[2]);
                    re += v * ph.cos();
                    im += v * ph.sin();
                }
                let sym = pn.powf(0.8) + pn.powf(1.6);
                let (re, im) = (0.5 * re / sym, 0.5 * im / sym);
                for (j, e) in expected.iter_mut().enumerate() {
                    let x = grid.position(j);
                    let ph = p_vec[0] * x[0] + p_vec[1] * x[1] + p_vec[2] * x[2];
                    *e += re * ph.cos() - im * ph.sin();
                }
            }
        }
    }
    let total = (n * n * n) as f64;
    let err: f64 = out.component(0).values().iter().zip(&expected).map(|(a, b)| (a - b / total).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = expected.iter().map(|b| (b / total).powi(2)).sum::<f64>().sqrt();
    assert!(err <= 0.01 * norm, "{err} vs {norm}");
}

#[test]
fn zero_coupling_and_zero_nonlinearity() {
    let (p, _) = demo_at(16, 0.0);
    let r = solve_fixed_point(&p, 1.0, 1e-10, 200).unwrap();
    assert_eq!(r.iterations, 1);
    assert_eq!(r.u, r.u0);
    assert!(system_residual(&r.u0, &p).unwrap() <= 1e-12);

    let (p, _) = demo_at(16, 0.9);
    let z = p.with_nonlinearity(Nonlinearity::zero(2));
    let u0 = base_solution(&z).unwrap();
    let out = apply_tau(&u0, &z, &u0).unwrap();
    assert!(out.components().iter().all(|c| c.values().iter().all(|&v| v == 0.0)));
}

#[test]
fn demo_fixed_point_properties() {
    let (p, _) = demo_at(32, 0.9);
    let solver = FixedPointSolver::prepare(&p, 1.0, None).unwrap();
    let ctx = *solver.context().unwrap();
    assert!(ctx.within_threshold());
    let r = solver.run(OPTS).unwrap();
    assert!(r.converged);
    assert!(r.final_residual <= 1e-8);
    assert!(r.final_residual <= 10.0 * OPTS.tol);
    assert!(r.contraction_estimates.iter().all(|&q| q <= ctx.contraction_factor()));
    assert!(vector_h2_norm(&r.u_p).unwrap() <= 1.0);
    assert_eq!(r.u, r.u0.add(&r.u_p).unwrap());
    assert!(vector_h2_norm(&r.u).unwrap() > 0.0);
    assert!(r.max_pointwise <= ctx.i_radius);

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..2 {
        let start = random_ball_sample(p.grid, 2, 1.0, &mut rng).unwrap();
        let again = solver.run_from(start, OPTS).unwrap();
        assert!(vector_h2_norm(&again.u_p.sub(&r.u_p).unwrap()).unwrap() <= 10.0 * OPTS.tol);
    }
}

/// Outside the certified range the iteration still contracts here; the step
/// ratio settles once the transient modes have decayed.
#[test]
fn step_ratio_stabilizes() {
    let (p, _) = demo_at(32, 90.0);
    let r = FixedPointSolver::prepare(&p, 1.0, None)
        .unwrap()
        .run(IterationOptions {
            tol: 1e-13,
            max_iter: 200,
        })
        .unwrap();
    assert!(r.converged);
    let tail = &r.contraction_estimates[5..r.contraction_estimates.len() - 1];
    let reference = tail[tail.len() - 1];
    for &q in tail {
        assert!((q / reference - 1.0).abs() <= 0.1, "{:?}", r.contraction_estimates);
    }
}

#[test]
fn ratios_deterministic_and_bounded() {
    let (p, _) = demo_at(32, 0.9);
    let solver = FixedPointSolver::prepare(&p, 1.0, None).unwrap();
    let es = solver.context().unwrap().contraction_factor();
    let u0 = solver.u0().clone();
    let a = measure_contraction(&p, &u0, 1.0, 4, 123).unwrap();
    let b = measure_contraction(&p, &u0, 1.0, 4, 123).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|&q| q.is_finite() && q <= es && q < 1.0));

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let v1 = random_ball_sample(p.grid, 2, 1.0, &mut rng).unwrap();
    let q = solver.ratio_for(&v1, &v1.scale(0.5)).unwrap();
    assert!(q.is_finite() && q <= es);
    assert!(solver.ratio_for(&v1, &v1).is_err());

    assert!(solver.self_map_norms(4, 9).unwrap().iter().all(|&n| n <= 1.0));
}

#[test]
fn residual_detects_perturbation() {
    let (p, _) = demo_at(32, 0.9);
    let r = solve_fixed_point(&p, 1.0, 1e-10, 200).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = VectorField::new(
        (0..2)
            .map(|m| {
                let n = random_band_limited(p.grid, p.grid.nyquist(), &mut rng).unwrap();
                n.scale(0.01 * l2_norm(r.u.component(m)) / l2_norm(&n))
            })
            .collect(),
    )
    .unwrap();
    assert!(system_residual(&r.u.add(&noise).unwrap(), &p).unwrap() >= 1e-3);
}

#[test]
fn continuity_cases() {
    let (p, _) = demo_at(32, 0.9);
    let g1 = p.nonlinearity.clone();
    let same = continuity_experiment(&p, &g1, &g1, 1.0, OPTS).unwrap();
    assert_eq!(same.lhs, 0.0);
    assert_eq!(same.rhs, 0.0);

    // A shared D_M for g and 1.1 g needs a smaller coupling than the demo's.
    let (p, _) = demo_at(32, 0.8);
    let scaled = continuity_experiment(&p, &g1, &g1.scale(1.1), 1.0, OPTS).unwrap();
    assert!(scaled.holds(), "{scaled:?}");

    let cubic = |c: f64| {
        let extra = Nonlinearity::new(vec![vec![Monomial::new(vec![3, 0], -c)], vec![]]).unwrap();
        g1.difference(&extra).unwrap()
    };
    let lo = continuity_experiment(&p, &g1, &cubic(0.01), 1.0, OPTS).unwrap();
    let hi = continuity_experiment(&p, &g1, &cubic(0.02), 1.0, OPTS).unwrap();
    assert!(lo.holds() && hi.holds());
    let ratio = hi.lhs / lo.lhs;
    assert!((ratio / 2.0 - 1.0).abs() <= 0.2, "{ratio}");
}

#[test]
fn bundled_pairs_share_a_ball() {
    let (p, _) = demo_at(16, 0.5);
    let u0_h2 = vector_h2_norm(&base_solution(&p).unwrap()).unwrap();
    let radius = ball_i_radius(u0_h2);
    for g in bundled_quadratics() {
        assert!(c2_ball_norm(&g, radius).unwrap() > 0.0);
    }
}

#[test]
fn excessive_coupling_reports_divergence() {
    let (p, _) = demo_at(16, 5000.0);
    match solve_fixed_point(&p, 1.0, 1e-10, 200) {
        Err(Error::Diverged { ratio, eps_sigma }) => {
            assert!(ratio > 1.0);
            assert!(eps_sigma > 1.0);
        }
        Err(Error::NonFinite { .. }) => {}
        other => panic!("expected divergence, got {:?}", other.map(|r| r.step_norms)),
    }
}

#[test]
fn sweep_slope_is_linear() {
    let (p, _) = demo_at(32, 0.9);
    let sweep = sweep_epsilon(&p, 1.0, &[0.125, 0.25, 0.5, 1.0], OPTS).unwrap();
    assert_eq!(sweep.rows.len(), 4);
    assert!(sweep.rows.iter().all(|r| r.converged));
    assert!((sweep.slope - 1.0).abs() <= 0.05, "{}", sweep.slope);
}
