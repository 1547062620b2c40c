//! Picard iteration of the map `v -> tau_g v`, where `u = tau_g v` solves
//! `[(-Delta)^{s1_m} + (-Delta)^{s2_m}] u_m = eps_m H_m * g_m(u0 + v)`,
//! together with the diagnostics that test its contraction and continuity
//! estimates.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{build_context, c2_ball_norm, continuity_rhs, embedding_constant, BoundsContext};
use crate::error::{Error, Result};
use crate::fit::log_log_slope;
use crate::linear::{divide_by_symbol, solve_double_fractional, ZeroModePolicy};
use crate::nonlinearity::Nonlinearity;
use crate::problem::ProblemSpec;
use crate::spectral::{
    double_symbol, forward_transform, inverse_transform, l2_norm, random_ball_sample, vector_h2_norm,
    Grid3, ScalarField, Spectrum, VectorField,
};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;

/// Consecutive step-norm increases treated as divergence.
const DIVERGENCE_RUN: usize = 5;

fn check_nonlinear_orders(problem: &ProblemSpec) -> Result<()> {
    for m in 0..problem.n_components {
        let (s1, s2) = (problem.orders.s1[m], problem.orders.s2[m]);
        if !(0.25 < s1 && s1 < 0.75 && s1 < s2 && s2 < 1.0) {
            return Err(Error::InvalidOrder(format!(
                "component {m}: s1 = {s1}, s2 = {s2} is outside the nonlinear existence window \
                 1/4 < s1 < 3/4, s1 < s2 < 1"
            )));
        }
    }
    Ok(())
}

/// `u0`: componentwise solution of the linear problem with right side `f_m`.
pub fn base_solution(problem: &ProblemSpec) -> Result<VectorField> {
    let components = (0..problem.n_components)
        .map(|m| {
            solve_double_fractional(
                &problem.influx_field(m)?,
                problem.orders.s1[m],
                problem.orders.s2[m],
                ZeroModePolicy::Drop,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(components)
}

/// `G_m(x) = g_m(w(x))` for every component.
pub fn evaluate_nonlinearity(g: &Nonlinearity, w: &VectorField) -> Result<Vec<ScalarField>> {
    let n = w.len();
    if g.n_components() != n {
        return Err(Error::InvalidParameter(format!(
            "nonlinearity has {} components, field has {n}",
            g.n_components()
        )));
    }
    let grid = *w.grid();
    (0..n)
        .map(|m| {
            let values: Vec<f64> = (0..grid.len())
                .into_par_iter()
                .map_init(
                    || vec![0.0; n],
                    |z, i| {
                        for (slot, c) in z.iter_mut().zip(w.components()) {
                            *slot = c.values()[i];
                        }
                        g.eval_component(m, z)
                    },
                )
                .collect();
            ScalarField::new(grid, values)
        })
        .collect()
}

/// The map `tau_g` with the kernel and symbol factors precomputed.
pub struct TauMap {
    grid: Grid3,
    u0: VectorField,
    g: Nonlinearity,
    /// `eps_m (2 pi)^{3/2} H_m^(p) / (|p|^{2 s1} + |p|^{2 s2})`, zero at `p = 0`.
    multipliers: Vec<Spectrum>,
}

impl TauMap {
    pub fn new(problem: &ProblemSpec, u0: VectorField) -> Result<Self> {
        check_nonlinear_orders(problem)?;
        problem.grid.ensure_same(u0.grid())?;
        if u0.len() != problem.n_components {
            return Err(Error::InvalidParameter("u0 has the wrong number of components".into()));
        }
        let conv = (2.0 * PI).powf(1.5);
        let multipliers = (0..problem.n_components)
            .map(|m| {
                let h_hat = forward_transform(&problem.kernel_field(m)?)?;
                let (div, _) = divide_by_symbol(&h_hat, problem.orders.s1[m], problem.orders.s2[m]);
                Ok(div.scale(problem.epsilon[m] * conv))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: problem.grid,
            u0,
            g: problem.nonlinearity.clone(),
            multipliers,
        })
    }

    pub fn u0(&self) -> &VectorField {
        &self.u0
    }

    pub fn with_nonlinearity(&self, g: Nonlinearity) -> Self {
        Self {
            grid: self.grid,
            u0: self.u0.clone(),
            g,
            multipliers: self.multipliers.clone(),
        }
    }

    pub fn apply(&self, v: &VectorField) -> Result<VectorField> {
        self.grid.ensure_same(v.grid())?;
        let w = self.u0.add(v)?;
        let terms = evaluate_nonlinearity(&self.g, &w)?;
        let components = terms
            .iter()
            .zip(&self.multipliers)
            .map(|(gm, mult)| inverse_transform(&forward_transform(gm)?.multiply(mult)?))
            .collect::<Result<Vec<_>>>()?;
        VectorField::new(components)
    }
}

/// One application of `tau_g` to `v`.
pub fn apply_tau(v: &VectorField, problem: &ProblemSpec, u0: &VectorField) -> Result<VectorField> {
    TauMap::new(problem, u0.clone())?.apply(v)
}

/// `sqrt(sum_m ||l_m u_m - eps_m H_m * g_m(u) - f_m||^2) / ||f||`, with the
/// zero mode excluded.
pub fn system_residual(u: &VectorField, problem: &ProblemSpec) -> Result<f64> {
    problem.grid.ensure_same(u.grid())?;
    let terms = evaluate_nonlinearity(&problem.nonlinearity, u)?;
    let conv = (2.0 * PI).powf(1.5);
    let mut num = 0.0;
    let mut den = 0.0;
    for m in 0..problem.n_components {
        let (s1, s2) = (problem.orders.s1[m], problem.orders.s2[m]);
        let f = problem.influx_field(m)?;
        den += l2_norm(&f).powi(2);
        let lu = forward_transform(u.component(m))?.map_radial(|p| double_symbol(p, s1, s2));
        let source = forward_transform(&problem.kernel_field(m)?)?
            .multiply(&forward_transform(&terms[m])?)?
            .scale(problem.epsilon[m] * conv);
        let mut r = lu.add(&source.add(&forward_transform(&f)?)?.scale(-1.0))?;
        r.coefficients_mut()[0] = Complex64::default();
        num += r.l2_norm_squared();
    }
    Ok(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() })
}

#[derive(Debug, Clone)]
pub struct FixedPointResult {
    pub u0: VectorField,
    pub u_p: VectorField,
    pub u: VectorField,
    pub iterations: usize,
    pub step_norms: Vec<f64>,
    pub contraction_estimates: Vec<f64>,
    pub final_residual: f64,
    pub converged: bool,
    /// Largest `|u0(x) + v(x)|` seen while evaluating `g`.
    pub max_pointwise: f64,
}

/// Serializable digest of a [`FixedPointResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSummary {
    pub converged: bool,
    pub iterations: usize,
    pub step_norms: Vec<f64>,
    pub contraction_estimates: Vec<f64>,
    pub final_residual: f64,
    pub u0_h2: f64,
    pub up_h2: f64,
    pub u_h2: f64,
    pub max_pointwise: f64,
}

impl FixedPointResult {
    pub fn summary(&self) -> Result<FixedPointSummary> {
        Ok(FixedPointSummary {
            converged: self.converged,
            iterations: self.iterations,
            step_norms: self.step_norms.clone(),
            contraction_estimates: self.contraction_estimates.clone(),
            final_residual: self.final_residual,
            u0_h2: vector_h2_norm(&self.u0)?,
            up_h2: vector_h2_norm(&self.u_p)?,
            u_h2: vector_h2_norm(&self.u)?,
            max_pointwise: self.max_pointwise,
        })
    }
}

/// Iteration settings.
#[derive(Debug, Clone, Copy)]
pub struct IterationOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// A prepared fixed-point problem: `u0`, `tau_g` and the bounds context.
pub struct FixedPointSolver {
    problem: ProblemSpec,
    tau: TauMap,
    context: Option<BoundsContext>,
}

impl FixedPointSolver {
    /// Solves for `u0` and assembles the bounds with `M` from the problem's
    /// nonlinearity (or `m_override`).
    pub fn prepare(problem: &ProblemSpec, rho: f64, m_override: Option<f64>) -> Result<Self> {
        let problem = ProblemSpec {
            rho,
            ..problem.clone()
        };
        check_nonlinear_orders(&problem)?;
        if !problem.influxes.iter().flatten().any(|s| s.amplitude != 0.0) {
            return Err(Error::InvalidParameter("all influxes vanish".into()));
        }
        let u0 = base_solution(&problem)?;
        let u0_h2 = vector_h2_norm(&u0)?;
        let context = match build_context(&problem, u0_h2, m_override) {
            Ok(ctx) => {
                if !ctx.within_threshold() {
                    log::warn!(
                        "eps = {:e} exceeds eps_max = {:e}; contraction is not guaranteed",
                        ctx.epsilon,
                        ctx.epsilon_max
                    );
                }
                Some(ctx)
            }
            Err(e) => {
                log::warn!("bounds unavailable: {e}");
                None
            }
        };
        let tau = TauMap::new(&problem, u0)?;
        Ok(Self {
            problem,
            tau,
            context,
        })
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn u0(&self) -> &VectorField {
        self.tau.u0()
    }

    pub fn tau(&self) -> &TauMap {
        &self.tau
    }

    pub fn context(&self) -> Option<&BoundsContext> {
        self.context.as_ref()
    }

    pub fn zero_start(&self) -> VectorField {
        VectorField::zeros(self.problem.grid, self.problem.n_components)
    }

    pub fn run(&self, opts: IterationOptions) -> Result<FixedPointResult> {
        self.run_from(self.zero_start(), opts)
    }

    pub fn run_from(&self, start: VectorField, opts: IterationOptions) -> Result<FixedPointResult> {
        let eps_sigma = self.context.map(|c| c.contraction_factor()).unwrap_or(f64::NAN);
        let i_radius = self.context.map(|c| c.i_radius).unwrap_or(f64::INFINITY);
        let u0 = self.tau.u0().clone();

        let mut v = start;
        let mut step_norms = Vec::new();
        let mut contraction_estimates = Vec::new();
        let mut increases = 0usize;
        let mut converged = false;
        let mut max_pointwise: f64 = 0.0;
        let mut iterations = 0;

        while iterations < opts.max_iter {
            let w = u0.add(&v)?;
            let peak = w.pointwise_length().into_iter().fold(0.0, f64::max);
            if peak > i_radius && peak > max_pointwise {
                log::warn!("|u0 + v| = {peak:.6e} leaves the ball I of radius {i_radius:.6e}");
            }
            max_pointwise = max_pointwise.max(peak);

            let next = self.tau.apply(&v)?;
            iterations += 1;
            let step = vector_h2_norm(&next.sub(&v)?)?;
            if let Some(&prev) = step_norms.last() {
                let ratio = if prev > 0.0 { step / prev } else { 0.0 };
                contraction_estimates.push(ratio);
                if step > prev {
                    increases += 1;
                    if increases >= DIVERGENCE_RUN {
                        return Err(Error::Diverged { ratio, eps_sigma });
                    }
                } else {
                    increases = 0;
                }
            }
            step_norms.push(step);
            v = next;
            if step <= opts.tol {
                converged = true;
                break;
            }
        }

        let u = u0.add(&v)?;
        let final_residual = system_residual(&u, &self.problem)?;
        if converged {
            let up = vector_h2_norm(&v)?;
            if up > self.problem.rho {
                log::warn!("||u_p|| = {up:e} exceeds rho = {}", self.problem.rho);
            }
        }
        Ok(FixedPointResult {
            u0,
            u_p: v,
            u,
            iterations,
            step_norms,
            contraction_estimates,
            final_residual,
            converged,
            max_pointwise,
        })
    }

    /// Lipschitz ratios `||tau v1 - tau v2|| / ||v1 - v2||` for random pairs
    /// in `B_rho`.
    pub fn contraction_ratios(&self, trials: usize, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (grid, n, rho) = (self.problem.grid, self.problem.n_components, self.problem.rho);
        let mut out = Vec::with_capacity(trials);
        for _ in 0..trials {
            let (v1, v2, diff) = loop {
                let v1 = random_ball_sample(grid, n, rho, &mut rng)?;
                let v2 = random_ball_sample(grid, n, rho, &mut rng)?;
                let diff = vector_h2_norm(&v1.sub(&v2)?)?;
                if diff > 0.0 {
                    break (v1, v2, diff);
                }
            };
            out.push(self.ratio(&v1, &v2, diff)?);
        }
        Ok(out)
    }

    pub fn ratio_for(&self, v1: &VectorField, v2: &VectorField) -> Result<f64> {
        let diff = vector_h2_norm(&v1.sub(v2)?)?;
        if diff == 0.0 {
            return Err(Error::InvalidParameter("ratio undefined for v1 = v2".into()));
        }
        self.ratio(v1, v2, diff)
    }

    fn ratio(&self, v1: &VectorField, v2: &VectorField, diff: f64) -> Result<f64> {
        let image = self.tau.apply(v1)?.sub(&self.tau.apply(v2)?)?;
        Ok(vector_h2_norm(&image)? / diff)
    }

    /// `||tau v||_{H^2}` for random `v` in `B_rho`.
    pub fn self_map_norms(&self, trials: usize, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..trials)
            .map(|_| {
                let v = random_ball_sample(self.problem.grid, self.problem.n_components, self.problem.rho, &mut rng)?;
                vector_h2_norm(&self.tau.apply(&v)?)
            })
            .collect()
    }
}

/// Picard iteration from `v = 0`.
pub fn solve_fixed_point(problem: &ProblemSpec, rho: f64, tol: f64, max_iter: usize) -> Result<FixedPointResult> {
    FixedPointSolver::prepare(problem, rho, None)?.run(IterationOptions { tol, max_iter })
}

/// Measured Lipschitz ratios of `tau_g` on random pairs from `B_rho`.
pub fn measure_contraction(
    problem: &ProblemSpec,
    u0: &VectorField,
    rho: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let problem = ProblemSpec {
        rho,
        ..problem.clone()
    };
    let solver = FixedPointSolver {
        tau: TauMap::new(&problem, u0.clone())?,
        context: None,
        problem,
    };
    solver.contraction_ratios(trials, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub g_diff_c2: f64,
    pub m_shared: f64,
    pub eps_sigma: f64,
    pub iterations: [usize; 2],
}

impl ContinuityOutcome {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// Solves the fixed point for `g1` and `g2` with a shared `u0` and compares
/// `||u_1 - u_2||_{H^2}` with the continuity bound.
pub fn continuity_experiment(
    problem: &ProblemSpec,
    g1: &Nonlinearity,
    g2: &Nonlinearity,
    rho: f64,
    opts: IterationOptions,
) -> Result<ContinuityOutcome> {
    let base = FixedPointSolver::prepare(&problem.with_nonlinearity(g1.clone()), rho, None)?;
    let ctx0 = base
        .context()
        .copied()
        .ok_or_else(|| Error::InvalidParameter("bounds unavailable for g1".into()))?;
    let m_shared = c2_ball_norm(g1, ctx0.i_radius)?.max(c2_ball_norm(g2, ctx0.i_radius)?);
    let u0_h2 = ctx0.u0_h2;
    let ctx = build_context(base.problem(), u0_h2, Some(m_shared))?;
    if !ctx.within_threshold() {
        return Err(Error::InvalidParameter(format!(
            "eps = {:e} exceeds the shared threshold {:e}",
            ctx.epsilon, ctx.epsilon_max
        )));
    }
    let solver_for = |g: &Nonlinearity| FixedPointSolver {
        problem: base.problem().with_nonlinearity(g.clone()),
        tau: base.tau().with_nonlinearity(g.clone()),
        context: Some(ctx),
    };
    let r1 = solver_for(g1).run(opts)?;
    let r2 = solver_for(g2).run(opts)?;
    if !(r1.converged && r2.converged) {
        let failed = if r1.converged { &r2 } else { &r1 };
        return Err(Error::NotConverged {
            iterations: failed.iterations,
            last_step: failed.step_norms.last().copied().unwrap_or(f64::NAN),
        });
    }
    let lhs = vector_h2_norm(&r1.u.sub(&r2.u)?)?;
    let g_diff_c2 = c2_ball_norm(&g1.difference(g2)?, ctx.i_radius)?;
    let rhs = continuity_rhs(&ctx, g_diff_c2)?;
    Ok(ContinuityOutcome {
        lhs,
        rhs,
        g_diff_c2,
        m_shared,
        eps_sigma: ctx.contraction_factor(),
        iterations: [r1.iterations, r2.iterations],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub up_h2_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSweep {
    pub epsilon_max: f64,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `ln ||u_p||_{H^2}` against `ln eps`.
    pub slope: f64,
}

/// Fixed points at `eps = fraction * eps_max` for each fraction; points run
/// concurrently.
pub fn sweep_epsilon(
    problem: &ProblemSpec,
    rho: f64,
    fractions: &[f64],
    opts: IterationOptions,
) -> Result<EpsilonSweep> {
    let base = FixedPointSolver::prepare(problem, rho, None)?;
    let ctx = base
        .context()
        .copied()
        .ok_or_else(|| Error::InvalidParameter("bounds unavailable".into()))?;
    let rows = fractions
        .par_iter()
        .map(|&frac| {
            let eps = frac * ctx.epsilon_max;
            let scaled = base.problem().with_epsilon(eps);
            let solver = FixedPointSolver {
                tau: TauMap::new(&scaled, base.u0().clone())?,
                context: Some(BoundsContext { epsilon: eps, ..ctx }),
                problem: scaled,
            };
            let r = solver.run(opts)?;
            Ok(SweepRow {
                epsilon: eps,
                up_h2_norm: vector_h2_norm(&r.u_p)?,
                iterations: r.iterations,
                converged: r.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.up_h2_norm).collect();
    Ok(EpsilonSweep {
        epsilon_max: ctx.epsilon_max,
        slope: log_log_slope(&xs, &ys),
        rows,
    })
}

/// Radius of the ball `I` for a given `||u0||_{H^2}`.
pub fn ball_i_radius(u0_h2: f64) -> f64 {
    embedding_constant() * (u0_h2 + 1.0)
}
