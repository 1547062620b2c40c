//! Explicit constants of the existence and continuity estimates: the
//! minimizer of `alpha R^{3-4s} + R^{-4s}`, kernel constants `H` and `Q`,
//! the embedding constant, `C^2`-ball norms, the coupling threshold and the
//! contraction constant `sigma`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::problem::ProblemSpec;
use crate::spectral::{apply_laplacian_power, forward_transform, l1_norm};

/// Closed-form minimum of `phi(R) = alpha R^{3-4s} + R^{-4s}` over `R > 0`.
/// Returns `(R*, phi(R*))`.
pub fn phi_minimum(alpha: f64, s: f64) -> Result<(f64, f64)> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if !(s > 0.25 && s < 0.75) {
        return Err(Error::InvalidParameter(format!("s must lie in (1/4, 3/4), got {s}")));
    }
    let r_star = (4.0 * s / (alpha * (3.0 - 4.0 * s))).cbrt();
    let e = 4.0 * s / 3.0;
    let phi_star = 3.0 * (3.0 - 4.0 * s).powf(e - 1.0) * (4.0 * s).powf(-e) * alpha.powf(e);
    Ok((r_star, phi_star))
}

/// `phi(R)` itself.
pub fn phi(alpha: f64, s: f64, r: f64) -> f64 {
    alpha * r.powf(3.0 - 4.0 * s) + r.powf(-4.0 * s)
}

/// `(H, Q)` with `H^2 = sum_m ||H_m||^2_{L^1}` and
/// `Q^2 = sum_m ||(-Delta)^{1 - s1_m} H_m||^2_{L^2}`.
pub fn kernel_constants(problem: &ProblemSpec) -> Result<(f64, f64)> {
    let mut h2 = 0.0;
    let mut q2 = 0.0;
    for m in 0..problem.n_components {
        let kernel = problem.kernel_field(m)?;
        h2 += l1_norm(&kernel).powi(2);
        let filtered = apply_laplacian_power(&forward_transform(&kernel)?, 1.0 - problem.orders.s1[m]);
        q2 += filtered.l2_norm_squared();
    }
    if !(h2 > 0.0 && q2 > 0.0) {
        return Err(Error::DegenerateKernels(format!(
            "H^2 = {h2}, Q^2 = {q2}; some kernel must be nontrivial"
        )));
    }
    Ok((h2.sqrt(), q2.sqrt()))
}

/// `c_e = (2 pi)^{-3/2} (\int (1 + |p|^4)^{-1} dp)^{1/2}` with
/// `\int (1 + |p|^4)^{-1} dp = sqrt(2) pi^2`. Bounds `||phi||_inf` by
/// `c_e ||phi||_{H^2}` through Cauchy-Schwarz on `|phi^|`.
pub fn embedding_constant() -> f64 {
    (2.0 * PI).powf(-1.5) * (2f64.sqrt() * PI * PI).sqrt()
}

/// Upper bound on `||g||_{C^2(I, R^N)}` over the ball `|z| <= radius`.
pub fn c2_ball_norm(g: &Nonlinearity, radius: f64) -> Result<f64> {
    g.validate()?;
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {radius}")));
    }
    Ok(g.c2_bound(radius))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsContext {
    pub u0_h2: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub s1_min: f64,
    #[serde(rename = "S1_max")]
    pub s1_max: f64,
    pub rho: f64,
    pub c_e: f64,
    #[serde(rename = "I_radius")]
    pub i_radius: f64,
    pub epsilon_max: f64,
    pub sigma: f64,
    pub epsilon: f64,
}

impl BoundsContext {
    /// Fills in `c_e`, the radius of `I`, `epsilon_max` and `sigma` from the
    /// primary constants.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        u0_h2: f64,
        m: f64,
        h: f64,
        q: f64,
        s1_min: f64,
        s1_max: f64,
        rho: f64,
        epsilon: f64,
    ) -> Result<Self> {
        if !(0.25 < s1_min && s1_min <= s1_max && s1_max < 0.75) {
            return Err(Error::InvalidOrder(format!(
                "need 1/4 < s1_min <= S1_max < 3/4, got {s1_min}, {s1_max}"
            )));
        }
        if !(m > 0.0 && h > 0.0 && q > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "M, H, Q must be positive, got {m}, {h}, {q}"
            )));
        }
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidParameter(format!("rho must lie in (0, 1], got {rho}")));
        }
        let c_e = embedding_constant();
        let mut ctx = Self {
            u0_h2,
            m,
            h,
            q,
            s1_min,
            s1_max,
            rho,
            c_e,
            i_radius: c_e * (u0_h2 + 1.0),
            epsilon_max: f64::NAN,
            sigma: f64::NAN,
            epsilon,
        };
        ctx.epsilon_max = epsilon_threshold(&ctx, rho)?;
        ctx.sigma = sigma_value(&ctx)?;
        Ok(ctx)
    }

    /// `eps * sigma`, the certified contraction factor.
    pub fn contraction_factor(&self) -> f64 {
        self.epsilon * self.sigma
    }

    pub fn within_threshold(&self) -> bool {
        self.epsilon <= self.epsilon_max
    }
}

/// Bracket `H^2 (|u0|+1)^{8a/3 - 2} * 3 / ((3 - 4a)(2 pi^2)^{4b/3}(4b)^{4b/3}) + Q^2`
/// maximized over `a, b in {s1_min, S1_max}`.
///
/// Each exponent position takes whichever extreme order makes the term
/// largest, so the resulting threshold is sufficient for every component.
pub fn conservative_bracket(ctx: &BoundsContext) -> f64 {
    let base = ctx.u0_h2 + 1.0;
    let orders = [ctx.s1_min, ctx.s1_max];
    let mut best = f64::NEG_INFINITY;
    for &a in &orders {
        for &b in &orders {
            let e = 4.0 * b / 3.0;
            let term = ctx.h * ctx.h * base.powf(8.0 * a / 3.0 - 2.0) * 3.0
                / ((3.0 - 4.0 * a) * (2.0 * PI * PI).powf(e) * (4.0 * b).powf(e));
            best = best.max(term);
        }
    }
    best + ctx.q * ctx.q
}

/// Largest coupling `eps` for which the map is a strict contraction of
/// `B_rho` into itself.
pub fn epsilon_threshold(ctx: &BoundsContext, rho: f64) -> Result<f64> {
    let bracket = conservative_bracket(ctx);
    if !(bracket > 0.0) {
        return Err(Error::InvalidParameter(format!("nonpositive bracket {bracket}")));
    }
    Ok(rho / (ctx.m * (ctx.u0_h2 + 1.0).powi(2) * bracket.sqrt()))
}

/// `sigma = M (|u0| + 1) sqrt(bracket)`; the contraction factor is `eps sigma`.
pub fn sigma_value(ctx: &BoundsContext) -> Result<f64> {
    let bracket = conservative_bracket(ctx);
    if !(bracket > 0.0) {
        return Err(Error::InvalidParameter(format!("nonpositive bracket {bracket}")));
    }
    Ok(ctx.m * (ctx.u0_h2 + 1.0) * bracket.sqrt())
}

/// `eps sigma / (M (1 - eps sigma)) (|u0| + 1) ||g1 - g2||_{C^2}`.
pub fn continuity_rhs(ctx: &BoundsContext, g_diff_c2: f64) -> Result<f64> {
    let es = ctx.contraction_factor();
    if es >= 1.0 {
        return Err(Error::BoundVoid(es));
    }
    Ok(es / (ctx.m * (1.0 - es)) * (ctx.u0_h2 + 1.0) * g_diff_c2)
}

/// Builds the full context for a problem, with `M` taken as the
/// coefficient-rule `C^2` bound of its nonlinearity on `I` unless given.
pub fn build_context(problem: &ProblemSpec, u0_h2: f64, m_override: Option<f64>) -> Result<BoundsContext> {
    let (h, q) = kernel_constants(problem)?;
    let i_radius = embedding_constant() * (u0_h2 + 1.0);
    let m = match m_override {
        Some(m) => m,
        None => c2_ball_norm(&problem.nonlinearity, i_radius)?,
    };
    if m <= 0.0 {
        return Err(Error::InvalidParameter(
            "nonlinearity vanishes on I, so no ball D_M with M > 0 is determined".into(),
        ));
    }
    BoundsContext::assemble(
        u0_h2,
        m,
        h,
        q,
        problem.orders.s1_min(),
        problem.orders.s1_max(),
        problem.rho,
        problem.epsilon_max_component(),
    )
}
