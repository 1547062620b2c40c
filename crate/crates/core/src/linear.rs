//! The linear problem `[(-Delta)^{s1} + (-Delta)^{s2}] phi = f` solved by
//! symbol division, together with the solvability diagnostics that separate
//! the unconditional regime `s1 < 3/4` from the regime where `(f, 1) = 0` is
//! required.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::log_log_slope;
use crate::spectral::{
    apply_laplacian_power, double_symbol, forward_transform, inverse_transform, l2_norm, Grid3,
    ScalarField, Spectrum,
};

/// Relative size of `|f^(0)|` (against `||f||_{L^2}`) below which the
/// orthogonality condition counts as satisfied.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

/// Orders at or above this value need `(f, 1) = 0`.
pub const ORTHOGONALITY_THRESHOLD: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroModePolicy {
    /// Discard the `p = 0` coefficient (logged).
    Drop,
    /// Fail when `f` has a non-negligible mean.
    RejectIfNonzero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Unconditional,
    OrthogonalityRequired,
}

impl Regime {
    pub fn classify(s1: f64) -> Self {
        if s1 < ORTHOGONALITY_THRESHOLD {
            Regime::Unconditional
        } else {
            Regime::OrthogonalityRequired
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityReport {
    /// `(f, 1)_{L^2} = \int f dx`.
    pub mean_integral: f64,
    pub regime: Regime,
    pub orthogonality_residual: f64,
    /// Exponent `4 s1 - 3` of the growth of `||u||^2_{L^2}` with the box size
    /// when the condition fails and `s1 > 3/4`; zero otherwise.
    pub predicted_low_freq_growth: f64,
}

pub(crate) fn check_linear_orders(s1: f64, s2: f64) -> Result<()> {
    if s1.is_finite() && s2.is_finite() && 0.0 < s1 && s1 < s2 && s2 < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidOrder(format!(
            "linear problem needs 0 < s1 < s2 < 1, got s1 = {s1}, s2 = {s2}"
        )))
    }
}

/// Divides `f^` by the double symbol, zeroing the `p = 0` coefficient.
/// Returns the solution spectrum and the discarded zero-mode coefficient.
pub fn divide_by_symbol(f_hat: &Spectrum, s1: f64, s2: f64) -> (Spectrum, num_complex::Complex64) {
    let dropped = f_hat.zero_mode();
    let u_hat = f_hat.map_radial(|p| if p == 0.0 { 0.0 } else { 1.0 / double_symbol(p, s1, s2) });
    (u_hat, dropped)
}

pub fn solve_double_fractional(
    f: &ScalarField,
    s1: f64,
    s2: f64,
    policy: ZeroModePolicy,
) -> Result<ScalarField> {
    check_linear_orders(s1, s2)?;
    let f_hat = forward_transform(f)?;
    let zero = f_hat.zero_mode().norm();
    match policy {
        ZeroModePolicy::RejectIfNonzero => {
            let threshold = ORTHOGONALITY_TOLERANCE * l2_norm(f);
            if zero > threshold {
                return Err(Error::Orthogonality {
                    zero_mode: zero,
                    threshold,
                });
            }
        }
        ZeroModePolicy::Drop => {
            if zero > 0.0 {
                log::debug!("dropping zero mode |f^(0)| = {zero:e}");
            }
        }
    }
    let (u_hat, _) = divide_by_symbol(&f_hat, s1, s2);
    inverse_transform(&u_hat)
}

/// Applies `[(-Delta)^{s1} + (-Delta)^{s2}]` to a field.
pub fn apply_double_operator(u: &ScalarField, s1: f64, s2: f64) -> Result<ScalarField> {
    let u_hat = forward_transform(u)?;
    inverse_transform(&u_hat.map_radial(|p| double_symbol(p, s1, s2)))
}

pub fn solvability_report(f: &ScalarField, s1: f64) -> Result<SolvabilityReport> {
    if !(s1.is_finite() && 0.0 < s1 && s1 < 1.0) {
        return Err(Error::InvalidOrder(format!("s1 = {s1} is outside (0, 1)")));
    }
    let mean_integral = f.grid().cell_volume() * f.values().iter().sum::<f64>();
    let residual = mean_integral.abs();
    let regime = Regime::classify(s1);
    let violated = residual > ORTHOGONALITY_TOLERANCE * l2_norm(f);
    let growth = if s1 > ORTHOGONALITY_THRESHOLD && violated {
        4.0 * s1 - 3.0
    } else {
        0.0
    };
    Ok(SolvabilityReport {
        mean_integral,
        regime,
        orthogonality_residual: residual,
        predicted_low_freq_growth: growth,
    })
}

/// Relative `L^2` residual of
/// `[-Delta + (-Delta)^{1 + s2 - s1}] u0 = (-Delta)^{1 - s1} f`,
/// evaluated spectrally.
pub fn regularity_check(u0: &ScalarField, f: &ScalarField, s1: f64, s2: f64) -> Result<f64> {
    check_linear_orders(s1, s2)?;
    u0.grid().ensure_same(f.grid())?;
    let u_hat = forward_transform(u0)?;
    let lap_sq = u_hat.weighted_l2_norm_squared(|p| p.powi(4));
    if !lap_sq.is_finite() {
        return Err(Error::InvalidParameter("Delta u0 is not square integrable".into()));
    }
    let lhs = apply_laplacian_power(&u_hat, 1.0).add(&apply_laplacian_power(&u_hat, 1.0 + s2 - s1))?;
    let rhs = apply_laplacian_power(&forward_transform(f)?, 1.0 - s1);
    let diff = lhs.add(&rhs.scale(-1.0))?;
    let rhs_norm = rhs.l2_norm_squared().sqrt();
    let diff_norm = diff.l2_norm_squared().sqrt();
    Ok(if rhs_norm > 0.0 { diff_norm / rhs_norm } else { diff_norm })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSweepRow {
    pub box_length: f64,
    pub points_per_axis: usize,
    pub u_l2_squared: f64,
    pub mean_integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSweep {
    pub s1: f64,
    pub s2: f64,
    pub spacing: f64,
    pub rows: Vec<BoxSweepRow>,
    /// Least-squares slope of `ln ||u||^2` against `ln L`.
    pub fitted_exponent: f64,
    /// `|ratio - 1|` of `||u||^2` between consecutive boxes.
    pub relative_changes: Vec<f64>,
    /// Solvability of the right side on the largest box, where truncation
    /// of the profile is smallest.
    pub report: SolvabilityReport,
}

/// Solves the linear problem at fixed spacing on growing boxes and records
/// how `||u||^2_{L^2}` depends on the box size.
pub fn box_sweep(
    make_rhs: impl Fn(&Grid3) -> Result<ScalarField>,
    s1: f64,
    s2: f64,
    spacing: f64,
    boxes: &[f64],
) -> Result<BoxSweep> {
    check_linear_orders(s1, s2)?;
    let mut rows = Vec::with_capacity(boxes.len());
    let mut report = None;
    for &l in boxes {
        let n = (l / spacing).round() as usize;
        let grid = Grid3::new(l, n)?;
        let f = make_rhs(&grid)?;
        let rep = solvability_report(&f, s1)?;
        let (u_hat, _) = divide_by_symbol(&forward_transform(&f)?, s1, s2);
        rows.push(BoxSweepRow {
            box_length: l,
            points_per_axis: n,
            u_l2_squared: u_hat.l2_norm_squared(),
            mean_integral: rep.mean_integral,
        });
        report = Some(rep);
    }
    let ls: Vec<f64> = rows.iter().map(|r| r.box_length).collect();
    let norms: Vec<f64> = rows.iter().map(|r| r.u_l2_squared).collect();
    let relative_changes = norms.windows(2).map(|w| (w[1] / w[0] - 1.0).abs()).collect();
    Ok(BoxSweep {
        s1,
        s2,
        spacing,
        fitted_exponent: log_log_slope(&ls, &norms),
        relative_changes,
        report: report.ok_or_else(|| Error::InvalidParameter("box sweep needs at least one box".into()))?,
        rows,
    })
}
