use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::field::{ScalarField, VectorField};
use super::ops::{check_order, fractional_symbol};
use super::transform::forward_transform;

/// Norms of a field. `h2` is `(||phi||^2 + ||Delta phi||^2)^{1/2}`; `hs` is the
/// `H^{2s}` norm `(||phi||^2 + ||(-Delta)^s phi||^2)^{1/2}` when an order was
/// requested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub h2: f64,
    pub hs: Option<f64>,
}

impl NormReport {
    pub const ZERO: NormReport = NormReport {
        l1: 0.0,
        l2: 0.0,
        linf: 0.0,
        h2: 0.0,
        hs: None,
    };
}

pub fn l1_norm(field: &ScalarField) -> f64 {
    field.grid().cell_volume() * field.values().iter().map(|v| v.abs()).sum::<f64>()
}

pub fn l2_norm(field: &ScalarField) -> f64 {
    (field.grid().cell_volume() * field.values().iter().map(|v| v * v).sum::<f64>()).sqrt()
}

pub fn linf_norm(field: &ScalarField) -> f64 {
    field.values().iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `||phi||_{H^2}` with the Laplacian evaluated spectrally.
pub fn h2_norm(field: &ScalarField) -> Result<f64> {
    Ok(field_norms(field, None)?.h2)
}

pub fn field_norms(field: &ScalarField, s: Option<f64>) -> Result<NormReport> {
    if let Some(s) = s {
        check_order(s)?;
    }
    let l2 = l2_norm(field);
    let spectrum = forward_transform(field)?;
    let lap_sq = spectrum.weighted_l2_norm_squared(|p| p.powi(4));
    let hs = s.map(|s| {
        let frac_sq = spectrum.weighted_l2_norm_squared(|p| fractional_symbol(p, s).powi(2));
        (l2 * l2 + frac_sq).sqrt()
    });
    Ok(NormReport {
        l1: l1_norm(field),
        l2,
        linf: linf_norm(field),
        h2: (l2 * l2 + lap_sq).sqrt(),
        hs,
    })
}

/// Norms of `u = (u_1, ..., u_N)`: `l1`, `l2` and `h2` are root-sum-squares
/// of the component norms, `linf` is `max_x |u(x)|_{R^N}`.
pub fn vector_norms(u: &VectorField) -> Result<NormReport> {
    if u.is_empty() {
        return Err(Error::InvalidParameter("vector field has no components".into()));
    }
    let (mut l1, mut l2, mut h2) = (0.0, 0.0, 0.0);
    for c in u.components() {
        let r = field_norms(c, None)?;
        l1 += r.l1 * r.l1;
        l2 += r.l2 * r.l2;
        h2 += r.h2 * r.h2;
    }
    let linf = u.pointwise_length().into_iter().fold(0.0, f64::max);
    Ok(NormReport {
        l1: l1.sqrt(),
        l2: l2.sqrt(),
        linf,
        h2: h2.sqrt(),
        hs: None,
    })
}

/// `||u||_{H^2(R^3, R^N)}`.
pub fn vector_h2_norm(u: &VectorField) -> Result<f64> {
    Ok(vector_norms(u)?.h2)
}
