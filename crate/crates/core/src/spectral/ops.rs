use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::field::ScalarField;
use super::transform::{forward_transform, inverse_transform, Spectrum};

/// `|p|^{2s}`, with the value at the origin pinned to zero.
#[inline]
pub fn fractional_symbol(p: f64, s: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p.powf(2.0 * s)
    }
}

/// `|p|^{2 s1} + |p|^{2 s2}`, the symbol of `(-Delta)^{s1} + (-Delta)^{s2}`.
#[inline]
pub fn double_symbol(p: f64, s1: f64, s2: f64) -> f64 {
    fractional_symbol(p, s1) + fractional_symbol(p, s2)
}

pub(crate) fn check_order(s: f64) -> Result<()> {
    if s.is_finite() && s > 0.0 && s <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidOrder(format!("s = {s} is outside (0, 1]")))
    }
}

/// Applies `(-Delta)^s` for any `s > 0` (used for the `(1 + s2 - s1)` and
/// `(1 - s1)` powers that appear in the regularity identity).
pub fn apply_laplacian_power(spectrum: &Spectrum, s: f64) -> Spectrum {
    spectrum.map_radial(|p| fractional_symbol(p, s))
}

/// Multiplies every coefficient by `|p|^{2s}`; the zero mode is annihilated.
pub fn apply_fractional_symbol(spectrum: &Spectrum, s: f64) -> Result<Spectrum> {
    check_order(s)?;
    Ok(apply_laplacian_power(spectrum, s))
}

/// Spectrum of the whole-space convolution `h * g`, i.e.
/// `(2 pi)^{3/2} h^(p) g^(p)`.
pub fn convolve_spectra(h: &Spectrum, g: &Spectrum) -> Result<Spectrum> {
    Ok(h.multiply(g)?.scale((2.0 * PI).powf(1.5)))
}

/// `(h * g)(x) = \int h(x - y) g(y) dy` on the periodic box.
pub fn convolve(h: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    h.grid().ensure_same(g.grid())?;
    let spec = convolve_spectra(&forward_transform(h)?, &forward_transform(g)?)?;
    inverse_transform(&spec)
}
