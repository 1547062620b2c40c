use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;

use super::field::{ScalarField, VectorField};
use super::grid::Grid3;
use super::norms::vector_h2_norm;
use super::transform::{forward_transform, inverse_transform};

/// Gaussian white noise filtered to `|p| <= cutoff`.
pub fn random_band_limited<R: Rng + ?Sized>(grid: Grid3, cutoff: f64, rng: &mut R) -> Result<ScalarField> {
    let noise: Vec<f64> = (0..grid.len()).map(|_| rng.sample(StandardNormal)).collect();
    let spectrum = forward_transform(&ScalarField::new(grid, noise)?)?;
    let filtered = spectrum.map_radial(|p| if p <= cutoff { 1.0 } else { 0.0 });
    inverse_transform(&filtered)
}

/// A random point of the ball `B_rho` in `H^2(R^3, R^N)`: band-limited to
/// half the Nyquist wavenumber and rescaled to a uniform radius in `(0, rho]`.
pub fn random_ball_sample<R: Rng + ?Sized>(
    grid: Grid3,
    n_components: usize,
    rho: f64,
    rng: &mut R,
) -> Result<VectorField> {
    let cutoff = 0.5 * grid.nyquist();
    let components = (0..n_components)
        .map(|_| random_band_limited(grid, cutoff, rng))
        .collect::<Result<Vec<_>>>()?;
    let v = VectorField::new(components)?;
    let norm = vector_h2_norm(&v)?;
    // 1 - U[0,1) lies in (0, 1].
    let radius = rho * (1.0 - rng.random::<f64>());
    Ok(v.scale(radius / norm))
}
