//! Continuum-normalized 3-D Fourier transforms on the periodic box.
//!
//! A [`Spectrum`] approximates
//! `phi^(p) = (2 pi)^{-3/2} \int phi(x) e^{-i p.x} dx`
//! by the Riemann sum `(2 pi)^{-3/2} h^3 sum_j phi(x_j) e^{-i p.x_j}`, and the
//! inverse uses the lattice weight `(2 pi / L)^3`, so that transforms of
//! smooth, decaying fields agree with their whole-space counterparts.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};

use super::field::ScalarField;
use super::grid::Grid3;

/// Largest admissible conjugate-symmetry defect, relative to the largest
/// coefficient magnitude, for a spectrum that is to be inverted to a real
/// field.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// `(2 pi)^{-3/2}`.
pub fn fourier_prefactor() -> f64 {
    (2.0 * PI).powf(-1.5)
}

type Plan = Arc<dyn Fft<f64>>;

struct PlanCache {
    planner: FftPlanner<f64>,
    plans: HashMap<(usize, bool), Plan>,
}

// Plans are immutable once built; the mutex only guards the planner and map.
fn plan(len: usize, direction: FftDirection) -> Plan {
    static CACHE: OnceLock<Mutex<PlanCache>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        Mutex::new(PlanCache {
            planner: FftPlanner::new(),
            plans: HashMap::new(),
        })
    });
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    let forward = matches!(direction, FftDirection::Forward);
    if let Some(p) = guard.plans.get(&(len, forward)) {
        return Arc::clone(p);
    }
    let p = guard.planner.plan_fft(len, direction);
    guard.plans.insert((len, forward), Arc::clone(&p));
    p
}

/// Unnormalized in-place 3-D FFT over row-major `n^3` data.
fn fft3_in_place(data: &mut [Complex64], n: usize, direction: FftDirection) {
    let fft = plan(n, direction);

    // z: contiguous lines.
    data.par_chunks_mut(n).for_each_init(
        || vec![Complex64::default(); fft.get_inplace_scratch_len()],
        |scratch, line| fft.process_with_scratch(line, scratch),
    );

    // y: stride n inside each x-slab.
    data.par_chunks_mut(n * n).for_each_init(
        || {
            (
                vec![Complex64::default(); n],
                vec![Complex64::default(); fft.get_inplace_scratch_len()],
            )
        },
        |(line, scratch), slab| {
            for iz in 0..n {
                for iy in 0..n {
                    line[iy] = slab[iy * n + iz];
                }
                fft.process_with_scratch(line, scratch);
                for iy in 0..n {
                    slab[iy * n + iz] = line[iy];
                }
            }
        },
    );

    // x: stride n^2; gather into contiguous lines first.
    let plane = n * n;
    let mut lines = vec![Complex64::default(); data.len()];
    lines
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(yz, line)| {
            for (ix, slot) in line.iter_mut().enumerate() {
                *slot = data[ix * plane + yz];
            }
        });
    lines.par_chunks_mut(n).for_each_init(
        || vec![Complex64::default(); fft.get_inplace_scratch_len()],
        |scratch, line| fft.process_with_scratch(line, scratch),
    );
    data.par_chunks_mut(plane)
        .enumerate()
        .for_each(|(ix, slab)| {
            for (yz, slot) in slab.iter_mut().enumerate() {
                *slot = lines[yz * n + ix];
            }
        });
}

#[inline]
fn checkerboard_sign(grid: &Grid3, flat: usize) -> f64 {
    let (ix, iy, iz) = grid.unravel(flat);
    if (ix + iy + iz) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Continuum-normalized Fourier coefficients on the lattice of a [`Grid3`],
/// in FFT storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid3,
    coefficients: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: Grid3, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coefficients.len()
            )));
        }
        Ok(Self { grid, coefficients })
    }

    pub fn zeros(grid: Grid3) -> Self {
        Self {
            grid,
            coefficients: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    /// Coefficient at the signed lattice index `(kx, ky, kz)`.
    pub fn coefficient(&self, kx: i64, ky: i64, kz: i64) -> Complex64 {
        let g = &self.grid;
        self.coefficients[g.index(g.storage_index(kx), g.storage_index(ky), g.storage_index(kz))]
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.coefficients[0]
    }

    /// Multiplies every coefficient by `symbol(|p|)`.
    pub fn map_radial(&self, symbol: impl Fn(f64) -> f64 + Sync) -> Self {
        let mags = self.grid.frequency_magnitudes();
        let coefficients = self
            .coefficients
            .par_iter()
            .zip(mags.par_iter())
            .map(|(c, &p)| c * symbol(p))
            .collect();
        Self {
            grid: self.grid,
            coefficients,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
        }
    }

    /// Pointwise product of coefficients.
    pub fn multiply(&self, other: &Spectrum) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            coefficients: self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn add(&self, other: &Spectrum) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            coefficients: self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// `sum |c(p)|^2 (2 pi / L)^3`, the lattice form of `||phi^||^2_{L^2}`.
    pub fn l2_norm_squared(&self) -> f64 {
        self.weighted_l2_norm_squared(|_| 1.0)
    }

    /// `sum w(|p|) |c(p)|^2 (2 pi / L)^3`.
    pub fn weighted_l2_norm_squared(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let mags = self.grid.frequency_magnitudes();
        let sum: f64 = self
            .coefficients
            .iter()
            .zip(&mags)
            .map(|(c, &p)| weight(p) * c.norm_sqr())
            .sum();
        sum * self.grid.frequency_cell_volume()
    }

    /// `max_p |c(-p) - conj(c(p))|` and `max_p |c(p)|`.
    pub fn conjugate_symmetry_defect(&self) -> (f64, f64) {
        let mut defect: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (flat, c) in self.coefficients.iter().enumerate() {
            let mirror = self.coefficients[self.grid.negated(flat)];
            defect = defect.max((mirror - c.conj()).norm());
            scale = scale.max(c.norm());
        }
        (defect, scale)
    }
}

/// Continuum-normalized forward transform.
pub fn forward_transform(field: &ScalarField) -> Result<Spectrum> {
    if let Some((index, &value)) = field
        .values()
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite())
    {
        return Err(Error::NonFinite { index, value });
    }
    let grid = *field.grid();
    let mut data: Vec<Complex64> = field
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft3_in_place(&mut data, grid.points_per_axis(), FftDirection::Forward);
    let norm = fourier_prefactor() * grid.cell_volume();
    for (flat, c) in data.iter_mut().enumerate() {
        *c *= norm * checkerboard_sign(&grid, flat);
    }
    Ok(Spectrum {
        grid,
        coefficients: data,
    })
}

/// Inverse of [`forward_transform`]. Rejects spectra whose conjugate symmetry
/// defect exceeds [`SYMMETRY_TOLERANCE`], since those cannot come from a real
/// field.
pub fn inverse_transform(spectrum: &Spectrum) -> Result<ScalarField> {
    let (defect, scale) = spectrum.conjugate_symmetry_defect();
    if defect > SYMMETRY_TOLERANCE * scale {
        return Err(Error::Asymmetric { defect, scale });
    }
    let grid = *spectrum.grid();
    let mut data: Vec<Complex64> = spectrum
        .coefficients
        .iter()
        .enumerate()
        .map(|(flat, c)| c * checkerboard_sign(&grid, flat))
        .collect();
    fft3_in_place(&mut data, grid.points_per_axis(), FftDirection::Inverse);
    let norm = fourier_prefactor() * grid.frequency_cell_volume();
    let values = data.into_iter().map(|c| c.re * norm).collect();
    ScalarField::new(grid, values)
}
