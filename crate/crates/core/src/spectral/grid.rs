use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic cube `[-L/2, L/2)^3` sampled with `n` points per axis.
///
/// Sample `j` along an axis sits at `-L/2 + j*h`. Frequency index `i` in
/// FFT storage order maps to the signed wavenumber `k = i` for `i < n/2` and
/// `k = i - n` otherwise, so the lattice is `p_k = 2*pi*k/L` with
/// `k in {-n/2, ..., n/2 - 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    box_length: f64,
    points_per_axis: usize,
    spacing: f64,
}

impl Grid3 {
    pub fn new(box_length: f64, points_per_axis: usize) -> Result<Self> {
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive and finite, got {box_length}"
            )));
        }
        if points_per_axis < 2 || !points_per_axis.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a positive even integer, got {points_per_axis}"
            )));
        }
        Ok(Self {
            box_length,
            points_per_axis,
            spacing: box_length / points_per_axis as f64,
        })
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total number of samples, `n^3`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h^3` of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(3)
    }

    /// Volume `(2*pi/L)^3` of one cell of the frequency lattice.
    pub fn frequency_cell_volume(&self) -> f64 {
        (2.0 * PI / self.box_length).powi(3)
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        let n = self.points_per_axis;
        (ix * n + iy) * n + iz
    }

    #[inline]
    pub fn unravel(&self, flat: usize) -> (usize, usize, usize) {
        let n = self.points_per_axis;
        (flat / (n * n), (flat / n) % n, flat % n)
    }

    #[inline]
    pub fn coordinate(&self, i: usize) -> f64 {
        -0.5 * self.box_length + i as f64 * self.spacing
    }

    pub fn position(&self, flat: usize) -> [f64; 3] {
        let (ix, iy, iz) = self.unravel(flat);
        [self.coordinate(ix), self.coordinate(iy), self.coordinate(iz)]
    }

    /// Signed wavenumber for storage index `i`.
    #[inline]
    pub fn signed_index(&self, i: usize) -> i64 {
        let n = self.points_per_axis;
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Storage index for a signed wavenumber, wrapping modulo `n`.
    #[inline]
    pub fn storage_index(&self, k: i64) -> usize {
        k.rem_euclid(self.points_per_axis as i64) as usize
    }

    #[inline]
    pub fn wavenumber(&self, i: usize) -> f64 {
        2.0 * PI * self.signed_index(i) as f64 / self.box_length
    }

    pub fn frequency(&self, flat: usize) -> [f64; 3] {
        let (ix, iy, iz) = self.unravel(flat);
        [self.wavenumber(ix), self.wavenumber(iy), self.wavenumber(iz)]
    }

    /// `|p|` at every lattice point, in storage order.
    pub fn frequency_magnitudes(&self) -> Vec<f64> {
        let n = self.points_per_axis;
        let axis: Vec<f64> = (0..n).map(|i| self.wavenumber(i)).collect();
        let mut out = Vec::with_capacity(self.len());
        for px in &axis {
            for py in &axis {
                for pz in &axis {
                    out.push((px * px + py * py + pz * pz).sqrt());
                }
            }
        }
        out
    }

    /// Magnitude of the Nyquist wavenumber `pi*n/L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.points_per_axis as f64 / self.box_length
    }

    /// Flat index of the mode `-p` for the mode stored at `flat`.
    pub fn negated(&self, flat: usize) -> usize {
        let n = self.points_per_axis;
        let (ix, iy, iz) = self.unravel(flat);
        let neg = |i: usize| (n - i) % n;
        self.index(neg(ix), neg(iy), neg(iz))
    }

    pub fn ensure_same(&self, other: &Grid3) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(L={}, n={}) vs (L={}, n={})",
                self.box_length, self.points_per_axis, other.box_length, other.points_per_axis
            )))
        }
    }
}
