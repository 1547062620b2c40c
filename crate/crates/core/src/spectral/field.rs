use crate::error::{Error, Result};

use super::grid::Grid3;

/// Real samples on a [`Grid3`], row-major over `(x, y, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid3,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid3, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid3) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid3, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self::new(grid, values)
    }

    pub(crate) fn from_raw(grid: Grid3, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| v * factor).collect())
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &ScalarField, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        ))
    }
}

/// `N` scalar components on one shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("vector field needs at least one component".into()))?;
        for c in &components[1..] {
            first.grid().ensure_same(c.grid())?;
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: Grid3, n_components: usize) -> Self {
        Self {
            components: (0..n_components).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid3 {
        self.components[0].grid()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, m: usize) -> &ScalarField {
        &self.components[m]
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            components: self.components.iter().map(|c| c.scale(factor)).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> Result<Self> {
        self.zip_with(other, ScalarField::add)
    }

    pub fn sub(&self, other: &VectorField) -> Result<Self> {
        self.zip_with(other, ScalarField::sub)
    }

    fn zip_with(
        &self,
        other: &VectorField,
        op: impl Fn(&ScalarField, &ScalarField) -> Result<ScalarField>,
    ) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::GridMismatch(format!(
                "component count {} vs {}",
                self.len(),
                other.len()
            )));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| op(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { components })
    }

    /// Pointwise Euclidean length `|u(x)|` in `R^N`.
    pub fn pointwise_length(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.grid().len()];
        for c in &self.components {
            for (a, v) in acc.iter_mut().zip(c.values()) {
                *a += v * v;
            }
        }
        acc.into_iter().map(f64::sqrt).collect()
    }
}
