//! Problem instances: fractional orders, Gaussian kernels and influxes,
//! polynomial nonlinearities and couplings, plus their JSON form.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{Monomial, Nonlinearity};
use crate::spectral::{Grid3, ScalarField};

pub const DEFAULT_BOX_LENGTH: f64 = 20.0;
pub const DEFAULT_POINTS_PER_AXIS: usize = 64;
pub const DEFAULT_RHO: f64 = 1.0;

/// Checked-in demo configuration.
pub const DEMO_CONFIG: &str = include_str!("../configs/demo.json");

/// `A exp(-a |x - c|^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    #[serde(rename = "A")]
    pub amplitude: f64,
    #[serde(rename = "a")]
    pub width: f64,
    pub center: [f64; 3],
}

impl GaussianSpec {
    pub fn new(amplitude: f64, width: f64, center: [f64; 3]) -> Self {
        Self {
            amplitude,
            width,
            center,
        }
    }

    pub fn centered(amplitude: f64, width: f64) -> Self {
        Self::new(amplitude, width, [0.0; 3])
    }

    #[inline]
    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let r2: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum();
        self.amplitude * (-self.width * r2).exp()
    }

    /// `\int A e^{-a|x-c|^2} dx = A (pi/a)^{3/2}`.
    pub fn integral(&self) -> f64 {
        self.amplitude * (PI / self.width).powf(1.5)
    }

    pub fn l1_norm(&self) -> f64 {
        self.integral().abs()
    }

    /// Whole-space transform `A (2a)^{-3/2} e^{-|p|^2/(4a)} e^{-i p.c}`.
    pub fn transform(&self, p: [f64; 3]) -> Complex64 {
        let p2: f64 = p.iter().map(|v| v * v).sum();
        let phase: f64 = p.iter().zip(&self.center).map(|(a, b)| a * b).sum();
        let mag = self.amplitude * (2.0 * self.width).powf(-1.5) * (-p2 / (4.0 * self.width)).exp();
        Complex64::from_polar(mag, -phase)
    }

    /// Smallest distance from the center to a face of the box.
    pub fn clearance(&self, grid: &Grid3) -> f64 {
        let half = 0.5 * grid.box_length();
        self.center
            .iter()
            .map(|c| (half - c).min(c + half))
            .fold(f64::INFINITY, f64::min)
    }

    /// Upper estimate of the mass lying outside the box, from
    /// `erfc(x) <= exp(-x^2)` on each face.
    pub fn truncation_mass(&self, grid: &Grid3) -> f64 {
        let half = 0.5 * grid.box_length();
        let per_face: f64 = self
            .center
            .iter()
            .flat_map(|c| [half - c, c + half])
            .map(|d| 0.5 * (-self.width * d.max(0.0).powi(2)).exp())
            .sum();
        self.l1_norm() * per_face
    }

    fn validate(&self, path: &str) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::config(format!("{path}.a"), "width must be positive"));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::config(format!("{path}.A"), "amplitude must be finite"));
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::config(format!("{path}.center"), "center must be finite"));
        }
        Ok(())
    }
}

/// Samples a Gaussian on the grid, warning when it sits closer than
/// `3/sqrt(a)` to a face.
pub fn realize_gaussian(spec: &GaussianSpec, grid: &Grid3) -> Result<ScalarField> {
    realize_sum(std::slice::from_ref(spec), grid)
}

/// Samples a finite sum of Gaussians.
pub fn realize_sum(specs: &[GaussianSpec], grid: &Grid3) -> Result<ScalarField> {
    for s in specs {
        if s.amplitude != 0.0 && s.clearance(grid) < 3.0 / s.width.sqrt() {
            log::warn!(
                "gaussian centered at {:?} (a = {}) is within 3/sqrt(a) of the box face; estimated truncated mass {:e}",
                s.center,
                s.width,
                s.truncation_mass(grid)
            );
        }
    }
    ScalarField::from_fn(*grid, |x| specs.iter().map(|s| s.eval(x)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalOrders {
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
}

impl FractionalOrders {
    /// `min_m s1[m]`.
    pub fn s1_min(&self) -> f64 {
        self.s1.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max_m s1[m]`.
    pub fn s1_max(&self) -> f64 {
        self.s1.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Which order window a configuration is validated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationMode {
    /// `1/4 < s1 < 3/4`, `s1 < s2 < 1` for every component.
    Nonlinear,
    /// `0 < s1 < s2 < 1`: enough for the linear problem alone.
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub n_components: usize,
    pub orders: FractionalOrders,
    pub epsilon: Vec<f64>,
    /// Diffusion coefficients; always 1.
    pub diffusion: Vec<f64>,
    pub kernels: Vec<Vec<GaussianSpec>>,
    pub influxes: Vec<Vec<GaussianSpec>>,
    pub nonlinearity: Nonlinearity,
    pub grid: Grid3,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L", default = "default_box")]
    pub box_length: f64,
    #[serde(default = "default_points")]
    pub n: usize,
}

fn default_box() -> f64 {
    DEFAULT_BOX_LENGTH
}

fn default_points() -> usize {
    DEFAULT_POINTS_PER_AXIS
}

fn default_rho() -> f64 {
    DEFAULT_RHO
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            box_length: DEFAULT_BOX_LENGTH,
            n: DEFAULT_POINTS_PER_AXIS,
        }
    }
}

/// On-disk JSON layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default)]
    pub grid: GridConfig,
    pub orders: FractionalOrders,
    pub epsilon: Vec<f64>,
    pub kernels: Vec<Vec<GaussianSpec>>,
    pub influxes: Vec<Vec<GaussianSpec>>,
    pub g: Nonlinearity,
    #[serde(default = "default_rho")]
    pub rho: f64,
}

fn check_len<T>(items: &[T], n: usize, path: &str) -> Result<()> {
    if items.len() == n {
        Ok(())
    } else {
        Err(Error::config(path, format!("expected {n} entries, got {}", items.len())))
    }
}

impl ProblemConfig {
    pub fn validate(self, mode: ValidationMode) -> Result<ProblemSpec> {
        let n = self.n;
        if n == 0 {
            return Err(Error::config("N", "need at least one component"));
        }
        check_len(&self.orders.s1, n, "orders.s1")?;
        check_len(&self.orders.s2, n, "orders.s2")?;
        check_len(&self.epsilon, n, "epsilon")?;
        check_len(&self.kernels, n, "kernels")?;
        check_len(&self.influxes, n, "influxes")?;
        if self.g.n_components() != n {
            return Err(Error::config(
                "g",
                format!("expected {n} components, got {}", self.g.n_components()),
            ));
        }

        for m in 0..n {
            let (s1, s2) = (self.orders.s1[m], self.orders.s2[m]);
            let ok = match mode {
                ValidationMode::Nonlinear => 0.25 < s1 && s1 < 0.75 && s1 < s2 && s2 < 1.0,
                ValidationMode::Linear => 0.0 < s1 && s1 < s2 && s2 < 1.0,
            };
            if !ok {
                let window = match mode {
                    ValidationMode::Nonlinear => {
                        "nonlinear existence window 1/4 < s1 < 3/4, s1 < s2 < 1"
                    }
                    ValidationMode::Linear => "linear window 0 < s1 < s2 < 1",
                };
                return Err(Error::config(
                    format!("orders[{m}]"),
                    format!("s1 = {s1}, s2 = {s2} violates the {window}"),
                ));
            }
            let eps = self.epsilon[m];
            if !(eps.is_finite() && eps >= 0.0) {
                return Err(Error::config(format!("epsilon[{m}]"), "must be finite and nonnegative"));
            }
        }

        let grid = Grid3::new(self.grid.box_length, self.grid.n)
            .map_err(|e| Error::config("grid", e.to_string()))?;

        for (label, family) in [("kernels", &self.kernels), ("influxes", &self.influxes)] {
            for (m, list) in family.iter().enumerate() {
                for (j, spec) in list.iter().enumerate() {
                    let path = format!("{label}[{m}][{j}]");
                    spec.validate(&path)?;
                    if spec.amplitude != 0.0 && spec.clearance(&grid) < 3.0 / spec.width.sqrt() {
                        log::warn!(
                            "{path}: clearance {:.3} < 3/sqrt(a); estimated truncated mass {:e}",
                            spec.clearance(&grid),
                            spec.truncation_mass(&grid)
                        );
                    }
                }
            }
        }
        if !self
            .influxes
            .iter()
            .flatten()
            .any(|s| s.amplitude != 0.0)
        {
            return Err(Error::config("influxes", "all influxes vanish; at least one must be nontrivial"));
        }

        self.g.validate().map_err(|e| match e {
            Error::NonlinearityAssumption(msg) => Error::config("g", msg),
            other => other,
        })?;
        if self.g.is_identically_zero() {
            log::warn!("nonlinearity vanishes identically");
        }

        if !(self.rho.is_finite() && self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::config("rho", format!("must lie in (0, 1], got {}", self.rho)));
        }

        Ok(ProblemSpec {
            n_components: n,
            orders: self.orders,
            epsilon: self.epsilon,
            diffusion: vec![1.0; n],
            kernels: self.kernels,
            influxes: self.influxes,
            nonlinearity: self.g,
            grid,
            rho: self.rho,
        })
    }
}

/// Parses and validates a JSON problem description.
pub fn load_problem(config_text: &str, mode: ValidationMode) -> Result<ProblemSpec> {
    let config: ProblemConfig = serde_json::from_str(config_text).map_err(|e| {
        Error::config(
            format!("$ (line {}, column {})", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    config.validate(mode)
}

impl ProblemSpec {
    pub fn demo() -> Self {
        load_problem(DEMO_CONFIG, ValidationMode::Nonlinear).expect("bundled demo config is valid")
    }

    pub fn to_config(&self) -> ProblemConfig {
        ProblemConfig {
            n: self.n_components,
            grid: GridConfig {
                box_length: self.grid.box_length(),
                n: self.grid.points_per_axis(),
            },
            orders: self.orders.clone(),
            epsilon: self.epsilon.clone(),
            kernels: self.kernels.clone(),
            influxes: self.influxes.clone(),
            g: self.nonlinearity.clone(),
            rho: self.rho,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_config())?)
    }

    /// `eps = max_m eps_m`.
    pub fn epsilon_max_component(&self) -> f64 {
        self.epsilon.iter().copied().fold(0.0, f64::max)
    }

    /// Copy with the couplings rescaled proportionally so that
    /// `max_m eps_m = target`. All-zero couplings become uniform.
    pub fn with_epsilon(&self, target: f64) -> Self {
        let current = self.epsilon_max_component();
        let epsilon = if current > 0.0 {
            self.epsilon.iter().map(|e| e * target / current).collect()
        } else {
            vec![target; self.n_components]
        };
        Self {
            epsilon,
            ..self.clone()
        }
    }

    pub fn with_nonlinearity(&self, g: Nonlinearity) -> Self {
        Self {
            nonlinearity: g,
            ..self.clone()
        }
    }

    pub fn with_grid(&self, grid: Grid3) -> Self {
        Self {
            grid,
            ..self.clone()
        }
    }

    pub fn kernel_field(&self, m: usize) -> Result<ScalarField> {
        realize_sum(&self.kernels[m], &self.grid)
    }

    pub fn influx_field(&self, m: usize) -> Result<ScalarField> {
        realize_sum(&self.influxes[m], &self.grid)
    }
}

/// Quadratic nonlinearities for `N = 2` used by the continuity experiments.
/// The first entry is the demo nonlinearity.
pub fn bundled_quadratics() -> Vec<Nonlinearity> {
    let q = |terms: &[&[(u32, u32, f64)]]| {
        Nonlinearity::new(
            terms
                .iter()
                .map(|comp| {
                    comp.iter()
                        .map(|&(a, b, c)| Monomial::new(vec![a, b], c))
                        .collect()
                })
                .collect(),
        )
        .expect("bundled quadratic is valid")
    };
    vec![
        q(&[&[(1, 1, 1.0)], &[(2, 0, 0.5), (0, 2, -0.25)]]),
        q(&[&[(1, 1, 1.1)], &[(2, 0, 0.55), (0, 2, -0.275)]]),
        q(&[&[(1, 1, 0.9)], &[(2, 0, 0.5), (0, 2, -0.25)]]),
        q(&[&[(1, 1, 1.0), (2, 0, 0.05)], &[(2, 0, 0.5), (0, 2, -0.25)]]),
        q(&[&[(1, 1, 1.0)], &[(2, 0, 0.5), (0, 2, -0.2), (1, 1, 0.1)]]),
        q(&[&[(0, 2, 0.8)], &[(2, 0, 0.6)]]),
    ]
}

/// Pairs of indices into [`bundled_quadratics`].
pub const CONTINUITY_PAIRS: [(usize, usize); 5] = [(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)];
