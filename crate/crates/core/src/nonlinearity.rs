use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `coeff * z_1^{powers[0]} * ... * z_N^{powers[N-1]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub powers: Vec<u32>,
    pub coeff: f64,
}

impl Monomial {
    pub fn new(powers: Vec<u32>, coeff: f64) -> Self {
        Self { powers, coeff }
    }

    pub fn degree(&self) -> u32 {
        self.powers.iter().sum()
    }

    #[inline]
    fn eval(&self, z: &[f64]) -> f64 {
        self.powers
            .iter()
            .zip(z)
            .fold(self.coeff, |acc, (&k, &x)| acc * x.powi(k as i32))
    }

    /// `d/dz_n` of this monomial at `z`.
    fn partial(&self, z: &[f64], n: usize) -> f64 {
        let k = self.powers[n];
        if k == 0 {
            return 0.0;
        }
        self.powers
            .iter()
            .zip(z)
            .enumerate()
            .fold(self.coeff * k as f64, |acc, (j, (&kj, &x))| {
                let e = if j == n { kj - 1 } else { kj };
                acc * x.powi(e as i32)
            })
    }

    /// Coefficient-rule bound on `sup_{|z| <= r}` of the value, all first
    /// partials and all second partials. Exact for a single monomial whose
    /// supremum is attained on a coordinate axis.
    pub(crate) fn c2_bound(&self, r: f64) -> f64 {
        let c = self.coeff.abs();
        let d = self.degree() as i32;
        let pow = |e: i32| if e < 0 { 0.0 } else { r.powi(e) };
        let value = c * pow(d);
        let first: f64 = self.powers.iter().map(|&k| c * k as f64 * pow(d - 1)).sum();
        let mut second = 0.0;
        for (n, &kn) in self.powers.iter().enumerate() {
            for (l, &kl) in self.powers.iter().enumerate() {
                let factor = if n == l {
                    kn as f64 * (kn as f64 - 1.0)
                } else {
                    kn as f64 * kl as f64
                };
                second += c * factor * pow(d - 2);
            }
        }
        value + first + second
    }
}

/// Polynomial map `g: R^N -> R^N`, one sparse monomial list per output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Nonlinearity {
    components: Vec<ComponentPolynomial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ComponentPolynomial {
    pub monomials: Vec<Monomial>,
}

impl Nonlinearity {
    /// Validates shapes and the absence of constant and linear terms.
    pub fn new(components: Vec<Vec<Monomial>>) -> Result<Self> {
        let g = Self {
            components: components
                .into_iter()
                .map(|monomials| ComponentPolynomial { monomials })
                .collect(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn zero(n: usize) -> Self {
        Self {
            components: vec![ComponentPolynomial::default(); n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.components.len();
        for (m, comp) in self.components.iter().enumerate() {
            for (j, mono) in comp.monomials.iter().enumerate() {
                if mono.powers.len() != n {
                    return Err(Error::config(
                        format!("g[{m}].monomials[{j}].powers"),
                        format!("expected {n} exponents, got {}", mono.powers.len()),
                    ));
                }
                if !mono.coeff.is_finite() {
                    return Err(Error::config(
                        format!("g[{m}].monomials[{j}].coeff"),
                        "coefficient must be finite",
                    ));
                }
                if mono.degree() < 2 && mono.coeff != 0.0 {
                    return Err(Error::NonlinearityAssumption(format!(
                        "g[{m}].monomials[{j}] has degree {}; g(0) = 0 and grad g(0) = 0 need degree >= 2",
                        mono.degree()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, m: usize) -> &[Monomial] {
        &self.components[m].monomials
    }

    pub fn is_identically_zero(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.monomials.iter().all(|m| m.coeff == 0.0))
    }

    #[inline]
    pub fn eval_component(&self, m: usize, z: &[f64]) -> f64 {
        self.components[m].monomials.iter().map(|mono| mono.eval(z)).sum()
    }

    /// Values `g_m(z)` and the Jacobian `dg_m/dz_n` (row `m`, column `n`).
    pub fn eval(&self, z: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = z.len();
        let values = (0..self.components.len()).map(|m| self.eval_component(m, z)).collect();
        let gradient = self
            .components
            .iter()
            .map(|comp| {
                (0..n)
                    .map(|k| comp.monomials.iter().map(|mono| mono.partial(z, k)).sum())
                    .collect()
            })
            .collect();
        (values, gradient)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|c| ComponentPolynomial {
                    monomials: c
                        .monomials
                        .iter()
                        .map(|m| Monomial::new(m.powers.clone(), m.coeff * factor))
                        .collect(),
                })
                .collect(),
        }
    }

    /// `self - other`, with equal exponent vectors merged.
    pub fn difference(&self, other: &Nonlinearity) -> Result<Self> {
        if self.n_components() != other.n_components() {
            return Err(Error::InvalidParameter(format!(
                "nonlinearities have {} and {} components",
                self.n_components(),
                other.n_components()
            )));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| {
                let mut merged: Vec<Monomial> = Vec::new();
                let terms = a
                    .monomials
                    .iter()
                    .cloned()
                    .chain(b.monomials.iter().map(|m| Monomial::new(m.powers.clone(), -m.coeff)));
                for term in terms {
                    match merged.iter_mut().find(|m| m.powers == term.powers) {
                        Some(existing) => existing.coeff += term.coeff,
                        None => merged.push(term),
                    }
                }
                merged.retain(|m| m.coeff != 0.0);
                ComponentPolynomial { monomials: merged }
            })
            .collect();
        Ok(Self { components })
    }

    /// Coefficient-rule bound on `||g||_{C^2(I, R^N)}` over `|z| <= radius`.
    pub fn c2_bound(&self, radius: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.monomials.iter().map(|m| m.c2_bound(radius)).sum::<f64>())
            .sum()
    }
}
