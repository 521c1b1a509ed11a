//! Basic (leafwise-constant) objects on the torus flow.
//!
//! A basic object is a function of `t` alone, so it is stored on the t-grid.
//! The basic projection `P_b` is the L²-orthogonal projection onto such
//! objects; with leaves `θ ↦ (θ, t)` of length element `f dθ`, it is the
//! `f`-weighted average over θ.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::collocation;
use crate::error::{LabError, Result};
use crate::model_spaces::{GridSpec, MetricProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldDegree {
    Function,
    /// Coefficient `v` of a basic 1-form `v·dt`.
    OneFormCoefficient,
}

/// Scalars that basic fields may carry.
pub trait FieldScalar: Copy {
    fn to_complex(self) -> Complex64;
}

impl FieldScalar for f64 {
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl FieldScalar for Complex64 {
    fn to_complex(self) -> Complex64 {
        self
    }
}

/// Values of a basic function or 1-form coefficient on the t-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasicField<T = f64> {
    pub values: Vec<T>,
    pub degree: FieldDegree,
}

impl<T: FieldScalar> BasicField<T> {
    pub fn new(values: Vec<T>, degree: FieldDegree) -> Self {
        Self { values, degree }
    }

    pub fn function(values: Vec<T>) -> Self {
        Self::new(values, FieldDegree::Function)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl BasicField<f64> {
    pub fn from_fn(grid: &GridSpec, degree: FieldDegree, f: impl Fn(f64) -> f64) -> Self {
        Self::new(grid.nodes().into_iter().map(f).collect(), degree)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Leaf volume density `g(t) = (1/2π) ∫ f(θ,t) dθ` on the t-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafVolumeDensity {
    g_values: Vec<f64>,
}

impl LeafVolumeDensity {
    /// Exact θ-average of the profile: only `m = 0` terms survive.
    pub fn from_profile(profile: &MetricProfile, grid: &GridSpec) -> Self {
        Self {
            g_values: grid
                .nodes()
                .into_iter()
                .map(|t| profile.leaf_average(t))
                .collect(),
        }
    }

    pub fn from_values(g_values: Vec<f64>) -> Result<Self> {
        check_positive(&g_values)?;
        Ok(Self { g_values })
    }

    pub fn from_fn(grid: &GridSpec, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(grid.nodes().into_iter().map(g).collect())
    }

    pub fn constant(grid: &GridSpec, value: f64) -> Result<Self> {
        Self::from_values(vec![value; grid.n_points()])
    }

    pub fn values(&self) -> &[f64] {
        &self.g_values
    }

    pub fn n_points(&self) -> usize {
        self.g_values.len()
    }

    /// Trapezoid weights `(2π/N)·g_k` of the basic L² inner product.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let h = 2.0 * PI / self.n_points() as f64;
        self.g_values.iter().map(|g| h * g).collect()
    }

    /// Coefficient `k = −ġ/g` of the basic mean curvature, `ġ` by collocation.
    pub fn mean_curvature(&self) -> Vec<f64> {
        let dg = collocation::spectral_derivative(&self.g_values);
        dg.iter().zip(&self.g_values).map(|(d, g)| -d / g).collect()
    }

    /// Largest Fourier coefficient of `g` with `|k| > N/4`, relative to the mean.
    pub fn spectral_tail(&self) -> f64 {
        let mags = collocation::coefficient_magnitudes(&self.g_values);
        let quarter = self.n_points() / 4;
        let tail = mags.iter().skip(quarter + 1).copied().fold(0.0, f64::max);
        tail / mags[0]
    }

    pub fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if self.n_points() == grid.n_points() {
            Ok(())
        } else {
            Err(LabError::GridMismatch {
                expected: grid.n_points(),
                found: self.n_points(),
            })
        }
    }
}

fn check_positive(values: &[f64]) -> Result<()> {
    match values
        .iter()
        .enumerate()
        .find(|(_, v)| v.is_nan() || **v <= 0.0)
    {
        Some((index, &value)) => Err(LabError::NonPositiveField { value, index }),
        None => Ok(()),
    }
}

fn check_square(values: &DMatrix<f64>, grid: &GridSpec) -> Result<()> {
    let n = grid.n_points();
    for found in [values.nrows(), values.ncols()] {
        if found != n {
            return Err(LabError::GridMismatch { expected: n, found });
        }
    }
    Ok(())
}

/// Basic projection of a (θ,t)-field: `out[k] = Σ_j field[j,k] f[j,k] / Σ_j f[j,k]`.
pub fn project_basic(
    field: &DMatrix<f64>,
    f_values: &DMatrix<f64>,
    grid: &GridSpec,
    degree: FieldDegree,
) -> Result<BasicField> {
    check_square(field, grid)?;
    check_square(f_values, grid)?;
    let values = (0..grid.n_points())
        .map(|k| {
            let num = field.column(k).dot(&f_values.column(k));
            let den = f_values.column(k).sum();
            num / den
        })
        .collect();
    Ok(BasicField::new(values, degree))
}

/// `k(t) = −ġ(t)/g(t)`, the coefficient of `κ_b = k·dt`, with `ġ` exact.
pub fn basic_mean_curvature(profile: &MetricProfile, grid: &GridSpec) -> BasicField {
    BasicField::from_fn(grid, FieldDegree::OneFormCoefficient, |t| {
        -profile.leaf_average_derivative(t) / profile.leaf_average(t)
    })
}

pub fn periodic_derivative(values: &[f64], grid: &GridSpec) -> Result<Vec<f64>> {
    if values.len() != grid.n_points() {
        return Err(LabError::GridMismatch {
            expected: grid.n_points(),
            found: values.len(),
        });
    }
    Ok(collocation::spectral_derivative(values))
}

/// Logarithmic derivative `α′/α` of a positive basic function, as a 1-form coefficient.
pub fn dlog(alpha: &BasicField) -> Result<BasicField> {
    check_positive(&alpha.values)?;
    let d = collocation::spectral_derivative(&alpha.values);
    Ok(BasicField::new(
        d.iter().zip(&alpha.values).map(|(d, a)| d / a).collect(),
        FieldDegree::OneFormCoefficient,
    ))
}

/// `(2π/N) Σ_k conj(a_k) b_k g_k`.
pub fn weighted_inner_product<A: FieldScalar, B: FieldScalar>(
    a: &BasicField<A>,
    b: &BasicField<B>,
    density: &LeafVolumeDensity,
) -> Result<Complex64> {
    let n = density.n_points();
    for len in [a.len(), b.len()] {
        if len != n {
            return Err(LabError::GridMismatch {
                expected: n,
                found: len,
            });
        }
    }
    let h = 2.0 * PI / n as f64;
    Ok(a.values
        .iter()
        .zip(&b.values)
        .zip(density.values())
        .map(|((x, y), g)| x.to_complex().conj() * y.to_complex() * *g)
        .sum::<Complex64>()
        * h)
}
