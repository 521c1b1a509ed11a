//! Discrete basic Dirac operators and basic Laplacians on the torus flow.
//!
//! Every operator acts on basic sections sampled on the t-grid and is
//! self-adjoint for the inner product `Σ_k w_k conj(u_k) v_k`, where
//! `w_k = (2π/N) g_k`. Codifferentials are built as exact matrix adjoints of
//! the collocation derivative in that inner product.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basic_calculus::LeafVolumeDensity;
use crate::collocation;
use crate::error::{LabError, Result};
use crate::model_spaces::{GridSpec, SpinStructure};
use crate::report::fmt_num;

/// Tolerance for the Hermitian-in-weighted-metric invariant.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Largest relative Fourier tail of `g` accepted for the curvature identity.
pub const DENSITY_TAIL_TOLERANCE: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormDegree {
    Function,
    OneForm,
}

/// A square matrix and the positive weights of the inner product it is symmetric in.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOperator {
    pub matrix: DMatrix<Complex64>,
    pub weights: Vec<f64>,
    pub label: String,
    /// Grid of the underlying circle; the matrix may stack several copies of it.
    pub grid: GridSpec,
}

impl WeightedOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |WM − (WM)*| / max |WM|`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim();
        let mut scale = 0.0f64;
        let mut defect = 0.0f64;
        for j in 0..n {
            for l in 0..n {
                let a = self.matrix[(j, l)] * self.weights[j];
                let b = (self.matrix[(l, j)] * self.weights[l]).conj();
                scale = scale.max(a.norm());
                defect = defect.max((a - b).norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            defect / scale
        }
    }

    /// `W^{1/2} M W^{-1/2}`, Hermitian when the operator is weighted-symmetric.
    pub fn symmetrized(&self) -> DMatrix<Complex64> {
        let s: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        DMatrix::from_fn(self.dim(), self.dim(), |j, l| {
            self.matrix[(j, l)] * (s[j] / s[l])
        })
    }

    pub fn square(&self) -> Self {
        Self {
            matrix: &self.matrix * &self.matrix,
            weights: self.weights.clone(),
            label: format!("({})^2", self.label),
            grid: self.grid,
        }
    }

    /// `A^{-1/2} M A^{1/2}` with `A = diag(α)` repeated over each stacked block;
    /// the result is symmetric for the weights `w·α`.
    pub fn conjugated(&self, alpha: &[f64]) -> Result<Self> {
        let n = self.grid.n_points();
        if alpha.len() != n {
            return Err(LabError::GridMismatch {
                expected: n,
                found: alpha.len(),
            });
        }
        if let Some((index, &value)) = alpha
            .iter()
            .enumerate()
            .find(|(_, a)| a.is_nan() || **a <= 0.0)
        {
            return Err(LabError::NonPositiveField { value, index });
        }
        let root: Vec<f64> = (0..self.dim()).map(|j| alpha[j % n].sqrt()).collect();
        Ok(Self {
            matrix: DMatrix::from_fn(self.dim(), self.dim(), |j, l| {
                self.matrix[(j, l)] * (root[l] / root[j])
            }),
            weights: self
                .weights
                .iter()
                .enumerate()
                .map(|(j, w)| w * alpha[j % n])
                .collect(),
            label: format!("conj({})", self.label),
            grid: self.grid,
        })
    }

    /// Orthonormal basis of lattice modes with `|k| ≤ cutoff`, one block per stacked copy.
    pub fn band_basis(&self, cutoff: f64) -> DMatrix<Complex64> {
        let n = self.grid.n_points();
        let blocks = self.dim() / n;
        let single = collocation::band_basis(n, self.grid.spin_structure(), cutoff);
        let k = single.ncols();
        let mut basis = DMatrix::zeros(self.dim(), blocks * k);
        for b in 0..blocks {
            basis.view_mut((b * n, b * k), (n, k)).copy_from(&single);
        }
        basis
    }

    /// Row-major CSV; each complex entry is written as `re,im`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for j in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .flat_map(|l| {
                    let c = self.matrix[(j, l)];
                    [fmt_num(c.re), fmt_num(c.im)]
                })
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// `W^{-1} A* W`, the adjoint of `A` for the weighted inner product.
pub fn weighted_adjoint(a: &DMatrix<Complex64>, weights: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_fn(a.ncols(), a.nrows(), |j, l| {
        a[(l, j)].conj() * (weights[l] / weights[j])
    })
}

fn prepare(density: &LeafVolumeDensity, grid: &GridSpec) -> Result<Vec<f64>> {
    density.check_grid(grid)?;
    Ok(density.quadrature_weights())
}

/// The transversal Dirac operator `D_tr = e₁·∇_{e₁} = i d/dt` on basic spinors.
pub fn transversal_dirac(grid: &GridSpec) -> DMatrix<Complex64> {
    collocation::differentiation_matrix(grid.n_points(), grid.spin_structure()) * I
}

/// `D_b = ½(D_tr + D_tr*)` on basic spinors, which is `i(ψ′ + (ġ/2g)ψ)`.
pub fn assemble_basic_dirac_spinor(
    density: &LeafVolumeDensity,
    grid: &GridSpec,
) -> Result<WeightedOperator> {
    let weights = prepare(density, grid)?;
    let d_tr = transversal_dirac(grid);
    let d_tr_adj = weighted_adjoint(&d_tr, &weights);
    Ok(WeightedOperator {
        matrix: (d_tr + d_tr_adj) * Complex64::new(0.5, 0.0),
        weights,
        label: format!("basic_dirac_spinor[{:?}]", grid.spin_structure()).to_lowercase(),
        grid: *grid,
    })
}

fn form_grid(grid: &GridSpec) -> Result<GridSpec> {
    GridSpec::new(grid.n_points(), SpinStructure::Trivial)
}

/// `D_b = d̃ + δ̃_b` on basic forms `u + v·dt`, stacked as `(u, v)`.
///
/// `d̃ = d − ½κ_b∧` and `δ̃_b` is its weighted adjoint.
pub fn assemble_basic_dirac_forms(
    density: &LeafVolumeDensity,
    grid: &GridSpec,
) -> Result<WeightedOperator> {
    let grid = form_grid(grid)?;
    let weights = prepare(density, &grid)?;
    let n = grid.n_points();
    let d = collocation::differentiation_matrix(n, SpinStructure::Trivial);
    let k = density.mean_curvature();
    let mut twisted_d = d;
    for (j, kj) in k.iter().enumerate() {
        twisted_d[(j, j)] -= Complex64::new(0.5 * kj, 0.0);
    }
    let twisted_delta = weighted_adjoint(&twisted_d, &weights);
    let mut matrix = DMatrix::zeros(2 * n, 2 * n);
    matrix.view_mut((0, n), (n, n)).copy_from(&twisted_delta);
    matrix.view_mut((n, 0), (n, n)).copy_from(&twisted_d);
    Ok(WeightedOperator {
        matrix,
        weights: weights.iter().chain(&weights).copied().collect(),
        label: "basic_dirac_forms".into(),
        grid,
    })
}

/// Basic Laplacian `δ_b d` on functions or `d δ_b` on 1-forms.
pub fn assemble_basic_laplacian(
    density: &LeafVolumeDensity,
    grid: &GridSpec,
    degree: FormDegree,
) -> Result<WeightedOperator> {
    let grid = form_grid(grid)?;
    let weights = prepare(density, &grid)?;
    let d = collocation::differentiation_matrix(grid.n_points(), SpinStructure::Trivial);
    let delta = weighted_adjoint(&d, &weights);
    let (matrix, label) = match degree {
        FormDegree::Function => (delta * d, "basic_laplacian_functions"),
        FormDegree::OneForm => (d * delta, "basic_laplacian_one_forms"),
    };
    Ok(WeightedOperator {
        matrix,
        weights,
        label: label.into(),
        grid,
    })
}

/// Both sides of `D_b²ψ = ∇*∇ψ + ¼(Scal^∇ + |κ|²)ψ − ½(δ_bκ)ψ` on the torus flow,
/// where `Scal^∇ = 0` and the metric is assumed to have basic mean curvature.
pub fn assemble_lichnerowicz_sides(
    density: &LeafVolumeDensity,
    grid: &GridSpec,
) -> Result<(WeightedOperator, WeightedOperator)> {
    let weights = prepare(density, grid)?;
    let tail = density.spectral_tail();
    if tail > DENSITY_TAIL_TOLERANCE {
        return Err(LabError::UnresolvedDensity {
            n_points: grid.n_points(),
            tail,
        });
    }
    let dirac = assemble_basic_dirac_spinor(density, grid)?;
    let lhs = dirac.square();

    let n = grid.n_points();
    let grad = collocation::differentiation_matrix(n, grid.spin_structure());
    let rough_laplacian = weighted_adjoint(&grad, &weights) * grad;

    let k = density.mean_curvature();
    let d_forms = collocation::differentiation_matrix(n, SpinStructure::Trivial);
    let delta_kappa = weighted_adjoint(&d_forms, &weights)
        * DVector::from_iterator(n, k.iter().map(|&v| v.into()));
    let mut matrix = rough_laplacian;
    for j in 0..n {
        matrix[(j, j)] += Complex64::new(0.25 * k[j] * k[j], 0.0) - delta_kappa[j] * 0.5;
    }
    let rhs = WeightedOperator {
        matrix,
        weights,
        label: "rough_laplacian_plus_curvature".into(),
        grid: *grid,
    };
    Ok((lhs, rhs))
}
