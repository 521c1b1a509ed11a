//! Eigenvalues of weighted-Hermitian operators and spectrum comparison.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::operators::WeightedOperator;
use crate::report::fmt_num;

/// Largest accepted relative anti-Hermitian part of `W^{1/2} M W^{-1/2}`.
pub const SYMMETRIZATION_TOLERANCE: f64 = 1e-8;

/// Eigenvalues within this distance outside a window still count as inside it,
/// so that eigenvalues sitting on the boundary are not split by round-off.
pub const WINDOW_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Full spectrum, ascending.
    pub eigenvalues: Vec<f64>,
    /// Largest trusted `|λ|`.
    pub window: f64,
    pub grid_size: usize,
    pub operator_label: String,
}

impl SpectrumReport {
    pub fn in_window(&self, window: f64) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .copied()
            .filter(|l| l.abs() <= window + WINDOW_SLACK)
            .collect()
    }

    pub fn trusted(&self) -> Vec<f64> {
        self.in_window(self.window)
    }

    /// Smallest eigenvalue above `threshold`.
    pub fn first_above(&self, threshold: f64) -> Option<f64> {
        self.eigenvalues.iter().copied().find(|&l| l > threshold)
    }

    /// One eigenvalue per line under an `eigenvalue` header.
    pub fn write_csv<W: Write>(&self, mut out: W, window: Option<f64>) -> std::io::Result<()> {
        writeln!(out, "eigenvalue")?;
        let values = match window {
            Some(w) => self.in_window(w),
            None => self.eigenvalues.clone(),
        };
        for v in values {
            writeln!(out, "{}", fmt_num(v))?;
        }
        Ok(())
    }
}

/// Spectrum of `M` via the Hermitian matrix `W^{1/2} M W^{-1/2}`.
pub fn eigenvalues_weighted(op: &WeightedOperator) -> Result<SpectrumReport> {
    let s = op.symmetrized();
    let scale = s.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let skew = (&s - s.adjoint())
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    let residual = if scale > 0.0 { skew / scale } else { 0.0 };
    if residual > SYMMETRIZATION_TOLERANCE {
        return Err(LabError::NotWeightedHermitian {
            label: op.label.clone(),
            residual,
        });
    }
    let hermitian = (&s + s.adjoint()) * Complex64::new(0.5, 0.0);
    let mut eigenvalues: Vec<f64> = hermitian_eigenvalues(hermitian)?;
    eigenvalues.sort_by(f64::total_cmp);
    Ok(SpectrumReport {
        eigenvalues,
        window: op.grid.trusted_window(),
        grid_size: op.grid.n_points(),
        operator_label: op.label.clone(),
    })
}

fn hermitian_eigenvalues(h: DMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = h.nrows();
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 100 * n.max(1))
        .ok_or_else(|| LabError::Eigensolver(format!("no convergence for dimension {n}")))?;
    Ok(eig.eigenvalues.iter().copied().collect())
}

/// Maximum deviation between two spectra restricted to `[−window, window]`.
pub fn spectrum_compare(a: &SpectrumReport, b: &SpectrumReport, window: f64) -> Result<f64> {
    let trusted = a.window.min(b.window);
    if window > trusted {
        return Err(LabError::WindowNotCovered { window, trusted });
    }
    let left = a.in_window(window);
    let right = b.in_window(window);
    if left.len() != right.len() {
        return Err(LabError::MultiplicityMismatch {
            window,
            left: left.len(),
            right: right.len(),
        });
    }
    Ok(left
        .iter()
        .zip(&right)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Operator norm of `m` restricted to the span of the columns of `basis`.
pub fn restricted_norm(m: &DMatrix<Complex64>, basis: &DMatrix<Complex64>) -> f64 {
    operator_norm(&(m * basis))
}
