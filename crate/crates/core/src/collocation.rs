//! Fourier collocation on the uniform periodic grid.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::model_spaces::SpinStructure;

/// Derivative of a real periodic sample vector, Nyquist mode dropped.
pub fn spectral_derivative(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward.process(&mut buf);
    let half = n / 2;
    for (idx, c) in buf.iter_mut().enumerate() {
        let k = if idx < half {
            idx as f64
        } else if idx == half && n.is_multiple_of(2) {
            0.0
        } else {
            idx as f64 - n as f64
        };
        *c *= Complex64::new(0.0, k);
    }
    inverse.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.into_iter().map(|c| c.re * scale).collect()
}

/// Applies [`spectral_derivative`] to every row of `values` (the t direction).
pub fn derivative_along_rows(values: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(values.nrows(), values.ncols());
    for j in 0..values.nrows() {
        let row: Vec<f64> = values.row(j).iter().copied().collect();
        for (k, v) in spectral_derivative(&row).into_iter().enumerate() {
            out[(j, k)] = v;
        }
    }
    out
}

/// Fourier coefficient magnitudes `|ĉ_k|` of a real sample vector, indexed by `|k|`.
pub fn coefficient_magnitudes(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward.process(&mut buf);
    let mut mags = vec![0.0; n / 2 + 1];
    for (idx, c) in buf.iter().enumerate() {
        let k = idx.min(n - idx);
        mags[k] = f64::max(mags[k], c.norm() / n as f64);
    }
    mags
}

/// Twice the wavenumbers of the collocation lattice, as integers.
///
/// Periodic sections use `k ∈ {−N/2+1, …, N/2}` so that `i d/dt` has the
/// integer spectrum `{−N/2, …, N/2−1}`; antiperiodic sections use
/// `k ∈ {−N/2+½, …, N/2−½}`.
fn doubled_wavenumbers(n: usize, spin: SpinStructure) -> Vec<i64> {
    let half = (n / 2) as i64;
    match spin {
        SpinStructure::Trivial => (-half + 1..=half).map(|k| 2 * k).collect(),
        SpinStructure::Nontrivial => (-half..half).map(|k| 2 * k + 1).collect(),
    }
}

pub fn wavenumbers(n: usize, spin: SpinStructure) -> Vec<f64> {
    doubled_wavenumbers(n, spin)
        .into_iter()
        .map(|k2| k2 as f64 / 2.0)
        .collect()
}

/// `exp(i·k·m·2π/N)` with the phase reduced exactly in integer arithmetic.
fn lattice_phase(k2: i64, m: i64, n: usize) -> Complex64 {
    let period = 2 * n as i64;
    let reduced = (k2 * m).rem_euclid(period);
    Complex64::from_polar(1.0, PI * reduced as f64 / n as f64)
}

/// Complex collocation matrix of `d/dt` on the lattice of `spin`.
///
/// `D = F diag(ik) F*` with `F` the unitary Fourier synthesis, hence `D* = −D`
/// up to round-off and `i·D` is Hermitian.
pub fn differentiation_matrix(n: usize, spin: SpinStructure) -> DMatrix<Complex64> {
    let ks = doubled_wavenumbers(n, spin);
    let span = n as i64 - 1;
    // entries depend only on the index offset j − l
    let offsets: Vec<Complex64> = (-span..=span)
        .map(|m| {
            ks.iter()
                .map(|&k2| lattice_phase(k2, m, n) * Complex64::new(0.0, k2 as f64 / 2.0))
                .sum::<Complex64>()
                / n as f64
        })
        .collect();
    DMatrix::from_fn(n, n, |j, l| offsets[(j as i64 - l as i64 + span) as usize])
}

/// Orthonormal columns `e^{ik t_j}/√N` for lattice wavenumbers with `|k| ≤ cutoff`.
pub fn band_basis(n: usize, spin: SpinStructure, cutoff: f64) -> DMatrix<Complex64> {
    let ks: Vec<i64> = doubled_wavenumbers(n, spin)
        .into_iter()
        .filter(|&k2| (k2 as f64 / 2.0).abs() <= cutoff)
        .collect();
    let norm = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, ks.len(), |j, c| lattice_phase(ks[c], j as i64, n) * norm)
}
