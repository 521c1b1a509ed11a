#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use foliation_core::{FourierTerm, MetricProfile};
use nalgebra::{DMatrix, SymmetricEigen};

/// Spectrum of `u ↦ −(1/g)(g u′)′` on the circle by second-order conservative
/// finite differences, with `g` evaluated exactly at the cell faces.
pub fn fd_basic_laplacian_spectrum(n: usize, g: impl Fn(f64) -> f64) -> Vec<f64> {
    let h = TAU / n as f64;
    let node = |j: usize| j as f64 * h;
    let g_node: Vec<f64> = (0..n).map(|j| g(node(j))).collect();
    let g_face: Vec<f64> = (0..n).map(|j| g(node(j) + 0.5 * h)).collect();
    // symmetric form: G^{1/2} A G^{-1/2} with A = G^{-1} K and K the stiffness matrix
    let mut s = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let prev = (j + n - 1) % n;
        let next = (j + 1) % n;
        s[(j, j)] += (g_face[j] + g_face[prev]) / (h * h * g_node[j]);
        s[(j, next)] -= g_face[j] / (h * h * (g_node[j] * g_node[next]).sqrt());
        s[(j, prev)] -= g_face[prev] / (h * h * (g_node[j] * g_node[prev]).sqrt());
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn two_plus_cos_t() -> MetricProfile {
    MetricProfile::new(2.0, vec![FourierTerm::new(0, 1, 1.0)]).unwrap()
}

pub fn one_plus_half_cos_t() -> MetricProfile {
    MetricProfile::new(1.0, vec![FourierTerm::new(0, 1, 0.5)]).unwrap()
}

/// `e^{½ sin t}`.
pub fn exp_half_sin_t() -> MetricProfile {
    MetricProfile::exp_cosine(1.0, 0.5, -PI / 2.0).unwrap()
}

/// `2 + 0.6 sin t + 0.5 cos θ + 0.4 cos θ cos t + 0.2 cos(2θ+1) cos(t+0.5)`.
pub fn theta_dependent() -> MetricProfile {
    MetricProfile::new(
        2.0,
        vec![
            FourierTerm::new(0, 1, 0.6).with_phases(0.0, -PI / 2.0),
            FourierTerm::new(1, 0, 0.5),
            FourierTerm::new(1, 1, 0.4),
            FourierTerm::new(2, 1, 0.2).with_phases(1.0, 0.5),
        ],
    )
    .unwrap()
}

/// `2 + ½ cos θ cos t`.
pub fn half_cos_theta_cos_t() -> MetricProfile {
    MetricProfile::new(2.0, vec![FourierTerm::new(1, 1, 0.5)]).unwrap()
}

/// `(1 + ½ cos θ)(2 + cos t)`.
pub fn product_profile() -> MetricProfile {
    let a = MetricProfile::new(1.0, vec![FourierTerm::new(1, 0, 0.5)]).unwrap();
    MetricProfile::product(&a, &two_plus_cos_t()).unwrap()
}

/// `(1 + 0.3 cos(2θ + 0.7)) e^{½ sin t}`.
pub fn product_profile_exp() -> MetricProfile {
    let a =
        MetricProfile::new(1.0, vec![FourierTerm::new(2, 0, 0.3).with_phases(0.7, 0.0)]).unwrap();
    MetricProfile::product(&a, &exp_half_sin_t()).unwrap()
}

/// `2 + cos(θ + t)`; its mean curvature varies along the leaves.
pub fn diagonal_wave() -> MetricProfile {
    MetricProfile::new(
        2.0,
        vec![
            FourierTerm::new(1, 1, 1.0),
            FourierTerm::new(1, 1, -1.0).with_phases(-PI / 2.0, -PI / 2.0),
        ],
    )
    .unwrap()
}
