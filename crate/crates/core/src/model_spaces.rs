//! Closed-form geometry of the two model flows.
//!
//! The torus family is the flow by circles `θ ↦ (θ, t)` on `S¹×S¹` with the
//! bundle-like metric `f(θ,t)² dθ² + dt²`, where `f` is a truncated double
//! Fourier series ([`MetricProfile`]). The 3-sphere family is the flow of the
//! isometry group `(z, w) ↦ (e^{irt} z, e^{it} w)` on the round unit sphere;
//! all of its pointwise data depend on `s = |z|²` only.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::collocation;
use crate::error::{LabError, Result};

/// Resolution of the positivity scan performed when a profile is built.
pub const POSITIVITY_SAMPLES: usize = 512;

/// One separable Fourier mode `amp · cos(mθ + phase_theta) · cos(nt + phase_t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub m: i32,
    pub n: i32,
    pub amp: f64,
    #[serde(default)]
    pub phase_theta: f64,
    #[serde(default)]
    pub phase_t: f64,
}

impl FourierTerm {
    pub fn new(m: i32, n: i32, amp: f64) -> Self {
        Self {
            m,
            n,
            amp,
            phase_theta: 0.0,
            phase_t: 0.0,
        }
    }

    pub fn with_phases(mut self, phase_theta: f64, phase_t: f64) -> Self {
        self.phase_theta = phase_theta;
        self.phase_t = phase_t;
        self
    }

    #[inline]
    fn eval(&self, theta: f64, t: f64) -> f64 {
        let m = f64::from(self.m);
        let n = f64::from(self.n);
        self.amp * (m * theta + self.phase_theta).cos() * (n * t + self.phase_t).cos()
    }

    /// θ-average of the term; nonzero only for `m = 0`.
    fn theta_mean_coefficient(&self) -> f64 {
        if self.m == 0 {
            self.amp * self.phase_theta.cos()
        } else {
            0.0
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    constant: f64,
    #[serde(default)]
    terms: Vec<FourierTerm>,
}

/// Positive function `f(θ,t)` on the 2-torus defining the metric `f² dθ² + dt²`.
///
/// Construction validates positivity on a 512×512 sample grid, so every
/// value of this type describes a genuine Riemannian metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile")]
pub struct MetricProfile {
    constant: f64,
    terms: Vec<FourierTerm>,
}

impl TryFrom<RawProfile> for MetricProfile {
    type Error = LabError;

    fn try_from(raw: RawProfile) -> Result<Self> {
        MetricProfile::new(raw.constant, raw.terms)
    }
}

impl MetricProfile {
    pub fn new(constant: f64, terms: Vec<FourierTerm>) -> Result<Self> {
        if !constant.is_finite() || constant <= 0.0 {
            return Err(LabError::InvalidProfile {
                field: "constant".into(),
                reason: format!("must be finite and > 0, got {constant}"),
            });
        }
        for (i, term) in terms.iter().enumerate() {
            for (name, value) in [
                ("amp", term.amp),
                ("phase_theta", term.phase_theta),
                ("phase_t", term.phase_t),
            ] {
                if !value.is_finite() {
                    return Err(LabError::InvalidProfile {
                        field: format!("terms[{i}].{name}"),
                        reason: format!("must be finite, got {value}"),
                    });
                }
            }
        }
        let profile = Self { constant, terms };
        profile.check_positive()?;
        Ok(profile)
    }

    /// The flat product metric `dθ² + dt²`.
    pub fn flat() -> Self {
        Self {
            constant: 1.0,
            terms: Vec::new(),
        }
    }

    /// `scale · exp(a·cos(t + phase))`, expanded as
    /// `scale·(I₀(a) + 2 Σₙ Iₙ(a) cos(n(t + phase)))` and truncated once the
    /// modified Bessel coefficients drop below `1e-18` relative to `I₀(a)`.
    pub fn exp_cosine(scale: f64, a: f64, phase: f64) -> Result<Self> {
        let i0 = bessel_i(0, a.abs());
        let mut terms = Vec::new();
        for n in 1..=64 {
            let c = bessel_i(n, a.abs());
            if c < 1e-18 * i0 {
                break;
            }
            // I_n(-a) = (-1)^n I_n(a)
            let sign = if a < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
            let n_i = n as i32;
            terms.push(
                FourierTerm::new(0, n_i, 2.0 * scale * sign * c)
                    .with_phases(0.0, f64::from(n_i) * phase),
            );
        }
        Self::new(scale * i0, terms)
    }

    /// Product `a(θ)·c(t)` of a θ-only profile and a t-only profile.
    pub fn product(theta_part: &MetricProfile, t_part: &MetricProfile) -> Result<Self> {
        if theta_part.terms.iter().any(|t| t.n != 0) {
            return Err(LabError::InvalidProfile {
                field: "terms".into(),
                reason: "θ factor of a product must not depend on t".into(),
            });
        }
        if t_part
            .terms
            .iter()
            .any(|t| t.m != 0 || t.phase_theta != 0.0)
        {
            return Err(LabError::InvalidProfile {
                field: "terms".into(),
                reason: "t factor of a product must not depend on θ".into(),
            });
        }
        let a0 = theta_part.constant;
        let c0 = t_part.constant;
        let mut terms = Vec::new();
        for c in &t_part.terms {
            terms.push(FourierTerm::new(0, c.n, a0 * c.amp).with_phases(0.0, c.phase_t));
        }
        for a in &theta_part.terms {
            let amp = a.amp * a.phase_t.cos();
            terms.push(FourierTerm::new(a.m, 0, c0 * amp).with_phases(a.phase_theta, 0.0));
            for c in &t_part.terms {
                terms.push(
                    FourierTerm::new(a.m, c.n, amp * c.amp).with_phases(a.phase_theta, c.phase_t),
                );
            }
        }
        Self::new(a0 * c0, terms)
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &[FourierTerm] {
        &self.terms
    }

    pub fn eval(&self, theta: f64, t: f64) -> f64 {
        self.constant + self.terms.iter().map(|tm| tm.eval(theta, t)).sum::<f64>()
    }

    /// Leaf volume density `g(t) = (1/2π) ∫ f(θ,t) dθ`, exact on the Fourier form.
    pub fn leaf_average(&self, t: f64) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|tm| tm.theta_mean_coefficient() * (f64::from(tm.n) * t + tm.phase_t).cos())
                .sum::<f64>()
    }

    /// Exact `dg/dt` of [`Self::leaf_average`].
    pub fn leaf_average_derivative(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|tm| {
                let n = f64::from(tm.n);
                -tm.theta_mean_coefficient() * n * (n * t + tm.phase_t).sin()
            })
            .sum()
    }

    /// Largest `|n|` among the terms.
    pub fn t_bandwidth(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.n.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// True when no term depends on `t`.
    pub fn is_t_independent(&self) -> bool {
        self.terms.iter().all(|t| t.n == 0 || t.amp == 0.0)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn check_positive(&self) -> Result<()> {
        let h = 2.0 * PI / POSITIVITY_SAMPLES as f64;
        let mut worst = (f64::INFINITY, 0.0, 0.0);
        for j in 0..POSITIVITY_SAMPLES {
            let theta = j as f64 * h;
            for k in 0..POSITIVITY_SAMPLES {
                let t = k as f64 * h;
                let v = self.eval(theta, t);
                if v < worst.0 {
                    worst = (v, theta, t);
                }
            }
        }
        if worst.0 > 0.0 {
            Ok(())
        } else {
            Err(LabError::NonPositiveMetric {
                min: worst.0,
                theta: worst.1,
                t: worst.2,
            })
        }
    }
}

/// Modified Bessel function of the first kind by its power series.
fn bessel_i(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (1..=n).fold(1.0, |acc, k| acc * half / f64::from(k));
    let mut sum = term;
    for m in 1..200u32 {
        term *= half * half / (f64::from(m) * f64::from(m + n));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SpinStructure {
    /// Periodic spinors on the t-circle.
    #[default]
    Trivial,
    /// Antiperiodic spinors; half-integer frequency lattice.
    Nontrivial,
}

/// Uniform grid on each circle factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    n_points: usize,
    spin_structure: SpinStructure,
}

impl GridSpec {
    pub fn new(n_points: usize, spin_structure: SpinStructure) -> Result<Self> {
        if n_points < 8 || !n_points.is_multiple_of(2) {
            return Err(LabError::InvalidGrid(format!(
                "n_points must be even and >= 8, got {n_points}"
            )));
        }
        Ok(Self {
            n_points,
            spin_structure,
        })
    }

    pub fn periodic(n_points: usize) -> Result<Self> {
        Self::new(n_points, SpinStructure::Trivial)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spin_structure(&self) -> SpinStructure {
        self.spin_structure
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n_points as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points)
            .map(|k| k as f64 * self.spacing())
            .collect()
    }

    /// Largest `|λ|` trusted for eigenvalue comparisons.
    pub fn trusted_window(&self) -> f64 {
        self.n_points as f64 / 8.0
    }

    pub fn with_points(&self, n_points: usize) -> Result<Self> {
        Self::new(n_points, self.spin_structure)
    }
}

/// `f(θ_j, t_k)` with rows indexed by θ and columns by t.
pub fn torus_metric_sample(profile: &MetricProfile, grid: &GridSpec) -> Result<DMatrix<f64>> {
    let nodes = grid.nodes();
    let n = grid.n_points();
    let values = DMatrix::from_fn(n, n, |j, k| profile.eval(nodes[j], nodes[k]));
    let (idx, min) = values
        .iter()
        .copied()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
        );
    if min <= 0.0 {
        let (j, k) = (idx % n, idx / n);
        return Err(LabError::NonPositiveMetric {
            min,
            theta: nodes[j],
            t: nodes[k],
        });
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusGeometry {
    /// Coefficient of the mean curvature form `κ = kappa_coeff · dt`.
    pub kappa_coeff: DMatrix<f64>,
    pub scal_m: DMatrix<f64>,
}

/// Mean curvature `−∂ₜf/f` and Gauss curvature `Scal_M = −2∂²ₜf/f` on the grid.
pub fn torus_geometry(profile: &MetricProfile, grid: &GridSpec) -> Result<TorusGeometry> {
    let f = torus_metric_sample(profile, grid)?;
    let f_t = collocation::derivative_along_rows(&f);
    let f_tt = collocation::derivative_along_rows(&f_t);
    let kappa_coeff = f_t.zip_map(&f, |d, v| -d / v);
    let scal_m = f_tt.zip_map(&f, |d, v| -2.0 * d / v);
    Ok(TorusGeometry {
        kappa_coeff,
        scal_m,
    })
}

/// Pointwise data of the flow `γ_t^r` on the round unit 3-sphere at `s = |z|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct S3FlowGeometry {
    pub r: f64,
    pub s: f64,
    pub scal_transverse: f64,
    pub kappa_norm: f64,
    /// `|A|²_Q`, summed over the transverse frame (`2·|A_{e₁}e₂|²`).
    pub a_norm_sq: f64,
    pub scal_m: f64,
    pub leaf_scal: f64,
}

impl S3FlowGeometry {
    /// `Scal_M + |A|²_Q + |κ|²`.
    pub fn flow_curvature_sum(&self) -> f64 {
        self.scal_m + self.a_norm_sq + self.kappa_norm * self.kappa_norm
    }
}

pub fn s3_geometry(r: f64, s: f64) -> Result<S3FlowGeometry> {
    if !(r.is_finite() && r > 0.0) {
        return Err(LabError::Domain(format!(
            "flow parameter r must be > 0, got {r}"
        )));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(LabError::Domain(format!(
            "s = |z|^2 must lie in [0,1], got {s}"
        )));
    }
    let r2 = r * r;
    let denom = r2 * s + (1.0 - s);
    let a = r / denom;
    Ok(S3FlowGeometry {
        r,
        s,
        scal_transverse: 2.0 + 6.0 * r2 / denom,
        kappa_norm: ((1.0 - r2) * (s * (1.0 - s)).sqrt() / denom).abs(),
        a_norm_sq: 2.0 * a * a,
        scal_m: 6.0,
        leaf_scal: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(n: usize) -> GridSpec {
        GridSpec::periodic(n).unwrap()
    }

    #[test]
    fn flat_profile_samples_to_one() {
        let f = torus_metric_sample(&MetricProfile::flat(), &grid(16)).unwrap();
        assert!(f.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn direct_evaluation_of_terms() {
        let p = MetricProfile::new(2.0, vec![FourierTerm::new(0, 1, 1.0)]).unwrap();
        let g = grid(16);
        let f = torus_metric_sample(&p, &g).unwrap();
        for (k, t) in g.nodes().into_iter().enumerate() {
            assert_relative_eq!(f[(3, k)], 2.0 + t.cos(), epsilon = 1e-15);
        }

        let p = MetricProfile::new(2.0, vec![FourierTerm::new(1, 1, 0.5)]).unwrap();
        assert_relative_eq!(p.eval(0.0, 0.0), 2.5);
        assert_relative_eq!(p.eval(PI, 0.0), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn rejects_nonpositive_profiles() {
        let err = MetricProfile::new(1.0, vec![FourierTerm::new(0, 1, 1.5)]).unwrap_err();
        assert!(matches!(err, LabError::NonPositiveMetric { .. }));
        let err = MetricProfile::new(-1.0, vec![]).unwrap_err();
        assert!(matches!(err, LabError::InvalidProfile { ref field, .. } if field == "constant"));
    }

    #[test]
    fn json_names_offending_field() {
        let err = MetricProfile::from_json(r#"{"constant": 1.0, "terms": [{"m": 0, "n": 1}]}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("amp"), "{err}");
        let err =
            MetricProfile::from_json(r#"{"constant": 0.5, "terms": [{"m":0,"n":1,"amp":1.0}]}"#)
                .unwrap_err();
        assert!(err.to_string().contains("not positive"), "{err}");
        let p = MetricProfile::from_json(
            r#"{"constant": 2, "terms": [{"m":1,"n":1,"amp":0.5,"phase_theta":0,"phase_t":0.3}]}"#,
        )
        .unwrap();
        assert_eq!(p.terms()[0].phase_t, 0.3);
        let back = MetricProfile::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn exp_cosine_matches_exponential() {
        let p = MetricProfile::exp_cosine(1.0, 0.5, -PI / 2.0).unwrap();
        for k in 0..37 {
            let t = 0.17 * k as f64;
            assert_relative_eq!(p.eval(1.0, t), (0.5 * t.sin()).exp(), epsilon = 1e-14);
        }
        let p = MetricProfile::exp_cosine(1.0, -1.0, 0.0).unwrap();
        assert_relative_eq!(p.eval(0.0, 0.4), (-(0.4f64).cos()).exp(), epsilon = 1e-14);
    }

    #[test]
    fn product_profiles_multiply_pointwise() {
        let a = MetricProfile::new(1.0, vec![FourierTerm::new(1, 0, 0.5).with_phases(0.2, 0.0)])
            .unwrap();
        let c = MetricProfile::exp_cosine(1.0, 0.5, 0.3).unwrap();
        let p = MetricProfile::product(&a, &c).unwrap();
        for (theta, t) in [(0.0, 0.0), (1.3, 2.1), (4.0, 5.5)] {
            assert_relative_eq!(
                p.eval(theta, t),
                a.eval(theta, 0.0) * c.eval(0.0, t),
                epsilon = 1e-14
            );
        }
        assert!(MetricProfile::product(&c, &a).is_err());
    }

    #[test]
    fn flat_torus_geometry_vanishes() {
        let geo = torus_geometry(&MetricProfile::flat(), &grid(16)).unwrap();
        assert!(geo.kappa_coeff.iter().all(|v| v.abs() < 1e-15));
        assert!(geo.scal_m.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn torus_geometry_matches_symbolic_derivatives() {
        let g = grid(64);
        let p = MetricProfile::new(2.0, vec![FourierTerm::new(0, 1, 1.0)]).unwrap();
        let geo = torus_geometry(&p, &g).unwrap();
        for (k, t) in g.nodes().into_iter().enumerate() {
            let f = 2.0 + t.cos();
            assert_relative_eq!(geo.kappa_coeff[(5, k)], t.sin() / f, epsilon = 1e-13);
            assert_relative_eq!(geo.scal_m[(5, k)], 2.0 * t.cos() / f, epsilon = 1e-12);
        }

        let p = MetricProfile::exp_cosine(1.0, 1.0, 0.0).unwrap();
        let geo = torus_geometry(&p, &g).unwrap();
        for (k, t) in g.nodes().into_iter().enumerate() {
            assert_relative_eq!(geo.kappa_coeff[(0, k)], t.sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn t_independent_profile_has_no_curvature() {
        let p = MetricProfile::new(3.0, vec![FourierTerm::new(2, 0, 1.0).with_phases(0.4, 0.0)])
            .unwrap();
        assert!(p.is_t_independent());
        let geo = torus_geometry(&p, &grid(32)).unwrap();
        assert!(geo.kappa_coeff.iter().all(|v| v.abs() < 1e-14));
        assert!(geo.scal_m.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn s3_closed_forms() {
        for s in [0.0, 0.3, 1.0] {
            let geo = s3_geometry(1.0, s).unwrap();
            assert_relative_eq!(geo.scal_transverse, 8.0);
            assert_eq!(geo.kappa_norm, 0.0);
            assert_relative_eq!(geo.a_norm_sq, 2.0);
        }
        let geo = s3_geometry(0.5, 0.5).unwrap();
        assert_relative_eq!(geo.scal_transverse, 4.4, epsilon = 1e-14);
        assert_relative_eq!(geo.kappa_norm, 0.6, epsilon = 1e-14);
        assert_relative_eq!(geo.a_norm_sq, 1.28, epsilon = 1e-14);

        let geo = s3_geometry(2.0, 0.0).unwrap();
        assert_relative_eq!(geo.scal_transverse, 26.0);
        assert_eq!(geo.kappa_norm, 0.0);
        assert_relative_eq!(geo.a_norm_sq, 8.0);
    }

    #[test]
    fn s3_domain_errors() {
        assert!(s3_geometry(0.0, 0.5).is_err());
        assert!(s3_geometry(1.0, 1.5).is_err());
        assert!(s3_geometry(1.0, -0.1).is_err());
    }

    #[test]
    fn s3_kappa_vanishes_at_poles_and_scal_is_monotone() {
        for r in [0.3, 0.9, 1.7, 5.0] {
            assert_eq!(s3_geometry(r, 0.0).unwrap().kappa_norm, 0.0);
            assert_eq!(s3_geometry(r, 1.0).unwrap().kappa_norm, 0.0);
            let sign = (r * r - 1.0).signum();
            let vals: Vec<f64> = (0..=100)
                .map(|i| s3_geometry(r, i as f64 / 100.0).unwrap().scal_transverse)
                .collect();
            // denominator moves from 1 to r², so Scal^∇ moves opposite to r² − 1
            assert!(vals.windows(2).all(|w| sign * (w[1] - w[0]) <= 0.0));
        }
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::periodic(6).is_err());
        assert!(GridSpec::periodic(9).is_err());
        let g = GridSpec::periodic(64).unwrap();
        assert_eq!(g.trusted_window(), 8.0);
    }
}
