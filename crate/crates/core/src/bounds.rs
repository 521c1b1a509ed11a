//! Lower bounds for the squared eigenvalues of the basic Dirac operator.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::model_spaces::s3_geometry;
use crate::report::fmt_num;

/// Squared first Dirac eigenvalue of the round unit 3-sphere, `(3/2)²`.
pub const S3_DIRAC_FIRST_EIGENVALUE_SQ: f64 = 9.0 / 4.0;

/// Codimension of the flows on `S³`.
pub const S3_CODIMENSION: u32 = 2;

/// Width at which golden-section refinement stops.
pub const REFINEMENT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// `λ² ≥ q/(4(q−1)) inf Scal^∇`
    Esti,
    /// `λ² ≥ q/(4(q−1)) inf(Scal_M − Scal_L + |A|² + |T|²)`
    Estima,
    /// `λ² ≥ q/(4(q−1)) inf(Scal_M + |A|² + |κ|²)`, flows only
    Estmflot,
    /// `λ² ≥ ½λ(D_M)² − (n/16) sup |A|²`
    Minmax,
    /// `λ² ≥ (q+1)/(4q) inf(Scal_M + |A|²)`
    Collapse,
}

impl BoundKind {
    pub fn tag(self) -> &'static str {
        match self {
            BoundKind::Esti => "esti",
            BoundKind::Estima => "estima",
            BoundKind::Estmflot => "estmflot",
            BoundKind::Minmax => "minmax",
            BoundKind::Collapse => "collapse",
        }
    }
}

/// Extremal curvature quantities feeding the bounds. Unused entries stay `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundQuantities {
    pub inf_scal_transverse: Option<f64>,
    /// `inf(Scal_M − Scal_L + |A|² + |T|²)`
    pub inf_submersion_sum: Option<f64>,
    /// `inf(Scal_M + |A|² + |κ|²)`
    pub inf_flow_sum: Option<f64>,
    /// `λ(D_M)²`
    pub dirac_eigenvalue_sq: Option<f64>,
    pub sup_a_norm_sq: Option<f64>,
    /// `inf(Scal_M + |A|²)`
    pub inf_collapse_sum: Option<f64>,
}

fn require(value: Option<f64>, symbol: &'static str) -> Result<f64> {
    value.ok_or(LabError::MissingQuantity(symbol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    /// Lower bound for `λ²`.
    pub value: f64,
    pub inputs: BoundQuantities,
    pub r: Option<f64>,
    pub reference_value: Option<f64>,
}

impl BoundReport {
    pub fn abs_error(&self) -> Option<f64> {
        self.reference_value.map(|r| (self.value - r).abs())
    }
}

/// Evaluates one bound for codimension `q` and `dim M = n + 1`.
pub fn eval_bound(
    kind: BoundKind,
    q: u32,
    n: u32,
    quantities: &BoundQuantities,
) -> Result<BoundReport> {
    if q < 2 {
        return Err(LabError::Domain(format!(
            "codimension q must be >= 2, got {q}"
        )));
    }
    let qf = f64::from(q);
    let friedrich = qf / (4.0 * (qf - 1.0));
    let value = match kind {
        BoundKind::Esti => friedrich * require(quantities.inf_scal_transverse, "inf Scal^nabla")?,
        BoundKind::Estima => {
            friedrich
                * require(
                    quantities.inf_submersion_sum,
                    "inf(Scal_M - Scal_L + |A|^2 + |T|^2)",
                )?
        }
        BoundKind::Estmflot => {
            friedrich * require(quantities.inf_flow_sum, "inf(Scal_M + |A|^2 + |kappa|^2)")?
        }
        BoundKind::Minmax => {
            let lambda_sq = require(quantities.dirac_eigenvalue_sq, "lambda(D_M)^2")?;
            let sup_a = require(quantities.sup_a_norm_sq, "sup |A|^2")?;
            0.5 * lambda_sq - f64::from(n) / 16.0 * sup_a
        }
        BoundKind::Collapse => {
            (qf + 1.0) / (4.0 * qf) * require(quantities.inf_collapse_sum, "inf(Scal_M + |A|^2)")?
        }
    };
    if !value.is_finite() {
        return Err(LabError::Domain(format!(
            "{} bound is not finite",
            kind.tag()
        )));
    }
    Ok(BoundReport {
        kind,
        value,
        inputs: *quantities,
        r: None,
        reference_value: None,
    })
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
pub fn golden_section_minimize(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Minimum of `f` on `[0, 1]`: uniform scan, then golden-section refinement
/// around the best sample.
pub fn minimize_unit_interval(f: impl Fn(f64) -> f64, resolution: usize) -> (f64, f64) {
    let last = resolution.max(2) - 1;
    let node = |i: usize| i as f64 / last as f64;
    let (best, best_val) =
        (0..=last)
            .map(|i| (i, f(node(i))))
            .fold(
                (0, f64::INFINITY),
                |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
            );
    let lo = node(best.saturating_sub(1));
    let hi = node((best + 1).min(last));
    let (x, v) = golden_section_minimize(&f, lo, hi, REFINEMENT_TOLERANCE);
    if v < best_val {
        (x, v)
    } else {
        (node(best), best_val)
    }
}

/// Closed-form values of the `S³` bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseReference {
    pub esti: f64,
    pub estmflot: f64,
    pub minmax: f64,
}

impl PiecewiseReference {
    pub fn get(&self, kind: BoundKind) -> Option<f64> {
        match kind {
            BoundKind::Esti => Some(self.esti),
            BoundKind::Estmflot => Some(self.estmflot),
            BoundKind::Minmax => Some(self.minmax),
            BoundKind::Estima | BoundKind::Collapse => None,
        }
    }
}

/// Piecewise closed forms on the `S³` flow family; both branches agree at `r = 1`.
pub fn piecewise_reference(r: f64) -> Result<PiecewiseReference> {
    if !(r.is_finite() && r > 0.0) {
        return Err(LabError::Domain(format!(
            "flow parameter r must be > 0, got {r}"
        )));
    }
    let r2 = r * r;
    Ok(if r <= 1.0 {
        PiecewiseReference {
            esti: 1.0 + 3.0 * r2,
            estmflot: r2 + 3.0,
            minmax: 9.0 / 8.0 - 1.0 / (4.0 * r2),
        }
    } else {
        PiecewiseReference {
            esti: 4.0,
            estmflot: 1.0 / r2 + 3.0,
            minmax: 9.0 / 8.0 - r2 / 4.0,
        }
    })
}

/// Extremal curvature quantities of the `S³` flow `γ^r`, found numerically over `s = |z|²`.
pub fn s3_quantities(r: f64, resolution: usize) -> Result<BoundQuantities> {
    s3_geometry(r, 0.5)?;
    let geo = |s: f64| s3_geometry(r, s.clamp(0.0, 1.0)).expect("domain checked");
    let (_, inf_scal) = minimize_unit_interval(|s| geo(s).scal_transverse, resolution);
    let (_, inf_flow) = minimize_unit_interval(|s| geo(s).flow_curvature_sum(), resolution);
    let (_, neg_sup_a) = minimize_unit_interval(|s| -geo(s).a_norm_sq, resolution);
    let (_, inf_collapse) = minimize_unit_interval(
        |s| {
            let g = geo(s);
            g.scal_m + g.a_norm_sq
        },
        resolution,
    );
    Ok(BoundQuantities {
        inf_scal_transverse: Some(inf_scal),
        inf_submersion_sum: None,
        inf_flow_sum: Some(inf_flow),
        dirac_eigenvalue_sq: Some(S3_DIRAC_FIRST_EIGENVALUE_SQ),
        sup_a_norm_sq: Some(-neg_sup_a),
        inf_collapse_sum: Some(inf_collapse),
    })
}

/// The esti, estmflot, minmax and collapse bounds on `(S³, γ^r)`.
pub fn s3_bounds(r: f64, resolution: usize) -> Result<Vec<BoundReport>> {
    if resolution < 100 {
        return Err(LabError::Domain(format!(
            "resolution must be >= 100, got {resolution}"
        )));
    }
    let quantities = s3_quantities(r, resolution)?;
    let reference = piecewise_reference(r)?;
    [
        BoundKind::Esti,
        BoundKind::Estmflot,
        BoundKind::Minmax,
        BoundKind::Collapse,
    ]
    .into_iter()
    .map(|kind| {
        let mut report = eval_bound(kind, S3_CODIMENSION, S3_CODIMENSION, &quantities)?;
        report.r = Some(r);
        report.reference_value = reference.get(kind);
        Ok(report)
    })
    .collect()
}

/// Header and rows `kind,r,value,reference_value,abs_error`.
pub fn write_bounds_csv<W: Write>(reports: &[BoundReport], mut out: W) -> std::io::Result<()> {
    writeln!(out, "kind,r,value,reference_value,abs_error")?;
    for rep in reports {
        let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            rep.kind.tag(),
            opt(rep.r),
            fmt_num(rep.value),
            opt(rep.reference_value),
            opt(rep.abs_error())
        )?;
    }
    Ok(())
}
