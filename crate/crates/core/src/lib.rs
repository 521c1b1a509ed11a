//! Numerical laboratory for basic Dirac operators on Riemannian flows.
//!
//! Two model families are covered: circle flows on the 2-torus with
//! bundle-like metrics `f(θ,t)² dθ² + dt²`, and the isometric flows `γ^r` on
//! the round 3-sphere. On the torus the crate assembles the basic Dirac
//! operator on spinors and on basic forms, the basic Laplacian and both sides
//! of the transversal Lichnerowicz formula, and checks that the Dirac spectrum
//! does not depend on the bundle-like metric. On `S³` it evaluates the
//! curvature lower bounds for `λ²` by one-dimensional optimisation.

pub mod basic_calculus;
pub mod bounds;
pub mod collocation;
pub mod error;
pub mod model_spaces;
pub mod operators;
pub mod report;
pub mod spectral;
pub mod verify;

pub use basic_calculus::{BasicField, FieldDegree, LeafVolumeDensity};
pub use bounds::{BoundKind, BoundQuantities, BoundReport, PiecewiseReference};
pub use error::{LabError, Result};
pub use model_spaces::{FourierTerm, GridSpec, MetricProfile, S3FlowGeometry, SpinStructure};
pub use operators::{FormDegree, WeightedOperator};
pub use spectral::SpectrumReport;
pub use verify::{VerificationBundle, VerificationReport};
