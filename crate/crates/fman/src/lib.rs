//! Numerical verification engine for metric f-manifolds.
//!
//! The crate checks the defining axioms of a metric f-structure on a
//! user-supplied coordinate chart, classifies the structure (K/S/C,
//! almost trans-S, trans-S), extracts the characteristic functions by three
//! independent routes, and builds new structures through generalized
//! D-conformal deformations and warped products over flat factors, with
//! predicted-versus-reextracted cross-checks.
//!
//! All derivatives are exact (forward-mode order-2 jets); all verification
//! is pointwise over deterministic, seeded sample sets.

pub mod chart;
pub mod cli;
pub mod constructions;
pub mod deffile;
pub mod error;
pub mod expr;
pub mod fields;
pub mod manifold;
pub mod report;
pub mod sample;
pub mod tensor;
pub mod trans_s;
pub mod verify;

pub use chart::Chart;
pub use error::{FmanError, Result};
pub use expr::{parse_expr, Jet2, ScalarExpr};
pub use manifold::MetricFManifold;
pub use verify::{CheckConfig, Label, Verifier};
