//! Positive L¹-contractions on finite-dimensional von Neumann algebras
//! `⊕_b Mat(d_b)` with a faithful weighted trace.
//!
//! The crate covers the trace-norm calculus of the algebra, the
//! superoperators acting on it, and the long-run analyses built on top:
//! mixing, complete mixing, smoothing profiles and the decay-or-fixed-point
//! dichotomy.

pub mod algebra;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod gallery;
pub mod mass;
pub mod random;
pub mod spectrum;
pub mod superop;

pub use algebra::{Algebra, Element, Projection, C64};
pub use dynamics::AnalysisParams;
pub use error::{Error, Result};
pub use mass::MassMode;
pub use superop::{Certificate, KrausOp, SuperOp};
