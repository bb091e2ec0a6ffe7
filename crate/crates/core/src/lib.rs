//! Numerical toolkit for meromorphic functions with a pole of order `m` at
//! `p ∈ [0, 1)`: Laurent re-expansion, area identities, coefficient
//! certificates, explicit quasiconformal extensions, Schwarzian norms and
//! harmonic-map extension criteria.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod area;
pub mod certify;
pub mod error;
pub mod extension;
pub mod formats;
pub mod grid;
pub mod harmonic;
pub mod meromorphic;
pub mod schwarzian;
pub mod series;

pub use area::{AreaReport, Energy};
pub use certify::{Certificate, CriterionId, Verdict};
pub use error::{Error, Result};
pub use extension::{DilatationField, ExtensionMap, ExteriorRule, NonDegeneracyEstimate};
pub use harmonic::{CoLipschitzEstimate, ConvexDomain, HarmonicMapSpec};
pub use meromorphic::{LaurentTail, PolarizedMeromorphic, PrincipalPart};
pub use num_complex::Complex64;
pub use schwarzian::{HolomorphicMap, MobiusMap, SchwarzianNormReport, SharpExtremal};
pub use series::{binomial, binomial_expand, TailBound, TruncatedSeries};
