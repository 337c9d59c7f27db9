//! Characteristic forms of vector bundles via Chern–Weil theory.
//!
//! A [`geometry::Manifold`] carries charts and transitions, a
//! [`bundle::VectorBundle`] carries local frames and frame changes, and a
//! [`connection::BundleConnection`] holds connection one-forms per frame.
//! [`charclass`] turns a curvature matrix into characteristic forms using
//! the Taylor coefficients computed in [`series`]. [`scenario`] and [`cli`]
//! back the `chernweil` binary.

pub mod bundle;
pub mod charclass;
pub mod cli;
pub mod connection;
pub mod forms;
pub mod geometry;
pub mod matrix;
pub mod quadrature;
pub mod scenario;
pub mod series;

use symexpr::{equal_sym, Expr};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(#[from] geometry::GeometryError),
    #[error("forms: {0}")]
    Form(#[from] forms::FormError),
    #[error("bundle: {0}")]
    Bundle(#[from] bundle::BundleError),
    #[error("connection: {0}")]
    Connection(#[from] connection::ConnectionError),
    #[error("characteristic class: {0}")]
    CharClass(#[from] charclass::CharClassError),
    #[error("quadrature: {0}")]
    Quadrature(#[from] quadrature::QuadratureError),
    #[error("series: {0}")]
    Series(#[from] series::SeriesError),
    #[error("expression: {0}")]
    Expr(#[from] symexpr::ExprError),
}

/// Canonical equality, falling back to randomized testing for identities
/// between transcendental atoms.
pub(crate) fn same(a: &Expr, b: &Expr) -> bool {
    a == b || equal_sym(a, b, 20, 1e-9).is_true()
}
