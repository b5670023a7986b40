//! Numerical exterior calculus for Chern–Weil and Mathai–Quillen forms on
//! explicit vector bundles, with chains, periods and differential characters.

pub mod error;
pub mod ak_pairs;
pub mod berezin;
pub mod bundle;
pub mod chains;
pub mod chern_weil;
pub mod diff_char;
pub mod exterior;
pub mod fixture;

pub use error::{GbcError, Result};
pub use exterior::{Chart, FormField, GradedElement, SmoothMap};
