//! Graded-commutative algebra of forms with fiber exterior coefficients.

mod element;
mod field;

pub use element::{GradedElement, ZERO_THRESHOLD};
pub use field::{
    exterior_derivative, fd_exterior_derivative, pullback_element, pullback_form, Chart, Evaluator,
    FormField, PointMap, SmoothMap, DEFAULT_FD_STEP, DERIVATIVE_TOLERANCE,
};
pub(crate) use field::identity_matrix;
