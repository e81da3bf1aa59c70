//! Weight synthesis: collapse maps, exact fits of separated classes, and
//! interpolation of finite sets.

pub mod collapse;
pub mod finite;
pub mod multi_class;
pub mod two_class;

pub use collapse::{collapse_to_point, collapse_with_hyperplane, CollapseResult};
pub use finite::{finite_exact_fit, generic_direction};
pub use multi_class::{multi_class_exact_fit, MAX_EPSILON_HALVINGS};
pub use two_class::two_class_exact_fit;
