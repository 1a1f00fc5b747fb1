//! Exact combinatorics of graphs and shapes.
//!
//! Counts are arbitrary-precision integers throughout; conversion to floating
//! point happens only in the advantage layer.

mod canon;
mod count;
mod graph;
mod pattern;
mod profile;
mod shape;

pub use canon::MAX_COMPONENT_VERTICES;
pub use count::{
    automorphism_count, count_in_complete, count_injective_homs, count_labelled_copies, falling_factorial,
    star_copies, CopyCounter,
};
pub use graph::Graph;
pub(crate) use graph::AdjBits;
pub use pattern::{enumerate_patterns, pattern_shapes, IntersectionPattern, PatternShapes};
pub use profile::DegreeProfile;
pub use shape::{canonical_form, enumerate_shapes, CanonKey, Shape, MAX_ENUMERATED_EDGES};
