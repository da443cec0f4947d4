//! Index geometries, dense matrix storage and the algebra operations on it.

mod geometry;
mod matrix;

pub use geometry::{DiffIndex, GeometryKind, IndexGeometry, Metric};
pub(crate) use geometry::DiffLayout;
pub use matrix::{DecayMatrix, MAX_CONDITION};
