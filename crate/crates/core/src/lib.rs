//! Off-diagonal decay of matrices.
//!
//! Norms of the classical decay algebras (Jaffard, Schur, convolution-dominated,
//! weighted variants), commutator derivations and the modulation group, moduli of
//! smoothness and Hölder-Zygmund norms, approximation by banded matrices, and
//! experiment runners that check how these decay classes behave under inversion.

pub mod error;
pub mod matrix_core;
pub mod norms;
pub mod smoothness;
pub mod approximation;
pub mod experiments;
pub mod cli_io;

pub use error::{DecayError, Result};
pub use matrix_core::{DecayMatrix, DiffIndex, GeometryKind, IndexGeometry, Metric};
