//! Analysis of exponential splittings for nonautonomous linear
//! discrete-time systems x_{n+1} = A_n x_n.
//!
//! A splitting is carried by a family of projections P_n invariant
//! under the evolution; the range contracts (or at least grows slower)
//! while the kernel expands. Eight concepts arise from three
//! independent choices: uniform or not (c = 1 versus c > 1), strong or
//! not (full operator norms with the skew evolution versus gains
//! restricted to range and kernel), and dichotomy or not (rates
//! straddling 1). This crate measures evolution gains over a finite
//! window, verifies user certificates against them, fits the tightest
//! certificate by linear programming, and classifies a system against
//! all eight concepts at once.

pub mod corpus;
pub mod invariance;
pub mod numerics;
pub mod projections;
pub mod scan;
pub mod splitting;
pub mod system;

pub use invariance::SkewTable;
pub use numerics::matrix::NormKind;
pub use projections::ProjectionDef;
pub use splitting::{Certificate, Concept};
pub use system::{EvolutionCache, SystemDef};

/// Window used when the caller does not choose one.
pub const DEFAULT_WINDOW: i64 = 40;
/// Cap on the envelope constant N during fitting (linear scale).
pub const DEFAULT_N_CAP: f64 = 1e3;
/// Tolerance for log-scale comparisons and residual checks.
pub const DEFAULT_LOG_TOL: f64 = 1e-9;
