//! Frames for graded ladders of Banach and Hilbert spaces, realized on
//! finite truncations.
//!
//! A ladder is a finite family of norms `‖·‖_0 ≤ ‖·‖_1 ≤ … ≤ ‖·‖_S` on one
//! coefficient model. A frame system pairs a matrix of functionals with an
//! X-side ladder (the spaces being analyzed) and a Θ-side ladder (the
//! sequence spaces holding coefficients). The modules here build ladders,
//! estimate per-level frame bounds, compute dual sequences, verify series
//! expansions, and run the three space constructions, including the
//! solid sequence norm defined as a constrained infimum.
//!
//! ```
//! use frechet_frames::models;
//! use frechet_frames::frames::{estimate_frame_bounds, BoundMethod};
//!
//! let model = models::build_hermite_model(6, 2).unwrap();
//! let b = estimate_frame_bounds(&model.frame, 1, &BoundMethod::Auto).unwrap();
//! assert!(b.tight);
//! ```

pub mod constructions;
pub mod error;
pub mod frames;
pub mod ladder;
pub mod models;
pub mod numeric;
pub mod sampling;

pub use error::{Error, Result};
pub use numeric::{CoeffMatrix, CoeffVector, NormSpec};

/// Global absolute comparison tolerance.
pub const TOL: f64 = 1e-9;
