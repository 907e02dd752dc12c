//! Trajectory-oriented state feedback.
//!
//! A stabilizing state feedback `u = K x` for `x⁺ = A x + B u` can always be
//! written as a gradient-descent step on a quadratic value `V = xᵀ P x`:
//!
//! ```text
//! A + B K = I − 2 Γ P
//! ```
//!
//! where `Γ` is a step-size (direction) matrix. This crate designs such
//! laws by solving small linear matrix inequality problems, maps them to and
//! from LQR, extends them with heavy-ball momentum, and simulates the
//! resulting closed loops.
//!
//! ```
//! use gdtraj::{gd, Matrix, SystemModel};
//!
//! let system = SystemModel::new(
//!     Matrix::from_rows(&[[1.0, 0.2], [0.0, 1.0]])?,
//!     Matrix::from_rows(&[[0.06], [0.2]])?,
//! )?;
//! let design = gd::synthesize_gd(&system, 1.0, &gd::GammaSpec::scalar())?;
//! assert!(design.spectral_radius()? < 1.0);
//! # Ok::<(), gdtraj::Error>(())
//! ```

pub mod error;
pub mod gd;
pub mod heavyball;
pub mod linalg;
pub mod lqr;
pub mod sdp;
pub mod sim;
mod system;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use system::SystemModel;
