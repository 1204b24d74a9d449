//! Numerical laboratory for zero mean curvature (ZMC) graphs `t = ψ(x, y)`
//! in Lorentz-Minkowski 3-space and their fluid-mechanical duals.
//!
//! - [`expr`], [`jet`], [`field`]: expressions with exact second-order jets
//!   and sampled fields with finite-difference jets.
//! - [`geometry`]: causal type, PDE residuals, curvatures, light-like set
//!   detection and the light-like line check.
//! - [`duality`]: Chaplygin gas states and the stream function ↔ potential
//!   duality by path integration.
//! - [`solver`]: Newton solver for Dirichlet problems of the minimal and
//!   maximal surface equations.
//! - [`gallery`]: the explicit surfaces used throughout the tests.

pub mod duality;
pub mod error;
pub mod expr;
pub mod field;
pub mod gallery;
pub mod geometry;
pub mod jet;
pub mod quadrature;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
pub use expr::{parse, Expression, Params};
pub use field::{GraphField, Lattice, Point2, Rect, SampledGrid};
pub use jet::Jet2;
