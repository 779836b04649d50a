//! Exact polyhedral chains with integer weights in finite-dimensional normed
//! spaces, and a certified isoperimetric filling pipeline built on them.

pub mod chain;
pub mod cli_io;
pub mod covering;
pub mod decomposition;
pub mod error;
pub mod isofill;
pub mod normed_space;
pub mod product_cone;
pub mod rational;
pub mod restrict;
pub mod slicing;

pub use chain::{AffineMap, Chain, PiecewiseAffineMap, Simplex};
pub use error::{Error, Result};
pub use normed_space::{NormKind, NormSpec, NormedSpace, PlaneBasis};
pub use rational::{Point, Q};
pub use restrict::{restrict_to_ball, Ball, ClipMode, Restriction};
