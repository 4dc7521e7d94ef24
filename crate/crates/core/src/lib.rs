//! Topological quivers of Markov operators.
//!
//! The crate turns finite and grid-discretized Markov operators into
//! weighted quivers, decides simplicity of the associated quiver algebra
//! from condition (L) and the saturated hereditary lattice, builds dual
//! quivers with their K-theory, and runs numerical checks for affine
//! iterated function systems.
//!
//! Kernels and quivers are generic over [`Scalar`]: exact [`Rational`]s for
//! finite chains, `f64` for grid models.

pub mod dual;
pub mod error;
pub mod ifs;
pub mod markov;
pub mod model_io;
pub mod quiver;
pub mod scalar;
pub mod selftest;
pub mod snf;
pub mod structure;

pub use error::{Error, Result};
pub use markov::{vertex_set, AffineMap, InteriorMode, Kernel, MapSpec, MarkovModel, SpaceSpec, VertexSet};
pub use quiver::{build_quiver, ConditionL, Edge, Path, Quiver};
pub use scalar::{Rational, Scalar};

/// Exact finite model.
pub type ExactModel = MarkovModel<Rational>;
/// Floating-point model, used for interval grids.
pub type GridModel = MarkovModel<f64>;
pub type ExactQuiver = Quiver<Rational>;
pub type GridQuiver = Quiver<f64>;
