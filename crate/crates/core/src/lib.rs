//! Message information flow on time-unrolled computational graphs.
//!
//! A computational system is a set of clocked nodes that send transmissions
//! along the edges of a complete directed graph at discrete times. This crate
//! simulates such systems exactly, decides on which edges information about a
//! chosen message flows, recovers the paths that information takes, and
//! offers a sampled-trial detector built on permutation tests.

pub mod error;
pub mod expr;
pub mod cli;
pub mod derived;
pub mod dot;
pub mod fixtures;
pub mod flow;
pub mod graph;
pub mod joint;
pub mod paths;
pub mod random;
pub mod report;
pub mod sampler;
pub mod sim;
pub mod system;
pub mod value;

pub use error::{Error, Result};
pub use expr::Expr;
pub use graph::{EdgeRef, NodeRef, UnrolledGraph};
pub use joint::{enumerate_joint, exact_joint, linear_propagate, DiscreteJoint, GaussianJoint, InfoMeasure, VarId};
pub use system::{Law, Regime, SystemSpec};
pub use value::{GaussRat, Value};
