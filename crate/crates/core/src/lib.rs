//! Synthesis of complete robotic computing systems from a component catalog.
//!
//! An instance lists devices, tasks and functional modules together with a
//! mission. [`expansion`] enumerates every connection and link that could
//! exist, [`model`] turns the instance into a 0/1 program, [`solver`] finds
//! an optimal selection and [`verify`] checks it against the instance and
//! turns it into a readable system description.

pub mod catalog;
pub mod expansion;
pub mod gen;
pub mod model;
pub mod num;
pub mod solver;
pub mod verify;

pub use catalog::{load_instance, ProblemInstance};
pub use expansion::Candidates;
pub use model::{build_program, BuildOptions, FlowMode, Program};
pub use num::Rational;
