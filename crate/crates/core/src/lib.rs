//! Reflection statements for resolution, levelled refutations, a Res(2)
//! proof builder and a random-restriction laboratory.
//!
//! Variables, clause indices and proof steps are 1-based throughout.

pub mod cnf;
pub mod dimacs;
pub mod encoders;
pub mod lab;
pub mod levelled;
pub mod res2;
pub mod resolution;

pub use cnf::{Clause, ClauseSink, Cnf, FamilyCounts, Literal, PartialAssignment, Var};
pub use resolution::{check_resolution, height, Justification, ResStep, ResolutionProof};
