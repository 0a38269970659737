//! Variable layouts, clause generators for the refutation statements, and
//! the substitutions relating them.

pub mod am;
pub mod families;
pub mod layout;
pub mod substitution;

pub use am::*;
pub use families::*;
pub use layout::*;
pub use substitution::*;
