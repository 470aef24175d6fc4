//! Program facts: identifiers, the function/class/import summaries and
//! class-hierarchy queries.

pub mod ident;
pub mod mro;
pub mod previsit;
pub mod program;
pub mod summary;

pub use ident::{Ident, Kind};
pub use program::Program;
