//! Application-centered, flow-sensitive call graph construction for Python.
//!
//! Analysis starts from entry functions and discovers callees on demand.
//! Each function is walked once along its control-flow graph while a
//! function type graph (FTG) tracks which classes, functions and modules
//! every variable and field may hold at each statement.

pub mod driver;
pub mod error;
pub mod facts;
pub mod ftg;
pub mod inter;
pub mod intra;
pub mod source;
pub mod synth;
pub mod transfer;

pub use error::{ConfigError, ModuleError};
pub use facts::{Ident, Kind, Program};
pub use ftg::{Ftg, Relation};
