pub mod cli;
pub mod error;
pub mod geography;
pub mod lattice;
pub mod ledger;
mod linalg;
pub mod report;
pub mod surfaces;
pub mod surgery;
pub mod svg;
pub mod sw;
pub mod verify;

pub use error::{Error, Result};
