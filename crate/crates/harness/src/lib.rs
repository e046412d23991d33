pub mod csv;
pub mod error;
pub mod experiment;
pub mod reference;
pub mod spec;
pub mod synth;
pub mod tune;

pub use error::{HarnessError, Result};
