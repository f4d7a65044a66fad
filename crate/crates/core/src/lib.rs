pub mod bounds;
pub mod cli;
pub mod domain;
pub mod error;
pub mod functions;
pub mod info;
pub mod verify;

pub use error::{CommlabError, Result};
