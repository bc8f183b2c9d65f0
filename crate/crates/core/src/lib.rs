pub mod cli;
pub mod condensed;
pub mod error;
pub mod io;
pub mod laguerre;
pub mod linalg;
pub mod measure;
pub mod pencil;
pub mod specfun;
pub mod transform;

pub use error::{Error, Result};
