pub mod cli;
pub mod error;
pub mod io;
pub mod lemmas;
pub mod linalg;
pub mod model;
pub mod quasilattice;
pub mod spectral;
pub mod verify;
pub mod windows;
pub mod wldos;

pub use error::{Error, Result};
