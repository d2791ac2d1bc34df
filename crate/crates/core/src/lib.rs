pub mod bench;
pub mod catalog;
pub mod config;
pub mod dataset;
pub mod error;
pub mod features;
pub mod generate;
pub mod gp;
pub mod io;
pub mod linalg;
pub mod net;
pub mod solver;
pub mod trainer;

pub use error::{Error, Result};
