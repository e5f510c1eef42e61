pub mod channel;
pub mod conesim;
pub mod demo;
pub mod engineer;
pub mod error;
pub mod linops;
pub mod quasireal;
pub mod random;
pub mod sdp;

pub use error::{Error, Result};
