//! Simulation library for a high-dimensional cryptographic quantum
//! parameter-estimation protocol: qudit probes, announced POVM measurements,
//! eavesdropper models, Fisher-information analysis, and a Monte Carlo
//! verification suite for the protocol's closed-form precision and
//! concealment claims.

pub mod adversary;
pub mod analysis;
pub mod config;
pub mod encoding;
pub mod fisher;
pub mod protocol;
pub mod qudit;
pub mod rng;

mod error;
pub mod exec;

pub use error::Error;
pub use exec::Exec;

pub type Result<T> = std::result::Result<T, Error>;
