//! Simulation and numerical certification of quantum state verification,
//! covering standard probabilistic strategies and sequential nondemolition
//! protocols built from ancilla-coupled QND measurements.

pub mod circuit;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod ndqv;
pub mod rng;
pub mod selfcheck;
pub mod state;
pub mod strategy;

pub use error::{Error, Result};
