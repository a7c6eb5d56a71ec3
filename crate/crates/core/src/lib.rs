//! Simulation of noisy Rydberg-atom arrays and machine-learning
//! identification of their atom number, geometry and symmetrized base state.
//!
//! The pipeline runs [`geometry`] → [`basis`] → [`dynamics`] → [`datagen`] →
//! [`ml`], and [`experiment`] composes it into config-driven studies.

pub mod basis;
pub mod datagen;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod ml;
pub mod parallel;
pub mod seed;

pub use error::{Error, Result};
