//! Numerical workbench for Sidon constants, multiplier norms and
//! Kahane-Salem-Zygmund type estimates on the torus and the Boolean cube.

pub mod boolean_cube;
pub mod checks;
pub mod cli;
pub mod error;
pub mod index_sets;
pub mod ksz_lab;
pub mod multipliers;
pub mod par;
pub mod primes;
pub mod report;
pub mod sequences;
pub mod trig_poly;

pub use error::{Error, Result};
