//! Low-treewidth embeddings with additive distortion for trees and planar
//! graphs, plus generators and verifiers for the instances they are tested on.

pub mod baker;
pub mod constants;
pub mod emulator;
pub mod error;
pub mod graph;
pub mod harness;
pub mod instances;
pub mod io;
pub mod portal;
pub mod rspd;
pub mod stochastic;

pub use error::{Error, Result};
