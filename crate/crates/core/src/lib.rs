//! Vine-copula modeling and goodness-of-fit testing.

pub mod bootstrap;
pub mod cli;
pub mod data;
pub mod dependence;
pub mod error;
pub mod fd;
pub mod gof;
pub mod infomatrix;
pub mod optim;
pub mod pair;
pub mod rng;
pub mod rvine;
pub mod special;
pub mod statistics;
pub mod transforms;

pub use data::{PitMatrix, SampleMatrix};
pub use error::{Error, Result};
pub use pair::{Family, PairCopula, ParamDomain, Rotation};
pub use rvine::{RVineMatrix, RVineSpec};
