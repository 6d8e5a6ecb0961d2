//! Steinitz-order invariants of group-chain Cantor actions for `Z^r` and the
//! integer Heisenberg group.

pub mod chain;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod families;
pub mod finite_nilpotent;
pub mod solenoid;
pub mod supernatural;
pub mod truth;

pub use error::{Error, Result};
pub use supernatural::{Exponent, PrimeSet, PrimeSpectrumReport, PrimeStream, SteinitzNumber, TailRule};
pub use truth::Truth;
