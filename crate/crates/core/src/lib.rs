pub mod adapt;
pub mod checkpoint;
pub mod energyderiv;
pub mod error;
pub mod exec;
pub mod fermion;
pub mod hamgrid;
pub mod normalmodes;
pub mod oracle;
pub mod pauli;
pub mod sector;
pub mod simulator;
pub mod tailgate;

pub use error::{Error, Result};
pub use exec::Exec;
