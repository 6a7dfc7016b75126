//! Exact solver for trilevel network-segmentation interdiction on grid
//! communication forests.
//!
//! A network designer splits the enclaves of a three-tier communication
//! forest (balancing authorities, control centers, substations), an attacker
//! with a budget of enclave penetrations pivots from parent to child enclaves
//! and trips every relay the compromised substation enclaves control, and the
//! grid operator redispatches with a DC optimal power flow to minimize load
//! shed.

pub mod lp;
pub mod attacker;
pub mod dcopf;
pub mod defender;
pub mod error;
pub mod ingest;
pub mod model;
pub mod render;

pub use error::{Error, Result};
