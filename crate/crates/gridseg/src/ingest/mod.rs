//! Readers and writers for grid cases, communication forests, plans and
//! result records.

mod matpower;
mod native;
mod results;

pub use matpower::{parse_matpower, UNLIMITED_RATING_FACTOR};
pub use native::{
    parse_comm_topology, parse_grid_native, parse_plan, write_comm_topology, write_grid_native, write_plan,
};

pub use results::{
    attack_json, plan_json, record_json, write_attack_results, write_dispatch, write_results, write_sweep,
};

use crate::error::{Error, Result};
use crate::model::{CommNetwork, GridCase, Instance};

/// Parses a grid in the native schema or the MATPOWER subset, detected from
/// the first meaningful line.
pub fn parse_grid_case(text: &str) -> Result<GridCase> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with('%'));
    match first {
        None => Err(Error::parse(1, 1, "empty input")),
        Some(l) if l.starts_with(native::GRID_TAG) => parse_grid_native(text),
        Some(_) => parse_matpower(text),
    }
}

/// Native text of both halves of an instance.
pub fn write_instance(grid: &GridCase, comm: &CommNetwork) -> (String, String) {
    (write_grid_native(grid), write_comm_topology(comm))
}

/// Parses and validates an instance.
pub fn load_instance(grid_text: &str, comm_text: &str) -> Result<Instance> {
    let grid = parse_grid_case(grid_text)?;
    let comm = parse_comm_topology(comm_text, &grid)?;
    Instance::new(grid, comm).map_err(Error::InvalidInstance)
}

/// Hex SHA-256 of the instance's native text (grid, then communication
/// forest).
pub fn instance_digest(inst: &Instance) -> String {
    use sha2::{Digest, Sha256};
    let (grid, comm) = write_instance(&inst.grid, &inst.comm);
    let mut h = Sha256::new();
    h.update(grid.as_bytes());
    h.update(b"\n");
    h.update(comm.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
