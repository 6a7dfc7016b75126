//! Worst-case attacks on a segmented forest.

mod enumerate;
mod forest;
mod milp;

pub use enumerate::{count_attacks, for_each_attack, search_attacks, worst_attack_enumerate, AttackSearch, TIE_TOL};
pub use forest::{apply_segmentation, derive_effects, ForestNode, SegmentedForest};
pub use milp::{build_attacker_milp, worst_attack_milp, AttackerColumns, DUAL_BOUND_TOL};
