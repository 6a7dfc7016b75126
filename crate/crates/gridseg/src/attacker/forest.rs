use std::collections::{BTreeMap, BTreeSet};

use crate::dcopf::{Attack, OutageMask, MAX_COMPONENTS};
use crate::defender::SegmentationPlan;
use crate::error::{Error, Result};
use crate::model::{GridCase, Instance, Tier};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestNode {
    pub id: String,
    pub tier: Tier,
    pub entity: String,
    pub is_new: bool,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Relay identifiers (substation enclaves only), sorted.
    pub relays: Vec<String>,
}

/// Concrete enclave forest after segmentation, with relays as leaves.
/// Nodes are sorted by identifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentedForest {
    pub nodes: Vec<ForestNode>,
    /// Components de-energized when each node is attacked (empty above the
    /// substation tier).
    pub(crate) node_mask: Vec<OutageMask>,
}

fn infeasible(family: &'static str, message: String) -> Error {
    Error::PlanInfeasible { family, message }
}

/// Builds the forest a plan describes, checking every defender rule.
pub fn apply_segmentation(inst: &Instance, plan: &SegmentationPlan) -> Result<SegmentedForest> {
    let comm = &inst.comm;
    let grid = &inst.grid;
    if grid.component_count() > MAX_COMPONENTS {
        return Err(Error::UnsupportedField(format!("grids with more than {MAX_COMPONENTS} components")));
    }
    // (id, tier, entity, is_new)
    let mut raw: Vec<(String, Tier, String, bool)> = Vec::new();
    for (k, enc) in comm.enclaves.iter().enumerate() {
        raw.push((enc.id.clone(), enc.tier, inst.entity_id(inst.enclave_entity[k]).to_string(), false));
    }
    for e in &plan.new_enclaves {
        let entity = comm
            .entity(&e.entity)
            .ok_or_else(|| infeasible("entity-assignment", format!("new enclave {} names unknown entity {}", e.id, e.entity)))?;
        if entity.tier != e.tier {
            return Err(infeasible(
                "entity-assignment",
                format!("new {} enclave {} is assigned to {} {}", e.tier, e.id, entity.tier, e.entity),
            ));
        }
        raw.push((e.id.clone(), e.tier, e.entity.clone(), true));
    }
    raw.sort();
    for w in raw.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(infeasible("entity-assignment", format!("enclave identifier {} is used twice", w[0].0)));
        }
    }
    let index: BTreeMap<&str, usize> = raw.iter().enumerate().map(|(i, r)| (r.0.as_str(), i)).collect();
    let mut nodes: Vec<ForestNode> = raw
        .iter()
        .map(|(id, tier, entity, is_new)| ForestNode {
            id: id.clone(),
            tier: *tier,
            entity: entity.clone(),
            is_new: *is_new,
            parent: None,
            children: Vec::new(),
            relays: Vec::new(),
        })
        .collect();

    for child in plan.parent.keys() {
        if !index.contains_key(child.as_str()) {
            return Err(infeasible("parent-assignment", format!("plan gives a parent to unknown enclave {child}")));
        }
    }
    for i in 0..nodes.len() {
        let (id, tier) = (nodes[i].id.clone(), nodes[i].tier);
        let assigned = plan.parent.get(&id);
        let Some(up) = tier.above() else {
            if assigned.is_some() {
                return Err(infeasible("parent-assignment", format!("balancing-authority enclave {id} cannot have a parent")));
            }
            continue;
        };
        let p = assigned.ok_or_else(|| infeasible("parent-assignment", format!("enclave {id} has no parent")))?;
        let &pi = index
            .get(p.as_str())
            .ok_or_else(|| infeasible("parent-assignment", format!("enclave {id} names unknown parent {p}")))?;
        if nodes[pi].tier != up {
            return Err(infeasible("parent-assignment", format!("{tier} enclave {id} has {} parent {p}", nodes[pi].tier)));
        }
        let child_entity = comm.entity(&nodes[i].entity).expect("checked above");
        if !child_entity.controllers.iter().any(|c| *c == nodes[pi].entity) {
            return Err(infeasible(
                "control-structure",
                format!("enclave {p} of {} cannot parent enclave {id} of {}", nodes[pi].entity, nodes[i].entity),
            ));
        }
        nodes[i].parent = Some(pi);
        nodes[pi].children.push(i);
    }

    let relay_pos: BTreeMap<&str, usize> = comm.relays.iter().enumerate().map(|(r, x)| (x.id.as_str(), r)).collect();
    for r in plan.relay_enclave.keys() {
        if !relay_pos.contains_key(r.as_str()) {
            return Err(infeasible("relay-assignment", format!("plan assigns unknown relay {r}")));
        }
    }
    let mut node_mask = vec![OutageMask::default(); nodes.len()];
    for (r, relay) in comm.relays.iter().enumerate() {
        let e = plan
            .relay_enclave
            .get(&relay.id)
            .ok_or_else(|| infeasible("relay-assignment", format!("relay {} has no controlling enclave", relay.id)))?;
        let &ni = index
            .get(e.as_str())
            .ok_or_else(|| infeasible("relay-assignment", format!("relay {} names unknown enclave {e}", relay.id)))?;
        if nodes[ni].tier != Tier::Substation {
            return Err(infeasible("relay-assignment", format!("relay {} is assigned to {} enclave {e}", relay.id, nodes[ni].tier)));
        }
        let owner = inst.entity_id(inst.relay_owner[r]);
        if nodes[ni].entity != owner {
            return Err(infeasible(
                "relay-ownership",
                format!("relay {} of {owner} is assigned to enclave {e} of {}", relay.id, nodes[ni].entity),
            ));
        }
        nodes[ni].relays.push(relay.id.clone());
        for &c in &inst.relay_components[r] {
            node_mask[ni].insert(c);
        }
    }
    for n in &mut nodes {
        n.relays.sort();
        if n.tier == Tier::Substation && n.relays.is_empty() {
            return Err(infeasible("relay-coverage", format!("substation enclave {} controls no relay", n.id)));
        }
    }
    Ok(SegmentedForest { nodes, node_mask })
}

impl SegmentedForest {
    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.id.as_str().cmp(id)).ok()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// True when every attacked node's parent is attacked too.
    pub fn is_ancestor_closed(&self, nodes: &[usize]) -> bool {
        let set: BTreeSet<usize> = nodes.iter().copied().collect();
        set.iter().all(|&i| self.nodes[i].parent.map_or(true, |p| set.contains(&p)))
    }

    /// Union of the outage masks of `nodes`.
    pub fn mask_of(&self, nodes: &[usize]) -> OutageMask {
        nodes.iter().fold(OutageMask::default(), |m, &i| m.union(&self.node_mask[i]))
    }

    /// Attack described by node indices; the caller guarantees closure.
    pub(crate) fn attack_from_nodes(&self, grid: &GridCase, nodes: &[usize]) -> Attack {
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        let mut a = Attack::from_mask(grid, &self.mask_of(&sorted));
        a.enclaves = sorted.iter().map(|&i| self.nodes[i].id.clone()).collect();
        let mut relays: Vec<String> = sorted.iter().flat_map(|&i| self.nodes[i].relays.iter().cloned()).collect();
        relays.sort();
        a.compromised_relays = relays;
        a
    }
}

/// Relay compromise and component states implied by attacking `attacked`.
pub fn derive_effects(forest: &SegmentedForest, grid: &GridCase, attacked: &[String]) -> Result<Attack> {
    let mut idx = Vec::with_capacity(attacked.len());
    for id in attacked {
        let i = forest.node_index(id).ok_or_else(|| Error::DanglingReference(format!("unknown enclave {id}")))?;
        idx.push(i);
    }
    idx.sort_unstable();
    idx.dedup();
    if !forest.is_ancestor_closed(&idx) {
        let bad: Vec<&str> = idx
            .iter()
            .filter(|&&i| forest.nodes[i].parent.is_some_and(|p| idx.binary_search(&p).is_err()))
            .map(|&i| forest.nodes[i].id.as_str())
            .collect();
        return Err(Error::NotAncestorClosed(format!("parents not attacked for {}", bad.join(", "))));
    }
    Ok(forest.attack_from_nodes(grid, &idx))
}
