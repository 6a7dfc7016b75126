use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{DefenderBudget, Instance, Tier};

/// An enclave created by a segmentation plan.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NewEnclave {
    pub id: String,
    pub tier: Tier,
    /// Entity the enclave is assigned to.
    pub entity: String,
}

/// A defender decision in expanded-forest form.
///
/// `relay_enclave` assigns each relay to one substation enclave and `parent`
/// maps every control-center and substation enclave (existing or new) to its
/// parent one tier up.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct SegmentationPlan {
    pub new_enclaves: Vec<NewEnclave>,
    pub relay_enclave: BTreeMap<String, String>,
    pub parent: BTreeMap<String, String>,
}

impl SegmentationPlan {
    /// Number of new enclaves per tier.
    pub fn budget(&self) -> DefenderBudget {
        let count = |t| self.new_enclaves.iter().filter(|e| e.tier == t).count();
        DefenderBudget::new(count(Tier::Substation), count(Tier::ControlCenter), count(Tier::BalancingAuthority))
    }

    /// The plan that keeps the existing forest. Parents and relay enclaves
    /// come from the pins in the communication file, or from the unique
    /// existing enclave of the controlling entity.
    pub fn identity(inst: &Instance) -> Result<Self> {
        let comm = &inst.comm;
        let mut plan = SegmentationPlan::default();
        let only = |entity: usize, what: &str| -> Result<String> {
            match inst.entity_enclaves[entity].as_slice() {
                [e] => Ok(comm.enclaves[*e].id.clone()),
                _ => Err(Error::PlanInfeasible {
                    family: "parent-assignment",
                    message: format!(
                        "{what}: entity {} has {} existing enclaves and the file pins none",
                        inst.entity_id(entity),
                        inst.entity_enclaves[entity].len()
                    ),
                }),
            }
        };
        for (k, enc) in comm.enclaves.iter().enumerate() {
            if enc.tier == Tier::BalancingAuthority {
                continue;
            }
            let parent = match &enc.parent {
                Some(p) => p.clone(),
                None => {
                    let owner = inst.enclave_entity[k];
                    let up = inst.controller[owner].expect("validated forest");
                    only(up, &format!("enclave {}", enc.id))?
                }
            };
            plan.parent.insert(enc.id.clone(), parent);
        }
        for (r, relay) in comm.relays.iter().enumerate() {
            let e = match &relay.enclave {
                Some(e) => e.clone(),
                None => only(inst.relay_owner[r], &format!("relay {}", relay.id))?,
            };
            plan.relay_enclave.insert(relay.id.clone(), e);
        }
        Ok(plan)
    }

    /// Pairs (enclave, entity one tier below) such that the enclave parents
    /// some enclave of that entity.
    pub fn communication(&self, inst: &Instance) -> BTreeSet<(String, String)> {
        let owner = self.enclave_owners(inst);
        self.parent
            .iter()
            .filter_map(|(child, parent)| owner.get(child.as_str()).map(|n| (parent.clone(), n.clone())))
            .collect()
    }

    /// New control-center or balancing-authority enclaves with no children.
    pub fn childless_enclaves(&self) -> Vec<String> {
        let parents: BTreeSet<&str> = self.parent.values().map(String::as_str).collect();
        self.new_enclaves
            .iter()
            .filter(|e| e.tier != Tier::Substation && !parents.contains(e.id.as_str()))
            .map(|e| e.id.clone())
            .collect()
    }

    pub(crate) fn enclave_owners(&self, inst: &Instance) -> BTreeMap<String, String> {
        let mut owner: BTreeMap<String, String> = BTreeMap::new();
        for (k, enc) in inst.comm.enclaves.iter().enumerate() {
            owner.insert(enc.id.clone(), inst.entity_id(inst.enclave_entity[k]).to_string());
        }
        for e in &self.new_enclaves {
            owner.insert(e.id.clone(), e.entity.clone());
        }
        owner
    }
}
