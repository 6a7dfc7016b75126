//! Linear-constraint encoding of the designer's feasible region.
//!
//! Variables (all binary):
//! - `x[e,r]`: substation enclave `e` controls relay `r`;
//! - `y[e,f]`: enclave `e` parents enclave `f` one tier below;
//! - `q[n,e]`: new enclave `e` belongs to entity `n`;
//! - `t[e,n]`: enclave `e` parents some enclave of entity `n`;
//! - `b[e,f,n]`: the product `y[e,f] * q[n,f]` for new `f`.
//!
//! Membership of existing enclaves is data (`Q`), not a variable. New
//! enclaves are anonymous slots `tier/k`; a plan maps its new enclaves of a
//! tier onto the slots in identifier order.

use std::collections::BTreeMap;

use super::plan::{NewEnclave, SegmentationPlan};
use crate::error::{Error, Result};
use crate::lp::{Direction, LinearProgram, MixedBinaryProgram, Sense};
use crate::model::{DefenderBudget, Instance, Tier};

/// An enclave column of the model: existing (index into `comm.enclaves`) or
/// a new slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelEnclave {
    Existing(usize),
    New(usize),
}

/// The encoding plus the index maps needed to read and write points.
#[derive(Debug, Clone)]
pub struct DefenderModel {
    pub program: MixedBinaryProgram,
    budget: DefenderBudget,
    /// Enclaves per tier, existing first (`Tier as usize` order).
    enclaves: [Vec<ModelEnclave>; 3],
    x: BTreeMap<(usize, usize), usize>,
    y: BTreeMap<(Tier, usize, usize), usize>,
    q: BTreeMap<(Tier, usize, usize), usize>,
    t: BTreeMap<(Tier, usize, usize), usize>,
    beta: BTreeMap<(Tier, usize, usize, usize), usize>,
}

fn tier_name(t: Tier) -> &'static str {
    t.keyword()
}

/// Builds the encoding of every plan with exactly `budget` new enclaves.
pub fn build_defender_model(inst: &Instance, budget: DefenderBudget) -> DefenderModel {
    let comm = &inst.comm;
    let mut lp = LinearProgram::new(Direction::Minimize);
    let mut enclaves: [Vec<ModelEnclave>; 3] = Default::default();
    for tier in Tier::ALL {
        let v = &mut enclaves[tier as usize];
        v.extend((0..comm.enclaves.len()).filter(|&k| comm.enclaves[k].tier == tier).map(ModelEnclave::Existing));
        v.extend((0..budget.for_tier(tier)).map(ModelEnclave::New));
    }
    let name = |tier: Tier, e: ModelEnclave| match e {
        ModelEnclave::Existing(k) => comm.enclaves[k].id.clone(),
        ModelEnclave::New(k) => format!("{}/{}", tier_name(tier), k + 1),
    };
    let ents = |t: Tier| inst.tier_entities[t as usize].clone();
    // Q: existing enclave k belongs to entity n.
    let member = |n: usize, k: usize| inst.enclave_entity[k] == n;

    let mut m = DefenderModel {
        program: MixedBinaryProgram::new(LinearProgram::new(Direction::Minimize), Vec::new()),
        budget,
        enclaves: enclaves.clone(),
        x: BTreeMap::new(),
        y: BTreeMap::new(),
        q: BTreeMap::new(),
        t: BTreeMap::new(),
        beta: BTreeMap::new(),
    };
    let ss = Tier::Substation;
    let ss_enc = &enclaves[ss as usize];
    for (ei, &e) in ss_enc.iter().enumerate() {
        for r in 0..comm.relays.len() {
            let j = lp.add_var(format!("x[{},{}]", name(ss, e), comm.relays[r].id), 0.0, 1.0, 0.0);
            m.x.insert((ei, r), j);
        }
    }
    for tier in Tier::ALL {
        for (ei, &e) in enclaves[tier as usize].iter().enumerate() {
            if let ModelEnclave::New(_) = e {
                for n in ents(tier) {
                    let j = lp.add_var(format!("q[{},{}]", inst.entity_id(n), name(tier, e)), 0.0, 1.0, 0.0);
                    m.q.insert((tier, n, ei), j);
                }
            }
        }
    }
    for upper in [Tier::BalancingAuthority, Tier::ControlCenter] {
        let lower = upper.below().expect("upper tiers have a tier below");
        for (ei, &e) in enclaves[upper as usize].iter().enumerate() {
            for (fi, &f) in enclaves[lower as usize].iter().enumerate() {
                let j = lp.add_var(format!("y[{},{}]", name(upper, e), name(lower, f)), 0.0, 1.0, 0.0);
                m.y.insert((upper, ei, fi), j);
            }
            for n in ents(lower) {
                let j = lp.add_var(format!("t[{},{}]", name(upper, e), inst.entity_id(n)), 0.0, 1.0, 0.0);
                m.t.insert((upper, ei, n), j);
                for (fi, &f) in enclaves[lower as usize].iter().enumerate() {
                    if let ModelEnclave::New(_) = f {
                        let j = lp.add_var(
                            format!("b[{},{},{}]", name(upper, e), name(lower, f), inst.entity_id(n)),
                            0.0,
                            1.0,
                            0.0,
                        );
                        m.beta.insert((upper, ei, fi, n), j);
                    }
                }
            }
        }
    }

    // Every substation enclave controls a relay; every relay has one enclave.
    for (ei, &e) in ss_enc.iter().enumerate() {
        let terms = (0..comm.relays.len()).map(|r| (m.x[&(ei, r)], 1.0)).collect();
        lp.add_row(format!("relay_cover[{}]", name(ss, e)), terms, Sense::Ge, 1.0);
    }
    for r in 0..comm.relays.len() {
        let terms = (0..ss_enc.len()).map(|ei| (m.x[&(ei, r)], 1.0)).collect();
        lp.add_row(format!("relay_once[{}]", comm.relays[r].id), terms, Sense::Eq, 1.0);
    }
    // A substation enclave belongs to a substation iff it controls one of
    // its relays.
    for s in ents(ss) {
        let relays = &inst.entity_relays[s];
        for (ei, &e) in ss_enc.iter().enumerate() {
            let en = name(ss, e);
            let sid = inst.entity_id(s);
            let sum: Vec<(usize, f64)> = relays.iter().map(|&r| (m.x[&(ei, r)], -1.0)).collect();
            match e {
                ModelEnclave::New(_) => {
                    let qv = m.q[&(ss, s, ei)];
                    let mut terms = sum;
                    terms.push((qv, 1.0));
                    lp.add_row(format!("new_ss_has_relay[{sid},{en}]"), terms, Sense::Le, 0.0);
                    for &r in relays {
                        lp.add_row(
                            format!("new_ss_owns_relay[{sid},{en},{}]", comm.relays[r].id),
                            vec![(m.x[&(ei, r)], 1.0), (qv, -1.0)],
                            Sense::Le,
                            0.0,
                        );
                    }
                }
                ModelEnclave::Existing(k) => {
                    let qq = if member(s, k) { 1.0 } else { 0.0 };
                    let terms = sum.into_iter().map(|(j, c)| (j, -c)).collect();
                    lp.add_row(format!("old_ss_has_relay[{sid},{en}]"), terms, Sense::Ge, qq);
                    for &r in relays {
                        lp.add_row(
                            format!("old_ss_owns_relay[{sid},{en},{}]", comm.relays[r].id),
                            vec![(m.x[&(ei, r)], 1.0)],
                            Sense::Le,
                            qq,
                        );
                    }
                }
            }
        }
    }
    // One parent per enclave below the top tier.
    for upper in [Tier::BalancingAuthority, Tier::ControlCenter] {
        let lower = upper.below().expect("upper tiers have a tier below");
        for (fi, &f) in enclaves[lower as usize].iter().enumerate() {
            let terms = (0..enclaves[upper as usize].len()).map(|ei| (m.y[&(upper, ei, fi)], 1.0)).collect();
            lp.add_row(format!("one_parent[{}]", name(lower, f)), terms, Sense::Eq, 1.0);
        }
    }
    // One entity per new enclave.
    for tier in Tier::ALL {
        for (ei, &e) in enclaves[tier as usize].iter().enumerate() {
            if let ModelEnclave::New(_) = e {
                let terms = ents(tier).into_iter().map(|n| (m.q[&(tier, n, ei)], 1.0)).collect();
                lp.add_row(format!("one_entity[{}]", name(tier, e)), terms, Sense::Eq, 1.0);
            }
        }
    }
    // t[e,n] is the OR over enclaves f of n of y[e,f], and e must belong to
    // the entity that controls n.
    for upper in [Tier::BalancingAuthority, Tier::ControlCenter] {
        let lower = upper.below().expect("upper tiers have a tier below");
        for (ei, &e) in enclaves[upper as usize].iter().enumerate() {
            let en = name(upper, e);
            for n in ents(lower) {
                let nid = inst.entity_id(n);
                let tv = m.t[&(upper, ei, n)];
                let mut link = vec![(tv, 1.0)];
                for (fi, &f) in enclaves[lower as usize].iter().enumerate() {
                    let fname = name(lower, f);
                    match f {
                        ModelEnclave::Existing(k) => {
                            if member(n, k) {
                                let yv = m.y[&(upper, ei, fi)];
                                link.push((yv, -1.0));
                                lp.add_row(format!("talks_old[{en},{nid},{fname}]"), vec![(tv, 1.0), (yv, -1.0)], Sense::Ge, 0.0);
                            }
                        }
                        ModelEnclave::New(_) => {
                            let bv = m.beta[&(upper, ei, fi, n)];
                            let yv = m.y[&(upper, ei, fi)];
                            let qv = m.q[&(lower, n, fi)];
                            link.push((bv, -1.0));
                            lp.add_row(format!("talks_new[{en},{nid},{fname}]"), vec![(tv, 1.0), (bv, -1.0)], Sense::Ge, 0.0);
                            lp.add_row(format!("prod_y[{en},{fname},{nid}]"), vec![(bv, 1.0), (yv, -1.0)], Sense::Le, 0.0);
                            lp.add_row(format!("prod_q[{en},{fname},{nid}]"), vec![(bv, 1.0), (qv, -1.0)], Sense::Le, 0.0);
                            lp.add_row(
                                format!("prod_lo[{en},{fname},{nid}]"),
                                vec![(bv, 1.0), (yv, -1.0), (qv, -1.0)],
                                Sense::Ge,
                                -1.0,
                            );
                        }
                    }
                }
                lp.add_row(format!("talks_only[{en},{nid}]"), link, Sense::Le, 0.0);
                let ctrl = inst.controller[n].expect("lower-tier entities have a controller");
                match e {
                    ModelEnclave::Existing(k) => {
                        let qq = if member(ctrl, k) { 1.0 } else { 0.0 };
                        lp.add_row(format!("old_belongs[{en},{nid}]"), vec![(tv, 1.0)], Sense::Le, qq);
                    }
                    ModelEnclave::New(_) => {
                        let qv = m.q[&(upper, ctrl, ei)];
                        lp.add_row(format!("new_belongs[{en},{nid}]"), vec![(tv, 1.0), (qv, -1.0)], Sense::Le, 0.0);
                    }
                }
            }
        }
    }
    let binaries = (0..lp.vars.len()).collect();
    m.program = MixedBinaryProgram::new(lp, binaries);
    m
}

impl DefenderModel {
    pub fn budget(&self) -> DefenderBudget {
        self.budget
    }

    /// Variable indices that fix a plan: `x`, `y` and `q` (`t` and the
    /// products follow from them).
    pub fn decision_vars(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.x.values().chain(self.y.values()).chain(self.q.values()).copied().collect();
        v.sort_unstable();
        v
    }

    fn position(&self, tier: Tier, id: &str, inst: &Instance, slots: &BTreeMap<&str, usize>) -> Option<usize> {
        self.enclaves[tier as usize].iter().position(|&e| match e {
            ModelEnclave::Existing(k) => inst.comm.enclaves[k].id == id,
            ModelEnclave::New(k) => slots.get(id) == Some(&k),
        })
    }

    /// The model point of a plan whose new-enclave counts match the budget.
    pub fn point(&self, inst: &Instance, plan: &SegmentationPlan) -> Result<Vec<f64>> {
        let bad = |message: String| Error::PlanInfeasible { family: "budget", message };
        if plan.budget() != self.budget {
            return Err(bad(format!("plan uses budget {} but the model has {}", plan.budget(), self.budget)));
        }
        let mut slots: BTreeMap<&str, usize> = BTreeMap::new();
        let mut tier_of: BTreeMap<&str, Tier> = BTreeMap::new();
        for tier in Tier::ALL {
            let mut news: Vec<&NewEnclave> = plan.new_enclaves.iter().filter(|e| e.tier == tier).collect();
            news.sort();
            for (k, e) in news.into_iter().enumerate() {
                slots.insert(e.id.as_str(), k);
                tier_of.insert(e.id.as_str(), tier);
            }
        }
        for e in &inst.comm.enclaves {
            tier_of.insert(e.id.as_str(), e.tier);
        }
        let mut x = vec![0.0; self.program.lp.vars.len()];
        let unknown = |id: &str| Error::PlanInfeasible { family: "entity-assignment", message: format!("unknown enclave {id}") };
        for e in &plan.new_enclaves {
            let n = inst.entity_index(&e.entity).ok_or_else(|| unknown(&e.entity))?;
            let ei = self.position(e.tier, &e.id, inst, &slots).expect("slot registered above");
            let j = self.q.get(&(e.tier, n, ei)).ok_or_else(|| unknown(&e.id))?;
            x[*j] = 1.0;
        }
        for (r, relay) in inst.comm.relays.iter().enumerate() {
            let Some(eid) = plan.relay_enclave.get(&relay.id) else { continue };
            let ei = self.position(Tier::Substation, eid, inst, &slots).ok_or_else(|| unknown(eid))?;
            x[self.x[&(ei, r)]] = 1.0;
        }
        let owner = plan.enclave_owners(inst);
        for (child, parent) in &plan.parent {
            let (Some(&ct), Some(&pt)) = (tier_of.get(child.as_str()), tier_of.get(parent.as_str())) else {
                return Err(unknown(child));
            };
            let (Some(fi), Some(ei)) =
                (self.position(ct, child, inst, &slots), self.position(pt, parent, inst, &slots))
            else {
                return Err(unknown(child));
            };
            let Some(&j) = self.y.get(&(pt, ei, fi)) else { continue };
            x[j] = 1.0;
            let n = inst.entity_index(&owner[child]).ok_or_else(|| unknown(child))?;
            if let Some(&tv) = self.t.get(&(pt, ei, n)) {
                x[tv] = 1.0;
            }
            if let Some(&bv) = self.beta.get(&(pt, ei, fi, n)) {
                x[bv] = 1.0;
            }
        }
        Ok(x)
    }

    /// Names of rows `x` violates.
    pub fn violations(&self, x: &[f64]) -> Vec<String> {
        let lp = &self.program.lp;
        (0..lp.rows.len())
            .filter(|&i| {
                let a = lp.row_activity(i, x);
                let row = &lp.rows[i];
                match row.sense {
                    Sense::Le => a > row.rhs + 1e-9,
                    Sense::Ge => a < row.rhs - 1e-9,
                    Sense::Eq => (a - row.rhs).abs() > 1e-9,
                }
            })
            .map(|i| lp.rows[i].name.clone())
            .collect()
    }

    /// Reads a plan back from a model point. New enclaves are named
    /// `ENTITY/nK` with `K` the slot number within the tier.
    pub fn decode(&self, inst: &Instance, x: &[f64]) -> SegmentationPlan {
        let on = |j: usize| x[j] > 0.5;
        let mut plan = SegmentationPlan::default();
        let mut ids: [Vec<String>; 3] = Default::default();
        for tier in Tier::ALL {
            for (ei, &e) in self.enclaves[tier as usize].iter().enumerate() {
                let id = match e {
                    ModelEnclave::Existing(k) => inst.comm.enclaves[k].id.clone(),
                    ModelEnclave::New(k) => {
                        let n = inst.tier_entities[tier as usize]
                            .iter()
                            .copied()
                            .find(|&n| on(self.q[&(tier, n, ei)]))
                            .unwrap_or(inst.tier_entities[tier as usize][0]);
                        let id = format!("{}/n{}", inst.entity_id(n), k + 1);
                        plan.new_enclaves.push(NewEnclave { id: id.clone(), tier, entity: inst.entity_id(n).to_string() });
                        id
                    }
                };
                ids[tier as usize].push(id);
            }
        }
        plan.new_enclaves.sort_by(|a, b| (a.tier, &a.id).cmp(&(b.tier, &b.id)));
        for (&(ei, r), &j) in &self.x {
            if on(j) {
                plan.relay_enclave.insert(inst.comm.relays[r].id.clone(), ids[Tier::Substation as usize][ei].clone());
            }
        }
        for (&(upper, ei, fi), &j) in &self.y {
            if on(j) {
                let lower = upper.below().expect("upper tier");
                plan.parent.insert(ids[lower as usize][fi].clone(), ids[upper as usize][ei].clone());
            }
        }
        plan
    }
}

/// Checks a plan against the encoding; returns the violated row names.
pub fn model_violations(inst: &Instance, plan: &SegmentationPlan) -> Result<Vec<String>> {
    let model = build_defender_model(inst, plan.budget());
    let x = model.point(inst, plan)?;
    Ok(model.violations(&x))
}
