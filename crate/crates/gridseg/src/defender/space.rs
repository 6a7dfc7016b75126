//! Symmetry-reduced enumeration of segmentation plans.
//!
//! Plans are built tier by tier from the bottom: relay partitions per
//! substation entity, then a control-center enclave for every substation
//! enclave, then a balancing-authority enclave for every control-center
//! enclave. Existing enclaves keep their labels; new enclaves of a tier are
//! interchangeable, so each entity's new enclaves are numbered in order of
//! first use (restricted growth), which picks one labeling per class.

use std::collections::HashSet;

use super::plan::{NewEnclave, SegmentationPlan};
use crate::model::{DefenderBudget, Instance, Tier};

/// Knobs of the plan enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanOptions {
    /// Allow new control-center and balancing-authority enclaves without
    /// children.
    pub allow_childless: bool,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions { allow_childless: true }
    }
}

/// An enclave of some entity: existing (index into `comm.enclaves`) or the
/// entity's `k`-th new enclave (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Slot {
    Existing(usize),
    New(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct Enclave {
    pub entity: usize,
    pub slot: Slot,
}

impl Enclave {
    pub fn id(&self, inst: &Instance) -> String {
        match self.slot {
            Slot::Existing(k) => inst.comm.enclaves[k].id.clone(),
            Slot::New(k) => format!("{}/n{k}", inst.entity_id(self.entity)),
        }
    }
}

/// Substation enclaves and the relays each one controls.
#[derive(Debug, Clone)]
pub(crate) struct SubstationLevel {
    pub enclaves: Vec<Enclave>,
    pub relays: Vec<Vec<usize>>,
}

/// Enclaves of one tier and the parent (index into `enclaves`) of every
/// enclave one tier below.
#[derive(Debug, Clone)]
pub(crate) struct ParentLevel {
    pub enclaves: Vec<Enclave>,
    pub parent: Vec<usize>,
}

/// Index of a plan in enumeration order: substation, control-center and
/// balancing-authority choice.
pub type PlanIndex = (usize, usize, usize);

/// All ways to write `total` as a sum of counts bounded by `caps`, in
/// lexicographic order.
fn compositions(total: usize, caps: &[usize]) -> Vec<Vec<usize>> {
    fn go(total: usize, caps: &[usize], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == caps.len() {
            if total == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let rest: usize = caps[cur.len() + 1..].iter().sum();
        for k in 0..=total.min(caps[cur.len()]) {
            if total - k > rest {
                continue;
            }
            cur.push(k);
            go(total - k, caps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(total, caps, &mut Vec::new(), &mut out);
    out
}

/// Restricted-growth labelings of `items` items with `fixed` labeled slots
/// (labels `0..fixed`) and up to `new` unlabeled ones (labels `fixed..`,
/// introduced in order). Returns (labels, number of new labels used).
/// `all_fixed` requires every labeled slot to be used; `min_new` is the
/// fewest new labels that must appear.
fn labelings(items: usize, fixed: usize, new: usize, all_fixed: bool, min_new: usize) -> Vec<(Vec<usize>, usize)> {
    fn go(
        i: usize,
        items: usize,
        fixed: usize,
        new: usize,
        used_new: usize,
        fixed_used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        req: (bool, usize),
        out: &mut Vec<(Vec<usize>, usize)>,
    ) {
        let left = items - i;
        let fixed_missing = if req.0 { fixed_used.iter().filter(|u| !**u).count() } else { 0 };
        if fixed_missing + req.1.saturating_sub(used_new) > left {
            return;
        }
        if i == items {
            out.push((cur.clone(), used_new));
            return;
        }
        for l in 0..fixed + used_new.min(new) + usize::from(used_new < new) {
            let was = l < fixed && fixed_used[l];
            if l < fixed {
                fixed_used[l] = true;
            }
            cur.push(l);
            let grown = if l == fixed + used_new { used_new + 1 } else { used_new };
            go(i + 1, items, fixed, new, grown, fixed_used, cur, req, out);
            cur.pop();
            if l < fixed {
                fixed_used[l] = was;
            }
        }
    }
    let mut out = Vec::new();
    go(0, items, fixed, new, 0, &mut vec![false; fixed], &mut Vec::new(), (all_fixed, min_new), &mut out);
    out
}

/// Odometer over the cartesian product of option lists (last list fastest).
fn product_len(lens: &[usize]) -> usize {
    lens.iter().product()
}

fn product_digits(mut index: usize, lens: &[usize]) -> Vec<usize> {
    let mut d = vec![0; lens.len()];
    for (k, &l) in lens.iter().enumerate().rev() {
        d[k] = index % l;
        index /= l;
    }
    d
}

/// Per-entity options of one tier for one count assignment.
struct TierChoice<T> {
    per_entity: Vec<Vec<T>>,
}

impl<T> TierChoice<T> {
    fn len(&self) -> usize {
        product_len(&self.per_entity.iter().map(Vec::len).collect::<Vec<_>>())
    }

    fn pick(&self, index: usize) -> Vec<&T> {
        let lens: Vec<usize> = self.per_entity.iter().map(Vec::len).collect();
        product_digits(index, &lens).into_iter().zip(&self.per_entity).map(|(d, opts)| &opts[d]).collect()
    }
}

/// Enumeration space of a budget: substation levels are materialized, the
/// upper tiers are generated on demand.
pub struct PlanSpace<'a> {
    inst: &'a Instance,
    budget: DefenderBudget,
    opts: PlanOptions,
    substation: Vec<SubstationLevel>,
}

impl<'a> PlanSpace<'a> {
    pub fn new(inst: &'a Instance, budget: DefenderBudget, opts: PlanOptions) -> Self {
        let mut space = PlanSpace { inst, budget, opts, substation: Vec::new() };
        space.substation = space.substation_levels();
        space
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn budget(&self) -> DefenderBudget {
        self.budget
    }

    pub fn options(&self) -> PlanOptions {
        self.opts
    }

    pub(crate) fn substation_levels_ref(&self) -> &[SubstationLevel] {
        &self.substation
    }

    fn entities(&self, tier: Tier) -> &[usize] {
        &self.inst.tier_entities[tier as usize]
    }

    fn substation_levels(&self) -> Vec<SubstationLevel> {
        let inst = self.inst;
        let ents = self.entities(Tier::Substation);
        let caps: Vec<usize> = ents
            .iter()
            .map(|&n| inst.entity_relays[n].len().saturating_sub(inst.entity_enclaves[n].len()))
            .collect();
        let mut out = Vec::new();
        for counts in compositions(self.budget.substation, &caps) {
            let choice = TierChoice {
                per_entity: ents
                    .iter()
                    .zip(&counts)
                    .map(|(&n, &k)| {
                        let fixed = inst.entity_enclaves[n].len();
                        labelings(inst.entity_relays[n].len(), fixed, k, true, k)
                    })
                    .collect(),
            };
            for idx in 0..choice.len() {
                let mut level = SubstationLevel { enclaves: Vec::new(), relays: Vec::new() };
                for (&n, (labels, used)) in ents.iter().zip(choice.pick(idx)) {
                    let fixed = inst.entity_enclaves[n].len();
                    let base = level.enclaves.len();
                    for &k in &inst.entity_enclaves[n] {
                        level.enclaves.push(Enclave { entity: n, slot: Slot::Existing(k) });
                        level.relays.push(Vec::new());
                    }
                    for k in 0..*used {
                        level.enclaves.push(Enclave { entity: n, slot: Slot::New(k + 1) });
                        level.relays.push(Vec::new());
                    }
                    for (&r, &l) in inst.entity_relays[n].iter().zip(labels) {
                        level.relays[base + l].push(r);
                    }
                    debug_assert!(fixed + used == level.enclaves.len() - base);
                }
                out.push(level);
            }
        }
        out
    }

    /// Number of substation-level choices.
    pub fn substation_count(&self) -> usize {
        self.substation.len()
    }

    /// Parent choices of `tier` for the enclaves below it.
    fn parent_levels(&self, tier: Tier, below: &[Enclave], below_empty: &[bool]) -> Vec<ParentLevel> {
        let inst = self.inst;
        let ents = self.entities(tier);
        let total = self.budget.for_tier(tier);
        let mut out = Vec::new();
        // Children of each entity, by index into `below`.
        let children: Vec<Vec<usize>> = ents
            .iter()
            .map(|&n| (0..below.len()).filter(|&i| inst.controller[below[i].entity] == Some(n)).collect())
            .collect();
        let caps: Vec<usize> = if self.opts.allow_childless {
            vec![total; ents.len()]
        } else {
            children.iter().map(Vec::len).collect()
        };
        for counts in compositions(total, &caps) {
            let per_entity: Vec<Vec<(Vec<usize>, usize)>> = ents
                .iter()
                .zip(&counts)
                .zip(&children)
                .map(|((&n, &k), kids)| {
                    let fixed = inst.entity_enclaves[n].len();
                    let min_new = if self.opts.allow_childless { 0 } else { k };
                    let all = labelings(kids.len(), fixed, k, false, min_new);
                    dedupe_interchangeable(all, kids, below, below_empty, fixed)
                })
                .collect();
            let choice = TierChoice { per_entity };
            for idx in 0..choice.len() {
                let mut level = ParentLevel { enclaves: Vec::new(), parent: vec![usize::MAX; below.len()] };
                for (((&n, &k), kids), (labels, used)) in ents.iter().zip(&counts).zip(&children).zip(choice.pick(idx)) {
                    let base = level.enclaves.len();
                    debug_assert!(*used <= k);
                    for &e in &inst.entity_enclaves[n] {
                        level.enclaves.push(Enclave { entity: n, slot: Slot::Existing(e) });
                    }
                    // Used new enclaves first, then the childless ones.
                    for j in 0..k {
                        level.enclaves.push(Enclave { entity: n, slot: Slot::New(j + 1) });
                    }
                    for (&c, &l) in kids.iter().zip(labels) {
                        level.parent[c] = base + l;
                    }
                }
                debug_assert!(level.parent.iter().all(|&p| p != usize::MAX));
                out.push(level);
            }
        }
        out
    }

    pub(crate) fn center_levels(&self, s: &SubstationLevel) -> Vec<ParentLevel> {
        self.parent_levels(Tier::ControlCenter, &s.enclaves, &vec![false; s.enclaves.len()])
    }

    pub(crate) fn authority_levels(&self, c: &ParentLevel) -> Vec<ParentLevel> {
        let mut empty = vec![true; c.enclaves.len()];
        for &p in &c.parent {
            empty[p] = false;
        }
        self.parent_levels(Tier::BalancingAuthority, &c.enclaves, &empty)
    }

    /// Builds the plan for one choice per tier.
    pub(crate) fn plan(&self, s: &SubstationLevel, c: &ParentLevel, b: &ParentLevel) -> SegmentationPlan {
        let inst = self.inst;
        let mut plan = SegmentationPlan::default();
        let tiers = [(Tier::Substation, &s.enclaves), (Tier::ControlCenter, &c.enclaves), (Tier::BalancingAuthority, &b.enclaves)];
        for (tier, encs) in tiers {
            for e in encs.iter() {
                if let Slot::New(_) = e.slot {
                    plan.new_enclaves.push(NewEnclave { id: e.id(inst), tier, entity: inst.entity_id(e.entity).to_string() });
                }
            }
        }
        plan.new_enclaves.sort_by(|a, b| (a.tier, &a.id).cmp(&(b.tier, &b.id)));
        for (e, relays) in s.enclaves.iter().zip(&s.relays) {
            let id = e.id(inst);
            for &r in relays {
                plan.relay_enclave.insert(inst.comm.relays[r].id.clone(), id.clone());
            }
        }
        for (child, &p) in s.enclaves.iter().zip(&c.parent) {
            plan.parent.insert(child.id(inst), c.enclaves[p].id(inst));
        }
        for (child, &p) in c.enclaves.iter().zip(&b.parent) {
            plan.parent.insert(child.id(inst), b.enclaves[p].id(inst));
        }
        plan
    }

    /// Plan at `index`, if it exists.
    pub fn plan_at(&self, index: PlanIndex) -> Option<SegmentationPlan> {
        let s = self.substation.get(index.0)?;
        let cs = self.center_levels(s);
        let c = cs.get(index.1)?;
        let bs = self.authority_levels(c);
        let b = bs.get(index.2)?;
        Some(self.plan(s, c, b))
    }

    /// Visits every plan in enumeration order.
    pub fn for_each(&self, mut f: impl FnMut(PlanIndex, SegmentationPlan)) {
        for (si, s) in self.substation.iter().enumerate() {
            for (ci, c) in self.center_levels(s).iter().enumerate() {
                for (bi, b) in self.authority_levels(c).iter().enumerate() {
                    f((si, ci, bi), self.plan(s, c, b));
                }
            }
        }
    }

    /// Number of plans.
    pub fn count(&self) -> usize {
        let mut n = 0;
        for s in &self.substation {
            for c in self.center_levels(s) {
                n += self.authority_levels(&c).len();
            }
        }
        n
    }
}

/// Drops labelings that differ only by permuting interchangeable children:
/// childless new enclaves of the same entity.
fn dedupe_interchangeable(
    all: Vec<(Vec<usize>, usize)>,
    kids: &[usize],
    below: &[Enclave],
    below_empty: &[bool],
    fixed: usize,
) -> Vec<(Vec<usize>, usize)> {
    let class: Vec<usize> = kids
        .iter()
        .map(|&c| {
            let e = below[c];
            if below_empty[c] && matches!(e.slot, Slot::New(_)) {
                // Representative: first childless new enclave of that entity.
                kids.iter()
                    .copied()
                    .find(|&d| below[d].entity == e.entity && below_empty[d] && matches!(below[d].slot, Slot::New(_)))
                    .expect("c itself qualifies")
            } else {
                c
            }
        })
        .collect();
    if class.iter().zip(kids).all(|(a, b)| a == b) {
        return all;
    }
    let mut seen = HashSet::new();
    all.into_iter()
        .filter(|(labels, used)| {
            let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); fixed + used];
            for (&l, &c) in labels.iter().zip(&class) {
                blocks[l].push(c);
            }
            for b in &mut blocks {
                b.sort_unstable();
            }
            let mut new_blocks = blocks.split_off(fixed);
            new_blocks.sort();
            seen.insert((blocks, new_blocks))
        })
        .collect()
}

/// Every plan of `budget`, one per symmetry class, in enumeration order.
pub fn enumerate_plans(inst: &Instance, budget: DefenderBudget, opts: PlanOptions) -> Vec<SegmentationPlan> {
    let space = PlanSpace::new(inst, budget, opts);
    let mut out = Vec::new();
    space.for_each(|_, p| out.push(p));
    out
}
