//! Shipped instances, a tiny toy instance, and independent plan generators.

use std::collections::{BTreeMap, BTreeSet};

use gridseg::attacker::SegmentedForest;
use gridseg::defender::{NewEnclave, SegmentationPlan};
use gridseg::ingest::load_instance;
use gridseg::model::{DefenderBudget, Instance, Tier};
use rand::seq::SliceRandom;
use rand::Rng;

fn data(name: &str) -> String {
    let path = format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn case9() -> Instance {
    load_instance(&data("case9.m"), &data("comm9.txt")).expect("shipped 9-bus instance")
}

pub fn case30() -> Instance {
    load_instance(&data("case30.m"), &data("comm30.txt")).expect("shipped 30-bus instance")
}

pub const TOY_GRID: &str = "gridseg-grid 1
base-mva 100
substation S1
substation S2
line L1 from=S1 to=S2 susceptance=10 shift=0 rating=80
generator G1 at=S1 pmax=100
load D1 at=S2 demand=60
";

pub const TOY_COMM: &str = "gridseg-comm 1
entity ba BA
entity cc CC under=BA
entity ss S1 under=CC
entity ss S2 under=CC
enclave ba BA/0 of=BA
enclave cc CC/0 of=CC
enclave ss S1/0 of=S1
enclave ss S2/0 of=S2
relay S1.L1 at=S1 controls=L1
relay S1.G1 at=S1 controls=G1
relay S2.L1 at=S2 controls=L1
relay S2.D1 at=S2 controls=D1
";

/// One balancing authority, one control center, two substations with two
/// relays each.
pub fn toy() -> Instance {
    load_instance(TOY_GRID, TOY_COMM).expect("toy instance")
}

fn controller(inst: &Instance, entity: &str) -> String {
    inst.comm.entity(entity).unwrap().controllers[0].clone()
}

fn owner_of(inst: &Instance, enclave: &str) -> (Tier, String) {
    let e = inst.comm.enclaves.iter().find(|e| e.id == enclave).unwrap();
    (e.tier, e.members[0].clone())
}

/// Random feasible plan built directly from the segmentation rules: up to
/// `max_new` new enclaves per tier on random entities, relays and children
/// spread at random over the owning entity's enclaves.
pub fn random_plan(rng: &mut impl Rng, inst: &Instance, max_new: usize) -> SegmentationPlan {
    let comm = &inst.comm;
    let mut plan = SegmentationPlan::default();
    // Enclaves (id, entity) per tier.
    let mut encl: BTreeMap<Tier, Vec<(String, String)>> = BTreeMap::new();
    for e in &comm.enclaves {
        encl.entry(e.tier).or_default().push((e.id.clone(), e.members[0].clone()));
    }
    let mut fresh = 0;
    for tier in [Tier::Substation, Tier::ControlCenter, Tier::BalancingAuthority] {
        let ents: Vec<&str> = comm.entities_in(tier).map(|e| e.id.as_str()).collect();
        for _ in 0..rng.gen_range(0..=max_new) {
            let ent = *ents.choose(rng).unwrap();
            if tier == Tier::Substation {
                let relays = comm.relays.iter().filter(|r| r.owners[0] == ent).count();
                let have = encl[&tier].iter().filter(|(_, n)| n == ent).count();
                if have >= relays {
                    continue;
                }
            }
            fresh += 1;
            let id = format!("{ent}/r{fresh}");
            plan.new_enclaves.push(NewEnclave { id: id.clone(), tier, entity: ent.to_string() });
            encl.entry(tier).or_default().push((id, ent.to_string()));
        }
    }
    plan.new_enclaves.sort_by(|a, b| (a.tier, &a.id).cmp(&(b.tier, &b.id)));
    // Relays: first cover every substation enclave once, then spread the rest.
    for s in comm.entities_in(Tier::Substation) {
        let mut relays: Vec<&str> = comm.relays.iter().filter(|r| r.owners[0] == s.id).map(|r| r.id.as_str()).collect();
        relays.shuffle(rng);
        let mine: Vec<&String> = encl[&Tier::Substation].iter().filter(|(_, n)| *n == s.id).map(|(id, _)| id).collect();
        for (k, r) in relays.iter().enumerate() {
            let e = if k < mine.len() { mine[k] } else { mine.choose(rng).unwrap() };
            plan.relay_enclave.insert(r.to_string(), e.clone());
        }
    }
    for tier in [Tier::Substation, Tier::ControlCenter] {
        let up = tier.above().unwrap();
        for (id, ent) in &encl[&tier] {
            let ctrl = controller(inst, ent);
            let parents: Vec<&String> = encl[&up].iter().filter(|(_, n)| *n == ctrl).map(|(id, _)| id).collect();
            plan.parent.insert(id.clone(), parents.choose(rng).unwrap().to_string());
        }
    }
    plan
}

/// Label-free encoding of a plan: the forest as nested sorted terms, new
/// enclaves named only by their entity.
pub fn canonical(inst: &Instance, plan: &SegmentationPlan) -> String {
    let mut tier_entity: BTreeMap<String, (Tier, String, bool)> = BTreeMap::new();
    for e in &inst.comm.enclaves {
        let (t, n) = owner_of(inst, &e.id);
        tier_entity.insert(e.id.clone(), (t, n, false));
    }
    for e in &plan.new_enclaves {
        tier_entity.insert(e.id.clone(), (e.tier, e.entity.clone(), true));
    }
    let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (c, p) in &plan.parent {
        children.entry(p.as_str()).or_default().push(c.as_str());
    }
    let mut relays: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (r, e) in &plan.relay_enclave {
        relays.entry(e.as_str()).or_default().push(r.as_str());
    }
    fn term(
        id: &str,
        info: &BTreeMap<String, (Tier, String, bool)>,
        children: &BTreeMap<&str, Vec<&str>>,
        relays: &BTreeMap<&str, Vec<&str>>,
    ) -> String {
        let (_, ent, new) = &info[id];
        let head = if *new { format!("new:{ent}") } else { id.to_string() };
        let mut parts: Vec<String> =
            children.get(id).into_iter().flatten().map(|c| term(c, info, children, relays)).collect();
        parts.extend(relays.get(id).into_iter().flatten().map(|r| format!("r:{r}")));
        parts.sort();
        format!("{head}({})", parts.join(","))
    }
    let mut roots: Vec<String> = tier_entity
        .iter()
        .filter(|(_, (t, _, _))| *t == Tier::BalancingAuthority)
        .map(|(id, _)| term(id, &tier_entity, &children, &relays))
        .collect();
    roots.sort();
    roots.join(";")
}

/// Every labeled plan with exactly `budget` new enclaves, generated without
/// any symmetry handling, reduced to label-free encodings.
pub fn brute_force_orbits(inst: &Instance, budget: DefenderBudget, allow_childless: bool) -> (usize, BTreeSet<String>) {
    let comm = &inst.comm;
    let ents = |t: Tier| -> Vec<String> { comm.entities_in(t).map(|e| e.id.clone()).collect() };
    let mut labeled = 0;
    let mut out = BTreeSet::new();
    // Entity of each new slot, per tier.
    let assign = |t: Tier| -> Vec<Vec<String>> {
        let k = budget.for_tier(t);
        let es = ents(t);
        let mut all = vec![Vec::new()];
        for _ in 0..k {
            all = all.into_iter().flat_map(|p| es.iter().map(move |e| [p.clone(), vec![e.clone()]].concat())).collect();
        }
        all
    };
    for qs in assign(Tier::Substation) {
        for qc in assign(Tier::ControlCenter) {
            for qb in assign(Tier::BalancingAuthority) {
                let mut plan = SegmentationPlan::default();
                let mut encl: BTreeMap<Tier, Vec<(String, String)>> = BTreeMap::new();
                for e in &comm.enclaves {
                    encl.entry(e.tier).or_default().push((e.id.clone(), e.members[0].clone()));
                }
                for (tier, q) in [(Tier::Substation, &qs), (Tier::ControlCenter, &qc), (Tier::BalancingAuthority, &qb)] {
                    for (k, ent) in q.iter().enumerate() {
                        let id = format!("{}/slot{k}", tier.keyword());
                        plan.new_enclaves.push(NewEnclave { id: id.clone(), tier, entity: ent.clone() });
                        encl.entry(tier).or_default().push((id, ent.clone()));
                    }
                }
                // Relay choices: each relay to an enclave of its owner.
                let relay_opts: Vec<(String, Vec<String>)> = comm
                    .relays
                    .iter()
                    .map(|r| {
                        let opts = encl[&Tier::Substation].iter().filter(|(_, n)| *n == r.owners[0]).map(|(id, _)| id.clone()).collect();
                        (r.id.clone(), opts)
                    })
                    .collect();
                let parent_opts = |tier: Tier| -> Vec<(String, Vec<String>)> {
                    let up = tier.above().unwrap();
                    encl[&tier]
                        .iter()
                        .map(|(id, ent)| {
                            let ctrl = controller(inst, ent);
                            (id.clone(), encl[&up].iter().filter(|(_, n)| *n == ctrl).map(|(p, _)| p.clone()).collect())
                        })
                        .collect()
                };
                let ss_par = parent_opts(Tier::Substation);
                let cc_par = parent_opts(Tier::ControlCenter);
                for_each_choice(&relay_opts, &mut |relay_pick| {
                    let used: BTreeSet<&str> = relay_pick.iter().map(|s| s.as_str()).collect();
                    if encl[&Tier::Substation].iter().any(|(id, _)| !used.contains(id.as_str())) {
                        return;
                    }
                    for_each_choice(&ss_par, &mut |ss_pick| {
                        for_each_choice(&cc_par, &mut |cc_pick| {
                            let mut p = plan.clone();
                            for ((r, _), e) in relay_opts.iter().zip(relay_pick) {
                                p.relay_enclave.insert(r.clone(), e.clone());
                            }
                            for ((c, _), e) in ss_par.iter().zip(ss_pick).chain(cc_par.iter().zip(cc_pick)) {
                                p.parent.insert(c.clone(), e.clone());
                            }
                            if !allow_childless && !p.childless_enclaves().is_empty() {
                                return;
                            }
                            labeled += 1;
                            out.insert(canonical(inst, &p));
                        });
                    });
                });
            }
        }
    }
    (labeled, out)
}

fn for_each_choice(opts: &[(String, Vec<String>)], f: &mut dyn FnMut(&[String])) {
    fn go(opts: &[(String, Vec<String>)], cur: &mut Vec<String>, f: &mut dyn FnMut(&[String])) {
        if cur.len() == opts.len() {
            f(cur);
            return;
        }
        for o in &opts[cur.len()].1 {
            cur.push(o.clone());
            go(opts, cur, f);
            cur.pop();
        }
    }
    go(opts, &mut Vec::new(), f);
}

/// Number of ancestor-closed node sets of each size, by a product of
/// per-subtree generating polynomials (independent of the walker).
pub fn closed_set_counts(forest: &SegmentedForest) -> Vec<u64> {
    fn poly(forest: &SegmentedForest, v: usize) -> Vec<u64> {
        // Sets inside v's subtree that contain v, by size.
        let mut acc = vec![0, 1];
        for &c in &forest.nodes[v].children {
            let mut child = poly(forest, c);
            child[0] += 1; // or leave the child's subtree alone
            acc = mul(&acc, &child);
        }
        acc
    }
    fn mul(a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }
    let mut total = vec![1];
    for (v, n) in forest.nodes.iter().enumerate() {
        if n.parent.is_none() {
            let mut p = poly(forest, v);
            p[0] += 1;
            total = mul(&total, &p);
        }
    }
    total
}
