//! Trilevel search: the designer's plan that minimizes the attacker's best
//! load shed.
//!
//! An attack's effect depends only on its substation enclaves; the parents it
//! must also penetrate are implied. So a plan's value is the largest shed over
//! substation-enclave sets `T` with `|T| + #parents(T) + #grandparents(T)`
//! within the attack budget. Splitting parents further can only raise that
//! cost, which gives cheap lower bounds: with every enclave in its own
//! control-center and balancing-authority enclave (`3|T| <= U`) for a whole
//! relay partition, and with every control-center enclave under its own
//! balancing-authority enclave for a relay partition plus control-center
//! choice.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use super::plan::SegmentationPlan;
use super::space::{ParentLevel, PlanIndex, PlanOptions, PlanSpace, SubstationLevel};
use crate::attacker::{apply_segmentation, worst_attack_enumerate, worst_attack_milp, TIE_TOL};
use crate::dcopf::{Attack, OutageMask, ShedCache};
use crate::error::{Error, Result};
use crate::model::{DefenderBudget, GridCase, Instance};

/// Attacker oracle used to value each plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Oracle {
    #[default]
    Enumerate,
    Milp,
}

impl Oracle {
    pub fn name(self) -> &'static str {
        match self {
            Oracle::Enumerate => "enumerate",
            Oracle::Milp => "milp",
        }
    }
}

impl std::str::FromStr for Oracle {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "enumerate" => Ok(Oracle::Enumerate),
            "milp" => Ok(Oracle::Milp),
            _ => Err(format!("unknown oracle {s:?} (expected enumerate or milp)")),
        }
    }
}

/// Outcome of a trilevel solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveRecord {
    pub digest: String,
    pub defender_budget: DefenderBudget,
    pub attack_budget: usize,
    pub oracle: Oracle,
    pub plan: SegmentationPlan,
    /// Worst attack under `plan`.
    pub attack: Attack,
    /// Optimal worst-case load shed in MW.
    pub load_shed: f64,
    /// Number of plans in the symmetry-reduced space.
    pub plan_count: u64,
}

/// Counters that depend on scheduling; not part of the record.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub plans_valued: u64,
    pub shed_evaluations: usize,
}

/// Runs the trilevel search with the default plan options.
pub fn solve_trilevel(inst: &Instance, budget: DefenderBudget, attack_budget: usize, oracle: Oracle) -> Result<SolveRecord> {
    solve_with(inst, budget, attack_budget, oracle, PlanOptions::default(), &ShedCache::new()).map(|(r, _)| r)
}

/// One record per budget, in input order, sharing the shed memo.
pub fn budget_sweep(inst: &Instance, budgets: &[DefenderBudget], attack_budget: usize, oracle: Oracle) -> Result<Vec<SolveRecord>> {
    let cache = ShedCache::new();
    budgets
        .iter()
        .map(|&b| solve_with(inst, b, attack_budget, oracle, PlanOptions::default(), &cache).map(|(r, _)| r))
        .collect()
}

/// [`solve_trilevel`] with explicit options and a caller-owned shed memo.
pub fn solve_with(
    inst: &Instance,
    budget: DefenderBudget,
    attack_budget: usize,
    oracle: Oracle,
    opts: PlanOptions,
    cache: &ShedCache,
) -> Result<(SolveRecord, SolveStats)> {
    let space = PlanSpace::new(inst, budget, opts);
    let found = match oracle {
        Oracle::Enumerate => search_structural(&space, attack_budget, cache)?,
        Oracle::Milp => search_milp(&space, attack_budget)?,
    };
    let Some((index, value, plan_count, valued)) = found else {
        return Err(Error::PlanInfeasible { family: "budget", message: format!("no feasible plan uses budget {budget}") });
    };
    let plan = space.plan_at(index).expect("index from the same space");
    let forest = apply_segmentation(inst, &plan)?;
    let (attack, shed) = match oracle {
        Oracle::Enumerate => worst_attack_enumerate(&forest, &inst.grid, attack_budget)?,
        Oracle::Milp => worst_attack_milp(inst, &forest, attack_budget)?,
    };
    let tol = match oracle {
        Oracle::Enumerate => 1e-6,
        Oracle::Milp => crate::attacker::DUAL_BOUND_TOL,
    };
    if (shed - value).abs() > tol {
        return Err(Error::Contract(format!("plan valued at {value:.6} MW but its worst attack sheds {shed:.6} MW")));
    }
    let record = SolveRecord {
        digest: crate::ingest::instance_digest(inst),
        defender_budget: budget,
        attack_budget,
        oracle,
        plan,
        attack,
        load_shed: shed,
        plan_count,
    };
    Ok((record, SolveStats { plans_valued: valued, shed_evaluations: cache.len() }))
}

/// Outage mask of every substation enclave of a relay partition.
fn unit_masks(inst: &Instance, s: &SubstationLevel) -> Vec<OutageMask> {
    s.relays
        .iter()
        .map(|rs| {
            let mut m = OutageMask::default();
            for &r in rs {
                for &c in &inst.relay_components[r] {
                    m.insert(c);
                }
            }
            m
        })
        .collect()
}

/// Grouping of substation enclaves under parents: `cc_of[unit]` and
/// `ba_of[cc]`.
struct Grouping<'a> {
    cc_of: &'a [usize],
    ba_of: &'a [usize],
    n_ba: usize,
}

impl Grouping<'_> {
    fn cost(&self, units: &[usize]) -> usize {
        let mut ccs: Vec<usize> = units.iter().map(|&u| self.cc_of[u]).collect();
        ccs.sort_unstable();
        ccs.dedup();
        let mut bas: Vec<usize> = ccs.iter().map(|&c| self.ba_of[c]).collect();
        bas.sort_unstable();
        bas.dedup();
        units.len() + ccs.len() + bas.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    Value(f64),
    /// Some attack sheds more than this threshold (plus tolerance).
    Killed(f64),
}

/// Recently successful attacks, as substation-enclave index sets of one
/// relay partition.
#[derive(Default)]
struct Hints(Vec<Vec<usize>>);

const HINT_CAP: usize = 32;

impl Hints {
    fn add(&mut self, set: Vec<usize>) {
        if let Some(k) = self.0.iter().position(|h| *h == set) {
            self.0.remove(k);
        }
        self.0.insert(0, set);
        self.0.truncate(HINT_CAP);
    }
}

struct Valuer<'a> {
    grid: &'a GridCase,
    cache: &'a ShedCache,
    masks: &'a [OutageMask],
    budget: usize,
    base: f64,
}

struct Walk<'a, 'b> {
    v: &'a Valuer<'b>,
    g: &'a Grouping<'a>,
    kill: f64,
    cc_used: Vec<u32>,
    ba_used: Vec<u32>,
    chosen: Vec<usize>,
    best: f64,
}

impl Walk<'_, '_> {
    // Returns the killing set, if any.
    fn go(&mut self, from: usize, cost: usize, mask: OutageMask) -> Result<Option<Vec<usize>>> {
        for j in from..self.v.masks.len() {
            let c = self.g.cc_of[j];
            let b = self.g.ba_of[c];
            let new_cc = self.cc_used[c] == 0;
            let new_ba = new_cc && self.ba_used[b] == 0;
            let next = cost + 1 + usize::from(new_cc) + usize::from(new_ba);
            if next > self.v.budget {
                continue;
            }
            let m = mask.union(&self.v.masks[j]);
            self.chosen.push(j);
            let l = self.v.cache.shed(self.v.grid, &m)?;
            if l > self.kill + TIE_TOL {
                return Ok(Some(self.chosen.clone()));
            }
            if l > self.best {
                self.best = l;
            }
            self.cc_used[c] += 1;
            if new_cc {
                self.ba_used[b] += 1;
            }
            let r = self.go(j + 1, next, m)?;
            self.cc_used[c] -= 1;
            if new_cc {
                self.ba_used[b] -= 1;
            }
            self.chosen.pop();
            if r.is_some() {
                return Ok(r);
            }
        }
        Ok(None)
    }
}

impl Valuer<'_> {
    /// Worst shed under `g`, or `Killed` as soon as some attack exceeds
    /// `kill`.
    fn value(&self, g: &Grouping, kill: f64, hints: &mut Hints) -> Result<Outcome> {
        if self.base > kill + TIE_TOL {
            return Ok(Outcome::Killed(kill));
        }
        for k in 0..hints.0.len() {
            let h = &hints.0[k];
            if g.cost(h) > self.budget {
                continue;
            }
            let m = h.iter().fold(OutageMask::default(), |m, &u| m.union(&self.masks[u]));
            if self.cache.shed(self.grid, &m)? > kill + TIE_TOL {
                let h = hints.0.remove(k);
                hints.0.insert(0, h);
                return Ok(Outcome::Killed(kill));
            }
        }
        let mut w = Walk {
            v: self,
            g,
            kill,
            cc_used: vec![0; g.ba_of.len()],
            ba_used: vec![0; g.n_ba],
            chosen: Vec::new(),
            best: self.base,
        };
        match w.go(0, 0, OutageMask::default())? {
            Some(set) => {
                hints.add(set);
                Ok(Outcome::Killed(kill))
            }
            None => Ok(Outcome::Value(w.best)),
        }
    }
}

/// Shared best value so far, as f64 bits (nonnegative floats order like
/// their bit patterns).
struct Incumbent(AtomicU64);

impl Incumbent {
    fn new() -> Self {
        Incumbent(AtomicU64::new(f64::INFINITY.to_bits()))
    }

    fn get(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }

    fn offer(&self, v: f64) {
        self.0.fetch_min(v.max(0.0).to_bits(), Ordering::Relaxed);
    }
}

/// Canonical key of a grouping's nonempty structure: parent labels in order
/// of first use.
fn shape_key(cc_of: &[usize], ba_of: &[usize]) -> Vec<u32> {
    let mut cc_label: HashMap<usize, u32> = HashMap::new();
    let mut key = Vec::with_capacity(cc_of.len() * 2);
    let mut order = Vec::new();
    for &c in cc_of {
        let n = cc_label.len() as u32;
        let l = *cc_label.entry(c).or_insert_with(|| {
            order.push(c);
            n
        });
        key.push(l);
    }
    key.push(u32::MAX);
    let mut ba_label: HashMap<usize, u32> = HashMap::new();
    for c in order {
        let n = ba_label.len() as u32;
        key.push(*ba_label.entry(ba_of[c]).or_insert(n));
    }
    key
}

type Found = Option<(PlanIndex, f64, u64, u64)>;

/// Replaces `best` when `cand` is strictly better beyond the tie tolerance.
fn better(best: &mut Option<(PlanIndex, f64)>, cand: (PlanIndex, f64)) {
    if best.is_none_or(|(_, v)| cand.1 < v - TIE_TOL) {
        *best = Some(cand);
    }
}

fn search_structural(space: &PlanSpace, budget: usize, cache: &ShedCache) -> Result<Found> {
    let inst = space.instance();
    let grid = &inst.grid;
    let base = cache.shed(grid, &OutageMask::default())?;
    let incumbent = Incumbent::new();
    let levels = space.substation_levels_ref();
    let per_level: Vec<Result<(Option<(PlanIndex, f64)>, u64, u64)>> = levels
        .par_iter()
        .enumerate()
        .map(|(si, s)| {
            let masks = unit_masks(inst, s);
            let v = Valuer { grid, cache, masks: &masks, budget, base };
            let mut hints = Hints::default();
            let mut best = None;
            let mut count = 0u64;
            let mut valued = 0u64;
            let n = masks.len();
            let ident: Vec<usize> = (0..n).collect();
            let finest = Grouping { cc_of: &ident, ba_of: &ident, n_ba: n };
            let level_dead = matches!(v.value(&finest, incumbent.get(), &mut hints)?, Outcome::Killed(_));
            let mut authority: HashMap<Vec<(usize, bool)>, Vec<ParentLevel>> = HashMap::new();
            let mut pair_memo: HashMap<Vec<u32>, Outcome> = HashMap::new();
            let mut memo: HashMap<Vec<u32>, Outcome> = HashMap::new();
            for (ci, c) in space.center_levels(s).iter().enumerate() {
                // Options depend on each enclave's entity and whether it is empty.
                let mut empty: Vec<(usize, bool)> = c.enclaves.iter().map(|e| (e.entity, true)).collect();
                for &p in &c.parent {
                    empty[p].1 = false;
                }
                let bs = authority.entry(empty).or_insert_with(|| space.authority_levels(c));
                count += bs.len() as u64;
                if level_dead || bs.is_empty() {
                    continue;
                }
                let own: Vec<usize> = (0..c.enclaves.len()).collect();
                let pair = Grouping { cc_of: &c.parent, ba_of: &own, n_ba: own.len() };
                if settled_kill(&v, &pair, &mut pair_memo, &incumbent, &mut hints)? {
                    continue;
                }
                for (bi, b) in bs.iter().enumerate() {
                    let g = Grouping { cc_of: &c.parent, ba_of: &b.parent, n_ba: b.enclaves.len() };
                    let key = shape_key(g.cc_of, g.ba_of);
                    let kill = incumbent.get();
                    let out = match memo.get(&key) {
                        // Same structure as an earlier plan: never strictly better.
                        Some(_) => continue,
                        None => {
                            valued += 1;
                            let out = v.value(&g, kill, &mut hints)?;
                            memo.insert(key, out);
                            out
                        }
                    };
                    if let Outcome::Value(x) = out {
                        incumbent.offer(x);
                        better(&mut best, ((si, ci, bi), x));
                    }
                }
            }
            Ok((best, count, valued))
        })
        .collect();
    let mut best = None;
    let (mut count, mut valued) = (0, 0);
    for r in per_level {
        let (b, c, n) = r?;
        count += c;
        valued += n;
        if let Some(b) = b {
            better(&mut best, b);
        }
    }
    Ok(best.map(|(i, v)| (i, v, count, valued)))
}

/// True when the pair lower bound already exceeds the incumbent.
fn settled_kill(
    v: &Valuer,
    g: &Grouping,
    memo: &mut HashMap<Vec<u32>, Outcome>,
    incumbent: &Incumbent,
    hints: &mut Hints,
) -> Result<bool> {
    let key = shape_key(g.cc_of, g.ba_of);
    let kill = incumbent.get();
    let out = match memo.get(&key) {
        Some(&o) => o,
        None => {
            let o = v.value(g, kill, hints)?;
            memo.insert(key, o);
            o
        }
    };
    Ok(match out {
        Outcome::Killed(_) => true,
        Outcome::Value(x) => x > kill + TIE_TOL,
    })
}

/// Values every structurally distinct plan with the attacker MILP.
fn search_milp(space: &PlanSpace, budget: usize) -> Result<Found> {
    let inst = space.instance();
    let mut memo: HashMap<(Vec<OutageMask>, Vec<u32>), f64> = HashMap::new();
    let mut best = None;
    let (mut count, mut valued) = (0u64, 0u64);
    for (si, s) in space.substation_levels_ref().iter().enumerate() {
        let masks = unit_masks(inst, s);
        // Units sorted by mask keep the key independent of unit order.
        let mut order: Vec<usize> = (0..masks.len()).collect();
        order.sort_by_key(|&u| masks[u]);
        let sorted: Vec<OutageMask> = order.iter().map(|&u| masks[u]).collect();
        for (ci, c) in space.center_levels(s).iter().enumerate() {
            let relabeled: Vec<usize> = order.iter().map(|&u| c.parent[u]).collect();
            for (bi, b) in space.authority_levels(c).iter().enumerate() {
                count += 1;
                let key = (sorted.clone(), shape_key(&relabeled, &b.parent));
                let x = match memo.get(&key) {
                    Some(&x) => x,
                    None => {
                        valued += 1;
                        let plan = space.plan(s, c, b);
                        let forest = apply_segmentation(inst, &plan)?;
                        let (_, x) = worst_attack_milp(inst, &forest, budget)?;
                        memo.insert(key, x);
                        x
                    }
                };
                better(&mut best, ((si, ci, bi), x));
            }
        }
    }
    Ok(best.map(|(i, v)| (i, v, count, valued)))
}
