//! Domain types for a grid case and its communication forest, plus the
//! structural checks run before any solve.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

/// Tier of the communication hierarchy, top first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tier {
    BalancingAuthority,
    ControlCenter,
    Substation,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::BalancingAuthority, Tier::ControlCenter, Tier::Substation];

    pub fn above(self) -> Option<Tier> {
        match self {
            Tier::BalancingAuthority => None,
            Tier::ControlCenter => Some(Tier::BalancingAuthority),
            Tier::Substation => Some(Tier::ControlCenter),
        }
    }

    pub fn below(self) -> Option<Tier> {
        match self {
            Tier::BalancingAuthority => Some(Tier::ControlCenter),
            Tier::ControlCenter => Some(Tier::Substation),
            Tier::Substation => None,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Tier::BalancingAuthority => "ba",
            Tier::ControlCenter => "cc",
            Tier::Substation => "ss",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Tier> {
        match s {
            "ba" => Some(Tier::BalancingAuthority),
            "cc" => Some(Tier::ControlCenter),
            "ss" => Some(Tier::Substation),
            _ => None,
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub id: String,
    pub from: String,
    pub to: String,
    /// Per-unit on the case base.
    pub susceptance: f64,
    /// Radians.
    pub shift: f64,
    /// MW.
    pub rating: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub id: String,
    pub bus: String,
    /// MW.
    pub pmax: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Load {
    pub id: String,
    pub bus: String,
    /// MW.
    pub demand: f64,
}

/// Buses (substations), lines, generators and loads of a DC power-flow case.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCase {
    pub base_mva: f64,
    pub substations: Vec<String>,
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
}

impl GridCase {
    /// Builds a case with every list sorted by identifier.
    pub fn new(
        base_mva: f64,
        mut substations: Vec<String>,
        mut lines: Vec<Line>,
        mut generators: Vec<Generator>,
        mut loads: Vec<Load>,
    ) -> Self {
        substations.sort();
        lines.sort_by(|a, b| a.id.cmp(&b.id));
        generators.sort_by(|a, b| a.id.cmp(&b.id));
        loads.sort_by(|a, b| a.id.cmp(&b.id));
        GridCase { base_mva, substations, lines, generators, loads }
    }

    pub fn substation_index(&self, id: &str) -> Option<usize> {
        self.substations.binary_search_by(|s| s.as_str().cmp(id)).ok()
    }

    pub fn component_count(&self) -> usize {
        self.lines.len() + self.generators.len() + self.loads.len()
    }

    /// Index of a component in the combined line, generator, load numbering.
    pub fn component_index(&self, id: &str) -> Option<usize> {
        let (k, g) = (self.lines.len(), self.generators.len());
        if let Ok(i) = self.lines.binary_search_by(|l| l.id.as_str().cmp(id)) {
            return Some(i);
        }
        if let Ok(i) = self.generators.binary_search_by(|x| x.id.as_str().cmp(id)) {
            return Some(k + i);
        }
        if let Ok(i) = self.loads.binary_search_by(|x| x.id.as_str().cmp(id)) {
            return Some(k + g + i);
        }
        None
    }

    pub fn component_id(&self, index: usize) -> &str {
        let (k, g) = (self.lines.len(), self.generators.len());
        if index < k {
            &self.lines[index].id
        } else if index < k + g {
            &self.generators[index - k].id
        } else {
            &self.loads[index - k - g].id
        }
    }

    /// Substation hosting a component (a line is hosted at both ends).
    fn component_hosts(&self, index: usize) -> Vec<&str> {
        let (k, g) = (self.lines.len(), self.generators.len());
        if index < k {
            vec![&self.lines[index].from, &self.lines[index].to]
        } else if index < k + g {
            vec![&self.generators[index - k].bus]
        } else {
            vec![&self.loads[index - k - g].bus]
        }
    }
}

/// Sum of all load demands in MW.
pub fn total_demand(grid: &GridCase) -> f64 {
    grid.loads.iter().map(|l| l.demand).sum()
}

/// A balancing authority, control center or substation.
#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub id: String,
    pub tier: Tier,
    /// Entities one tier up whose control set contains this one. A valid
    /// forest has exactly one for control centers and substations.
    pub controllers: Vec<String>,
    /// Human-readable name used in renderings.
    pub label: Option<String>,
}

/// An enclave present before segmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExistingEnclave {
    pub id: String,
    pub tier: Tier,
    /// Entities this enclave belongs to; exactly one when valid.
    pub members: Vec<String>,
    /// Parent enclave in the pre-segmentation forest, when the file pins it.
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relay {
    pub id: String,
    /// Substations owning this relay; exactly one when valid.
    pub owners: Vec<String>,
    /// Controlled grid components (lines, generators, loads) by identifier.
    pub components: Vec<String>,
    /// Controlling enclave in the pre-segmentation forest, when pinned.
    pub enclave: Option<String>,
}

/// Three-tier entity/enclave/relay forest.
#[derive(Debug, Clone, PartialEq)]
pub struct CommNetwork {
    pub entities: Vec<Entity>,
    pub enclaves: Vec<ExistingEnclave>,
    pub relays: Vec<Relay>,
}

impl CommNetwork {
    /// Builds a network with every list sorted by identifier.
    pub fn new(mut entities: Vec<Entity>, mut enclaves: Vec<ExistingEnclave>, mut relays: Vec<Relay>) -> Self {
        entities.sort_by(|a, b| (a.tier, &a.id).cmp(&(b.tier, &b.id)));
        enclaves.sort_by(|a, b| (a.tier, &a.id).cmp(&(b.tier, &b.id)));
        relays.sort_by(|a, b| a.id.cmp(&b.id));
        CommNetwork { entities, enclaves, relays }
    }

    pub fn entities_in(&self, tier: Tier) -> impl Iterator<Item = &Entity> {
        self.entities.iter().filter(move |e| e.tier == tier)
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.id == id)
    }

    /// Entities one tier below `id` that it controls.
    pub fn control_set(&self, id: &str) -> Vec<&Entity> {
        self.entities.iter().filter(|e| e.controllers.iter().any(|c| c == id)).collect()
    }
}

/// Number of new enclaves the designer must create in each tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DefenderBudget {
    pub substation: usize,
    pub control_center: usize,
    pub balancing_authority: usize,
}

impl DefenderBudget {
    pub fn new(substation: usize, control_center: usize, balancing_authority: usize) -> Self {
        DefenderBudget { substation, control_center, balancing_authority }
    }

    pub fn for_tier(&self, tier: Tier) -> usize {
        match tier {
            Tier::BalancingAuthority => self.balancing_authority,
            Tier::ControlCenter => self.control_center,
            Tier::Substation => self.substation,
        }
    }
}

impl fmt::Display for DefenderBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.substation, self.control_center, self.balancing_authority)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: &'static str,
    pub message: String,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport { ok: violations.is_empty(), violations }
    }

    pub fn has(&self, code: &str) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: {}", v.code, v.message)?;
        }
        Ok(())
    }
}

fn push(out: &mut Vec<Violation>, code: &'static str, message: String, ids: &[&str]) {
    out.push(Violation { code, message, ids: ids.iter().map(|s| s.to_string()).collect() });
}

fn duplicates<'a>(ids: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut seen = BTreeSet::new();
    let mut dup = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            dup.insert(id);
        }
    }
    dup.into_iter().collect()
}

/// Grid-side structural checks.
pub fn validate_grid(grid: &GridCase) -> Vec<Violation> {
    let mut out = Vec::new();
    let ids = grid
        .substations
        .iter()
        .map(String::as_str)
        .chain(grid.lines.iter().map(|l| l.id.as_str()))
        .chain(grid.generators.iter().map(|g| g.id.as_str()))
        .chain(grid.loads.iter().map(|d| d.id.as_str()));
    for d in duplicates(ids) {
        push(&mut out, "DUPLICATE_ID", format!("identifier {d} is used more than once in the grid"), &[d]);
    }
    if !(grid.base_mva > 0.0) {
        push(&mut out, "BAD_BASE", format!("base MVA {} is not positive", grid.base_mva), &[]);
    }
    let known = |s: &str| grid.substations.iter().any(|x| x == s);
    for l in &grid.lines {
        for end in [&l.from, &l.to] {
            if !known(end) {
                push(&mut out, "UNKNOWN_SUBSTATION", format!("line {} ends at unknown substation {end}", l.id), &[&l.id, end]);
            }
        }
        if l.from == l.to {
            push(&mut out, "LINE_SELF_LOOP", format!("line {} starts and ends at {}", l.id, l.from), &[&l.id]);
        }
        if !(l.susceptance > 0.0) {
            push(&mut out, "BAD_SUSCEPTANCE", format!("line {} has susceptance {}", l.id, l.susceptance), &[&l.id]);
        }
        if !(l.rating > 0.0) {
            push(&mut out, "BAD_RATING", format!("line {} has rating {}", l.id, l.rating), &[&l.id]);
        }
        if !l.shift.is_finite() {
            push(&mut out, "BAD_SHIFT", format!("line {} has shift {}", l.id, l.shift), &[&l.id]);
        }
    }
    for g in &grid.generators {
        if !known(&g.bus) {
            push(&mut out, "UNKNOWN_SUBSTATION", format!("generator {} sits at unknown substation {}", g.id, g.bus), &[&g.id, &g.bus]);
        }
        if !(g.pmax >= 0.0) {
            push(&mut out, "BAD_CAPACITY", format!("generator {} has capacity {}", g.id, g.pmax), &[&g.id]);
        }
    }
    for d in &grid.loads {
        if !known(&d.bus) {
            push(&mut out, "UNKNOWN_SUBSTATION", format!("load {} sits at unknown substation {}", d.id, d.bus), &[&d.id, &d.bus]);
        }
        if !(d.demand >= 0.0) {
            push(&mut out, "BAD_DEMAND", format!("load {} has demand {}", d.id, d.demand), &[&d.id]);
        }
    }
    out
}

/// Checks every structural assumption of a (grid, communication) pair.
/// Violations are returned as data.
pub fn validate_instance(grid: &GridCase, comm: &CommNetwork) -> ValidationReport {
    let mut out = validate_grid(grid);
    let ids = comm
        .entities
        .iter()
        .map(|e| e.id.as_str())
        .chain(comm.enclaves.iter().map(|e| e.id.as_str()))
        .chain(comm.relays.iter().map(|r| r.id.as_str()));
    for d in duplicates(ids) {
        push(&mut out, "DUPLICATE_ID", format!("identifier {d} is used more than once in the communication network"), &[d]);
    }
    let tier_of: HashMap<&str, Tier> = comm.entities.iter().map(|e| (e.id.as_str(), e.tier)).collect();

    // Forest property of the control structure.
    for e in &comm.entities {
        match e.tier.above() {
            None => {
                if !e.controllers.is_empty() {
                    push(&mut out, "CONTROL_FOREST", format!("balancing authority {} is listed under another entity", e.id), &[&e.id]);
                }
            }
            Some(up) => {
                if e.controllers.len() != 1 {
                    push(
                        &mut out,
                        "CONTROL_FOREST",
                        format!("{} {} appears in {} control sets, expected exactly one", e.tier, e.id, e.controllers.len()),
                        &[&e.id],
                    );
                }
                for c in &e.controllers {
                    if tier_of.get(c.as_str()) != Some(&up) {
                        push(&mut out, "CONTROL_FOREST", format!("{} {} is controlled by {c}, which is not a {up}", e.tier, e.id), &[&e.id, c]);
                    }
                }
            }
        }
        if e.tier == Tier::Substation && grid.substation_index(&e.id).is_none() {
            push(&mut out, "UNKNOWN_SUBSTATION", format!("substation entity {} is not a grid substation", e.id), &[&e.id]);
        }
    }

    // Membership matrix Q.
    let enclave_tier: HashMap<&str, Tier> = comm.enclaves.iter().map(|e| (e.id.as_str(), e.tier)).collect();
    for enc in &comm.enclaves {
        match enc.members.len() {
            0 => push(&mut out, "ORPHAN_ENCLAVE", format!("enclave {} belongs to no entity", enc.id), &[&enc.id]),
            1 => {}
            n => push(&mut out, "SHARED_ENCLAVE", format!("enclave {} belongs to {n} entities", enc.id), &[&enc.id]),
        }
        for m in &enc.members {
            match tier_of.get(m.as_str()) {
                None => push(&mut out, "DANGLING_REFERENCE", format!("enclave {} cites unknown entity {m}", enc.id), &[&enc.id, m]),
                Some(t) if *t != enc.tier => {
                    push(&mut out, "TIER_MISMATCH", format!("{} enclave {} belongs to {t} {m}", enc.tier, enc.id), &[&enc.id, m])
                }
                _ => {}
            }
        }
        if let Some(p) = &enc.parent {
            if enclave_tier.get(p.as_str()).copied() != enc.tier.above() || enc.tier.above().is_none() {
                push(&mut out, "TIER_MISMATCH", format!("enclave {} has parent {p} outside the tier above", enc.id), &[&enc.id, p]);
            }
        }
    }

    // Relays.
    for r in &comm.relays {
        match r.owners.len() {
            0 => push(&mut out, "UNOWNED_RELAY", format!("relay {} belongs to no substation", r.id), &[&r.id]),
            1 => {}
            _ => push(&mut out, "DUPLICATE_RELAY_OWNER", format!("relay {} is owned by {}", r.id, r.owners.join(", ")), &[&r.id]),
        }
        for o in &r.owners {
            if tier_of.get(o.as_str()) != Some(&Tier::Substation) {
                push(&mut out, "DANGLING_REFERENCE", format!("relay {} cites unknown substation {o}", r.id), &[&r.id, o]);
            }
        }
        if r.components.is_empty() {
            push(&mut out, "IDLE_RELAY", format!("relay {} controls no grid component", r.id), &[&r.id]);
        }
        for c in &r.components {
            match grid.component_index(c) {
                None => push(&mut out, "DANGLING_REFERENCE", format!("relay {} cites unknown component {c}", r.id), &[&r.id, c]),
                Some(idx) => {
                    let hosts = grid.component_hosts(idx);
                    if r.owners.len() == 1 && !hosts.contains(&r.owners[0].as_str()) {
                        push(
                            &mut out,
                            "RELAY_LOCALITY",
                            format!("relay {} at {} controls {c}, which is not at that substation", r.id, r.owners[0]),
                            &[&r.id, c],
                        );
                    }
                }
            }
        }
        if let Some(e) = &r.enclave {
            if enclave_tier.get(e.as_str()) != Some(&Tier::Substation) {
                push(&mut out, "DANGLING_REFERENCE", format!("relay {} cites unknown substation enclave {e}", r.id), &[&r.id, e]);
            }
        }
    }
    ValidationReport::from_violations(out)
}

/// Index-based view of a validated instance used by the solvers.
#[derive(Debug, Clone)]
pub struct Instance {
    pub grid: GridCase,
    pub comm: CommNetwork,
    /// Entity indices (into `comm.entities`) per tier, sorted by identifier.
    pub(crate) tier_entities: [Vec<usize>; 3],
    /// Controlling entity of each entity.
    pub(crate) controller: Vec<Option<usize>>,
    /// Existing enclave indices (into `comm.enclaves`) owned by each entity.
    pub(crate) entity_enclaves: Vec<Vec<usize>>,
    pub(crate) enclave_entity: Vec<usize>,
    /// Relay indices owned by each entity (empty above the substation tier).
    pub(crate) entity_relays: Vec<Vec<usize>>,
    pub(crate) relay_owner: Vec<usize>,
    /// Component indices controlled by each relay.
    pub(crate) relay_components: Vec<Vec<usize>>,
}

impl Instance {
    /// Validates and indexes an instance.
    pub fn new(grid: GridCase, comm: CommNetwork) -> Result<Self, ValidationReport> {
        let report = validate_instance(&grid, &comm);
        if !report.ok {
            return Err(report);
        }
        let grid = GridCase::new(grid.base_mva, grid.substations, grid.lines, grid.generators, grid.loads);
        let comm = CommNetwork::new(comm.entities, comm.enclaves, comm.relays);
        let pos: BTreeMap<&str, usize> = comm.entities.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
        let mut tier_entities: [Vec<usize>; 3] = Default::default();
        for (i, e) in comm.entities.iter().enumerate() {
            tier_entities[e.tier as usize].push(i);
        }
        let controller = comm.entities.iter().map(|e| e.controllers.first().map(|c| pos[c.as_str()])).collect();
        let mut entity_enclaves = vec![Vec::new(); comm.entities.len()];
        let mut enclave_entity = Vec::with_capacity(comm.enclaves.len());
        for (k, enc) in comm.enclaves.iter().enumerate() {
            let owner = pos[enc.members[0].as_str()];
            entity_enclaves[owner].push(k);
            enclave_entity.push(owner);
        }
        let mut entity_relays = vec![Vec::new(); comm.entities.len()];
        let mut relay_owner = Vec::with_capacity(comm.relays.len());
        let mut relay_components = Vec::with_capacity(comm.relays.len());
        for (r, relay) in comm.relays.iter().enumerate() {
            let owner = pos[relay.owners[0].as_str()];
            entity_relays[owner].push(r);
            relay_owner.push(owner);
            let mut comps: Vec<usize> = relay.components.iter().map(|c| grid.component_index(c).unwrap()).collect();
            comps.sort_unstable();
            comps.dedup();
            relay_components.push(comps);
        }
        Ok(Instance {
            grid,
            comm,
            tier_entities,
            controller,
            entity_enclaves,
            enclave_entity,
            entity_relays,
            relay_owner,
            relay_components,
        })
    }

    pub fn total_demand(&self) -> f64 {
        total_demand(&self.grid)
    }

    pub fn entity_id(&self, i: usize) -> &str {
        &self.comm.entities[i].id
    }

    pub(crate) fn entity_index(&self, id: &str) -> Option<usize> {
        self.comm.entities.iter().position(|e| e.id == id)
    }
}
