//! The grid operator's load-shed minimization for a fixed attack, its duals,
//! and the checks that tie the dual back to the primal.
//!
//! LPs are built in per-unit on the case base so that susceptances and big-M
//! constants stay well scaled. Everything returned to callers is in MW (and
//! radians for angles).

use std::f64::consts::PI;

use dashmap::DashMap;

use crate::error::{Error, Result};
use crate::lp::{solve_lp, Direction, LinearProgram, LpSolution, Sense, Status};
use crate::model::GridCase;

/// Largest number of grid components an [`OutageMask`] can describe.
pub const MAX_COMPONENTS: usize = 256;

/// Set of de-energized components in the combined line, generator, load
/// numbering of [`GridCase::component_index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OutageMask(pub [u64; 4]);

impl OutageMask {
    pub fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn union(&self, other: &OutageMask) -> OutageMask {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(other.0) {
            *a |= b;
        }
        out
    }

    pub fn is_subset(&self, other: &OutageMask) -> bool {
        self.0.iter().zip(other.0).all(|(a, b)| a & !b == 0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// An attacker decision and its effect on the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attack {
    /// Attacked enclave identifiers, sorted.
    pub enclaves: Vec<String>,
    /// Relays controlled by attacked substation enclaves, sorted.
    pub compromised_relays: Vec<String>,
    /// Operational state per line, generator and load (grid order).
    pub line_up: Vec<bool>,
    pub gen_up: Vec<bool>,
    pub load_up: Vec<bool>,
}

impl Attack {
    /// Everything operational.
    pub fn none(grid: &GridCase) -> Self {
        Attack {
            enclaves: Vec::new(),
            compromised_relays: Vec::new(),
            line_up: vec![true; grid.lines.len()],
            gen_up: vec![true; grid.generators.len()],
            load_up: vec![true; grid.loads.len()],
        }
    }

    pub fn from_mask(grid: &GridCase, mask: &OutageMask) -> Self {
        let (k, g) = (grid.lines.len(), grid.generators.len());
        let mut a = Attack::none(grid);
        for i in 0..grid.component_count() {
            if mask.contains(i) {
                if i < k {
                    a.line_up[i] = false;
                } else if i < k + g {
                    a.gen_up[i - k] = false;
                } else {
                    a.load_up[i - k - g] = false;
                }
            }
        }
        a
    }

    /// Attack that de-energizes the named components directly.
    pub fn from_outages(grid: &GridCase, ids: &[&str]) -> Result<Self> {
        Ok(Attack::from_mask(grid, &outage_mask(grid, ids)?))
    }

    pub fn mask(&self) -> OutageMask {
        let mut m = OutageMask::default();
        let flags = self.line_up.iter().chain(&self.gen_up).chain(&self.load_up);
        for (i, up) in flags.enumerate() {
            if !up {
                m.insert(i);
            }
        }
        m
    }

    /// Identifiers of de-energized components in grid order.
    pub fn outage_ids(&self, grid: &GridCase) -> Vec<String> {
        let m = self.mask();
        (0..grid.component_count()).filter(|&i| m.contains(i)).map(|i| grid.component_id(i).to_string()).collect()
    }

    fn check_shape(&self, grid: &GridCase) -> Result<()> {
        if self.line_up.len() != grid.lines.len()
            || self.gen_up.len() != grid.generators.len()
            || self.load_up.len() != grid.loads.len()
        {
            return Err(Error::Contract("attack vectors do not match the grid".into()));
        }
        Ok(())
    }
}

pub fn outage_mask(grid: &GridCase, ids: &[&str]) -> Result<OutageMask> {
    if grid.component_count() > MAX_COMPONENTS {
        return Err(Error::UnsupportedField(format!("grids with more than {MAX_COMPONENTS} components")));
    }
    let mut m = OutageMask::default();
    for id in ids {
        let i = grid
            .component_index(id)
            .ok_or_else(|| Error::DanglingReference(format!("unknown grid component {id}")))?;
        m.insert(i);
    }
    Ok(m)
}

/// Operator primal solution in MW and radians.
#[derive(Debug, Clone, PartialEq)]
pub struct Dispatch {
    pub angle: Vec<f64>,
    pub flow: Vec<f64>,
    pub generation: Vec<f64>,
    pub shed: Vec<f64>,
    pub total_shed: f64,
}

/// Operator duals in MW form.
///
/// `ohm_le`/`ohm_ge` price the upper and lower big-M Ohm's-law rows,
/// `flow_lo`/`flow_hi` the flow bounds, `gen_cap` the generation cap,
/// `shed_lo`/`shed_hi` the forced-shed and demand bounds on shed, and
/// `angle_lo`/`angle_hi` the angle bounds. All but `balance` are nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub balance: Vec<f64>,
    pub ohm_le: Vec<f64>,
    pub ohm_ge: Vec<f64>,
    pub flow_lo: Vec<f64>,
    pub flow_hi: Vec<f64>,
    pub gen_cap: Vec<f64>,
    pub shed_lo: Vec<f64>,
    pub shed_hi: Vec<f64>,
    pub angle_lo: Vec<f64>,
    pub angle_hi: Vec<f64>,
}

/// Index lookups shared by every builder.
pub(crate) struct Topology {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
    pub gen_bus: Vec<usize>,
    pub load_bus: Vec<usize>,
}

impl Topology {
    pub fn new(grid: &GridCase) -> Result<Self> {
        let bus = |id: &str| {
            grid.substation_index(id).ok_or_else(|| Error::DanglingReference(format!("unknown substation {id}")))
        };
        Ok(Topology {
            from: grid.lines.iter().map(|l| bus(&l.from)).collect::<Result<_>>()?,
            to: grid.lines.iter().map(|l| bus(&l.to)).collect::<Result<_>>()?,
            gen_bus: grid.generators.iter().map(|g| bus(&g.bus)).collect::<Result<_>>()?,
            load_bus: grid.loads.iter().map(|d| bus(&d.bus)).collect::<Result<_>>()?,
        })
    }
}

/// Big-M constant of a line's Ohm's-law rows in per-unit.
pub(crate) fn big_m(susceptance: f64, shift: f64) -> f64 {
    susceptance * (2.0 * PI + shift)
}

// Column layout of the operator LP.
struct Columns {
    angle: usize,
    flow: usize,
    gen: usize,
    shed: usize,
}

fn columns(grid: &GridCase) -> Columns {
    let (n, k, g) = (grid.substations.len(), grid.lines.len(), grid.generators.len());
    Columns { angle: 0, flow: n, gen: n + k, shed: n + k + g }
}

/// Builds the operator LP for `attack` in per-unit: minimize total shed
/// (objective times base MVA gives MW) subject to nodal balance, big-M Ohm's
/// law, flow, generation, shed and angle bounds.
///
/// Rows are `balance` per substation then the upper and lower Ohm row per
/// line. Columns are angles, flows, generation, shed.
pub fn build_operator_lp(grid: &GridCase, attack: &Attack) -> Result<LinearProgram> {
    attack.check_shape(grid)?;
    let topo = Topology::new(grid)?;
    let base = grid.base_mva;
    let col = columns(grid);
    let mut lp = LinearProgram::new(Direction::Minimize);
    for s in &grid.substations {
        lp.add_var(format!("angle[{s}]"), -PI, PI, 0.0);
    }
    for (k, l) in grid.lines.iter().enumerate() {
        let cap = if attack.line_up[k] { l.rating / base } else { 0.0 };
        lp.add_var(format!("flow[{}]", l.id), -cap, cap, 0.0);
    }
    for (g, gen) in grid.generators.iter().enumerate() {
        let cap = if attack.gen_up[g] { gen.pmax / base } else { 0.0 };
        lp.add_var(format!("gen[{}]", gen.id), 0.0, cap, 0.0);
    }
    for (d, load) in grid.loads.iter().enumerate() {
        let dem = load.demand / base;
        let lo = if attack.load_up[d] { 0.0 } else { dem };
        lp.add_var(format!("shed[{}]", load.id), lo, dem, 1.0);
    }
    let mut balance: Vec<Vec<(usize, f64)>> = vec![Vec::new(); grid.substations.len()];
    let mut demand = vec![0.0; grid.substations.len()];
    for k in 0..grid.lines.len() {
        balance[topo.to[k]].push((col.flow + k, 1.0));
        balance[topo.from[k]].push((col.flow + k, -1.0));
    }
    for g in 0..grid.generators.len() {
        balance[topo.gen_bus[g]].push((col.gen + g, 1.0));
    }
    for (d, load) in grid.loads.iter().enumerate() {
        balance[topo.load_bus[d]].push((col.shed + d, 1.0));
        demand[topo.load_bus[d]] += load.demand / base;
    }
    for (s, terms) in balance.into_iter().enumerate() {
        lp.add_row(format!("balance[{}]", grid.substations[s]), terms, Sense::Eq, demand[s]);
    }
    for (k, l) in grid.lines.iter().enumerate() {
        let b = l.susceptance;
        let slack = if attack.line_up[k] { 0.0 } else { big_m(b, l.shift) };
        let terms = vec![(col.flow + k, 1.0), (col.angle + topo.from[k], -b), (col.angle + topo.to[k], b)];
        lp.add_row(format!("ohm_le[{}]", l.id), terms.clone(), Sense::Le, -b * l.shift + slack);
        lp.add_row(format!("ohm_ge[{}]", l.id), terms, Sense::Ge, -b * l.shift - slack);
    }
    Ok(lp)
}

fn dispatch_from(grid: &GridCase, x: &[f64]) -> Dispatch {
    let col = columns(grid);
    let base = grid.base_mva;
    let (n, k, g, d) = (grid.substations.len(), grid.lines.len(), grid.generators.len(), grid.loads.len());
    let shed: Vec<f64> = x[col.shed..col.shed + d].iter().map(|v| v * base).collect();
    Dispatch {
        angle: x[col.angle..col.angle + n].to_vec(),
        flow: x[col.flow..col.flow + k].iter().map(|v| v * base).collect(),
        generation: x[col.gen..col.gen + g].iter().map(|v| v * base).collect(),
        total_shed: shed.iter().sum(),
        shed,
    }
}

fn require_optimal(sol: &LpSolution, what: &str) -> Result<()> {
    match sol.status {
        Status::Optimal => Ok(()),
        s => Err(Error::Contract(format!("{what} returned {s:?}; shedding all load is always feasible"))),
    }
}

/// Solves the operator problem and returns the dispatch and duals.
pub fn solve_operator(grid: &GridCase, attack: &Attack) -> Result<(Dispatch, DualSolution)> {
    let lp = build_operator_lp(grid, attack)?;
    let sol = solve_lp(&lp)?;
    require_optimal(&sol, "operator LP")?;
    let dispatch = dispatch_from(grid, &sol.x);
    let col = columns(grid);
    let (n, k, g, d) = (grid.substations.len(), grid.lines.len(), grid.generators.len(), grid.loads.len());
    let pos = |v: f64| v.max(0.0);
    let rc = &sol.reduced_costs;
    let base = grid.base_mva;
    let dual = DualSolution {
        balance: sol.duals[..n].to_vec(),
        ohm_le: (0..k).map(|i| pos(-sol.duals[n + 2 * i])).collect(),
        ohm_ge: (0..k).map(|i| pos(sol.duals[n + 2 * i + 1])).collect(),
        flow_lo: (0..k).map(|i| pos(rc[col.flow + i])).collect(),
        flow_hi: (0..k).map(|i| pos(-rc[col.flow + i])).collect(),
        gen_cap: (0..g).map(|i| pos(-rc[col.gen + i])).collect(),
        shed_lo: (0..d).map(|i| pos(rc[col.shed + i])).collect(),
        shed_hi: (0..d).map(|i| pos(-rc[col.shed + i])).collect(),
        angle_lo: (0..n).map(|i| base * pos(rc[col.angle + i])).collect(),
        angle_hi: (0..n).map(|i| base * pos(-rc[col.angle + i])).collect(),
    };
    Ok((dispatch, dual))
}

/// Total shed in MW only.
pub fn operator_shed(grid: &GridCase, attack: &Attack) -> Result<f64> {
    let lp = build_operator_lp(grid, attack)?;
    let sol = solve_lp(&lp)?;
    require_optimal(&sol, "operator LP")?;
    Ok(sol.objective * grid.base_mva)
}

/// Memo of total shed (MW) per outage mask, shared across threads.
#[derive(Debug, Default)]
pub struct ShedCache {
    map: DashMap<OutageMask, f64>,
}

impl ShedCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn shed(&self, grid: &GridCase, mask: &OutageMask) -> Result<f64> {
        if let Some(v) = self.map.get(mask) {
            return Ok(*v);
        }
        let v = operator_shed(grid, &Attack::from_mask(grid, mask))?;
        self.map.insert(*mask, v);
        Ok(v)
    }

    pub fn get(&self, mask: &OutageMask) -> Option<f64> {
        self.map.get(mask).map(|v| *v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

fn on(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// The dual objective in MW for the attack's component states.
pub fn dual_objective(grid: &GridCase, attack: &Attack, dual: &DualSolution) -> Result<f64> {
    attack.check_shape(grid)?;
    let topo = Topology::new(grid)?;
    let base = grid.base_mva;
    let mut bus_demand = vec![0.0; grid.substations.len()];
    for (d, load) in grid.loads.iter().enumerate() {
        bus_demand[topo.load_bus[d]] += load.demand;
    }
    let mut obj = 0.0;
    for s in 0..grid.substations.len() {
        obj += dual.balance[s] * bus_demand[s] - PI * (dual.angle_lo[s] + dual.angle_hi[s]);
    }
    for (d, load) in grid.loads.iter().enumerate() {
        obj += load.demand * (dual.shed_lo[d] * (1.0 - on(attack.load_up[d])) - dual.shed_hi[d]);
    }
    for (k, l) in grid.lines.iter().enumerate() {
        let b = l.susceptance * base;
        let v = on(attack.line_up[k]);
        obj += b * l.shift * (dual.ohm_le[k] - dual.ohm_ge[k])
            - big_m(b, l.shift) * (1.0 - v) * (dual.ohm_ge[k] + dual.ohm_le[k])
            - l.rating * v * (dual.flow_lo[k] + dual.flow_hi[k]);
    }
    for (g, gen) in grid.generators.iter().enumerate() {
        obj -= gen.pmax * on(attack.gen_up[g]) * dual.gen_cap[g];
    }
    Ok(obj)
}

/// |dual objective - primal total shed| in MW.
pub fn check_strong_duality(grid: &GridCase, attack: &Attack, primal: &Dispatch, dual: &DualSolution) -> Result<f64> {
    Ok((dual_objective(grid, attack, dual)? - primal.total_shed).abs())
}

/// Largest violation of the dual feasibility rows for flows, generation,
/// shed and angles, plus any negative multiplier.
pub fn dual_row_residual(grid: &GridCase, dual: &DualSolution) -> Result<f64> {
    let topo = Topology::new(grid)?;
    let base = grid.base_mva;
    let mut worst: f64 = 0.0;
    for k in 0..grid.lines.len() {
        let r = dual.balance[topo.to[k]] - dual.balance[topo.from[k]] + dual.ohm_ge[k] - dual.ohm_le[k] + dual.flow_lo[k]
            - dual.flow_hi[k];
        worst = worst.max(r.abs());
    }
    for g in 0..grid.generators.len() {
        worst = worst.max(dual.balance[topo.gen_bus[g]] - dual.gen_cap[g]);
    }
    for d in 0..grid.loads.len() {
        let r = dual.balance[topo.load_bus[d]] + dual.shed_lo[d] - dual.shed_hi[d] - 1.0;
        worst = worst.max(r.abs());
    }
    let mut angle: Vec<f64> = (0..grid.substations.len()).map(|s| dual.angle_lo[s] - dual.angle_hi[s]).collect();
    for (k, l) in grid.lines.iter().enumerate() {
        let b = l.susceptance * base;
        angle[topo.from[k]] += b * (dual.ohm_le[k] - dual.ohm_ge[k]);
        angle[topo.to[k]] += b * (dual.ohm_ge[k] - dual.ohm_le[k]);
    }
    for (s, r) in angle.iter().enumerate() {
        // Angle duals carry the MW/rad scale of the susceptances.
        let scale = 1.0 + dual.angle_lo[s].abs() + dual.angle_hi[s].abs();
        worst = worst.max(r.abs() / scale);
    }
    let nonneg = [
        &dual.ohm_le,
        &dual.ohm_ge,
        &dual.flow_lo,
        &dual.flow_hi,
        &dual.gen_cap,
        &dual.shed_lo,
        &dual.shed_hi,
        &dual.angle_lo,
        &dual.angle_hi,
    ];
    for v in nonneg.iter().flat_map(|v| v.iter()) {
        worst = worst.max(-v);
    }
    Ok(worst)
}

/// A dual value above the capacity bound assumed by the attacker MILP.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCapViolation {
    pub family: &'static str,
    pub component: String,
    pub value: f64,
    pub cap: f64,
}

/// Capacity bounds assumed for the duals that multiply attack states, in
/// grid order: shed duals by load demand, generation duals by total demand,
/// Ohm and flow duals by line rating (each pair's sum by twice the rating).
pub fn dual_caps(grid: &GridCase) -> DualCaps {
    let total: f64 = grid.loads.iter().map(|d| d.demand).sum();
    DualCaps {
        shed_lo: grid.loads.iter().map(|d| d.demand).collect(),
        gen_cap: vec![total; grid.generators.len()],
        line: grid.lines.iter().map(|l| l.rating).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualCaps {
    pub shed_lo: Vec<f64>,
    pub gen_cap: Vec<f64>,
    pub line: Vec<f64>,
}

/// Lists every dual above its assumed capacity bound.
pub fn audit_dual_caps(grid: &GridCase, dual: &DualSolution) -> Vec<DualCapViolation> {
    let caps = dual_caps(grid);
    let tol = 1e-7;
    let mut out = Vec::new();
    let mut check = |family, component: &str, value: f64, cap: f64| {
        if value > cap + tol * (1.0 + cap) {
            out.push(DualCapViolation { family, component: component.to_string(), value, cap });
        }
    };
    for (d, load) in grid.loads.iter().enumerate() {
        check("shed", &load.id, dual.shed_lo[d], caps.shed_lo[d]);
    }
    for (g, gen) in grid.generators.iter().enumerate() {
        check("generation", &gen.id, dual.gen_cap[g], caps.gen_cap[g]);
    }
    for (k, l) in grid.lines.iter().enumerate() {
        check("ohm", &l.id, dual.ohm_le[k] + dual.ohm_ge[k], 2.0 * caps.line[k]);
        check("flow", &l.id, dual.flow_lo[k] + dual.flow_hi[k], 2.0 * caps.line[k]);
    }
    out
}

/// Independent formulation: removes attacked lines and generators, fixes
/// attacked loads at full shed, and writes Ohm's law as equalities on the
/// surviving lines only.
pub fn solve_operator_reduced(grid: &GridCase, attack: &Attack) -> Result<Dispatch> {
    attack.check_shape(grid)?;
    let topo = Topology::new(grid)?;
    let base = grid.base_mva;
    let n = grid.substations.len();
    let lines: Vec<usize> = (0..grid.lines.len()).filter(|&k| attack.line_up[k]).collect();
    let gens: Vec<usize> = (0..grid.generators.len()).filter(|&g| attack.gen_up[g]).collect();
    let mut lp = LinearProgram::new(Direction::Minimize);
    let angle: Vec<usize> = (0..n).map(|s| lp.add_var(format!("t{s}"), -PI, PI, 0.0)).collect();
    let flow: Vec<usize> = lines
        .iter()
        .map(|&k| {
            let cap = grid.lines[k].rating / base;
            lp.add_var(format!("f{k}"), -cap, cap, 0.0)
        })
        .collect();
    let gen: Vec<usize> =
        gens.iter().map(|&g| lp.add_var(format!("p{g}"), 0.0, grid.generators[g].pmax / base, 0.0)).collect();
    // Online loads get a shed variable; offline ones are fully shed constants.
    let mut net_demand = vec![0.0; n];
    let mut forced = 0.0;
    let mut shed_cols = Vec::new();
    for (d, load) in grid.loads.iter().enumerate() {
        let s = topo.load_bus[d];
        if attack.load_up[d] {
            net_demand[s] += load.demand / base;
            shed_cols.push((d, lp.add_var(format!("l{d}"), 0.0, load.demand / base, 1.0)));
        } else {
            forced += load.demand;
        }
    }
    for s in 0..n {
        let mut terms = Vec::new();
        for (i, &k) in lines.iter().enumerate() {
            if topo.to[k] == s {
                terms.push((flow[i], 1.0));
            }
            if topo.from[k] == s {
                terms.push((flow[i], -1.0));
            }
        }
        for (i, &g) in gens.iter().enumerate() {
            if topo.gen_bus[g] == s {
                terms.push((gen[i], 1.0));
            }
        }
        for &(d, c) in &shed_cols {
            if topo.load_bus[d] == s {
                terms.push((c, 1.0));
            }
        }
        lp.add_row(format!("b{s}"), terms, Sense::Eq, net_demand[s]);
    }
    for (i, &k) in lines.iter().enumerate() {
        let l = &grid.lines[k];
        let b = l.susceptance;
        lp.add_row(
            format!("o{k}"),
            vec![(flow[i], 1.0), (angle[topo.from[k]], -b), (angle[topo.to[k]], b)],
            Sense::Eq,
            -b * l.shift,
        );
    }
    let sol = solve_lp(&lp)?;
    require_optimal(&sol, "reduced operator LP")?;
    let mut out = Dispatch {
        angle: angle.iter().map(|&c| sol.x[c]).collect(),
        flow: vec![0.0; grid.lines.len()],
        generation: vec![0.0; grid.generators.len()],
        shed: vec![0.0; grid.loads.len()],
        total_shed: 0.0,
    };
    for (i, &k) in lines.iter().enumerate() {
        out.flow[k] = sol.x[flow[i]] * base;
    }
    for (i, &g) in gens.iter().enumerate() {
        out.generation[g] = sol.x[gen[i]] * base;
    }
    for (d, load) in grid.loads.iter().enumerate() {
        out.shed[d] = if attack.load_up[d] { 0.0 } else { load.demand };
    }
    for &(d, c) in &shed_cols {
        out.shed[d] = sol.x[c] * base;
    }
    out.total_shed = sol.objective * base + forced;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Generator, Line, Load};

    fn two_bus(rating: f64) -> GridCase {
        GridCase::new(
            100.0,
            vec!["A".into(), "B".into()],
            vec![Line { id: "L".into(), from: "A".into(), to: "B".into(), susceptance: 10.0, shift: 0.0, rating }],
            vec![Generator { id: "G".into(), bus: "A".into(), pmax: 80.0 }],
            vec![Load { id: "D".into(), bus: "B".into(), demand: 50.0 }],
        )
    }

    #[test]
    fn rating_limits_delivery() {
        let g = two_bus(30.0);
        let (disp, dual) = solve_operator(&g, &Attack::none(&g)).unwrap();
        assert!((disp.total_shed - 20.0).abs() < 1e-9);
        assert!((disp.flow[0] - 30.0).abs() < 1e-9);
        assert!(check_strong_duality(&g, &Attack::none(&g), &disp, &dual).unwrap() < 1e-9);
        assert!(dual_row_residual(&g, &dual).unwrap() < 1e-9);
    }

    #[test]
    fn forced_shed_and_open_line() {
        let g = two_bus(300.0);
        let none = Attack::none(&g);
        assert!(operator_shed(&g, &none).unwrap().abs() < 1e-9);
        let cut = Attack::from_outages(&g, &["L"]).unwrap();
        let (disp, dual) = solve_operator(&g, &cut).unwrap();
        assert!((disp.total_shed - 50.0).abs() < 1e-9);
        assert_eq!(disp.flow[0], 0.0);
        assert!(check_strong_duality(&g, &cut, &disp, &dual).unwrap() < 1e-9);
        let off = Attack::from_outages(&g, &["D"]).unwrap();
        assert!((solve_operator_reduced(&g, &off).unwrap().total_shed - 50.0).abs() < 1e-9);
    }

    #[test]
    fn perturbed_dual_breaks_duality() {
        let g = two_bus(30.0);
        let a = Attack::none(&g);
        let (disp, mut dual) = solve_operator(&g, &a).unwrap();
        dual.gen_cap[0] += 1.0;
        assert!(check_strong_duality(&g, &a, &disp, &dual).unwrap() > 1.0);
    }

    #[test]
    fn mask_round_trip() {
        let g = two_bus(30.0);
        let a = Attack::from_outages(&g, &["G", "D"]).unwrap();
        assert_eq!(a.outage_ids(&g), vec!["G", "D"]);
        assert_eq!(Attack::from_mask(&g, &a.mask()), a);
    }
}
