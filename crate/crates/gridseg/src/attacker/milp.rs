use std::f64::consts::PI;

use super::forest::SegmentedForest;
use crate::dcopf::{big_m, dual_caps, operator_shed, Attack, Topology};
use crate::error::{Error, Result};
use crate::lp::{solve_milp, Direction, LinearProgram, MixedBinaryProgram, Sense, Status};
use crate::model::Instance;

/// Largest amount (MW) the MILP's claimed load shed may exceed the primal
/// re-solve before the dual caps are declared violated.
pub const DUAL_BOUND_TOL: f64 = 1e-4;

/// Column positions of an attacker MILP that callers need to read back.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackerColumns {
    /// One binary per forest node, in forest order.
    pub enclave: Vec<usize>,
    /// Compromise indicator per relay, in communication-network order.
    pub relay: Vec<usize>,
    pub line_up: Vec<usize>,
    pub gen_up: Vec<usize>,
    pub load_up: Vec<usize>,
    /// Total load shed in per-unit; multiply by base MVA for MW.
    pub load_shed: usize,
}

/// Single-level attacker MILP: choose an ancestor-closed enclave set within
/// budget, maximizing the operator's dual objective. Duals are in per-unit
/// form and the objective is per-unit load shed.
///
/// Products of duals with component states are replaced by McCormick rows
/// using the capacity caps of [`dual_caps`]; only the enclave variables are
/// declared binary, the rest follow from the linking rows.
pub fn build_attacker_milp(
    inst: &Instance,
    forest: &SegmentedForest,
    budget: usize,
) -> Result<(MixedBinaryProgram, AttackerColumns)> {
    let grid = &inst.grid;
    let topo = Topology::new(grid)?;
    let base = grid.base_mva;
    let caps = dual_caps(grid);
    let total = caps.gen_cap.first().copied().unwrap_or(0.0);
    let (n, k, g, d) = (grid.substations.len(), grid.lines.len(), grid.generators.len(), grid.loads.len());
    let mut lp = LinearProgram::new(Direction::Maximize);

    // Attacker side.
    let z: Vec<usize> = forest.nodes.iter().map(|e| lp.add_var(format!("z[{}]", e.id), 0.0, 1.0, 0.0)).collect();
    lp.add_row("budget", z.iter().map(|&c| (c, 1.0)).collect(), Sense::Le, budget as f64);
    for (i, e) in forest.nodes.iter().enumerate() {
        if let Some(p) = e.parent {
            lp.add_row(format!("pivot[{}]", e.id), vec![(z[i], 1.0), (z[p], -1.0)], Sense::Le, 0.0);
        }
    }
    let relays = &inst.comm.relays;
    let delta: Vec<usize> = relays.iter().map(|r| lp.add_var(format!("delta[{}]", r.id), 0.0, 1.0, 0.0)).collect();
    for (r, relay) in relays.iter().enumerate() {
        let e = forest
            .nodes
            .iter()
            .position(|e| e.relays.binary_search(&relay.id).is_ok())
            .ok_or_else(|| Error::Contract(format!("relay {} missing from the forest", relay.id)))?;
        lp.add_row(format!("relay[{}]", relay.id), vec![(delta[r], 1.0), (z[e], -1.0)], Sense::Eq, 0.0);
    }
    // Relays per component in combined numbering.
    let mut hosted: Vec<Vec<usize>> = vec![Vec::new(); grid.component_count()];
    for (r, comps) in inst.relay_components.iter().enumerate() {
        for &c in comps {
            hosted[c].push(r);
        }
    }
    let mut state = Vec::with_capacity(grid.component_count());
    for c in 0..grid.component_count() {
        let s = lp.add_var(format!("up[{}]", grid.component_id(c)), 0.0, 1.0, 0.0);
        for &r in &hosted[c] {
            lp.add_row(format!("trip[{},{}]", grid.component_id(c), relays[r].id), vec![(s, 1.0), (delta[r], 1.0)], Sense::Le, 1.0);
        }
        let mut terms = vec![(s, 1.0)];
        terms.extend(hosted[c].iter().map(|&r| (delta[r], 1.0)));
        lp.add_row(format!("intact[{}]", grid.component_id(c)), terms, Sense::Ge, 1.0);
        state.push(s);
    }
    let (line_up, rest) = state.split_at(k);
    let (gen_up, load_up) = rest.split_at(g);

    // Operator duals.
    let mu: Vec<usize> =
        grid.substations.iter().map(|s| lp.add_var(format!("mu[{s}]"), f64::NEG_INFINITY, f64::INFINITY, 0.0)).collect();
    let mut xi_le = Vec::with_capacity(k);
    let mut xi_ge = Vec::with_capacity(k);
    let mut lam_lo = Vec::with_capacity(k);
    let mut lam_hi = Vec::with_capacity(k);
    for (i, l) in grid.lines.iter().enumerate() {
        let cap = caps.line[i];
        xi_le.push(lp.add_var(format!("xi_le[{}]", l.id), 0.0, cap, 0.0));
        xi_ge.push(lp.add_var(format!("xi_ge[{}]", l.id), 0.0, cap, 0.0));
        lam_lo.push(lp.add_var(format!("lam_lo[{}]", l.id), 0.0, cap, 0.0));
        lam_hi.push(lp.add_var(format!("lam_hi[{}]", l.id), 0.0, cap, 0.0));
    }
    let gamma: Vec<usize> =
        grid.generators.iter().map(|x| lp.add_var(format!("gamma[{}]", x.id), 0.0, total, 0.0)).collect();
    let alpha_lo: Vec<usize> = grid
        .loads
        .iter()
        .enumerate()
        .map(|(i, x)| lp.add_var(format!("alpha_lo[{}]", x.id), 0.0, caps.shed_lo[i], 0.0))
        .collect();
    let alpha_hi: Vec<usize> =
        grid.loads.iter().map(|x| lp.add_var(format!("alpha_hi[{}]", x.id), 0.0, f64::INFINITY, 0.0)).collect();
    let beta_lo: Vec<usize> =
        grid.substations.iter().map(|s| lp.add_var(format!("angle_lo[{s}]"), 0.0, f64::INFINITY, 0.0)).collect();
    let beta_hi: Vec<usize> =
        grid.substations.iter().map(|s| lp.add_var(format!("angle_hi[{s}]"), 0.0, f64::INFINITY, 0.0)).collect();

    // Dual feasibility rows.
    for (i, l) in grid.lines.iter().enumerate() {
        lp.add_row(
            format!("dual_flow[{}]", l.id),
            vec![
                (mu[topo.to[i]], 1.0),
                (mu[topo.from[i]], -1.0),
                (xi_ge[i], 1.0),
                (xi_le[i], -1.0),
                (lam_lo[i], 1.0),
                (lam_hi[i], -1.0),
            ],
            Sense::Eq,
            0.0,
        );
    }
    for (i, x) in grid.generators.iter().enumerate() {
        lp.add_row(format!("dual_gen[{}]", x.id), vec![(mu[topo.gen_bus[i]], 1.0), (gamma[i], -1.0)], Sense::Le, 0.0);
    }
    for (i, x) in grid.loads.iter().enumerate() {
        lp.add_row(
            format!("dual_shed[{}]", x.id),
            vec![(mu[topo.load_bus[i]], 1.0), (alpha_lo[i], 1.0), (alpha_hi[i], -1.0)],
            Sense::Eq,
            1.0,
        );
    }
    let mut angle_rows: Vec<Vec<(usize, f64)>> = (0..n).map(|s| vec![(beta_lo[s], 1.0), (beta_hi[s], -1.0)]).collect();
    for (i, l) in grid.lines.iter().enumerate() {
        let b = l.susceptance;
        angle_rows[topo.from[i]].extend([(xi_le[i], b), (xi_ge[i], -b)]);
        angle_rows[topo.to[i]].extend([(xi_ge[i], b), (xi_le[i], -b)]);
    }
    for (s, terms) in angle_rows.into_iter().enumerate() {
        lp.add_row(format!("dual_angle[{}]", grid.substations[s]), terms, Sense::Eq, 0.0);
    }

    // Dual-times-state products: aux = (sum of duals) * state with cap.
    let product = |lp: &mut LinearProgram, name: String, duals: &[usize], s: usize, cap: f64| -> usize {
        let a = lp.add_var(name.clone(), 0.0, cap, 0.0);
        let mut le = vec![(a, 1.0)];
        let mut ge = vec![(a, 1.0), (s, -cap)];
        for &x in duals {
            le.push((x, -1.0));
            ge.push((x, -1.0));
        }
        lp.add_row(format!("{name}.cap"), vec![(a, 1.0), (s, -cap)], Sense::Le, 0.0);
        lp.add_row(format!("{name}.dual"), le, Sense::Le, 0.0);
        lp.add_row(format!("{name}.both"), ge, Sense::Ge, -cap);
        a
    };
    let xv: Vec<usize> = (0..k)
        .map(|i| product(&mut lp, format!("xi_up[{}]", grid.lines[i].id), &[xi_le[i], xi_ge[i]], line_up[i], 2.0 * caps.line[i]))
        .collect();
    let lv: Vec<usize> = (0..k)
        .map(|i| {
            product(&mut lp, format!("lam_up[{}]", grid.lines[i].id), &[lam_lo[i], lam_hi[i]], line_up[i], 2.0 * caps.line[i])
        })
        .collect();
    let gw: Vec<usize> =
        (0..g).map(|i| product(&mut lp, format!("gamma_up[{}]", grid.generators[i].id), &[gamma[i]], gen_up[i], total)).collect();
    let au: Vec<usize> = (0..d)
        .map(|i| product(&mut lp, format!("alpha_up[{}]", grid.loads[i].id), &[alpha_lo[i]], load_up[i], caps.shed_lo[i]))
        .collect();

    // Strong duality defines the load shed.
    let shed = lp.add_var("load_shed", f64::NEG_INFINITY, f64::INFINITY, 1.0);
    let mut terms = vec![(shed, 1.0)];
    let mut bus_demand = vec![0.0; n];
    for (i, x) in grid.loads.iter().enumerate() {
        bus_demand[topo.load_bus[i]] += x.demand / base;
    }
    for s in 0..n {
        terms.extend([(mu[s], -bus_demand[s]), (beta_lo[s], PI), (beta_hi[s], PI)]);
    }
    for (i, x) in grid.loads.iter().enumerate() {
        let dem = x.demand / base;
        terms.extend([(alpha_lo[i], -dem), (au[i], dem), (alpha_hi[i], dem)]);
    }
    for (i, l) in grid.lines.iter().enumerate() {
        let (b, m) = (l.susceptance, big_m(l.susceptance, l.shift));
        terms.extend([
            (xi_le[i], -b * l.shift + m),
            (xi_ge[i], b * l.shift + m),
            (xv[i], -m),
            (lv[i], l.rating / base),
        ]);
    }
    for (i, x) in grid.generators.iter().enumerate() {
        terms.push((gw[i], x.pmax / base));
    }
    lp.add_row("strong_duality", terms, Sense::Eq, 0.0);

    let cols = AttackerColumns {
        enclave: z.clone(),
        relay: delta,
        line_up: line_up.to_vec(),
        gen_up: gen_up.to_vec(),
        load_up: load_up.to_vec(),
        load_shed: shed,
    };
    Ok((MixedBinaryProgram::new(lp, z), cols))
}

/// Worst attack from the attacker MILP. The returned load shed is the primal
/// re-solve of the MILP's attack, not the MILP objective.
pub fn worst_attack_milp(inst: &Instance, forest: &SegmentedForest, budget: usize) -> Result<(Attack, f64)> {
    let grid = &inst.grid;
    let (mip, cols) = build_attacker_milp(inst, forest, budget)?;
    let sol = solve_milp(&mip, None)?;
    if sol.status != Status::Optimal {
        return Err(Error::Contract(format!("attacker MILP returned {:?}", sol.status)));
    }
    let attacked: Vec<usize> = (0..forest.len()).filter(|&i| sol.x[cols.enclave[i]] > 0.5).collect();
    let attack = forest.attack_from_nodes(grid, &attacked);
    let primal = operator_shed(grid, &attack)?;
    let claimed = sol.x[cols.load_shed] * grid.base_mva;
    if claimed > primal + DUAL_BOUND_TOL {
        return Err(Error::DualBoundViolation { milp: claimed, primal });
    }
    Ok((attack, primal))
}
