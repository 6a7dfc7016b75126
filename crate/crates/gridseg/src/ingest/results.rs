//! Canonical JSON records: keys sorted, MW values fixed at 6 decimals, no
//! timing data, so identical runs give identical bytes.

use serde_json::{json, Map, Number, Value};

use crate::dcopf::{dual_caps, Attack, Dispatch};
use crate::defender::{SegmentationPlan, SolveRecord};
use crate::model::{DefenderBudget, GridCase};

/// Fixed 6-decimal number; `-0.000000` prints as `0.000000`.
pub fn mw(v: f64) -> Value {
    let mut s = format!("{v:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s = s.trim_start_matches('-').to_string();
    }
    Value::Number(s.parse::<Number>().expect("formatted float is a JSON number"))
}

fn ids<'a>(names: impl Iterator<Item = &'a str>, up: &[bool]) -> Value {
    names.zip(up).filter(|(_, u)| !**u).map(|(n, _)| Value::from(n)).collect()
}

fn budget_json(b: DefenderBudget) -> Value {
    json!({ "ba": b.balancing_authority, "cc": b.control_center, "ss": b.substation })
}

pub fn plan_json(plan: &SegmentationPlan) -> Value {
    let news: Vec<Value> = plan
        .new_enclaves
        .iter()
        .map(|e| json!({ "entity": e.entity, "id": e.id, "tier": e.tier.keyword() }))
        .collect();
    json!({
        "childless": plan.childless_enclaves(),
        "newEnclaves": news,
        "parent": plan.parent,
        "relayEnclave": plan.relay_enclave,
    })
}

pub fn attack_json(grid: &GridCase, attack: &Attack) -> Value {
    json!({
        "compromisedRelays": attack.compromised_relays,
        "enclaves": attack.enclaves,
        "generatorsOff": ids(grid.generators.iter().map(|g| g.id.as_str()), &attack.gen_up),
        "linesOff": ids(grid.lines.iter().map(|l| l.id.as_str()), &attack.line_up),
        "loadsOff": ids(grid.loads.iter().map(|d| d.id.as_str()), &attack.load_up),
    })
}

/// Capacity constants assumed for the operator duals in the attacker MILP.
pub fn dual_caps_json(grid: &GridCase) -> Value {
    let caps = dual_caps(grid);
    let named = |names: Vec<&str>, vals: &[f64]| -> Value {
        Value::Object(names.into_iter().zip(vals).map(|(n, &v)| (n.to_string(), mw(v))).collect::<Map<_, _>>())
    };
    json!({
        "generator": named(grid.generators.iter().map(|g| g.id.as_str()).collect(), &caps.gen_cap),
        "line": named(grid.lines.iter().map(|l| l.id.as_str()).collect(), &caps.line),
        "load": named(grid.loads.iter().map(|d| d.id.as_str()).collect(), &caps.shed_lo),
    })
}

pub fn record_json(grid: &GridCase, rec: &SolveRecord) -> Value {
    json!({
        "attack": attack_json(grid, &rec.attack),
        "attackBudget": rec.attack_budget,
        "defenderBudget": budget_json(rec.defender_budget),
        "dualCaps": dual_caps_json(grid),
        "instanceDigest": rec.digest,
        "loadShedMW": mw(rec.load_shed),
        "oracle": rec.oracle.name(),
        "plan": plan_json(&rec.plan),
        "planCount": rec.plan_count,
    })
}

/// Pretty-printed with a trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Canonical record of one trilevel solve.
pub fn write_results(grid: &GridCase, rec: &SolveRecord) -> String {
    to_text(&record_json(grid, rec))
}

/// Canonical record of a budget sweep, rows in input order.
pub fn write_sweep(grid: &GridCase, recs: &[SolveRecord]) -> String {
    let rows: Vec<Value> = recs.iter().map(|r| record_json(grid, r)).collect();
    to_text(&json!({ "rows": rows }))
}

/// Canonical record of a worst-attack search on one plan.
pub fn write_attack_results(grid: &GridCase, digest: &str, plan: &SegmentationPlan, budget: usize, attack: &Attack, shed: f64) -> String {
    to_text(&json!({
        "attack": attack_json(grid, attack),
        "attackBudget": budget,
        "dualCaps": dual_caps_json(grid),
        "instanceDigest": digest,
        "loadShedMW": mw(shed),
        "plan": plan_json(plan),
    }))
}

/// Canonical record of an operator dispatch.
pub fn write_dispatch(grid: &GridCase, digest: &str, attack: &Attack, d: &Dispatch) -> String {
    let per = |names: Vec<&str>, vals: &[f64]| -> Value {
        Value::Object(names.into_iter().zip(vals).map(|(n, &v)| (n.to_string(), mw(v))).collect::<Map<_, _>>())
    };
    to_text(&json!({
        "attack": attack_json(grid, attack),
        "flowMW": per(grid.lines.iter().map(|l| l.id.as_str()).collect(), &d.flow),
        "generationMW": per(grid.generators.iter().map(|g| g.id.as_str()).collect(), &d.generation),
        "instanceDigest": digest,
        "loadShedMW": mw(d.total_shed),
        "shedMW": per(grid.loads.iter().map(|l| l.id.as_str()).collect(), &d.shed),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_six_decimals() {
        assert_eq!(serde_json::to_string(&mw(315.0)).unwrap(), "315.000000");
        assert_eq!(serde_json::to_string(&mw(-1e-9)).unwrap(), "0.000000");
        assert_eq!(serde_json::to_string(&mw(52.8000000004)).unwrap(), "52.800000");
    }

    #[test]
    fn keys_are_sorted() {
        let v = json!({ "b": 1, "a": 2 });
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"a":2,"b":1}"#);
    }
}
