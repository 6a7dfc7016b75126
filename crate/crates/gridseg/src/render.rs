//! Graphviz rendering of segmented forests.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::attacker::SegmentedForest;
use crate::dcopf::Attack;
use crate::model::Tier;

const ATTACKED: &str = ", style=filled, fillcolor=\"#c0392b\", fontcolor=white";

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\\\""))
}

/// DOT text for `forest`: one node per enclave and relay, parent-to-child
/// edges, one rank per tier. Attacked enclaves and compromised relays are
/// filled; with no attack (or an empty one) the output is the plain forest.
pub fn render_dot(forest: &SegmentedForest, attack: Option<&Attack>) -> String {
    let hit: BTreeSet<&str> = attack.map(|a| a.enclaves.iter().map(String::as_str).collect()).unwrap_or_default();
    let relays_hit: BTreeSet<&str> =
        attack.map(|a| a.compromised_relays.iter().map(String::as_str).collect()).unwrap_or_default();
    let mut out = String::new();
    out.push_str("digraph forest {\n  rankdir=TB;\n  node [fontname=\"Helvetica\", fontsize=10];\n");
    for tier in Tier::ALL {
        let shape = match tier {
            Tier::BalancingAuthority => "doubleoctagon",
            Tier::ControlCenter => "octagon",
            Tier::Substation => "box",
        };
        out.push_str("  { rank=same;");
        for n in forest.nodes.iter().filter(|n| n.tier == tier) {
            write!(out, " {};", quote(&n.id)).unwrap();
        }
        out.push_str(" }\n");
        for n in forest.nodes.iter().filter(|n| n.tier == tier) {
            let style = if hit.contains(n.id.as_str()) { ATTACKED } else { "" };
            let extra = if n.is_new { ", peripheries=2" } else { "" };
            writeln!(out, "  {} [shape={shape}, label={}{extra}{style}];", quote(&n.id), quote(&format!("{}\\n{}", n.id, n.entity)))
                .unwrap();
        }
    }
    let relays: BTreeSet<&str> = forest.nodes.iter().flat_map(|n| n.relays.iter().map(String::as_str)).collect();
    out.push_str("  { rank=same;");
    for r in &relays {
        write!(out, " {};", quote(r)).unwrap();
    }
    out.push_str(" }\n");
    for r in &relays {
        let style = if relays_hit.contains(r) { ATTACKED } else { "" };
        writeln!(out, "  {} [shape=ellipse, fontsize=8{style}];", quote(r)).unwrap();
    }
    for n in &forest.nodes {
        for &c in &n.children {
            writeln!(out, "  {} -> {};", quote(&n.id), quote(&forest.nodes[c].id)).unwrap();
        }
        for r in &n.relays {
            writeln!(out, "  {} -> {};", quote(&n.id), quote(r)).unwrap();
        }
    }
    out.push_str("}\n");
    out
}
