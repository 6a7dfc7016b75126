//! Line-oriented native formats for grids, communication forests and plans.
//!
//! Every file starts with a schema tag (`gridseg-grid 1`, `gridseg-comm 1`,
//! `gridseg-plan 1`). Each following line is a record keyword, positional
//! arguments and `key=value` fields. Lists are comma separated, values with
//! spaces are double quoted and `#` starts a comment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::defender::{NewEnclave, SegmentationPlan};
use crate::error::{Error, Result};
use crate::model::{CommNetwork, Entity, ExistingEnclave, Generator, GridCase, Line, Load, Relay, Tier};

pub const GRID_TAG: &str = "gridseg-grid";
pub const COMM_TAG: &str = "gridseg-comm";
pub const PLAN_TAG: &str = "gridseg-plan";
const VERSION: &str = "1";

#[derive(Debug, Clone)]
struct Token {
    column: usize,
    text: String,
}

struct Record {
    line: usize,
    keyword: Token,
    args: Vec<Token>,
    fields: BTreeMap<String, Token>,
}

impl Record {
    fn arg(&self, i: usize, what: &str) -> Result<&Token> {
        self.args.get(i).ok_or_else(|| {
            let col = self.args.last().map(|t| t.column + t.text.len()).unwrap_or(self.keyword.column + self.keyword.text.len());
            Error::parse(self.line, col + 1, format!("{} record needs {what}", self.keyword.text))
        })
    }

    fn field(&self, key: &str) -> Result<&Token> {
        self.fields
            .get(key)
            .ok_or_else(|| Error::parse(self.line, 1, format!("{} record needs field {key}=", self.keyword.text)))
    }

    fn number(&self, key: &str) -> Result<f64> {
        let tok = self.field(key)?;
        tok.text
            .parse::<f64>()
            .map_err(|_| Error::parse(self.line, tok.column, format!("{key} must be a number, found {:?}", tok.text)))
    }

    fn list(&self, key: &str) -> Vec<String> {
        match self.fields.get(key) {
            Some(t) if !t.text.is_empty() => t.text.split(',').map(str::to_string).collect(),
            _ => Vec::new(),
        }
    }

    fn allow(&self, keys: &[&str], max_args: usize) -> Result<()> {
        if let Some(extra) = self.args.get(max_args) {
            return Err(Error::parse(self.line, extra.column, format!("unexpected argument {:?}", extra.text)));
        }
        for (k, tok) in &self.fields {
            if !keys.contains(&k.as_str()) {
                return Err(Error::parse(self.line, tok.column, format!("unknown field {k}")));
            }
        }
        Ok(())
    }
}

fn tokenize(line: &str, ln: usize) -> Result<Vec<(Token, Option<Token>)>> {
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let col = |i: usize| chars.get(i).map(|c| line[..c.0].chars().count() + 1).unwrap_or(line.chars().count() + 1);
    while i < chars.len() {
        let c = chars[i].1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let mut key = String::new();
        let mut value: Option<Token> = None;
        while i < chars.len() && !chars[i].1.is_whitespace() {
            let c = chars[i].1;
            if c == '=' && value.is_none() {
                i += 1;
                let vcol = col(i);
                let mut text = String::new();
                if i < chars.len() && chars[i].1 == '"' {
                    i += 1;
                    loop {
                        if i >= chars.len() {
                            return Err(Error::parse(ln, vcol, "unterminated quoted value"));
                        }
                        if chars[i].1 == '"' {
                            i += 1;
                            break;
                        }
                        text.push(chars[i].1);
                        i += 1;
                    }
                    if i < chars.len() && !chars[i].1.is_whitespace() {
                        return Err(Error::parse(ln, col(i), "expected whitespace after quoted value"));
                    }
                } else {
                    while i < chars.len() && !chars[i].1.is_whitespace() {
                        if chars[i].1 == '"' || chars[i].1 == '=' {
                            return Err(Error::parse(ln, col(i), format!("unexpected {:?}", chars[i].1)));
                        }
                        text.push(chars[i].1);
                        i += 1;
                    }
                }
                value = Some(Token { column: vcol, text });
                break;
            }
            if c == '"' {
                return Err(Error::parse(ln, col(i), "quotes are only allowed in field values"));
            }
            key.push(c);
            i += 1;
        }
        if key.is_empty() {
            return Err(Error::parse(ln, col(start), "empty field name"));
        }
        out.push((Token { column: col(start), text: key }, value));
    }
    Ok(out)
}

/// Splits a file into records after checking its schema tag.
fn records(text: &str, tag: &str) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    let mut tagged = false;
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let toks = tokenize(raw, ln)?;
        if toks.is_empty() {
            continue;
        }
        if !tagged {
            let (first, v) = &toks[0];
            if first.text != tag || v.is_some() {
                return Err(Error::parse(ln, first.column, format!("expected schema tag {tag:?}")));
            }
            match toks.get(1) {
                Some((ver, None)) if ver.text == VERSION && toks.len() == 2 => {}
                Some((ver, _)) => {
                    return Err(Error::UnsupportedField(format!("{tag} schema version {:?} (line {ln})", ver.text)))
                }
                None => return Err(Error::parse(ln, first.column + tag.len(), "missing schema version")),
            }
            tagged = true;
            continue;
        }
        let mut iter = toks.into_iter();
        let (keyword, kv) = iter.next().unwrap();
        if kv.is_some() {
            return Err(Error::parse(ln, keyword.column, "record must start with a keyword"));
        }
        let mut rec = Record { line: ln, keyword, args: Vec::new(), fields: BTreeMap::new() };
        for (k, v) in iter {
            match v {
                None if rec.fields.is_empty() => rec.args.push(k),
                None => return Err(Error::parse(ln, k.column, "positional argument after fields")),
                Some(v) => {
                    if rec.fields.insert(k.text.clone(), v).is_some() {
                        return Err(Error::parse(ln, k.column, format!("field {} given twice", k.text)));
                    }
                }
            }
        }
        out.push(rec);
    }
    if !tagged {
        return Err(Error::parse(1, 1, "empty input"));
    }
    Ok(out)
}

fn fmt_list(items: &[String]) -> String {
    items.join(",")
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "'"))
}

/// Parses the native grid schema.
pub fn parse_grid_native(text: &str) -> Result<GridCase> {
    let mut base = None;
    let mut substations = Vec::new();
    let mut lines = Vec::new();
    let mut generators = Vec::new();
    let mut loads = Vec::new();
    for rec in records(text, GRID_TAG)? {
        match rec.keyword.text.as_str() {
            "base-mva" => {
                rec.allow(&[], 1)?;
                let t = rec.arg(0, "a value")?;
                base = Some(t.text.parse::<f64>().map_err(|_| Error::parse(rec.line, t.column, "base-mva must be a number"))?);
            }
            "substation" => {
                rec.allow(&[], 1)?;
                substations.push(rec.arg(0, "an identifier")?.text.clone());
            }
            "line" => {
                rec.allow(&["from", "to", "susceptance", "shift", "rating"], 1)?;
                lines.push(Line {
                    id: rec.arg(0, "an identifier")?.text.clone(),
                    from: rec.field("from")?.text.clone(),
                    to: rec.field("to")?.text.clone(),
                    susceptance: rec.number("susceptance")?,
                    shift: if rec.fields.contains_key("shift") { rec.number("shift")? } else { 0.0 },
                    rating: rec.number("rating")?,
                });
            }
            "generator" => {
                rec.allow(&["at", "pmax"], 1)?;
                generators.push(Generator {
                    id: rec.arg(0, "an identifier")?.text.clone(),
                    bus: rec.field("at")?.text.clone(),
                    pmax: rec.number("pmax")?,
                });
            }
            "load" => {
                rec.allow(&["at", "demand"], 1)?;
                loads.push(Load {
                    id: rec.arg(0, "an identifier")?.text.clone(),
                    bus: rec.field("at")?.text.clone(),
                    demand: rec.number("demand")?,
                });
            }
            other => return Err(Error::parse(rec.line, rec.keyword.column, format!("unknown record {other:?}"))),
        }
    }
    let base = base.ok_or_else(|| Error::UnsupportedField("base-mva".into()))?;
    if substations.is_empty() {
        return Err(Error::UnsupportedField("substation records".into()));
    }
    let known: BTreeSet<&str> = substations.iter().map(String::as_str).collect();
    for (what, id, bus) in lines
        .iter()
        .flat_map(|l| [("line", &l.id, &l.from), ("line", &l.id, &l.to)])
        .chain(generators.iter().map(|g| ("generator", &g.id, &g.bus)))
        .chain(loads.iter().map(|d| ("load", &d.id, &d.bus)))
    {
        if !known.contains(bus.as_str()) {
            return Err(Error::DanglingReference(format!("{what} {id} cites unknown substation {bus}")));
        }
    }
    Ok(GridCase::new(base, substations, lines, generators, loads))
}

pub fn write_grid_native(grid: &GridCase) -> String {
    let mut s = format!("{GRID_TAG} {VERSION}\nbase-mva {}\n", grid.base_mva);
    for b in &grid.substations {
        let _ = writeln!(s, "substation {b}");
    }
    for l in &grid.lines {
        let _ = writeln!(
            s,
            "line {} from={} to={} susceptance={} shift={} rating={}",
            l.id, l.from, l.to, l.susceptance, l.shift, l.rating
        );
    }
    for g in &grid.generators {
        let _ = writeln!(s, "generator {} at={} pmax={}", g.id, g.bus, g.pmax);
    }
    for d in &grid.loads {
        let _ = writeln!(s, "load {} at={} demand={}", d.id, d.bus, d.demand);
    }
    s
}

/// Parses the native communication schema, resolving relay components
/// against `grid`.
pub fn parse_comm_topology(text: &str, grid: &GridCase) -> Result<CommNetwork> {
    let mut entities = Vec::new();
    let mut enclaves = Vec::new();
    let mut relays = Vec::new();
    let mut cites: Vec<(usize, &'static str, String)> = Vec::new();
    let mut enclave_cites: Vec<(usize, String)> = Vec::new();
    for rec in records(text, COMM_TAG)? {
        match rec.keyword.text.as_str() {
            "entity" => {
                rec.allow(&["under", "label"], 2)?;
                let t = rec.arg(0, "a tier")?;
                let tier = Tier::from_keyword(&t.text)
                    .ok_or_else(|| Error::parse(rec.line, t.column, format!("unknown tier {:?}", t.text)))?;
                let controllers = rec.list("under");
                for c in &controllers {
                    cites.push((rec.line, "entity", c.clone()));
                }
                entities.push(Entity {
                    id: rec.arg(1, "an identifier")?.text.clone(),
                    tier,
                    controllers,
                    label: rec.fields.get("label").map(|t| t.text.clone()),
                });
            }
            "enclave" => {
                rec.allow(&["of", "parent"], 2)?;
                let t = rec.arg(0, "a tier")?;
                let tier = Tier::from_keyword(&t.text)
                    .ok_or_else(|| Error::parse(rec.line, t.column, format!("unknown tier {:?}", t.text)))?;
                let members = rec.list("of");
                for m in &members {
                    cites.push((rec.line, "entity", m.clone()));
                }
                let parent = rec.fields.get("parent").map(|t| t.text.clone());
                if let Some(p) = &parent {
                    enclave_cites.push((rec.line, p.clone()));
                }
                enclaves.push(ExistingEnclave { id: rec.arg(1, "an identifier")?.text.clone(), tier, members, parent });
            }
            "relay" => {
                rec.allow(&["at", "controls", "enclave"], 1)?;
                let id = rec.arg(0, "an identifier")?.text.clone();
                let owners = rec.list("at");
                for o in &owners {
                    cites.push((rec.line, "substation", o.clone()));
                }
                let components = rec.list("controls");
                for c in &components {
                    if grid.component_index(c).is_none() {
                        return Err(Error::DanglingReference(format!(
                            "line {}: relay {id} cites unknown grid component {c}",
                            rec.line
                        )));
                    }
                }
                let enclave = rec.fields.get("enclave").map(|t| t.text.clone());
                if let Some(e) = &enclave {
                    enclave_cites.push((rec.line, e.clone()));
                }
                relays.push(Relay { id, owners, components, enclave });
            }
            other => return Err(Error::parse(rec.line, rec.keyword.column, format!("unknown record {other:?}"))),
        }
    }
    let entity_ids: BTreeSet<&str> = entities.iter().map(|e| e.id.as_str()).collect();
    for (line, what, id) in &cites {
        if !entity_ids.contains(id.as_str()) {
            return Err(Error::DanglingReference(format!("line {line}: unknown {what} {id}")));
        }
    }
    let enclave_ids: BTreeSet<&str> = enclaves.iter().map(|e| e.id.as_str()).collect();
    for (line, id) in &enclave_cites {
        if !enclave_ids.contains(id.as_str()) {
            return Err(Error::DanglingReference(format!("line {line}: unknown enclave {id}")));
        }
    }
    Ok(CommNetwork::new(entities, enclaves, relays))
}

pub fn write_comm_topology(comm: &CommNetwork) -> String {
    let mut s = format!("{COMM_TAG} {VERSION}\n");
    for e in &comm.entities {
        let _ = write!(s, "entity {} {}", e.tier, e.id);
        if !e.controllers.is_empty() {
            let _ = write!(s, " under={}", fmt_list(&e.controllers));
        }
        if let Some(l) = &e.label {
            let _ = write!(s, " label={}", quote(l));
        }
        s.push('\n');
    }
    for e in &comm.enclaves {
        let _ = write!(s, "enclave {} {} of={}", e.tier, e.id, fmt_list(&e.members));
        if let Some(p) = &e.parent {
            let _ = write!(s, " parent={p}");
        }
        s.push('\n');
    }
    for r in &comm.relays {
        let _ = write!(s, "relay {} at={} controls={}", r.id, fmt_list(&r.owners), fmt_list(&r.components));
        if let Some(e) = &r.enclave {
            let _ = write!(s, " enclave={e}");
        }
        s.push('\n');
    }
    s
}

/// Parses a plan file. References are checked by `apply_segmentation`.
pub fn parse_plan(text: &str) -> Result<SegmentationPlan> {
    let mut plan = SegmentationPlan::default();
    for rec in records(text, PLAN_TAG)? {
        match rec.keyword.text.as_str() {
            "new" => {
                rec.allow(&["of"], 2)?;
                let t = rec.arg(0, "a tier")?;
                let tier = Tier::from_keyword(&t.text)
                    .ok_or_else(|| Error::parse(rec.line, t.column, format!("unknown tier {:?}", t.text)))?;
                plan.new_enclaves.push(NewEnclave {
                    id: rec.arg(1, "an identifier")?.text.clone(),
                    tier,
                    entity: rec.field("of")?.text.clone(),
                });
            }
            "parent" => {
                rec.allow(&[], 2)?;
                let child = rec.arg(0, "a child enclave")?;
                if plan.parent.insert(child.text.clone(), rec.arg(1, "a parent enclave")?.text.clone()).is_some() {
                    return Err(Error::PlanInfeasible {
                        family: "one parent per enclave",
                        message: format!("line {}: enclave {} given two parents", rec.line, child.text),
                    });
                }
            }
            "relay" => {
                rec.allow(&[], 2)?;
                let relay = rec.arg(0, "a relay")?;
                if plan.relay_enclave.insert(relay.text.clone(), rec.arg(1, "an enclave")?.text.clone()).is_some() {
                    return Err(Error::PlanInfeasible {
                        family: "one enclave per relay",
                        message: format!("line {}: relay {} assigned twice", rec.line, relay.text),
                    });
                }
            }
            other => return Err(Error::parse(rec.line, rec.keyword.column, format!("unknown record {other:?}"))),
        }
    }
    plan.new_enclaves.sort_by(|a, b| (a.tier, &a.id).cmp(&(b.tier, &b.id)));
    Ok(plan)
}

pub fn write_plan(plan: &SegmentationPlan) -> String {
    let mut s = format!("{PLAN_TAG} {VERSION}\n");
    for e in &plan.new_enclaves {
        let _ = writeln!(s, "new {} {} of={}", e.tier, e.id, e.entity);
    }
    for (c, p) in &plan.parent {
        let _ = writeln!(s, "parent {c} {p}");
    }
    for (r, e) in &plan.relay_enclave {
        let _ = writeln!(s, "relay {r} {e}");
    }
    s
}
