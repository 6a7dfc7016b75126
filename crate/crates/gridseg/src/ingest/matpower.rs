//! Reader for the bus/branch/gen subset of MATPOWER case files.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Generator, GridCase, Line, Load};

/// Factor applied to total demand to stand in for an unlimited (0) rating.
pub const UNLIMITED_RATING_FACTOR: f64 = 10.0;

struct Matrix {
    rows: Vec<(usize, Vec<f64>)>,
}

enum State {
    Top,
    Matrix { name: String, start: usize, row: Vec<f64>, row_line: usize, rows: Vec<(usize, Vec<f64>)> },
    Cell,
}

fn strip_comment(line: &str) -> &str {
    // '%' inside quoted strings only appears in cell arrays, which are skipped.
    match line.find('%') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_number(tok: &str, line: usize, column: usize) -> Result<f64> {
    match tok {
        "Inf" | "inf" => Ok(f64::INFINITY),
        "-Inf" | "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok.parse::<f64>().map_err(|_| Error::parse(line, column, format!("expected a number, found {tok:?}"))),
    }
}

fn scan(text: &str) -> Result<(BTreeMap<String, (usize, f64)>, BTreeMap<String, Matrix>)> {
    let mut scalars = BTreeMap::new();
    let mut matrices = BTreeMap::new();
    let mut state = State::Top;
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let body = strip_comment(raw);
        let mut rest: &str = body;
        let mut offset = 0usize;
        loop {
            match &mut state {
                State::Cell => {
                    if let Some(i) = rest.find('}') {
                        offset += i + 1;
                        rest = &rest[i + 1..];
                        state = State::Top;
                        continue;
                    }
                    break;
                }
                State::Top => {
                    let trimmed = rest.trim_start();
                    offset += rest.len() - trimmed.len();
                    rest = trimmed;
                    if rest.is_empty() || rest.starts_with(';') {
                        break;
                    }
                    if rest.starts_with("function") || rest == "end" || rest.starts_with("end ") {
                        break;
                    }
                    let Some(after) = rest.strip_prefix("mpc.") else {
                        return Err(Error::parse(ln, offset + 1, "expected an mpc.<field> assignment"));
                    };
                    let Some(eq) = after.find('=') else {
                        return Err(Error::parse(ln, offset + 1, "expected '=' in assignment"));
                    };
                    let name = after[..eq].trim().to_string();
                    let value = after[eq + 1..].trim_start();
                    let value_col = offset + 4 + eq + 1 + (after[eq + 1..].len() - value.len());
                    if let Some(inner) = value.strip_prefix('[') {
                        state = State::Matrix { name, start: ln, row: Vec::new(), row_line: ln, rows: Vec::new() };
                        offset = value_col + 1;
                        rest = inner;
                        continue;
                    }
                    if let Some(inner) = value.strip_prefix('{') {
                        state = State::Cell;
                        offset = value_col + 1;
                        rest = inner;
                        continue;
                    }
                    let v = value.trim_end().trim_end_matches(';').trim();
                    if !v.starts_with('\'') && !v.starts_with('"') {
                        scalars.insert(name, (ln, parse_number(v, ln, value_col + 1)?));
                    }
                    break;
                }
                State::Matrix { name, row, row_line, rows, .. } => {
                    let mut consumed = 0;
                    let mut closed = false;
                    let bytes = rest.as_bytes();
                    let mut i = 0;
                    while i < bytes.len() {
                        let c = bytes[i] as char;
                        if c == ']' {
                            closed = true;
                            consumed = i + 1;
                            break;
                        } else if c == ';' {
                            if !row.is_empty() {
                                rows.push((*row_line, std::mem::take(row)));
                            }
                            i += 1;
                        } else if c.is_whitespace() || c == ',' {
                            i += 1;
                        } else {
                            let s = i;
                            while i < bytes.len() {
                                let d = bytes[i] as char;
                                if d.is_whitespace() || d == ',' || d == ';' || d == ']' {
                                    break;
                                }
                                i += 1;
                            }
                            if row.is_empty() {
                                *row_line = ln;
                            }
                            row.push(parse_number(&rest[s..i], ln, offset + s + 1)?);
                        }
                    }
                    if !closed {
                        // A newline also ends a row.
                        if !row.is_empty() {
                            rows.push((*row_line, std::mem::take(row)));
                        }
                        break;
                    }
                    if !row.is_empty() {
                        rows.push((*row_line, std::mem::take(row)));
                    }
                    matrices.insert(std::mem::take(name), Matrix { rows: std::mem::take(rows) });
                    offset += consumed;
                    rest = &rest[consumed..];
                    state = State::Top;
                }
            }
        }
    }
    match state {
        State::Top => Ok((scalars, matrices)),
        State::Matrix { start, name, .. } => {
            Err(Error::parse(start, 1, format!("matrix mpc.{name} is never closed with ']'")))
        }
        State::Cell => Err(Error::parse(text.lines().count().max(1), 1, "cell array is never closed with '}'")),
    }
}

fn column(row: &(usize, Vec<f64>), col: usize, what: &str) -> Result<f64> {
    row.1
        .get(col)
        .copied()
        .ok_or_else(|| Error::parse(row.0, 1, format!("{what} row has {} columns, need at least {}", row.1.len(), col + 1)))
}

fn as_id(v: f64, line: usize) -> Result<u64> {
    if v.fract() != 0.0 || v < 0.0 || !v.is_finite() {
        return Err(Error::parse(line, 1, format!("bus number {v} is not a nonnegative integer")));
    }
    Ok(v as u64)
}

fn width(n: u64) -> usize {
    n.to_string().len().max(2)
}

/// Parses a MATPOWER case restricted to `baseMVA`, `bus`, `gen` and `branch`.
///
/// Bus `n` becomes substation `B<n>`, branch `k` becomes line `L<k>` (both
/// zero padded), generator `k` becomes `G<k>`, and each bus with nonzero
/// demand gets load `D<n>`. Out-of-service branches and generators are
/// dropped. A zero rating means unlimited and is replaced by
/// [`UNLIMITED_RATING_FACTOR`] times total demand.
pub fn parse_matpower(text: &str) -> Result<GridCase> {
    let (scalars, matrices) = scan(text)?;
    let base = scalars.get("baseMVA").map(|v| v.1).ok_or_else(|| Error::UnsupportedField("mpc.baseMVA".into()))?;
    let need = |name: &str| {
        matrices
            .get(name)
            .filter(|m| !m.rows.is_empty())
            .ok_or_else(|| Error::UnsupportedField(format!("mpc.{name}")))
    };
    let bus = need("bus")?;
    let branch = need("branch")?;
    let gen = need("gen")?;

    let mut bus_ids = Vec::new();
    for row in &bus.rows {
        bus_ids.push(as_id(column(row, 0, "bus")?, row.0)?);
    }
    let bw = width(bus_ids.iter().copied().max().unwrap_or(0));
    let bus_name = |n: u64| format!("B{n:0bw$}");
    let mut substations = Vec::new();
    let mut loads = Vec::new();
    for (row, &n) in bus.rows.iter().zip(&bus_ids) {
        substations.push(bus_name(n));
        let pd = column(row, 2, "bus")?;
        if pd != 0.0 {
            loads.push(Load { id: format!("D{n:0bw$}"), bus: bus_name(n), demand: pd });
        }
    }
    let total: f64 = loads.iter().map(|l| l.demand).sum();

    let known = |n: u64, line: usize| -> Result<String> {
        if bus_ids.contains(&n) {
            Ok(bus_name(n))
        } else {
            Err(Error::DanglingReference(format!("line {line}: bus {n} is not in mpc.bus")))
        }
    };

    let lw = width(branch.rows.len() as u64);
    let mut lines = Vec::new();
    for (k, row) in branch.rows.iter().enumerate() {
        let status = row.1.get(10).copied().unwrap_or(1.0);
        if status == 0.0 {
            continue;
        }
        let from = known(as_id(column(row, 0, "branch")?, row.0)?, row.0)?;
        let to = known(as_id(column(row, 1, "branch")?, row.0)?, row.0)?;
        let x = column(row, 3, "branch")?;
        if x == 0.0 {
            return Err(Error::parse(row.0, 1, "branch reactance is zero"));
        }
        let rate = row.1.get(5).copied().unwrap_or(0.0);
        let shift_deg = row.1.get(9).copied().unwrap_or(0.0);
        lines.push(Line {
            id: format!("L{:0lw$}", k + 1),
            from,
            to,
            susceptance: 1.0 / x,
            shift: shift_deg.to_radians(),
            rating: if rate == 0.0 { UNLIMITED_RATING_FACTOR * total } else { rate },
        });
    }

    let gw = gen.rows.len().to_string().len();
    let mut generators = Vec::new();
    for (k, row) in gen.rows.iter().enumerate() {
        let status = row.1.get(7).copied().unwrap_or(1.0);
        if status <= 0.0 {
            continue;
        }
        let bus = known(as_id(column(row, 0, "gen")?, row.0)?, row.0)?;
        generators.push(Generator { id: format!("G{:0gw$}", k + 1), bus, pmax: column(row, 8, "gen")? });
    }
    Ok(GridCase::new(base, substations, lines, generators, loads))
}
