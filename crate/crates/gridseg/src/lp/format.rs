use std::fmt::Write;

use super::{Direction, LinearProgram, Sense};

fn clean(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' })
        .collect()
}

fn term(out: &mut String, first: bool, coef: f64, name: &str) {
    if coef < 0.0 {
        let _ = write!(out, " - {} {}", -coef, clean(name));
    } else if first {
        let _ = write!(out, " {} {}", coef, clean(name));
    } else {
        let _ = write!(out, " + {} {}", coef, clean(name));
    }
}

/// Renders a program in CPLEX LP-style text for cross-checking with external
/// solvers. `binaries` go to a `Binaries` section.
pub fn write_lp_format(lp: &LinearProgram, binaries: &[usize]) -> String {
    let mut out = String::new();
    out.push_str(match lp.direction {
        Direction::Minimize => "Minimize\n",
        Direction::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    let mut first = true;
    for v in &lp.vars {
        if v.cost != 0.0 {
            term(&mut out, first, v.cost, &v.name);
            first = false;
        }
    }
    if first {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    for r in &lp.rows {
        let _ = write!(out, " {}:", clean(&r.name));
        if r.terms.is_empty() {
            out.push_str(" 0");
        }
        for (k, &(j, a)) in r.terms.iter().enumerate() {
            term(&mut out, k == 0, a, &lp.vars[j].name);
        }
        let op = match r.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", r.rhs);
    }
    out.push_str("Bounds\n");
    for v in &lp.vars {
        let name = clean(&v.name);
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, true) => {
                let _ = writeln!(out, " {} <= {name} <= {}", v.lower, v.upper);
            }
            (true, false) => {
                let _ = writeln!(out, " {name} >= {}", v.lower);
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {}", v.upper);
            }
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
        }
    }
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for &j in binaries {
            let _ = writeln!(out, " {}", clean(&lp.vars[j].name));
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_lists_every_section() {
        let mut lp = LinearProgram::new(Direction::Maximize);
        let a = lp.add_var("z[BA1/0]", 0.0, 1.0, 2.0);
        let b = lp.add_var("y", f64::NEG_INFINITY, f64::INFINITY, -1.0);
        lp.add_row("cap", vec![(a, 1.0), (b, -3.0)], Sense::Le, 4.0);
        let text = write_lp_format(&lp, &[a]);
        assert_eq!(
            text,
            "Maximize\n obj: 2 z[BA1_0] - 1 y\nSubject To\n cap: 1 z[BA1_0] - 3 y <= 4\nBounds\n 0 <= z[BA1_0] <= 1\n y free\nBinaries\n z[BA1_0]\nEnd\n"
        );
    }
}
