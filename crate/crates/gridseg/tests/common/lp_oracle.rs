//! Brute-force references for the LP/MILP kernel.

use gridseg::lp::{Direction, LinearProgram, MixedBinaryProgram, Sense};
use rand::Rng;

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` when the matrix is (numerically) singular.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for i in 0..n {
            if i != col {
                let f = a[i][col] / a[col][col];
                if f != 0.0 {
                    for k in col..n {
                        a[i][k] -= f * a[col][k];
                    }
                    b[i] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Optimal objective of a bounded LP by enumerating every basic solution.
/// All variables must have finite bounds. Returns `None` when infeasible.
pub fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.vars.len();
    let mut equalities: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut inequalities: Vec<(Vec<f64>, f64)> = Vec::new();
    for r in &lp.rows {
        let mut a = vec![0.0; n];
        for &(j, c) in &r.terms {
            a[j] += c;
        }
        if a.iter().all(|&v| v == 0.0) {
            let ok = match r.sense {
                Sense::Eq => r.rhs == 0.0,
                Sense::Le => r.rhs >= 0.0,
                Sense::Ge => r.rhs <= 0.0,
            };
            if !ok {
                return None;
            }
            continue;
        }
        match r.sense {
            Sense::Eq => equalities.push((a, r.rhs)),
            Sense::Le => inequalities.push((a, r.rhs)),
            Sense::Ge => inequalities.push((a.iter().map(|v| -v).collect(), -r.rhs)),
        }
    }
    for (j, v) in lp.vars.iter().enumerate() {
        assert!(v.lower.is_finite() && v.upper.is_finite());
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        inequalities.push((e.clone(), v.upper));
        inequalities.push((e.iter().map(|v| -v).collect(), -v.lower));
    }
    let need = n.checked_sub(equalities.len())?;
    let mut best: Option<f64> = None;
    let mut pick = Vec::new();
    combinations(inequalities.len(), need, 0, &mut pick, &mut |chosen| {
        let mut a: Vec<Vec<f64>> = equalities.iter().map(|(r, _)| r.clone()).collect();
        let mut b: Vec<f64> = equalities.iter().map(|(_, v)| *v).collect();
        for &k in chosen {
            a.push(inequalities[k].0.clone());
            b.push(inequalities[k].1);
        }
        let Some(x) = solve_square(a, b) else { return };
        let tol = 1e-7;
        let feasible = equalities
            .iter()
            .all(|(r, v)| (dot(r, &x) - v).abs() <= tol * (1.0 + v.abs()))
            && inequalities.iter().all(|(r, v)| dot(r, &x) <= v + tol * (1.0 + v.abs()));
        if feasible {
            let obj = lp.objective_value(&x);
            best = Some(match (best, lp.direction) {
                (None, _) => obj,
                (Some(b), Direction::Maximize) => b.max(obj),
                (Some(b), Direction::Minimize) => b.min(obj),
            });
        }
    });
    best
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combinations(n: usize, k: usize, start: usize, pick: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if pick.len() == k {
        f(pick);
        return;
    }
    for i in start..n {
        if n - i < k - pick.len() {
            break;
        }
        pick.push(i);
        combinations(n, k, i + 1, pick, f);
        pick.pop();
    }
}

/// Random LP with `nvars` boxed variables and `nrows` mixed-sense rows.
pub fn random_lp(rng: &mut impl Rng, nvars: usize, nrows: usize) -> LinearProgram {
    let dir = if rng.gen_bool(0.5) { Direction::Maximize } else { Direction::Minimize };
    let mut lp = LinearProgram::new(dir);
    for j in 0..nvars {
        let lo = rng.gen_range(-4..=1) as f64;
        let hi = lo + rng.gen_range(1..=6) as f64;
        lp.add_var(format!("x{j}"), lo, hi, rng.gen_range(-5..=5) as f64);
    }
    for i in 0..nrows {
        let mut terms: Vec<(usize, f64)> = Vec::new();
        for j in 0..nvars {
            if rng.gen_bool(0.7) {
                terms.push((j, rng.gen_range(-5..=5) as f64));
            }
        }
        if terms.is_empty() {
            terms.push((rng.gen_range(0..nvars), 1.0));
        }
        let sense = match rng.gen_range(0..5) {
            0 => Sense::Eq,
            1 | 2 => Sense::Le,
            _ => Sense::Ge,
        };
        lp.add_row(format!("r{i}"), terms, sense, rng.gen_range(-8..=8) as f64);
    }
    lp
}

/// Random program over `nbin` binaries plus `ncont` boxed continuous variables.
pub fn random_mip(rng: &mut impl Rng, nbin: usize, ncont: usize, nrows: usize) -> MixedBinaryProgram {
    let dir = if rng.gen_bool(0.5) { Direction::Maximize } else { Direction::Minimize };
    let mut lp = LinearProgram::new(dir);
    let mut binaries = Vec::new();
    for j in 0..nbin {
        binaries.push(lp.add_var(format!("b{j}"), 0.0, 1.0, rng.gen_range(-9..=9) as f64));
    }
    for j in 0..ncont {
        lp.add_var(format!("c{j}"), 0.0, rng.gen_range(1..=4) as f64, rng.gen_range(-3..=3) as f64);
    }
    let n = nbin + ncont;
    for i in 0..nrows {
        let mut terms: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                terms.push((j, rng.gen_range(-6..=6) as f64));
            }
        }
        let sense = if rng.gen_bool(0.7) { Sense::Le } else { Sense::Ge };
        let rhs = match sense {
            Sense::Le => rng.gen_range(0..=12) as f64,
            _ => rng.gen_range(-12..=2) as f64,
        };
        lp.add_row(format!("r{i}"), terms, sense, rhs);
    }
    MixedBinaryProgram::new(lp, binaries)
}

/// Exhaustive optimum over all binary assignments. Continuous variables are
/// optimized by vertex enumeration for each assignment.
pub fn exhaustive_mip(mip: &MixedBinaryProgram) -> Option<f64> {
    let k = mip.binaries.len();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << k) {
        let mut lp = mip.lp.clone();
        for (bit, &j) in mip.binaries.iter().enumerate() {
            let v = ((mask >> bit) & 1) as f64;
            lp.vars[j].lower = v;
            lp.vars[j].upper = v;
        }
        let value = if lp.vars.len() == k {
            let x: Vec<f64> = lp.vars.iter().map(|v| v.lower).collect();
            (lp.primal_residual(&x) <= 1e-9).then(|| lp.objective_value(&x))
        } else {
            vertex_enumeration(&reduce_fixed(&lp))
        };
        if let Some(v) = value {
            best = Some(match (best, lp.direction) {
                (None, _) => v,
                (Some(b), Direction::Maximize) => b.max(v),
                (Some(b), Direction::Minimize) => b.min(v),
            });
        }
    }
    best
}

/// Substitutes fixed variables into rows and objective so the vertex oracle
/// only sees the free part.
fn reduce_fixed(lp: &LinearProgram) -> LinearProgram {
    let keep: Vec<usize> = (0..lp.vars.len()).filter(|&j| lp.vars[j].lower < lp.vars[j].upper).collect();
    let mut out = LinearProgram::new(lp.direction);
    let mut map = vec![usize::MAX; lp.vars.len()];
    let mut constant = 0.0;
    for (j, v) in lp.vars.iter().enumerate() {
        if keep.contains(&j) {
            map[j] = out.add_var(v.name.clone(), v.lower, v.upper, v.cost);
        } else {
            constant += v.cost * v.lower;
        }
    }
    for r in &lp.rows {
        let mut rhs = r.rhs;
        let mut terms = Vec::new();
        for &(j, a) in &r.terms {
            if map[j] == usize::MAX {
                rhs -= a * lp.vars[j].lower;
            } else {
                terms.push((map[j], a));
            }
        }
        out.add_row(r.name.clone(), terms, r.sense, rhs);
    }
    // Carry the constant through a fixed dummy column.
    out.add_var("__constant", 1.0, 1.0, constant);
    out
}
