use std::rc::Rc;

use super::simplex::{check_accuracy, infeasible_solution, solve_with_tableau, Outcome, Tableau};
use super::{Direction, LinearProgram, LpError, LpSolution, Status, INT_TOL};

/// A linear program with some variables restricted to {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedBinaryProgram {
    pub lp: LinearProgram,
    pub binaries: Vec<usize>,
}

impl MixedBinaryProgram {
    pub fn new(lp: LinearProgram, binaries: Vec<usize>) -> Self {
        MixedBinaryProgram { lp, binaries }
    }

    fn validate(&self) -> Result<(), LpError> {
        self.lp.validate()?;
        for &j in &self.binaries {
            let v = self
                .lp
                .vars
                .get(j)
                .ok_or_else(|| LpError::InvalidModel(format!("binary index {j} out of range")))?;
            if v.lower < 0.0 || v.upper > 1.0 {
                return Err(LpError::InvalidModel(format!("binary {} has bounds outside [0, 1]", v.name)));
            }
        }
        Ok(())
    }
}

struct Node {
    parent: Rc<Tableau>,
    fixings: Vec<(usize, f64)>,
    parent_bound: f64,
}

/// Depth-first branch-and-bound.
///
/// Branches on the lowest-index most-fractional binary and explores the
/// 1-branch first. Children are re-optimized from the parent tableau with the
/// dual simplex. With `cutoff`, only solutions strictly better than it are
/// accepted; if none exists the status is `Infeasible`.
pub fn solve_milp(mip: &MixedBinaryProgram, cutoff: Option<f64>) -> Result<LpSolution, LpError> {
    mip.validate()?;
    let lp = &mip.lp;
    let maximize = lp.direction == Direction::Maximize;
    // Internally everything is compared as "larger is better".
    let key = |obj: f64| if maximize { obj } else { -obj };
    let improves = |candidate: f64, reference: f64| {
        reference == f64::NEG_INFINITY || candidate > reference + 1e-9 * (1.0 + reference.abs())
    };

    let (root, root_tab) = solve_with_tableau(lp)?;
    match root.status {
        Status::Infeasible => return Ok(LpSolution { nodes: 1, ..root }),
        Status::Unbounded => return Ok(LpSolution { nodes: 1, ..root }),
        Status::Optimal => {}
    }
    let mut incumbent: Option<LpSolution> = None;
    let mut best = cutoff.map(key).unwrap_or(f64::NEG_INFINITY);
    let mut nodes = 1usize;
    let mut iterations = root.iterations;
    let mut stack: Vec<Node> = Vec::new();

    let process = |sol: LpSolution,
                       tab: Tableau,
                       fixings: Vec<(usize, f64)>,
                       stack: &mut Vec<Node>,
                       incumbent: &mut Option<LpSolution>,
                       best: &mut f64| {
        let bound = key(sol.objective);
        if !improves(bound, *best) {
            return;
        }
        let mut branch: Option<usize> = None;
        let mut best_frac = INT_TOL;
        for &j in &mip.binaries {
            let v = sol.x[j];
            let frac = (v - v.floor()).min(v.ceil() - v);
            if frac > best_frac + 1e-12 {
                best_frac = frac;
                branch = Some(j);
            }
        }
        match branch {
            None => {
                *best = bound;
                *incumbent = Some(sol);
            }
            Some(j) => {
                let parent = Rc::new(tab);
                let mut zero = fixings.clone();
                zero.push((j, 0.0));
                let mut one = fixings;
                one.push((j, 1.0));
                stack.push(Node { parent: parent.clone(), fixings: zero, parent_bound: bound });
                stack.push(Node { parent, fixings: one, parent_bound: bound });
            }
        }
    };

    process(root, root_tab.expect("optimal root has a tableau"), Vec::new(), &mut stack, &mut incumbent, &mut best);

    while let Some(node) = stack.pop() {
        if !improves(node.parent_bound, best) {
            continue;
        }
        nodes += 1;
        let &(j, value) = node.fixings.last().expect("child nodes carry a fixing");
        let mut tab = Rc::try_unwrap(node.parent).unwrap_or_else(|rc| (*rc).clone());
        tab.set_bounds(j, value, value);
        let mut node_lp = lp.clone();
        for &(k, v) in &node.fixings {
            node_lp.vars[k].lower = v;
            node_lp.vars[k].upper = v;
        }
        let warm = tab.reoptimize();
        let (sol, tab) = match warm {
            Ok(outcome) if tab.max_infeasibility() <= 1e-7 || matches!(outcome, Outcome::Infeasible) => {
                let sol = tab.solution(&node_lp, &outcome);
                if sol.status == Status::Optimal && check_accuracy(&node_lp, &sol).is_err() {
                    cold(&node_lp)?
                } else {
                    (sol, Some(tab))
                }
            }
            _ => cold(&node_lp)?,
        };
        iterations += sol.iterations;
        match (sol.status, tab) {
            (Status::Optimal, Some(tab)) => {
                process(sol, tab, node.fixings, &mut stack, &mut incumbent, &mut best)
            }
            (Status::Unbounded, _) => {
                return Err(LpError::NumericFailure("unbounded node below a bounded root".into()))
            }
            _ => {}
        }
    }

    Ok(match incumbent {
        Some(sol) => LpSolution { nodes, iterations, ..sol },
        None => LpSolution { nodes, iterations, ..infeasible_solution(lp) },
    })
}

fn cold(lp: &LinearProgram) -> Result<(LpSolution, Option<Tableau>), LpError> {
    solve_with_tableau(lp)
}
