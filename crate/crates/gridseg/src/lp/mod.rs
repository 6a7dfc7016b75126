//! Dense linear programming and binary branch-and-bound.
//!
//! Programs are small (hundreds of rows), so the kernel keeps a full dense
//! tableau and favours determinism over speed.

mod format;
mod milp;
mod simplex;

pub use format::write_lp_format;
pub use milp::{solve_milp, MixedBinaryProgram};
pub use simplex::solve_lp;

use thiserror::Error;

/// Primal feasibility tolerance used by every solve.
pub const FEAS_TOL: f64 = 1e-8;
/// Distance from 0 or 1 under which a binary counts as integral.
pub const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub direction: Direction,
    pub vars: Vec<Variable>,
    pub rows: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of an LP or MILP solve.
///
/// `duals` are shadow prices: the rate of change of the stated objective per
/// unit increase of each row's right-hand side. `reduced_costs` are
/// `c_j - sum_i duals_i * a_ij`, again for the stated objective, so a variable
/// resting at its lower bound in a minimization has a nonnegative value.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: Status,
    pub x: Vec<f64>,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    /// Column indices of the final basis (structural, then one slack per row,
    /// then artificials).
    pub basis: Vec<usize>,
    /// Improving direction when `status` is `Unbounded`.
    pub ray: Option<Vec<f64>>,
    pub iterations: usize,
    /// Branch-and-bound nodes solved (0 for a plain LP).
    pub nodes: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
}

impl LpError {
    pub fn code(&self) -> &'static str {
        match self {
            LpError::InvalidModel(_) => "INVALID_MODEL",
            LpError::NumericFailure(_) => "NUMERIC_FAILURE",
        }
    }
}

impl LinearProgram {
    pub fn new(direction: Direction) -> Self {
        LinearProgram { direction, vars: Vec::new(), rows: Vec::new() }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> usize {
        self.vars.push(Variable { name: name.into(), lower, upper, cost });
        self.vars.len() - 1
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        self.rows.push(Constraint { name: name.into(), terms, sense, rhs });
        self.rows.len() - 1
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let mut names = std::collections::HashSet::new();
        for v in &self.vars {
            if !names.insert(v.name.as_str()) {
                return Err(LpError::InvalidModel(format!("duplicate variable name {}", v.name)));
            }
            if v.lower.is_nan() || v.upper.is_nan() || !v.cost.is_finite() {
                return Err(LpError::InvalidModel(format!("non-finite data on variable {}", v.name)));
            }
            if v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return Err(LpError::InvalidModel(format!("unusable bound on variable {}", v.name)));
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite() {
                return Err(LpError::InvalidModel(format!("non-finite rhs on row {}", r.name)));
            }
            for &(j, a) in &r.terms {
                if j >= self.vars.len() {
                    return Err(LpError::InvalidModel(format!(
                        "row {} references undeclared variable {j}",
                        r.name
                    )));
                }
                if !a.is_finite() {
                    return Err(LpError::InvalidModel(format!("non-finite coefficient on row {}", r.name)));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.vars.iter().zip(x).map(|(v, xi)| v.cost * xi).sum()
    }

    pub fn row_activity(&self, row: usize, x: &[f64]) -> f64 {
        self.rows[row].terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Largest bound or row violation of `x`.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &xi) in self.vars.iter().zip(x) {
            worst = worst.max(v.lower - xi).max(xi - v.upper);
        }
        for (i, r) in self.rows.iter().enumerate() {
            let act = self.row_activity(i, x);
            let viol = match r.sense {
                Sense::Le => act - r.rhs,
                Sense::Ge => r.rhs - act,
                Sense::Eq => (act - r.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

impl LpSolution {
    /// Objective of the dual program evaluated at this solution's duals and
    /// reduced costs: `sum_i y_i b_i` plus each reduced cost times the bound it
    /// prices.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        let mut obj: f64 = lp.rows.iter().zip(&self.duals).map(|(r, y)| r.rhs * y).sum();
        let sign = match lp.direction {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        };
        for (v, &d) in lp.vars.iter().zip(&self.reduced_costs) {
            // In min form a positive reduced cost prices the lower bound.
            let bound = if sign * d > 0.0 { v.lower } else { v.upper };
            if d != 0.0 && bound.is_finite() {
                obj += d * bound;
            } else if d.abs() > 1e-9 {
                return -sign * f64::INFINITY;
            }
        }
        obj
    }

    /// Largest violation of complementary slackness, scaled by the magnitude
    /// of the multiplier.
    pub fn complementarity_residual(&self, lp: &LinearProgram) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, y) in self.duals.iter().enumerate() {
            let slack = lp.rows[i].rhs - lp.row_activity(i, &self.x);
            worst = worst.max((y * slack).abs() / (1.0 + y.abs()));
        }
        for (j, d) in self.reduced_costs.iter().enumerate() {
            let v = &lp.vars[j];
            let gap = (self.x[j] - v.lower).abs().min((v.upper - self.x[j]).abs());
            let gap = if gap.is_finite() { gap } else { self.x[j].abs() };
            worst = worst.max((d * gap).abs() / (1.0 + d.abs()));
        }
        worst
    }
}
