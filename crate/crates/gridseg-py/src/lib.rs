//! Python bindings: load an instance, solve, attack, dispatch and render.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use gridseg::attacker::{apply_segmentation, count_attacks, derive_effects, worst_attack_enumerate, worst_attack_milp};
use gridseg::dcopf::operator_shed;
use gridseg::defender::{self, Oracle, SegmentationPlan};
use gridseg::ingest;
use gridseg::model::DefenderBudget;
use gridseg::render::render_dot;

fn py_err(e: gridseg::Error) -> PyErr {
    let msg = format!("{}: {e}", e.code());
    if e.is_input_error() {
        PyValueError::new_err(msg)
    } else {
        PyRuntimeError::new_err(msg)
    }
}

fn oracle(name: &str) -> PyResult<Oracle> {
    name.parse().map_err(PyValueError::new_err)
}

/// A validated grid case plus communication forest.
#[pyclass(frozen)]
struct Instance {
    inner: gridseg::model::Instance,
}

/// Outcome of a trilevel solve.
#[pyclass(frozen, get_all)]
struct SolveRecord {
    load_shed: f64,
    attacked_enclaves: Vec<String>,
    plan_count: u64,
    /// Plan file text of the best plan.
    plan: String,
    /// Canonical JSON record.
    results: String,
}

impl Instance {
    fn plan(&self, plan: Option<&str>) -> PyResult<SegmentationPlan> {
        match plan {
            Some(text) => ingest::parse_plan(text).map_err(py_err),
            None => SegmentationPlan::identity(&self.inner).map_err(py_err),
        }
    }
}

#[pymethods]
impl Instance {
    /// Parses both files' text.
    #[new]
    fn new(grid_text: &str, comm_text: &str) -> PyResult<Self> {
        ingest::load_instance(grid_text, comm_text).map(|inner| Instance { inner }).map_err(py_err)
    }

    /// Reads both files from disk.
    #[staticmethod]
    fn from_files(grid_path: &str, comm_path: &str) -> PyResult<Self> {
        let read = |p: &str| std::fs::read_to_string(p).map_err(|e| PyValueError::new_err(format!("{p}: {e}")));
        Self::new(&read(grid_path)?, &read(comm_path)?)
    }

    #[getter]
    fn total_demand(&self) -> f64 {
        self.inner.total_demand()
    }

    #[getter]
    fn digest(&self) -> String {
        ingest::instance_digest(&self.inner)
    }

    /// Best plan with exactly the given new-enclave counts.
    #[pyo3(signature = (new_ss, new_cc, new_ba, attack_budget, oracle="enumerate"))]
    fn solve(&self, py: Python<'_>, new_ss: usize, new_cc: usize, new_ba: usize, attack_budget: usize, oracle: &str) -> PyResult<SolveRecord> {
        let o = self::oracle(oracle)?;
        let budget = DefenderBudget::new(new_ss, new_cc, new_ba);
        let rec = py.detach(|| defender::solve_trilevel(&self.inner, budget, attack_budget, o)).map_err(py_err)?;
        Ok(SolveRecord {
            load_shed: rec.load_shed,
            attacked_enclaves: rec.attack.enclaves.clone(),
            plan_count: rec.plan_count,
            plan: ingest::write_plan(&rec.plan),
            results: ingest::write_results(&self.inner.grid, &rec),
        })
    }

    /// Worst attack on a plan (plan file text; the unsegmented forest when
    /// omitted). Returns (attacked enclaves, load shed MW).
    #[pyo3(signature = (attack_budget, plan=None, oracle="enumerate"))]
    fn worst_attack(&self, py: Python<'_>, attack_budget: usize, plan: Option<&str>, oracle: &str) -> PyResult<(Vec<String>, f64)> {
        let o = self::oracle(oracle)?;
        let plan = self.plan(plan)?;
        let forest = apply_segmentation(&self.inner, &plan).map_err(py_err)?;
        let (a, l) = py
            .detach(|| match o {
                Oracle::Enumerate => worst_attack_enumerate(&forest, &self.inner.grid, attack_budget),
                Oracle::Milp => worst_attack_milp(&self.inner, &forest, attack_budget),
            })
            .map_err(py_err)?;
        Ok((a.enclaves, l))
    }

    /// Operator load shed (MW) after attacking the given enclaves.
    #[pyo3(signature = (enclaves, plan=None))]
    fn load_shed(&self, enclaves: Vec<String>, plan: Option<&str>) -> PyResult<f64> {
        let forest = apply_segmentation(&self.inner, &self.plan(plan)?).map_err(py_err)?;
        let attack = derive_effects(&forest, &self.inner.grid, &enclaves).map_err(py_err)?;
        operator_shed(&self.inner.grid, &attack).map_err(py_err)
    }

    /// Number of ancestor-closed attacks of at most `attack_budget` enclaves,
    /// the empty one included.
    #[pyo3(signature = (attack_budget, plan=None))]
    fn count_attacks(&self, attack_budget: usize, plan: Option<&str>) -> PyResult<u64> {
        let forest = apply_segmentation(&self.inner, &self.plan(plan)?).map_err(py_err)?;
        Ok(count_attacks(&forest, attack_budget))
    }

    /// Number of symmetry-distinct plans with the given counts.
    fn count_plans(&self, new_ss: usize, new_cc: usize, new_ba: usize) -> usize {
        let space = defender::PlanSpace::new(&self.inner, DefenderBudget::new(new_ss, new_cc, new_ba), Default::default());
        space.count()
    }

    /// DOT text of a plan's forest, with attacked enclaves filled.
    #[pyo3(signature = (plan=None, attack=None))]
    fn render_dot(&self, plan: Option<&str>, attack: Option<Vec<String>>) -> PyResult<String> {
        let forest = apply_segmentation(&self.inner, &self.plan(plan)?).map_err(py_err)?;
        let attack = match attack {
            Some(a) => Some(derive_effects(&forest, &self.inner.grid, &a).map_err(py_err)?),
            None => None,
        };
        Ok(render_dot(&forest, attack.as_ref()))
    }
}

#[pymodule]
fn pygridseg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_class::<SolveRecord>()?;
    Ok(())
}
