//! Python bindings for the teamflat model checker.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use teamflat::experiments::{self, Settings};
use teamflat::{EvalBudget, ExclusionMode, Strategy};

create_exception!(teamflat_py, TeamflatError, PyException);

fn err(e: teamflat::Error) -> PyErr {
    TeamflatError::new_err(e.to_string())
}

fn strategy(name: &str) -> PyResult<Strategy> {
    name.parse().map_err(err)
}

#[pyclass(frozen, skip_from_py_object, name = "Structure", module = "teamflat_py")]
#[derive(Clone)]
struct PyStructure(teamflat::Structure);

#[pymethods]
impl PyStructure {
    /// Parses the line-oriented model format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        teamflat::Structure::parse(text).map(Self).map_err(err)
    }

    /// A structure with elements `e0 .. e{n-1}` and no relations.
    #[staticmethod]
    fn with_size(n: usize) -> PyResult<Self> {
        teamflat::Structure::with_size(n, "e").map(Self).map_err(err)
    }

    fn with_relation(&self, name: &str, arity: usize, tuples: Vec<Vec<u32>>) -> PyResult<Self> {
        self.0.clone().with_relation(name, arity, tuples).map(Self).map_err(err)
    }

    fn with_constant(&self, name: &str, elem: u32) -> PyResult<Self> {
        self.0.clone().with_constant(name, elem).map(Self).map_err(err)
    }

    #[getter]
    fn size(&self) -> usize {
        self.0.size()
    }

    fn relation(&self, name: &str) -> Option<Vec<Vec<u32>>> {
        self.0.relation(name).map(|r| r.tuples().iter().cloned().collect())
    }

    fn to_model_text(&self) -> String {
        self.0.to_model_text()
    }

    fn is_connected(&self, relation: &str) -> PyResult<bool> {
        teamflat::is_connected(&self.0, relation).map_err(err)
    }

    /// Automorphisms as image lists.
    #[pyo3(signature = (cap = teamflat::structure::AUTOMORPHISM_DOMAIN_CAP))]
    fn automorphisms(&self, cap: usize) -> PyResult<Vec<Vec<u32>>> {
        let maps = teamflat::automorphisms(&self.0, cap).map_err(err)?;
        Ok(maps.iter().map(|p| p.images().to_vec()).collect())
    }

    fn __repr__(&self) -> String {
        format!("Structure(size={})", self.0.size())
    }
}

#[pyclass(frozen, skip_from_py_object, name = "Team", module = "teamflat_py")]
#[derive(Clone)]
struct PyTeam(teamflat::Team);

#[pymethods]
impl PyTeam {
    #[new]
    fn new(vars: Vec<String>, rows: Vec<Vec<u32>>) -> PyResult<Self> {
        teamflat::Team::new(&vars, rows).map(Self).map_err(err)
    }

    /// The team holding only the empty assignment.
    #[staticmethod]
    fn unit() -> Self {
        Self(teamflat::Team::unit())
    }

    #[staticmethod]
    fn parse(text: &str, structure: &PyStructure) -> PyResult<Self> {
        teamflat::Team::parse(text, &structure.0).map(Self).map_err(err)
    }

    #[getter]
    fn vars(&self) -> Vec<String> {
        self.0.vars().to_vec()
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<u32>> {
        self.0.rows().iter().cloned().collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        self.0.to_string()
    }
}

#[pyclass(frozen, skip_from_py_object, eq, name = "Formula", module = "teamflat_py")]
#[derive(Clone, PartialEq)]
struct PyFormula(teamflat::Formula);

#[pymethods]
impl PyFormula {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        teamflat::parse(text).map(Self).map_err(err)
    }

    #[pyo3(signature = (exclusion = "top"))]
    fn flatten(&self, exclusion: &str) -> PyResult<Self> {
        let mode: ExclusionMode = exclusion.parse().map_err(err)?;
        teamflat::flatten(&self.0, mode).map(Self).map_err(err)
    }

    fn simplify_f(&self) -> Self {
        Self(teamflat::simplify_f(&self.0))
    }

    fn free_variables(&self) -> Vec<String> {
        self.0.free_variables().into_iter().collect()
    }

    fn is_first_order(&self) -> bool {
        self.0.is_first_order()
    }

    fn __str__(&self) -> String {
        teamflat::render(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Formula({:?})", teamflat::render(&self.0))
    }
}

/// Truth of `formula` on `team` in `structure`.
#[pyfunction]
#[pyo3(signature = (structure, team, formula, strategy = "optimized"))]
fn eval(structure: &PyStructure, team: &PyTeam, formula: &PyFormula, strategy: &str) -> PyResult<bool> {
    let s = self::strategy(strategy)?;
    teamflat::eval(&structure.0, &team.0, &formula.0, s, &EvalBudget::default()).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (structure, formula, strategy = "optimized"))]
fn eval_sentence(structure: &PyStructure, formula: &PyFormula, strategy: &str) -> PyResult<bool> {
    let s = self::strategy(strategy)?;
    teamflat::eval_sentence(&structure.0, &formula.0, s, &EvalBudget::default()).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (length, symmetric = true))]
fn gen_cycle(length: usize, symmetric: bool) -> PyResult<PyStructure> {
    teamflat::gen_cycle(length, symmetric).map(PyStructure).map_err(err)
}

#[pyfunction]
fn gen_a(n: u32) -> PyResult<PyStructure> {
    teamflat::gen_a(n).map(PyStructure).map_err(err)
}

#[pyfunction]
fn gen_b(n: u32) -> PyResult<PyStructure> {
    teamflat::gen_b(n).map(PyStructure).map_err(err)
}

/// `(id, citation)` for every experiment.
#[pyfunction]
fn experiment_ids() -> Vec<(String, String)> {
    experiments::catalog()
        .iter()
        .map(|e| (e.id.to_string(), e.citation.to_string()))
        .collect()
}

/// Runs one experiment with default settings; returns `(status, details, seconds)`.
#[pyfunction]
#[pyo3(signature = (id, seed = 0))]
fn run_experiment(py: Python<'_>, id: &str, seed: u64) -> PyResult<(String, String, f64)> {
    let e = experiments::find(id).ok_or_else(|| TeamflatError::new_err(format!("no experiment {id}")))?;
    let settings = Settings {
        seed,
        ..Settings::default()
    };
    let o = py.detach(|| e.run(&settings)).map_err(err)?;
    Ok((o.status.to_string(), o.details, o.elapsed.as_secs_f64()))
}

#[pymodule]
fn teamflat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TeamflatError", m.py().get_type::<TeamflatError>())?;
    m.add_class::<PyStructure>()?;
    m.add_class::<PyTeam>()?;
    m.add_class::<PyFormula>()?;
    m.add_function(wrap_pyfunction!(eval, m)?)?;
    m.add_function(wrap_pyfunction!(eval_sentence, m)?)?;
    m.add_function(wrap_pyfunction!(gen_cycle, m)?)?;
    m.add_function(wrap_pyfunction!(gen_a, m)?)?;
    m.add_function(wrap_pyfunction!(gen_b, m)?)?;
    m.add_function(wrap_pyfunction!(experiment_ids, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
