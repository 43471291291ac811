//! Python bindings: systems, solved states, virial reports, table
//! reproduction, sweeps and the self test.

use confinium::report::{self, TableId, Tolerances};
use confinium::{eigensolve, observables, Error, StateSpec, SystemKind, TruncationPolicy};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

create_exception!(confinium, ConfiniumError, PyException);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Parameter(_) | Error::Unsupported(_) => PyValueError::new_err(e.to_string()),
        _ => ConfiniumError::new_err(e.to_string()),
    }
}

fn policy(grid_n: Option<usize>) -> PyResult<TruncationPolicy> {
    let mut p = TruncationPolicy::from_env().map_err(py_err)?;
    if let Some(n) = grid_n {
        p.grid_n = n;
        p.validate().map_err(py_err)?;
    }
    Ok(p)
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(f)) => f.into_pyobject(py)?.into_any(),
            _ => py.None().into_bound(py),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let list = PyList::empty(py);
            for x in a {
                list.append(to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn dict_of<'py>(py: Python<'py>, x: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(x).map_err(|e| ConfiniumError::new_err(e.to_string()))?;
    to_py(py, &v)
}

/// A confined or free system. Parameters not given take the kind's
/// defaults; walls default to infinity.
#[pyclass(name = "SystemSpec", module = "confinium", frozen)]
struct PySystemSpec {
    inner: confinium::SystemSpec,
}

#[pymethods]
impl PySystemSpec {
    #[new]
    #[pyo3(signature = (kind, **params))]
    fn new(kind: &str, params: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let kind: SystemKind = kind.parse().map_err(py_err)?;
        let mut inner = confinium::SystemSpec::default_for(kind);
        if let Some(params) = params {
            for (k, v) in params.iter() {
                let name: String = k.extract()?;
                let value: f64 = v.extract()?;
                inner.set_param(&name, value).map_err(py_err)?;
            }
        }
        inner.validate().map_err(py_err)?;
        Ok(PySystemSpec { inner })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.name()
    }

    #[getter]
    fn ell(&self) -> u32 {
        self.inner.ell
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        dict_of(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        let v = serde_json::to_string(&self.inner).unwrap_or_default();
        format!("SystemSpec({v})")
    }
}

/// A solved bound state on its grid.
#[pyclass(name = "Eigenstate", module = "confinium", frozen)]
struct PyEigenstate {
    inner: confinium::Eigenstate,
}

#[pymethods]
impl PyEigenstate {
    #[getter]
    fn energy(&self) -> f64 {
        self.inner.energy
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.state.label(&self.inner.system)
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes().to_vec()
    }

    #[getter]
    fn psi(&self) -> Vec<f64> {
        self.inner.psi.clone()
    }

    fn __repr__(&self) -> String {
        format!("Eigenstate({}, energy={})", self.label(), self.inner.energy)
    }
}

#[pyclass(name = "VirialReport", module = "confinium", frozen, get_all)]
#[allow(non_snake_case)]
struct PyVirialReport {
    dT2: f64,
    dV2: f64,
    cross1: f64,
    cross2: f64,
    spread: f64,
    t2_eq6: f64,
    t2_gap: f64,
    dH2: f64,
    energy: f64,
}

impl From<confinium::VirialReport> for PyVirialReport {
    fn from(r: confinium::VirialReport) -> Self {
        PyVirialReport {
            dT2: r.dT2,
            dV2: r.dV2,
            cross1: r.cross1,
            cross2: r.cross2,
            spread: r.spread,
            t2_eq6: r.t2_eq6,
            t2_gap: r.t2_gap,
            dH2: r.dH2,
            energy: r.energy,
        }
    }
}

#[pymethods]
impl PyVirialReport {
    #[classattr]
    fn fields() -> Vec<&'static str> {
        confinium::VirialReport::FIELDS.to_vec()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        let vals = [
            self.dT2, self.dV2, self.cross1, self.cross2, self.spread, self.t2_eq6, self.t2_gap, self.dH2, self.energy,
        ];
        for (k, v) in confinium::VirialReport::FIELDS.iter().zip(vals) {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("VirialReport(energy={}, dV2={}, dH2={:e})", self.energy, self.dV2, self.dH2)
    }
}

fn parse_state(sys: &confinium::SystemSpec, state: &str) -> PyResult<StateSpec> {
    let (st, ell) = StateSpec::parse(sys.kind, state).map_err(py_err)?;
    match ell {
        Some(l) if l != sys.ell => Err(PyValueError::new_err(format!(
            "state {state} has ell={l} but the system has ell={}",
            sys.ell
        ))),
        _ => Ok(st),
    }
}

/// Solves one state, given by node index or label such as "2s".
#[pyfunction]
#[pyo3(signature = (system, state = "0", grid_n = None))]
fn solve(py: Python<'_>, system: &PySystemSpec, state: &str, grid_n: Option<usize>) -> PyResult<PyEigenstate> {
    let st = parse_state(&system.inner, state)?;
    let p = policy(grid_n)?;
    let sys = system.inner.clone();
    let inner = py.detach(|| eigensolve::solve_state(&sys, &st, &p)).map_err(py_err)?;
    Ok(PyEigenstate { inner })
}

/// The lowest `count` states at the system's angular momentum.
#[pyfunction]
#[pyo3(signature = (system, count, grid_n = None))]
fn solve_bound_states(
    py: Python<'_>,
    system: &PySystemSpec,
    count: usize,
    grid_n: Option<usize>,
) -> PyResult<Vec<PyEigenstate>> {
    let p = policy(grid_n)?;
    let sys = system.inner.clone();
    let states = py.detach(|| eigensolve::solve_bound_states(&sys, count, &p)).map_err(py_err)?;
    Ok(states.into_iter().map(|inner| PyEigenstate { inner }).collect())
}

#[pyfunction]
fn virial_report(system: &PySystemSpec, state: &PyEigenstate) -> PyResult<PyVirialReport> {
    observables::virial_report(&system.inner, &state.inner).map(Into::into).map_err(py_err)
}

/// The raw moments as a dict.
#[pyfunction]
fn expectation_set<'py>(py: Python<'py>, system: &PySystemSpec, state: &PyEigenstate) -> PyResult<Bound<'py, PyAny>> {
    let x = observables::expectation_set(&system.inner, &state.inner).map_err(py_err)?;
    dict_of(py, &x)
}

/// Normalized a + c·b, for sufficiency checks.
#[pyfunction]
fn superpose(a: &PyEigenstate, b: &PyEigenstate, c: f64) -> PyResult<PyEigenstate> {
    let inner = observables::superpose(&a.inner, &b.inner, c).map_err(py_err)?;
    Ok(PyEigenstate { inner })
}

/// Compares a table against fresh solves; one dict per printed cell.
#[pyfunction]
#[pyo3(signature = (table, notes = false, grid_n = None))]
fn reproduce_table<'py>(py: Python<'py>, table: &str, notes: bool, grid_n: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    let id: TableId = table.parse().map_err(py_err)?;
    let p = policy(grid_n)?;
    let rows = py.detach(|| {
        let mut rows = report::reproduce_table(id, &p, Tolerances::default());
        if notes {
            rows.extend(report::literature_check(id, &p, Tolerances::default()));
        }
        rows
    });
    let out = serde_json::json!({"rows": rows, "summary": report::summarize(&rows)});
    dict_of(py, &out)
}

#[pyfunction]
#[pyo3(signature = (system, param, values, states = vec!["0".to_string()], grid_n = None))]
fn sweep<'py>(
    py: Python<'py>,
    system: &PySystemSpec,
    param: &str,
    values: Vec<f64>,
    states: Vec<String>,
    grid_n: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let st = states.iter().map(|s| parse_state(&system.inner, s)).collect::<PyResult<Vec<_>>>()?;
    let p = policy(grid_n)?;
    let sys = system.inner.clone();
    let points = py.detach(|| report::sweep(&sys, param, &values, &st, &p)).map_err(py_err)?;
    dict_of(py, &points)
}

/// Built-in analytic checks; a list of dicts with a `pass` key.
#[pyfunction]
#[pyo3(signature = (grid_n = None))]
fn selftest<'py>(py: Python<'py>, grid_n: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    let p = policy(grid_n)?;
    let rows = py.detach(|| report::selftest(&p));
    dict_of(py, &rows)
}

/// Runs the command line with `args` (without the program name) and
/// returns its exit code.
#[pyfunction]
fn main(args: Vec<String>) -> i32 {
    let argv = std::iter::once("confinium".to_string()).chain(args).map(Into::into);
    confinium::cli::run(argv)
}

#[pymodule]
#[pyo3(name = "confinium")]
pub fn confinium_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("ConfiniumError", m.py().get_type::<ConfiniumError>())?;
    m.add_class::<PySystemSpec>()?;
    m.add_class::<PyEigenstate>()?;
    m.add_class::<PyVirialReport>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_bound_states, m)?)?;
    m.add_function(wrap_pyfunction!(virial_report, m)?)?;
    m.add_function(wrap_pyfunction!(expectation_set, m)?)?;
    m.add_function(wrap_pyfunction!(superpose, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce_table, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    m.add_function(wrap_pyfunction!(main, m)?)?;
    Ok(())
}
