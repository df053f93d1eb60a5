//! Python bindings: DAG analysis, decomposition, bounds, simulation and
//! federated schedulability.
//!
//! Exact bounds come back as `fractions.Fraction`.

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;

use dagbound::bounds::{self, Rational};
use dagbound::federated::{self, TaskClass};
use dagbound::sim::{self, ExecutionTimes, Policy};
use dagbound::taskgen::{self, GenParams};
use dagbound::{Method, VertexId, Work};

fn err(e: dagbound::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn fraction<'py>(py: Python<'py>, r: Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((*r.numer(), *r.denom()))
}

fn ids(vs: &[VertexId]) -> Vec<usize> {
    vs.iter().map(|v| v.index()).collect()
}

/// Validated DAG with integer WCETs.
#[pyclass(name = "Dag", module = "dagbound", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDag(dagbound::Dag);

impl PyDag {
    fn vertex(&self, v: usize) -> PyResult<VertexId> {
        let id = VertexId(v as u32);
        if v >= self.0.len() {
            return Err(PyIndexError::new_err(format!("vertex {v} out of range")));
        }
        Ok(id)
    }
}

#[pymethods]
impl PyDag {
    #[new]
    #[pyo3(signature = (wcets, edges, names = None))]
    fn new(wcets: Vec<Work>, edges: Vec<(usize, usize)>, names: Option<Vec<String>>) -> PyResult<Self> {
        let dag = match names {
            Some(n) => dagbound::Dag::with_names(n, wcets, &edges),
            None => dagbound::Dag::new(wcets, &edges),
        };
        dag.map(PyDag).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        dagbound::Dag::from_json_str(text).map(PyDag).map_err(err)
    }

    /// The six-vertex running example (C = 10, L = 6).
    #[staticmethod]
    fn example() -> Self {
        PyDag(dagbound::dag::example_dag())
    }

    fn to_json(&self) -> String {
        self.0.to_json_string()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Dag(vertices={}, edges={}, volume={})", self.0.len(), self.0.edge_count(), self.0.volume())
    }

    #[getter]
    fn wcets(&self) -> Vec<Work> {
        self.0.wcets().to_vec()
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.0.names().to_vec()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges().map(|(u, v)| (u.index(), v.index())).collect()
    }

    fn successors(&self, v: usize) -> PyResult<Vec<usize>> {
        Ok(ids(self.0.successors(self.vertex(v)?)))
    }

    fn predecessors(&self, v: usize) -> PyResult<Vec<usize>> {
        Ok(ids(self.0.preds(self.vertex(v)?)))
    }

    fn sources(&self) -> Vec<usize> {
        ids(&self.0.sources())
    }

    fn sinks(&self) -> Vec<usize> {
        ids(&self.0.sinks())
    }

    fn is_normalized(&self) -> bool {
        self.0.is_normalized()
    }

    /// Adds a zero-WCET source and sink when needed.
    fn normalize(&self) -> Self {
        PyDag(self.0.normalize())
    }

    fn volume(&self) -> Work {
        self.0.volume()
    }

    /// `(vertices, length)` of the lexicographically smallest longest path.
    fn longest_path(&self) -> (Vec<usize>, Work) {
        let p = self.0.longest_path();
        (ids(&p.vertices), p.length)
    }

    fn is_generalized_path(&self, vs: Vec<usize>) -> bool {
        vs.iter().all(|&v| v < self.0.len())
            && self.0.is_generalized_path(&vs.iter().map(|&v| VertexId(v as u32)).collect::<Vec<_>>())
    }

    /// Generalized path list as `(paths, lengths)`.
    fn decompose(&self) -> (Vec<Vec<usize>>, Vec<Work>) {
        let list = dagbound::decompose(&self.0);
        (list.paths.iter().map(|p| ids(p)).collect(), list.lengths)
    }

    fn model(&self) -> PyModel {
        PyModel(dagbound::model_of(&self.0))
    }
}

/// Multi-path model: total work plus the non-increasing path lengths.
#[pyclass(name = "MultiPathModel", module = "dagbound", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModel(dagbound::MultiPathModel);

#[pymethods]
impl PyModel {
    #[new]
    fn new(total_work: Work, lengths: Vec<Work>) -> PyResult<Self> {
        dagbound::MultiPathModel::new(total_work, lengths).map(PyModel).map_err(err)
    }

    #[getter]
    fn total_work(&self) -> Work {
        self.0.total_work()
    }

    #[getter]
    fn longest(&self) -> Work {
        self.0.longest()
    }

    #[getter]
    fn lengths(&self) -> Vec<Work> {
        self.0.lengths().to_vec()
    }

    #[getter]
    fn k_bar(&self) -> Option<usize> {
        self.0.k_bar()
    }

    fn __repr__(&self) -> String {
        format!("MultiPathModel(total_work={}, lengths={:?})", self.0.total_work(), self.0.lengths())
    }

    fn graham_bound<'py>(&self, py: Python<'py>, cores: usize) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, bounds::graham_bound(self.0.total_work(), self.0.longest(), cores).map_err(err)?)
    }

    fn multipath_bound<'py>(&self, py: Python<'py>, cores: usize) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, bounds::multipath_bound(&self.0, cores).map_err(err)?)
    }

    fn cores_graham(&self, deadline: Work) -> PyResult<u64> {
        bounds::cores_graham(self.0.total_work(), self.0.longest(), deadline).map_err(err)
    }

    fn cores_multipath(&self, deadline: Work) -> PyResult<u64> {
        bounds::cores_multipath(&self.0, deadline).map_err(err)
    }
}

#[pyfunction]
fn graham_bound<'py>(py: Python<'py>, total_work: Work, longest: Work, cores: usize) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, bounds::graham_bound(total_work, longest, cores).map_err(err)?)
}

#[pyfunction]
fn multipath_bound<'py>(py: Python<'py>, model: &PyModel, cores: usize) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, bounds::multipath_bound(&model.0, cores).map_err(err)?)
}

/// One simulated execution.
#[pyclass(name = "Trace", module = "dagbound", frozen, get_all)]
struct PyTrace {
    makespan: Work,
    start: Vec<Work>,
    finish: Vec<Work>,
    /// `grid[t][p]`: vertex on core `p` during `[t, t + 1)`, or `None`.
    grid: Vec<Vec<Option<usize>>>,
    critical_path: Vec<usize>,
    work_conserving: bool,
    busy_between: bool,
}

#[pymethods]
impl PyTrace {
    fn __repr__(&self) -> String {
        format!("Trace(makespan={}, critical_path={:?})", self.makespan, self.critical_path)
    }
}

/// Runs the work-conserving simulator on a normalized DAG. `policy` is one of
/// `fifo`, `lexicographic`, `random`, or a list of vertex ids in priority order.
#[pyfunction]
#[pyo3(signature = (dag, cores, policy = None, exec_times = None, seed = 0))]
fn simulate(
    dag: &PyDag,
    cores: usize,
    policy: Option<&Bound<'_, PyAny>>,
    exec_times: Option<Vec<Work>>,
    seed: u64,
) -> PyResult<PyTrace> {
    let policy = match policy {
        None => Policy::Fifo,
        Some(p) => {
            if let Ok(name) = p.extract::<String>() {
                match name.as_str() {
                    "fifo" => Policy::Fifo,
                    "lexicographic" => Policy::Lexicographic,
                    "random" => Policy::Random { seed },
                    other => return Err(PyValueError::new_err(format!("unknown policy {other:?}"))),
                }
            } else {
                let order: Vec<usize> = p.extract()?;
                Policy::Priority(order.into_iter().map(|v| VertexId(v as u32)).collect())
            }
        }
    };
    let g = &dag.0;
    let times = match exec_times {
        Some(e) => ExecutionTimes::new(g, e).map_err(err)?,
        None => ExecutionTimes::full(g),
    };
    let seq = sim::simulate(g, cores, &policy, &times).map_err(err)?;
    let critical_path = if g.is_normalized() { ids(&sim::critical_path(&seq, g).map_err(err)?) } else { Vec::new() };
    Ok(PyTrace {
        makespan: seq.makespan,
        grid: seq.grid.iter().map(|row| row.iter().map(|c| c.map(|v| v.index())).collect()).collect(),
        critical_path,
        work_conserving: sim::check_work_conserving(&seq, g, cores),
        busy_between: sim::check_busy_between(&seq, g, cores),
        start: seq.start,
        finish: seq.finish,
    })
}

/// Worst makespan over every work-conserving schedule (and, with
/// `vary_exec`, every execution-time vector). Small DAGs only.
#[pyfunction]
#[pyo3(signature = (dag, cores, vary_exec = true))]
fn exhaustive_max_makespan(py: Python<'_>, dag: &PyDag, cores: usize, vary_exec: bool) -> PyResult<Work> {
    py.detach(|| dagbound::oracle::exhaustive_max_makespan(&dag.0, cores, vary_exec)).map_err(err)
}

/// Sporadic DAG task: multi-path model, relative deadline and period.
#[pyclass(name = "Task", module = "dagbound", frozen, from_py_object)]
#[derive(Clone)]
struct PyTask(federated::Task);

#[pymethods]
impl PyTask {
    #[new]
    fn new(model: &PyModel, deadline: Work, period: Work) -> PyResult<Self> {
        federated::Task::new(model.0.clone(), deadline, period).map(PyTask).map_err(err)
    }

    #[getter]
    fn model(&self) -> PyModel {
        PyModel(self.0.model.clone())
    }

    #[getter]
    fn deadline(&self) -> Work {
        self.0.deadline
    }

    #[getter]
    fn period(&self) -> Work {
        self.0.period
    }

    #[getter]
    fn heavy(&self) -> bool {
        self.0.class() == TaskClass::Heavy
    }

    fn utilization(&self) -> f64 {
        self.0.utilization()
    }

    fn __repr__(&self) -> String {
        format!(
            "Task(C={}, L={}, D={}, T={})",
            self.0.total_work(),
            self.0.longest(),
            self.0.deadline,
            self.0.period
        )
    }
}

#[pyclass(name = "SchedResult", module = "dagbound", frozen, get_all)]
struct PySchedResult {
    accepted: bool,
    heavy_cores: u64,
    heavy_allocation: Vec<(usize, u64)>,
    light_partition: Vec<Vec<usize>>,
    reason: Option<String>,
}

#[pymethods]
impl PySchedResult {
    fn __repr__(&self) -> String {
        format!("SchedResult(accepted={}, heavy_cores={})", self.accepted, self.heavy_cores)
    }
}

/// Federated test; `method` is `"fed"` (Graham sizing) or `"our"` (multi-path sizing).
#[pyfunction]
fn schedulable(tasks: Vec<PyTask>, cores: usize, method: &str) -> PyResult<PySchedResult> {
    let method: Method = method.parse().map_err(err)?;
    let ts = federated::TaskSet { tasks: tasks.into_iter().map(|t| t.0).collect() };
    let r = federated::schedulable(&ts, cores, method);
    Ok(PySchedResult {
        accepted: r.accepted,
        heavy_cores: r.heavy_cores,
        heavy_allocation: r.heavy_allocation,
        light_partition: r.light_partition,
        reason: r.reason,
    })
}

/// Random normalized DAG; sample `index` of the stream seeded by `seed`.
#[pyfunction]
#[pyo3(signature = (seed = 0, index = 0, nvertex = None, pf = None))]
fn gen_dag(seed: u64, index: u64, nvertex: Option<(usize, usize)>, pf: Option<(f64, f64)>) -> PyResult<PyDag> {
    let mut params = GenParams { seed, ..GenParams::default() };
    if let Some(n) = nvertex {
        params.nvertex_range = n;
    }
    if let Some(p) = pf {
        params.pf_range = p;
    }
    params.validate().map_err(err)?;
    Ok(PyDag(taskgen::gen_dag(&params, &mut params.rng(index))))
}

#[pymodule]
#[pyo3(name = "dagbound")]
fn dagbound_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDag>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyTask>()?;
    m.add_class::<PySchedResult>()?;
    m.add_function(wrap_pyfunction!(graham_bound, m)?)?;
    m.add_function(wrap_pyfunction!(multipath_bound, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_max_makespan, m)?)?;
    m.add_function(wrap_pyfunction!(schedulable, m)?)?;
    m.add_function(wrap_pyfunction!(gen_dag, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
