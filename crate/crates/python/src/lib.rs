//! Python bindings: configuration, single runs, sweeps, the exact solution and
//! the corrector utilities.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use layerfv::cfvm::{run_manufactured, RunStatus};
use layerfv::correctors::{self, BoundaryTrace, CorrectorEval, ScalingQuantity};
use layerfv::report::{self, OutputFormat, RowStatus};
use layerfv::{mms, LayerError, Scheme};

fn to_py(e: LayerError) -> PyErr {
    match e {
        LayerError::InvalidParameter { .. }
        | LayerError::InvalidConfig(_)
        | LayerError::InvalidGrid(_)
        | LayerError::Domain(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "None".into(), |x| x.to_string())
}

fn parse_scheme(s: &str) -> PyResult<Scheme> {
    Scheme::parse(s).ok_or_else(|| PyValueError::new_err(format!("unknown scheme `{s}` (expected cfvm or nfvm)")))
}

/// Run parameters; defaults are the reproduction configuration.
#[pyclass(name = "SimConfig", from_py_object)]
#[derive(Clone)]
struct PySimConfig {
    inner: layerfv::SimConfig,
}

#[pymethods]
impl PySimConfig {
    #[new]
    #[pyo3(signature = (eps=1e-2, alpha=1.0, dt=1e-2, t_end=1.0, theta=1.0, scheme="nfvm", lin_tol=1e-10))]
    fn new(eps: f64, alpha: f64, dt: f64, t_end: f64, theta: f64, scheme: &str, lin_tol: f64) -> PyResult<Self> {
        let inner = layerfv::SimConfig {
            eps,
            alpha,
            dt,
            t_end,
            theta,
            scheme: parse_scheme(scheme)?,
            lin_tol,
            ..layerfv::SimConfig::default()
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.inner.eps
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }
    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }
    #[getter]
    fn t_end(&self) -> f64 {
        self.inner.t_end
    }
    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }
    #[getter]
    fn scheme(&self) -> &'static str {
        self.inner.scheme.name()
    }
    #[getter]
    fn lin_tol(&self) -> f64 {
        self.inner.lin_tol
    }

    /// Number of time steps to `t_end`.
    fn n_steps(&self) -> usize {
        self.inner.n_steps()
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "SimConfig(eps={}, alpha={}, dt={}, t_end={}, theta={}, scheme='{}', lin_tol={})",
            c.eps, c.alpha, c.dt, c.t_end, c.theta, c.scheme, c.lin_tol
        )
    }
}

/// Uniform channel mesh.
#[pyclass(name = "GridSpec", frozen)]
struct PyGridSpec {
    inner: layerfv::GridSpec,
}

#[pymethods]
impl PyGridSpec {
    /// `m x n x l` cells on `(0, lx) x (0, ly) x (0, 1)`.
    #[new]
    #[pyo3(signature = (m, n, l, lx=mms::PERIOD, ly=mms::PERIOD))]
    fn new(m: usize, n: usize, l: usize, lx: f64, ly: f64) -> PyResult<Self> {
        Ok(Self { inner: layerfv::GridSpec::with_extent(m, n, l, lx, ly).map_err(to_py)? })
    }

    #[getter]
    fn shape(&self) -> (usize, usize, usize) {
        (self.inner.m, self.inner.n, self.inner.l)
    }
    #[getter]
    fn spacing(&self) -> (f64, f64, f64) {
        (self.inner.dx, self.inner.dy, self.inner.dz)
    }
    #[getter]
    fn extent(&self) -> (f64, f64, f64) {
        (self.inner.lx, self.inner.ly, self.inner.lz)
    }

    /// Centre of interior cell `(i, j, k)`, indices starting at 1.
    fn center(&self, i: usize, j: usize, k: usize) -> PyResult<(f64, f64, f64)> {
        let g = &self.inner;
        if !(1..=g.m).contains(&i) || !(1..=g.n).contains(&j) || !(1..=g.l).contains(&k) {
            return Err(PyValueError::new_err(format!("cell ({i}, {j}, {k}) is not an interior cell")));
        }
        Ok(g.center(i, j, k))
    }
}

/// Manufactured velocity/pressure pair with wall layers.
#[pyclass(name = "ExactSolution", frozen)]
struct PyExactSolution {
    inner: layerfv::ExactSolution,
}

#[pymethods]
impl PyExactSolution {
    #[new]
    #[pyo3(signature = (eps, alpha=1.0))]
    fn new(eps: f64, alpha: f64) -> PyResult<Self> {
        Ok(Self { inner: layerfv::ExactSolution::new(eps, alpha).map_err(to_py)? })
    }

    /// `(u, v, w, p)` at a point.
    fn eval(&self, x: f64, y: f64, z: f64, t: f64) -> (f64, f64, f64, f64) {
        let v = self.inner.eval(x, y, z, t);
        (v.u, v.v, v.w, v.p)
    }

    /// Body force that makes the pair an exact solution.
    fn forcing(&self, x: f64, y: f64, z: f64, t: f64) -> (f64, f64, f64) {
        let f = self.inner.forcing(x, y, z, t);
        (f[0], f[1], f[2])
    }
}

/// `(step, time, velocity norm, velocity error, pressure error)`.
type StepRecord = (usize, f64, f64, Option<f64>, Option<f64>);

/// Outcome of one manufactured-problem run.
#[pyclass(name = "RunResult", frozen, get_all)]
struct PyRunResult {
    /// "completed" or "blowup".
    status: String,
    /// Step at which the run blew up, if it did.
    blowup_step: Option<usize>,
    time: f64,
    velocity_error: Option<f64>,
    pressure_error: Option<f64>,
    history: Vec<StepRecord>,
}

#[pymethods]
impl PyRunResult {
    #[getter]
    fn blew_up(&self) -> bool {
        self.blowup_step.is_some()
    }

    fn __repr__(&self) -> String {
        format!(
            "RunResult(status='{}', time={}, velocity_error={}, pressure_error={})",
            self.status,
            self.time,
            opt(self.velocity_error),
            opt(self.pressure_error)
        )
    }
}

/// One row of a sweep.
#[pyclass(name = "ExperimentRow", from_py_object, get_all)]
#[derive(Clone)]
struct PyExperimentRow {
    n: usize,
    t: f64,
    eps: f64,
    scheme: String,
    vel_l2: Option<f64>,
    p_l2: Option<f64>,
    dt: f64,
    theta: f64,
    alpha: f64,
    status: String,
    wall_clock_s: f64,
}

impl From<&report::ExperimentRow> for PyExperimentRow {
    fn from(r: &report::ExperimentRow) -> Self {
        Self {
            n: r.n,
            t: r.t,
            eps: r.eps,
            scheme: r.scheme.name().into(),
            vel_l2: r.vel_l2,
            p_l2: r.p_l2,
            dt: r.dt,
            theta: r.theta,
            alpha: r.alpha,
            status: r.status.name().into(),
            wall_clock_s: r.wall_clock_s,
        }
    }
}

impl PyExperimentRow {
    fn to_core(&self) -> PyResult<report::ExperimentRow> {
        Ok(report::ExperimentRow {
            n: self.n,
            t: self.t,
            eps: self.eps,
            scheme: parse_scheme(&self.scheme)?,
            vel_l2: self.vel_l2,
            p_l2: self.p_l2,
            dt: self.dt,
            theta: self.theta,
            alpha: self.alpha,
            status: match self.status.as_str() {
                "ok" => RowStatus::Ok,
                "blowup" => RowStatus::Blowup,
                s => return Err(PyValueError::new_err(format!("unknown status `{s}`"))),
            },
            wall_clock_s: self.wall_clock_s,
        })
    }
}

#[pymethods]
impl PyExperimentRow {
    fn __repr__(&self) -> String {
        format!(
            "ExperimentRow(N={}, eps={:e}, scheme='{}', vel_l2={}, p_l2={}, status='{}')",
            self.n,
            self.eps,
            self.scheme,
            opt(self.vel_l2),
            opt(self.p_l2),
            self.status
        )
    }
}

/// Runs the manufactured problem on the `n^3` unit-period grid.
#[pyfunction]
#[pyo3(signature = (config, n=20))]
fn run(py: Python<'_>, config: PySimConfig, n: usize) -> PyResult<PyRunResult> {
    let cfg = config.inner;
    let res = py.detach(move || mms::grid(n).and_then(|g| run_manufactured(&cfg, &g))).map_err(to_py)?;
    let (status, blowup_step) = match res.status {
        RunStatus::Completed => ("completed", None),
        RunStatus::BlowUp { step, .. } => ("blowup", Some(step)),
    };
    Ok(PyRunResult {
        status: status.into(),
        blowup_step,
        time: res.state.time,
        velocity_error: res.final_velocity_error(),
        pressure_error: res.final_pressure_error(),
        history: res
            .history
            .iter()
            .map(|d| (d.step, d.time, d.velocity_norm, d.velocity_error, d.pressure_error))
            .collect(),
    })
}

/// Sweeps grids x viscosities x schemes; blow-ups become rows with status "blowup".
#[pyfunction]
#[pyo3(signature = (grids, eps_list, schemes=vec!["cfvm".to_string(), "nfvm".to_string()], config=None, jobs=None))]
fn run_table(
    py: Python<'_>,
    grids: Vec<usize>,
    eps_list: Vec<f64>,
    schemes: Vec<String>,
    config: Option<PySimConfig>,
    jobs: Option<usize>,
) -> PyResult<Vec<PyExperimentRow>> {
    let schemes = schemes.iter().map(|s| parse_scheme(s)).collect::<PyResult<Vec<_>>>()?;
    let base = config.map(|c| c.inner).unwrap_or_default();
    let rows = py.detach(move || report::run_table(&grids, &eps_list, &schemes, &base, jobs)).map_err(to_py)?;
    Ok(rows.iter().map(PyExperimentRow::from).collect())
}

/// Renders rows as "csv" or "markdown".
#[pyfunction]
#[pyo3(signature = (rows, format="csv"))]
fn render(rows: Vec<PyExperimentRow>, format: &str) -> PyResult<String> {
    let format = match format {
        "csv" => OutputFormat::Csv,
        "markdown" => OutputFormat::Markdown,
        f => return Err(PyValueError::new_err(format!("unknown format `{f}` (expected csv or markdown)"))),
    };
    let rows = rows.iter().map(PyExperimentRow::to_core).collect::<PyResult<Vec<_>>>()?;
    report::render(&rows, format).map_err(to_py)
}

/// Parses CSV produced by `render`.
#[pyfunction]
fn parse_csv(text: &str) -> PyResult<Vec<PyExperimentRow>> {
    Ok(report::parse_csv(text).map_err(to_py)?.iter().map(PyExperimentRow::from).collect())
}

/// Power-law fit of a corrector norm in `eps`; returns `(norms, slope)`.
#[pyfunction]
#[pyo3(signature = (quantity, eps_list, t=1.0, alpha=1.0))]
fn scaling_study(quantity: &str, eps_list: Vec<f64>, t: f64, alpha: f64) -> PyResult<(Vec<f64>, f64)> {
    let q = ScalingQuantity::parse(quantity)
        .ok_or_else(|| PyValueError::new_err(format!("unknown quantity `{quantity}`")))?;
    let s = report::run_scaling_study(&eps_list, q, t, alpha).map_err(to_py)?;
    Ok((s.norms, s.slope))
}

/// Tangential corrector of a time-constant wall trace `(g1, g2)`.
#[pyfunction]
#[pyo3(signature = (eps, alpha, g1, g2, t, z))]
fn tangential_corrector(eps: f64, alpha: f64, g1: f64, g2: f64, t: f64, z: f64) -> PyResult<(f64, f64)> {
    let ce = CorrectorEval::new(eps, alpha).map_err(to_py)?;
    ce.exact_tangential_corrector(&BoundaryTrace::constant(g1, g2), t, 0.0, 0.0, z).map_err(to_py)
}

/// One-dimensional heat kernel.
#[pyfunction]
fn heat_kernel(t: f64, z: f64) -> PyResult<f64> {
    correctors::heat_kernel(t, z).map_err(to_py)
}

/// Corrector property suite: list of `(name, worst, tolerance, passed)`.
#[pyfunction]
fn verify_correctors(py: Python<'_>) -> PyResult<Vec<(String, f64, f64, bool)>> {
    let checks = py.detach(correctors::property_suite).map_err(to_py)?;
    Ok(checks.into_iter().map(|c| (c.name, c.worst, c.tolerance, c.passed)).collect())
}

#[pymodule]
fn layerfv_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySimConfig>()?;
    m.add_class::<PyGridSpec>()?;
    m.add_class::<PyExactSolution>()?;
    m.add_class::<PyRunResult>()?;
    m.add_class::<PyExperimentRow>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_table, m)?)?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    m.add_function(wrap_pyfunction!(parse_csv, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_study, m)?)?;
    m.add_function(wrap_pyfunction!(tangential_corrector, m)?)?;
    m.add_function(wrap_pyfunction!(heat_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(verify_correctors, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
