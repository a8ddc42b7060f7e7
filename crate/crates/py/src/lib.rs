//! Python bindings: parameters, rates, the driven squeezing run and the
//! oracle suites.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use quasidamp::dynamics::{self, DriveConfig, DynamicsError, SqueezingPoint, SqueezingSummary};
use quasidamp::model::{self, ModelError, PhysicalParams};
use quasidamp::oracle::{self, Suite};
use quasidamp::rates::{self, Channel, RateError, RateQuery, RateResult};

fn model_err(e: ModelError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rate_err(e: RateError) -> PyErr {
    match e {
        RateError::Model(_) | RateError::Momentum(_) | RateError::WrongChannel { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn dynamics_err(e: DynamicsError) -> PyErr {
    match e {
        DynamicsError::Domain { .. } | DynamicsError::Model(_) => {
            PyValueError::new_err(e.to_string())
        }
        DynamicsError::Rate(r) => rate_err(r),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_channel(s: &str) -> PyResult<Channel> {
    match s {
        "single-level" => Ok(Channel::SingleLevel),
        "two-level" => Ok(Channel::TwoLevel),
        _ => Err(PyValueError::new_err(format!(
            "channel must be 'single-level' or 'two-level', got {s:?}"
        ))),
    }
}

/// Condensate parameters in SI units. Defaults are the sodium preset.
#[pyclass(name = "PhysicalParams", module = "quasidamp", from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: PhysicalParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (
        scattering_length = 2.8e-9,
        atomic_mass = model::SODIUM_23_MASS_KG,
        condensate_density = 1e20,
        volume = 1e-14,
        temperature = 0.0,
        a_bc = None,
    ))]
    fn new(
        scattering_length: f64,
        atomic_mass: f64,
        condensate_density: f64,
        volume: f64,
        temperature: f64,
        a_bc: Option<f64>,
    ) -> PyResult<Self> {
        let mut inner = PhysicalParams::new(
            scattering_length,
            atomic_mass,
            condensate_density,
            volume,
            temperature,
        )
        .map_err(model_err)?;
        if let Some(a) = a_bc {
            inner = inner.with_two_level(a);
            inner.validate().map_err(model_err)?;
        }
        Ok(Self { inner })
    }

    #[staticmethod]
    fn sodium_paper() -> Self {
        Self {
            inner: PhysicalParams::sodium_paper(),
        }
    }

    #[getter]
    fn scattering_length(&self) -> f64 {
        self.inner.scattering_length
    }
    #[getter]
    fn atomic_mass(&self) -> f64 {
        self.inner.atomic_mass
    }
    #[getter]
    fn condensate_density(&self) -> f64 {
        self.inner.condensate_density
    }
    #[getter]
    fn atom_count(&self) -> f64 {
        self.inner.atom_count
    }
    #[getter]
    fn temperature(&self) -> f64 {
        self.inner.temperature
    }
    #[getter]
    fn a_bc(&self) -> Option<f64> {
        self.inner.two_level.map(|t| t.a_bc)
    }

    /// (k0 in 1/m, omega0 in 1/s).
    fn units(&self) -> PyResult<(f64, f64)> {
        let u = model::derive_units(&self.inner).map_err(model_err)?;
        Ok((u.k0, u.omega0))
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "PhysicalParams(scattering_length={:e}, atomic_mass={:e}, condensate_density={:e}, temperature={:e}, a_bc={:?})",
            p.scattering_length, p.atomic_mass, p.condensate_density, p.temperature,
            p.two_level.map(|t| t.a_bc)
        )
    }
}

#[pyclass(name = "BogoliubovMode", module = "quasidamp", frozen, get_all)]
struct PyMode {
    kbar: f64,
    omega_bar: f64,
    u: f64,
    v: f64,
    alpha: f64,
}

/// Bogoliubov mode at kbar (units of k0).
#[pyfunction]
fn bogoliubov_mode(kbar: f64) -> PyResult<PyMode> {
    let m = model::bogoliubov_mode(kbar).map_err(model_err)?;
    Ok(PyMode {
        kbar: m.kbar,
        omega_bar: m.omega_bar,
        u: m.u,
        v: m.v,
        alpha: m.alpha,
    })
}

#[pyclass(name = "RateResult", module = "quasidamp", frozen, get_all)]
struct PyRates {
    gamma_beliaev: f64,
    gamma_landau: f64,
    gamma_total: f64,
    quadrature_error_estimate: f64,
    omega_q: f64,
    kinematic_window: Option<(f64, f64)>,
    landau_window: Option<(f64, f64)>,
}

impl From<RateResult> for PyRates {
    fn from(r: RateResult) -> Self {
        Self {
            gamma_beliaev: r.gamma_beliaev,
            gamma_landau: r.gamma_landau,
            gamma_total: r.gamma_total,
            quadrature_error_estimate: r.quadrature_error_estimate,
            omega_q: r.omega_q,
            kinematic_window: r.kinematic_window,
            landau_window: r.landau_window,
        }
    }
}

#[pymethods]
impl PyRates {
    fn __repr__(&self) -> String {
        format!(
            "RateResult(gamma_beliaev={:e}, gamma_landau={:e}, gamma_total={:e})",
            self.gamma_beliaev, self.gamma_landau, self.gamma_total
        )
    }
}

/// Beliaev and Landau widths (1/s) of the mode at qbar.
#[pyfunction]
#[pyo3(signature = (qbar, temperature = 0.0, channel = "single-level", params = None))]
fn decay_rates(
    py: Python<'_>,
    qbar: f64,
    temperature: f64,
    channel: &str,
    params: Option<PyParams>,
) -> PyResult<PyRates> {
    let channel = parse_channel(channel)?;
    let params = params.map_or_else(PhysicalParams::sodium_paper, |p| p.inner);
    let query = RateQuery::new(qbar, temperature, channel, params);
    py.detach(|| rates::decay_rates(&query))
        .map(PyRates::from)
        .map_err(rate_err)
}

/// Closed-form small-q Beliaev width for the channel.
#[pyfunction]
#[pyo3(signature = (qbar, channel = "single-level", params = None))]
fn beliaev_asymptote(qbar: f64, channel: &str, params: Option<PyParams>) -> PyResult<f64> {
    let channel = parse_channel(channel)?;
    let params = params.map_or_else(PhysicalParams::sodium_paper, |p| p.inner);
    rates::beliaev_asymptote(qbar, channel, &params).map_err(rate_err)
}

fn point_dict<'py>(py: Python<'py>, p: &SqueezingPoint) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", p.t)?;
    d.set_item("n_a", p.n_a)?;
    d.set_item("n_b_plus", p.n_b_plus)?;
    d.set_item("n_b_minus", p.n_b_minus)?;
    d.set_item("xi1", p.xi1)?;
    d.set_item("xi2", p.xi2)?;
    d.set_item("xi3", p.xi3)?;
    d.set_item("depletion_valid", p.depletion_valid)?;
    Ok(d)
}

/// Driven pair creation from the vacuum. Returns a dict with `gamma`,
/// `points` (one dict per output time) and `summary`. `gamma` defaults to
/// the T = 0 Beliaev width at the recoil momentum.
#[pyfunction]
#[pyo3(signature = (
    params = None,
    rabi_effective = 1e3,
    qbar_recoil = 5.0,
    t_max = 6e-3,
    dt_output = 1e-5,
    gamma = None,
))]
fn run_squeezing<'py>(
    py: Python<'py>,
    params: Option<PyParams>,
    rabi_effective: f64,
    qbar_recoil: f64,
    t_max: f64,
    dt_output: f64,
    gamma: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let params = params.map_or_else(PhysicalParams::sodium_paper, |p| p.inner);
    let drive = DriveConfig {
        rabi_effective,
        qbar_recoil,
        gamma_override: gamma,
        t_max,
        dt_output,
    };
    let run = py
        .detach(|| dynamics::run_squeezing(&params, &drive))
        .map_err(dynamics_err)?;
    let s = SqueezingSummary::from_points(&run.points);
    let out = PyDict::new(py);
    out.set_item("gamma", run.gamma)?;
    let points = run
        .points
        .iter()
        .map(|p| point_dict(py, p))
        .collect::<PyResult<Vec<_>>>()?;
    out.set_item("points", points)?;
    let summary = PyDict::new(py);
    summary.set_item("xi3_min", s.xi3_min)?;
    summary.set_item("t_at_xi3_min_s", s.t_at_xi3_min_s)?;
    summary.set_item("crossing_time_s", s.crossing_time_s)?;
    out.set_item("summary", summary)?;
    Ok(out)
}

/// Runs the oracle suites ("markov", "wick" or "all"); one dict per verdict.
#[pyfunction]
#[pyo3(signature = (which = "all"))]
fn run_oracle<'py>(py: Python<'py>, which: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let suite = match which {
        "markov" => Suite::Markov,
        "wick" => Suite::Wick,
        "all" => Suite::All,
        _ => {
            return Err(PyValueError::new_err(format!(
                "which must be 'markov', 'wick' or 'all', got {which:?}"
            )))
        }
    };
    let verdicts = py.detach(|| oracle::run_suite(suite));
    verdicts
        .iter()
        .map(|v| {
            let d = PyDict::new(py);
            d.set_item("name", &v.name)?;
            d.set_item("expected", v.expected)?;
            d.set_item("observed", v.observed)?;
            d.set_item("tolerance", v.tolerance)?;
            d.set_item("pass", v.pass)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
#[pyo3(name = "quasidamp")]
fn quasidamp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyMode>()?;
    m.add_class::<PyRates>()?;
    m.add_function(wrap_pyfunction!(bogoliubov_mode, m)?)?;
    m.add_function(wrap_pyfunction!(decay_rates, m)?)?;
    m.add_function(wrap_pyfunction!(beliaev_asymptote, m)?)?;
    m.add_function(wrap_pyfunction!(run_squeezing, m)?)?;
    m.add_function(wrap_pyfunction!(run_oracle, m)?)?;
    Ok(())
}
