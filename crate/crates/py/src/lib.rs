//! Python bindings for the adoption model.

use adoptcone as core;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::NonConvergence { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(name = "WorkerJob", frozen, from_py_object)]
#[derive(Clone)]
struct PyWorkerJob(core::WorkerJob);

#[pymethods]
impl PyWorkerJob {
    #[new]
    #[pyo3(signature = (theta, s, sigma, gamma, budget = 1.0))]
    fn new(theta: Vec<f64>, s: Vec<f64>, sigma: f64, gamma: f64, budget: f64) -> PyResult<Self> {
        core::WorkerJob::new(theta, s, sigma, gamma, budget).map(Self).map_err(err)
    }

    #[getter]
    fn theta(&self) -> Vec<f64> {
        self.0.theta().to_vec()
    }

    #[getter]
    fn s(&self) -> Vec<f64> {
        self.0.skills().to_vec()
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma()
    }

    #[getter]
    fn budget(&self) -> f64 {
        self.0.budget()
    }

    fn __len__(&self) -> usize {
        self.0.dim()
    }

    fn __repr__(&self) -> String {
        format!(
            "WorkerJob(theta={:?}, s={:?}, sigma={}, gamma={}, budget={})",
            self.0.theta(),
            self.0.skills(),
            self.0.sigma(),
            self.0.gamma(),
            self.0.budget()
        )
    }
}

/// A technology direction `t` (normalized on construction) and capability `chi`.
#[pyclass(name = "Technology", frozen, from_py_object)]
#[derive(Clone)]
struct PyTechnology(core::Technology);

#[pymethods]
impl PyTechnology {
    #[new]
    fn new(t: Vec<f64>, chi: f64) -> PyResult<Self> {
        core::Technology::from_unnormalized(&t, chi).map(Self).map_err(err)
    }

    #[getter]
    fn t(&self) -> Vec<f64> {
        self.0.t.to_vec()
    }

    #[getter]
    fn chi(&self) -> f64 {
        self.0.chi
    }

    fn __repr__(&self) -> String {
        format!("Technology(t={:?}, chi={})", self.0.t.as_slice(), self.0.chi)
    }
}

#[pyclass(name = "AutarkySolution", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyAutarky {
    x_a: Vec<f64>,
    p_a: Vec<f64>,
    phi: f64,
    output: f64,
    rho_a: f64,
    shares: Vec<f64>,
}

#[pyclass(name = "ThresholdPair", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyThresholds {
    chi0: f64,
    c: f64,
    chi100: f64,
    collinear: bool,
}

#[pyclass(name = "AdoptionSolution", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyAdoption {
    lambda_star: f64,
    x_h: Vec<f64>,
    z_star: Vec<f64>,
    output: f64,
    p_star: Vec<f64>,
    regime: String,
    chi0: f64,
    chi100: f64,
}

#[pyclass(name = "MultiTechSolution", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyMulti {
    lambdas: Vec<f64>,
    x_h: Vec<f64>,
    z_star: Vec<f64>,
    output: f64,
    p_star: Vec<f64>,
    rho_k: f64,
    gap: f64,
    iterations: usize,
}

#[pyclass(name = "MeasureEstimate", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyMeasure {
    measure: f64,
    standard_error: f64,
    samples: usize,
}

#[pyfunction]
fn ces_output(x: Vec<f64>, w: &PyWorkerJob) -> PyResult<f64> {
    core::ces_output(&x, &w.0).map(|e| e.value).map_err(err)
}

#[pyfunction]
fn cet_cost(x: Vec<f64>, w: &PyWorkerJob) -> PyResult<f64> {
    core::cet_cost(&x, &w.0).map(|e| e.value).map_err(err)
}

#[pyfunction]
fn unit_revenue(p: Vec<f64>, w: &PyWorkerJob) -> PyResult<f64> {
    core::unit_revenue(&p, &w.0).map_err(err)
}

#[pyfunction]
fn revenue_maximizer(p: Vec<f64>, w: &PyWorkerJob) -> PyResult<Vec<f64>> {
    core::revenue_maximizer(&p, &w.0).map(|x| x.into_inner()).map_err(err)
}

#[pyfunction]
fn solve_autarky(w: &PyWorkerJob) -> PyAutarky {
    let a = core::solve_autarky(&w.0);
    PyAutarky {
        x_a: a.x_a.into_inner(),
        p_a: a.p_a.into_inner(),
        phi: a.phi,
        output: a.output,
        rho_a: a.rho_a,
        shares: a.shares,
    }
}

#[pyfunction]
fn threshold_pair(t: Vec<f64>, w: &PyWorkerJob) -> PyResult<PyThresholds> {
    let t = core::UnitVector::normalize(&t).map_err(err)?;
    let p = core::threshold_pair(&t, &w.0).map_err(err)?;
    Ok(PyThresholds {
        chi0: p.chi0,
        c: p.c,
        chi100: p.chi100,
        collinear: p.collinear,
    })
}

#[pyfunction]
#[pyo3(signature = (tech, w, lambda_tolerance = 1e-10))]
fn optimal_intensity(py: Python<'_>, tech: &PyTechnology, w: &PyWorkerJob, lambda_tolerance: f64) -> PyResult<PyAdoption> {
    let options = core::IntensityOptions {
        lambda_tolerance,
        ..Default::default()
    };
    let s = py
        .detach(|| core::optimal_intensity_with(&tech.0, &w.0, &options))
        .map_err(err)?;
    Ok(PyAdoption {
        lambda_star: s.lambda_star,
        x_h: s.x_h.into_inner(),
        z_star: s.z_star.into_inner(),
        output: s.output,
        p_star: s.p_star.into_inner(),
        regime: s.regime.as_str().to_string(),
        chi0: s.chi0,
        chi100: s.chi100,
    })
}

#[pyfunction]
fn solve_multi(py: Python<'_>, w: &PyWorkerJob, techs: Vec<PyTechnology>) -> PyResult<PyMulti> {
    let techs: Vec<core::Technology> = techs.into_iter().map(|t| t.0).collect();
    let s = py.detach(|| core::solve_multi(&w.0, &techs)).map_err(err)?;
    Ok(PyMulti {
        lambdas: s.lambdas,
        x_h: s.x_h.into_inner(),
        z_star: s.z_star.into_inner(),
        output: s.output,
        p_star: s.p_star.into_inner(),
        rho_k: s.rho_k_at_p_star,
        gap: s.gap,
        iterations: s.iterations,
    })
}

/// Cone half-angle at capability `chi`, or `None` below `ϱ(p_A)`.
#[pyfunction]
fn half_angle(w: &PyWorkerJob, chi: f64) -> PyResult<Option<f64>> {
    Ok(core::half_angle(&core::ConeSpec::for_worker(&w.0, chi).map_err(err)?))
}

#[pyfunction]
fn in_cone(t: Vec<f64>, w: &PyWorkerJob, chi: f64) -> PyResult<bool> {
    let t = core::UnitVector::normalize(&t).map_err(err)?;
    core::in_cone(&t, &core::ConeSpec::for_worker(&w.0, chi).map_err(err)?).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (w, chi, samples = 100_000, seed = 0))]
fn adoption_measure(py: Python<'_>, w: &PyWorkerJob, chi: f64, samples: usize, seed: u64) -> PyResult<PyMeasure> {
    let cone = core::ConeSpec::for_worker(&w.0, chi).map_err(err)?;
    let m = py.detach(|| core::adoption_measure(&cone, samples, seed)).map_err(err)?;
    Ok(PyMeasure {
        measure: m.measure,
        standard_error: m.standard_error,
        samples: m.samples,
    })
}

#[pymodule]
fn adoptcone_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWorkerJob>()?;
    m.add_class::<PyTechnology>()?;
    m.add_class::<PyAutarky>()?;
    m.add_class::<PyThresholds>()?;
    m.add_class::<PyAdoption>()?;
    m.add_class::<PyMulti>()?;
    m.add_class::<PyMeasure>()?;
    m.add_function(wrap_pyfunction!(ces_output, m)?)?;
    m.add_function(wrap_pyfunction!(cet_cost, m)?)?;
    m.add_function(wrap_pyfunction!(unit_revenue, m)?)?;
    m.add_function(wrap_pyfunction!(revenue_maximizer, m)?)?;
    m.add_function(wrap_pyfunction!(solve_autarky, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_pair, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_intensity, m)?)?;
    m.add_function(wrap_pyfunction!(solve_multi, m)?)?;
    m.add_function(wrap_pyfunction!(half_angle, m)?)?;
    m.add_function(wrap_pyfunction!(in_cone, m)?)?;
    m.add_function(wrap_pyfunction!(adoption_measure, m)?)?;
    Ok(())
}
