//! Python module `gaudin`: models, phase-space states, flows and the
//! verification suites. Matrices cross the boundary as nested lists of
//! complex numbers, row-major.

use gaudin_core::flows::{self, EvolveOptions, FlowCurve, Method};
use gaudin_core::model::{self, GaudinModel, HamiltonianSpec, MatrixJson, ModelJson, PhaseState, StateJson};
use gaudin_core::verify::{self, Suite};
use gaudin_core::{elliptic::EllipticCache, sample, Complex64, Error};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn numerical(e: &Error) -> bool {
    matches!(e, Error::NonFinite(_) | Error::Pole { .. } | Error::Resonant { .. } | Error::Singular(_))
}

fn to_py(e: Error) -> PyErr {
    error_with(&e, e.to_string())
}

fn error_with(e: &Error, msg: String) -> PyErr {
    if numerical(e) {
        PyArithmeticError::new_err(msg)
    } else {
        PyValueError::new_err(msg)
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn method(name: &str) -> PyResult<Method> {
    match name {
        "rk4" => Ok(Method::Rk4),
        "conjugation" => Ok(Method::Conjugation),
        _ => Err(PyValueError::new_err(format!("unknown method '{name}' (expected rk4 or conjugation)"))),
    }
}

fn matrices(ms: &[MatrixJson]) -> PyResult<Vec<gaudin_core::lie::CMatrix>> {
    ms.iter().map(|m| model::matrix_from_json(m).map_err(to_py)).collect()
}

fn hamiltonian_specs(hs: Vec<(Complex64, u32)>) -> PyResult<Vec<HamiltonianSpec>> {
    hs.into_iter()
        .map(|(p, d)| HamiltonianSpec::new(p, d).map_err(to_py))
        .collect()
}

/// Point `(phi_a, q, p, t)` of phase space.
#[pyclass(name = "State", module = "gaudin", from_py_object)]
#[derive(Clone)]
struct PyState {
    inner: PhaseState,
}

#[pymethods]
impl PyState {
    #[new]
    #[pyo3(signature = (phis, q=vec![], p=vec![], t=vec![]))]
    fn new(phis: Vec<MatrixJson>, q: Vec<Complex64>, p: Vec<Complex64>, t: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: PhaseState::new(matrices(&phis)?, q, p, t),
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let s: StateJson = serde_json::from_str(text).map_err(json_err)?;
        Ok(Self {
            inner: s.try_into().map_err(to_py)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&StateJson::from(self.inner.clone())).map_err(json_err)
    }

    #[getter]
    fn phis(&self) -> Vec<MatrixJson> {
        self.inner.phis.iter().map(model::matrix_to_json).collect()
    }

    #[getter]
    fn q(&self) -> Vec<Complex64> {
        self.inner.q.clone()
    }

    #[getter]
    fn p(&self) -> Vec<Complex64> {
        self.inner.p.clone()
    }

    #[getter]
    fn t(&self) -> Vec<f64> {
        self.inner.t.clone()
    }

    fn __repr__(&self) -> String {
        format!("State(points={}, q={:?}, t={:?})", self.inner.phis.len(), self.inner.q, self.inner.t)
    }
}

/// Rational or elliptic Gaudin model.
#[pyclass(name = "Model", module = "gaudin", frozen)]
struct PyModel {
    inner: GaudinModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn rational(
        m: usize,
        points: Vec<Complex64>,
        seeds: Vec<MatrixJson>,
        hamiltonians: Vec<(Complex64, u32)>,
    ) -> PyResult<Self> {
        let inner = GaudinModel::rational(m, points, matrices(&seeds)?, hamiltonian_specs(hamiltonians)?).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn elliptic(
        m: usize,
        tau: Complex64,
        points: Vec<Complex64>,
        seeds: Vec<MatrixJson>,
        hamiltonians: Vec<(Complex64, u32)>,
    ) -> PyResult<Self> {
        let inner = GaudinModel::elliptic(m, tau, points, matrices(&seeds)?, hamiltonian_specs(hamiltonians)?)
            .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let mj: ModelJson = serde_json::from_str(text).map_err(json_err)?;
        Ok(Self {
            inner: mj.build().map_err(to_py)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&ModelJson::from(&self.inner)).map_err(json_err)
    }

    #[getter]
    fn genus(&self) -> u8 {
        self.inner.genus()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn num_hamiltonians(&self) -> usize {
        self.inner.num_hamiltonians()
    }

    /// Random state on the residue constraint surface.
    fn random_state(&self, seed: u64) -> PyResult<PyState> {
        let mut rng = sample::rng(seed);
        Ok(PyState {
            inner: sample::random_state(&self.inner, &mut rng).map_err(to_py)?,
        })
    }

    #[pyo3(signature = (state, tol=1e-8))]
    fn validate_state(&self, state: &PyState, tol: f64) -> PyResult<()> {
        self.inner.validate_state(&state.inner, tol).map_err(to_py)
    }

    fn residue_sum_norm(&self, state: &PyState) -> PyResult<f64> {
        self.inner.residue_sum_norm(&state.inner).map_err(to_py)
    }

    fn orbit_elements(&self, state: &PyState) -> PyResult<Vec<MatrixJson>> {
        let ls = self.inner.orbit_elements(&state.inner).map_err(to_py)?;
        Ok(ls.iter().map(model::matrix_to_json).collect())
    }

    fn lax(&self, state: &PyState, z: Complex64) -> PyResult<MatrixJson> {
        Ok(model::matrix_to_json(&self.inner.lax(&state.inner, z).map_err(to_py)?))
    }

    fn m_matrix(&self, state: &PyState, i: usize, z: Complex64) -> PyResult<MatrixJson> {
        Ok(model::matrix_to_json(&self.inner.m_matrix(&state.inner, i, z).map_err(to_py)?))
    }

    fn hamiltonians(&self, state: &PyState) -> PyResult<Vec<Complex64>> {
        self.inner.hamiltonians(&state.inner).map_err(to_py)
    }

    fn poisson_bracket(&self, state: &PyState, i: usize, j: usize) -> PyResult<Complex64> {
        flows::poisson_bracket(&self.inner, &state.inner, i, j).map_err(to_py)
    }

    #[pyo3(signature = (state, i, h, method="rk4"))]
    fn step(&self, state: &PyState, i: usize, h: f64, method: &str) -> PyResult<PyState> {
        let inner = flows::step(&self.inner, &state.inner, i, h, self::method(method)?).map_err(to_py)?;
        Ok(PyState { inner })
    }

    /// Integrate along an axis-aligned multi-time polyline. Raises on a
    /// numerical failure; the message carries the last good time.
    #[pyo3(signature = (state, curve, h, method="rk4", project_residue_sum=false))]
    fn evolve(
        &self,
        state: &PyState,
        curve: Vec<Vec<f64>>,
        h: f64,
        method: &str,
        project_residue_sum: bool,
    ) -> PyResult<PyTrajectory> {
        let curve = FlowCurve::new(curve).map_err(to_py)?;
        let opts = EvolveOptions {
            method: self::method(method)?,
            project_residue_sum,
        };
        match flows::evolve(&self.inner, &state.inner, &curve, h, opts) {
            Ok(traj) => Ok(PyTrajectory {
                model: self.inner.clone(),
                inner: traj,
            }),
            Err(abort) => {
                let msg = format!("{} (last good time {:?})", abort.cause, abort.last_good_time());
                Err(error_with(&abort.cause, msg))
            }
        }
    }
}

/// Samples of one `Model.evolve` run.
#[pyclass(name = "Trajectory", module = "gaudin", frozen)]
struct PyTrajectory {
    model: GaudinModel,
    inner: flows::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    fn __len__(&self) -> usize {
        self.inner.samples.len()
    }

    fn times(&self) -> Vec<Vec<f64>> {
        self.inner.samples.iter().map(|s| s.state.t.clone()).collect()
    }

    fn states(&self) -> Vec<PyState> {
        self.inner
            .samples
            .iter()
            .map(|s| PyState { inner: s.state.clone() })
            .collect()
    }

    fn action(&self) -> PyResult<Complex64> {
        flows::action_along_curve(&self.model, &self.inner).map_err(to_py)
    }

    /// Diagnostics report as a JSON string.
    fn diagnostics(&self, z_samples: Vec<Complex64>) -> PyResult<String> {
        let report = flows::diagnostics(&self.model, &self.inner, &z_samples).map_err(to_py)?;
        serde_json::to_string(&report).map_err(json_err)
    }
}

/// `(wp, zeta, sigma)` at `z` for the lattice `Z + tau Z`.
#[pyfunction]
fn weierstrass(tau: Complex64, z: Complex64) -> PyResult<(Complex64, Complex64, Complex64)> {
    let cache = EllipticCache::new(tau).map_err(to_py)?;
    let w = cache.eval(z).map_err(to_py)?;
    Ok((w.wp, w.zeta, w.sigma))
}

/// Run a verification suite and return its report as a JSON string.
#[pyfunction]
#[pyo3(signature = (suite, seed=0))]
fn verify_suite(py: Python<'_>, suite: &str, seed: u64) -> PyResult<String> {
    let suite: Suite = suite.parse().map_err(to_py)?;
    let report = py.detach(|| verify::run(suite, seed));
    serde_json::to_string(&report).map_err(json_err)
}

#[pymodule]
pub fn gaudin(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(weierstrass, m)?)?;
    m.add_function(wrap_pyfunction!(verify_suite, m)?)?;
    Ok(())
}
