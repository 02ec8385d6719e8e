//! Python bindings: `import rse1d`.
//!
//! Wavenumbers cross the boundary as Python `complex`.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rse1d_core::analysis::{self, QFactor};
use rse1d_core::basis::{self as core_basis, BasisSet, StateClass};
use rse1d_core::exact::{self, TripleWellParams};
use rse1d_core::rse::{self as core_rse, DeltaSpike, RseSolution};
use rse1d_core::{Error, C64};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::SpikeOutOfRange { .. } | Error::EmptyStates => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn geometry(a: f64, gamma: f64) -> PyResult<core_basis::SystemGeometry> {
    core_basis::SystemGeometry::new(a, gamma).map_err(to_py)
}

/// Resonant states of the double well `-gamma [delta(x-a) + delta(x+a)]`
/// with `|k| <= radius`.
#[pyclass(frozen, module = "rse1d")]
pub struct Basis {
    inner: Arc<BasisSet>,
}

#[pymethods]
impl Basis {
    /// Give either `radius` or `target_m` (smallest complete disk holding at
    /// least that many states).
    #[new]
    #[pyo3(signature = (a, gamma, radius=None, target_m=None))]
    fn new(a: f64, gamma: f64, radius: Option<f64>, target_m: Option<usize>) -> PyResult<Self> {
        let geom = geometry(a, gamma)?;
        let radius = match (radius, target_m) {
            (Some(r), None) => r,
            (None, Some(m)) => core_basis::radius_for_size(geom, m).map_err(to_py)?,
            _ => return Err(PyValueError::new_err("give exactly one of radius, target_m")),
        };
        let inner = core_basis::build_basis(geom, radius).map_err(to_py)?;
        Ok(Self { inner: Arc::new(inner) })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Basis(a={}, gamma={}, radius={}, states={})",
            self.inner.geometry.a,
            self.inner.geometry.gamma,
            self.inner.radius,
            self.inner.len()
        )
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.inner.radius
    }

    #[getter]
    fn wavenumbers(&self) -> Vec<C64> {
        self.inner.wavenumbers()
    }

    /// `"bound"`, `"antibound"` or `"normal"` per state.
    #[getter]
    fn classes(&self) -> Vec<&'static str> {
        self.inner.states.iter().map(|s| s.class.name()).collect()
    }

    #[getter]
    fn parities(&self) -> Vec<&'static str> {
        self.inner.states.iter().map(|s| s.parity.name()).collect()
    }

    /// Winding count equals found count (plus zeros at the origin) for both parities.
    #[getter]
    fn audit_passed(&self) -> bool {
        self.inner.audit.even.passed() && self.inner.audit.odd.passed()
    }

    fn count(&self, class: &str) -> PyResult<usize> {
        Ok(self.inner.count_class(parse_class(class)?))
    }

    fn wavefunction(&self, index: usize, x: f64) -> PyResult<C64> {
        let s = self
            .inner
            .states
            .get(index)
            .ok_or_else(|| PyValueError::new_err(format!("no state {index}")))?;
        Ok(core_basis::wavefunction(s, x, &self.inner.geometry))
    }
}

fn parse_class(class: &str) -> PyResult<StateClass> {
    match class {
        "bound" => Ok(StateClass::Bound),
        "antibound" => Ok(StateClass::Antibound),
        "normal" => Ok(StateClass::Normal),
        _ => Err(PyValueError::new_err(format!("unknown class {class:?}"))),
    }
}

/// A set of delta spikes `-sum beta_j delta(x - b_j)` inside `(-a, a)`.
#[pyclass(frozen, skip_from_py_object, module = "rse1d")]
#[derive(Clone)]
pub struct Perturbation {
    inner: core_rse::Perturbation,
}

#[pymethods]
impl Perturbation {
    /// `spikes` is a list of `(position, strength)` pairs.
    #[new]
    fn new(spikes: Vec<(f64, f64)>) -> Self {
        Self {
            inner: core_rse::Perturbation::new(spikes.into_iter().map(|(b, beta)| DeltaSpike::new(b, beta))),
        }
    }

    /// Inner spikes of an `n`-well lattice spanning `[-a, a]`.
    #[staticmethod]
    fn lattice(n: usize, strength: f64, a: f64) -> PyResult<Self> {
        Ok(Self {
            inner: core_rse::Perturbation::lattice(n, strength, a).map_err(to_py)?,
        })
    }

    #[getter]
    fn spikes(&self) -> Vec<(f64, f64)> {
        self.inner.spikes().iter().map(|s| (s.position, s.strength)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Perturbation({:?})", self.spikes())
    }
}

/// Eigenvalues and eigenvectors of the RSE matrix.
#[pyclass(frozen, module = "rse1d")]
pub struct Solution {
    inner: RseSolution,
}

#[pymethods]
impl Solution {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn kappas(&self) -> Vec<C64> {
        self.inner.kappas.clone()
    }

    #[getter]
    fn classes(&self) -> Vec<&'static str> {
        (0..self.inner.len()).map(|nu| self.inner.class(nu).name()).collect()
    }

    #[getter]
    fn residuals(&self) -> Vec<f64> {
        self.inner.residuals.clone()
    }

    #[getter]
    fn h_norm(&self) -> f64 {
        self.inner.h_norm
    }

    /// Expansion coefficients of state `nu`, normalised to `sum c^2 = 1`.
    fn coefficients(&self, nu: usize) -> PyResult<Vec<C64>> {
        self.inner
            .coefficients
            .get(nu)
            .cloned()
            .ok_or_else(|| PyValueError::new_err(format!("no state {nu}")))
    }

    fn count(&self, class: &str) -> PyResult<usize> {
        Ok(self.inner.count_class(parse_class(class)?))
    }

    fn wavefunction(&self, nu: usize, x: f64) -> PyResult<C64> {
        if nu >= self.inner.len() {
            return Err(PyValueError::new_err(format!("no state {nu}")));
        }
        core_rse::perturbed_wavefunction(&self.inner, nu, x).map_err(to_py)
    }
}

/// Diagonalises the RSE matrix of `perturbation` in `basis`.
#[pyfunction]
fn solve(py: Python<'_>, basis: &Basis, perturbation: &Perturbation) -> PyResult<Solution> {
    let b = basis.inner.clone();
    let p = perturbation.inner.clone();
    let inner = py.detach(move || core_rse::solve_with_basis(b, &p)).map_err(to_py)?;
    Ok(Solution { inner })
}

/// Newton-polished roots of the triple-well secular equation with `|kappa| <= radius`.
#[pyfunction]
#[pyo3(signature = (a, gamma, b, beta, radius, seeds=Vec::new()))]
fn exact_triple(a: f64, gamma: f64, b: f64, beta: f64, radius: f64, seeds: Vec<C64>) -> PyResult<Vec<C64>> {
    let p = TripleWellParams::new(geometry(a, gamma)?, b, beta).map_err(to_py)?;
    let found = exact::find_exact_triple(&p, radius, &seeds).map_err(to_py)?;
    if !found.audit.is_some_and(|a| a.passed()) {
        return Err(PyRuntimeError::new_err(format!("root audit failed: {:?}", found.audit)));
    }
    Ok(found.roots)
}

/// Allowed Kronig-Penney bands `[(k_lo, k_hi), ...]` below `k_max`.
#[pyfunction]
fn allowed_bands(gamma: f64, d: f64, k_max: f64) -> PyResult<Vec<(f64, f64)>> {
    Ok(exact::allowed_bands(gamma, d, k_max).map_err(to_py)?.bands)
}

/// One-to-one nearest matching; returns `(candidate, reference, rel_error)` triples.
#[pyfunction]
fn match_states(candidates: Vec<C64>, references: Vec<C64>, max_dist: f64) -> Vec<(C64, C64, f64)> {
    analysis::match_states(&candidates, &references, max_dist)
        .pairs
        .into_iter()
        .map(|p| (p.kappa_rse, p.kappa_ref, p.rel_error))
        .collect()
}

#[pyfunction]
fn mirror_defect(kappas: Vec<C64>) -> f64 {
    analysis::mirror_defect(&kappas)
}

#[pyfunction]
fn asymptotic_period(kappas: Vec<C64>, window_radius: f64) -> Option<usize> {
    analysis::asymptotic_period(&kappas, window_radius)
}

/// `|Re kappa / (2 Im kappa)|`; `inf` on the real axis.
#[pyfunction]
fn q_factor(kappa: C64) -> f64 {
    match analysis::q_factor(kappa) {
        QFactor::Finite(q) => q,
        QFactor::Infinite => f64::INFINITY,
    }
}

#[pymodule]
fn rse1d(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Basis>()?;
    m.add_class::<Perturbation>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(exact_triple, m)?)?;
    m.add_function(wrap_pyfunction!(allowed_bands, m)?)?;
    m.add_function(wrap_pyfunction!(match_states, m)?)?;
    m.add_function(wrap_pyfunction!(mirror_defect, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_period, m)?)?;
    m.add_function(wrap_pyfunction!(q_factor, m)?)?;
    Ok(())
}
