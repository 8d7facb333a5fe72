//! Python bindings. Waves are opaque objects; curves come back as lists.

use std::collections::HashMap;

use ::abwave as core;
use core::experiment::{ExperimentConfig, ExperimentKind};
use core::{Grid, PhaseProgram, PropagationSpec};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Exact superposition of top-hat segments.
#[pyclass(name = "PiecewiseWave", frozen, module = "abwave")]
struct PyPiecewiseWave(core::PiecewiseWave);

/// Wave sampled on a uniform position grid.
#[pyclass(name = "SampledWave", frozen, module = "abwave")]
struct PySampledWave(core::SampledWave);

fn density_lists(c: &core::DensityCurve) -> (Vec<f64>, Vec<f64>) {
    (c.abscissae(), c.values().to_vec())
}

#[pymethods]
impl PyPiecewiseWave {
    /// Normalized top-hat of width `d` starting at 0.
    #[staticmethod]
    fn tophat(d: f64) -> PyResult<Self> {
        core::make_tophat(d).map(Self).map_err(py_err)
    }

    /// Two packets of width `d` separated by a gap `2a`, right one phased by `alpha`.
    #[staticmethod]
    fn two_packet(d: f64, a: f64, alpha: f64) -> PyResult<Self> {
        core::make_two_packet(d, a, alpha).map(Self).map_err(py_err)
    }

    /// `n` packets of width `d` with gaps `eps`; packet `k` carries phase `k * alpha`.
    #[staticmethod]
    fn comb(n: usize, d: f64, eps: f64, alpha: f64) -> PyResult<Self> {
        core::make_comb(n, d, eps, alpha).map(Self).map_err(py_err)
    }

    /// Top-hat of width `big_l` carrying momentum `p0`.
    #[staticmethod]
    fn boosted_tophat(big_l: f64, p0: f64) -> PyResult<Self> {
        core::boosted_tophat(big_l, p0).map(Self).map_err(py_err)
    }

    /// Imprints one phase per packet.
    fn with_phases(&self, phases: Vec<f64>) -> PyResult<Self> {
        core::apply_phase_program(&self.0, &PhaseProgram::new(phases))
            .map(Self)
            .map_err(py_err)
    }

    /// `(start, width, amplitude, rate)` per segment.
    fn segments(&self) -> Vec<(f64, f64, Complex64, f64)> {
        self.0
            .segments()
            .iter()
            .map(|s| (s.start(), s.width(), s.amplitude(), s.rate()))
            .collect()
    }

    fn packet_count(&self) -> usize {
        self.0.packet_count()
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn support(&self) -> (f64, f64) {
        self.0.support()
    }

    fn eval(&self, x: f64) -> Complex64 {
        self.0.eval(x)
    }

    fn momentum_amplitude(&self, p: f64) -> Complex64 {
        core::momentum_amplitude(&self.0, p)
    }

    fn momentum_density(&self, p: Vec<f64>) -> Vec<f64> {
        p.into_iter().map(|p| core::momentum_density(&self.0, p)).collect()
    }

    /// Probability that the momentum lies in `[lo, hi]`.
    fn band_mass(&self, lo: f64, hi: f64) -> f64 {
        core::band_mass(&self.0, lo, hi)
    }

    /// `<exp(-i p b)>`.
    fn modular(&self, b: f64) -> PyResult<Complex64> {
        core::modular_expectation(&self.0, b)
            .map(|m| m.value)
            .map_err(py_err)
    }

    /// `<self|other>`.
    fn overlap(&self, other: &Self) -> PyResult<Complex64> {
        core::overlap(&self.0, &other.0).map_err(py_err)
    }

    /// Cell-average samples on a grid aligned with the segment edges.
    #[pyo3(signature = (dx, pad = 4.0, min_extent = 0.0))]
    fn sample(&self, dx: f64, pad: f64, min_extent: f64) -> PyResult<PySampledWave> {
        let grid = Grid::for_wave(&self.0, dx, pad, min_extent).map_err(py_err)?;
        core::sample(&self.0, &grid).map(PySampledWave).map_err(py_err)
    }

    /// Edges smoothed over `sigma`; the grid step defaults to `sigma / 32`.
    /// Passing `t` sizes the domain for free evolution up to that time.
    #[pyo3(signature = (sigma, dx = None, pad = 4.0, t = None, mass = 1.0))]
    fn smooth(&self, sigma: f64, dx: Option<f64>, pad: f64, t: Option<f64>, mass: f64) -> PyResult<PySampledWave> {
        let (lo, hi) = self.0.support();
        let dx = dx.unwrap_or(sigma / 32.0);
        let grid = match t {
            Some(t) => {
                let spec = PropagationSpec::new(t, mass).map_err(py_err)?;
                core::evolution_grid(&self.0, sigma, dx, spec)
            }
            None => Grid::for_wave(&self.0, dx, pad, hi - lo + 12.0 * sigma),
        }
        .map_err(py_err)?;
        core::smooth_edges(&self.0, sigma, &grid)
            .map(PySampledWave)
            .map_err(py_err)
    }

    fn __repr__(&self) -> String {
        let (lo, hi) = self.0.support();
        format!(
            "PiecewiseWave(packets={}, support=({lo}, {hi}))",
            self.0.packet_count()
        )
    }
}

#[pymethods]
impl PySampledWave {
    #[getter]
    fn x0(&self) -> f64 {
        self.0.x0()
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.0.dx()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn positions(&self) -> Vec<f64> {
        self.0.positions()
    }

    fn samples(&self) -> Vec<Complex64> {
        self.0.samples().to_vec()
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `(x, |psi|^2)`.
    fn position_density(&self) -> (Vec<f64>, Vec<f64>) {
        density_lists(&core::position_density(&self.0))
    }

    /// `(p, density)` on the FFT's conjugate grid.
    fn momentum_density(&self) -> PyResult<(Vec<f64>, Vec<f64>)> {
        core::fft_momentum_density(&self.0)
            .map(|c| density_lists(&c))
            .map_err(py_err)
    }

    /// `(<p^n>, <|p|^n>, tail mass)`.
    fn moment(&self, n: u32) -> PyResult<(f64, f64, f64)> {
        core::moment(&self.0, n)
            .map(|m| (m.value, m.abs_value, m.tail_mass))
            .map_err(py_err)
    }

    fn modular(&self, b: f64) -> PyResult<Complex64> {
        core::modular_expectation(&self.0, b)
            .map(|m| m.value)
            .map_err(py_err)
    }

    fn overlap(&self, other: &Self) -> PyResult<Complex64> {
        core::overlap(&self.0, &other.0).map_err(py_err)
    }

    /// Free evolution for time `t`.
    #[pyo3(signature = (t, mass = 1.0))]
    fn evolve(&self, t: f64, mass: f64) -> PyResult<Self> {
        let spec = PropagationSpec::new(t, mass).map_err(py_err)?;
        core::free_evolve(&self.0, spec).map(Self).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("SampledWave(len={}, x0={}, dx={})", self.0.len(), self.0.x0(), self.0.dx())
    }
}

#[pyfunction]
fn analytic_density_two_packet(d: f64, big_d: f64, alpha: f64, p: f64) -> f64 {
    core::analytic_density_two_packet(d, big_d, alpha, p)
}

#[pyfunction]
fn boosted_overlap_closed_form(n: usize, l: f64, d: f64, p0: f64) -> PyResult<Complex64> {
    core::boosted_overlap_closed_form(n, l, d, p0).map_err(py_err)
}

/// Runs an experiment (`two-packet`, `comb`, `evolve`, `verify`, `sweep`)
/// with optional `key=value` settings. Writes files only when `out` is given.
/// Returns a dict with `name`, `passed`, `metrics` and `checks`.
#[pyfunction]
#[pyo3(signature = (experiment, settings = None, out = None))]
fn run<'py>(
    py: Python<'py>,
    experiment: &str,
    settings: Option<HashMap<String, String>>,
    out: Option<String>,
) -> PyResult<Bound<'py, PyDict>> {
    let kind: ExperimentKind = experiment.parse().map_err(py_err)?;
    let mut cfg = ExperimentConfig::new(kind);
    let mut pairs: Vec<_> = settings.unwrap_or_default().into_iter().collect();
    pairs.sort();
    for (k, v) in pairs {
        cfg.set(&k, &v).map_err(py_err)?;
    }
    if let Some(dir) = &out {
        cfg.out = Some(dir.into());
    }
    let result = py.detach(|| core::experiment::run(&cfg)).map_err(py_err)?;
    if out.is_some() {
        result.write_to(&cfg.out_dir()).map_err(py_err)?;
    }
    let dict = PyDict::new(py);
    dict.set_item("name", &result.name)?;
    dict.set_item("passed", result.passed())?;
    let metrics = PyDict::new(py);
    for (k, v) in &result.metrics {
        metrics.set_item(k, v)?;
    }
    dict.set_item("metrics", metrics)?;
    let checks = PyDict::new(py);
    for c in &result.checks {
        checks.set_item(&c.name, (c.passed, &c.detail))?;
    }
    dict.set_item("checks", checks)?;
    Ok(dict)
}

#[pymodule]
#[pyo3(name = "abwave")]
fn abwave_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", core::VERSION)?;
    m.add_class::<PyPiecewiseWave>()?;
    m.add_class::<PySampledWave>()?;
    m.add_function(wrap_pyfunction!(analytic_density_two_packet, m)?)?;
    m.add_function(wrap_pyfunction!(boosted_overlap_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
