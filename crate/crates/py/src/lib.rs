//! Python bindings for the `nanoqed` spectrum simulator.

use std::path::PathBuf;

use nalgebra::Vector3;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use nanoqed::angular::{self, TransitionScheme};
use nanoqed::medium::{self, AtomPlacement, DipoleCloud, Geometry, MediumModel, Placement};
use nanoqed::spectrum::{diagonalize, symmetry_labels, SelfEnergyEvaluator, DEFAULT_CLUSTER_TOL, DEFAULT_MEMORY_BUDGET};
use nanoqed::{runner, vdw};

fn to_py(e: nanoqed::Error) -> PyErr {
    match e.exit_code() {
        1 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn vec3(v: [f64; 3]) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

/// Hyperfine transition of the probe atom.
#[pyclass(name = "Scheme", frozen)]
struct PyScheme {
    inner: TransitionScheme,
}

#[pymethods]
impl PyScheme {
    #[new]
    #[pyo3(signature = (f_excited, f_ground, lambda0_nm, gamma_inf_mhz = 6.0666, label = "custom"))]
    fn new(f_excited: f64, f_ground: f64, lambda0_nm: f64, gamma_inf_mhz: f64, label: &str) -> PyResult<Self> {
        TransitionScheme::new(f_excited, f_ground, lambda0_nm, gamma_inf_mhz, label).map(|inner| PyScheme { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        TransitionScheme::preset(name)
            .map(|inner| PyScheme { inner })
            .ok_or_else(|| PyValueError::new_err(format!("unknown scheme {name:?}; known: {}", TransitionScheme::PRESETS.join(", "))))
    }

    #[staticmethod]
    fn names() -> Vec<&'static str> {
        TransitionScheme::PRESETS.to_vec()
    }

    #[getter]
    fn f_excited(&self) -> f64 {
        self.inner.f_excited.value()
    }

    #[getter]
    fn f_ground(&self) -> f64 {
        self.inner.f_ground.value()
    }

    #[getter]
    fn lambda0_nm(&self) -> f64 {
        self.inner.lambda0_nm
    }

    #[getter]
    fn n_excited(&self) -> usize {
        self.inner.f_excited.multiplicity()
    }

    /// `sum_n |d_nm|^2` over excited sublevels, the same for every ground sublevel.
    fn dipole_sq_sum(&self) -> PyResult<f64> {
        vdw::dipole_sq_sum(&self.inner).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Scheme({:?}, F'={} -> F={}, {} nm)", self.inner.label, self.inner.f_excited.value(), self.inner.f_ground.value(), self.inner.lambda0_nm)
    }
}

/// Cloud of two-level scatterers calibrated to a target permittivity.
#[pyclass(name = "Medium", frozen)]
struct PyMedium {
    inner: MediumModel,
}

#[pymethods]
impl PyMedium {
    #[staticmethod]
    #[pyo3(signature = (n0, target_eps, gamma_e = 1.0))]
    fn calibrated(n0: f64, target_eps: f64, gamma_e: f64) -> PyResult<Self> {
        MediumModel::calibrated(n0, gamma_e, target_eps).map(|inner| PyMedium { inner }).map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (n0, delta_m, gamma_e = 1.0))]
    fn with_detuning(n0: f64, delta_m: f64, gamma_e: f64) -> PyResult<Self> {
        MediumModel::with_detuning(n0, gamma_e, delta_m).map(|inner| PyMedium { inner }).map_err(to_py)
    }

    #[getter]
    fn n0(&self) -> f64 {
        self.inner.n0
    }

    #[getter]
    fn delta_m(&self) -> f64 {
        self.inner.delta_m
    }

    #[getter]
    fn gamma_e(&self) -> f64 {
        self.inner.gamma_e
    }

    fn permittivity(&self, omega: f64) -> PyResult<Complex64> {
        medium::permittivity(&self.inner, omega).map_err(to_py)
    }

    fn permittivity_scan(&self, omegas: Vec<f64>) -> PyResult<Vec<Complex64>> {
        medium::permittivity_scan(&self.inner, &omegas).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Medium(n0={}, delta_m={:.6})", self.inner.n0, self.inner.delta_m)
    }
}

/// Shape of the nanostructure, lengths in reduced wavelengths.
#[pyclass(name = "Geometry", frozen)]
struct PyGeometry {
    inner: Geometry,
}

#[pymethods]
impl PyGeometry {
    #[staticmethod]
    fn cylinder(radius: f64, length: f64) -> PyResult<Self> {
        Self::checked(Geometry::Cylinder { radius, length })
    }

    #[staticmethod]
    fn comb(period: f64, periods: usize) -> PyResult<Self> {
        Self::checked(Geometry::comb(period, periods))
    }

    #[staticmethod]
    #[pyo3(name = "box")]
    fn cuboid(sx: f64, sy: f64, sz: f64) -> PyResult<Self> {
        Self::checked(Geometry::Box { size: [sx, sy, sz] })
    }

    #[staticmethod]
    fn slab(thickness: f64, extent_y: f64, extent_z: f64) -> PyResult<Self> {
        Self::checked(Geometry::Slab { thickness, extent_y, extent_z })
    }

    #[staticmethod]
    fn half_space() -> Self {
        PyGeometry { inner: Geometry::HalfSpace }
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind()
    }

    fn contains(&self, p: [f64; 3]) -> bool {
        self.inner.contains(&vec3(p))
    }

    /// Atom position for `placement` ("radial", "behind-tooth", "between-teeth", "facing").
    fn atom_site(&self, placement: &str, distance: f64) -> PyResult<[f64; 3]> {
        let placement = AtomPlacement::parse(placement).map_err(to_py)?;
        let p = self.inner.atom_site(placement, distance).map_err(to_py)?;
        Ok([p.x, p.y, p.z])
    }

    fn __repr__(&self) -> String {
        format!("Geometry({:?})", self.inner)
    }
}

impl PyGeometry {
    fn checked(inner: Geometry) -> PyResult<Self> {
        inner.validate().map_err(to_py)?;
        Ok(PyGeometry { inner })
    }
}

/// One realization of scatterer positions.
#[pyclass(name = "Cloud", frozen)]
struct PyCloud {
    inner: DipoleCloud,
}

#[pymethods]
impl PyCloud {
    /// Fill `geometry` with scatterers; `seed=None` gives the ordered lattice.
    #[staticmethod]
    #[pyo3(signature = (geometry, medium, seed = None, r_min = medium::DEFAULT_R_MIN, realization = 0))]
    fn generate(geometry: &PyGeometry, medium: &PyMedium, seed: Option<u64>, r_min: f64, realization: u64) -> PyResult<Self> {
        let placement = match seed {
            Some(seed) => Placement::Disordered { seed, r_min },
            None => Placement::OrderedLattice,
        };
        medium::generate_cloud(&geometry.inner, &medium.inner, placement, realization).map(|inner| PyCloud { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn from_positions(positions: Vec<[f64; 3]>, medium: &PyMedium) -> Self {
        PyCloud { inner: DipoleCloud::from_positions(positions.into_iter().map(vec3).collect(), medium.inner) }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn positions(&self) -> Vec<[f64; 3]> {
        self.inner.positions.iter().map(|p| [p.x, p.y, p.z]).collect()
    }
}

/// Excited-manifold self-energy at `atom` as a nested list (row-major).
#[pyfunction]
#[pyo3(signature = (scheme, cloud, atom, medium_linewidth = false))]
fn self_energy(scheme: &PyScheme, cloud: &PyCloud, atom: [f64; 3], medium_linewidth: bool) -> PyResult<Vec<Vec<Complex64>>> {
    let eval = SelfEnergyEvaluator::new(&scheme.inner, &cloud.inner, medium_linewidth, DEFAULT_MEMORY_BUDGET).map_err(to_py)?;
    let sigma = eval.self_energy(&vec3(atom)).map_err(to_py)?;
    let n = sigma.dim();
    Ok((0..n).map(|i| (0..n).map(|j| sigma.matrix[(i, j)]).collect()).collect())
}

/// Clustered spectrum at `atom`: list of dicts with `delta`, `gamma`,
/// `multiplicity` and `abs_m` (or None when no label could be assigned).
#[pyfunction]
#[pyo3(signature = (scheme, cloud, atom, axis = None, cluster_tol = DEFAULT_CLUSTER_TOL, medium_linewidth = false))]
fn spectrum<'py>(
    py: Python<'py>,
    scheme: &PyScheme,
    cloud: &PyCloud,
    atom: [f64; 3],
    axis: Option<[f64; 3]>,
    cluster_tol: f64,
    medium_linewidth: bool,
) -> PyResult<Vec<Bound<'py, pyo3::types::PyDict>>> {
    let eval = SelfEnergyEvaluator::new(&scheme.inner, &cloud.inner, medium_linewidth, DEFAULT_MEMORY_BUDGET).map_err(to_py)?;
    let position = vec3(atom);
    let sigma = eval.self_energy(&position).map_err(to_py)?;
    let mut point = diagonalize(&sigma, position.norm(), cluster_tol).map_err(to_py)?;
    if let Some(axis) = axis {
        symmetry_labels(&mut point, scheme.inner.f_excited, axis).map_err(to_py)?;
    }
    point
        .clusters
        .iter()
        .map(|c| {
            let d = pyo3::types::PyDict::new(py);
            d.set_item("delta", c.delta)?;
            d.set_item("gamma", c.gamma)?;
            d.set_item("multiplicity", c.multiplicity)?;
            d.set_item("abs_m", c.label.map(|l| l.value()))?;
            Ok(d)
        })
        .collect()
}

/// Microscopic van der Waals shift and its error estimate.
#[pyfunction]
#[pyo3(signature = (eps, dipole_sq_sum, geometry, position, quad_tol = vdw::DEFAULT_QUAD_TOL))]
fn vdw_shift(eps: f64, dipole_sq_sum: f64, geometry: &PyGeometry, position: [f64; 3], quad_tol: f64) -> PyResult<(f64, f64)> {
    let spec = vdw::VdwSpec::new(eps, dipole_sq_sum, geometry.inner.clone(), quad_tol).map_err(to_py)?;
    let r = vdw::vdw_shift(&spec, &vec3(position)).map_err(to_py)?;
    Ok((r.shift, r.error_estimate))
}

#[pyfunction]
fn wigner3j(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> PyResult<f64> {
    angular::wigner3j(j1, j2, j3, m1, m2, m3).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (n0, target_eps, gamma_e = 1.0))]
fn fit_detuning(n0: f64, target_eps: f64, gamma_e: f64) -> PyResult<f64> {
    medium::fit_detuning(n0, gamma_e, target_eps).map_err(to_py)
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    runner::PRESET_NAMES.to_vec()
}

/// Named preset as a JSON string, suitable for editing and `run_scan`.
#[pyfunction]
fn preset_json(name: &str) -> PyResult<String> {
    let cfg = runner::preset(name).map_err(to_py)?;
    serde_json::to_string_pretty(&cfg).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Run a distance sweep from a JSON config; returns the CSV and sidecar paths.
#[pyfunction]
#[pyo3(signature = (config_json, out_dir, threads = None, strict = false))]
fn run_scan(py: Python<'_>, config_json: &str, out_dir: PathBuf, threads: Option<usize>, strict: bool) -> PyResult<(PathBuf, PathBuf)> {
    let cfg = runner::ExperimentConfig::from_json(config_json).and_then(|c| c.resolve()).map_err(to_py)?;
    let opts = runner::RunOptions { out_dir, strict, threads, corrupt_coupling_sign: false };
    let out = py.detach(|| runner::cmd_scan(&cfg, &opts)).map_err(to_py)?;
    Ok((out.csv, out.sidecar))
}

#[pymodule]
fn nanoqed_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScheme>()?;
    m.add_class::<PyMedium>()?;
    m.add_class::<PyGeometry>()?;
    m.add_class::<PyCloud>()?;
    m.add_function(wrap_pyfunction!(self_energy, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(vdw_shift, m)?)?;
    m.add_function(wrap_pyfunction!(wigner3j, m)?)?;
    m.add_function(wrap_pyfunction!(fit_detuning, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(preset_json, m)?)?;
    m.add_function(wrap_pyfunction!(run_scan, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
