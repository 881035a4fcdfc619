//! Python bindings: cubes, preprocessing, augmentation, synthetic rooms,
//! metrics, trained count models and the study runners.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use radcount::augment::{self, FlipAxis};
use radcount::countnet::{load_model, CountModel, FeatureExtractor};
use radcount::cube::{self, Activity, Environment, RadarCube, SampleMeta};
use radcount::io;
use radcount::metrics;
use radcount::preprocess::{self as pre, Method, PreprocessParams, Preprocessor, SigmoidParams};
use radcount::scene::{self, Room, SuiteConfig};
use radcount::study::{self, ExperimentConfig};

fn err(e: radcount::Error) -> PyErr {
    match e {
        radcount::Error::Io(_) | radcount::Error::MissingFile { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A frames × range × azimuth amplitude cube with its label.
#[pyclass(name = "RadarCube", module = "radcount")]
struct PyCube {
    inner: RadarCube,
}

#[pymethods]
impl PyCube {
    #[new]
    #[pyo3(signature = (frames, range_bins, azimuth_bins, data, label=0))]
    fn new(frames: usize, range_bins: usize, azimuth_bins: usize, data: Vec<f32>, label: u8) -> PyResult<Self> {
        let meta = SampleMeta::new(label, Environment::Synthetic(0), Activity::Standing);
        let inner = RadarCube::new(frames, range_bins, azimuth_bins, data, meta).map_err(err)?;
        Ok(Self { inner })
    }

    /// `(frames, range_bins, azimuth_bins)`.
    #[getter]
    fn shape(&self) -> (usize, usize, usize) {
        self.inner.dims()
    }

    #[getter]
    fn label(&self) -> u8 {
        self.inner.meta.label
    }

    #[getter]
    fn layout(&self) -> Option<u16> {
        self.inner.meta.layout
    }

    /// Flat frame-major amplitudes.
    fn data(&self) -> Vec<f32> {
        self.inner.data().to_vec()
    }

    fn get(&self, t: usize, r: usize, a: usize) -> PyResult<f32> {
        let (f, rb, ab) = self.inner.dims();
        if t >= f || r >= rb || a >= ab {
            return Err(PyValueError::new_err(format!(
                "index ({t}, {r}, {a}) outside {f}x{rb}x{ab}"
            )));
        }
        Ok(self.inner.get(t, r, a))
    }

    fn write(&self, path: &str) -> PyResult<()> {
        io::write_cube(&self.inner, path).map_err(err)
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::read_cube(path).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        let (f, r, a) = self.inner.dims();
        format!("RadarCube({f}x{r}x{a}, label={})", self.inner.meta.label)
    }
}

fn wrap(inner: RadarCube) -> PyCube {
    PyCube { inner }
}

/// Percentile clip (0.1 / 99.9) then min-max to [0, 1].
#[pyfunction]
fn clip_and_normalize(cube: PyRef<'_, PyCube>) -> PyResult<PyCube> {
    Ok(wrap(cube::clip_and_normalize(&cube.inner).map_err(err)?.0))
}

/// Per-cell temporal std, row-major `[range][azimuth]`.
#[pyfunction]
fn std_map(cube: PyRef<'_, PyCube>) -> PyResult<Vec<f64>> {
    Ok(pre::std_map(&cube.inner).map_err(err)?.values)
}

#[pyfunction]
fn threshold_zero(cube: PyRef<'_, PyCube>, tau: f64) -> PyResult<PyCube> {
    Ok(wrap(pre::threshold_zero(&cube.inner, tau).map_err(err)?))
}

#[pyfunction]
#[pyo3(signature = (cube, tau=pre::stats::DEFAULT_TAU, s=pre::stats::DEFAULT_STEEPNESS))]
fn sigmoid_weighting(cube: PyRef<'_, PyCube>, tau: f64, s: f64) -> PyResult<PyCube> {
    Ok(wrap(
        pre::sigmoid_weighting(&cube.inner, SigmoidParams { tau, s }).map_err(err)?,
    ))
}

/// Apply a named method (`none`, `threshold_zero`, `sigmoid_weight`,
/// `butterworth_bandpass`, `two_stage_highpass`). Background suppression
/// needs fitted 0-person data and is available through the studies.
#[pyfunction]
#[pyo3(signature = (cube, method, tau=pre::stats::DEFAULT_TAU, s=pre::stats::DEFAULT_STEEPNESS))]
fn preprocess(cube: PyRef<'_, PyCube>, method: &str, tau: f64, s: f64) -> PyResult<PyCube> {
    let m: Method = method.parse().map_err(err)?;
    let params = PreprocessParams {
        tau,
        s,
        ..PreprocessParams::default()
    };
    let pre = Preprocessor::build(m, &params, None, 0).map_err(err)?;
    Ok(wrap(pre.apply(&cube.inner).map_err(err)?))
}

/// Flip along `azimuth`, `range` or `both`.
#[pyfunction]
fn flip(cube: PyRef<'_, PyCube>, axis: &str) -> PyResult<PyCube> {
    let axis = match axis {
        "azimuth" => FlipAxis::Azimuth,
        "range" => FlipAxis::Range,
        "both" => FlipAxis::Both,
        other => return Err(PyValueError::new_err(format!("unknown flip axis `{other}`"))),
    };
    Ok(wrap(augment::flip(&cube.inner, axis)))
}

#[pyfunction]
#[pyo3(signature = (cube, seed, lo=0.95, hi=1.05))]
fn random_scale(cube: PyRef<'_, PyCube>, seed: u64, lo: f64, hi: f64) -> PyResult<PyCube> {
    if !(lo > 0.0 && lo <= hi) {
        return Err(PyValueError::new_err(format!("scale range ({lo}, {hi}) invalid")));
    }
    Ok(wrap(augment::random_scale(&cube.inner, (lo, hi), seed)))
}

#[pyfunction]
fn drop_and_interpolate(cube: PyRef<'_, PyCube>, seed: u64) -> PyResult<PyCube> {
    Ok(wrap(augment::drop_and_interpolate(&cube.inner, seed).map_err(err)?))
}

/// Normalized synthetic cubes for room `a`, `b` or `c` with default settings.
#[pyfunction]
fn generate_room(room: &str, n_per_class: usize, seed: u64) -> PyResult<Vec<PyCube>> {
    let room = match room.to_ascii_lowercase().as_str() {
        "a" => Room::A,
        "b" => Room::B,
        "c" => Room::C,
        other => return Err(PyValueError::new_err(format!("unknown room `{other}`"))),
    };
    let ds = scene::generate_room(&SuiteConfig::default(), room, n_per_class, seed).map_err(err)?;
    Ok(ds.cubes.into_iter().map(wrap).collect())
}

#[pyfunction]
fn ami(a: Vec<i64>, b: Vec<i64>) -> PyResult<f64> {
    metrics::ami(&a, &b).map_err(err)
}

/// Mean per-feature Fisher score.
#[pyfunction]
fn fisher_score(features: Vec<Vec<f64>>, labels: Vec<i64>) -> PyResult<f64> {
    Ok(metrics::fisher_score(&features, &labels).map_err(err)?.score)
}

/// `(1 − method / baseline) · 100`.
#[pyfunction]
fn improvement_pct(baseline: f64, method: f64) -> f64 {
    study::improvement_pct(baseline, method)
}

/// A trained count regressor loaded from an RCM1 checkpoint.
#[pyclass(name = "CountModel", module = "radcount")]
struct PyModel {
    inner: CountModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: load_model(path).map_err(err)?,
        })
    }

    /// Raw count estimate for one (already preprocessed) cube.
    fn predict(&self, cube: PyRef<'_, PyCube>) -> PyResult<f64> {
        let x = FeatureExtractor::default().extract(&cube.inner).map_err(err)?;
        self.inner.check_input(&x).map_err(err)?;
        Ok(self.inner.predict(&x))
    }

    #[getter]
    fn n_params(&self) -> usize {
        self.inner.params.len()
    }
}

fn parse_config(config_json: Option<&str>) -> PyResult<ExperimentConfig> {
    let cfg: ExperimentConfig = match config_json {
        Some(s) => serde_json::from_str(s).map_err(|e| PyValueError::new_err(e.to_string()))?,
        None => ExperimentConfig::default(),
    };
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

/// Returns `(errors_csv, separability_csv)`.
#[pyfunction]
#[pyo3(signature = (config_json=None))]
fn study_preprocess(py: Python<'_>, config_json: Option<&str>) -> PyResult<(String, String)> {
    let cfg = parse_config(config_json)?;
    let s = py.detach(|| study::study_preprocess(&cfg)).map_err(err)?;
    Ok((s.errors_csv(), s.separability_csv()))
}

#[pyfunction]
#[pyo3(signature = (config_json=None))]
fn study_augment(py: Python<'_>, config_json: Option<&str>) -> PyResult<String> {
    let cfg = parse_config(config_json)?;
    Ok(py.detach(|| study::study_augment(&cfg)).map_err(err)?.to_csv())
}

#[pyfunction]
#[pyo3(signature = (config_json=None))]
fn study_transfer(py: Python<'_>, config_json: Option<&str>) -> PyResult<String> {
    let cfg = parse_config(config_json)?;
    Ok(py.detach(|| study::study_transfer(&cfg)).map_err(err)?.to_csv())
}

#[pymodule(name = "radcount")]
fn radcount_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCube>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(clip_and_normalize, m)?)?;
    m.add_function(wrap_pyfunction!(std_map, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_zero, m)?)?;
    m.add_function(wrap_pyfunction!(sigmoid_weighting, m)?)?;
    m.add_function(wrap_pyfunction!(preprocess, m)?)?;
    m.add_function(wrap_pyfunction!(flip, m)?)?;
    m.add_function(wrap_pyfunction!(random_scale, m)?)?;
    m.add_function(wrap_pyfunction!(drop_and_interpolate, m)?)?;
    m.add_function(wrap_pyfunction!(generate_room, m)?)?;
    m.add_function(wrap_pyfunction!(ami, m)?)?;
    m.add_function(wrap_pyfunction!(fisher_score, m)?)?;
    m.add_function(wrap_pyfunction!(improvement_pct, m)?)?;
    m.add_function(wrap_pyfunction!(study_preprocess, m)?)?;
    m.add_function(wrap_pyfunction!(study_augment, m)?)?;
    m.add_function(wrap_pyfunction!(study_transfer, m)?)?;
    Ok(())
}
