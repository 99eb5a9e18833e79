//! Python bindings: `import goalpost`.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use goalpost::bench::Method;
use goalpost::geometry::{Point2, Quad};
use goalpost::histdetect::{self, Histogram};
use goalpost::metrics::{self, CameraModel};
use goalpost::ransac::{self, RansacParams};
use goalpost::synth::{self, SceneSpec, SceneTruth};
use goalpost::{pnm, scanline, ColourLabel, DetectorConfig};

fn err(e: goalpost::Error) -> PyErr {
    match e {
        goalpost::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn points(raw: Vec<(f64, f64)>) -> Vec<Point2> {
    raw.into_iter().map(|(x, y)| Point2::new(x, y)).collect()
}

/// Colour look-up table from quantised RGB to class labels.
#[pyclass(name = "Lut", frozen)]
pub struct PyLut(goalpost::Lut);

#[pymethods]
impl PyLut {
    #[new]
    fn new(bits: u8, label_count: u16, labels: Vec<u8>) -> PyResult<Self> {
        goalpost::Lut::new(bits, label_count, labels).map(Self).map_err(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let f = std::fs::File::open(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        goalpost::Lut::read_from(std::io::BufReader::new(f)).map(Self).map_err(err)
    }

    #[getter]
    fn bits(&self) -> u8 {
        self.0.bits_per_channel()
    }

    fn classify_pixel(&self, rgb: (u8, u8, u8)) -> PyResult<u8> {
        self.0.classify_pixel([rgb.0, rgb.1, rgb.2]).map(|l| l.0).map_err(err)
    }

    /// Classifies a packed RGB buffer of `width * height * 3` bytes.
    fn classify(&self, width: u32, height: u32, rgb: Vec<u8>) -> PyResult<PyClassImage> {
        if !rgb.len().is_multiple_of(3) {
            return Err(PyValueError::new_err("RGB buffer length must be a multiple of 3"));
        }
        let pixels = rgb.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        let raw = goalpost::RawImage::new(width, height, self.0.bits_per_channel(), pixels).map_err(err)?;
        self.0.classify_image(&raw).map(PyClassImage).map_err(err)
    }
}

/// Row-major image of class labels.
#[pyclass(name = "ClassImage", skip_from_py_object)]
#[derive(Clone)]
pub struct PyClassImage(goalpost::ClassImage);

#[pymethods]
impl PyClassImage {
    #[new]
    fn new(width: u32, height: u32, labels: Vec<u8>) -> PyResult<Self> {
        goalpost::ClassImage::new(width, height, labels).map(Self).map_err(err)
    }

    #[staticmethod]
    fn filled(width: u32, height: u32, label: u8) -> Self {
        Self(goalpost::ClassImage::filled(width, height, ColourLabel(label)))
    }

    #[staticmethod]
    fn read_pgm(path: &str) -> PyResult<Self> {
        let f = std::fs::File::open(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        pnm::read_pgm(std::io::BufReader::new(f)).map(Self).map_err(err)
    }

    fn write_pgm(&self, path: &str) -> PyResult<()> {
        let f = std::fs::File::create(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        pnm::write_pgm(&self.0, std::io::BufWriter::new(f)).map_err(err)
    }

    #[getter]
    fn width(&self) -> u32 {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> u32 {
        self.0.height()
    }

    fn labels<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.0.labels())
    }

    fn get(&self, x: u32, y: u32) -> PyResult<u8> {
        self.check(x, y)?;
        Ok(self.0.get(x, y).0)
    }

    fn set(&mut self, x: u32, y: u32, label: u8) -> PyResult<()> {
        self.check(x, y)?;
        self.0.set(x, y, ColourLabel(label));
        Ok(())
    }

    fn count(&self, label: u8) -> usize {
        self.0.count(ColourLabel(label))
    }

    fn __repr__(&self) -> String {
        format!("ClassImage({}x{})", self.0.width(), self.0.height())
    }
}

impl PyClassImage {
    fn check(&self, x: u32, y: u32) -> PyResult<()> {
        if x >= self.0.width() || y >= self.0.height() {
            return Err(PyValueError::new_err(format!("pixel ({x}, {y}) is outside the image")));
        }
        Ok(())
    }
}

#[pyfunction]
fn upper_convex_hull(points: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    scanline::upper_convex_hull(&points).vertices().to_vec()
}

#[pyfunction]
fn fit_line(points: Vec<(f64, f64)>) -> PyResult<((f64, f64), (f64, f64))> {
    let line = ransac::fit_line_least_squares(&self::points(points)).map_err(err)?;
    Ok(((line.point.x, line.point.y), (line.direction.x, line.direction.y)))
}

/// Returns one dict per line: `start`, `end`, `direction`, `consensus`
/// (indices into `points`).
#[pyfunction]
#[pyo3(signature = (points, d_inlier=5.0, k=50, n_min=6, m_max=3, seed=0))]
fn ransac_multi_line<'py>(
    py: Python<'py>,
    points: Vec<(f64, f64)>,
    d_inlier: f64,
    k: usize,
    n_min: usize,
    m_max: usize,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let params = RansacParams {
        d_inlier,
        k,
        n_min,
        m_max,
        seed,
    };
    let lines = ransac::ransac_multi_line(&self::points(points), &params).map_err(err)?;
    lines
        .into_iter()
        .map(|l| {
            let d = PyDict::new(py);
            d.set_item("start", (l.start.x, l.start.y))?;
            d.set_item("end", (l.end.x, l.end.y))?;
            d.set_item("direction", (l.direction.x, l.direction.y))?;
            d.set_item("consensus", l.consensus_indices)?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
fn success_probability(q: f64, k: u32) -> PyResult<f64> {
    ransac::success_probability(q, k).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (width, fov_deg=60.0))]
fn pixel_angular_width(width: u32, fov_deg: f64) -> PyResult<f64> {
    CameraModel::from_degrees(width, fov_deg)
        .map(|c| c.pixel_angular_width())
        .map_err(err)
}

#[pyfunction]
fn distance_by_width(width_cm: f64, width_px: f64, gamma: f64) -> PyResult<f64> {
    metrics::distance_by_width(width_cm, width_px, gamma).map_err(err)
}

/// Merged `(x_start, x_end)` intervals of adjacent bins with count ≥ gamma.
#[pyfunction]
fn group_peaks(counts: Vec<u64>, width: u32, gamma: u64) -> PyResult<Vec<(f64, f64)>> {
    let h = Histogram::from_counts(width, counts).map_err(err)?;
    let peaks = histdetect::peak_candidates(&h, gamma);
    Ok(histdetect::group_peaks(&h, &peaks)
        .into_iter()
        .map(|iv| (iv.x_start, iv.x_end))
        .collect())
}

fn truth_dict<'py>(py: Python<'py>, t: &SceneTruth) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("corners", t.corners.map(|c| (c.x, c.y)).to_vec())?;
    d.set_item("width_px", t.width_px)?;
    d.set_item("height_px", t.height_px)?;
    d.set_item("distance_cm", t.distance_cm)?;
    d.set_item("tilt_deg", t.tilt_deg)?;
    d.set_item("bounding_box", t.bounding_box())?;
    d.set_item("seed", t.seed)?;
    Ok(d)
}

/// Renders a synthetic frame; returns `(ClassImage, truth dict)`.
#[pyfunction]
#[pyo3(signature = (distance_cm, tilt_deg=0.0, noise_p=0.0, seed=0, width=640, height=480, fov_deg=60.0))]
#[allow(clippy::too_many_arguments)]
fn render_scene<'py>(
    py: Python<'py>,
    distance_cm: f64,
    tilt_deg: f64,
    noise_p: f64,
    seed: u64,
    width: u32,
    height: u32,
    fov_deg: f64,
) -> PyResult<(PyClassImage, Bound<'py, PyDict>)> {
    let spec = SceneSpec {
        distance_cm,
        tilt_deg,
        noise_p,
        seed,
        camera: CameraModel::from_degrees(width, fov_deg).map_err(err)?,
        image_height: height,
        ..SceneSpec::default()
    };
    let (img, truth) = synth::render_scene(&spec).map_err(err)?;
    Ok((PyClassImage(img), truth_dict(py, &truth)?))
}

/// Corner list and width in pixels.
type QuadTuple = (Vec<(f64, f64)>, f64);

fn quad_tuple(q: &Quad) -> QuadTuple {
    (q.corners.iter().map(|c| (c.x, c.y)).collect(), q.width_px)
}

/// Runs one detector; returns a list of `(corners, width_px)`.
#[pyfunction]
#[pyo3(signature = (image, method="ransac", seed=0, rho=None, spacing=None, bins=None, gamma=None))]
fn detect(
    image: &PyClassImage,
    method: &str,
    seed: u64,
    rho: Option<f64>,
    spacing: Option<u32>,
    bins: Option<usize>,
    gamma: Option<u64>,
) -> PyResult<Vec<QuadTuple>> {
    let method = Method::parse(method).map_err(err)?;
    let d = DetectorConfig::default();
    let cfg = DetectorConfig {
        rho: rho.unwrap_or(d.rho),
        spacing: spacing.unwrap_or(d.spacing),
        bins: bins.unwrap_or(d.bins),
        gamma: gamma.unwrap_or(d.gamma),
        ransac: RansacParams { seed, ..d.ransac },
        ..d
    };
    let quads = method.detect(&image.0, &cfg).map_err(err)?;
    Ok(quads.iter().map(quad_tuple).collect())
}

#[pymodule]
#[pyo3(name = "goalpost")]
fn goalpost_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLut>()?;
    m.add_class::<PyClassImage>()?;
    m.add_function(wrap_pyfunction!(upper_convex_hull, m)?)?;
    m.add_function(wrap_pyfunction!(fit_line, m)?)?;
    m.add_function(wrap_pyfunction!(ransac_multi_line, m)?)?;
    m.add_function(wrap_pyfunction!(success_probability, m)?)?;
    m.add_function(wrap_pyfunction!(pixel_angular_width, m)?)?;
    m.add_function(wrap_pyfunction!(distance_by_width, m)?)?;
    m.add_function(wrap_pyfunction!(group_peaks, m)?)?;
    m.add_function(wrap_pyfunction!(render_scene, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    Ok(())
}
