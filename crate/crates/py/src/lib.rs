//! Python bindings: `import wrt`.
//!
//! Manifolds are passed either as a shorthand string (`"lens:5,2"`,
//! `"poincare"`, `"@graph.json"`) or as a `Plumbing`. Structured results come
//! back as plain dicts.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use wrt_core::abelian::{homology_data, u1_surgery_invariant};
use wrt_core::asymptotics::{self, Evaluation, KSweep, Normalization};
use wrt_core::mtc::{self, Family, MtcData};
use wrt_core::resurgence::{self, FormalSeries, Variable, STOKES_TOL};
use wrt_core::surgery::{self, PlumbingGraph, Vertex};
use wrt_core::{Error, Precision};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn family(name: &str) -> PyResult<Family> {
    match name.to_ascii_lowercase().as_str() {
        "su2" => Ok(Family::Su2),
        "u1" => Ok(Family::U1),
        other => Err(PyValueError::new_err(format!("unknown family '{other}' (su2 or u1)"))),
    }
}

fn normalization(name: &str) -> PyResult<Normalization> {
    match name {
        "raw" => Ok(Normalization::Raw),
        "s3" | "divided-by-s3" => Ok(Normalization::DividedByS3),
        other => Err(PyValueError::new_err(format!("unknown normalization '{other}' (raw or s3)"))),
    }
}

fn precision(digits: u32) -> PyResult<Precision> {
    if digits < wrt_core::numeric::MIN_PRECISION {
        return Err(PyValueError::new_err(format!(
            "precision must be at least {} digits",
            wrt_core::numeric::MIN_PRECISION
        )));
    }
    Ok(Precision::digits(digits))
}

/// Modular data of su2_k or u1_k.
#[pyclass(frozen, module = "wrt")]
struct Mtc {
    inner: MtcData,
}

#[pymethods]
impl Mtc {
    #[new]
    #[pyo3(signature = (k, family = "su2"))]
    fn new(k: u32, family: &str) -> PyResult<Self> {
        let inner = mtc::mtc_for(self::family(family)?, k).map_err(err)?;
        Ok(Mtc { inner })
    }

    #[getter]
    fn level(&self) -> u32 {
        self.inner.level
    }

    #[getter]
    fn family(&self) -> &'static str {
        match self.inner.family {
            Family::Su2 => "su2",
            Family::U1 => "u1",
        }
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn central_charge(&self) -> String {
        self.inner.central_charge.to_string()
    }

    #[getter]
    fn total_dim(&self) -> f64 {
        self.inner.total_dim()
    }

    #[getter]
    fn kappa(&self) -> Complex64 {
        self.inner.kappa()
    }

    #[getter]
    fn qdims(&self) -> Vec<Complex64> {
        self.inner.qdims.iter().map(|x| x.to_c64()).collect()
    }

    #[getter]
    fn twists(&self) -> Vec<Complex64> {
        self.inner.twists.iter().map(|x| x.to_c64()).collect()
    }

    /// Normalized S matrix as nested lists.
    fn s_matrix(&self) -> Vec<Vec<Complex64>> {
        let s = self.inner.s_matrix();
        (0..s.nrows()).map(|i| s.row(i).iter().copied().collect()).collect()
    }

    /// Diagonal of T.
    fn t_matrix(&self) -> Vec<Complex64> {
        self.inner.t_diag.clone()
    }

    /// N[i][j][l], the multiplicity of l in i ⊗ j.
    fn fusion(&self) -> PyResult<Vec<Vec<Vec<i64>>>> {
        mtc::fusion(&self.inner).map_err(err)
    }

    fn verlinde_dim(&self, genus: u32) -> PyResult<i64> {
        mtc::verlinde_dim(&self.inner, genus).map_err(err)
    }

    fn check_modular<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &mtc::check_modular(&self.inner))
    }

    fn __repr__(&self) -> String {
        format!("Mtc({}, k={})", self.family(), self.inner.level)
    }
}

/// A plumbing forest: framed vertices joined by edges.
#[pyclass(module = "wrt", eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct Plumbing {
    inner: PlumbingGraph,
}

#[pymethods]
impl Plumbing {
    #[new]
    #[pyo3(signature = (vertices, edges = Vec::new()))]
    fn new(vertices: Vec<(i64, i64)>, edges: Vec<(i64, i64)>) -> PyResult<Self> {
        let inner = PlumbingGraph {
            vertices: vertices.into_iter().map(|(id, framing)| Vertex { id, framing }).collect(),
            edges: edges.into_iter().map(|(a, b)| [a, b]).collect(),
        };
        inner.validate().map_err(err)?;
        Ok(Plumbing { inner })
    }

    /// Shorthand such as "s3", "lens:5,2", "seifert:-1;2/1,3/1,5/1" or "@file.json".
    #[staticmethod]
    fn parse(spec: &str) -> PyResult<Self> {
        surgery::parse_manifold(spec).map(|inner| Plumbing { inner }).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        PlumbingGraph::from_json(text).map(|inner| Plumbing { inner }).map_err(err)
    }

    #[staticmethod]
    fn lens(p: i64, q: i64) -> PyResult<Self> {
        surgery::lens_graph(p, q).map(|inner| Plumbing { inner }).map_err(err)
    }

    #[staticmethod]
    fn seifert(e0: i64, fibres: Vec<(i64, i64)>) -> PyResult<Self> {
        surgery::seifert_graph(e0, &fibres).map(|inner| Plumbing { inner }).map_err(err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn vertices(&self) -> Vec<(i64, i64)> {
        self.inner.vertices.iter().map(|v| (v.id, v.framing)).collect()
    }

    #[getter]
    fn edges(&self) -> Vec<(i64, i64)> {
        self.inner.edges.iter().map(|e| (e[0], e[1])).collect()
    }

    /// Linking matrix with signature, b1 and component count.
    fn linking_matrix<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &surgery::linking_matrix(&self.inner).map_err(err)?)
    }

    /// Disjoint union with a ±1-framed unknot.
    fn stabilize(&self, sign: i64) -> PyResult<Self> {
        surgery::stabilize(&self.inner, sign).map(|inner| Plumbing { inner }).map_err(err)
    }

    fn blow_down(&self, id: i64) -> PyResult<Self> {
        surgery::blow_down(&self.inner, id).map(|inner| Plumbing { inner }).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.vertices.len()
    }

    fn __repr__(&self) -> String {
        format!("Plumbing({})", self.inner.to_json())
    }
}

#[derive(FromPyObject)]
enum Manifold<'py> {
    Graph(PyRef<'py, Plumbing>),
    Spec(String),
}

impl Manifold<'_> {
    fn graph(&self) -> PyResult<PlumbingGraph> {
        match self {
            Manifold::Graph(g) => Ok(g.inner.clone()),
            Manifold::Spec(s) => surgery::parse_manifold(s).map_err(err),
        }
    }
}

/// Normalized invariant Z_k(M) as a Python complex.
#[pyfunction]
#[pyo3(signature = (manifold, k, family = "su2", precision = 30))]
fn rt_invariant(manifold: Manifold<'_>, k: u32, family: &str, precision: u32) -> PyResult<Complex64> {
    let (re, im) = rt_invariant_decimal(manifold, k, family, precision)?;
    let parse = |s: &str| s.parse::<f64>().map_err(|e| PyValueError::new_err(e.to_string()));
    Ok(Complex64::new(parse(&re)?, parse(&im)?))
}

/// Real and imaginary parts as decimal strings with `precision` digits.
#[pyfunction]
#[pyo3(signature = (manifold, k, family = "su2", precision = 30))]
fn rt_invariant_decimal(manifold: Manifold<'_>, k: u32, family: &str, precision: u32) -> PyResult<(String, String)> {
    let g = manifold.graph()?;
    let m = mtc::mtc_for(self::family(family)?, k).map_err(err)?;
    let mut ctx = wrt_core::numeric::Ctx::new(self::precision(precision)?);
    let z = surgery::rt_invariant_in(&m, &g, &mut ctx).map_err(err)?;
    Ok(z.render(&mut ctx))
}

/// The unnormalized colored sum as an exact cyclotomic polynomial in z = e^{2πi/N}.
#[pyfunction]
#[pyo3(signature = (manifold, k, family = "su2"))]
fn colored_sum(manifold: Manifold<'_>, k: u32, family: &str) -> PyResult<(String, usize)> {
    let m = mtc::mtc_for(self::family(family)?, k).map_err(err)?;
    let f = surgery::colored_sum(&m, &manifold.graph()?).map_err(err)?;
    Ok((f.to_string(), f.order()))
}

/// U(1)_k surgery invariant of a symmetric linking matrix.
#[pyfunction]
#[pyo3(signature = (matrix, k, precision = 30))]
fn u1_invariant(matrix: Vec<Vec<i64>>, k: u32, precision: u32) -> PyResult<Complex64> {
    Ok(u1_surgery_invariant(&matrix, k, self::precision(precision)?).map_err(err)?.to_c64())
}

/// Smith form, H¹(M; Z/k) and the linking form of a linking matrix.
#[pyfunction]
fn homology<'py>(py: Python<'py>, matrix: Vec<Vec<i64>>, k: u32) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &homology_data(&matrix, k).map_err(err)?)
}

/// Z(k) over a window of levels.
#[pyclass(frozen, module = "wrt")]
struct Sweep {
    inner: KSweep,
}

#[pymethods]
impl Sweep {
    #[staticmethod]
    #[pyo3(signature = (text, family = "su2", normalization = "raw"))]
    fn from_csv(text: &str, family: &str, normalization: &str) -> PyResult<Self> {
        let inner = KSweep::from_csv(text, PlumbingGraph::empty(), self::family(family)?, self::normalization(normalization)?)
            .map_err(err)?;
        Ok(Sweep { inner })
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    #[getter]
    fn k_values(&self) -> Vec<u32> {
        self.inner.k_values.clone()
    }

    #[getter]
    fn values(&self) -> Vec<Complex64> {
        self.inner.values.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.k_values.len()
    }

    /// Peaks of the phase spectrum as {"peaks": [...], "window": [kmin, kmax]}.
    #[pyo3(signature = (threshold = 0.05, max_den = None))]
    fn spectrum<'py>(&self, py: Python<'py>, threshold: f64, max_den: Option<i64>) -> PyResult<Bound<'py, PyAny>> {
        let sp = asymptotics::phase_spectrum(&self.inner, threshold, max_den).map_err(err)?;
        py.import("json")?.call_method1("loads", (sp.to_json(),))
    }

    /// Least-squares fit of Z in powers of 1/(k + shift).
    #[pyo3(signature = (n_max = 4, shift = 0.0))]
    fn perturbative_fit<'py>(&self, py: Python<'py>, n_max: usize, shift: f64) -> PyResult<Bound<'py, PyAny>> {
        let fit = asymptotics::perturbative_fit(&self.inner.samples(), n_max, shift).map_err(err)?;
        to_py(py, &fit)
    }
}

#[pyfunction]
#[pyo3(signature = (manifold, k_min, k_max, family = "su2", normalization = "raw", exact = false, precision = 30))]
#[allow(clippy::too_many_arguments)]
fn sweep(
    py: Python<'_>,
    manifold: Manifold<'_>,
    k_min: u32,
    k_max: u32,
    family: &str,
    normalization: &str,
    exact: bool,
    precision: u32,
) -> PyResult<Sweep> {
    let g = manifold.graph()?;
    let (fam, norm) = (self::family(family)?, self::normalization(normalization)?);
    let eval = if exact { Evaluation::Exact(self::precision(precision)?) } else { Evaluation::Numeric };
    let inner = py.detach(|| asymptotics::k_sweep(fam, &g, k_min, k_max, norm, eval)).map_err(err)?;
    Ok(Sweep { inner })
}

/// Coefficients a_n = n!/ω^{n+1} of the series with one Borel pole at ω.
#[pyfunction]
#[pyo3(signature = (n_terms, omega = Complex64::new(1.0, 0.0)))]
fn synthetic_factorial(n_terms: usize, omega: Complex64) -> Vec<Complex64> {
    resurgence::synthetic_factorial(n_terms, omega).coeffs
}

/// Stable Borel-plane poles of a formal series, optionally matched against CS values.
#[pyfunction]
#[pyo3(signature = (coeffs, terms = None, variable = "hbar", cs = None))]
fn borel_poles<'py>(
    py: Python<'py>,
    coeffs: Vec<Complex64>,
    terms: Option<usize>,
    variable: &str,
    cs: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let variable = match variable {
        "hbar" => Variable::Hbar,
        "inverse_k" => Variable::InverseK,
        other => return Err(PyValueError::new_err(format!("unknown variable '{other}' (hbar or inverse_k)"))),
    };
    let s = FormalSeries::new(coeffs, variable);
    let mut report = resurgence::borel_poles(&s, terms.unwrap_or(s.len())).map_err(err)?;
    if let Some(cs) = cs {
        report = report.with_matches(&cs, STOKES_TOL);
    }
    py.import("json")?.call_method1("loads", (report.to_json(),))
}

#[pymodule]
fn wrt(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Mtc>()?;
    m.add_class::<Plumbing>()?;
    m.add_class::<Sweep>()?;
    m.add_function(wrap_pyfunction!(rt_invariant, m)?)?;
    m.add_function(wrap_pyfunction!(rt_invariant_decimal, m)?)?;
    m.add_function(wrap_pyfunction!(colored_sum, m)?)?;
    m.add_function(wrap_pyfunction!(u1_invariant, m)?)?;
    m.add_function(wrap_pyfunction!(homology, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_factorial, m)?)?;
    m.add_function(wrap_pyfunction!(borel_poles, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
