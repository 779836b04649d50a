//! Python bindings: chain files, generators, the filling pipeline and its verifier.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use isochain::cli_io::{
    generate as generate_chain, parse_chain_file, parse_norm, read_chain_file, serialize_chain_file, write_chain_file,
    write_obj, ChainFile, GeneratorSpec,
};
use isochain::decomposition::{ConstantsChain, DecompositionConfig};
use isochain::isofill::{fill as fill_chain, verify as verify_chain, FillConfig, FillingCertificate};
use isochain::rational::parse_rational;
use isochain::{Error, NormedSpace, Q};

create_exception!(pyisochain, CertificateError, PyException, "A certified inequality or invariant failed.");

fn to_py(e: Error) -> PyErr {
    if e.is_certificate_failure() {
        CertificateError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn rational(s: &str, what: &str) -> PyResult<Q> {
    parse_rational(s).map_err(|e| PyValueError::new_err(format!("{what}: {e}")))
}

/// A polyhedral chain with integer weights, stored with the norm of its ambient space.
#[pyclass(name = "Chain", module = "pyisochain", skip_from_py_object)]
#[derive(Clone)]
pub struct PyChain {
    file: ChainFile,
}

impl PyChain {
    fn space(&self) -> PyResult<NormedSpace> {
        NormedSpace::new(self.file.norm.clone()).map_err(to_py)
    }
}

#[pymethods]
impl PyChain {
    /// Parses the text chain format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        parse_chain_file(text).map(|file| PyChain { file }).map_err(to_py)
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        read_chain_file(&path).map(|file| PyChain { file }).map_err(to_py)
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        write_chain_file(&self.file, &path).map_err(to_py)
    }

    fn to_text(&self) -> String {
        serialize_chain_file(&self.file)
    }

    /// Wavefront OBJ text for the chain's simplices.
    fn to_obj(&self) -> PyResult<String> {
        write_obj(&self.file.chain).map_err(to_py)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.file.chain.dim()
    }

    #[getter]
    fn ambient(&self) -> usize {
        self.file.chain.ambient()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.file.warnings.clone()
    }

    fn __len__(&self) -> usize {
        self.file.chain.len()
    }

    fn mass(&self) -> PyResult<f64> {
        self.file.chain.mass(&self.space()?).map_err(to_py)
    }

    fn diameter(&self) -> PyResult<f64> {
        self.file.chain.support_diameter(&self.space()?).map_err(to_py)
    }

    fn boundary(&self) -> Self {
        let mut file = self.file.clone();
        file.chain = self.file.chain.boundary();
        file.warnings.clear();
        PyChain { file }
    }

    fn is_cycle(&self) -> bool {
        self.file.chain.is_cycle()
    }

    /// `(weight, [[x, y, ...], ...])` per simplex, with float coordinates.
    fn simplices(&self) -> Vec<(i64, Vec<Vec<f64>>)> {
        self.file
            .chain
            .terms()
            .map(|(s, w)| (w, s.vertices().iter().map(|p| p.to_f64()).collect()))
            .collect()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.file.norm == other.file.norm && self.file.chain == other.file.chain
    }

    fn __repr__(&self) -> String {
        format!(
            "Chain(dim={}, ambient={}, simplices={})",
            self.file.chain.dim(),
            self.file.chain.ambient(),
            self.file.chain.len()
        )
    }
}

/// Outcome of a filling run: every quantity the verifier re-derives.
#[pyclass(name = "Certificate", module = "pyisochain", skip_from_py_object)]
#[derive(Clone)]
pub struct PyCertificate {
    cert: FillingCertificate,
}

#[pymethods]
impl PyCertificate {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        FillingCertificate::parse_kv(text).map(|cert| PyCertificate { cert }).map_err(to_py)
    }

    fn to_text(&self) -> String {
        self.cert.to_kv()
    }

    #[getter]
    fn ratio(&self) -> f64 {
        self.cert.ratio
    }

    #[getter]
    fn d_k(&self) -> f64 {
        self.cert.d_k
    }

    #[getter]
    fn input_mass(&self) -> f64 {
        self.cert.input_mass
    }

    #[getter]
    fn output_mass(&self) -> f64 {
        self.cert.output_mass
    }

    #[getter]
    fn certified_bound(&self) -> f64 {
        self.cert.certified_bound
    }

    #[getter]
    fn rounds(&self) -> usize {
        self.cert.rounds.len()
    }

    #[getter]
    fn pieces(&self) -> usize {
        self.cert.pieces.len()
    }

    #[getter]
    fn boundary_residual_zero(&self) -> bool {
        self.cert.boundary_residual_zero
    }

    /// Internal consistency only, without the chains: `{check: passed}`.
    fn self_check(&self) -> Vec<(String, bool)> {
        self.cert.self_check().checks.into_iter().map(|c| (c.name, c.pass)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Certificate(k={}, ratio={:.6}, D_k={:.6e})", self.cert.k, self.cert.ratio, self.cert.d_k)
    }
}

/// Builds a test cycle. `family` is one of the CLI generator names,
/// e.g. `"regular-polygon"` or `"polyhedral-sphere"`.
#[pyfunction]
#[pyo3(signature = (family, *, n=8, radius="1", noise="1/2", count=2, spacing="3", level=0, aspect="10", seed=0, norm="euclidean", ambient=None))]
#[allow(clippy::too_many_arguments)]
fn generate(
    family: &str,
    n: usize,
    radius: &str,
    noise: &str,
    count: usize,
    spacing: &str,
    level: u32,
    aspect: &str,
    seed: u64,
    norm: &str,
    ambient: Option<usize>,
) -> PyResult<PyChain> {
    let spec = match family {
        "regular-polygon" => GeneratorSpec::RegularPolygon {
            n,
            radius: rational(radius, "radius")?,
        },
        "perturbed-polygon" => GeneratorSpec::PerturbedPolygon {
            n,
            radius: rational(radius, "radius")?,
            noise: rational(noise, "noise")?,
        },
        "multi-loop" => GeneratorSpec::MultiLoop {
            count,
            spacing: rational(spacing, "spacing")?,
        },
        "polyhedral-sphere" => GeneratorSpec::PolyhedralSphere { level },
        "thin-rectangle" => GeneratorSpec::ThinRectangle {
            aspect: rational(aspect, "aspect")?,
        },
        "figure-eight" => GeneratorSpec::FigureEight,
        "cube-surface" => GeneratorSpec::CubeSurface,
        other => return Err(PyValueError::new_err(format!("unknown family {other:?}"))),
    };
    let surface = matches!(family, "polyhedral-sphere" | "cube-surface");
    let ambient = ambient.unwrap_or(if surface { 3 } else { 2 });
    let norm = parse_norm(norm, ambient).map_err(|e| PyValueError::new_err(format!("norm: {e}")))?;
    let chain = generate_chain(&spec, &norm, seed).map_err(to_py)?;
    let file = ChainFile::new(norm, chain).map_err(to_py)?;
    Ok(PyChain { file })
}

/// Fills a 1- or 2-cycle and returns `(filling, certificate)`.
#[pyfunction]
#[pyo3(signature = (chain, *, lam="1/6", eps=1e-6))]
fn fill(py: Python<'_>, chain: &PyChain, lam: &str, eps: f64) -> PyResult<(PyChain, PyCertificate)> {
    let space = chain.space()?;
    let config = FillConfig {
        eps_stop: eps,
        decomposition: DecompositionConfig {
            lambda: rational(lam, "lam")?,
            ..Default::default()
        },
        ..Default::default()
    };
    let t = chain.file.chain.clone();
    let (s, cert) = py.detach(|| fill_chain(&t, &space, &config)).map_err(to_py)?;
    let file = ChainFile::new(chain.file.norm.clone(), s).map_err(to_py)?;
    Ok((PyChain { file }, PyCertificate { cert }))
}

/// Re-derives every certified quantity from `t` and `s`: `{check: passed}`.
#[pyfunction]
fn verify(py: Python<'_>, t: &PyChain, s: &PyChain, cert: &PyCertificate) -> PyResult<Vec<(String, bool)>> {
    let space = t.space()?;
    let (tc, sc, c) = (t.file.chain.clone(), s.file.chain.clone(), cert.cert.clone());
    let report = py.detach(|| verify_chain(&tc, &sc, &c, &space)).map_err(to_py)?;
    Ok(report.checks.into_iter().map(|c| (c.name, c.pass)).collect())
}

/// The recursive constants for dimension `k` as `(name, value)` pairs.
#[pyfunction]
#[pyo3(signature = (k, *, lam="1/6", c_prev=None))]
fn constants(k: usize, lam: &str, c_prev: Option<f64>) -> PyResult<Vec<(String, String)>> {
    let lambda = rational(lam, "lam")?;
    let consts = match c_prev {
        Some(c) => ConstantsChain::new(k, Some(c), lambda),
        None => ConstantsChain::recursive(k, lambda),
    }
    .map_err(to_py)?;
    Ok(consts.to_kv())
}

#[pymodule]
fn pyisochain(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChain>()?;
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(fill, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(constants, m)?)?;
    m.add("CertificateError", m.py().get_type::<CertificateError>())?;
    Ok(())
}
