//! Python bindings for `dhg-core`.
//!
//! Reports come back as plain dicts decoded from the same JSON the CLI writes.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyType;
use serde::Serialize;

use dhg_core::darboux::{darboux_from_section, max_holonomy_deviation, prolong, verify_multiratio};
use dhg_core::holo::{induced_structure, HolomorphicStructure, Immersion};
use dhg_core::io::{points_from_records, PointRecord, SpectralReport};
use dhg_core::mesh::{build_regular_torus, derive, fundamental_domain, thin_torus, LatticeBasis, RegularTorus};
use dhg_core::polygon::{polygon_flow, polygon_spectral, DiscreteCurve};
use dhg_core::quatlin::{self, HPoint, C64};
use dhg_core::random::{random_immersion, random_polygon_values, rng, ValueKind};
use dhg_core::spectral::{eigen_section, lambda_branches, linear_components, spectral_data, Multiplier};
use dhg_core::suite::{run_suite, SuiteConfig};
use dhg_core::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_)
        | Error::NonPositiveBasis
        | Error::NonRegularQuotient
        | Error::NotAdapted
        | Error::TooSmall { .. }
        | Error::NotClosed => PyValueError::new_err(e.to_string()),
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn to_dict<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<PyObject> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn kind(complex: bool) -> ValueKind {
    if complex {
        ValueKind::Complex
    } else {
        ValueKind::Quaternionic
    }
}

fn points_in(values: Vec<Vec<f64>>) -> PyResult<Vec<HPoint>> {
    let records = values
        .into_iter()
        .map(|v| match v.len() {
            4 => Ok(PointRecord::Affine([v[0], v[1], v[2], v[3]])),
            8 => Ok(PointRecord::Homogeneous([[v[0], v[1], v[2], v[3]], [v[4], v[5], v[6], v[7]]])),
            n => Err(PyValueError::new_err(format!("a point needs 4 or 8 components, got {n}"))),
        })
        .collect::<PyResult<Vec<_>>>()?;
    points_from_records(&records).map_err(err)
}

/// Affine coordinates, or `None` for the point at infinity.
fn points_out(points: &[HPoint]) -> Vec<Option<[f64; 4]>> {
    points.iter().map(|p| p.affine().map(|q| q.to_array())).collect()
}

#[pyclass(module = "dhg", frozen)]
#[derive(Clone, Copy)]
struct Quaternion(quatlin::Quaternion);

#[pymethods]
impl Quaternion {
    #[new]
    #[pyo3(signature = (a=0.0, b=0.0, c=0.0, d=0.0))]
    fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Quaternion(quatlin::Quaternion::new(a, b, c, d))
    }

    fn components(&self) -> [f64; 4] {
        self.0.to_array()
    }

    fn conj(&self) -> Self {
        Quaternion(self.0.conj())
    }

    fn inv(&self) -> PyResult<Self> {
        if self.0.norm_sqr() == 0.0 {
            return Err(PyArithmeticError::new_err("zero quaternion has no inverse"));
        }
        Ok(Quaternion(self.0.inv()))
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Real part and imaginary norm, which classify the conjugacy class.
    fn conjugacy_pair(&self) -> (f64, f64) {
        self.0.conjugacy_pair()
    }

    fn __add__(&self, o: &Quaternion) -> Self {
        Quaternion(self.0 + o.0)
    }

    fn __sub__(&self, o: &Quaternion) -> Self {
        Quaternion(self.0 - o.0)
    }

    fn __mul__(&self, o: &Quaternion) -> Self {
        Quaternion(self.0 * o.0)
    }

    fn __neg__(&self) -> Self {
        Quaternion(-self.0)
    }

    fn __eq__(&self, o: &Quaternion) -> bool {
        self.0 == o.0
    }

    fn __repr__(&self) -> String {
        let q = self.0;
        format!("Quaternion({}, {}, {}, {})", q.a, q.b, q.c, q.d)
    }
}

fn quats(values: &[Quaternion]) -> Vec<quatlin::Quaternion> {
    values.iter().map(|q| q.0).collect()
}

/// Multi-ratio of six quaternions.
#[pyfunction]
fn multi_ratio(values: Vec<Quaternion>) -> PyResult<Quaternion> {
    let x: [quatlin::Quaternion; 6] =
        quats(&values).try_into().map_err(|_| PyValueError::new_err("multi_ratio needs six values"))?;
    quatlin::multi_ratio6(&x).map(Quaternion).map_err(err)
}

/// Cross-ratio of four quaternions.
#[pyfunction]
fn cross_ratio(values: Vec<Quaternion>) -> PyResult<Quaternion> {
    let x: [quatlin::Quaternion; 4] =
        quats(&values).try_into().map_err(|_| PyValueError::new_err("cross_ratio needs four values"))?;
    quatlin::cross_ratio4(&x).map(Quaternion).map_err(err)
}

/// A torus with regular combinatorics, given by a lattice basis.
#[pyclass(module = "dhg", frozen)]
#[derive(Clone)]
struct Torus(RegularTorus);

#[pymethods]
impl Torus {
    #[new]
    fn new(gamma: [i64; 2], eta: [i64; 2]) -> PyResult<Self> {
        build_regular_torus(LatticeBasis::new(gamma, eta)).map(Torus).map_err(err)
    }

    /// The thin torus with `n` vertices.
    #[classmethod]
    fn thin(_cls: &Bound<'_, PyType>, n: usize) -> PyResult<Self> {
        thin_torus(n).map(Torus).map_err(err)
    }

    #[getter]
    fn basis(&self) -> ([i64; 2], [i64; 2]) {
        (self.0.basis.gamma, self.0.basis.eta)
    }

    #[getter]
    fn vertices(&self) -> Vec<[i64; 2]> {
        self.0.vertices.clone()
    }

    #[getter]
    fn black(&self) -> Vec<[usize; 3]> {
        self.0.black.clone()
    }

    #[getter]
    fn white(&self) -> Vec<[usize; 3]> {
        self.0.white.clone()
    }

    /// Parent indices of the derived torus: vertex to black, black to white, white to vertex.
    fn derived(&self) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let d = derive(&self.0);
        (d.vertex_to_parent_black, d.black_to_parent_white, d.white_to_parent_vertex)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        let b = self.0.basis;
        format!("Torus(gamma={:?}, eta={:?}, vertices={})", b.gamma, b.eta, self.0.len())
    }
}

/// An immersed torus with its induced holomorphic structure.
#[pyclass(module = "dhg", frozen)]
struct Surface {
    torus: RegularTorus,
    f: Immersion,
    hs: HolomorphicStructure,
}

impl Surface {
    fn build(torus: RegularTorus, f: Immersion) -> PyResult<Self> {
        let hs = induced_structure(&torus, &f).map_err(err)?;
        Ok(Surface { torus, f, hs })
    }
}

#[pymethods]
impl Surface {
    /// Points are affine `[a, b, c, d]` or homogeneous `[x0.., x1..]` lists, one per vertex.
    #[new]
    fn new(torus: &Torus, points: Vec<Vec<f64>>) -> PyResult<Self> {
        let points = points_in(points)?;
        if points.len() != torus.0.len() {
            return Err(PyValueError::new_err(format!(
                "torus has {} vertices, got {} points",
                torus.0.len(),
                points.len()
            )));
        }
        Surface::build(torus.0.clone(), Immersion::new(points))
    }

    #[classmethod]
    #[pyo3(signature = (torus, seed=42, complex=false))]
    fn random(_cls: &Bound<'_, PyType>, torus: &Torus, seed: u64, complex: bool) -> PyResult<Self> {
        let f = random_immersion(&torus.0, &mut rng(seed), kind(complex));
        Surface::build(torus.0.clone(), f)
    }

    #[getter]
    fn torus(&self) -> Torus {
        Torus(self.torus.clone())
    }

    #[getter]
    fn points(&self) -> Vec<Option<[f64; 4]>> {
        points_out(&self.f.points)
    }

    /// Quaternionic coefficients per black triangle, as component arrays.
    fn coefficients(&self) -> Vec<[[f64; 4]; 3]> {
        self.hs.coeffs.iter().map(|c| c.map(|q| q.to_array())).collect()
    }

    /// Characteristic polynomial, ends, linear components and unit-circle samples.
    #[pyo3(signature = (samples=64))]
    fn spectrum(&self, py: Python<'_>, samples: usize) -> PyResult<PyObject> {
        let data = spectral_data(&self.hs, &self.torus, samples).map_err(err)?;
        let report = SpectralReport::new(&data, &linear_components(&data.poly));
        to_dict(py, &report)
    }

    /// Lambda values on the spectral curve over `mu`.
    fn lambda_branches(&self, mu: C64) -> PyResult<Vec<C64>> {
        let fd = fundamental_domain(&self.torus, &self.torus.adapted_basis(0), 0).map_err(err)?;
        Ok(lambda_branches(&self.hs, &fd, mu))
    }

    /// Darboux transform for the multiplier `(mu, lambda)`; without `lam`
    /// the `branch`-th root over `mu` is used.
    #[pyo3(signature = (mu, lam=None, branch=0))]
    fn darboux(&self, py: Python<'_>, mu: C64, lam: Option<C64>, branch: usize) -> PyResult<PyObject> {
        let fd = fundamental_domain(&self.torus, &self.torus.adapted_basis(0), 0).map_err(err)?;
        let lambda = match lam {
            Some(l) => l,
            None => *lambda_branches(&self.hs, &fd, mu)
                .get(branch)
                .ok_or_else(|| PyValueError::new_err(format!("branch {branch} out of range")))?,
        };
        let section = eigen_section(&self.hs, &fd, Multiplier::new(mu, lambda)).map_err(err)?;
        let p = prolong(&section, &self.hs, &self.f).map_err(err)?;
        let ft = darboux_from_section(&p, &self.f).map_err(err)?;
        let check = verify_multiratio(&self.torus, &self.f, &ft).map_err(err)?;
        let (holonomy_deviation, _) = max_holonomy_deviation(&self.torus, &self.f, &ft).map_err(err)?;
        #[derive(Serialize)]
        struct Out {
            lambda: C64,
            points: Vec<Option<[f64; 4]>>,
            prolongation_residual: f64,
            max_multiratio_dev: f64,
            regularity_violations: Vec<(usize, usize)>,
            holonomy_deviation: f64,
        }
        to_dict(
            py,
            &Out {
                lambda,
                points: points_out(&ft.points),
                prolongation_residual: p.max_residual,
                max_multiratio_dev: check.max_multiratio_dev,
                regularity_violations: check.regularity_violations,
                holonomy_deviation,
            },
        )
    }
}

/// A closed polygon in the quaternionic projective line.
#[pyclass(module = "dhg", frozen)]
struct Polygon(DiscreteCurve);

#[pymethods]
impl Polygon {
    #[new]
    fn new(points: Vec<Vec<f64>>) -> PyResult<Self> {
        DiscreteCurve::new(points_in(points)?, true).map(Polygon).map_err(err)
    }

    /// The regular `n`-gon on the unit circle of the complex line.
    #[classmethod]
    fn regular(_cls: &Bound<'_, PyType>, n: usize) -> PyResult<Self> {
        let values: Vec<quatlin::Quaternion> = (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                quatlin::Quaternion::new(t.cos(), t.sin(), 0.0, 0.0)
            })
            .collect();
        DiscreteCurve::from_affine(&values, true).map(Polygon).map_err(err)
    }

    #[classmethod]
    #[pyo3(signature = (n, seed=42, complex=false))]
    fn random(_cls: &Bound<'_, PyType>, n: usize, seed: u64, complex: bool) -> PyResult<Self> {
        let points = random_polygon_values(n, &mut rng(seed), kind(complex));
        DiscreteCurve::new(points, true).map(Polygon).map_err(err)
    }

    #[getter]
    fn points(&self) -> Vec<Option<[f64; 4]>> {
        points_out(&self.0.points)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// Spectral polynomial of the holonomy and its asymptotic data.
    fn spectral(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_dict(py, &polygon_spectral(&self.0).map_err(err)?)
    }

    /// `steps` closed Darboux transforms along the eigenline `index` of the holonomy at `lam`.
    #[pyo3(signature = (lam, steps, index=0))]
    fn flow(&self, lam: C64, steps: usize, index: usize) -> PyResult<Vec<Vec<Option<[f64; 4]>>>> {
        let curves = polygon_flow(&self.0, lam, steps, index).map_err(err)?;
        Ok(curves.iter().map(|c| points_out(&c.points)).collect())
    }
}

/// Runs the invariant suite; `criteria` empty means all of them.
#[pyfunction]
#[pyo3(signature = (seed=42, tol=None, criteria=Vec::new()))]
fn verify(py: Python<'_>, seed: u64, tol: Option<f64>, criteria: Vec<String>) -> PyResult<PyObject> {
    let cfg = SuiteConfig { seed, tol, criteria };
    let report = py.allow_threads(|| run_suite(&cfg)).map_err(PyValueError::new_err)?;
    to_dict(py, &report)
}

#[pymodule]
fn dhg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Quaternion>()?;
    m.add_class::<Torus>()?;
    m.add_class::<Surface>()?;
    m.add_class::<Polygon>()?;
    m.add_function(wrap_pyfunction!(multi_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(cross_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
