//! Python bindings: sequences, identities, proofs, the catalog, relation
//! search and cube spirals. Structured results are returned as plain
//! dicts and lists.

use fiblab::catalog::{self, Catalog as CoreCatalog, Mode};
use fiblab::classifier::classify;
use fiblab::discovery::{self, parse_range, parse_targets, Basis, Products};
use fiblab::dsl::{self, Identity as CoreIdentity, UmbralVariant};
use fiblab::evaluator::{check_identity, CheckStatus, Sweep};
use fiblab::prover::{self, ProofStatus};
use fiblab::sequences;
use fiblab::tiling::{self, ExportFormat};
use num_bigint::BigInt;
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use serde_json::{json, Value};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Hand a JSON value to Python as native dicts, lists and scalars.
fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(py
        .import("json")?
        .call_method1("loads", (v.to_string(),))?
        .unbind())
}

fn pairs(xs: &[(String, i64)]) -> Value {
    xs.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<serde_json::Map<_, _>>().into()
}

/// `F(n)` for any integer `n`.
#[pyfunction]
fn fib(n: i64) -> BigInt {
    sequences::fib(n)
}

/// `L(n)` for `n >= 0`.
#[pyfunction]
fn lucas(n: i64) -> PyResult<BigInt> {
    sequences::lucas(n).map_err(value_error)
}

/// k-Fibonacci number `F_k(n)`.
#[pyfunction]
fn k_fib(k: i64, n: i64) -> PyResult<BigInt> {
    sequences::k_fib(k, n).map_err(value_error)
}

/// Generalized Fibonacci number with seeds `h0`, `h1`.
#[pyfunction]
fn gen_fib(h0: i64, h1: i64, n: i64) -> BigInt {
    sequences::gen_fib(h0, h1, n)
}

/// A parsed identity (possibly a parameterized family).
#[pyclass(frozen, skip_from_py_object, module = "pyfiblab")]
#[derive(Clone)]
struct Identity {
    inner: CoreIdentity,
}

#[pymethods]
impl Identity {
    /// Parse `lhs = rhs [= ...] [; conditions]`.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Identity> {
        dsl::parse_identity(text)
            .map(|inner| Identity { inner })
            .map_err(value_error)
    }

    #[getter]
    fn id(&self) -> String {
        self.inner.meta.id.clone()
    }

    /// Family parameters as `(name, lo, hi)`.
    #[getter]
    fn params(&self) -> Vec<(String, i64, i64)> {
        self.inner
            .params
            .iter()
            .map(|p| (p.name.clone(), p.lo, p.hi))
            .collect()
    }

    fn render(&self) -> String {
        dsl::render(&self.inner)
    }

    fn __str__(&self) -> String {
        self.render()
    }

    fn __repr__(&self) -> String {
        format!("Identity({:?})", self.render())
    }

    /// Every grid instance of a family.
    fn instances(&self) -> PyResult<Vec<Identity>> {
        dsl::instances(&self.inner)
            .map(|v| v.into_iter().map(|inner| Identity { inner }).collect())
            .map_err(value_error)
    }

    /// Exact numeric sweep over `range` consecutive values per index.
    #[pyo3(signature = (range = 300))]
    fn check(&self, py: Python<'_>, range: u64) -> PyResult<Py<PyAny>> {
        let id = self.inner.clone();
        let r = py
            .detach(|| check_identity(&id, &Sweep::with_len(range.max(1))))
            .map_err(value_error)?;
        let counterexample = match &r.status {
            CheckStatus::AllEqual => Value::Null,
            CheckStatus::CounterexampleAt {
                assignment,
                pair,
                left,
                right,
            } => json!({
                "assignment": pairs(assignment),
                "pair": pair,
                "left": left.to_string(),
                "right": right.to_string(),
            }),
        };
        let v = json!({
            "id": r.id,
            "all_equal": r.all_equal(),
            "instances": r.instances,
            "assignments": r.assignments,
            "counterexample": counterexample,
        });
        to_py(py, &v)
    }

    /// Symbolic proof; one dict per family instance.
    fn prove(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let id = self.inner.clone();
        let outcomes = py.detach(|| prover::prove(&id)).map_err(value_error)?;
        let v: Value = outcomes
            .iter()
            .map(|o| {
                let counterexample = match &o.status {
                    ProofStatus::Falsified { assignment } => pairs(assignment),
                    _ => Value::Null,
                };
                json!({
                    "bindings": pairs(&o.bindings),
                    "status": o.status.name(),
                    "method": o.method.name(),
                    "counterexample": counterexample,
                    "diagnostic": o.diagnostic,
                })
            })
            .collect();
        to_py(py, &v)
    }

    /// True when every instance is proven.
    fn is_proven(&self, py: Python<'_>) -> PyResult<bool> {
        let id = self.inner.clone();
        let outcomes = py.detach(|| prover::prove(&id)).map_err(value_error)?;
        Ok(outcomes.iter().all(|o| o.is_proven()))
    }

    /// Structural class, e.g. `HomogeneousCubic`.
    fn classify(&self) -> String {
        classify(&self.inner).to_string()
    }
}

/// A catalog of identities.
#[pyclass(frozen, module = "pyfiblab")]
struct Catalog {
    inner: CoreCatalog,
}

#[pymethods]
impl Catalog {
    /// The corpus bundled with the library.
    #[staticmethod]
    fn shipped() -> Catalog {
        Catalog {
            inner: CoreCatalog::shipped(),
        }
    }

    /// Parse catalog text.
    #[staticmethod]
    fn load(text: &str) -> PyResult<Catalog> {
        catalog::load(text)
            .map(|inner| Catalog { inner })
            .map_err(value_error)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __getitem__(&self, id: &str) -> PyResult<Identity> {
        self.inner
            .get(id)
            .map(|e| Identity {
                inner: e.identity.clone(),
            })
            .ok_or_else(|| PyKeyError::new_err(id.to_string()))
    }

    fn ids(&self) -> Vec<String> {
        self.inner.entries.iter().map(|e| e.id().to_string()).collect()
    }

    fn render(&self) -> String {
        self.inner.render()
    }

    /// Verify every entry; `mode` is `numeric`, `symbolic` or `both`.
    #[pyo3(signature = (mode = "both", range = 300))]
    fn verify(&self, py: Python<'_>, mode: &str, range: u64) -> PyResult<Py<PyAny>> {
        let mode: Mode = mode.parse().map_err(value_error)?;
        let report = py.detach(|| {
            catalog::verify_all_with(&self.inner, mode, &Sweep::with_len(range.max(1)))
        });
        let mut v = serde_json::to_value(&report).map_err(value_error)?;
        v["ok"] = json!(report.ok());
        to_py(py, &v)
    }

    /// Ids whose stated class disagrees with the classifier.
    fn class_mismatches(&self) -> Vec<String> {
        catalog::class_mismatches(&self.inner)
            .into_iter()
            .map(|m| m.id)
            .collect()
    }
}

/// Identities from catalog text or one `[label:] identity [; conds]` per line.
#[pyfunction]
fn load_identities(text: &str) -> PyResult<Vec<Identity>> {
    catalog::load_identities(text)
        .map(|v| v.into_iter().map(|inner| Identity { inner }).collect())
        .map_err(value_error)
}

/// The p-th umbral identity, `variant` `plus` or `minus`.
#[pyfunction]
#[pyo3(signature = (p, variant = "plus"))]
fn umbral(p: u32, variant: &str) -> PyResult<Identity> {
    if p == 0 {
        return Err(value_error("p must be at least 1"));
    }
    let v: UmbralVariant = variant.parse().map_err(value_error)?;
    Ok(Identity {
        inner: dsl::expand_umbral(p, v),
    })
}

/// Search for integer relations among cubic products and targets, keeping
/// only the proven ones.
#[pyfunction]
#[pyo3(signature = (window = "-1..1", products = "all", targets = "triple:0", max_terms = 3))]
fn search(
    py: Python<'_>,
    window: &str,
    products: &str,
    targets: &str,
    max_terms: usize,
) -> PyResult<Vec<Identity>> {
    let (lo, hi) = parse_range(window).map_err(value_error)?;
    let products: Products = products.parse().map_err(value_error)?;
    let targets = parse_targets(targets).map_err(value_error)?;
    let basis = Basis::cubic(lo..=hi, products, &targets).map_err(value_error)?;
    let found = py.detach(|| {
        discovery::search(&basis, &basis.default_samples(), max_terms)
            .map(|c| discovery::confirm(&c))
    });
    Ok(found
        .map_err(value_error)?
        .into_iter()
        .map(|d| Identity { inner: d.identity })
        .collect())
}

/// The first `n` cubes of a spiral as dicts with exact (`"p/q"`) and float
/// corners.
#[pyfunction]
#[pyo3(signature = (map, n = 15))]
fn spiral(py: Python<'_>, map: u8, n: usize) -> PyResult<Py<PyAny>> {
    let boxes = tiling::generate(map, n).map_err(value_error)?;
    let v: Value =
        serde_json::from_str(&tiling::export(&boxes, ExportFormat::Json)).map_err(value_error)?;
    to_py(py, &v)
}

/// Packing checks for the first `n` cubes of a spiral.
#[pyfunction]
#[pyo3(signature = (map, n = 15))]
fn spiral_report(py: Python<'_>, map: u8, n: usize) -> PyResult<Py<PyAny>> {
    let boxes = tiling::generate(map, n).map_err(value_error)?;
    let v = serde_json::to_value(tiling::analyze(&boxes, map)).map_err(value_error)?;
    to_py(py, &v)
}

/// Spiral geometry as `json` or `obj` text.
#[pyfunction]
#[pyo3(signature = (map, n = 15, format = "obj"))]
fn export_spiral(map: u8, n: usize, format: &str) -> PyResult<String> {
    let fmt: ExportFormat = format.parse().map_err(value_error)?;
    let boxes = tiling::generate(map, n).map_err(value_error)?;
    Ok(tiling::export(&boxes, fmt))
}

#[pymodule]
fn pyfiblab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Identity>()?;
    m.add_class::<Catalog>()?;
    m.add_function(wrap_pyfunction!(fib, m)?)?;
    m.add_function(wrap_pyfunction!(lucas, m)?)?;
    m.add_function(wrap_pyfunction!(k_fib, m)?)?;
    m.add_function(wrap_pyfunction!(gen_fib, m)?)?;
    m.add_function(wrap_pyfunction!(load_identities, m)?)?;
    m.add_function(wrap_pyfunction!(umbral, m)?)?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    m.add_function(wrap_pyfunction!(spiral, m)?)?;
    m.add_function(wrap_pyfunction!(spiral_report, m)?)?;
    m.add_function(wrap_pyfunction!(export_spiral, m)?)?;
    Ok(())
}
