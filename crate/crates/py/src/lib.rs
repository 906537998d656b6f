//! Python bindings: connections, composites, transports, string-algebra
//! squares and fusion rings. Reports come back as dicts.

// the pyo3 0.22 macros expand to `?` on values that are already `PyErr`
#![allow(clippy::useless_conversion)]

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qmultiple::composite::{build_y, check_renorm_invariance};
use qmultiple::connection::{
    build_dynkin_connection, build_group_connection, check_gybe, cyclic_group,
    random_control_connection, symmetric_group_s3, ConnectionSquare, Renormalization,
};
use qmultiple::fusion::{self, FusionRing as CoreRing};
use qmultiple::lattice::{enumerate_reduced_words, LatticePath, LatticePoint};
use qmultiple::state_sum::{StateSum, DEFAULT_CAP};
use qmultiple::string_algebra::{SpanningSet, StringAlgebra as CoreAlgebra};

fn err(e: qmultiple::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Connection", module = "qmultiple")]
#[derive(Clone)]
struct Connection {
    inner: ConnectionSquare,
}

#[pymethods]
impl Connection {
    /// Connection of the Dynkin diagram A_n.
    #[staticmethod]
    fn dynkin(n: usize) -> PyResult<Self> {
        if n < 2 {
            return Err(PyValueError::new_err("A_n needs n >= 2"));
        }
        Ok(Connection {
            inner: build_dynkin_connection(n),
        })
    }

    /// Group connection of "z2", "z3" or "s3".
    #[staticmethod]
    fn group(name: &str) -> PyResult<Self> {
        let g = match name {
            "z2" => cyclic_group(2),
            "z3" => cyclic_group(3),
            "s3" => symmetric_group_s3(),
            _ => return Err(PyValueError::new_err(format!("unknown group `{name}`"))),
        };
        Ok(Connection {
            inner: build_group_connection(&g).map_err(err)?,
        })
    }

    /// Random biunitary connection on K(A_3) that fails the Yang-Baxter test.
    #[staticmethod]
    #[pyo3(signature = (seed = 0))]
    fn control(seed: u64) -> PyResult<Self> {
        Ok(Connection {
            inner: random_control_connection(seed).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Connection {
            inner: qmultiple::io::connection_from_str(text).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Connection {
            inner: qmultiple::io::read_connection(path).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        qmultiple::io::connection_to_string(&self.inner).map_err(err)
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    #[getter]
    fn cell_count(&self) -> usize {
        self.inner.cells().len()
    }

    fn is_self_composable(&self) -> bool {
        self.inner.is_self_composable()
    }

    /// "horizontal", "vertical" or "both".
    fn renormalize(&self, mode: &str) -> PyResult<Self> {
        let m = match mode {
            "horizontal" => Renormalization::Horizontal,
            "vertical" => Renormalization::Vertical,
            "both" => Renormalization::Both,
            _ => {
                return Err(PyValueError::new_err(format!(
                    "unknown renormalization `{mode}`"
                )))
            }
        };
        Ok(Connection {
            inner: self.inner.renormalize(m),
        })
    }

    fn composite(&self) -> PyResult<Self> {
        Ok(Connection {
            inner: build_y(&self.inner).map_err(err)?,
        })
    }

    #[pyo3(signature = (tol = 1e-9))]
    fn check_biunitarity<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let rep = self.inner.check_biunitarity(tol);
        let d = PyDict::new_bound(py);
        d.set_item("plain", rep.plain)?;
        d.set_item("renormalized", rep.renormalized)?;
        d.set_item("structural", rep.structural.clone())?;
        d.set_item("residual", rep.residual())?;
        d.set_item("pass", rep.pass())?;
        Ok(d)
    }

    #[pyo3(signature = (tol = 1e-9))]
    fn check_gybe<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let rep = check_gybe(&self.inner, tol).map_err(err)?;
        let d = PyDict::new_bound(py);
        d.set_item("residual", rep.residual)?;
        d.set_item("configurations", rep.configurations)?;
        d.set_item("location", rep.location.as_ref().map(|l| l.to_vec()))?;
        d.set_item("pass", rep.pass())?;
        Ok(d)
    }

    #[pyo3(signature = (tol = 1e-9))]
    fn check_renorm_invariance<'py>(
        &self,
        py: Python<'py>,
        tol: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let rep = check_renorm_invariance(&self.inner, tol).map_err(err)?;
        let d = PyDict::new_bound(py);
        d.set_item("horizontal", rep.horizontal)?;
        d.set_item("vertical", rep.vertical)?;
        d.set_item("both", rep.both)?;
        d.set_item("pass", rep.pass())?;
        Ok(d)
    }

    /// Agreement of all shortest swap routes from `0..s` to its reverse.
    #[pyo3(signature = (s, tol = 1e-9, cap = DEFAULT_CAP))]
    fn check_transport<'py>(
        &self,
        py: Python<'py>,
        s: usize,
        tol: f64,
        cap: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let ss = StateSum::new(&self.inner, cap).map_err(err)?;
        let word: Vec<usize> = (0..s).collect();
        let from = LatticePath::from_origin(s, word.clone()).map_err(err)?;
        let to = LatticePath::from_origin(s, word.into_iter().rev().collect()).map_err(err)?;
        let rep = ss.check_well_defined(&from, &to, tol).map_err(err)?;
        let gram = ss.gram_report(&from, &to, tol).map_err(err)?;
        let d = PyDict::new_bound(py);
        d.set_item("routes", rep.routes)?;
        d.set_item("residual", rep.residual)?;
        d.set_item("min_singular", gram.min_singular)?;
        d.set_item("max_singular", gram.max_singular)?;
        d.set_item("pass", rep.pass() && gram.pass())?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Connection(cells={}, beta={:.6})",
            self.inner.cells().len(),
            self.inner.beta()
        )
    }
}

#[pyclass(name = "StringAlgebra", module = "qmultiple")]
struct StringAlgebra {
    inner: CoreAlgebra,
}

#[pymethods]
impl StringAlgebra {
    #[new]
    #[pyo3(signature = (connection, cap = DEFAULT_CAP))]
    fn new(connection: &Connection, cap: usize) -> PyResult<Self> {
        Ok(StringAlgebra {
            inner: CoreAlgebra::new(&connection.inner, cap).map_err(err)?,
        })
    }

    fn block_sizes(&self, n: Vec<usize>) -> PyResult<Vec<usize>> {
        self.inner.block_sizes(&LatticePoint(n)).map_err(err)
    }

    #[pyo3(signature = (n, i, j, tol = 1e-9, units = false))]
    fn commuting_square(
        &self,
        n: Vec<usize>,
        i: usize,
        j: usize,
        tol: f64,
        units: bool,
    ) -> PyResult<f64> {
        let span = if units {
            SpanningSet::MatrixUnits
        } else {
            SpanningSet::Generators
        };
        Ok(self
            .inner
            .check_commuting_square(&LatticePoint(n), i, j, tol, span)
            .map_err(err)?
            .residual)
    }

    #[pyo3(signature = (n, s, tol = 1e-9))]
    fn multileg(&self, n: usize, s: usize, tol: f64) -> PyResult<f64> {
        Ok(self
            .inner
            .check_multileg_square(n, s, tol)
            .map_err(err)?
            .residual)
    }

    #[pyo3(signature = (n, j, s, tol = 1e-9))]
    fn floor(&self, n: usize, j: usize, s: usize, tol: f64) -> PyResult<f64> {
        Ok(self
            .inner
            .check_floor_square(n, j, s, tol)
            .map_err(err)?
            .residual)
    }

    #[pyo3(signature = (n = 1, m = 1, i = 0, j = 1, s = 2))]
    fn flatness(&self, n: usize, m: usize, i: usize, j: usize, s: usize) -> PyResult<f64> {
        Ok(self
            .inner
            .check_flat_commutation(s, n, m, i, j, 0.0)
            .map_err(err)?
            .residual)
    }

    fn corner_join_dim(&self, n: usize, s: usize) -> PyResult<usize> {
        Ok(self.inner.corner_join(n, s).map_err(err)?.dim())
    }
}

#[pyclass(name = "FusionRing", module = "qmultiple")]
#[derive(Clone)]
struct FusionRing {
    inner: CoreRing,
}

#[pymethods]
impl FusionRing {
    /// "trivial", "z2", "z3", "s3", "fib" or "su2-<k>".
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        Ok(FusionRing {
            inner: fusion::builtin_ring(name).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(FusionRing {
            inner: qmultiple::io::fusion_from_str(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        qmultiple::io::fusion_to_string(&self.inner).map_err(err)
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    #[getter]
    fn dims(&self) -> Vec<f64> {
        self.inner.dims().to_vec()
    }

    fn global_index(&self) -> f64 {
        self.inner.global_index()
    }

    #[pyo3(signature = (tol = 1e-9))]
    fn validate(&self, tol: f64) -> Vec<String> {
        self.inner.validate(tol).violations
    }

    /// Multiplicities of each label in the product of the given labels.
    fn multi_fusion(&self, labels: Vec<String>) -> PyResult<Vec<u64>> {
        let idx = labels
            .iter()
            .map(|l| {
                self.inner
                    .label_index(l)
                    .ok_or_else(|| PyValueError::new_err(format!("unknown label `{l}`")))
            })
            .collect::<PyResult<Vec<_>>>()?;
        self.inner.multi_fusion(&idx).map_err(err)
    }

    #[pyo3(signature = (s, tol = 1e-9))]
    fn check_pf<'py>(&self, py: Python<'py>, s: usize, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let d = fusion::build_bratteli(&self.inner, s, fusion::DEFAULT_TUPLE_CAP).map_err(err)?;
        let rep = fusion::check_pf(&d, &self.inner, tol);
        let out = PyDict::new_bound(py);
        out.set_item("beta_L", rep.beta_l)?;
        out.set_item("expected", rep.expected)?;
        out.set_item("mu_tuples", rep.mu_tuples.clone())?;
        out.set_item("mu_singles", rep.mu_singles.clone())?;
        out.set_item("residual", rep.residual())?;
        out.set_item("pass", rep.pass())?;
        Ok(out)
    }

    fn index(&self, s: usize) -> PyResult<f64> {
        Ok(fusion::index_report(&self.inner, s).map_err(err)?.index)
    }

    fn identity_residual(&self, s: usize, label: &str) -> PyResult<f64> {
        let y = self
            .inner
            .label_index(label)
            .ok_or_else(|| PyValueError::new_err(format!("unknown label `{label}`")))?;
        fusion::fusion_identity_check(&self.inner, s, y, fusion::DEFAULT_TUPLE_CAP).map_err(err)
    }
}

/// Number of reduced words of a permutation in one-line form.
#[pyfunction]
fn reduced_word_count(sigma: Vec<usize>) -> PyResult<usize> {
    let mut sorted = sigma.clone();
    sorted.sort_unstable();
    if sorted.iter().enumerate().any(|(i, &x)| i != x) {
        return Err(PyValueError::new_err("not a permutation of 0..n"));
    }
    Ok(enumerate_reduced_words(&sigma).len())
}

#[pymodule]
#[pyo3(name = "qmultiple")]
fn qmultiple_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Connection>()?;
    m.add_class::<StringAlgebra>()?;
    m.add_class::<FusionRing>()?;
    m.add_function(wrap_pyfunction!(reduced_word_count, m)?)?;
    Ok(())
}
