//! Python bindings. Words cross the boundary as `list[int]` (a digit string is also accepted
//! on input); big integers come back as Python ints.

use abelfree::cli::{conditions_report, parse_morphism_file, RunReport};
use abelfree::decider::check_preconditions;
use abelfree::{self as core, BoundChoice, DecideConfig, FrequencyMatrix, ParentRule, Word};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyInt};

fn err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[derive(FromPyObject)]
enum WordArg {
    Letters(Vec<u32>),
    Digits(String),
}

impl WordArg {
    fn into_word(self) -> PyResult<Word> {
        match self {
            WordArg::Letters(v) if v.contains(&0) => Err(err("letters are numbered from 1")),
            WordArg::Letters(v) => Ok(Word::from(v)),
            WordArg::Digits(s) => s.parse().map_err(err),
        }
    }
}

fn letters(w: &Word) -> Vec<u32> {
    w.0.iter().map(|l| l.0).collect()
}

fn big_int<'py>(py: Python<'py>, v: &impl ToString) -> PyResult<Bound<'py, PyAny>> {
    py.get_type::<PyInt>().call1((v.to_string(),))
}

fn json_to_py<'py>(py: Python<'py>, v: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn parse_rule(rule: &str) -> PyResult<ParentRule> {
    match rule {
        "letters" => Ok(ParentRule::Letters),
        "with-empty" => Ok(ParentRule::WithEmpty),
        _ => Err(err(format!("unknown rule {rule:?}; expected 'letters' or 'with-empty'"))),
    }
}

fn parse_bound(bound: &str) -> PyResult<BoundChoice> {
    match bound {
        "derived" => Ok(BoundChoice::Derived),
        "short" => Ok(BoundChoice::Short),
        _ => bound
            .parse()
            .map(BoundChoice::Explicit)
            .map_err(|_| err(format!("bound must be 'derived', 'short' or a length, got {bound:?}"))),
    }
}

/// A morphism on the letters `1..=m`.
#[pyclass(name = "Morphism", module = "pyabelfree", frozen)]
struct PyMorphism {
    inner: core::Morphism,
}

#[pymethods]
impl PyMorphism {
    /// `Morphism([[1, 1, 2, 3], [1, 3, 3], [2, 2, 3]])` or `Morphism(["1123", "133", "223"])`.
    #[new]
    fn new(images: Vec<WordArg>) -> PyResult<Self> {
        if images.is_empty() {
            return Err(err("at least one image is required"));
        }
        let images = images.into_iter().map(WordArg::into_word).collect::<PyResult<Vec<_>>>()?;
        Ok(PyMorphism { inner: core::Morphism::new(images) })
    }

    /// Parses the `alphabet: m` / `i -> ...` text format used by the CLI.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyMorphism { inner: parse_morphism_file(text).map_err(err)? })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn images(&self) -> Vec<Vec<u32>> {
        self.inner.images().iter().map(letters).collect()
    }

    fn apply(&self, word: WordArg) -> PyResult<Vec<u32>> {
        let w = word.into_word()?;
        if !w.is_over(self.inner.m()) {
            return Err(err("word uses letters outside the alphabet"));
        }
        Ok(letters(&self.inner.apply(&w)))
    }

    fn fixed_point_prefix(&self, n: usize) -> Vec<u32> {
        letters(&self.inner.fixed_point_prefix(n))
    }

    /// Every factor of the fixed point of length `1..=max_len`, sorted.
    fn factors(&self, max_len: usize) -> Vec<Vec<u32>> {
        self.inner.factor_set(max_len).iter().map(letters).collect()
    }

    fn frequency_matrix(&self) -> Vec<Vec<i64>> {
        FrequencyMatrix::of(&self.inner).rows().to_vec()
    }

    fn det<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        big_int(py, &FrequencyMatrix::of(&self.inner).det())
    }

    /// Leading principal minors of `MᵀM − I`; all positive iff `|M⁻¹| < 1`.
    fn minors<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        let cert = FrequencyMatrix::of(&self.inner).contraction_certificate().map_err(err)?;
        cert.minors.iter().map(|x| big_int(py, x)).collect()
    }

    fn inverse_norm_lt_one(&self) -> PyResult<bool> {
        FrequencyMatrix::of(&self.inner).inverse_norm_lt_one().map_err(err)
    }

    fn inverse_norm_estimate(&self) -> PyResult<f64> {
        FrequencyMatrix::of(&self.inner).inverse_norm_estimate().map_err(err)
    }

    /// Human-readable reasons the decision procedure does not apply; empty if it does.
    fn preconditions(&self) -> Vec<String> {
        check_preconditions(&self.inner).iter().map(ToString::to_string).collect()
    }

    /// The same record as `abelfree conditions --format json`.
    fn conditions<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &conditions_report(&self.inner).0)
    }

    /// Ancestor closure of the k-power template: `{"count", "generations", "delta", "templates"}`.
    #[pyo3(signature = (k, max_closure = 1_000_000, rule = "letters"))]
    fn ancestors<'py>(&self, py: Python<'py>, k: usize, max_closure: usize, rule: &str) -> PyResult<Bound<'py, PyDict>> {
        let rule = parse_rule(rule)?;
        let anc = py
            .detach(|| core::ancestors(&self.inner, k, max_closure, rule))
            .map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("count", anc.templates.len())?;
        d.set_item("generations", anc.generations.clone())?;
        d.set_item("delta", core::delta(&anc.templates))?;
        d.set_item("templates", anc.templates.iter().map(ToString::to_string).collect::<Vec<_>>())?;
        Ok(d)
    }

    /// Decides whether the fixed point avoids Abelian k-powers. Returns the same record as
    /// `abelfree decide --format json`; `status` is `free`, `contains` or `precondition-failed`.
    #[pyo3(signature = (k, bound = "derived", max_closure = 1_000_000, rule = "letters"))]
    fn decide<'py>(
        &self,
        py: Python<'py>,
        k: usize,
        bound: &str,
        max_closure: usize,
        rule: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let config = DecideConfig {
            max_closure,
            bound: parse_bound(bound)?,
            rule: parse_rule(rule)?,
            ..DecideConfig::default()
        };
        let verdict = py.detach(|| core::decide(&self.inner, k, &config)).map_err(err)?;
        json_to_py(py, &RunReport::from_verdict(k, &verdict))
    }

    fn __repr__(&self) -> String {
        let images: Vec<String> = self.inner.images().iter().map(|w| format!("{:?}", letters(w))).collect();
        format!("Morphism([{}])", images.join(", "))
    }
}

/// Parikh vector of `word` over the letters `1..=m`.
#[pyfunction]
fn parikh(word: WordArg, m: usize) -> PyResult<Vec<i64>> {
    let w = word.into_word()?;
    if !w.is_over(m) {
        return Err(err("word uses letters outside the alphabet"));
    }
    Ok(core::parikh(&w, m).0)
}

/// Least Abelian k-power in `word` as `(position, block_length)`, or None.
#[pyfunction]
fn find_abelian_power(word: WordArg, k: usize) -> PyResult<Option<(usize, usize)>> {
    let w = word.into_word()?;
    Ok(core::find_abelian_power(&w, k)
        .map_err(err)?
        .map(|o| (o.position, o.block_length)))
}

/// The template whose instances are exactly the Abelian k-powers, as text.
#[pyfunction]
fn power_template(k: usize, m: usize) -> PyResult<String> {
    Ok(core::Template::power(k, m).map_err(err)?.to_string())
}

#[pymodule]
fn pyabelfree(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMorphism>()?;
    m.add_function(wrap_pyfunction!(parikh, m)?)?;
    m.add_function(wrap_pyfunction!(find_abelian_power, m)?)?;
    m.add_function(wrap_pyfunction!(power_template, m)?)?;
    Ok(())
}
