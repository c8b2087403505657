//! Python bindings for `randlab`.
//!
//! Bit strings cross the boundary as `BitString` objects or as plain
//! strings of `0`/`1`; anything that accepts one accepts the other.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use randlab::bits::{self, BitString as Bits, LexIndex};
use randlab::chaos::{self, MicroState};
use randlab::complexity::{ComplexityKind, Estimator as CoreEstimator};
use randlab::machine::Machine;
use randlab::measure::{Bernoulli, RecursiveMeasure, Uniform};
use randlab::mltests::{self, FiniteTest};
use randlab::omega::{halting_set_from_omega, Dovetailer};
use randlab::predictor::{self, ModelClass};
use randlab::selection::{self, Rule};
use randlab::seqstats;
use randlab::sources::{self, BitSource};
use randlab::tourney::{self, Tournament};

fn err(e: randlab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "BitString", eq, frozen, from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyBitString {
    inner: Bits,
}

#[derive(FromPyObject)]
enum BitsArg {
    Obj(PyBitString),
    Text(String),
}

impl BitsArg {
    fn into_bits(self) -> PyResult<Bits> {
        match self {
            BitsArg::Obj(b) => Ok(b.inner),
            BitsArg::Text(s) => sources::parse_ascii(&s).map_err(err),
        }
    }
}

fn wrap(inner: Bits) -> PyBitString {
    PyBitString { inner }
}

#[pymethods]
impl PyBitString {
    #[new]
    #[pyo3(signature = (text = String::new()))]
    fn new(text: String) -> PyResult<Self> {
        sources::parse_ascii(&text).map(wrap).map_err(err)
    }

    /// The string at position `i` of the length-lexicographic order.
    #[staticmethod]
    fn from_index(i: u64) -> Self {
        wrap(bits::from_index(LexIndex(i)))
    }

    fn index(&self) -> PyResult<u64> {
        bits::to_index(&self.inner).map(|i| i.0).map_err(err)
    }

    fn sd1(&self) -> Self {
        wrap(bits::encode_sd1(&self.inner))
    }

    fn sd2(&self) -> Self {
        wrap(bits::encode_sd2(&self.inner))
    }

    fn count_ones(&self) -> usize {
        self.inner.count_ones()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("BitString('{}')", self.inner)
    }

    fn __add__(&self, other: BitsArg) -> PyResult<Self> {
        Ok(wrap(self.inner.concat(&other.into_bits()?)))
    }
}

#[pyfunction]
fn pair(x: BitsArg, y: BitsArg) -> PyResult<PyBitString> {
    Ok(wrap(bits::pair(&x.into_bits()?, &y.into_bits()?)))
}

#[pyfunction]
fn unpair(s: BitsArg) -> PyResult<(PyBitString, PyBitString)> {
    let (x, y) = bits::decode_pair(&s.into_bits()?).map_err(err)?;
    Ok((wrap(x), wrap(y)))
}

#[pyclass(name = "Estimator", frozen)]
pub struct PyEstimator {
    inner: CoreEstimator,
}

#[pymethods]
impl PyEstimator {
    #[new]
    #[pyo3(signature = (budget = 100_000, max_len = 20))]
    fn new(budget: u64, max_len: usize) -> Self {
        Self { inner: CoreEstimator::new(budget, max_len) }
    }

    /// Returns `(value, witness, fallback)` for `C(x|given)` or `K(x|given)`.
    #[pyo3(signature = (x, given = None, kind = "c"))]
    fn upper(&self, py: Python<'_>, x: BitsArg, given: Option<BitsArg>, kind: &str) -> PyResult<(usize, String, bool)> {
        let kind = match kind {
            "c" | "C" => ComplexityKind::C,
            "k" | "K" => ComplexityKind::K,
            _ => return Err(PyValueError::new_err(format!("unknown kind `{kind}`"))),
        };
        let x = x.into_bits()?;
        let given = given.map(BitsArg::into_bits).transpose()?.unwrap_or_default();
        let est = py.detach(|| self.inner.upper(kind, &x, &given));
        self.inner.verify(&est, &x).map_err(err)?;
        Ok((est.value, est.witness.code.to_string(), est.fallback))
    }
}

/// `[(name, level, significance)]` for the default battery.
#[pyfunction]
#[pyo3(signature = (x, budget = 100_000, max_len = 20))]
fn test_levels(x: BitsArg, budget: u64, max_len: usize) -> PyResult<Vec<(String, u32, f64)>> {
    let x = x.into_bits()?;
    Ok(mltests::default_battery(CoreEstimator::new(budget, max_len))
        .iter()
        .map(|t| {
            let r = mltests::record(t.as_ref(), &x);
            (r.name.to_string(), r.level, r.significance)
        })
        .collect())
}

/// Whether `#{x ∈ {0,1}^n : δ(x) ≥ m} ≤ 2^{n−m}` holds for every `m`.
#[pyfunction]
fn check_axiom(test: &str, n: usize) -> PyResult<bool> {
    let t: Box<dyn FiniteTest> = match test {
        "leading_zeros" => Box::new(mltests::LeadingZeros),
        "frequency" => Box::new(mltests::Frequency),
        "odd_positions" => Box::new(mltests::OddPositions),
        "universal_lower" => Box::new(mltests::UniversalLower::new(CoreEstimator::default())),
        _ => return Err(PyValueError::new_err(format!("unknown test `{test}`"))),
    };
    Ok(mltests::check_axiom(t.as_ref(), n).holds)
}

/// Restricted halting probability over programs of length `≤ max_len`.
#[pyfunction]
#[pyo3(signature = (max_len, budget = 100_000))]
fn omega<'py>(py: Python<'py>, max_len: usize, budget: u64) -> PyResult<Bound<'py, PyDict>> {
    let machine = Machine::new();
    let (value, halting) = py.detach(|| -> randlab::Result<_> {
        let d = Dovetailer::new(&machine, max_len, budget)?;
        let approx = d.approximation(d.final_phase());
        let halting = halting_set_from_omega(&machine, &approx, max_len)?;
        Ok((approx.value, halting))
    })
    .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("numerator_hex", value.numerator_hex())?;
    out.set_item("exponent", value.exponent())?;
    out.set_item("value", value.to_f64())?;
    out.set_item("halting", halting.iter().map(|p| p.to_string()).collect::<Vec<_>>())?;
    Ok(out)
}

/// Order of a largest transitive subtournament, dominant node first.
#[pyfunction]
fn largest_transitive(encoding: BitsArg, n: usize) -> PyResult<Vec<usize>> {
    let t = Tournament::decode(&encoding.into_bits()?, n).map_err(err)?;
    tourney::largest_transitive(&t).map(|w| w.order).map_err(err)
}

#[pyfunction]
fn tourney_sample<'py>(py: Python<'py>, n: usize, trials: usize, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let r = py.detach(|| tourney::sample_and_check(n, trials, seed)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("bound", r.bound)?;
    out.set_item("within", r.within)?;
    out.set_item("fraction", r.fraction)?;
    out.set_item("ci", (r.ci_low, r.ci_high))?;
    out.set_item("max_v", r.max_v)?;
    out.set_item("v_counts", r.v_counts)?;
    Ok(out)
}

/// Applies a rule of the selection language to `bits`; returns the
/// selected bits and their 1-based positions.
#[pyfunction]
#[pyo3(signature = (rule, bits, limit = None))]
fn select(rule: &str, bits: BitsArg, limit: Option<u64>) -> PyResult<(PyBitString, Vec<u64>)> {
    let rule = Rule::parse(rule).map_err(err)?;
    let bits = bits.into_bits()?;
    let s = selection::select_mwc(&rule, &bits, limit.unwrap_or(bits.len() as u64));
    Ok((wrap(s.bits), s.indices))
}

#[pyfunction]
fn champernowne(base: u32, count: usize) -> String {
    sources::digits_to_string(&sources::champernowne(base, count))
}

#[pyfunction]
fn prng_bits(seed: u64, count: usize) -> PyBitString {
    wrap(sources::prng_stream(seed, count))
}

#[pyfunction]
fn longest_run(x: BitsArg, bit: bool) -> PyResult<usize> {
    Ok(seqstats::longest_run(&x.into_bits()?, bit))
}

/// `[(predictor, accuracy)]` on the doubling-map orbit of a seeded point.
#[pyfunction]
fn chaos_accuracies(py: Python<'_>, seed: u64, steps: usize) -> Vec<(String, f64)> {
    py.detach(|| {
        let state = MicroState::new(BitSource::prng(seed));
        chaos::predictor_library()
            .into_iter()
            .map(|mut p| {
                let e = chaos::evaluate_predictor(p.as_mut(), &state, steps);
                (e.predictor, e.accuracy)
            })
            .collect()
    })
}

/// Total squared prediction error of the mixture over `{uniform,
/// bernoulli(3/4)}` for each seed, with the data drawn from `truth`.
#[pyfunction]
fn prediction_errors(py: Python<'_>, truth: &str, seeds: u64, horizon: usize) -> PyResult<Vec<f64>> {
    let truth = match truth {
        "uniform" => 0,
        "bernoulli" => 1,
        _ => return Err(PyValueError::new_err(format!("unknown truth `{truth}`"))),
    };
    py.detach(|| {
        let class = ModelClass::uniform(vec![
            Arc::new(Uniform) as Arc<dyn RecursiveMeasure>,
            Arc::new(Bernoulli::new(3, 2)),
        ])?;
        let traces = predictor::error_traces(&class, truth, 0..seeds, horizon)?;
        Ok(traces.iter().map(|t| t.total()).collect())
    })
    .map_err(err)
}

#[pymodule]
fn randlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBitString>()?;
    m.add_class::<PyEstimator>()?;
    m.add("MACHINE_VERSION", randlab::machine::MACHINE_VERSION)?;
    m.add_function(wrap_pyfunction!(pair, m)?)?;
    m.add_function(wrap_pyfunction!(unpair, m)?)?;
    m.add_function(wrap_pyfunction!(test_levels, m)?)?;
    m.add_function(wrap_pyfunction!(check_axiom, m)?)?;
    m.add_function(wrap_pyfunction!(omega, m)?)?;
    m.add_function(wrap_pyfunction!(largest_transitive, m)?)?;
    m.add_function(wrap_pyfunction!(tourney_sample, m)?)?;
    m.add_function(wrap_pyfunction!(select, m)?)?;
    m.add_function(wrap_pyfunction!(champernowne, m)?)?;
    m.add_function(wrap_pyfunction!(prng_bits, m)?)?;
    m.add_function(wrap_pyfunction!(longest_run, m)?)?;
    m.add_function(wrap_pyfunction!(chaos_accuracies, m)?)?;
    m.add_function(wrap_pyfunction!(prediction_errors, m)?)?;
    Ok(())
}
