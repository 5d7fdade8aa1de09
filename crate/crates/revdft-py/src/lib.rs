//! Python bindings: circuits as opaque objects with bitstring I/O, plus the
//! transform/grade/generate entry points mirroring the command-line front
//! end. All toolkit errors surface as ValueError.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use revdft_core::circuit::{Circuit as CoreCircuit, State};
use revdft_core::dpe::{build_alu, build_full_adder, build_mul4, build_rca, build_testable, AluOp};
use revdft_core::fault::{EnumerateOptions, FaultKind, Multiplicity};
use revdft_core::metrics::cost_report;
use revdft_core::offline::{gts_stuck_at, mcf_bridging_testset, mcf_missing_gate_testset};
use revdft_core::pipeline::{
    detect_provenance, grade_circuit, transform as run_transform, GradeRequest, Method,
    Provenance, TestSource,
};
use revdft_core::testset::{ResponseRule, TestSet};
use revdft_core::tfc::{parse_tfc, write_tfc};

const DEFAULT_SEED: u64 = 0x7e57_ab1e;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A reversible circuit over Toffoli-family and swap gates.
#[pyclass(frozen, name = "Circuit", module = "revdft")]
struct PyCircuit {
    inner: CoreCircuit,
}

#[pymethods]
impl PyCircuit {
    /// Parses TFC text into a circuit.
    #[staticmethod]
    fn from_tfc(text: &str) -> PyResult<Self> {
        Ok(PyCircuit { inner: parse_tfc(text).map_err(value_error)? })
    }

    /// Renders the circuit as canonical TFC text.
    fn to_tfc(&self) -> String {
        write_tfc(&self.inner)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn gate_count(&self) -> usize {
        self.inner.gate_count()
    }

    fn line_names(&self) -> Vec<String> {
        self.inner.line_names().to_vec()
    }

    /// Runs the circuit on a bitstring (first character is wire 0).
    fn run(&self, bits: &str) -> PyResult<String> {
        let input = State::from_bitstring(bits).map_err(value_error)?;
        Ok(self.inner.run(&input).map_err(value_error)?.to_bitstring())
    }

    /// Runs the circuit and returns the state after every gate, input first.
    fn run_traced(&self, bits: &str) -> PyResult<Vec<String>> {
        let input = State::from_bitstring(bits).map_err(value_error)?;
        let trace = self.inner.run_traced(&input).map_err(value_error)?;
        Ok(trace.iter().map(State::to_bitstring).collect())
    }

    /// The inverse circuit (reversed gate cascade).
    fn inverse(&self) -> Self {
        PyCircuit { inner: self.inner.inverse() }
    }

    /// Cost figures as a dict: wires, gate_cost, quantum_cost,
    /// constant_inputs, garbage_outputs.
    fn cost_report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let value = serde_json::to_value(cost_report(&self.inner)).map_err(value_error)?;
        json_to_py(py, &value)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Circuit(width={}, gates={})", self.inner.width(), self.inner.gate_count())
    }
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value;
    Ok(match value {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.into_any()
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any()
            }
        }
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let converted: Vec<Bound<'py, PyAny>> =
                items.iter().map(|item| json_to_py(py, item)).collect::<PyResult<_>>()?;
            PyList::new(py, converted)?.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (key, item) in map {
                dict.set_item(key, json_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

/// Applies a testability transform: online-mct, online-mcf, online-mctf,
/// offline-mct, or offline-mctf.
#[pyfunction]
fn transform(circuit: &PyCircuit, method: &str) -> PyResult<PyCircuit> {
    let method: Method = method.parse().map_err(value_error)?;
    let outcome = run_transform(&circuit.inner, method).map_err(value_error)?;
    Ok(PyCircuit { inner: outcome.circuit })
}

fn parse_faults(spec: &str) -> PyResult<(FaultKind, Multiplicity)> {
    match spec.split_once(':') {
        Some((kind, k)) => {
            let k: usize = k
                .parse()
                .map_err(|_| value_error(format!("bad multiplicity {k:?} in {spec:?}")))?;
            Ok((kind.parse().map_err(value_error)?, Multiplicity::Multiple(k)))
        }
        None => Ok((spec.parse().map_err(value_error)?, Multiplicity::Single)),
    }
}

/// Grades a test source against a fault universe, mirroring the command
/// line: `faults` is kind[:k], `tests` is "gts" or "exhaustive-greedy",
/// or pass explicit bitstring `vectors`. Returns the coverage report as a
/// dict with the resolved rule and test-set name attached.
#[pyfunction]
#[pyo3(signature = (circuit, faults, tests="gts", vectors=None, rule=None, seed=DEFAULT_SEED))]
fn grade<'py>(
    py: Python<'py>,
    circuit: &PyCircuit,
    faults: &str,
    tests: &str,
    vectors: Option<Vec<String>>,
    rule: Option<&str>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let (kind, multiplicity) = parse_faults(faults)?;
    let rule: Option<ResponseRule> = rule.map(str::parse).transpose().map_err(value_error)?;

    let tests = match vectors {
        Some(bits) => {
            let states: Vec<State> = bits
                .iter()
                .map(|b| State::from_bitstring(b))
                .collect::<Result<_, _>>()
                .map_err(value_error)?;
            TestSource::Vectors(TestSet::new(
                "vectors",
                states,
                rule.unwrap_or(ResponseRule::CompareToFaultFree),
            ))
        }
        None => match tests {
            "gts" => match detect_provenance(&circuit.inner).map_err(value_error)? {
                Provenance::None => {
                    let pair = gts_stuck_at(circuit.inner.width());
                    TestSource::Vectors(TestSet::new(
                        pair.name,
                        pair.vectors,
                        ResponseRule::CompareToFaultFree,
                    ))
                }
                _ => TestSource::Designed,
            },
            "exhaustive-greedy" => TestSource::ExhaustiveGreedy,
            other => return Err(value_error(format!("unknown test source {other:?}"))),
        },
    };

    let request = GradeRequest {
        kind,
        multiplicity,
        tests,
        rule,
        options: EnumerateOptions { seed, ..EnumerateOptions::default() },
    };
    let outcome = grade_circuit(&circuit.inner, &request).map_err(value_error)?;

    let mut value = serde_json::to_value(&outcome.report).map_err(value_error)?;
    let extras = value.as_object_mut().expect("report is an object");
    extras.insert("rule".into(), outcome.rule.to_string().into());
    extras.insert("tests".into(), outcome.tests.name.clone().into());
    extras.insert("test_vectors".into(), (outcome.tests.len() as u64).into());
    extras.insert("designed_universe".into(), outcome.designed_universe.into());
    json_to_py(py, &value)
}

/// Generates a datapath element: "fa", "rca", "mul4", or "alu", optionally
/// instrumented for concurrent checking.
#[pyfunction]
#[pyo3(signature = (element, bits=None, ops=None, testable=false))]
fn dpe(
    element: &str,
    bits: Option<usize>,
    ops: Option<Vec<String>>,
    testable: bool,
) -> PyResult<PyCircuit> {
    let parsed_ops: Vec<AluOp> = match &ops {
        Some(names) => {
            names.iter().map(|op| op.parse().map_err(value_error)).collect::<PyResult<_>>()?
        }
        None => vec![AluOp::Add, AluOp::And, AluOp::Xor, AluOp::Or],
    };
    let plain = match element {
        "fa" => build_full_adder().circuit,
        "rca" => build_rca(bits.unwrap_or(4)).map_err(value_error)?.circuit,
        "mul4" => build_mul4().circuit,
        "alu" => build_alu(bits.unwrap_or(2), &parsed_ops).map_err(value_error)?.circuit,
        other => return Err(value_error(format!("unknown element {other:?}"))),
    };
    let inner = if testable {
        build_testable(&plain).map_err(value_error)?.into_circuit()
    } else {
        plain
    };
    Ok(PyCircuit { inner })
}

/// Emits a fixed vector family as bitstrings: "stuck2", "weightn", or
/// "pairs".
#[pyfunction]
fn gts(width: usize, family: &str) -> PyResult<Vec<String>> {
    let (minimum, tests) = match family {
        "stuck2" => (2, gts_stuck_at(width)),
        "weightn" => (2, mcf_missing_gate_testset(width)),
        "pairs" => (3, mcf_bridging_testset(width)),
        other => return Err(value_error(format!("unknown family {other:?}"))),
    };
    if width < minimum {
        return Err(value_error(format!("family needs at least {minimum} wires, got {width}")));
    }
    Ok(tests.vectors.iter().map(State::to_bitstring).collect())
}

#[pymodule]
fn revdft(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCircuit>()?;
    m.add_function(wrap_pyfunction!(transform, m)?)?;
    m.add_function(wrap_pyfunction!(grade, m)?)?;
    m.add_function(wrap_pyfunction!(dpe, m)?)?;
    m.add_function(wrap_pyfunction!(gts, m)?)?;
    m.add("DEFAULT_SEED", DEFAULT_SEED)?;
    Ok(())
}
