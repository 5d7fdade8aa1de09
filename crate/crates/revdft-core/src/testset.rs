//! Test sets, response rules, fault grading, and greedy test generation.
//!
//! Grading observes the full output vector: a fault set counts as detected
//! when at least one test vector makes the circuit's response violate the
//! test set's rule. Fault sets are graded in parallel and the report lists
//! survivors in enumeration order, so results are deterministic.

use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{Circuit, CircuitError, LineId, State};
use crate::fault::{run_faulty, Fault, FaultError, FaultUniverse};

/// How a response is judged against a test vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseRule {
    /// Detected when the output differs from the fault-free output.
    CompareToFaultFree,
    /// Detected when the named wire reads 1; fault-free behaviour must keep
    /// it at 0 for every vector in the set.
    CheckLineZero(LineId),
    /// Detected when the output differs from the input vector itself.
    IdentityOutput,
}

impl std::fmt::Display for ResponseRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResponseRule::CompareToFaultFree => f.write_str("compare"),
            ResponseRule::CheckLineZero(line) => write!(f, "check-zero:{line}"),
            ResponseRule::IdentityOutput => f.write_str("identity"),
        }
    }
}

impl std::str::FromStr for ResponseRule {
    type Err = TestSetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "compare" {
            return Ok(ResponseRule::CompareToFaultFree);
        }
        if s == "identity" {
            return Ok(ResponseRule::IdentityOutput);
        }
        if let Some(rest) = s.strip_prefix("check-zero:") {
            let line: usize = rest
                .trim()
                .parse()
                .map_err(|_| TestSetError::UnknownRule(s.to_string()))?;
            return Ok(ResponseRule::CheckLineZero(LineId(line)));
        }
        Err(TestSetError::UnknownRule(s.to_string()))
    }
}

/// A named batch of test vectors plus the rule used to judge responses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestSet {
    pub name: String,
    pub vectors: Vec<State>,
    pub rule: ResponseRule,
}

impl TestSet {
    pub fn new(
        name: impl Into<String>,
        vectors: impl IntoIterator<Item = State>,
        rule: ResponseRule,
    ) -> Self {
        TestSet { name: name.into(), vectors: vectors.into_iter().collect(), rule }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TestSetError {
    #[error("test vector has {got} bits but the circuit has {expected} wires")]
    WidthMismatch { expected: usize, got: usize },
    #[error("unknown response rule {0:?} (expected compare, identity, or check-zero:<wire>)")]
    UnknownRule(String),
    #[error("check rule names wire {line} but the circuit has {width} wires")]
    RuleLineOutOfRange { line: usize, width: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("greedy generation enumerates all input states and is capped at {max} wires; the circuit has {width}")]
    WidthTooLarge { width: usize, max: usize },
    #[error(transparent)]
    Fault(#[from] FaultError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Grading outcome. `coverage` is `detected / total`; an empty universe
/// grades as 1.0 (vacuously covered, see [`CoverageReport::vacuous`]).
/// `undetected` lists the surviving fault sets in enumeration order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub total: usize,
    pub detected: usize,
    pub coverage: f64,
    pub undetected: Vec<Vec<Fault>>,
}

impl CoverageReport {
    /// True when the report covers an empty universe.
    pub fn vacuous(&self) -> bool {
        self.total == 0
    }

    pub fn complete(&self) -> bool {
        self.undetected.is_empty()
    }
}

fn violates(rule: ResponseRule, input: &State, fault_free: &State, response: &State) -> bool {
    match rule {
        ResponseRule::CompareToFaultFree => response != fault_free,
        ResponseRule::CheckLineZero(line) => response.get(line),
        ResponseRule::IdentityOutput => response != input,
    }
}

fn check_rule_line(rule: ResponseRule, width: usize) -> Result<(), TestSetError> {
    if let ResponseRule::CheckLineZero(line) = rule {
        if line.0 >= width {
            return Err(TestSetError::RuleLineOutOfRange { line: line.0, width });
        }
    }
    Ok(())
}

/// Grades a fault universe against a test set.
///
/// Detection follows the rule literally: a fault set is detected when some
/// vector's response violates it. Vectors are not screened for fault-free
/// validity here; [`greedy_minimal_testset`] performs that screening when
/// it generates vectors.
pub fn grade(
    circuit: &Circuit,
    tests: &TestSet,
    universe: &FaultUniverse,
) -> Result<CoverageReport, TestSetError> {
    check_rule_line(tests.rule, circuit.width())?;
    for vector in &tests.vectors {
        if vector.width() != circuit.width() {
            return Err(TestSetError::WidthMismatch {
                expected: circuit.width(),
                got: vector.width(),
            });
        }
    }
    let fault_free: Vec<State> =
        tests.vectors.iter().map(|v| circuit.run(v)).collect::<Result<_, _>>()?;

    let detected_flags: Vec<bool> = universe
        .sets()
        .par_iter()
        .map(|set| -> Result<bool, TestSetError> {
            for (vector, clean) in tests.vectors.iter().zip(&fault_free) {
                let response = run_faulty(circuit, vector, set)?;
                if violates(tests.rule, vector, clean, &response) {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect::<Result<_, _>>()?;

    let detected = detected_flags.iter().filter(|&&d| d).count();
    let undetected: Vec<Vec<Fault>> = universe
        .sets()
        .iter()
        .zip(&detected_flags)
        .filter(|(_, &d)| !d)
        .map(|(set, _)| set.clone())
        .collect();
    Ok(report_from(universe.len(), detected, undetected))
}

fn report_from(total: usize, detected: usize, undetected: Vec<Vec<Fault>>) -> CoverageReport {
    let coverage = if total == 0 { 1.0 } else { detected as f64 / total as f64 };
    CoverageReport { total, detected, coverage, undetected }
}

/// Upper bound on circuit width for [`greedy_minimal_testset`], which scans
/// every input state.
pub const GREEDY_WIDTH_CAP: usize = 16;

/// Builds a small test set by greedy set cover over the full input space.
///
/// Every one of the `2^width` states is a candidate, except states the
/// fault-free circuit already fails under `rule` (those would flag a
/// healthy circuit). Each round keeps the candidate that detects the most
/// still-undetected fault sets, breaking ties toward the lowest state
/// index. Generation stops when no candidate adds coverage, so the
/// returned report may be incomplete when some fault sets are undetectable
/// under `rule`.
pub fn greedy_minimal_testset(
    circuit: &Circuit,
    universe: &FaultUniverse,
    rule: ResponseRule,
) -> Result<(TestSet, CoverageReport), TestSetError> {
    let width = circuit.width();
    if width > GREEDY_WIDTH_CAP {
        return Err(TestSetError::WidthTooLarge { width, max: GREEDY_WIDTH_CAP });
    }
    check_rule_line(rule, width)?;

    let candidates: Vec<State> = State::all(width).collect();
    let detects: Vec<Vec<usize>> = candidates
        .par_iter()
        .map(|vector| -> Result<Vec<usize>, TestSetError> {
            let clean = circuit.run(vector)?;
            if violates(rule, vector, &clean, &clean) {
                // unusable vector: it fails even without a fault
                return Ok(Vec::new());
            }
            let mut hit = Vec::new();
            for (index, set) in universe.sets().iter().enumerate() {
                let response = run_faulty(circuit, vector, set)?;
                if violates(rule, vector, &clean, &response) {
                    hit.push(index);
                }
            }
            Ok(hit)
        })
        .collect::<Result<_, _>>()?;

    let mut uncovered: Vec<bool> = vec![true; universe.len()];
    let mut remaining = universe.len();
    let mut chosen: Vec<State> = Vec::new();
    while remaining > 0 {
        let mut best: Option<(usize, usize)> = None; // (gain, candidate index)
        for (index, hit) in detects.iter().enumerate() {
            let gain = hit.iter().filter(|&&f| uncovered[f]).count();
            if gain > 0 && best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, index));
            }
        }
        let Some((gain, index)) = best else { break };
        for &f in &detects[index] {
            if uncovered[f] {
                uncovered[f] = false;
            }
        }
        remaining -= gain;
        chosen.push(candidates[index].clone());
    }

    let undetected: Vec<Vec<Fault>> = universe
        .sets()
        .iter()
        .zip(&uncovered)
        .filter(|(_, &u)| u)
        .map(|(set, _)| set.clone())
        .collect();
    let report = report_from(universe.len(), universe.len() - remaining, undetected);
    let tests = TestSet::new("greedy", chosen, rule);
    Ok((tests, report))
}

/// Renders a test set as a vector file: one bit string per line (first
/// character is wire 0) with the name and rule in leading comments.
pub fn write_test_set(tests: &TestSet) -> String {
    let mut out = String::new();
    out.push_str(&format!("# name: {}\n", tests.name));
    out.push_str(&format!("# rule: {}\n", tests.rule));
    for vector in &tests.vectors {
        out.push_str(&vector.to_bitstring());
        out.push('\n');
    }
    out
}

/// Parses the vector file format produced by [`write_test_set`]. Unknown
/// comments are ignored; vectors must share one width.
pub fn parse_test_set(text: &str) -> Result<TestSet, TestSetError> {
    let mut name = String::from("tests");
    let mut rule = ResponseRule::CompareToFaultFree;
    let mut vectors: Vec<State> = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let number = index + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(value) = comment.strip_prefix("name:") {
                name = value.trim().to_string();
            } else if let Some(value) = comment.strip_prefix("rule:") {
                rule = value.trim().parse()?;
            }
            continue;
        }
        let vector = State::from_bitstring(line).map_err(|err| TestSetError::Parse {
            line: number,
            message: err.to_string(),
        })?;
        if let Some(first) = vectors.first() {
            if first.width() != vector.width() {
                return Err(TestSetError::Parse {
                    line: number,
                    message: format!(
                        "vector has {} bits but earlier vectors have {}",
                        vector.width(),
                        first.width()
                    ),
                });
            }
        }
        vectors.push(vector);
    }
    Ok(TestSet { name, vectors, rule })
}
