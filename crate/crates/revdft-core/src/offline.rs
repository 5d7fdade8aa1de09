//! Offline (test-mode) transforms and classic swap-circuit test sets.
//!
//! The blocking scheme appends one constant-1 test wire and adds it as a
//! positive control to every Toffoli-family gate. With the wire at 1 the
//! circuit behaves exactly as before; driving it to 0 in test mode blocks
//! every controlled gate. For an all-Toffoli-family circuit the test mode
//! is the identity on every input, which turns fault detection into a
//! simple identity check: feed a vector, expect it back unchanged.
//!
//! Swap-family gates stay live under [`modify_mctf_offline`]; they are
//! data-conserving, so the identity argument still holds on the uniform
//! all-0 and all-1 test vectors (every swap moves equal bits), though not
//! on arbitrary inputs.
//!
//! The module also carries the classic width-parametric test sets for
//! uninstrumented swap-family circuits: the two uniform vectors for
//! stuck-at faults, the weight `n-1` sweep for missing gates, and the
//! adjacent-pair family for bridging faults.

use crate::circuit::{Circuit, CircuitBuilder, CircuitError, Control, Gate, LineId, State};
use crate::fault::{
    enumerate_faults_with, EnumerateOptions, Fault, FaultError, FaultKind, FaultUniverse,
    Multiplicity,
};
use crate::testset::{ResponseRule, TestSet};

/// Which blocking scheme produced a testable circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OfflineMethod {
    /// Every gate is blocked in test mode; test mode is the identity.
    MctBlocking,
    /// Toffoli-family gates are blocked; swap gates stay live, and the
    /// identity argument holds on the uniform test vectors only.
    MctfBlocking,
}

impl OfflineMethod {
    pub fn name(self) -> &'static str {
        match self {
            OfflineMethod::MctBlocking => "offline-mct",
            OfflineMethod::MctfBlocking => "offline-mctf",
        }
    }

    pub fn from_name(name: &str) -> Option<OfflineMethod> {
        match name {
            "offline-mct" => Some(OfflineMethod::MctBlocking),
            "offline-mctf" => Some(OfflineMethod::MctfBlocking),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OfflineError {
    #[error("this transform needs an all-Toffoli-family circuit; gate {level} is a swap gate")]
    ExpectedAllMct { level: usize },
    #[error("circuit carries no test-mode annotation")]
    MissingAnnotation,
    #[error("test-mode annotation is malformed: {0}")]
    MalformedAnnotation(String),
    #[error("annotated circuit does not have the advertised structure: {0}")]
    UnexpectedStructure(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// A circuit instrumented with a blocking test wire.
#[derive(Debug, Clone)]
pub struct OfflineTestableCircuit {
    circuit: Circuit,
    method: OfflineMethod,
    test_line: LineId,
}

impl OfflineTestableCircuit {
    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn into_circuit(self) -> Circuit {
        self.circuit
    }

    pub fn method(&self) -> OfflineMethod {
        self.method
    }

    pub fn test_line(&self) -> LineId {
        self.test_line
    }

    /// The two-vector test set for this circuit: all zeros, and all ones
    /// with the test wire at 0. Both drive test mode, where a fault-free
    /// circuit echoes its input.
    pub fn gts(&self) -> TestSet {
        let width = self.circuit.width();
        let zeros = State::zeros(width);
        let mut ones = State::from_bits(vec![true; width]);
        ones.set(self.test_line, false);
        TestSet::new("gts", [zeros, ones], ResponseRule::IdentityOutput)
    }

    /// Single stuck-at faults the test set is designed to expose: every
    /// site except stuck-at-0 on the test wire. Forcing the test wire to
    /// its own test-mode value is indistinguishable from test mode itself,
    /// so those sites are out of reach by construction.
    pub fn stuck_at_universe(&self) -> FaultUniverse {
        let g = self.circuit.gate_count();
        let mut sets = Vec::new();
        for line in self.circuit.lines() {
            for segment in 0..=g {
                for value in [false, true] {
                    if line == self.test_line && !value {
                        continue;
                    }
                    sets.push(vec![Fault::StuckAt { line, segment, value }]);
                }
            }
        }
        FaultUniverse::from_sets(FaultKind::StuckAt, Multiplicity::Single, sets)
    }

    /// Multiple stuck-at fault sets (up to `k` per set) the test set is
    /// designed to expose. A set that forces only the test wire and leaves
    /// it at the test-mode value is indistinguishable from test mode, so
    /// such sets are out of reach; any set whose last force on some data
    /// wire pins it, or whose last force on the test wire drives it high,
    /// surfaces at the outputs.
    pub fn multiple_stuck_at_universe(
        &self,
        k: usize,
        options: &EnumerateOptions,
    ) -> Result<FaultUniverse, FaultError> {
        let raw = enumerate_faults_with(
            &self.circuit,
            FaultKind::StuckAt,
            Multiplicity::Multiple(k),
            options,
        )?;
        let sets: Vec<Vec<Fault>> = raw
            .sets()
            .iter()
            .filter(|set| !self.set_is_unreachable(set))
            .cloned()
            .collect();
        Ok(FaultUniverse::from_sets(FaultKind::StuckAt, Multiplicity::Multiple(k), sets))
    }

    fn set_is_unreachable(&self, set: &[Fault]) -> bool {
        let mut last: Option<(usize, bool)> = None;
        for fault in set {
            let Fault::StuckAt { line, segment, value } = *fault else { return false };
            if line != self.test_line {
                return false;
            }
            if last.is_none_or(|(seg, _)| segment > seg) {
                last = Some((segment, value));
            }
        }
        matches!(last, Some((_, false)))
    }

    /// Reconstructs the instrumented view from an annotated circuit,
    /// validating that the test wire really blocks what it claims to.
    pub fn from_annotated(circuit: &Circuit) -> Result<OfflineTestableCircuit, OfflineError> {
        let annotation = circuit
            .metadata()
            .iter()
            .rev()
            .find_map(|line| line.trim().strip_prefix("revdft:"))
            .ok_or(OfflineError::MissingAnnotation)?;
        let mut method = None;
        let mut test = None;
        for token in annotation.split_whitespace() {
            let Some((key, value)) = token.split_once('=') else {
                return Err(OfflineError::MalformedAnnotation(format!(
                    "token {token:?} is not key=value"
                )));
            };
            match key {
                "method" => method = Some(value.to_string()),
                "test" => test = Some(value.to_string()),
                "check" | "parity" => {
                    return Err(OfflineError::MalformedAnnotation(
                        "annotation describes a concurrent checker, not a test mode".into(),
                    ))
                }
                _ => {}
            }
        }
        let method_name =
            method.ok_or_else(|| OfflineError::MalformedAnnotation("missing method".into()))?;
        let method = OfflineMethod::from_name(&method_name).ok_or_else(|| {
            OfflineError::MalformedAnnotation(format!("unknown method {method_name:?}"))
        })?;
        let test_name =
            test.ok_or_else(|| OfflineError::MalformedAnnotation("missing test wire".into()))?;
        let test_line = circuit.line_named(&test_name).ok_or_else(|| {
            OfflineError::UnexpectedStructure(format!("no wire named {test_name:?}"))
        })?;
        if circuit.constant_value(test_line) != Some(true) {
            return Err(OfflineError::UnexpectedStructure(format!(
                "test wire {test_name} is not a constant-1 wire"
            )));
        }
        for (idx, gate) in circuit.gates().iter().enumerate() {
            match gate {
                Gate::Mct { controls, target } => {
                    if *target == test_line {
                        return Err(OfflineError::UnexpectedStructure(format!(
                            "gate {} writes the test wire",
                            idx + 1
                        )));
                    }
                    let blocked = controls
                        .iter()
                        .any(|c| c.line == test_line && c.polarity == crate::circuit::Polarity::Positive);
                    if !blocked {
                        return Err(OfflineError::UnexpectedStructure(format!(
                            "gate {} is not controlled by the test wire",
                            idx + 1
                        )));
                    }
                }
                Gate::Mcf { .. } => {
                    if method == OfflineMethod::MctBlocking {
                        return Err(OfflineError::UnexpectedStructure(format!(
                            "gate {} is a swap gate in an all-blocking circuit",
                            idx + 1
                        )));
                    }
                    if gate.touches(test_line) {
                        return Err(OfflineError::UnexpectedStructure(format!(
                            "swap gate {} touches the test wire",
                            idx + 1
                        )));
                    }
                }
            }
        }
        Ok(OfflineTestableCircuit { circuit: circuit.clone(), method, test_line })
    }
}

fn blocking_transform(circuit: &Circuit, method: OfflineMethod) -> OfflineTestableCircuit {
    let mut b = CircuitBuilder::from_circuit_shell(circuit);
    let test_name = circuit.fresh_name("tst");
    let test_line = b.constant(&test_name, true);
    b.mark_output(test_line);
    for gate in circuit.gates() {
        match gate {
            Gate::Mct { controls, target } => {
                let mut controls = controls.clone();
                controls.push(Control::pos(test_line));
                b.mct(controls, *target);
            }
            Gate::Mcf { .. } => b.push(gate.clone()),
        }
    }
    b.annotate(format!("revdft: method={} test={}", method.name(), test_name));
    let built = b.build().expect("blocking transform preserves validity");
    OfflineTestableCircuit { circuit: built, method, test_line }
}

/// Adds a constant-1 test wire as a positive control on every gate of an
/// all-Toffoli-family circuit. Gate count is unchanged; driving the wire
/// to 0 blocks everything, making test mode the identity on all inputs.
pub fn modify_mct_offline(circuit: &Circuit) -> Result<OfflineTestableCircuit, OfflineError> {
    for (idx, gate) in circuit.gates().iter().enumerate() {
        if matches!(gate, Gate::Mcf { .. }) {
            return Err(OfflineError::ExpectedAllMct { level: idx + 1 });
        }
    }
    Ok(blocking_transform(circuit, OfflineMethod::MctBlocking))
}

/// Blocking transform for mixed circuits: Toffoli-family gates gain the
/// test control, swap gates stay live. Test mode is *not* the identity on
/// arbitrary inputs (a live swap moves unequal bits), but it is on the
/// uniform test vectors, which is all the stuck-at argument needs.
pub fn modify_mctf_offline(circuit: &Circuit) -> Result<OfflineTestableCircuit, OfflineError> {
    Ok(blocking_transform(circuit, OfflineMethod::MctfBlocking))
}

/// The two uniform test vectors for a width, assuming the test wire is the
/// last one: all zeros, and all ones with the last wire at 0.
pub fn gts_stuck_at(width: usize) -> TestSet {
    assert!(width >= 1, "gts needs at least the test wire");
    let zeros = State::zeros(width);
    let mut ones = State::from_bits(vec![true; width]);
    ones.set(LineId(width - 1), false);
    TestSet::new("gts", [zeros, ones], ResponseRule::IdentityOutput)
}

/// Uniform pair for stuck-at faults on uninstrumented swap-family
/// circuits. Both vectors are fixed points of every swap gate, so the
/// identity rule applies; a forced wire surfaces on whichever vector
/// disagrees with the forced value.
pub fn mcf_stuck_testset(width: usize) -> TestSet {
    TestSet::new(
        "stuck2",
        [State::zeros(width), State::from_bits(vec![true; width])],
        ResponseRule::IdentityOutput,
    )
}

/// Weight `n-1` sweep for missing-gate faults on swap-family circuits:
/// vector i carries a single 0 at wire i. A missing swap shows up when it
/// would have moved the lone 0. Coverage is reported, not guaranteed.
pub fn mcf_missing_gate_testset(width: usize) -> TestSet {
    let vectors = (0..width).map(|i| {
        let mut s = State::from_bits(vec![true; width]);
        s.set(LineId(i), false);
        s
    });
    TestSet::new("weightn", vectors, ResponseRule::CompareToFaultFree)
}

/// Adjacent-pair family for bridging faults on swap-family circuits: for
/// each interior position i the vector with ones exactly at wires i and
/// i+1, plus the complement of each. Coverage is reported, not guaranteed.
pub fn mcf_bridging_testset(width: usize) -> TestSet {
    let mut vectors = Vec::new();
    if width >= 3 {
        for i in 1..=width - 2 {
            let mut s = State::zeros(width);
            s.set(LineId(i), true);
            s.set(LineId(i + 1), true);
            vectors.push(s);
        }
        let complements: Vec<State> = vectors
            .iter()
            .map(|v| {
                let mut s = v.clone();
                for line in 0..width {
                    s.flip(LineId(line));
                }
                s
            })
            .collect();
        vectors.extend(complements);
    }
    TestSet::new("pairs", vectors, ResponseRule::CompareToFaultFree)
}
