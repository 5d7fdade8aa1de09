//! Core circuit representation: wires, controlled gates, and bit-exact
//! simulation.
//!
//! A circuit is an ordered cascade of reversible gates over a fixed set of
//! named wires. Two gate families are supported: multiple-controlled Toffoli
//! (MCT), which flips a single target wire when every control is satisfied,
//! and multiple-controlled Fredkin (MCF), which swaps two target wires under
//! the same condition. Controls carry a polarity: positive controls fire on
//! 1, negative controls fire on 0. Every gate is an involution, so a circuit
//! is inverted by reversing its gate list, and every circuit computes a
//! permutation of its input space.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

/// Index of a wire. Wires are numbered contiguously from 0 in declaration
/// order; names live on the owning [`Circuit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct LineId(pub usize);

impl fmt::Display for LineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Control polarity. Positive controls are satisfied by 1, negative by 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Positive,
    Negative,
}

/// A control connection: a wire plus the polarity it must match for the
/// owning gate to fire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Control {
    pub line: LineId,
    pub polarity: Polarity,
}

impl Control {
    pub fn pos(line: LineId) -> Self {
        Control { line, polarity: Polarity::Positive }
    }

    pub fn neg(line: LineId) -> Self {
        Control { line, polarity: Polarity::Negative }
    }

    /// True when the wire value matches the control polarity.
    pub fn satisfied_by(&self, value: bool) -> bool {
        match self.polarity {
            Polarity::Positive => value,
            Polarity::Negative => !value,
        }
    }
}

/// A reversible gate. `Mct` flips `target` when all controls are satisfied;
/// `Mcf` swaps the two targets when all controls are satisfied. A gate with
/// zero controls always fires (NOT for `Mct`, SWAP for `Mcf`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Gate {
    Mct { controls: Vec<Control>, target: LineId },
    Mcf { controls: Vec<Control>, targets: [LineId; 2] },
}

impl Gate {
    /// MCT constructor; controls are stored sorted by line index so that
    /// structurally equal gates compare equal.
    pub fn mct(controls: impl IntoIterator<Item = Control>, target: LineId) -> Gate {
        let mut controls: Vec<Control> = controls.into_iter().collect();
        controls.sort_by_key(|c| c.line);
        Gate::Mct { controls, target }
    }

    /// MCF constructor; controls and the target pair are stored sorted.
    pub fn mcf(controls: impl IntoIterator<Item = Control>, a: LineId, b: LineId) -> Gate {
        let mut controls: Vec<Control> = controls.into_iter().collect();
        controls.sort_by_key(|c| c.line);
        let targets = if a <= b { [a, b] } else { [b, a] };
        Gate::Mcf { controls, targets }
    }

    pub fn is_mct(&self) -> bool {
        matches!(self, Gate::Mct { .. })
    }

    pub fn is_mcf(&self) -> bool {
        matches!(self, Gate::Mcf { .. })
    }

    pub fn controls(&self) -> &[Control] {
        match self {
            Gate::Mct { controls, .. } | Gate::Mcf { controls, .. } => controls,
        }
    }

    pub fn control_count(&self) -> usize {
        self.controls().len()
    }

    /// Target wires: one for MCT, two for MCF.
    pub fn targets(&self) -> &[LineId] {
        match self {
            Gate::Mct { target, .. } => std::slice::from_ref(target),
            Gate::Mcf { targets, .. } => targets,
        }
    }

    /// Every wire the gate is connected to, controls first.
    pub fn connected_lines(&self) -> impl Iterator<Item = LineId> + '_ {
        self.controls().iter().map(|c| c.line).chain(self.targets().iter().copied())
    }

    pub fn touches(&self, line: LineId) -> bool {
        self.connected_lines().any(|l| l == line)
    }

    /// True when every control is satisfied by `state`.
    pub fn fires(&self, state: &State) -> bool {
        self.controls().iter().all(|c| c.satisfied_by(state.get(c.line)))
    }

    /// Applies the gate to a copy of `state`. Fails when the state is too
    /// narrow for the wires the gate touches.
    pub fn apply(&self, state: &State) -> Result<State, CircuitError> {
        let needed = self.connected_lines().map(|l| l.0 + 1).max().unwrap_or(0);
        if state.width() < needed {
            return Err(CircuitError::WidthMismatch { expected: needed, got: state.width() });
        }
        let mut out = state.clone();
        self.apply_in_place(&mut out);
        Ok(out)
    }

    /// Applies the gate without bounds checking beyond slice indexing.
    pub(crate) fn apply_in_place(&self, state: &mut State) {
        if !self.fires(state) {
            return;
        }
        match self {
            Gate::Mct { target, .. } => state.flip(*target),
            Gate::Mcf { targets, .. } => state.swap(targets[0], targets[1]),
        }
    }
}

/// A width-n bit vector: the value of every wire at one point in time.
/// Index 0 is wire 0; textual forms put wire 0 first (leftmost).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State {
    bits: Vec<bool>,
}

impl State {
    pub fn zeros(width: usize) -> State {
        State { bits: vec![false; width] }
    }

    pub fn from_bits(bits: Vec<bool>) -> State {
        State { bits }
    }

    /// Parses a string of `0`/`1` characters, first character = wire 0.
    pub fn from_bitstring(text: &str) -> Result<State, CircuitError> {
        let mut bits = Vec::with_capacity(text.len());
        for ch in text.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => return Err(CircuitError::BadBitString { found: other }),
            }
        }
        Ok(State { bits })
    }

    pub fn to_bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Builds a state from an integer; bit i of `value` becomes wire i.
    pub fn from_index(width: usize, value: u64) -> State {
        assert!(width <= 64, "index form supports at most 64 wires");
        State { bits: (0..width).map(|i| (value >> i) & 1 == 1).collect() }
    }

    /// Inverse of [`State::from_index`]; requires width <= 64.
    pub fn to_index(&self) -> u64 {
        assert!(self.width() <= 64, "index form supports at most 64 wires");
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| if b { acc | (1 << i) } else { acc })
    }

    /// All `2^width` states in index order; `width` must stay small.
    pub fn all(width: usize) -> impl Iterator<Item = State> {
        assert!(width <= 24, "exhaustive state enumeration capped at 24 wires");
        (0..(1u64 << width)).map(move |v| State::from_index(width, v))
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn get(&self, line: LineId) -> bool {
        self.bits[line.0]
    }

    pub fn set(&mut self, line: LineId, value: bool) {
        self.bits[line.0] = value;
    }

    pub fn flip(&mut self, line: LineId) {
        self.bits[line.0] = !self.bits[line.0];
    }

    pub fn swap(&mut self, a: LineId, b: LineId) {
        self.bits.swap(a.0, b.0);
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of wires carrying 1.
    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// XOR over all wires.
    pub fn parity(&self) -> bool {
        self.popcount() % 2 == 1
    }
}

impl std::ops::Index<LineId> for State {
    type Output = bool;

    fn index(&self, line: LineId) -> &bool {
        &self.bits[line.0]
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

/// A structural rule broken by a circuit, naming the offending gate or wire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    BadLineName { line: usize, name: String },
    DuplicateLineName { name: String },
    LineOutOfRange { gate: usize, line: usize },
    RepeatedControlLine { gate: usize, line: usize },
    TargetIsControl { gate: usize, line: usize },
    IdenticalTargets { gate: usize, line: usize },
    ConstantOutOfRange { line: usize },
    OutputOutOfRange { line: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadLineName { line, name } => write!(
                f,
                "wire {line} has invalid name {name:?}: names must be non-empty and free of whitespace, commas, and apostrophes"
            ),
            Violation::DuplicateLineName { name } => {
                write!(f, "wire name {name:?} is declared more than once")
            }
            Violation::LineOutOfRange { gate, line } => {
                write!(f, "gate {gate} references wire {line} which does not exist")
            }
            Violation::RepeatedControlLine { gate, line } => {
                write!(f, "gate {gate} uses wire {line} as a control more than once")
            }
            Violation::TargetIsControl { gate, line } => {
                write!(f, "gate {gate} uses wire {line} both as control and target")
            }
            Violation::IdenticalTargets { gate, line } => {
                write!(f, "gate {gate} swaps wire {line} with itself")
            }
            Violation::ConstantOutOfRange { line } => {
                write!(f, "constant declared for wire {line} which does not exist")
            }
            Violation::OutputOutOfRange { line } => {
                write!(f, "output declared for wire {line} which does not exist")
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CircuitError {
    #[error("state width {got} does not match required width {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("wire {name:?} is declared constant {}, input carries {}", *expected as u8, *got as u8)]
    ConstantViolation { name: String, expected: bool, got: bool },
    #[error("bit strings may only contain '0' and '1', found {found:?}")]
    BadBitString { found: char },
    #[error("invalid circuit: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(violations: &[Violation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// An ordered gate cascade over named wires, with declared roles: each wire
/// is either a primary input or carries a constant, and a subset of wires is
/// declared as primary outputs (the rest are garbage).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    names: Vec<String>,
    gates: Vec<Gate>,
    constants: BTreeMap<LineId, bool>,
    outputs: BTreeSet<LineId>,
    metadata: Vec<String>,
}

impl Circuit {
    /// Number of wires.
    pub fn width(&self) -> usize {
        self.names.len()
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn lines(&self) -> impl Iterator<Item = LineId> {
        (0..self.width()).map(LineId)
    }

    pub fn line_name(&self, line: LineId) -> &str {
        &self.names[line.0]
    }

    pub fn line_names(&self) -> &[String] {
        &self.names
    }

    pub fn line_named(&self, name: &str) -> Option<LineId> {
        self.names.iter().position(|n| n == name).map(LineId)
    }

    /// Declared constant value of a wire, or `None` for primary inputs.
    pub fn constant_value(&self, line: LineId) -> Option<bool> {
        self.constants.get(&line).copied()
    }

    pub fn constants(&self) -> &BTreeMap<LineId, bool> {
        &self.constants
    }

    /// Wires that are not constants, in index order.
    pub fn primary_inputs(&self) -> Vec<LineId> {
        self.lines().filter(|l| !self.constants.contains_key(l)).collect()
    }

    pub fn primary_outputs(&self) -> &BTreeSet<LineId> {
        &self.outputs
    }

    pub fn is_primary_output(&self, line: LineId) -> bool {
        self.outputs.contains(&line)
    }

    /// Wires whose final value is not a declared output.
    pub fn garbage_lines(&self) -> Vec<LineId> {
        self.lines().filter(|l| !self.outputs.contains(l)).collect()
    }

    /// Free-form annotation lines (netlist comments travel here).
    pub fn metadata(&self) -> &[String] {
        &self.metadata
    }

    pub fn push_metadata(&mut self, line: impl Into<String>) {
        self.metadata.push(line.into());
    }

    /// The input state with every constant at its declared value and all
    /// primary inputs at 0.
    pub fn baseline_state(&self) -> State {
        let mut s = State::zeros(self.width());
        for (&line, &value) in &self.constants {
            s.set(line, value);
        }
        s
    }

    /// All `2^k` input states over the k primary inputs, constants held at
    /// their declared values. Capped to keep enumeration bounded.
    pub fn primary_input_states(&self) -> Vec<State> {
        let inputs = self.primary_inputs();
        assert!(inputs.len() <= 20, "exhaustive primary-input enumeration capped at 20 inputs");
        let base = self.baseline_state();
        (0..(1u64 << inputs.len()))
            .map(|v| {
                let mut s = base.clone();
                for (j, &line) in inputs.iter().enumerate() {
                    s.set(line, (v >> j) & 1 == 1);
                }
                s
            })
            .collect()
    }

    /// Checks every structural rule and returns all violations found.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, name) in self.names.iter().enumerate() {
            let bad = name.is_empty()
                || name.chars().any(|c| c.is_whitespace() || c == ',' || c == '\'' || c == '#');
            if bad {
                violations.push(Violation::BadLineName { line: i, name: name.clone() });
            }
            if !seen.insert(name.clone()) {
                violations.push(Violation::DuplicateLineName { name: name.clone() });
            }
        }
        let width = self.width();
        for (gi, gate) in self.gates.iter().enumerate() {
            let mut control_lines = BTreeSet::new();
            for c in gate.controls() {
                if c.line.0 >= width {
                    violations.push(Violation::LineOutOfRange { gate: gi, line: c.line.0 });
                }
                if !control_lines.insert(c.line) {
                    violations.push(Violation::RepeatedControlLine { gate: gi, line: c.line.0 });
                }
            }
            for &t in gate.targets() {
                if t.0 >= width {
                    violations.push(Violation::LineOutOfRange { gate: gi, line: t.0 });
                }
                if control_lines.contains(&t) {
                    violations.push(Violation::TargetIsControl { gate: gi, line: t.0 });
                }
            }
            if let Gate::Mcf { targets, .. } = gate {
                if targets[0] == targets[1] {
                    violations.push(Violation::IdenticalTargets { gate: gi, line: targets[0].0 });
                }
            }
        }
        for &line in self.constants.keys() {
            if line.0 >= width {
                violations.push(Violation::ConstantOutOfRange { line: line.0 });
            }
        }
        for &line in &self.outputs {
            if line.0 >= width {
                violations.push(Violation::OutputOutOfRange { line: line.0 });
            }
        }
        violations
    }

    fn check_width(&self, input: &State) -> Result<(), CircuitError> {
        if input.width() != self.width() {
            return Err(CircuitError::WidthMismatch { expected: self.width(), got: input.width() });
        }
        Ok(())
    }

    /// Runs the cascade on `input`. Only the width is checked; constants may
    /// carry any value, which fault and test-mode simulations rely on.
    pub fn run(&self, input: &State) -> Result<State, CircuitError> {
        self.check_width(input)?;
        let mut state = input.clone();
        for gate in &self.gates {
            gate.apply_in_place(&mut state);
        }
        Ok(state)
    }

    /// Like [`Circuit::run`] but also rejects inputs that disagree with a
    /// declared constant.
    pub fn run_enforcing(&self, input: &State) -> Result<State, CircuitError> {
        self.check_width(input)?;
        for (&line, &expected) in &self.constants {
            if input.get(line) != expected {
                return Err(CircuitError::ConstantViolation {
                    name: self.line_name(line).to_string(),
                    expected,
                    got: input.get(line),
                });
            }
        }
        self.run(input)
    }

    /// Runs the cascade and returns the state after every gate; the result
    /// holds `gate_count() + 1` states, the first being `input` itself.
    pub fn run_traced(&self, input: &State) -> Result<Vec<State>, CircuitError> {
        self.check_width(input)?;
        let mut trace = Vec::with_capacity(self.gates.len() + 1);
        let mut state = input.clone();
        trace.push(state.clone());
        for gate in &self.gates {
            gate.apply_in_place(&mut state);
            trace.push(state.clone());
        }
        Ok(trace)
    }

    /// The inverse circuit: same wires and roles, gate list reversed. Since
    /// every gate is an involution no gate-level inversion is needed.
    /// Annotation lines are kept except `revdft:` markers, which describe
    /// the forward circuit only.
    pub fn inverse(&self) -> Circuit {
        let mut gates = self.gates.clone();
        gates.reverse();
        Circuit {
            names: self.names.clone(),
            gates,
            constants: self.constants.clone(),
            outputs: self.outputs.clone(),
            metadata: self
                .metadata
                .iter()
                .filter(|m| !m.trim_start().starts_with("revdft:"))
                .cloned()
                .collect(),
        }
    }

    /// A wire name not yet in use: `base` itself, or `base0`, `base1`, ...
    pub fn fresh_name(&self, base: &str) -> String {
        if self.line_named(base).is_none() {
            return base.to_string();
        }
        let mut i = 0usize;
        loop {
            let candidate = format!("{base}{i}");
            if self.line_named(&candidate).is_none() {
                return candidate;
            }
            i += 1;
        }
    }
}

/// Incremental [`Circuit`] constructor. Wires are appended in call order;
/// when no output is ever marked, every wire is treated as a primary output.
#[derive(Debug, Clone, Default)]
pub struct CircuitBuilder {
    names: Vec<String>,
    gates: Vec<Gate>,
    constants: BTreeMap<LineId, bool>,
    outputs: Option<BTreeSet<LineId>>,
    metadata: Vec<String>,
}

impl CircuitBuilder {
    pub fn new() -> CircuitBuilder {
        CircuitBuilder::default()
    }

    /// Starts from an existing circuit, keeping wires, roles, and metadata
    /// but not the gates.
    pub fn from_circuit_shell(circuit: &Circuit) -> CircuitBuilder {
        CircuitBuilder {
            names: circuit.names.clone(),
            gates: Vec::new(),
            constants: circuit.constants.clone(),
            outputs: Some(circuit.outputs.clone()),
            metadata: circuit.metadata.clone(),
        }
    }

    /// Appends a primary-input wire.
    pub fn input(&mut self, name: impl Into<String>) -> LineId {
        let id = LineId(self.names.len());
        self.names.push(name.into());
        id
    }

    /// Appends a constant wire.
    pub fn constant(&mut self, name: impl Into<String>, value: bool) -> LineId {
        let id = self.input(name);
        self.constants.insert(id, value);
        id
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn mct(&mut self, controls: impl IntoIterator<Item = Control>, target: LineId) {
        self.push(Gate::mct(controls, target));
    }

    pub fn mcf(&mut self, controls: impl IntoIterator<Item = Control>, a: LineId, b: LineId) {
        self.push(Gate::mcf(controls, a, b));
    }

    /// Declares `line` a primary output. First call switches the circuit
    /// from the all-outputs default to an explicit output set.
    pub fn mark_output(&mut self, line: LineId) {
        self.outputs.get_or_insert_with(BTreeSet::new).insert(line);
    }

    pub fn set_outputs(&mut self, lines: impl IntoIterator<Item = LineId>) {
        self.outputs = Some(lines.into_iter().collect());
    }

    pub fn annotate(&mut self, line: impl Into<String>) {
        self.metadata.push(line.into());
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    /// Validates and returns the finished circuit.
    pub fn build(self) -> Result<Circuit, CircuitError> {
        let all_outputs = (0..self.names.len()).map(LineId).collect();
        let circuit = Circuit {
            names: self.names,
            gates: self.gates,
            constants: self.constants,
            outputs: self.outputs.unwrap_or(all_outputs),
            metadata: self.metadata,
        };
        let violations = circuit.validate();
        if violations.is_empty() {
            Ok(circuit)
        } else {
            Err(CircuitError::Invalid(violations))
        }
    }
}
