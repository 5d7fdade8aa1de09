//! TFC netlist reader and writer.
//!
//! The format is line oriented. Header directives declare wires and roles,
//! then a `BEGIN`/`END` block lists gates in cascade order:
//!
//! ```text
//! .v a,b,c        wire order (defines indices)
//! .i a,b          primary inputs; omitted = every wire is an input
//! .o c            primary outputs; omitted = every wire is an output
//! .c 0            constant bits, positionally for the non-input wires
//! BEGIN
//! t2 a,b          MCT: one target, last operand; here CNOT(a -> b)
//! t3 a,b',c       apostrophe marks a negative control
//! f3 a,b,c        MCF: two targets, last two operands
//! END
//! ```
//!
//! `#` starts a comment; comment text is kept as circuit metadata and
//! re-emitted at the top of the file. Names are case sensitive. Output uses
//! LF line endings; CRLF input is accepted. Every diagnostic carries the
//! 1-based source line and the rule that was broken.

use std::collections::BTreeSet;

use crate::circuit::{Circuit, CircuitBuilder, Control, Gate, LineId, Polarity};

#[derive(Debug, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct TfcError {
    pub line: usize,
    pub kind: TfcErrorKind,
}

impl TfcError {
    fn new(line: usize, kind: TfcErrorKind) -> TfcError {
        TfcError { line, kind }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TfcErrorKind {
    #[error("unsupported: use TFC ({0:?} is a PLA directive)")]
    PlaInput(String),
    #[error("unknown directive {0:?}")]
    UnknownDirective(String),
    #[error("duplicate directive {0}")]
    DuplicateDirective(&'static str),
    #[error("directives must appear before BEGIN")]
    DirectiveAfterBegin,
    #[error("gates are only allowed between BEGIN and END")]
    GateOutsideBody,
    #[error("BEGIN requires a preceding .v declaration")]
    MissingVariables,
    #[error("duplicate BEGIN")]
    DuplicateBegin,
    #[error("no BEGIN block found")]
    MissingBegin,
    #[error("END is missing")]
    MissingEnd,
    #[error("content after END")]
    TextAfterEnd,
    #[error("empty variable name")]
    EmptyName,
    #[error("invalid variable name {0:?}")]
    BadVariableName(String),
    #[error("variable {0:?} declared more than once")]
    DuplicateVariable(String),
    #[error("reference to undeclared variable {0:?}")]
    UndeclaredVariable(String),
    #[error("gate kind {0:?} is not supported (expected t<k> or f<k>)")]
    BadGateKind(String),
    #[error("{kind}{declared} declares {declared} operands but {got} are listed")]
    OperandCountMismatch { kind: char, declared: usize, got: usize },
    #[error("t gates take at least 1 operand and f gates at least 2")]
    TooFewOperands,
    #[error("operand {0:?} appears more than once in one gate")]
    DuplicateOperand(String),
    #[error("targets may not be negated: {0:?}")]
    NegatedTarget(String),
    #[error(".c lists {got} bits but the circuit has {expected} non-input wires")]
    ConstantCountMismatch { expected: usize, got: usize },
    #[error("constant bits must be 0 or 1, found {0:?}")]
    BadConstantBit(String),
    #[error("{0}")]
    InvalidCircuit(String),
}

/// Gate family marker in a parsed netlist line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfcGateKind {
    Toffoli,
    Fredkin,
}

/// One operand of a netlist gate line, before resolution to wire indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TfcOperand {
    pub name: String,
    pub negated: bool,
}

/// One gate line: `t<k>`/`f<k>` plus its operands in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TfcGate {
    pub kind: TfcGateKind,
    pub operands: Vec<TfcOperand>,
    /// 1-based source line, 0 for programmatically built documents.
    pub line: usize,
}

/// Source line numbers of the header directives, for diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceLines {
    pub v: usize,
    pub i: usize,
    pub o: usize,
    pub c: usize,
}

/// Syntactic form of a TFC file: directives and gate lines as written, with
/// comments preserved. Resolution to a [`Circuit`] happens in
/// [`TfcDocument::to_circuit`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TfcDocument {
    pub variables: Vec<String>,
    pub inputs: Option<Vec<String>>,
    pub outputs: Option<Vec<String>>,
    pub constants: Option<Vec<bool>>,
    pub gates: Vec<TfcGate>,
    pub comments: Vec<String>,
    pub source_lines: SourceLines,
}

const PLA_DIRECTIVES: &[&str] =
    &[".pi", ".po", ".ilb", ".ob", ".p", ".type", ".e", ".end", ".phase", ".pair"];

fn split_names(payload: &str, line: usize) -> Result<Vec<String>, TfcError> {
    if payload.trim().is_empty() {
        return Ok(Vec::new());
    }
    payload
        .split(',')
        .map(|raw| {
            let name = raw.trim();
            if name.is_empty() {
                Err(TfcError::new(line, TfcErrorKind::EmptyName))
            } else {
                Ok(name.to_string())
            }
        })
        .collect()
}

/// Parses TFC text into its syntactic document form.
pub fn parse_document(text: &str) -> Result<TfcDocument, TfcError> {
    #[derive(PartialEq)]
    enum Section {
        Header,
        Body,
        Done,
    }

    let mut doc = TfcDocument::default();
    let mut section = Section::Header;
    let mut saw_v = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let content = match raw.find('#') {
            Some(pos) => {
                let comment = raw[pos + 1..].trim();
                if !comment.is_empty() {
                    doc.comments.push(comment.to_string());
                }
                &raw[..pos]
            }
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }

        match section {
            Section::Header => {
                if content == "BEGIN" {
                    if !saw_v {
                        return Err(TfcError::new(line_no, TfcErrorKind::MissingVariables));
                    }
                    section = Section::Body;
                    continue;
                }
                if let Some(first) = content.split_whitespace().next() {
                    if first.starts_with('.') {
                        let payload = content[first.len()..].trim();
                        parse_directive(&mut doc, first, payload, line_no, &mut saw_v)?;
                        continue;
                    }
                }
                return Err(TfcError::new(line_no, TfcErrorKind::GateOutsideBody));
            }
            Section::Body => {
                if content == "END" {
                    section = Section::Done;
                    continue;
                }
                if content == "BEGIN" {
                    return Err(TfcError::new(line_no, TfcErrorKind::DuplicateBegin));
                }
                if content.starts_with('.') {
                    return Err(TfcError::new(line_no, TfcErrorKind::DirectiveAfterBegin));
                }
                doc.gates.push(parse_gate_line(content, line_no)?);
            }
            Section::Done => {
                return Err(TfcError::new(line_no, TfcErrorKind::TextAfterEnd));
            }
        }
    }

    match section {
        Section::Header => Err(TfcError::new(text.lines().count(), TfcErrorKind::MissingBegin)),
        Section::Body => Err(TfcError::new(text.lines().count(), TfcErrorKind::MissingEnd)),
        Section::Done => Ok(doc),
    }
}

fn parse_directive(
    doc: &mut TfcDocument,
    word: &str,
    payload: &str,
    line: usize,
    saw_v: &mut bool,
) -> Result<(), TfcError> {
    if PLA_DIRECTIVES.contains(&word) {
        return Err(TfcError::new(line, TfcErrorKind::PlaInput(word.to_string())));
    }
    match word {
        ".v" => {
            if *saw_v {
                return Err(TfcError::new(line, TfcErrorKind::DuplicateDirective(".v")));
            }
            *saw_v = true;
            doc.source_lines.v = line;
            doc.variables = split_names(payload, line)?;
            for name in &doc.variables {
                if name.contains('\'') {
                    return Err(TfcError::new(line, TfcErrorKind::BadVariableName(name.clone())));
                }
            }
        }
        ".i" => {
            if doc.inputs.is_some() {
                return Err(TfcError::new(line, TfcErrorKind::DuplicateDirective(".i")));
            }
            doc.source_lines.i = line;
            doc.inputs = Some(split_names(payload, line)?);
        }
        ".o" => {
            if doc.outputs.is_some() {
                return Err(TfcError::new(line, TfcErrorKind::DuplicateDirective(".o")));
            }
            doc.source_lines.o = line;
            doc.outputs = Some(split_names(payload, line)?);
        }
        ".c" => {
            if doc.constants.is_some() {
                return Err(TfcError::new(line, TfcErrorKind::DuplicateDirective(".c")));
            }
            doc.source_lines.c = line;
            let mut bits = Vec::new();
            if !payload.trim().is_empty() {
                for tok in payload.split(',') {
                    match tok.trim() {
                        "0" => bits.push(false),
                        "1" => bits.push(true),
                        other => {
                            return Err(TfcError::new(
                                line,
                                TfcErrorKind::BadConstantBit(other.to_string()),
                            ))
                        }
                    }
                }
            }
            doc.constants = Some(bits);
        }
        other => return Err(TfcError::new(line, TfcErrorKind::UnknownDirective(other.to_string()))),
    }
    Ok(())
}

fn parse_gate_line(content: &str, line: usize) -> Result<TfcGate, TfcError> {
    let (header, rest) = match content.find(char::is_whitespace) {
        Some(pos) => (&content[..pos], content[pos..].trim()),
        None => (content, ""),
    };
    let mut chars = header.chars();
    let kind = match chars.next() {
        Some('t') => TfcGateKind::Toffoli,
        Some('f') => TfcGateKind::Fredkin,
        _ => return Err(TfcError::new(line, TfcErrorKind::BadGateKind(header.to_string()))),
    };
    let count: usize = chars
        .as_str()
        .parse()
        .map_err(|_| TfcError::new(line, TfcErrorKind::BadGateKind(header.to_string())))?;
    let min = match kind {
        TfcGateKind::Toffoli => 1,
        TfcGateKind::Fredkin => 2,
    };
    if count < min {
        return Err(TfcError::new(line, TfcErrorKind::TooFewOperands));
    }
    let mut operands = Vec::new();
    if !rest.is_empty() {
        for raw in rest.split(',') {
            let tok = raw.trim();
            if tok.is_empty() {
                return Err(TfcError::new(line, TfcErrorKind::EmptyName));
            }
            let (name, negated) = match tok.strip_suffix('\'') {
                Some(stem) => (stem, true),
                None => (tok, false),
            };
            if name.is_empty() {
                return Err(TfcError::new(line, TfcErrorKind::EmptyName));
            }
            operands.push(TfcOperand { name: name.to_string(), negated });
        }
    }
    if operands.len() != count {
        let kind_char = match kind {
            TfcGateKind::Toffoli => 't',
            TfcGateKind::Fredkin => 'f',
        };
        return Err(TfcError::new(
            line,
            TfcErrorKind::OperandCountMismatch {
                kind: kind_char,
                declared: count,
                got: operands.len(),
            },
        ));
    }
    Ok(TfcGate { kind, operands, line })
}

impl TfcDocument {
    /// Resolves names and roles into a validated [`Circuit`].
    pub fn to_circuit(&self) -> Result<Circuit, TfcError> {
        let mut builder = CircuitBuilder::new();
        let mut index = std::collections::BTreeMap::new();

        let input_names: BTreeSet<&str> = match &self.inputs {
            Some(list) => list.iter().map(String::as_str).collect(),
            None => self.variables.iter().map(String::as_str).collect(),
        };
        let non_inputs: Vec<&str> = self
            .variables
            .iter()
            .map(String::as_str)
            .filter(|name| !input_names.contains(name))
            .collect();
        let constant_bits = match &self.constants {
            Some(bits) => {
                if bits.len() != non_inputs.len() {
                    return Err(TfcError::new(
                        self.source_lines.c,
                        TfcErrorKind::ConstantCountMismatch {
                            expected: non_inputs.len(),
                            got: bits.len(),
                        },
                    ));
                }
                bits.clone()
            }
            None => vec![false; non_inputs.len()],
        };
        let mut constant_of: std::collections::BTreeMap<&str, bool> = std::collections::BTreeMap::new();
        for (name, bit) in non_inputs.iter().zip(&constant_bits) {
            constant_of.insert(name, *bit);
        }

        for name in &self.variables {
            if index.contains_key(name.as_str()) {
                return Err(TfcError::new(
                    self.source_lines.v,
                    TfcErrorKind::DuplicateVariable(name.clone()),
                ));
            }
            let id = match constant_of.get(name.as_str()) {
                Some(&bit) => builder.constant(name.clone(), bit),
                None => builder.input(name.clone()),
            };
            index.insert(name.as_str(), id);
        }

        if let Some(inputs) = &self.inputs {
            let mut seen = BTreeSet::new();
            for name in inputs {
                if !index.contains_key(name.as_str()) {
                    return Err(TfcError::new(
                        self.source_lines.i,
                        TfcErrorKind::UndeclaredVariable(name.clone()),
                    ));
                }
                if !seen.insert(name.as_str()) {
                    return Err(TfcError::new(
                        self.source_lines.i,
                        TfcErrorKind::DuplicateVariable(name.clone()),
                    ));
                }
            }
        }

        if let Some(outputs) = &self.outputs {
            let mut marked = BTreeSet::new();
            for name in outputs {
                match index.get(name.as_str()) {
                    Some(&id) => {
                        if !marked.insert(id) {
                            return Err(TfcError::new(
                                self.source_lines.o,
                                TfcErrorKind::DuplicateVariable(name.clone()),
                            ));
                        }
                        builder.mark_output(id);
                    }
                    None => {
                        return Err(TfcError::new(
                            self.source_lines.o,
                            TfcErrorKind::UndeclaredVariable(name.clone()),
                        ))
                    }
                }
            }
            if outputs.is_empty() {
                builder.set_outputs([]);
            }
        }

        for gate in &self.gates {
            let mut seen = BTreeSet::new();
            let mut resolved = Vec::with_capacity(gate.operands.len());
            for op in &gate.operands {
                let id = *index.get(op.name.as_str()).ok_or_else(|| {
                    TfcError::new(gate.line, TfcErrorKind::UndeclaredVariable(op.name.clone()))
                })?;
                if !seen.insert(id) {
                    return Err(TfcError::new(
                        gate.line,
                        TfcErrorKind::DuplicateOperand(op.name.clone()),
                    ));
                }
                resolved.push((id, op.negated, op.name.clone()));
            }
            let target_count = match gate.kind {
                TfcGateKind::Toffoli => 1,
                TfcGateKind::Fredkin => 2,
            };
            let control_count = resolved.len() - target_count;
            for (_, negated, name) in &resolved[control_count..] {
                if *negated {
                    return Err(TfcError::new(
                        gate.line,
                        TfcErrorKind::NegatedTarget(name.clone()),
                    ));
                }
            }
            let controls = resolved[..control_count].iter().map(|(id, negated, _)| Control {
                line: *id,
                polarity: if *negated { Polarity::Negative } else { Polarity::Positive },
            });
            match gate.kind {
                TfcGateKind::Toffoli => {
                    let target = resolved[control_count].0;
                    builder.mct(controls, target);
                }
                TfcGateKind::Fredkin => {
                    let a = resolved[control_count].0;
                    let b = resolved[control_count + 1].0;
                    builder.mcf(controls, a, b);
                }
            }
        }

        for comment in &self.comments {
            builder.annotate(comment.clone());
        }

        builder.build().map_err(|e| {
            TfcError::new(self.source_lines.v, TfcErrorKind::InvalidCircuit(e.to_string()))
        })
    }

    /// Canonical document form of a circuit.
    pub fn from_circuit(circuit: &Circuit) -> TfcDocument {
        let name = |l: LineId| circuit.line_name(l).to_string();
        let inputs: Vec<String> = circuit.primary_inputs().into_iter().map(name).collect();
        let outputs: Vec<String> =
            circuit.lines().filter(|l| circuit.is_primary_output(*l)).map(name).collect();
        let constants: Vec<bool> = circuit
            .lines()
            .filter_map(|l| circuit.constant_value(l))
            .collect();
        let gates = circuit
            .gates()
            .iter()
            .map(|gate| {
                let mut operands: Vec<TfcOperand> = gate
                    .controls()
                    .iter()
                    .map(|c| TfcOperand {
                        name: name(c.line),
                        negated: c.polarity == Polarity::Negative,
                    })
                    .collect();
                for &t in gate.targets() {
                    operands.push(TfcOperand { name: name(t), negated: false });
                }
                TfcGate {
                    kind: match gate {
                        Gate::Mct { .. } => TfcGateKind::Toffoli,
                        Gate::Mcf { .. } => TfcGateKind::Fredkin,
                    },
                    operands,
                    line: 0,
                }
            })
            .collect();
        TfcDocument {
            variables: circuit.line_names().to_vec(),
            inputs: Some(inputs),
            outputs: Some(outputs),
            constants: if circuit.constants().is_empty() { None } else { Some(constants) },
            gates,
            comments: circuit.metadata().to_vec(),
            source_lines: SourceLines::default(),
        }
    }

    /// Renders the document as TFC text with LF line endings.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for comment in &self.comments {
            out.push_str("# ");
            out.push_str(comment);
            out.push('\n');
        }
        out.push_str(".v ");
        out.push_str(&self.variables.join(","));
        out.push('\n');
        if let Some(inputs) = &self.inputs {
            out.push_str(".i ");
            out.push_str(&inputs.join(","));
            out.push('\n');
        }
        if let Some(outputs) = &self.outputs {
            out.push_str(".o ");
            out.push_str(&outputs.join(","));
            out.push('\n');
        }
        if let Some(constants) = &self.constants {
            out.push_str(".c ");
            let bits: Vec<&str> = constants.iter().map(|&b| if b { "1" } else { "0" }).collect();
            out.push_str(&bits.join(","));
            out.push('\n');
        }
        out.push_str("BEGIN\n");
        for gate in &self.gates {
            let kind = match gate.kind {
                TfcGateKind::Toffoli => 't',
                TfcGateKind::Fredkin => 'f',
            };
            let ops: Vec<String> = gate
                .operands
                .iter()
                .map(|op| if op.negated { format!("{}'", op.name) } else { op.name.clone() })
                .collect();
            out.push_str(&format!("{kind}{} {}\n", gate.operands.len(), ops.join(",")));
        }
        out.push_str("END\n");
        out
    }
}

/// Parses TFC text into a validated circuit.
pub fn parse_tfc(text: &str) -> Result<Circuit, TfcError> {
    parse_document(text)?.to_circuit()
}

/// Writes a circuit in canonical TFC form.
pub fn write_tfc(circuit: &Circuit) -> String {
    TfcDocument::from_circuit(circuit).render()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::State;

    const EXAMPLE: &str = "\
# adder cell
.v a,b,c,z
.i a,b,c
.o c,z
.c 0
BEGIN
t3 a,b,z
t2 a,b
t3 b,c,z
t2 b,c
END
";

    #[test]
    fn parses_directives_roles_and_gates() {
        let c = parse_tfc(EXAMPLE).unwrap();
        assert_eq!(c.width(), 4);
        assert_eq!(c.gate_count(), 4);
        assert_eq!(c.line_names(), &["a", "b", "c", "z"]);
        assert_eq!(c.primary_inputs(), vec![LineId(0), LineId(1), LineId(2)]);
        assert_eq!(c.constant_value(LineId(3)), Some(false));
        assert!(c.is_primary_output(LineId(2)) && c.is_primary_output(LineId(3)));
        assert_eq!(c.garbage_lines(), vec![LineId(0), LineId(1)]);
        assert_eq!(c.metadata(), &["adder cell".to_string()]);
        let Gate::Mct { controls, target } = &c.gates()[0] else { panic!() };
        assert_eq!(controls.len(), 2);
        assert_eq!(*target, LineId(3));
    }

    #[test]
    fn negative_controls_parse_and_apply() {
        let text = ".v a,b\nBEGIN\nt2 b',a\nEND\n";
        let c = parse_tfc(text).unwrap();
        let Gate::Mct { controls, target } = &c.gates()[0] else { panic!() };
        assert_eq!(controls[0], Control::neg(LineId(1)));
        assert_eq!(*target, LineId(0));
        // fires on b = 0
        assert_eq!(c.run(&State::from_index(2, 0b00)).unwrap().to_index(), 0b01);
        assert_eq!(c.run(&State::from_index(2, 0b10)).unwrap().to_index(), 0b10);
    }

    #[test]
    fn fredkin_line_takes_two_targets() {
        let c = parse_tfc(".v a,b,c\nBEGIN\nf3 a,b,c\nEND\n").unwrap();
        let Gate::Mcf { controls, targets } = &c.gates()[0] else { panic!() };
        assert_eq!(controls[0], Control::pos(LineId(0)));
        assert_eq!(*targets, [LineId(1), LineId(2)]);
    }

    #[test]
    fn missing_o_means_all_outputs_and_missing_c_means_zeros() {
        let c = parse_tfc(".v a,b\n.i a\nBEGIN\nt2 a,b\nEND\n").unwrap();
        assert_eq!(c.primary_outputs().len(), 2);
        assert_eq!(c.constant_value(LineId(1)), Some(false));
    }

    #[test]
    fn missing_i_means_all_inputs() {
        let c = parse_tfc(".v a,b\nBEGIN\nEND\n").unwrap();
        assert_eq!(c.primary_inputs().len(), 2);
        assert!(c.constants().is_empty());
    }

    #[test]
    fn pla_input_gets_a_pointed_diagnostic() {
        let err = parse_tfc(".pi 4\n.po 3\n").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.to_string().contains("unsupported: use TFC"), "{err}");
    }

    fn expect_error(text: &str, line: usize, fragment: &str) {
        let err = parse_tfc(text).unwrap_err();
        assert_eq!(err.line, line, "wrong line for {fragment:?}: {err}");
        assert!(err.to_string().contains(fragment), "missing {fragment:?} in {err}");
    }

    #[test]
    fn malformed_inputs_name_line_and_rule() {
        expect_error(".q a\n", 1, "unknown directive");
        expect_error(".v a,b\nBEGIN\nt3 a,b\nEND\n", 3, "declares 3 operands but 2");
        expect_error(".v a,b\nBEGIN\nt2 a,z\nEND\n", 3, "undeclared variable \"z\"");
        expect_error(".v a,b\nBEGIN\nt2 a,a\nEND\n", 3, "more than once");
        expect_error(".v a,b\nBEGIN\nt2 a,b'\nEND\n", 3, "targets may not be negated");
        expect_error(".v a,b,c\nBEGIN\nf3 a',b,c'\nEND\n", 3, "targets may not be negated");
        expect_error(".v a,b\nt2 a,b\n", 2, "gates are only allowed");
        expect_error(".v a,b\nBEGIN\n.o a\nEND\n", 3, "before BEGIN");
        expect_error(".v a,b\nBEGIN\nEND\nt2 a,b\n", 4, "content after END");
        expect_error(".v a,b\nBEGIN\nt2 a,b\n", 3, "END is missing");
        expect_error(".v a,b\n.o a\n", 2, "no BEGIN block");
        expect_error("BEGIN\nEND\n", 1, "preceding .v");
        expect_error(".v a,b\n.v c\nBEGIN\nEND\n", 2, "duplicate directive .v");
        expect_error(".v a,,b\nBEGIN\nEND\n", 1, "empty variable name");
        expect_error(".v a,a\nBEGIN\nEND\n", 1, "declared more than once");
        expect_error(".v a,b'\nBEGIN\nEND\n", 1, "invalid variable name");
        expect_error(".v a,b\n.i a,z\nBEGIN\nEND\n", 2, "undeclared variable \"z\"");
        expect_error(".v a,b\n.o z\nBEGIN\nEND\n", 2, "undeclared variable \"z\"");
        expect_error(".v a,b\n.i a\n.c 0,1\nBEGIN\nEND\n", 3, "lists 2 bits");
        expect_error(".v a,b\n.i a\n.c 2\nBEGIN\nEND\n", 3, "must be 0 or 1");
        expect_error(".v a,b\nBEGIN\ng2 a,b\nEND\n", 3, "not supported");
        expect_error(".v a,b\nBEGIN\nT2 a,b\nEND\n", 3, "not supported");
        expect_error(".v a,b\nBEGIN\ntx a,b\nEND\n", 3, "not supported");
        expect_error(".v a,b\nBEGIN\nf1 a\nEND\n", 3, "at least 2");
        expect_error(".v a,b\nBEGIN\nt0\nEND\n", 3, "at least 1");
        expect_error(".v a,b\nBEGIN\nBEGIN\nEND\n", 3, "duplicate BEGIN");
    }

    #[test]
    fn crlf_input_is_accepted() {
        let text = ".v a,b\r\nBEGIN\r\nt2 a,b\r\nEND\r\n";
        let c = parse_tfc(text).unwrap();
        assert_eq!(c.gate_count(), 1);
    }

    #[test]
    fn names_are_case_sensitive() {
        let c = parse_tfc(".v A,a\nBEGIN\nt2 A,a\nEND\n").unwrap();
        assert_eq!(c.width(), 2);
        assert!(parse_tfc(".v a\nBEGIN\nt1 A\nEND\n").is_err());
    }

    #[test]
    fn whitespace_is_tolerated() {
        let text = "  .v   a , b ,c\nBEGIN\n  t3   a ,  b' , c\nEND\n";
        let c = parse_tfc(text).unwrap();
        assert_eq!(c.width(), 3);
        assert_eq!(c.gates()[0].controls().len(), 2);
    }

    #[test]
    fn writer_emits_canonical_form() {
        let c = parse_tfc(EXAMPLE).unwrap();
        let expected = "\
# adder cell
.v a,b,c,z
.i a,b,c
.o c,z
.c 0
BEGIN
t3 a,b,z
t2 a,b
t3 b,c,z
t2 b,c
END
";
        assert_eq!(write_tfc(&c), expected);
    }

    #[test]
    fn round_trip_is_identity_on_circuits() {
        let text = "\
# mixed families
.v x,y,z,w
.i x,y
.o x,w
.c 1,0
BEGIN
t1 x
t3 x,y',z
f4 x,z',y,w
t2 w,x
END
";
        let c = parse_tfc(text).unwrap();
        let again = parse_tfc(&write_tfc(&c)).unwrap();
        assert_eq!(c, again);
        // canonical text is a fixed point of write(parse(..))
        let rendered = write_tfc(&c);
        assert_eq!(write_tfc(&parse_tfc(&rendered).unwrap()), rendered);
    }

    #[test]
    fn empty_output_list_marks_everything_garbage() {
        let c = parse_tfc(".v a\n.o \nBEGIN\nEND\n").unwrap();
        assert!(c.primary_outputs().is_empty());
        assert_eq!(c.garbage_lines().len(), 1);
    }

    #[test]
    fn gates_with_no_body_round_trip() {
        let c = parse_tfc(".v a,b\nBEGIN\nEND\n").unwrap();
        assert_eq!(c.gate_count(), 0);
        assert_eq!(parse_tfc(&write_tfc(&c)).unwrap(), c);
    }
}
