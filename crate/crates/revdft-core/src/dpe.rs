//! Reversible datapath element builders.
//!
//! All elements share one full-adder cell: with `anc` a fresh constant-0
//! wire, the sequence `Toffoli(a,b -> anc); CNOT(a -> b); Toffoli(b,cin ->
//! anc); CNOT(b -> cin)` leaves the sum on the `cin` wire and the carry on
//! `anc`, passes `a` through unchanged, and turns `b` into `a^b` garbage.
//! Ripple-carry words chain the cell, each block reading the previous
//! block's carry wire; the multiplier and ALU instantiate those chains on
//! internal rails.

use std::fmt;

use crate::circuit::{Circuit, CircuitBuilder, CircuitError, Control, LineId, State};
use crate::online::{
    convert_mct_to_mctf_online, modify_mcf_online, OnlineError, OnlineTestableCircuit,
};

#[derive(Debug, thiserror::Error)]
pub enum DpeError {
    #[error("word size must be at least 1")]
    ZeroWidth,
    #[error("the ALU takes 1 to 4 operations, got {0}")]
    BadOpCount(usize),
    #[error("the ALU operation list repeats {0}")]
    DuplicateOp(AluOp),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Emits the four full-adder gates for one bit position. `x` passes
/// through, `y` becomes `x^y`, `cin` ends up holding the sum bit, and
/// `anc` (a constant-0 wire) ends up holding the carry.
fn full_adder_cell(b: &mut CircuitBuilder, x: LineId, y: LineId, cin: LineId, anc: LineId) {
    b.mct([Control::pos(x), Control::pos(y)], anc);
    b.mct([Control::pos(x)], y);
    b.mct([Control::pos(y), Control::pos(cin)], anc);
    b.mct([Control::pos(y)], cin);
}

/// Chains full-adder cells over aligned operand slices. Returns the wires
/// holding the sum bits (low to high) and the carry-out wire. Sum bit i
/// lands on what was the block's carry-in wire.
fn ripple_chain(
    b: &mut CircuitBuilder,
    x: &[LineId],
    y: &[LineId],
    carry_in: LineId,
    ancs: &[LineId],
) -> (Vec<LineId>, LineId) {
    assert_eq!(x.len(), y.len());
    assert_eq!(x.len(), ancs.len());
    let mut carry = carry_in;
    let mut sums = Vec::with_capacity(x.len());
    for ((&xi, &yi), &anc) in x.iter().zip(y).zip(ancs) {
        full_adder_cell(b, xi, yi, carry, anc);
        sums.push(carry);
        carry = anc;
    }
    (sums, carry)
}

/// A ripple-carry adder with its wire roles.
#[derive(Debug, Clone)]
pub struct Adder {
    pub circuit: Circuit,
    pub a: Vec<LineId>,
    pub b: Vec<LineId>,
    pub carry_in: LineId,
    /// Sum wires, low bit first. Bit 0 lands on the carry-in wire, higher
    /// bits on the carry ancillas of the previous blocks.
    pub sum: Vec<LineId>,
    pub carry_out: LineId,
}

fn build_adder(bits: usize, single_cell_names: bool) -> Result<Adder, DpeError> {
    if bits == 0 {
        return Err(DpeError::ZeroWidth);
    }
    let mut builder = CircuitBuilder::new();
    let name = |base: &str, i: usize| {
        if single_cell_names {
            base.to_string()
        } else {
            format!("{base}{i}")
        }
    };
    let a: Vec<LineId> = (0..bits).map(|i| builder.input(name("a", i))).collect();
    let b: Vec<LineId> = (0..bits).map(|i| builder.input(name("b", i))).collect();
    let carry_in = builder.input(if single_cell_names { "cin".into() } else { "c0".to_string() });
    let ancs: Vec<LineId> = (0..bits)
        .map(|i| builder.constant(if single_cell_names { "anc".into() } else { format!("anc{}", i + 1) }, false))
        .collect();
    let (sum, carry_out) = ripple_chain(&mut builder, &a, &b, carry_in, &ancs);
    for &line in &sum {
        builder.mark_output(line);
    }
    builder.mark_output(carry_out);
    let circuit = builder.build()?;
    Ok(Adder { circuit, a, b, carry_in, sum, carry_out })
}

/// One full-adder cell as a standalone circuit: wires `a`, `b`, `cin` and
/// the constant-0 `anc`; sum on `cin`, carry on `anc`, quantum cost 12.
pub fn build_full_adder() -> Adder {
    build_adder(1, true).expect("width 1 is valid")
}

/// An `n`-bit ripple-carry adder: `3n + 1` wires and `4n` gates.
pub fn build_rca(bits: usize) -> Result<Adder, DpeError> {
    build_adder(bits, false)
}

/// A 4x4 combinational multiplier with its wire roles.
#[derive(Debug, Clone)]
pub struct Multiplier {
    pub circuit: Circuit,
    pub a: Vec<LineId>,
    pub b: Vec<LineId>,
    /// Product wires, low bit first; the only primary outputs.
    pub product: Vec<LineId>,
}

/// Builds the 4x4 multiplier: sixteen Toffoli gates form all partial
/// products `a_i b_j` on fresh wires, then three zero-padded ripple chains
/// of widths 5, 6, and 7 fold the rows in (`p = row0 + 2*row1 + 4*row2 +
/// 8*row3`). 52 wires, 88 gates; only the eight product bits are outputs.
pub fn build_mul4() -> Multiplier {
    let mut b = CircuitBuilder::new();
    let a_ops: Vec<LineId> = (0..4).map(|i| b.input(format!("a{i}"))).collect();
    let b_ops: Vec<LineId> = (0..4).map(|i| b.input(format!("b{i}"))).collect();
    // pp[j][i] will hold a_i * b_j
    let pp: Vec<Vec<LineId>> = (0..4)
        .map(|j| (0..4).map(|i| b.constant(format!("p{i}{j}"), false)).collect())
        .collect();
    let pads: Vec<LineId> = (0..7).map(|i| b.constant(format!("z{i}"), false)).collect();
    let c1 = b.constant("c1", false);
    let u: Vec<LineId> = (0..5).map(|i| b.constant(format!("u{}", i + 1), false)).collect();
    let c2 = b.constant("c2", false);
    let v: Vec<LineId> = (0..6).map(|i| b.constant(format!("v{}", i + 1), false)).collect();
    let c3 = b.constant("c3", false);
    let w: Vec<LineId> = (0..7).map(|i| b.constant(format!("w{}", i + 1), false)).collect();

    for (j, row) in pp.iter().enumerate() {
        for (i, &line) in row.iter().enumerate() {
            b.mct([Control::pos(a_ops[i]), Control::pos(b_ops[j])], line);
        }
    }

    // t1 = row0 + 2*row1, weights 0..5
    let x1 = [pp[0][0], pp[0][1], pp[0][2], pp[0][3], pads[0]];
    let y1 = [pads[1], pp[1][0], pp[1][1], pp[1][2], pp[1][3]];
    let (s1, carry1) = ripple_chain(&mut b, &x1, &y1, c1, &u);
    let t1: Vec<LineId> = s1.into_iter().chain([carry1]).collect();

    // t2 = t1 + 4*row2, weights 0..6
    let y2 = [pads[2], pads[3], pp[2][0], pp[2][1], pp[2][2], pp[2][3]];
    let (s2, carry2) = ripple_chain(&mut b, &t1, &y2, c2, &v);
    let t2: Vec<LineId> = s2.into_iter().chain([carry2]).collect();

    // product = t2 + 8*row3, weights 0..7
    let y3 = [pads[4], pads[5], pads[6], pp[3][0], pp[3][1], pp[3][2], pp[3][3]];
    let (s3, carry3) = ripple_chain(&mut b, &t2, &y3, c3, &w);
    let product: Vec<LineId> = s3.into_iter().chain([carry3]).collect();

    b.set_outputs(product.iter().copied());
    let circuit = b.build().expect("multiplier netlist is valid");
    Multiplier { circuit, a: a_ops, b: b_ops, product }
}

/// Operations an ALU block can provide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AluOp {
    Add,
    And,
    Xor,
    Or,
}

impl AluOp {
    pub fn name(self) -> &'static str {
        match self {
            AluOp::Add => "add",
            AluOp::And => "and",
            AluOp::Xor => "xor",
            AluOp::Or => "or",
        }
    }
}

impl fmt::Display for AluOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AluOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "add" => Ok(AluOp::Add),
            "and" => Ok(AluOp::And),
            "xor" => Ok(AluOp::Xor),
            "or" => Ok(AluOp::Or),
            other => Err(format!("unknown ALU operation {other:?} (expected add, and, xor, or)")),
        }
    }
}

/// A select-routed ALU with its wire roles.
#[derive(Debug, Clone)]
pub struct Alu {
    pub circuit: Circuit,
    pub ops: Vec<AluOp>,
    /// Select wires, low bit first; the select value indexes `ops`.
    pub select: Vec<LineId>,
    pub a: Vec<LineId>,
    pub b: Vec<LineId>,
    /// Result wires, low bit first.
    pub out: Vec<LineId>,
    /// Present when `ops` contains `Add`; reads 0 for other operations.
    pub carry_out: Option<LineId>,
}

/// Builds a word ALU. Each operation owns private constant-0 operand
/// rails; swap gates controlled on the select code move the operands onto
/// the chosen rails, the blocks compute unconditionally (unselected blocks
/// see zeros), and a second round of controlled swaps moves the chosen
/// result to the shared output wires. Select value `k` runs `ops[k]`.
pub fn build_alu(bits: usize, ops: &[AluOp]) -> Result<Alu, DpeError> {
    if bits == 0 {
        return Err(DpeError::ZeroWidth);
    }
    if ops.is_empty() || ops.len() > 4 {
        return Err(DpeError::BadOpCount(ops.len()));
    }
    for (i, op) in ops.iter().enumerate() {
        if ops[..i].contains(op) {
            return Err(DpeError::DuplicateOp(*op));
        }
    }
    let select_bits = usize::from(ops.len() > 1) + usize::from(ops.len() > 2);

    let mut b = CircuitBuilder::new();
    let select: Vec<LineId> = (0..select_bits).map(|i| b.input(format!("s{i}"))).collect();
    let a: Vec<LineId> = (0..bits).map(|i| b.input(format!("a{i}"))).collect();
    let ob: Vec<LineId> = (0..bits).map(|i| b.input(format!("b{i}"))).collect();

    struct Block {
        rail_a: Vec<LineId>,
        rail_b: Vec<LineId>,
        extra: Vec<LineId>,
    }
    let blocks: Vec<Block> = ops
        .iter()
        .map(|op| {
            let rail_a = (0..bits).map(|i| b.constant(format!("{op}_a{i}"), false)).collect();
            let rail_b = (0..bits).map(|i| b.constant(format!("{op}_b{i}"), false)).collect();
            let extra = match op {
                AluOp::Add => {
                    let mut extra = vec![b.constant(format!("{op}_c"), false)];
                    extra.extend((0..bits).map(|i| b.constant(format!("{op}_g{}", i + 1), false)));
                    extra
                }
                AluOp::And | AluOp::Or => {
                    (0..bits).map(|i| b.constant(format!("{op}_r{i}"), false)).collect()
                }
                AluOp::Xor => Vec::new(),
            };
            Block { rail_a, rail_b, extra }
        })
        .collect();
    let out: Vec<LineId> = (0..bits).map(|i| b.constant(format!("out{i}"), false)).collect();
    let carry_out = ops.contains(&AluOp::Add).then(|| b.constant("cout", false));

    let code = |k: usize| -> Vec<Control> {
        select
            .iter()
            .enumerate()
            .map(|(bit, &line)| {
                if (k >> bit) & 1 == 1 {
                    Control::pos(line)
                } else {
                    Control::neg(line)
                }
            })
            .collect()
    };

    // route the operands onto the selected block's rails
    for (k, block) in blocks.iter().enumerate() {
        for i in 0..bits {
            b.mcf(code(k), a[i], block.rail_a[i]);
            b.mcf(code(k), ob[i], block.rail_b[i]);
        }
    }

    // every block computes on its own rails
    let mut results: Vec<Vec<LineId>> = Vec::with_capacity(ops.len());
    let mut add_carry: Option<LineId> = None;
    for (op, block) in ops.iter().zip(&blocks) {
        match op {
            AluOp::Add => {
                let carry_in = block.extra[0];
                let ancs = &block.extra[1..];
                let (sum, carry) =
                    ripple_chain(&mut b, &block.rail_a, &block.rail_b, carry_in, ancs);
                add_carry = Some(carry);
                results.push(sum);
            }
            AluOp::And => {
                for i in 0..bits {
                    b.mct(
                        [Control::pos(block.rail_a[i]), Control::pos(block.rail_b[i])],
                        block.extra[i],
                    );
                }
                results.push(block.extra.clone());
            }
            AluOp::Xor => {
                for i in 0..bits {
                    b.mct([Control::pos(block.rail_a[i])], block.rail_b[i]);
                }
                results.push(block.rail_b.clone());
            }
            AluOp::Or => {
                // r = ab ^ a ^ b
                for i in 0..bits {
                    b.mct(
                        [Control::pos(block.rail_a[i]), Control::pos(block.rail_b[i])],
                        block.extra[i],
                    );
                    b.mct([Control::pos(block.rail_a[i])], block.extra[i]);
                    b.mct([Control::pos(block.rail_b[i])], block.extra[i]);
                }
                results.push(block.extra.clone());
            }
        }
    }

    // route the selected result to the shared outputs
    for (k, (op, result)) in ops.iter().zip(&results).enumerate() {
        for i in 0..bits {
            b.mcf(code(k), result[i], out[i]);
        }
        if *op == AluOp::Add {
            b.mcf(code(k), add_carry.expect("add block ran"), carry_out.expect("cout exists"));
        }
    }

    let mut outputs: Vec<LineId> = out.clone();
    outputs.extend(carry_out);
    b.set_outputs(outputs);
    let circuit = b.build()?;
    Ok(Alu { circuit, ops: ops.to_vec(), select, a, b: ob, out, carry_out })
}

/// Instruments any element for concurrent checking: circuits containing
/// Toffoli-family gates go through the converting transform (controlled
/// swap idioms collapse, survivors get companions), pure swap circuits
/// just gain the checker rails.
pub fn build_testable(circuit: &Circuit) -> Result<OnlineTestableCircuit, OnlineError> {
    use crate::circuit::Gate;
    if circuit.gates().iter().any(|g| matches!(g, Gate::Mct { .. })) {
        convert_mct_to_mctf_online(circuit)
    } else {
        modify_mcf_online(circuit)
    }
}

/// Writes `value` across `lines`, bit i of the value onto `lines[i]`.
pub fn load_word(state: &mut State, lines: &[LineId], value: u64) {
    for (bit, &line) in lines.iter().enumerate() {
        state.set(line, (value >> bit) & 1 == 1);
    }
}

/// Reads the word spread across `lines`, `lines[i]` as bit i.
pub fn read_word(state: &State, lines: &[LineId]) -> u64 {
    lines
        .iter()
        .enumerate()
        .map(|(bit, &line)| (state.get(line) as u64) << bit)
        .sum()
}
