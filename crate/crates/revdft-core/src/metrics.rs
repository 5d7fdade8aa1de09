//! Cost accounting for circuits: wire count, gate count, quantum cost,
//! constant inputs, and garbage outputs.
//!
//! Quantum cost follows the standard elementary-gate table. For an MCT gate
//! with c controls the cost is 1 when c <= 1 and `2^(c+1) - 3` otherwise
//! (NOT and CNOT cost 1, a Toffoli costs 5, a 3-control MCT costs 13). For
//! an MCF gate the cost is 3 with no controls (three CNOTs), 5 with one
//! control, and otherwise 2 plus the cost of an MCT with one more control,
//! reflecting the CNOT-conjugated realization.

use serde::Serialize;

use crate::circuit::{Circuit, Gate};

/// Quantum cost of a single gate. Control counts beyond 60 would overflow
/// the u64 cost table and are rejected loudly.
pub fn quantum_cost_of_gate(gate: &Gate) -> u64 {
    let c = gate.control_count() as u32;
    assert!(c <= 60, "quantum cost table overflows u64 beyond 60 controls");
    match gate {
        Gate::Mct { .. } => match c {
            0 | 1 => 1,
            _ => (1u64 << (c + 1)) - 3,
        },
        Gate::Mcf { .. } => match c {
            0 => 3,
            1 => 5,
            _ => 2 + ((1u64 << (c + 2)) - 3),
        },
    }
}

/// The five cost figures of one circuit. Serializes with these exact field
/// names so downstream tooling can rely on them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub wires: u64,
    pub gate_cost: u64,
    pub quantum_cost: u64,
    pub constant_inputs: u64,
    pub garbage_outputs: u64,
}

pub fn cost_report(circuit: &Circuit) -> CostReport {
    CostReport {
        wires: circuit.width() as u64,
        gate_cost: circuit.gate_count() as u64,
        quantum_cost: circuit.gates().iter().map(quantum_cost_of_gate).sum(),
        constant_inputs: circuit.constants().len() as u64,
        garbage_outputs: (circuit.width() - circuit.primary_outputs().len()) as u64,
    }
}

/// Change of one metric between two circuits. `percent` is `None` when the
/// reference value is zero and a percentage is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricDelta {
    pub old: u64,
    pub new: u64,
    pub absolute: i64,
    pub percent: Option<f64>,
}

fn metric_delta(old: u64, new: u64) -> MetricDelta {
    let absolute = new as i64 - old as i64;
    let percent = (old > 0).then(|| 100.0 * absolute as f64 / old as f64);
    MetricDelta { old, new, absolute, percent }
}

/// Per-metric comparison of two cost reports, `new` relative to `old`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostDelta {
    pub wires: MetricDelta,
    pub gate_cost: MetricDelta,
    pub quantum_cost: MetricDelta,
    pub constant_inputs: MetricDelta,
    pub garbage_outputs: MetricDelta,
}

pub fn cost_delta(old: &CostReport, new: &CostReport) -> CostDelta {
    CostDelta {
        wires: metric_delta(old.wires, new.wires),
        gate_cost: metric_delta(old.gate_cost, new.gate_cost),
        quantum_cost: metric_delta(old.quantum_cost, new.quantum_cost),
        constant_inputs: metric_delta(old.constant_inputs, new.constant_inputs),
        garbage_outputs: metric_delta(old.garbage_outputs, new.garbage_outputs),
    }
}
