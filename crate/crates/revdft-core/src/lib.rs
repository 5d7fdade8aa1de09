//! Toolkit for reversible logic circuits built from multiple-controlled
//! Toffoli (MCT) and Fredkin (MCF) gates: netlist I/O, cost metrics, fault
//! simulation, testability transforms, and datapath generators.

pub mod circuit;
pub mod dpe;
pub mod fault;
pub mod metrics;
pub mod offline;
pub mod online;
pub mod pipeline;
pub mod random;
pub mod testset;
pub mod tfc;

pub use circuit::{Circuit, CircuitBuilder, CircuitError, Control, Gate, LineId, Polarity, State};
