//! Fault models and faulty simulation.
//!
//! Positions use two coordinate systems. Gates sit at *levels* 1..=g in
//! cascade order. *Segments* are the wire regions between gates: segment k
//! is the region after gate k, so segment 0 precedes the first gate and
//! segment g follows the last.
//!
//! Supported fault kinds:
//!
//! * `BitFlip`: one wire inverts once at one segment.
//! * `StuckAt`: from its segment onward a wire is forced to a fixed bit.
//!   Forcing is persistent: gates read the forced value and any write to
//!   the wire is immediately overridden. A later `StuckAt` on the same wire
//!   takes over from its own segment (last writer wins).
//! * `MissingGate`: the gate at a level is skipped.
//! * `CrosspointAppearance`: a gate gains a control on a wire it does not
//!   touch, with a polarity.
//! * `CrosspointDisappearance`: a gate loses one of its controls.
//! * `Bridging`: at one segment a pair of wires is replaced by their
//!   wired-AND or wired-OR.
//!
//! Within one segment the effects apply as flips, then bridges, then new
//! stuck-at activations, with active forcings re-asserted last.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{Circuit, CircuitError, Control, Gate, LineId, Polarity, State};

/// Wired-function applied by a bridging fault.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BridgeMode {
    WiredAnd,
    WiredOr,
}

/// One injectable fault. Serializes as `{"kind": ..., site fields...}` with
/// stable field names; wires appear as their numeric indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fault {
    BitFlip { line: LineId, segment: usize },
    StuckAt { line: LineId, segment: usize, value: bool },
    MissingGate { level: usize },
    CrosspointAppearance { level: usize, line: LineId, polarity: Polarity },
    CrosspointDisappearance { level: usize, line: LineId },
    Bridging { lines: (LineId, LineId), segment: usize, mode: BridgeMode },
}

impl Fault {
    /// Site identity used for duplicate detection. Two faults of the same
    /// kind with equal keys contradict each other in one fault set.
    fn conflict_key(&self) -> (u8, usize, usize, usize) {
        match *self {
            Fault::BitFlip { line, segment } => (0, line.0, segment, 0),
            Fault::StuckAt { line, segment, .. } => (1, line.0, segment, 0),
            Fault::MissingGate { level } => (2, level, 0, 0),
            Fault::CrosspointAppearance { level, line, .. } => (3, level, line.0, 0),
            Fault::CrosspointDisappearance { level, line } => (4, level, line.0, 0),
            Fault::Bridging { lines, segment, .. } => {
                let (a, b) = (lines.0 .0.min(lines.1 .0), lines.0 .0.max(lines.1 .0));
                (5, a, b, segment)
            }
        }
    }
}

/// The six fault families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultKind {
    BitFlip,
    StuckAt,
    MissingGate,
    CrosspointAppearance,
    CrosspointDisappearance,
    Bridging,
}

impl FaultKind {
    pub fn name(self) -> &'static str {
        match self {
            FaultKind::BitFlip => "bit-flip",
            FaultKind::StuckAt => "stuck-at",
            FaultKind::MissingGate => "missing-gate",
            FaultKind::CrosspointAppearance => "crosspoint-appearance",
            FaultKind::CrosspointDisappearance => "crosspoint-disappearance",
            FaultKind::Bridging => "bridging",
        }
    }
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FaultKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bit-flip" => Ok(FaultKind::BitFlip),
            "stuck-at" => Ok(FaultKind::StuckAt),
            "missing-gate" => Ok(FaultKind::MissingGate),
            "crosspoint-appearance" => Ok(FaultKind::CrosspointAppearance),
            "crosspoint-disappearance" => Ok(FaultKind::CrosspointDisappearance),
            "bridging" => Ok(FaultKind::Bridging),
            other => Err(format!(
                "unknown fault kind {other:?} (expected bit-flip, stuck-at, missing-gate, \
                 crosspoint-appearance, crosspoint-disappearance, or bridging)"
            )),
        }
    }
}

/// Single faults, or sets of up to k simultaneous faults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplicity {
    Single,
    Multiple(usize),
}

/// Which wire pairs a bridging enumeration considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BridgePairs {
    /// Index-adjacent pairs only; keeps the universe linear in width.
    Adjacent,
    /// Every unordered pair.
    All,
}

#[derive(Debug, Clone)]
pub struct EnumerateOptions {
    pub bridge_pairs: BridgePairs,
    /// Largest k that is enumerated exhaustively; beyond it the universe is
    /// sampled with the seed below.
    pub exhaustive_multiple_cap: usize,
    pub sample_count: usize,
    pub seed: u64,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions {
            bridge_pairs: BridgePairs::Adjacent,
            exhaustive_multiple_cap: 3,
            sample_count: 10_000,
            seed: 0x7e57_ab1e,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FaultError {
    #[error("fault references wire {line} but the circuit has {width} wires")]
    LineOutOfRange { line: usize, width: usize },
    #[error("fault references segment {segment} but segments run 0..={max}")]
    SegmentOutOfRange { segment: usize, max: usize },
    #[error("fault references gate level {level} but levels run 1..={max}")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("crosspoint appearance at level {level} uses wire {line}, which that gate already touches")]
    AppearanceOnUsedLine { level: usize, line: usize },
    #[error("crosspoint disappearance at level {level} names wire {line}, which is not a control there")]
    DisappearanceOfMissingControl { level: usize, line: usize },
    #[error("bridging fault names wire {line} twice")]
    BridgeSameLine { line: usize },
    #[error("conflicting duplicate fault sites in one fault set")]
    ConflictingSites,
    #[error("fault kind {0} only supports single-fault enumeration")]
    MultiplicityUnsupported(&'static str),
    #[error("multiple-fault enumeration needs k >= 1")]
    ZeroMultiplicity,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// A complete, duplicate-free collection of fault sets for one kind and
/// multiplicity. Single-fault universes hold singleton sets.
#[derive(Debug, Clone)]
pub struct FaultUniverse {
    kind: FaultKind,
    multiplicity: Multiplicity,
    sets: Vec<Vec<Fault>>,
}

impl FaultUniverse {
    /// Wraps externally built fault sets, for instance the site universe a
    /// testability transform is designed to cover.
    pub fn from_sets(kind: FaultKind, multiplicity: Multiplicity, sets: Vec<Vec<Fault>>) -> Self {
        FaultUniverse { kind, multiplicity, sets }
    }

    pub fn kind(&self) -> FaultKind {
        self.kind
    }

    pub fn multiplicity(&self) -> Multiplicity {
        self.multiplicity
    }

    pub fn sets(&self) -> &[Vec<Fault>] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Enumerates the fault universe with default options.
pub fn enumerate_faults(
    circuit: &Circuit,
    kind: FaultKind,
    multiplicity: Multiplicity,
) -> Result<FaultUniverse, FaultError> {
    enumerate_faults_with(circuit, kind, multiplicity, &EnumerateOptions::default())
}

pub fn enumerate_faults_with(
    circuit: &Circuit,
    kind: FaultKind,
    multiplicity: Multiplicity,
    options: &EnumerateOptions,
) -> Result<FaultUniverse, FaultError> {
    let singles = |faults: Vec<Fault>| {
        faults.into_iter().map(|f| vec![f]).collect::<Vec<_>>()
    };
    let n = circuit.width();
    let g = circuit.gate_count();

    let sets = match (kind, multiplicity) {
        (FaultKind::BitFlip, Multiplicity::Single) => {
            let mut out = Vec::with_capacity(n * (g + 1));
            for line in circuit.lines() {
                for segment in 0..=g {
                    out.push(Fault::BitFlip { line, segment });
                }
            }
            singles(out)
        }
        (FaultKind::StuckAt, Multiplicity::Single) => {
            let mut out = Vec::with_capacity(2 * n * (g + 1));
            for line in circuit.lines() {
                for segment in 0..=g {
                    for value in [false, true] {
                        out.push(Fault::StuckAt { line, segment, value });
                    }
                }
            }
            singles(out)
        }
        (FaultKind::StuckAt, Multiplicity::Multiple(k)) => {
            if k == 0 {
                return Err(FaultError::ZeroMultiplicity);
            }
            let sites: Vec<(LineId, usize)> = circuit
                .lines()
                .flat_map(|line| (0..=g).map(move |segment| (line, segment)))
                .collect();
            if k <= options.exhaustive_multiple_cap {
                enumerate_stuck_sets_exhaustive(&sites, k)
            } else {
                sample_stuck_sets(&sites, k, options)
            }
        }
        (FaultKind::MissingGate, Multiplicity::Single) => {
            singles((1..=g).map(|level| Fault::MissingGate { level }).collect())
        }
        (FaultKind::CrosspointAppearance, Multiplicity::Single) => {
            let mut out = Vec::new();
            for (idx, gate) in circuit.gates().iter().enumerate() {
                let used: BTreeSet<LineId> = gate.connected_lines().collect();
                for line in circuit.lines() {
                    if used.contains(&line) {
                        continue;
                    }
                    for polarity in [Polarity::Positive, Polarity::Negative] {
                        out.push(Fault::CrosspointAppearance { level: idx + 1, line, polarity });
                    }
                }
            }
            singles(out)
        }
        (FaultKind::CrosspointDisappearance, Multiplicity::Single) => {
            let mut out = Vec::new();
            for (idx, gate) in circuit.gates().iter().enumerate() {
                for control in gate.controls() {
                    out.push(Fault::CrosspointDisappearance { level: idx + 1, line: control.line });
                }
            }
            singles(out)
        }
        (FaultKind::Bridging, Multiplicity::Single) => {
            let mut pairs: Vec<(LineId, LineId)> = Vec::new();
            match options.bridge_pairs {
                BridgePairs::Adjacent => {
                    for i in 0..n.saturating_sub(1) {
                        pairs.push((LineId(i), LineId(i + 1)));
                    }
                }
                BridgePairs::All => {
                    for i in 0..n {
                        for j in i + 1..n {
                            pairs.push((LineId(i), LineId(j)));
                        }
                    }
                }
            }
            let mut out = Vec::new();
            for &lines in &pairs {
                for segment in 0..=g {
                    for mode in [BridgeMode::WiredAnd, BridgeMode::WiredOr] {
                        out.push(Fault::Bridging { lines, segment, mode });
                    }
                }
            }
            singles(out)
        }
        (other, Multiplicity::Multiple(_)) => {
            return Err(FaultError::MultiplicityUnsupported(other.name()));
        }
    };
    Ok(FaultUniverse { kind, multiplicity, sets })
}

/// All fault sets of 1..=k stuck-at faults on distinct sites.
fn enumerate_stuck_sets_exhaustive(sites: &[(LineId, usize)], k: usize) -> Vec<Vec<Fault>> {
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();

    fn expand(
        sites: &[(LineId, usize)],
        chosen: &[usize],
        out: &mut Vec<Vec<Fault>>,
    ) {
        // every chosen site independently carries either forced value
        let m = chosen.len();
        for mask in 0..(1u32 << m) {
            let set = chosen
                .iter()
                .enumerate()
                .map(|(j, &site)| {
                    let (line, segment) = sites[site];
                    Fault::StuckAt { line, segment, value: (mask >> j) & 1 == 1 }
                })
                .collect();
            out.push(set);
        }
    }

    fn recurse(
        sites: &[(LineId, usize)],
        start: usize,
        k: usize,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<Fault>>,
    ) {
        if !chosen.is_empty() {
            expand(sites, chosen, out);
        }
        if chosen.len() == k {
            return;
        }
        for site in start..sites.len() {
            chosen.push(site);
            recurse(sites, site + 1, k, chosen, out);
            chosen.pop();
        }
    }

    recurse(sites, 0, k, &mut chosen, &mut out);
    out
}

/// Seeded random stuck-at fault sets for k beyond the exhaustive cap.
fn sample_stuck_sets(
    sites: &[(LineId, usize)],
    k: usize,
    options: &EnumerateOptions,
) -> Vec<Vec<Fault>> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut seen: BTreeSet<Vec<Fault>> = BTreeSet::new();
    let mut indices: Vec<usize> = (0..sites.len()).collect();
    let budget = options.sample_count * 4;
    for _ in 0..budget {
        if seen.len() >= options.sample_count {
            break;
        }
        let size = rng.random_range(1..=k.min(sites.len()));
        indices.shuffle(&mut rng);
        let mut set: Vec<Fault> = indices[..size]
            .iter()
            .map(|&i| {
                let (line, segment) = sites[i];
                Fault::StuckAt { line, segment, value: rng.random() }
            })
            .collect();
        set.sort_unstable();
        seen.insert(set);
    }
    seen.into_iter().collect()
}

/// Faults from one set, indexed by where they act during simulation.
struct InjectionPlan {
    flips: BTreeMap<usize, Vec<LineId>>,
    bridges: BTreeMap<usize, Vec<(LineId, LineId, BridgeMode)>>,
    activations: BTreeMap<usize, Vec<(LineId, bool)>>,
    missing: BTreeSet<usize>,
    appearances: BTreeMap<usize, Vec<Control>>,
    disappearances: BTreeMap<usize, Vec<LineId>>,
}

impl InjectionPlan {
    fn build(circuit: &Circuit, faults: &[Fault]) -> Result<InjectionPlan, FaultError> {
        let n = circuit.width();
        let g = circuit.gate_count();
        let check_line = |line: LineId| {
            if line.0 >= n {
                Err(FaultError::LineOutOfRange { line: line.0, width: n })
            } else {
                Ok(())
            }
        };
        let check_segment = |segment: usize| {
            if segment > g {
                Err(FaultError::SegmentOutOfRange { segment, max: g })
            } else {
                Ok(())
            }
        };
        let check_level = |level: usize| {
            if level == 0 || level > g {
                Err(FaultError::LevelOutOfRange { level, max: g })
            } else {
                Ok(())
            }
        };

        let mut keys = BTreeSet::new();
        let mut plan = InjectionPlan {
            flips: BTreeMap::new(),
            bridges: BTreeMap::new(),
            activations: BTreeMap::new(),
            missing: BTreeSet::new(),
            appearances: BTreeMap::new(),
            disappearances: BTreeMap::new(),
        };

        let mut ordered: Vec<&Fault> = faults.iter().collect();
        ordered.sort_unstable();
        for fault in ordered {
            if !keys.insert(fault.conflict_key()) {
                return Err(FaultError::ConflictingSites);
            }
            match *fault {
                Fault::BitFlip { line, segment } => {
                    check_line(line)?;
                    check_segment(segment)?;
                    plan.flips.entry(segment).or_default().push(line);
                }
                Fault::StuckAt { line, segment, value } => {
                    check_line(line)?;
                    check_segment(segment)?;
                    plan.activations.entry(segment).or_default().push((line, value));
                }
                Fault::MissingGate { level } => {
                    check_level(level)?;
                    plan.missing.insert(level);
                }
                Fault::CrosspointAppearance { level, line, polarity } => {
                    check_level(level)?;
                    check_line(line)?;
                    if circuit.gates()[level - 1].touches(line) {
                        return Err(FaultError::AppearanceOnUsedLine { level, line: line.0 });
                    }
                    plan.appearances.entry(level).or_default().push(Control { line, polarity });
                }
                Fault::CrosspointDisappearance { level, line } => {
                    check_level(level)?;
                    check_line(line)?;
                    let is_control =
                        circuit.gates()[level - 1].controls().iter().any(|c| c.line == line);
                    if !is_control {
                        return Err(FaultError::DisappearanceOfMissingControl {
                            level,
                            line: line.0,
                        });
                    }
                    plan.disappearances.entry(level).or_default().push(line);
                }
                Fault::Bridging { lines, segment, mode } => {
                    check_line(lines.0)?;
                    check_line(lines.1)?;
                    check_segment(segment)?;
                    if lines.0 == lines.1 {
                        return Err(FaultError::BridgeSameLine { line: lines.0 .0 });
                    }
                    plan.bridges.entry(segment).or_default().push((lines.0, lines.1, mode));
                }
            }
        }
        Ok(plan)
    }

    /// Flips, then bridges, then new forcings; active forcings win last.
    fn apply_segment(&self, segment: usize, state: &mut State, forced: &mut BTreeMap<LineId, bool>) {
        if let Some(lines) = self.flips.get(&segment) {
            for &line in lines {
                state.flip(line);
            }
        }
        if let Some(bridges) = self.bridges.get(&segment) {
            for &(a, b, mode) in bridges {
                let (va, vb) = (state.get(a), state.get(b));
                let v = match mode {
                    BridgeMode::WiredAnd => va && vb,
                    BridgeMode::WiredOr => va || vb,
                };
                state.set(a, v);
                state.set(b, v);
            }
        }
        if let Some(activations) = self.activations.get(&segment) {
            for &(line, value) in activations {
                forced.insert(line, value);
            }
        }
        for (&line, &value) in forced.iter() {
            state.set(line, value);
        }
    }

    /// The gate actually simulated at a level: disappearances drop controls,
    /// appearances add them.
    fn effective_gate(&self, level: usize, gate: &Gate) -> Gate {
        let gone = self.disappearances.get(&level);
        let added = self.appearances.get(&level);
        if gone.is_none() && added.is_none() {
            return gate.clone();
        }
        let mut controls: Vec<Control> = gate
            .controls()
            .iter()
            .filter(|c| gone.is_none_or(|lines| !lines.contains(&c.line)))
            .copied()
            .collect();
        if let Some(added) = added {
            controls.extend(added.iter().copied());
        }
        match gate {
            Gate::Mct { target, .. } => Gate::mct(controls, *target),
            Gate::Mcf { targets, .. } => Gate::mcf(controls, targets[0], targets[1]),
        }
    }
}

/// Simulates the circuit on `input` with every fault in `faults` active.
/// An empty`faults` slice reproduces [`Circuit::run`] exactly.
pub fn run_faulty(circuit: &Circuit, input: &State, faults: &[Fault]) -> Result<State, FaultError> {
    if input.width() != circuit.width() {
        return Err(CircuitError::WidthMismatch {
            expected: circuit.width(),
            got: input.width(),
        }
        .into());
    }
    let plan = InjectionPlan::build(circuit, faults)?;
    let mut state = input.clone();
    let mut forced: BTreeMap<LineId, bool> = BTreeMap::new();

    plan.apply_segment(0, &mut state, &mut forced);
    for (idx, gate) in circuit.gates().iter().enumerate() {
        let level = idx + 1;
        if !plan.missing.contains(&level) {
            plan.effective_gate(level, gate).apply_in_place(&mut state);
            for (&line, &value) in forced.iter() {
                state.set(line, value);
            }
        }
        plan.apply_segment(level, &mut state, &mut forced);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitBuilder;

    fn cnot_circuit() -> Circuit {
        let mut b = CircuitBuilder::new();
        let a = b.input("a");
        let t = b.input("b");
        b.mct([Control::pos(a)], t);
        b.build().unwrap()
    }

    fn toffoli_circuit() -> Circuit {
        let mut b = CircuitBuilder::new();
        let a = b.input("a");
        let x = b.input("b");
        let t = b.input("c");
        b.mct([Control::pos(a), Control::pos(x)], t);
        b.build().unwrap()
    }

    #[test]
    fn bit_flip_before_a_gate_propagates_through_it() {
        let c = cnot_circuit();
        let fault = Fault::BitFlip { line: LineId(0), segment: 0 };
        let out = run_faulty(&c, &State::from_index(2, 0b00), &[fault]).unwrap();
        assert_eq!(out.to_index(), 0b11);
    }

    #[test]
    fn bit_flip_after_the_last_gate_only_moves_that_wire() {
        let c = cnot_circuit();
        let fault = Fault::BitFlip { line: LineId(0), segment: 1 };
        let out = run_faulty(&c, &State::from_index(2, 0b00), &[fault]).unwrap();
        assert_eq!(out.to_index(), 0b01);
    }

    #[test]
    fn stuck_at_forces_through_gate_writes() {
        // NOT(a): the write to a is overridden by the active forcing
        let mut b = CircuitBuilder::new();
        let a = b.input("a");
        b.mct([], a);
        let c = b.build().unwrap();
        let fault = Fault::StuckAt { line: LineId(0), segment: 0, value: true };
        let out = run_faulty(&c, &State::from_index(1, 0), &[fault]).unwrap();
        assert_eq!(out.to_index(), 1);

        // blocked gate: the forced value just rides through to the output
        let c = cnot_circuit();
        let fault = Fault::StuckAt { line: LineId(1), segment: 0, value: true };
        let out = run_faulty(&c, &State::from_index(2, 0b00), &[fault]).unwrap();
        assert_eq!(out.to_index(), 0b10);
    }

    #[test]
    fn later_stuck_at_on_the_same_wire_wins() {
        let mut b = CircuitBuilder::new();
        let a = b.input("a");
        let x = b.input("b");
        b.mct([], a);
        b.mct([], x);
        let c = b.build().unwrap();
        let faults = [
            Fault::StuckAt { line: LineId(0), segment: 0, value: true },
            Fault::StuckAt { line: LineId(0), segment: 2, value: false },
        ];
        let out = run_faulty(&c, &State::from_index(2, 0b00), &faults).unwrap();
        assert!(!out.get(LineId(0)));
    }

    #[test]
    fn missing_gate_skips_exactly_that_level() {
        let mut b = CircuitBuilder::new();
        let a = b.input("a");
        b.mct([], a);
        b.mct([], a);
        let c = b.build().unwrap();
        let out =
            run_faulty(&c, &State::from_index(1, 0), &[Fault::MissingGate { level: 1 }]).unwrap();
        assert_eq!(out.to_index(), 1);
    }

    #[test]
    fn appearance_makes_the_gate_more_selective() {
        // CNOT(a -> b) gains a control on c: fires only when c matches
        let mut b = CircuitBuilder::new();
        let a = b.input("a");
        let t = b.input("b");
        b.input("c");
        b.mct([Control::pos(a)], t);
        let c = b.build().unwrap();
        let fault =
            Fault::CrosspointAppearance { level: 1, line: LineId(2), polarity: Polarity::Positive };
        let blocked = run_faulty(&c, &State::from_index(3, 0b001), &[fault]).unwrap();
        assert_eq!(blocked.to_index(), 0b001);
        let firing = run_faulty(&c, &State::from_index(3, 0b101), &[fault]).unwrap();
        assert_eq!(firing.to_index(), 0b111);
    }

    #[test]
    fn disappearance_turns_toffoli_into_cnot() {
        let c = toffoli_circuit();
        let fault = Fault::CrosspointDisappearance { level: 1, line: LineId(0) };
        // with control a removed, b alone drives the target
        let out = run_faulty(&c, &State::from_index(3, 0b010), &[fault]).unwrap();
        assert_eq!(out.to_index(), 0b110);
        let out = run_faulty(&c, &State::from_index(3, 0b000), &[fault]).unwrap();
        assert_eq!(out.to_index(), 0b000);
    }

    #[test]
    fn bridging_applies_the_wired_function_to_both_wires() {
        let c = cnot_circuit();
        let and = Fault::Bridging {
            lines: (LineId(0), LineId(1)),
            segment: 1,
            mode: BridgeMode::WiredAnd,
        };
        let out = run_faulty(&c, &State::from_index(2, 0b01), &[and]).unwrap();
        // after the gate the wires hold (1,1) -> AND leaves (1,1); from (1,0)...
        assert_eq!(out.to_index(), 0b11);
        let or = Fault::Bridging {
            lines: (LineId(0), LineId(1)),
            segment: 0,
            mode: BridgeMode::WiredOr,
        };
        let out = run_faulty(&c, &State::from_index(2, 0b01), &[or]).unwrap();
        // (1,0) at segment 0 becomes (1,1); the CNOT then clears b
        assert_eq!(out.to_index(), 0b01);
        let and0 = Fault::Bridging {
            lines: (LineId(0), LineId(1)),
            segment: 0,
            mode: BridgeMode::WiredAnd,
        };
        let out = run_faulty(&c, &State::from_index(2, 0b01), &[and0]).unwrap();
        // (1,0) wired-AND gives (0,0) and the gate stays blocked
        assert_eq!(out.to_index(), 0b00);
    }

    #[test]
    fn empty_fault_set_matches_plain_run() {
        let c = toffoli_circuit();
        for s in State::all(3) {
            assert_eq!(run_faulty(&c, &s, &[]).unwrap(), c.run(&s).unwrap());
        }
    }

    #[test]
    fn single_universe_sizes_match_the_closed_forms() {
        let mut b = CircuitBuilder::new();
        let a = b.input("a");
        let x = b.input("b");
        let y = b.input("c");
        b.mct([Control::pos(a)], x);
        b.mct([Control::pos(x), Control::neg(y)], a);
        let c = b.build().unwrap();
        let (n, g) = (3usize, 2usize);

        let flips = enumerate_faults(&c, FaultKind::BitFlip, Multiplicity::Single).unwrap();
        assert_eq!(flips.len(), n * (g + 1));
        let stuck = enumerate_faults(&c, FaultKind::StuckAt, Multiplicity::Single).unwrap();
        assert_eq!(stuck.len(), 2 * n * (g + 1));
        let missing = enumerate_faults(&c, FaultKind::MissingGate, Multiplicity::Single).unwrap();
        assert_eq!(missing.len(), g);
        // appearance: gate 1 leaves one unused wire, gate 2 none
        let appear =
            enumerate_faults(&c, FaultKind::CrosspointAppearance, Multiplicity::Single).unwrap();
        assert_eq!(appear.len(), 2);
        let disappear =
            enumerate_faults(&c, FaultKind::CrosspointDisappearance, Multiplicity::Single).unwrap();
        assert_eq!(disappear.len(), 3);
        // adjacent pairs: (a,b), (b,c); 3 segments; 2 modes
        let bridges = enumerate_faults(&c, FaultKind::Bridging, Multiplicity::Single).unwrap();
        assert_eq!(bridges.len(), 2 * 3 * 2);
        let all_pairs = enumerate_faults_with(
            &c,
            FaultKind::Bridging,
            Multiplicity::Single,
            &EnumerateOptions { bridge_pairs: BridgePairs::All, ..Default::default() },
        )
        .unwrap();
        assert_eq!(all_pairs.len(), 3 * 3 * 2);

        // duplicate-free across every kind
        for universe in [flips, stuck, missing, appear, disappear, all_pairs] {
            let unique: BTreeSet<&Vec<Fault>> = universe.sets().iter().collect();
            assert_eq!(unique.len(), universe.len());
        }
    }

    #[test]
    fn multiple_stuck_at_counts_match_a_combinatorial_oracle() {
        let c = cnot_circuit(); // 2 wires, 1 gate -> 4 sites
        let sites = 4u64;
        let choose = |n: u64, k: u64| match k {
            0 => 1,
            1 => n,
            2 => n * (n - 1) / 2,
            3 => n * (n - 1) * (n - 2) / 6,
            _ => unreachable!(),
        };
        for k in 1..=3usize {
            let universe =
                enumerate_faults(&c, FaultKind::StuckAt, Multiplicity::Multiple(k)).unwrap();
            let expected: u64 =
                (1..=k as u64).map(|j| choose(sites, j) * (1u64 << j)).sum();
            assert_eq!(universe.len() as u64, expected, "k = {k}");
            let unique: BTreeSet<&Vec<Fault>> = universe.sets().iter().collect();
            assert_eq!(unique.len(), universe.len());
            // every set stays within k and uses distinct sites
            for set in universe.sets() {
                assert!((1..=k).contains(&set.len()));
                let sites: BTreeSet<(usize, usize)> = set
                    .iter()
                    .map(|f| match f {
                        Fault::StuckAt { line, segment, .. } => (line.0, *segment),
                        _ => panic!("non stuck-at fault in stuck-at universe"),
                    })
                    .collect();
                assert_eq!(sites.len(), set.len());
            }
        }
    }

    #[test]
    fn beyond_the_cap_enumeration_is_seeded_sampling() {
        let c = toffoli_circuit();
        let options = EnumerateOptions { sample_count: 50, ..Default::default() };
        let a = enumerate_faults_with(&c, FaultKind::StuckAt, Multiplicity::Multiple(5), &options)
            .unwrap();
        let b = enumerate_faults_with(&c, FaultKind::StuckAt, Multiplicity::Multiple(5), &options)
            .unwrap();
        assert!(a.len() <= 50);
        assert!(!a.is_empty());
        assert_eq!(a.sets(), b.sets());
        let other = EnumerateOptions { sample_count: 50, seed: 9, ..Default::default() };
        let d = enumerate_faults_with(&c, FaultKind::StuckAt, Multiplicity::Multiple(5), &other)
            .unwrap();
        assert_ne!(a.sets(), d.sets());
    }

    #[test]
    fn invalid_sites_are_rejected_with_the_right_error() {
        let c = toffoli_circuit();
        let cases: Vec<(Fault, &str)> = vec![
            (Fault::BitFlip { line: LineId(9), segment: 0 }, "wire 9"),
            (Fault::BitFlip { line: LineId(0), segment: 5 }, "segment 5"),
            (Fault::MissingGate { level: 0 }, "level 0"),
            (Fault::MissingGate { level: 2 }, "level 2"),
            (
                Fault::CrosspointAppearance {
                    level: 1,
                    line: LineId(0),
                    polarity: Polarity::Positive,
                },
                "already touches",
            ),
            (Fault::CrosspointDisappearance { level: 1, line: LineId(2) }, "not a control"),
            (
                Fault::Bridging {
                    lines: (LineId(1), LineId(1)),
                    segment: 0,
                    mode: BridgeMode::WiredAnd,
                },
                "twice",
            ),
        ];
        for (fault, fragment) in cases {
            let err = run_faulty(&c, &State::zeros(3), &[fault]).unwrap_err();
            assert!(err.to_string().contains(fragment), "{err} missing {fragment}");
        }
    }

    #[test]
    fn duplicate_sites_in_one_set_conflict() {
        let c = cnot_circuit();
        let twice = [
            Fault::BitFlip { line: LineId(0), segment: 0 },
            Fault::BitFlip { line: LineId(0), segment: 0 },
        ];
        assert!(matches!(
            run_faulty(&c, &State::zeros(2), &twice),
            Err(FaultError::ConflictingSites)
        ));
        let contradictory = [
            Fault::StuckAt { line: LineId(0), segment: 0, value: true },
            Fault::StuckAt { line: LineId(0), segment: 0, value: false },
        ];
        assert!(matches!(
            run_faulty(&c, &State::zeros(2), &contradictory),
            Err(FaultError::ConflictingSites)
        ));
        // same wire at different segments is fine
        let staged = [
            Fault::BitFlip { line: LineId(0), segment: 0 },
            Fault::BitFlip { line: LineId(0), segment: 1 },
        ];
        assert!(run_faulty(&c, &State::zeros(2), &staged).is_ok());
    }

    #[test]
    fn multiple_enumeration_is_stuck_at_only() {
        let c = cnot_circuit();
        let err =
            enumerate_faults(&c, FaultKind::BitFlip, Multiplicity::Multiple(2)).unwrap_err();
        assert!(err.to_string().contains("bit-flip"));
    }

    #[test]
    fn descriptors_serialize_with_stable_fields() {
        let fault = Fault::StuckAt { line: LineId(2), segment: 0, value: true };
        assert_eq!(
            serde_json::to_string(&fault).unwrap(),
            r#"{"kind":"stuck_at","line":2,"segment":0,"value":true}"#
        );
        let bridge = Fault::Bridging {
            lines: (LineId(0), LineId(3)),
            segment: 2,
            mode: BridgeMode::WiredOr,
        };
        assert_eq!(
            serde_json::to_string(&bridge).unwrap(),
            r#"{"kind":"bridging","lines":[0,3],"segment":2,"mode":"wired_or"}"#
        );
    }
}
