//! Seeded random circuit generation, mainly for property tests and
//! quick experiments. The same spec and seed always produce the same
//! circuit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, CircuitBuilder, Control, LineId};

/// Shape parameters for [`random_circuit`].
#[derive(Debug, Clone)]
pub struct RandomSpec {
    pub width: usize,
    pub gates: usize,
    /// Upper bound on controls per gate; clamped to what the width allows.
    pub max_controls: usize,
    /// Mix swap gates in (width permitting) instead of Toffoli-family only.
    pub allow_mcf: bool,
    pub allow_negative: bool,
    pub seed: u64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            width: 4,
            gates: 8,
            max_controls: 2,
            allow_mcf: false,
            allow_negative: true,
            seed: 0x7e57_ab1e,
        }
    }
}

/// Generates a valid random circuit. Panics only on a zero width.
pub fn random_circuit(spec: &RandomSpec) -> Circuit {
    assert!(spec.width >= 1, "random circuits need at least one wire");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut b = CircuitBuilder::new();
    let lines: Vec<LineId> = (0..spec.width).map(|i| b.input(format!("w{i}"))).collect();

    for _ in 0..spec.gates {
        let use_mcf = spec.allow_mcf && spec.width >= 2 && rng.random();
        let target_count = if use_mcf { 2 } else { 1 };
        let mut pool = lines.clone();
        pool.shuffle(&mut rng);
        let targets = &pool[..target_count];
        let available = spec.width - target_count;
        let controls = rng.random_range(0..=spec.max_controls.min(available));
        let controls: Vec<Control> = pool[target_count..target_count + controls]
            .iter()
            .map(|&line| {
                if spec.allow_negative && rng.random() {
                    Control::neg(line)
                } else {
                    Control::pos(line)
                }
            })
            .collect();
        if use_mcf {
            b.mcf(controls, targets[0], targets[1]);
        } else {
            b.mct(controls, targets[0]);
        }
    }
    b.build().expect("generated gates use distinct wires")
}
