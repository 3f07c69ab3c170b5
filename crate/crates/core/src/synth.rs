//! Seeded random combinational circuits, used as lock subjects in tests and
//! benchmarks. Shapes are tuned so that outputs depend on real logic depth
//! and most gates stay live.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::netlist::{Circuit, CircuitBuilder, GateKind};

#[derive(Debug, Clone, Copy)]
pub struct SynthConfig {
    pub inputs: usize,
    /// Key inputs wired into the random logic like any other input; zero for
    /// a plain unlocked circuit.
    pub key_inputs: usize,
    pub outputs: usize,
    pub gates: usize,
    pub seed: u64,
}

/// Generate a random DAG of gates. Fanins are biased toward recently created
/// nets so the circuit gains depth instead of staying a shallow fan-out of
/// the inputs. Outputs are drawn from the last half of the gate list.
pub fn random_circuit(name: &str, cfg: SynthConfig) -> Circuit {
    assert!(cfg.inputs >= 1, "need at least one input");
    assert!(cfg.gates >= cfg.outputs, "need one gate per output");
    assert!(cfg.outputs >= 1, "need at least one output");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    const KINDS: [GateKind; 10] = [
        GateKind::And,
        GateKind::And,
        GateKind::Nand,
        GateKind::Or,
        GateKind::Or,
        GateKind::Nor,
        GateKind::Xor,
        GateKind::Xnor,
        GateKind::Not,
        GateKind::Mux2,
    ];

    let mut b = CircuitBuilder::new(name);
    let mut pool: Vec<String> = (0..cfg.inputs).map(|i| format!("x{i}")).collect();
    for n in &pool {
        b.input(n.clone());
    }
    for i in 0..cfg.key_inputs {
        let k = format!("k{i}");
        b.key_input(k.clone());
        pool.push(k);
    }

    for gi in 0..cfg.gates {
        let kind = KINDS[rng.gen_range(0..KINDS.len())];
        let arity = match kind {
            GateKind::Not | GateKind::Buf => 1,
            GateKind::Mux2 => 3,
            _ => 2,
        };
        let mut fanins: Vec<String> = Vec::with_capacity(arity);
        for _ in 0..arity {
            // Mostly recent nets, occasionally anything.
            let idx = if rng.gen_bool(0.75) && pool.len() > 24 {
                rng.gen_range(pool.len() - 24..pool.len())
            } else {
                rng.gen_range(0..pool.len())
            };
            let candidate = pool[idx].clone();
            if fanins.contains(&candidate) && pool.len() > arity {
                let retry = rng.gen_range(0..pool.len());
                fanins.push(pool[retry].clone());
            } else {
                fanins.push(candidate);
            }
        }
        let out = format!("g{gi}");
        b.gate(out.clone(), kind, fanins);
        pool.push(out);
    }

    let first_candidate = cfg.inputs + cfg.gates / 2;
    let candidates: Vec<String> = pool[first_candidate.min(pool.len() - cfg.outputs)..].to_vec();
    let picked = rand::seq::index::sample(&mut rng, candidates.len(), cfg.outputs);
    let mut outs: Vec<String> = picked.into_iter().map(|i| candidates[i].clone()).collect();
    outs.sort();
    for o in outs {
        b.output(o);
    }

    b.build().expect("generated circuit is structurally valid")
}

/// A synthetic stand-in at the scale of the c432 benchmark
/// (36 inputs, 7 outputs, 160 gates).
pub fn c432_scale(seed: u64) -> Circuit {
    random_circuit(
        &format!("c432s_{seed}"),
        SynthConfig {
            inputs: 36,
            key_inputs: 0,
            outputs: 7,
            gates: 160,
            seed,
        },
    )
}

/// A synthetic stand-in at the scale of the c880 benchmark
/// (60 inputs, 26 outputs, 383 gates).
pub fn c880_scale(seed: u64) -> Circuit {
    random_circuit(
        &format!("c880s_{seed}"),
        SynthConfig {
            inputs: 60,
            key_inputs: 0,
            outputs: 26,
            gates: 383,
            seed,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::write_bench;

    #[test]
    fn generation_is_deterministic() {
        let a = random_circuit(
            "t",
            SynthConfig {
                inputs: 8,
                key_inputs: 0,
                outputs: 3,
                gates: 40,
                seed: 9,
            },
        );
        let b = random_circuit(
            "t",
            SynthConfig {
                inputs: 8,
                key_inputs: 0,
                outputs: 3,
                gates: 40,
                seed: 9,
            },
        );
        assert_eq!(write_bench(&a), write_bench(&b));
    }

    #[test]
    fn scale_presets_have_the_advertised_interface() {
        let c = c432_scale(1);
        assert_eq!(c.inputs().len(), 36);
        assert_eq!(c.outputs().len(), 7);
        assert_eq!(c.gates().len(), 160);
        let c = c880_scale(1);
        assert_eq!(c.inputs().len(), 60);
        assert_eq!(c.outputs().len(), 26);
        assert_eq!(c.gates().len(), 383);
    }
}
