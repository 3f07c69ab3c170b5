use afia_core::atpg::{generate_pattern, AtpgOutcome};
use afia_core::locking::lock_rll;
use afia_core::sim::{Fault, FaultPolarity};
use afia_core::synth::c432_scale;
use std::collections::BTreeMap;

fn main() {
    let base = c432_scale(7);
    let seed = 11770851429566536723u64 ^ 5; // reconstruct approx; try a few
    for s in [11770851429566536723u64, seed] {
        let d = match lock_rll(&base, 16, s) {
            Ok(d) => d,
            Err(e) => { println!("seed {s}: lock failed {e}"); continue; }
        };
        let c = d.circuit();
        for key in 0..16 {
            for pol in [FaultPolarity::Sa1, FaultPolarity::Sa0] {
                let f = Fault { net: c.key_inputs()[key], polarity: pol };
                let out = generate_pattern(c, f, &BTreeMap::new(), 1_000_000).unwrap();
                let tag = match out { AtpgOutcome::Detected(_) => "D", AtpgOutcome::Undetectable => "U", AtpgOutcome::Aborted{..} => "A" };
                if tag != "D" { println!("seed {s} k{key} {:?} -> {tag}", pol); }
            }
        }
        println!("seed {s} scan done");
    }
}
