//! Shared independent oracles for the integration suites. Everything here
//! goes through the two-valued word simulator, a separate arithmetic route
//! from the five-valued engine the pattern generator relies on.

use std::collections::BTreeMap;

use afia_core::atpg::TestPattern;
use afia_core::netlist::Circuit;
use afia_core::sim::{pattern_word, simulate_words, FaultPolarity, V3};

fn broadcast(b: bool) -> u64 {
    if b {
        !0
    } else {
        0
    }
}

/// Brute-force detectability for a stuck-at fault on a key line: enumerate
/// every assignment of the primary inputs and unconstrained keys and compare
/// the good circuit (target at its activation value) against the faulty one
/// (target forced to the stuck value).
pub fn exhaustively_detectable(
    c: &Circuit,
    target_key: usize,
    polarity: FaultPolarity,
    constraints: &BTreeMap<usize, bool>,
) -> bool {
    let n_pi = c.inputs().len();
    let free_keys: Vec<usize> = (0..c.key_size())
        .filter(|i| *i != target_key && !constraints.contains_key(i))
        .collect();
    let n_vars = n_pi + free_keys.len();
    assert!(n_vars <= 24, "exhaustive oracle is for small circuits");

    let total = 1u64 << n_vars;
    let mut base = 0u64;
    while base < total {
        let lanes = (total - base).min(64);
        let mask = if lanes == 64 { !0u64 } else { (1u64 << lanes) - 1 };
        let pi: Vec<u64> = (0..n_pi).map(|i| pattern_word(i, base)).collect();
        let mut keys = vec![0u64; c.key_size()];
        for (&k, &v) in constraints {
            keys[k] = broadcast(v);
        }
        for (j, &k) in free_keys.iter().enumerate() {
            keys[k] = pattern_word(n_pi + j, base);
        }
        let mut keys_faulty = keys.clone();
        keys[target_key] = broadcast(polarity.activation_value());
        keys_faulty[target_key] = broadcast(polarity.stuck_value());

        let good = simulate_words(c, &pi, &keys).unwrap();
        let faulty = simulate_words(c, &pi, &keys_faulty).unwrap();
        if good.iter().zip(&faulty).any(|(a, b)| (a ^ b) & mask != 0) {
            return true;
        }
        base += 64;
    }
    false
}

/// Cross-check a pattern's X-robustness on the word route: for completions
/// of every X position (exhaustive up to 2^16, seeded random blocks beyond),
/// the responses at the detect output must equal the predictions. Returns
/// false on any mismatch.
pub fn detects_on_all_completions(c: &Circuit, p: &TestPattern) -> bool {
    let key_assignment = p.key_assignment(c.key_size());
    let n_pi = c.inputs().len();
    let x_pis: Vec<usize> = (0..n_pi).filter(|&i| p.pi_values[i] == V3::X).collect();
    let x_keys: Vec<usize> = (0..c.key_size())
        .filter(|&i| key_assignment[i] == V3::X)
        .collect();
    let n_vars = x_pis.len() + x_keys.len();

    let expected_good = p.expected_good[p.detect_po].to_bool().unwrap();
    let expected_faulty = p.expected_faulty[p.detect_po].to_bool().unwrap();
    let target = p.target_key;

    let check_block = |var_words: &dyn Fn(usize) -> u64, mask: u64| -> bool {
        let mut pi = vec![0u64; n_pi];
        for (i, v) in p.pi_values.iter().enumerate() {
            if let Some(b) = v.to_bool() {
                pi[i] = broadcast(b);
            }
        }
        for (j, &i) in x_pis.iter().enumerate() {
            pi[i] = var_words(j);
        }
        let mut keys = vec![0u64; c.key_size()];
        for (i, v) in key_assignment.iter().enumerate() {
            if let Some(b) = v.to_bool() {
                keys[i] = broadcast(b);
            }
        }
        for (j, &i) in x_keys.iter().enumerate() {
            keys[i] = var_words(x_pis.len() + j);
        }
        let mut keys_faulty = keys.clone();
        keys_faulty[target] = broadcast(p.polarity.stuck_value());

        let good = simulate_words(c, &pi, &keys).unwrap();
        let faulty = simulate_words(c, &pi, &keys_faulty).unwrap();
        let g = good[p.detect_po];
        let f = faulty[p.detect_po];
        (g ^ broadcast(expected_good)) & mask == 0 && (f ^ broadcast(expected_faulty)) & mask == 0
    };

    if n_vars <= 16 {
        let total = 1u64 << n_vars;
        let mut base = 0u64;
        while base < total {
            let lanes = (total - base).min(64);
            let mask = if lanes == 64 { !0u64 } else { (1u64 << lanes) - 1 };
            let words: Vec<u64> = (0..n_vars).map(|v| pattern_word(v, base)).collect();
            if !check_block(&|v| words[v], mask) {
                return false;
            }
            base += 64;
        }
        true
    } else {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xC0FFEE);
        for _ in 0..64 {
            let words: Vec<u64> = (0..n_vars).map(|_| rng.gen()).collect();
            if !check_block(&|v| words[v], !0) {
                return false;
            }
        }
        true
    }
}
