//! Lock generators: take a plain combinational circuit and produce a locked
//! circuit plus its ground-truth key, so attacks can be validated end to end.
//!
//! Three schemes are provided:
//!
//! * [`lock_rll`] — random logic locking: k internal nets are cut and
//!   re-driven through XOR (key bit 0) or XNOR (key bit 1) key gates.
//! * [`lock_chain`] — a fully dependent cascade of key gates on a single
//!   output: sensitizing key bit `i` requires fixing every still-unknown bit
//!   after it, the worst case for a sensitization attack.
//! * [`lock_restore`] — a restoration-unit shape: one output is perturbed
//!   when the selected inputs match a protected pattern, and restored when
//!   the key comparator agrees; all key bits sit in one comparator cone.
//!
//! Generators are pure functions of `(circuit, recipe)`: the same seed gives
//! the identical locked design.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{Circuit, CircuitBuilder, GateKind, NetId};
use crate::sim::{pattern_word, simulate_words, SimError, VerifyMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LockScheme {
    Rll,
    Chain,
    Restore,
}

impl LockScheme {
    pub fn name(self) -> &'static str {
        match self {
            LockScheme::Rll => "rll",
            LockScheme::Chain => "chain",
            LockScheme::Restore => "restore",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LockRecipe {
    pub scheme: LockScheme,
    pub key_size: usize,
    pub seed: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LockError {
    #[error("key size must be at least 1")]
    KeySizeZero,
    #[error("circuit has {available} lockable nets, {requested} keys requested")]
    InsufficientNets { available: usize, requested: usize },
    #[error("circuit has {inputs} primary inputs, {requested} keys requested")]
    KeyExceedsInputs { inputs: usize, requested: usize },
    #[error("circuit has no outputs to lock")]
    NoOutputs,
    #[error(transparent)]
    Netlist(#[from] crate::netlist::NetlistError),
}

/// A locked circuit together with the secret that unlocks it.
#[derive(Debug, Clone)]
pub struct LockedDesign {
    circuit: Circuit,
    correct_key: Vec<bool>,
    recipe: Option<LockRecipe>,
}

impl LockedDesign {
    pub fn new(circuit: Circuit, correct_key: Vec<bool>, recipe: LockRecipe) -> LockedDesign {
        assert_eq!(circuit.key_size(), correct_key.len());
        LockedDesign {
            circuit,
            correct_key,
            recipe: Some(recipe),
        }
    }

    /// Wrap an externally locked circuit with a known key (for example one
    /// read from a sidecar key file).
    pub fn from_parts(circuit: Circuit, correct_key: Vec<bool>) -> LockedDesign {
        assert_eq!(circuit.key_size(), correct_key.len());
        LockedDesign {
            circuit,
            correct_key,
            recipe: None,
        }
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn correct_key(&self) -> &[bool] {
        &self.correct_key
    }

    pub fn recipe(&self) -> Option<LockRecipe> {
        self.recipe
    }
}

/// Sidecar key file: one line of `{0,1}`, most significant character first,
/// i.e. the leftmost character is k_{K-1} and the rightmost is k_0.
pub fn write_key_file(key: &[bool]) -> String {
    let mut s: String = key
        .iter()
        .rev()
        .map(|&b| if b { '1' } else { '0' })
        .collect();
    s.push('\n');
    s
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KeyFileError {
    #[error("key file is empty")]
    Empty,
    #[error("bad key character `{0}` (expected 0 or 1)")]
    BadChar(char),
    #[error("key file holds {got} bits, circuit has {expected} key inputs")]
    WrongLength { expected: usize, got: usize },
}

pub fn parse_key_file(text: &str, expected_len: Option<usize>) -> Result<Vec<bool>, KeyFileError> {
    let line = text.lines().next().map(str::trim).unwrap_or("");
    if line.is_empty() {
        return Err(KeyFileError::Empty);
    }
    let mut bits = Vec::with_capacity(line.len());
    for c in line.chars().rev() {
        match c {
            '0' => bits.push(false),
            '1' => bits.push(true),
            other => return Err(KeyFileError::BadChar(other)),
        }
    }
    if let Some(expected) = expected_len {
        if bits.len() != expected {
            return Err(KeyFileError::WrongLength {
                expected,
                got: bits.len(),
            });
        }
    }
    Ok(bits)
}

/// Fresh-name helper bound to one rebuild.
struct Namer {
    used: std::collections::HashSet<String>,
}

impl Namer {
    fn from_circuit(c: &Circuit) -> Namer {
        let used = (0..c.num_nets())
            .map(|i| c.net_name(NetId(i as u32)).to_string())
            .collect();
        Namer { used }
    }

    fn fresh(&mut self, base: &str) -> String {
        let mut name = base.to_string();
        while self.used.contains(&name) {
            name.push('_');
        }
        self.used.insert(name.clone());
        name
    }
}

/// Nets an RLL key gate may cut: gate outputs that reach at least one
/// primary output. Locking dead logic would make the key bit unrecoverable
/// in principle, which contradicts the point of locking.
fn lockable_gate_indices(c: &Circuit) -> Vec<usize> {
    let mut live = vec![false; c.num_nets()];
    let mut stack: Vec<NetId> = c.outputs().to_vec();
    while let Some(n) = stack.pop() {
        if live[n.index()] {
            continue;
        }
        live[n.index()] = true;
        if let Some(g) = c.driver(n) {
            stack.extend(g.fanins.iter().copied());
        }
    }
    c.gates()
        .iter()
        .enumerate()
        .filter(|(_, g)| live[g.output.index()])
        .map(|(i, _)| i)
        .collect()
}

fn key_net_names(namer: &mut Namer, k: usize) -> Vec<String> {
    (0..k).map(|i| namer.fresh(&format!("keyinput_{i}"))).collect()
}

/// Random logic locking: cut `key_size` distinct live gate outputs and
/// re-drive each through an XOR (key bit 0) or XNOR (key bit 1) key gate.
pub fn lock_rll(c: &Circuit, key_size: usize, seed: u64) -> Result<LockedDesign, LockError> {
    if key_size == 0 {
        return Err(LockError::KeySizeZero);
    }
    let candidates = lockable_gate_indices(c);
    if candidates.len() < key_size {
        return Err(LockError::InsufficientNets {
            available: candidates.len(),
            requested: key_size,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = sample(&mut rng, candidates.len(), key_size)
        .into_iter()
        .map(|i| candidates[i])
        .collect();
    picked.sort_unstable();
    let key: Vec<bool> = (0..key_size).map(|_| rng.gen()).collect();

    let mut namer = Namer::from_circuit(c);
    let key_names = key_net_names(&mut namer, key_size);
    // Renamed pre-lock nets, one per cut site.
    let raw_names: Vec<String> = picked
        .iter()
        .map(|&gi| {
            let orig = c.net_name(c.gates()[gi].output);
            namer.fresh(&format!("{orig}$raw"))
        })
        .collect();

    let mut b = CircuitBuilder::new(format!("{}_rll{}", c.name(), key_size));
    for &n in c.inputs() {
        b.input(c.net_name(n));
    }
    for &n in c.key_inputs() {
        b.key_input(c.net_name(n));
    }
    for name in &key_names {
        b.key_input(name.clone());
    }
    for &n in c.outputs() {
        b.output(c.net_name(n));
    }
    for (gi, g) in c.gates().iter().enumerate() {
        let fanins: Vec<String> = g
            .fanins
            .iter()
            .map(|&f| c.net_name(f).to_string())
            .collect();
        match picked.binary_search(&gi) {
            Ok(site) => {
                // Original gate drives the renamed net; the key gate takes
                // over the original name so every consumer reads it.
                b.gate(raw_names[site].clone(), g.kind, fanins);
                let kind = if key[site] {
                    GateKind::Xnor
                } else {
                    GateKind::Xor
                };
                b.gate(
                    c.net_name(g.output),
                    kind,
                    [raw_names[site].clone(), key_names[site].clone()],
                );
            }
            Err(_) => {
                b.gate(c.net_name(g.output), g.kind, fanins);
            }
        }
    }

    let circuit = b.build()?;
    Ok(LockedDesign::new(
        circuit,
        key,
        LockRecipe {
            scheme: LockScheme::Rll,
            key_size,
            seed,
        },
    ))
}

/// Fully dependent chain lock: a cascade of XOR/XNOR key gates between the
/// chosen output's original driver and the output pin. Bit `i`'s effect can
/// only reach the output once every later bit in the cascade holds a known
/// value, so an attack must pin all still-unknown downstream bits.
pub fn lock_chain(c: &Circuit, key_size: usize, seed: u64) -> Result<LockedDesign, LockError> {
    if key_size == 0 {
        return Err(LockError::KeySizeZero);
    }
    if c.outputs().is_empty() {
        return Err(LockError::NoOutputs);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out_index = rng.gen_range(0..c.outputs().len());
    let key: Vec<bool> = (0..key_size).map(|_| rng.gen()).collect();

    let circuit = rebuild_with_lock(c, out_index, "_chain", |stage, namer, source| {
        let key_names = key_net_names(namer, key_size);
        for name in &key_names {
            stage.keys.push(name.clone());
        }
        let mut prev = source.to_string();
        for (i, key_name) in key_names.iter().enumerate() {
            let kind = if key[i] { GateKind::Xnor } else { GateKind::Xor };
            let out = namer.fresh(&format!("lk{i}"));
            stage.gates.push((out.clone(), kind, vec![prev, key_name.clone()]));
            prev = out;
        }
        prev
    })?;

    Ok(LockedDesign::new(
        circuit,
        key,
        LockRecipe {
            scheme: LockScheme::Chain,
            key_size,
            seed,
        },
    ))
}

/// Restoration-unit lock: a comparator of `key_size` selected primary inputs
/// against the key bits XOR-perturbs one output. The perturbation trips when
/// the selected inputs match the protected pattern; the comparator restores
/// it exactly when the programmed key equals that pattern.
pub fn lock_restore(c: &Circuit, key_size: usize, seed: u64) -> Result<LockedDesign, LockError> {
    if key_size == 0 {
        return Err(LockError::KeySizeZero);
    }
    if c.outputs().is_empty() {
        return Err(LockError::NoOutputs);
    }
    if c.inputs().len() < key_size {
        return Err(LockError::KeyExceedsInputs {
            inputs: c.inputs().len(),
            requested: key_size,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out_index = rng.gen_range(0..c.outputs().len());
    let mut picked: Vec<usize> = sample(&mut rng, c.inputs().len(), key_size).into_vec();
    picked.sort_unstable();
    let key: Vec<bool> = (0..key_size).map(|_| rng.gen()).collect();
    let pi_names: Vec<String> = picked
        .iter()
        .map(|&i| c.net_name(c.inputs()[i]).to_string())
        .collect();

    let circuit = rebuild_with_lock(c, out_index, "_restore", |stage, namer, source| {
        let key_names = key_net_names(namer, key_size);
        for name in &key_names {
            stage.keys.push(name.clone());
        }
        // Protected-pattern match: AND over p_i (key bit 1) / NOT p_i (0).
        let mut strip_terms: Vec<String> = Vec::new();
        for (i, pi) in pi_names.iter().enumerate() {
            if key[i] {
                strip_terms.push(pi.clone());
            } else {
                let t = namer.fresh(&format!("rst$n{i}"));
                stage.gates.push((t.clone(), GateKind::Not, vec![pi.clone()]));
                strip_terms.push(t);
            }
        }
        let strip = and_chain(stage, namer, "rst$p", strip_terms);
        // Key comparator: AND over XNOR(p_i, k_i).
        let mut restore_terms: Vec<String> = Vec::new();
        for (i, pi) in pi_names.iter().enumerate() {
            let t = namer.fresh(&format!("rst$c{i}"));
            stage
                .gates
                .push((t.clone(), GateKind::Xnor, vec![pi.clone(), key_names[i].clone()]));
            restore_terms.push(t);
        }
        let restore = and_chain(stage, namer, "rst$r", restore_terms);
        let flip = namer.fresh("rst$flip");
        stage
            .gates
            .push((flip.clone(), GateKind::Xor, vec![strip, restore]));
        let tail = namer.fresh("rst$out");
        stage
            .gates
            .push((tail.clone(), GateKind::Xor, vec![source.to_string(), flip]));
        tail
    })?;

    Ok(LockedDesign::new(
        circuit,
        key,
        LockRecipe {
            scheme: LockScheme::Restore,
            key_size,
            seed,
        },
    ))
}

/// Staged lock logic produced by a scheme callback.
struct LockStage {
    keys: Vec<String>,
    gates: Vec<(String, GateKind, Vec<String>)>,
}

fn and_chain(stage: &mut LockStage, namer: &mut Namer, prefix: &str, terms: Vec<String>) -> String {
    assert!(!terms.is_empty());
    let mut acc = terms[0].clone();
    for (i, t) in terms.into_iter().enumerate().skip(1) {
        let out = namer.fresh(&format!("{prefix}{i}"));
        stage.gates.push((out.clone(), GateKind::And, vec![acc, t]));
        acc = out;
    }
    acc
}

/// Shared rebuild: copy `c`, rename the chosen output's driver (or leave a
/// primary input in place), let the scheme emit its key inputs and gates,
/// and point the output at the lock tail. Gate-driven outputs keep their
/// original net name.
fn rebuild_with_lock<F>(
    c: &Circuit,
    out_index: usize,
    suffix: &str,
    emit: F,
) -> Result<Circuit, LockError>
where
    F: FnOnce(&mut LockStage, &mut Namer, &str) -> String,
{
    let out_net = c.outputs()[out_index];
    let mut namer = Namer::from_circuit(c);
    let driven = c.driver_index(out_net).is_some();
    let orig_name = c.net_name(out_net).to_string();
    let source_name = if driven {
        namer.fresh(&format!("{orig_name}$raw"))
    } else {
        orig_name.clone()
    };

    let mut stage = LockStage {
        keys: Vec::new(),
        gates: Vec::new(),
    };
    let mut tail = emit(&mut stage, &mut namer, &source_name);
    if driven {
        // The lock tail takes over the original output name.
        let last = stage
            .gates
            .iter_mut()
            .rev()
            .find(|(name, _, _)| *name == tail)
            .expect("lock stage must drive its tail");
        last.0 = orig_name.clone();
        for (_, _, fanins) in stage.gates.iter_mut() {
            for f in fanins.iter_mut() {
                if *f == tail {
                    *f = orig_name.clone();
                }
            }
        }
        tail = orig_name.clone();
    }

    let mut b = CircuitBuilder::new(format!("{}{}", c.name(), suffix));
    for &n in c.inputs() {
        b.input(c.net_name(n));
    }
    for &n in c.key_inputs() {
        b.key_input(c.net_name(n));
    }
    for name in &stage.keys {
        b.key_input(name.clone());
    }
    for &n in c.outputs() {
        if n == out_net {
            b.output(tail.clone());
        } else {
            b.output(c.net_name(n));
        }
    }
    for g in c.gates() {
        let out_name = if g.output == out_net {
            source_name.clone()
        } else {
            c.net_name(g.output).to_string()
        };
        let fanins: Vec<String> = g
            .fanins
            .iter()
            .map(|&f| {
                if f == out_net && driven {
                    source_name.clone()
                } else {
                    c.net_name(f).to_string()
                }
            })
            .collect();
        b.gate(out_name, g.kind, fanins);
    }
    for (name, kind, fanins) in stage.gates {
        b.gate(name, kind, fanins);
    }
    Ok(b.build()?)
}

pub fn generate(c: &Circuit, recipe: LockRecipe) -> Result<LockedDesign, LockError> {
    match recipe.scheme {
        LockScheme::Rll => lock_rll(c, recipe.key_size, recipe.seed),
        LockScheme::Chain => lock_chain(c, recipe.key_size, recipe.seed),
        LockScheme::Restore => lock_restore(c, recipe.key_size, recipe.seed),
    }
}

/// Do two keys make the locked circuit behave identically? Exhaustive mode
/// walks the whole input space; sampled mode uses seeded random patterns.
pub fn keys_equivalent(
    c: &Circuit,
    key_a: &[bool],
    key_b: &[bool],
    mode: VerifyMode,
) -> Result<bool, SimError> {
    let broadcast = |key: &[bool]| -> Vec<u64> {
        key.iter().map(|&b| if b { !0u64 } else { 0 }).collect()
    };
    let ka = broadcast(key_a);
    let kb = broadcast(key_b);
    equivalent_under(c, &ka, c, &kb, mode)
}

/// Is the locked circuit under `key` functionally identical to `base`?
/// Input and output orderings must correspond positionally.
pub fn equivalent_to_base(
    base: &Circuit,
    locked: &Circuit,
    key: &[bool],
    mode: VerifyMode,
) -> Result<bool, SimError> {
    let kw: Vec<u64> = key.iter().map(|&b| if b { !0u64 } else { 0 }).collect();
    equivalent_under(base, &[], locked, &kw, mode)
}

fn equivalent_under(
    ca: &Circuit,
    keys_a: &[u64],
    cb: &Circuit,
    keys_b: &[u64],
    mode: VerifyMode,
) -> Result<bool, SimError> {
    let n_pi = ca.inputs().len();
    if cb.inputs().len() != n_pi || ca.outputs().len() != cb.outputs().len() {
        return Ok(false);
    }
    let keys_a = if keys_a.is_empty() {
        vec![0u64; ca.key_inputs().len()]
    } else {
        keys_a.to_vec()
    };

    match mode {
        VerifyMode::Exhaustive => {
            let total: u64 = 1u64 << n_pi.min(63);
            let mut base = 0u64;
            while base < total {
                let lanes = (total - base).min(64);
                let pi: Vec<u64> = (0..n_pi).map(|i| pattern_word(i, base)).collect();
                let oa = simulate_words(ca, &pi, &keys_a)?;
                let ob = simulate_words(cb, &pi, keys_b)?;
                let mask = if lanes == 64 { !0u64 } else { (1u64 << lanes) - 1 };
                for (a, b) in oa.iter().zip(&ob) {
                    if (a ^ b) & mask != 0 {
                        return Ok(false);
                    }
                }
                base += 64;
            }
            Ok(true)
        }
        VerifyMode::Sampled { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let blocks = count.div_ceil(64);
            for _ in 0..blocks {
                let pi: Vec<u64> = (0..n_pi).map(|_| rng.gen()).collect();
                let oa = simulate_words(ca, &pi, &keys_a)?;
                let ob = simulate_words(cb, &pi, keys_b)?;
                if oa.iter().zip(&ob).any(|(a, b)| a != b) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Standard verification mode at the conventional thresholds: exhaustive up
/// to 20 primary inputs, 10^4 random samples beyond.
pub fn default_verify_mode(c: &Circuit, seed: u64) -> VerifyMode {
    if c.inputs().len() <= 20 {
        VerifyMode::Exhaustive
    } else {
        VerifyMode::Sampled { count: 10_000, seed }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_bench;

    fn buffer() -> Circuit {
        parse_bench("INPUT(a)\nOUTPUT(y)\ny = BUF(a)\n").unwrap()
    }

    fn tiny() -> Circuit {
        parse_bench(
            "# circuit: tiny\nINPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\nOUTPUT(z)\n\
             n1 = AND(a, b)\nn2 = OR(b, c)\ny = XOR(n1, n2)\nz = NAND(n1, c)\n",
        )
        .unwrap()
    }

    fn check_equivalence(base: &Circuit, d: &LockedDesign) {
        let ok = equivalent_to_base(
            base,
            d.circuit(),
            d.correct_key(),
            default_verify_mode(base, 1),
        )
        .unwrap();
        assert!(ok, "locked circuit must match base under the correct key");
    }

    #[test]
    fn rll_on_buffer_with_xor_recovers_identity() {
        let c = buffer();
        // Probe seeds until the single key bit comes out 0 (XOR key gate).
        let d = (0..64)
            .map(|s| lock_rll(&c, 1, s).unwrap())
            .find(|d| !d.correct_key()[0])
            .expect("some seed yields an XOR key gate");
        check_equivalence(&c, &d);
        assert_eq!(d.correct_key(), &[false]);
    }

    #[test]
    fn rll_rejects_oversized_keys() {
        let err = lock_rll(&buffer(), 2, 0).unwrap_err();
        assert_eq!(
            err,
            LockError::InsufficientNets {
                available: 1,
                requested: 2
            }
        );
    }

    #[test]
    fn rll_is_deterministic_and_equivalent() {
        let c = tiny();
        let d1 = lock_rll(&c, 3, 42).unwrap();
        let d2 = lock_rll(&c, 3, 42).unwrap();
        assert_eq!(d1.correct_key(), d2.correct_key());
        assert_eq!(
            crate::netlist::write_bench(d1.circuit()),
            crate::netlist::write_bench(d2.circuit())
        );
        check_equivalence(&c, &d1);
    }

    #[test]
    fn chain_and_restore_are_equivalent_under_correct_key() {
        let c = tiny();
        for seed in [0, 1, 7] {
            let d = lock_chain(&c, 6, seed).unwrap();
            assert_eq!(d.circuit().key_size(), 6);
            check_equivalence(&c, &d);

            let d = lock_restore(&c, 3, seed).unwrap();
            assert_eq!(d.circuit().key_size(), 3);
            check_equivalence(&c, &d);
        }
    }

    #[test]
    fn wrong_key_corrupts_some_output() {
        let c = tiny();
        for (scheme, d) in [
            (LockScheme::Rll, lock_rll(&c, 3, 5).unwrap()),
            (LockScheme::Chain, lock_chain(&c, 4, 5).unwrap()),
            (LockScheme::Restore, lock_restore(&c, 3, 5).unwrap()),
        ] {
            let mut wrong = d.correct_key().to_vec();
            wrong[0] = !wrong[0];
            let same = keys_equivalent(d.circuit(), d.correct_key(), &wrong, VerifyMode::Exhaustive)
                .unwrap();
            assert!(!same, "{scheme:?}: flipping a key bit must corrupt something");
        }
    }

    #[test]
    fn restore_requires_enough_inputs() {
        let err = lock_restore(&tiny(), 4, 0).unwrap_err();
        assert_eq!(
            err,
            LockError::KeyExceedsInputs {
                inputs: 3,
                requested: 4
            }
        );
    }

    #[test]
    fn key_file_roundtrip_msb_first() {
        let key = vec![true, false, false, true]; // k0=1 k1=0 k2=0 k3=1
        let text = write_key_file(&key);
        assert_eq!(text, "1001\n");
        assert_eq!(parse_key_file(&text, Some(4)).unwrap(), key);
    }

    #[test]
    fn locked_bench_roundtrips() {
        let c = tiny();
        let d = lock_chain(&c, 8, 3).unwrap();
        let text = crate::netlist::write_bench(d.circuit());
        let re = parse_bench(&text).unwrap();
        assert_eq!(re.key_size(), 8);
        assert_eq!(
            keys_equivalent(&re, d.correct_key(), d.correct_key(), VerifyMode::Exhaustive)
                .unwrap(),
            true
        );
        assert_eq!(crate::netlist::write_bench(&re), text);
    }
}
