//! Circuit simulation: three-valued good simulation, five-valued stuck-at
//! fault simulation, bit-parallel two-valued simulation, and the
//! fault-injectable oracle standing in for an unlocked chip.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::locking::LockedDesign;
use crate::netlist::{Circuit, Gate, GateKind, NetId};

/// Three-valued logic: 0, 1, or unknown/don't-care.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum V3 {
    Zero,
    One,
    X,
}

impl V3 {
    pub fn from_bool(b: bool) -> V3 {
        if b {
            V3::One
        } else {
            V3::Zero
        }
    }

    pub fn to_bool(self) -> Option<bool> {
        match self {
            V3::Zero => Some(false),
            V3::One => Some(true),
            V3::X => None,
        }
    }

    pub fn is_determinate(self) -> bool {
        self != V3::X
    }

    pub fn symbol(self) -> char {
        match self {
            V3::Zero => '0',
            V3::One => '1',
            V3::X => 'X',
        }
    }

    pub fn from_symbol(c: char) -> Option<V3> {
        match c {
            '0' => Some(V3::Zero),
            '1' => Some(V3::One),
            'X' | 'x' => Some(V3::X),
            _ => None,
        }
    }
}

/// Five-valued composite logic for fault simulation. `D` is good-1/faulty-0,
/// `Dbar` good-0/faulty-1. Mixed states where exactly one component is
/// unknown collapse to `X` (standard conservative absorption), so a reported
/// `D`/`Dbar` always means detection for every completion of the don't-cares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum V5 {
    Zero,
    One,
    X,
    D,
    Dbar,
}

impl V5 {
    pub fn good(self) -> V3 {
        match self {
            V5::Zero => V3::Zero,
            V5::One => V3::One,
            V5::X => V3::X,
            V5::D => V3::One,
            V5::Dbar => V3::Zero,
        }
    }

    pub fn faulty(self) -> V3 {
        match self {
            V5::Zero => V3::Zero,
            V5::One => V3::One,
            V5::X => V3::X,
            V5::D => V3::Zero,
            V5::Dbar => V3::One,
        }
    }

    /// Re-encode a (good, faulty) component pair; any unknown component
    /// absorbs to `X`.
    pub fn combine(good: V3, faulty: V3) -> V5 {
        match (good, faulty) {
            (V3::X, _) | (_, V3::X) => V5::X,
            (V3::Zero, V3::Zero) => V5::Zero,
            (V3::One, V3::One) => V5::One,
            (V3::One, V3::Zero) => V5::D,
            (V3::Zero, V3::One) => V5::Dbar,
        }
    }

    pub fn from_v3(v: V3) -> V5 {
        V5::combine(v, v)
    }

    pub fn is_fault_effect(self) -> bool {
        matches!(self, V5::D | V5::Dbar)
    }

    pub fn is_determinate(self) -> bool {
        self != V5::X
    }
}

/// Stuck-at polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultPolarity {
    #[serde(rename = "sa0")]
    Sa0,
    #[serde(rename = "sa1")]
    Sa1,
}

impl FaultPolarity {
    /// The value the faulty line is stuck at.
    pub fn stuck_value(self) -> bool {
        matches!(self, FaultPolarity::Sa1)
    }

    /// Good-circuit value required to activate the fault.
    pub fn activation_value(self) -> bool {
        !self.stuck_value()
    }

    pub fn name(self) -> &'static str {
        match self {
            FaultPolarity::Sa0 => "sa0",
            FaultPolarity::Sa1 => "sa1",
        }
    }
}

/// A single stuck-at fault on a net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fault {
    pub net: NetId,
    pub polarity: FaultPolarity,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("expected {expected} values for {what}, got {got}")]
    WrongArity {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("fault net {0:?} does not exist in the circuit")]
    UnknownNet(NetId),
    #[error("key injection index {index} out of range for key size {key_size}")]
    InjectionOutOfRange { index: usize, key_size: usize },
}

fn eval3(kind: GateKind, vals: &[V3]) -> V3 {
    use V3::*;
    match kind {
        GateKind::And | GateKind::Nand => {
            let mut acc = One;
            for &v in vals {
                acc = match (acc, v) {
                    (Zero, _) | (_, Zero) => Zero,
                    (One, One) => One,
                    _ => X,
                };
                if acc == Zero {
                    break;
                }
            }
            if kind == GateKind::Nand {
                not3(acc)
            } else {
                acc
            }
        }
        GateKind::Or | GateKind::Nor => {
            let mut acc = Zero;
            for &v in vals {
                acc = match (acc, v) {
                    (One, _) | (_, One) => One,
                    (Zero, Zero) => Zero,
                    _ => X,
                };
                if acc == One {
                    break;
                }
            }
            if kind == GateKind::Nor {
                not3(acc)
            } else {
                acc
            }
        }
        GateKind::Xor | GateKind::Xnor => {
            let mut acc = Zero;
            for &v in vals {
                acc = match (acc, v) {
                    (X, _) | (_, X) => X,
                    (a, b) => {
                        if a == b {
                            Zero
                        } else {
                            One
                        }
                    }
                };
                if acc == X {
                    break;
                }
            }
            if kind == GateKind::Xnor {
                not3(acc)
            } else {
                acc
            }
        }
        GateKind::Not => not3(vals[0]),
        GateKind::Buf => vals[0],
        GateKind::Mux2 => {
            let (s, d0, d1) = (vals[0], vals[1], vals[2]);
            match s {
                Zero => d0,
                One => d1,
                X => {
                    if d0 == d1 && d0 != X {
                        d0
                    } else {
                        X
                    }
                }
            }
        }
    }
}

fn not3(v: V3) -> V3 {
    match v {
        V3::Zero => V3::One,
        V3::One => V3::Zero,
        V3::X => V3::X,
    }
}

/// Evaluate a gate over five-valued inputs: good and faulty components are
/// evaluated separately with the three-valued tables and re-encoded.
pub fn eval5(kind: GateKind, vals: &[V5]) -> V5 {
    let goods: Vec<V3> = vals.iter().map(|v| v.good()).collect();
    let faults: Vec<V3> = vals.iter().map(|v| v.faulty()).collect();
    V5::combine(eval3(kind, &goods), eval3(kind, &faults))
}

fn check_arity(what: &'static str, expected: usize, got: usize) -> Result<(), SimError> {
    if expected != got {
        return Err(SimError::WrongArity {
            what,
            expected,
            got,
        });
    }
    Ok(())
}

/// Three-valued levelized simulation of the good circuit. `pi` and `keys`
/// follow the circuit's input / key-input ordering; `X` entries stay unknown.
/// Returns one value per primary output.
pub fn simulate(c: &Circuit, pi: &[V3], keys: &[V3]) -> Result<Vec<V3>, SimError> {
    let all = net_values(c, pi, keys, None)?;
    Ok(c.outputs().iter().map(|&o| all[o.index()].good()).collect())
}

/// Like [`simulate`], but returns the value of every net.
pub fn simulate_nets(c: &Circuit, pi: &[V3], keys: &[V3]) -> Result<Vec<V3>, SimError> {
    Ok(net_values(c, pi, keys, None)?
        .into_iter()
        .map(|v| v.good())
        .collect())
}

/// Five-valued fault simulation: the circuit is simulated with `fault`
/// active at its net. Returns one composite value per primary output; a `D`
/// or `Dbar` there means the pattern detects the fault for every completion
/// of the `X` positions.
pub fn simulate_faulty(
    c: &Circuit,
    pi: &[V3],
    keys: &[V3],
    fault: Fault,
) -> Result<Vec<V5>, SimError> {
    let all = net_values(c, pi, keys, Some(fault))?;
    Ok(c.outputs().iter().map(|&o| all[o.index()]).collect())
}

/// Five-valued fault simulation returning every net's value.
pub fn simulate_faulty_nets(
    c: &Circuit,
    pi: &[V3],
    keys: &[V3],
    fault: Fault,
) -> Result<Vec<V5>, SimError> {
    net_values(c, pi, keys, Some(fault))
}

fn net_values(
    c: &Circuit,
    pi: &[V3],
    keys: &[V3],
    fault: Option<Fault>,
) -> Result<Vec<V5>, SimError> {
    check_arity("primary inputs", c.inputs().len(), pi.len())?;
    check_arity("key inputs", c.key_inputs().len(), keys.len())?;
    if let Some(f) = fault {
        if f.net.index() >= c.num_nets() {
            return Err(SimError::UnknownNet(f.net));
        }
    }

    let stuck = |net: NetId, good: V3| -> V5 {
        match fault {
            Some(f) if f.net == net => {
                V5::combine(good, V3::from_bool(f.polarity.stuck_value()))
            }
            _ => V5::from_v3(good),
        }
    };

    let mut vals = vec![V5::X; c.num_nets()];
    for (i, &n) in c.inputs().iter().enumerate() {
        vals[n.index()] = stuck(n, pi[i]);
    }
    for (i, &n) in c.key_inputs().iter().enumerate() {
        vals[n.index()] = stuck(n, keys[i]);
    }
    for g in c.topo_gates() {
        let ins: Vec<V5> = g.fanins.iter().map(|f| vals[f.index()]).collect();
        let v = eval5(g.kind, &ins);
        vals[g.output.index()] = match fault {
            Some(f) if f.net == g.output => {
                V5::combine(v.good(), V3::from_bool(f.polarity.stuck_value()))
            }
            _ => v,
        };
    }
    Ok(vals)
}

const LANE_MASKS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// Word carrying bit `bit` of the 64 pattern indices `block_base ..
/// block_base+63`; `block_base` must be 64-aligned. Lets exhaustive sweeps
/// run 64 patterns per simulation pass.
pub fn pattern_word(bit: usize, block_base: u64) -> u64 {
    if bit < 6 {
        LANE_MASKS[bit]
    } else if block_base >> bit & 1 != 0 {
        !0
    } else {
        0
    }
}

/// Bit-parallel two-valued simulation: each net carries 64 independent
/// patterns in one word. Used for equivalence checks and exhaustive oracles.
pub fn simulate_words(c: &Circuit, pi: &[u64], keys: &[u64]) -> Result<Vec<u64>, SimError> {
    check_arity("primary inputs", c.inputs().len(), pi.len())?;
    check_arity("key inputs", c.key_inputs().len(), keys.len())?;
    let mut vals = vec![0u64; c.num_nets()];
    for (i, &n) in c.inputs().iter().enumerate() {
        vals[n.index()] = pi[i];
    }
    for (i, &n) in c.key_inputs().iter().enumerate() {
        vals[n.index()] = keys[i];
    }
    for g in c.topo_gates() {
        vals[g.output.index()] = eval_word(g, &vals);
    }
    Ok(c.outputs().iter().map(|&o| vals[o.index()]).collect())
}

fn eval_word(g: &Gate, vals: &[u64]) -> u64 {
    let v = |i: usize| vals[g.fanins[i].index()];
    match g.kind {
        GateKind::And | GateKind::Nand => {
            let mut acc = !0u64;
            for f in &g.fanins {
                acc &= vals[f.index()];
            }
            if g.kind == GateKind::Nand {
                !acc
            } else {
                acc
            }
        }
        GateKind::Or | GateKind::Nor => {
            let mut acc = 0u64;
            for f in &g.fanins {
                acc |= vals[f.index()];
            }
            if g.kind == GateKind::Nor {
                !acc
            } else {
                acc
            }
        }
        GateKind::Xor | GateKind::Xnor => {
            let mut acc = 0u64;
            for f in &g.fanins {
                acc ^= vals[f.index()];
            }
            if g.kind == GateKind::Xnor {
                !acc
            } else {
                acc
            }
        }
        GateKind::Not => !v(0),
        GateKind::Buf => v(0),
        GateKind::Mux2 => (!v(0) & v(1)) | (v(0) & v(2)),
    }
}

/// Bit-parallel two-valued simulation with one net forced to a constant
/// word. This is the independent arithmetic route used when cross-checking
/// fault detection against the five-valued simulator.
pub fn simulate_words_forced(
    c: &Circuit,
    pi: &[u64],
    keys: &[u64],
    forced: (NetId, u64),
) -> Result<Vec<u64>, SimError> {
    check_arity("primary inputs", c.inputs().len(), pi.len())?;
    check_arity("key inputs", c.key_inputs().len(), keys.len())?;
    let (fnet, fword) = forced;
    if fnet.index() >= c.num_nets() {
        return Err(SimError::UnknownNet(fnet));
    }
    let mut vals = vec![0u64; c.num_nets()];
    for (i, &n) in c.inputs().iter().enumerate() {
        vals[n.index()] = pi[i];
    }
    for (i, &n) in c.key_inputs().iter().enumerate() {
        vals[n.index()] = keys[i];
    }
    if c.is_primary_or_key_input(fnet) {
        vals[fnet.index()] = fword;
    }
    for g in c.topo_gates() {
        let v = eval_word(g, &vals);
        vals[g.output.index()] = if g.output == fnet { fword } else { v };
    }
    Ok(c.outputs().iter().map(|&o| vals[o.index()]).collect())
}

/// The simulated unlocked chip. It holds a locked design whose correct key
/// is hidden: the only way to interact with it is to apply fully specified
/// input patterns, optionally overriding named key registers with injected
/// fault values. Query and injection counters are the attack's cost ledger.
#[derive(Debug)]
pub struct Oracle {
    design: LockedDesign,
    query_count: u64,
    injected_fault_count: u64,
}

/// How thoroughly to compare a candidate key against the hidden one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    /// Enumerate all input patterns (use when |PI| is small).
    Exhaustive,
    /// Compare on `count` seeded random patterns.
    Sampled { count: usize, seed: u64 },
}

impl Oracle {
    pub fn new(design: LockedDesign) -> Oracle {
        Oracle {
            design,
            query_count: 0,
            injected_fault_count: 0,
        }
    }

    pub fn circuit(&self) -> &Circuit {
        self.design.circuit()
    }

    pub fn key_size(&self) -> usize {
        self.design.circuit().key_size()
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    pub fn injected_fault_count(&self) -> u64 {
        self.injected_fault_count
    }

    /// Apply one input pattern. `injections` maps a key index to the value
    /// its register is forced to while the pattern is applied; every entry is
    /// charged as one injected fault. Don't-cares are not accepted: a real
    /// tester drives every pin, so X-fill happens in the attack driver.
    pub fn respond(
        &mut self,
        pi: &[bool],
        injections: &BTreeMap<usize, bool>,
    ) -> Result<Vec<bool>, SimError> {
        let c = self.design.circuit();
        check_arity("primary inputs", c.inputs().len(), pi.len())?;
        let key_size = c.key_size();
        let mut key: Vec<bool> = self.design.correct_key().to_vec();
        for (&idx, &v) in injections {
            if idx >= key_size {
                return Err(SimError::InjectionOutOfRange {
                    index: idx,
                    key_size,
                });
            }
            key[idx] = v;
        }
        self.query_count += 1;
        self.injected_fault_count += injections.len() as u64;

        let pi_words: Vec<u64> = pi.iter().map(|&b| if b { 1 } else { 0 }).collect();
        let key_words: Vec<u64> = key.iter().map(|&b| if b { 1 } else { 0 }).collect();
        let outs = simulate_words(c, &pi_words, &key_words)?;
        Ok(outs.into_iter().map(|w| w & 1 != 0).collect())
    }

    /// Post-hoc check used by verification harnesses: does `candidate`
    /// behave identically to the hidden key? Does not touch the cost
    /// counters and never reveals the key itself.
    pub fn verify_candidate(&self, candidate: &[bool], mode: VerifyMode) -> Result<bool, SimError> {
        let c = self.design.circuit();
        check_arity("key inputs", c.key_size(), candidate.len())?;
        crate::locking::keys_equivalent(c, self.design.correct_key(), candidate, mode)
    }
}
