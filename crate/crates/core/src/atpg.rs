//! Constrained test pattern generation for stuck-at faults on key lines.
//!
//! The engine is a frontier-based D-algorithm over the five-valued alphabet:
//! activate the fault on the target key line, drive the composite value to a
//! primary output through the D-frontier, and justify every required line
//! value backward to inputs. Unknown key lines are treated as free inputs;
//! already recovered keys enter as constraints. Unassigned positions stay X
//! (don't-care fill), and a returned pattern is X-robust: the five-valued
//! simulation itself confirms detection with every X held unknown.
//!
//! Determinism: decision alternatives are explored in a fixed canonical
//! order — D-frontier gates by ascending gate index, justification entries
//! by ascending gate index, and value choices by ascending cube enumeration
//! (first fanin most significant, 0 before 1). Given the same circuit and
//! arguments the generator always returns the same pattern.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::netlist::{Circuit, GateKind, NetId};
use crate::sim::{eval5, simulate_faulty_nets, Fault, FaultPolarity, SimError, V3, V5};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AtpgError {
    #[error("target net is not a key input")]
    TargetNotKeyLine,
    #[error("target key k{0} is also constrained")]
    TargetConstrained(usize),
    #[error("key index {index} out of range for key size {key_size}")]
    KeyOutOfRange { index: usize, key_size: usize },
    #[error("malformed pattern: {0}")]
    MalformedPattern(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// A constrained stuck-at test pattern for one key line.
///
/// `key_values` holds only the free keys the pattern pins to a concrete
/// value: exactly the blocking keys that need fault injection when the
/// pattern is applied to a real chip. `constraints` echoes the recovered
/// keys the pattern was generated under (no injection needed for those).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestPattern {
    pub pi_values: Vec<V3>,
    pub key_values: BTreeMap<usize, bool>,
    pub constraints: BTreeMap<usize, bool>,
    pub target_key: usize,
    pub polarity: FaultPolarity,
    /// Predicted fault-free response per output (X where unpredicted).
    pub expected_good: Vec<V3>,
    /// Predicted faulty response per output.
    pub expected_faulty: Vec<V3>,
    /// Lowest output index observing the fault effect.
    pub detect_po: usize,
}

impl TestPattern {
    pub fn target_fault(&self, c: &Circuit) -> Fault {
        Fault {
            net: c.key_inputs()[self.target_key],
            polarity: self.polarity,
        }
    }

    /// Number of fault injections this pattern costs when applied.
    pub fn injection_count(&self) -> usize {
        self.key_values.len()
    }

    pub fn pi_string(&self) -> String {
        self.pi_values.iter().map(|v| v.symbol()).collect()
    }

    /// Full key assignment used for five-valued verification: constraints,
    /// pinned free keys, and the fault-activation value on the target line.
    pub fn key_assignment(&self, key_size: usize) -> Vec<V3> {
        let mut keys = vec![V3::X; key_size];
        for (&i, &v) in &self.constraints {
            keys[i] = V3::from_bool(v);
        }
        for (&i, &v) in &self.key_values {
            keys[i] = V3::from_bool(v);
        }
        keys[self.target_key] = V3::from_bool(self.polarity.activation_value());
        keys
    }

    fn check_well_formed(&self, c: &Circuit) -> Result<(), AtpgError> {
        let key_size = c.key_size();
        if self.pi_values.len() != c.inputs().len() {
            return Err(AtpgError::MalformedPattern(format!(
                "pattern has {} pi values, circuit has {} inputs",
                self.pi_values.len(),
                c.inputs().len()
            )));
        }
        if self.target_key >= key_size {
            return Err(AtpgError::KeyOutOfRange {
                index: self.target_key,
                key_size,
            });
        }
        for &i in self.key_values.keys().chain(self.constraints.keys()) {
            if i >= key_size {
                return Err(AtpgError::KeyOutOfRange { index: i, key_size });
            }
        }
        if self.key_values.contains_key(&self.target_key)
            || self.constraints.contains_key(&self.target_key)
        {
            return Err(AtpgError::MalformedPattern(format!(
                "target key k{} must stay free",
                self.target_key
            )));
        }
        if let Some(i) = self.key_values.keys().find(|i| self.constraints.contains_key(i)) {
            return Err(AtpgError::MalformedPattern(format!(
                "key k{i} is both pinned and constrained"
            )));
        }
        if self.detect_po >= c.outputs().len()
            || self.expected_good.len() != c.outputs().len()
            || self.expected_faulty.len() != c.outputs().len()
        {
            return Err(AtpgError::MalformedPattern(
                "detect output out of range".into(),
            ));
        }
        let g = self.expected_good[self.detect_po];
        let f = self.expected_faulty[self.detect_po];
        if !g.is_determinate() || !f.is_determinate() || g == f {
            return Err(AtpgError::MalformedPattern(
                "expected responses at the detect output must be determinate and differ".into(),
            ));
        }
        Ok(())
    }
}

/// Result of a pattern generation call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtpgOutcome {
    Detected(TestPattern),
    /// The search space was exhausted: no pattern detects the fault under
    /// the given constraints. On a key line this signals a malformed lock.
    Undetectable,
    /// The backtrack budget ran out before the search finished.
    Aborted { backtracks: u64 },
}

impl AtpgOutcome {
    pub fn pattern(&self) -> Option<&TestPattern> {
        match self {
            AtpgOutcome::Detected(p) => Some(p),
            _ => None,
        }
    }
}

/// Default backtrack budget.
pub const DEFAULT_BACKTRACK_LIMIT: u64 = 1_000_000;

// ---------------------------------------------------------------------------
// Cube tables
// ---------------------------------------------------------------------------

/// Minimal cubes over a gate's fanins that force output value `v`
/// (`None` = position left free). Cube order is the canonical decision
/// order. Only meaningful when no fanin carries a fault effect.
fn singular_cover(kind: GateKind, arity: usize, v: bool) -> Vec<Vec<Option<bool>>> {
    let all = |b: bool| vec![vec![Some(b); arity]];
    let one_each = |b: bool| -> Vec<Vec<Option<bool>>> {
        (0..arity)
            .map(|i| {
                let mut cube = vec![None; arity];
                cube[i] = Some(b);
                cube
            })
            .collect()
    };
    let parity_cubes = |want_odd: bool| -> Vec<Vec<Option<bool>>> {
        assert!(arity <= 16, "XOR/XNOR justification too wide");
        (0..1u32 << arity)
            .filter(|bits| (bits.count_ones() % 2 == 1) == want_odd)
            .map(|bits| {
                (0..arity)
                    .map(|i| Some(bits >> (arity - 1 - i) & 1 != 0))
                    .collect()
            })
            .collect()
    };
    match kind {
        GateKind::And => {
            if v {
                all(true)
            } else {
                one_each(false)
            }
        }
        GateKind::Nand => {
            if v {
                one_each(false)
            } else {
                all(true)
            }
        }
        GateKind::Or => {
            if v {
                one_each(true)
            } else {
                all(false)
            }
        }
        GateKind::Nor => {
            if v {
                all(false)
            } else {
                one_each(true)
            }
        }
        GateKind::Xor => parity_cubes(v),
        GateKind::Xnor => parity_cubes(!v),
        GateKind::Not => vec![vec![Some(!v)]],
        GateKind::Buf => vec![vec![Some(v)]],
        GateKind::Mux2 => vec![
            vec![Some(false), Some(v), None],
            vec![Some(true), None, Some(v)],
            vec![None, Some(v), Some(v)],
        ],
    }
}

// ---------------------------------------------------------------------------
// Search engine
// ---------------------------------------------------------------------------

struct Aborted;

struct Search<'a> {
    c: &'a Circuit,
    /// Current net values; `X` doubles as "unassigned".
    values: Vec<V5>,
    trail: Vec<u32>,
    backtracks: u64,
    limit: u64,
}

impl<'a> Search<'a> {
    fn new(c: &'a Circuit, limit: u64) -> Search<'a> {
        Search {
            c,
            values: vec![V5::X; c.num_nets()],
            trail: Vec::new(),
            backtracks: 0,
            limit,
        }
    }

    fn assign(&mut self, net: NetId, v: V5) {
        debug_assert_eq!(self.values[net.index()], V5::X);
        self.values[net.index()] = v;
        self.trail.push(net.0);
    }

    fn undo_to(&mut self, mark: usize) {
        for &n in &self.trail[mark..] {
            self.values[n as usize] = V5::X;
        }
        self.trail.truncate(mark);
    }

    fn gate_inputs(&self, gi: usize) -> Vec<V5> {
        self.c.gates()[gi]
            .fanins
            .iter()
            .map(|f| self.values[f.index()])
            .collect()
    }

    /// Propagate implications to a fixpoint. Forward: evaluate gates in topo
    /// order. Backward: a required constant with exactly one way to justify
    /// it forces that option. Returns false on conflict.
    fn imply(&mut self) -> bool {
        loop {
            let mut changed = false;
            for &gi in self.c.topo_order() {
                let gi = gi as usize;
                let g = &self.c.gates()[gi];
                let v = eval5(g.kind, &self.gate_inputs(gi));
                if v == V5::X {
                    continue;
                }
                let cur = self.values[g.output.index()];
                if cur == V5::X {
                    self.assign(g.output, v);
                    changed = true;
                } else if cur != v {
                    return false;
                }
            }
            for gi in 0..self.c.gates().len() {
                let req = match self.pending_requirement(gi) {
                    Some(r) => r,
                    None => continue,
                };
                let options = self.justify_options(gi, req);
                if options.is_empty() {
                    return false;
                }
                if options.len() == 1 {
                    for &(n, b) in &options[0] {
                        let want = V5::from_v3(V3::from_bool(b));
                        match self.values[n as usize] {
                            V5::X => {
                                self.assign(NetId(n), want);
                                changed = true;
                            }
                            v if v == want => {}
                            _ => return false,
                        }
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    /// A gate output holding a required constant that forward evaluation
    /// cannot yet confirm.
    fn pending_requirement(&self, gi: usize) -> Option<bool> {
        let g = &self.c.gates()[gi];
        let req = match self.values[g.output.index()] {
            V5::Zero => false,
            V5::One => true,
            _ => return None,
        };
        if eval5(g.kind, &self.gate_inputs(gi)) != V5::X {
            return None;
        }
        Some(req)
    }

    /// Ways to justify output value `req` on gate `gi`, each as assignments
    /// to currently unassigned fanins, in canonical order. Gates carrying a
    /// fault effect on a fanin are handled by exact enumeration of the free
    /// positions; otherwise the minimal singular-cover cubes apply, which
    /// keeps don't-cares free.
    fn justify_options(&self, gi: usize, req: bool) -> Vec<Vec<(u32, bool)>> {
        let g = &self.c.gates()[gi];
        let ins = self.gate_inputs(gi);
        if ins.iter().any(|v| v.is_fault_effect()) {
            return self.completions(gi, |v| v == V5::from_v3(V3::from_bool(req)));
        }
        let mut options = Vec::new();
        'cube: for cube in singular_cover(g.kind, g.fanins.len(), req) {
            let mut assigns: Vec<(u32, bool)> = Vec::new();
            for (pos, want) in cube.iter().enumerate() {
                let want = match want {
                    Some(b) => *b,
                    None => continue,
                };
                match ins[pos] {
                    V5::X => {
                        // A net can appear on several fanin positions; a
                        // cube demanding different values of it is vacuous.
                        match assigns.iter().find(|(n, _)| *n == g.fanins[pos].0) {
                            Some(&(_, prev)) if prev != want => continue 'cube,
                            Some(_) => {}
                            None => assigns.push((g.fanins[pos].0, want)),
                        }
                    }
                    v if v == V5::from_v3(V3::from_bool(want)) => {}
                    _ => continue 'cube,
                }
            }
            // A fully satisfied cube would have made the forward evaluation
            // determinate, so every compatible cube assigns something.
            options.push(assigns);
        }
        options
    }

    /// All assignments of the gate's unassigned fanins (ascending, first
    /// fanin most significant) whose evaluation satisfies `want`. A net
    /// wired to several fanin positions only admits completions that give
    /// every position the same value.
    fn completions(&self, gi: usize, want: impl Fn(V5) -> bool) -> Vec<Vec<(u32, bool)>> {
        let g = &self.c.gates()[gi];
        let ins = self.gate_inputs(gi);
        let free: Vec<usize> = (0..ins.len()).filter(|&i| ins[i] == V5::X).collect();
        assert!(free.len() <= 20, "gate fan-in too wide for enumeration");
        let mut out = Vec::new();
        'counter: for counter in 0..1u32 << free.len() {
            let mut trial = ins.clone();
            let mut assigns: Vec<(u32, bool)> = Vec::with_capacity(free.len());
            for (j, &pos) in free.iter().enumerate() {
                let bit = counter >> (free.len() - 1 - j) & 1 != 0;
                trial[pos] = V5::from_v3(V3::from_bool(bit));
                match assigns.iter().find(|(n, _)| *n == g.fanins[pos].0) {
                    Some(&(_, prev)) if prev != bit => continue 'counter,
                    Some(_) => {}
                    None => assigns.push((g.fanins[pos].0, bit)),
                }
            }
            if want(eval5(g.kind, &trial)) {
                out.push(assigns);
            }
        }
        out
    }

    fn detected_po(&self) -> Option<usize> {
        self.c
            .outputs()
            .iter()
            .position(|o| self.values[o.index()].is_fault_effect())
    }

    fn pending_gates(&self) -> Vec<usize> {
        (0..self.c.gates().len())
            .filter(|&gi| self.pending_requirement(gi).is_some())
            .collect()
    }

    /// Decision alternatives in canonical order: while no output sees the
    /// fault effect, propagate through the D-frontier; afterwards justify
    /// the lowest pending requirement.
    fn alternatives(&self) -> Vec<Vec<(u32, bool)>> {
        if self.detected_po().is_none() {
            let mut alts = Vec::new();
            for (gi, g) in self.c.gates().iter().enumerate() {
                if self.values[g.output.index()] != V5::X {
                    continue;
                }
                if !g
                    .fanins
                    .iter()
                    .any(|f| self.values[f.index()].is_fault_effect())
                {
                    continue;
                }
                alts.extend(self.completions(gi, |v| v.is_fault_effect()));
            }
            alts
        } else {
            match self.pending_gates().first() {
                Some(&gi) => {
                    let req = self.pending_requirement(gi).expect("pending");
                    self.justify_options(gi, req)
                }
                None => Vec::new(),
            }
        }
    }

    fn solve(&mut self) -> Result<bool, Aborted> {
        if !self.imply() {
            return Ok(false);
        }
        if self.detected_po().is_some() && self.pending_gates().is_empty() {
            return Ok(true);
        }
        let alts = self.alternatives();
        'alt: for alt in alts {
            let mark = self.trail.len();
            for &(n, b) in &alt {
                let net = NetId(n);
                let want = V5::from_v3(V3::from_bool(b));
                match self.values[n as usize] {
                    V5::X => self.assign(net, want),
                    v if v == want => {}
                    _ => {
                        self.undo_to(mark);
                        continue 'alt;
                    }
                }
            }
            match self.solve() {
                Ok(true) => return Ok(true),
                Ok(false) => {
                    self.undo_to(mark);
                    self.backtracks += 1;
                    if self.backtracks > self.limit {
                        return Err(Aborted);
                    }
                }
                Err(a) => return Err(a),
            }
        }
        Ok(false)
    }
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// Generate a pattern detecting the stuck-at fault on a key line while
/// honoring `constraints` (recovered keys pinned to known values). Free keys
/// the search leaves unassigned stay X; the ones it pins are exactly the
/// blocking keys requiring injection, minimized after the fact: dropping any
/// single one of them breaks X-robust detection.
pub fn generate_pattern(
    c: &Circuit,
    target: Fault,
    constraints: &BTreeMap<usize, bool>,
    backtrack_limit: u64,
) -> Result<AtpgOutcome, AtpgError> {
    let key_size = c.key_size();
    let target_key = c.key_index(target.net).ok_or(AtpgError::TargetNotKeyLine)?;
    for &i in constraints.keys() {
        if i >= key_size {
            return Err(AtpgError::KeyOutOfRange { index: i, key_size });
        }
        if i == target_key {
            return Err(AtpgError::TargetConstrained(i));
        }
    }

    let mut search = Search::new(c, backtrack_limit);
    for (&i, &v) in constraints {
        search.assign(c.key_inputs()[i], V5::from_v3(V3::from_bool(v)));
    }
    let activation = match target.polarity {
        FaultPolarity::Sa1 => V5::Dbar,
        FaultPolarity::Sa0 => V5::D,
    };
    search.assign(target.net, activation);

    match search.solve() {
        Err(Aborted) => Ok(AtpgOutcome::Aborted {
            backtracks: search.backtracks,
        }),
        Ok(false) => Ok(AtpgOutcome::Undetectable),
        Ok(true) => {
            let pi_values: Vec<V3> = c
                .inputs()
                .iter()
                .map(|n| search.values[n.index()].good())
                .collect();
            let mut key_values: BTreeMap<usize, bool> = BTreeMap::new();
            for (i, n) in c.key_inputs().iter().enumerate() {
                if i == target_key || constraints.contains_key(&i) {
                    continue;
                }
                if let Some(b) = search.values[n.index()].good().to_bool() {
                    key_values.insert(i, b);
                }
            }

            let mut pattern = TestPattern {
                pi_values,
                key_values,
                constraints: constraints.clone(),
                target_key,
                polarity: target.polarity,
                expected_good: Vec::new(),
                expected_faulty: Vec::new(),
                detect_po: 0,
            };
            minimize_injections(c, &mut pattern, target)?;

            let pos = fault_sim(c, &pattern, target)?
                .expect("search result must detect under final simulation");
            pattern.detect_po = pos.0;
            pattern.expected_good = pos.1.iter().map(|v| v.good()).collect();
            pattern.expected_faulty = pos.1.iter().map(|v| v.faulty()).collect();
            Ok(AtpgOutcome::Detected(pattern))
        }
    }
}

/// Five-valued simulation of a pattern; `Some((detect_po, po_values))` when
/// some output observes the fault effect.
fn fault_sim(
    c: &Circuit,
    p: &TestPattern,
    target: Fault,
) -> Result<Option<(usize, Vec<V5>)>, AtpgError> {
    let keys = p.key_assignment(c.key_size());
    let nets = simulate_faulty_nets(c, &p.pi_values, &keys, target)?;
    let pos: Vec<V5> = c.outputs().iter().map(|o| nets[o.index()]).collect();
    Ok(pos
        .iter()
        .position(|v| v.is_fault_effect())
        .map(|i| (i, pos)))
}

/// Greedily release pinned free keys that detection does not actually need.
/// Removing assignments only ever weakens detection, so a key that survives
/// this pass is individually necessary.
fn minimize_injections(
    c: &Circuit,
    p: &mut TestPattern,
    target: Fault,
) -> Result<(), AtpgError> {
    let pinned: Vec<usize> = p.key_values.keys().copied().collect();
    for i in pinned {
        let saved = p.key_values.remove(&i).expect("pinned");
        if fault_sim(c, p, target)?.is_none() {
            p.key_values.insert(i, saved);
        }
    }
    Ok(())
}

/// Independent soundness check: re-simulate the pattern and confirm the
/// fault effect lands on `detect_po` with the predicted good and faulty
/// responses. Well-formedness problems surface as errors before simulation.
pub fn verify_pattern(c: &Circuit, p: &TestPattern) -> Result<bool, AtpgError> {
    p.check_well_formed(c)?;
    let target = p.target_fault(c);
    let keys = p.key_assignment(c.key_size());
    let nets = simulate_faulty_nets(c, &p.pi_values, &keys, target)?;
    let observed = nets[c.outputs()[p.detect_po].index()];
    Ok(observed.is_fault_effect()
        && observed.good() == p.expected_good[p.detect_po]
        && observed.faulty() == p.expected_faulty[p.detect_po])
}

/// The differential-attack pattern set: for each key bit `i`, a pattern
/// detecting sa1 at `k_i` with every other key line constrained to logic 1.
pub fn dfa_pattern_set(c: &Circuit, backtrack_limit: u64) -> Result<Vec<AtpgOutcome>, AtpgError> {
    let key_size = c.key_size();
    let mut out = Vec::with_capacity(key_size);
    for i in 0..key_size {
        let constraints: BTreeMap<usize, bool> =
            (0..key_size).filter(|&j| j != i).map(|j| (j, true)).collect();
        let target = Fault {
            net: c.key_inputs()[i],
            polarity: FaultPolarity::Sa1,
        };
        out.push(generate_pattern(c, target, &constraints, backtrack_limit)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Pattern file format
// ---------------------------------------------------------------------------

/// One pattern per line:
/// `pi=<01X..> keys=<i:v,..> constr=<i:v,..> fault=k<i>:sa<p> po=<j> good=<v> faulty=<v>`
pub fn pattern_to_line(p: &TestPattern) -> String {
    let map_str = |m: &BTreeMap<usize, bool>| {
        m.iter()
            .map(|(i, &v)| format!("{}:{}", i, v as u8))
            .collect::<Vec<_>>()
            .join(",")
    };
    format!(
        "pi={} keys={} constr={} fault=k{}:{} po={} good={} faulty={}",
        p.pi_string(),
        map_str(&p.key_values),
        map_str(&p.constraints),
        p.target_key,
        p.polarity.name(),
        p.detect_po,
        p.expected_good[p.detect_po].symbol(),
        p.expected_faulty[p.detect_po].symbol(),
    )
}

pub fn pattern_from_line(
    line: &str,
    pi_count: usize,
    po_count: usize,
) -> Result<TestPattern, AtpgError> {
    let bad = |msg: &str| AtpgError::MalformedPattern(format!("{msg} in `{line}`"));
    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    for tok in line.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| bad("expected key=value"))?;
        fields.insert(k, v);
    }
    let get = |k: &str| fields.get(k).copied().ok_or_else(|| bad(&format!("missing `{k}=`")));

    let pi_values: Vec<V3> = get("pi")?
        .chars()
        .map(|c| V3::from_symbol(c).ok_or_else(|| bad("bad pi symbol")))
        .collect::<Result<_, _>>()?;
    if pi_values.len() != pi_count {
        return Err(bad("pi width mismatch"));
    }
    let parse_map = |s: &str| -> Result<BTreeMap<usize, bool>, AtpgError> {
        let mut m = BTreeMap::new();
        if s.is_empty() {
            return Ok(m);
        }
        for item in s.split(',') {
            let (i, v) = item.split_once(':').ok_or_else(|| bad("bad map entry"))?;
            let i: usize = i.parse().map_err(|_| bad("bad key index"))?;
            let v = match v {
                "0" => false,
                "1" => true,
                _ => return Err(bad("bad key value")),
            };
            m.insert(i, v);
        }
        Ok(m)
    };
    let key_values = parse_map(get("keys")?)?;
    let constraints = parse_map(get("constr")?)?;

    let fault = get("fault")?;
    let (key_part, pol_part) = fault.split_once(':').ok_or_else(|| bad("bad fault"))?;
    let target_key: usize = key_part
        .strip_prefix('k')
        .ok_or_else(|| bad("fault must name a key line"))?
        .parse()
        .map_err(|_| bad("bad fault key index"))?;
    let polarity = match pol_part {
        "sa0" => FaultPolarity::Sa0,
        "sa1" => FaultPolarity::Sa1,
        _ => return Err(bad("bad fault polarity")),
    };

    let detect_po: usize = get("po")?.parse().map_err(|_| bad("bad po index"))?;
    if detect_po >= po_count {
        return Err(bad("po index out of range"));
    }
    let sym = |s: &str| -> Result<V3, AtpgError> {
        let mut it = s.chars();
        match (it.next().and_then(V3::from_symbol), it.next()) {
            (Some(v), None) => Ok(v),
            _ => Err(bad("bad response symbol")),
        }
    };
    let mut expected_good = vec![V3::X; po_count];
    let mut expected_faulty = vec![V3::X; po_count];
    expected_good[detect_po] = sym(get("good")?)?;
    expected_faulty[detect_po] = sym(get("faulty")?)?;

    Ok(TestPattern {
        pi_values,
        key_values,
        constraints,
        target_key,
        polarity,
        expected_good,
        expected_faulty,
        detect_po,
    })
}

pub fn write_pattern_file(patterns: &[TestPattern]) -> String {
    let mut s = String::new();
    for p in patterns {
        s.push_str(&pattern_to_line(p));
        s.push('\n');
    }
    s
}

pub fn parse_pattern_file(
    text: &str,
    pi_count: usize,
    po_count: usize,
) -> Result<Vec<TestPattern>, AtpgError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| pattern_from_line(l, pi_count, po_count))
        .collect()
}
