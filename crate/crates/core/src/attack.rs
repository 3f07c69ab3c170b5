//! Key-recovery attack drivers.
//!
//! Both attacks query a fault-injectable oracle with constrained stuck-at
//! patterns and decide one key bit per pattern:
//!
//! * [`run_afia`] — cone-guided sensitization. The scheduler repeatedly
//!   picks the cone with the fewest unresolved keys; for each target bit a
//!   pattern is generated with recovered keys (of that cone) as constraints
//!   and unknown keys as free inputs, and faults are injected only at the
//!   free keys the pattern actually pins. A faulty response means the real
//!   bit equals the stuck value.
//! * [`run_dfa`] — the differential baseline: per bit, all other key lines
//!   are constrained to the stuck value, and the pattern is applied to two
//!   chip configurations (one leaving the target register alone, one forcing
//!   it too). Equal responses mean the bit equals the injected value. Each
//!   bit costs 2K-1 injections, for 2K^2-K total.
//!
//! Neither driver can read the oracle's key; recovery is validated post hoc
//! through the oracle's equivalence check.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::atpg::{self, AtpgError, AtpgOutcome, TestPattern};
use crate::cone::{build_assoc_matrix, extract_cones};
use crate::netlist::Circuit;
use crate::sim::{Fault, FaultPolarity, Oracle, SimError, V3, VerifyMode};

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("key bit k{key} is unresolvable: sa1 {sa1:?}, sa0 {sa0:?}")]
    UnresolvableBit {
        key: usize,
        sa1: OutcomeKind,
        sa0: OutcomeKind,
    },
    #[error("netlist has {netlist} key inputs, oracle expects {oracle}")]
    KeySizeMismatch { netlist: usize, oracle: usize },
    #[error("pattern predicts no usable responses at its detect output")]
    InvalidDecisionBasis,
    #[error(transparent)]
    Atpg(#[from] AtpgError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Compact outcome tag for error reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Detected,
    Undetectable,
    Aborted,
}

impl From<&AtpgOutcome> for OutcomeKind {
    fn from(o: &AtpgOutcome) -> OutcomeKind {
        match o {
            AtpgOutcome::Detected(_) => OutcomeKind::Detected,
            AtpgOutcome::Undetectable => OutcomeKind::Undetectable,
            AtpgOutcome::Aborted { .. } => OutcomeKind::Aborted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackMethod {
    Afia,
    Dfa,
}

impl AttackMethod {
    pub fn name(self) -> &'static str {
        match self {
            AttackMethod::Afia => "afia",
            AttackMethod::Dfa => "dfa",
        }
    }
}

/// What a key-bit decision was based on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionBasis {
    /// Sensitization: the chip produced the predicted faulty response, so
    /// the bit equals the stuck value.
    FaultyResponse,
    /// Sensitization: the chip produced the predicted good response.
    GoodResponse,
    /// Differential: both configurations agreed, bit equals injected value.
    DifferentialAgree,
    /// Differential: configurations differed, bit is the complement.
    DifferentialDiffer,
    /// Key sits in no logic cone; reported with an arbitrary value of 0.
    DeadKey,
}

#[derive(Debug, Clone, Serialize)]
pub struct BitOutcome {
    pub key_index: usize,
    /// Index into the run's pattern list; `None` for dead keys.
    pub pattern_id: Option<usize>,
    pub injections: u64,
    pub basis: DecisionBasis,
    pub recovered: bool,
}

#[derive(Debug)]
pub struct AttackResult {
    pub method: AttackMethod,
    pub key_size: usize,
    pub recovered_key: Vec<bool>,
    pub pattern_count: usize,
    pub total_injected_faults: u64,
    pub oracle_queries: u64,
    /// In recovery order; injections sum to `total_injected_faults`.
    pub per_bit: Vec<BitOutcome>,
    pub patterns: Vec<TestPattern>,
    /// Post-hoc equivalence of the recovered key against the oracle.
    pub verified: bool,
    /// Keys that sat in no cone (anomalies in the lock).
    pub dead_keys: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct AttackConfig {
    pub backtrack_limit: u64,
    pub verify: VerifyMode,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            backtrack_limit: atpg::DEFAULT_BACKTRACK_LIMIT,
            verify: VerifyMode::Sampled {
                count: 10_000,
                seed: 0xA71A,
            },
        }
    }
}

/// Sensitization decision rule. `observed` is the chip's response at the
/// detect output; the predictions come from pattern generation. A faulty
/// response means the real key bit equals the stuck-at value; the good
/// response means its complement. Indeterminate or non-differing
/// predictions cannot decide a bit and are rejected.
pub fn decide_key_bit(
    observed: bool,
    expected_good: V3,
    expected_faulty: V3,
    polarity: FaultPolarity,
) -> Result<bool, AttackError> {
    let (good, faulty) = match (expected_good.to_bool(), expected_faulty.to_bool()) {
        (Some(g), Some(f)) if g != f => (g, f),
        _ => return Err(AttackError::InvalidDecisionBasis),
    };
    let _ = good;
    Ok(if observed == faulty {
        polarity.stuck_value()
    } else {
        !polarity.stuck_value()
    })
}

/// X-fill for the tester: don't-care primary inputs are driven low.
fn fill_pi(p: &TestPattern) -> Vec<bool> {
    p.pi_values
        .iter()
        .map(|v| v.to_bool().unwrap_or(false))
        .collect()
}

fn check_alignment(c: &Circuit, oracle: &Oracle) -> Result<(), AttackError> {
    if c.key_size() != oracle.key_size() {
        return Err(AttackError::KeySizeMismatch {
            netlist: c.key_size(),
            oracle: oracle.key_size(),
        });
    }
    Ok(())
}

/// Generate a pattern for `key`, trying sa1 first and falling back to sa0.
fn pattern_for_key(
    c: &Circuit,
    key: usize,
    constraints: &BTreeMap<usize, bool>,
    limit: u64,
) -> Result<TestPattern, AttackError> {
    let fault = |polarity| Fault {
        net: c.key_inputs()[key],
        polarity,
    };
    let sa1 = atpg::generate_pattern(c, fault(FaultPolarity::Sa1), constraints, limit)?;
    if let AtpgOutcome::Detected(p) = sa1 {
        return Ok(p);
    }
    let sa0 = atpg::generate_pattern(c, fault(FaultPolarity::Sa0), constraints, limit)?;
    if let AtpgOutcome::Detected(p) = sa0 {
        return Ok(p);
    }
    Err(AttackError::UnresolvableBit {
        key,
        sa1: (&sa1).into(),
        sa0: (&sa0).into(),
    })
}

/// The cone-guided fault injection attack (one pattern and at most
/// "remaining unknown keys in the cone" injections per bit).
pub fn run_afia(
    c: &Circuit,
    oracle: &mut Oracle,
    config: &AttackConfig,
) -> Result<AttackResult, AttackError> {
    check_alignment(c, oracle)?;
    let key_size = c.key_size();
    let queries_before = oracle.query_count();
    let faults_before = oracle.injected_fault_count();

    let cones = extract_cones(c);
    let mut matrix = build_assoc_matrix(&cones, key_size);

    let mut recovered: BTreeMap<usize, bool> = BTreeMap::new();
    let mut per_bit: Vec<BitOutcome> = Vec::new();
    let mut patterns: Vec<TestPattern> = Vec::new();

    // Keys in no cone cannot influence any output: the lock is malformed
    // there, and either value is functionally correct. Report value 0.
    let dead_keys = matrix.dead_keys();
    for &k in &dead_keys {
        matrix.mark_solved(k);
        recovered.insert(k, false);
        per_bit.push(BitOutcome {
            key_index: k,
            pattern_id: None,
            injections: 0,
            basis: DecisionBasis::DeadKey,
            recovered: false,
        });
    }

    while let Some((cone_idx, unknown)) = matrix.cone_with_min_unknown_keys() {
        let cone = &cones.cones[cone_idx];
        for &target in &unknown {
            // Only recovered keys inside the active cone can gate the
            // target's propagation there; keys outside it are irrelevant.
            let constraints: BTreeMap<usize, bool> = recovered
                .iter()
                .filter(|(&k, _)| cone.keys[k])
                .map(|(&k, &v)| (k, v))
                .collect();
            let pattern = pattern_for_key(c, target, &constraints, config.backtrack_limit)?;

            let injections = pattern.key_values.clone();
            let response = oracle.respond(&fill_pi(&pattern), &injections)?;
            let observed = response[pattern.detect_po];
            let bit = decide_key_bit(
                observed,
                pattern.expected_good[pattern.detect_po],
                pattern.expected_faulty[pattern.detect_po],
                pattern.polarity,
            )?;

            recovered.insert(target, bit);
            matrix.mark_solved(target);
            per_bit.push(BitOutcome {
                key_index: target,
                pattern_id: Some(patterns.len()),
                injections: injections.len() as u64,
                basis: if observed == pattern.expected_faulty[pattern.detect_po].to_bool().unwrap()
                {
                    DecisionBasis::FaultyResponse
                } else {
                    DecisionBasis::GoodResponse
                },
                recovered: bit,
            });
            patterns.push(pattern);
        }
    }

    finish(
        AttackMethod::Afia,
        c,
        oracle,
        config,
        recovered,
        per_bit,
        patterns,
        dead_keys,
        queries_before,
        faults_before,
    )
}

/// The differential baseline: per key bit, compare the response of the chip
/// with all other registers forced against the chip with every register
/// forced.
pub fn run_dfa(
    c: &Circuit,
    oracle: &mut Oracle,
    config: &AttackConfig,
) -> Result<AttackResult, AttackError> {
    check_alignment(c, oracle)?;
    let key_size = c.key_size();
    let queries_before = oracle.query_count();
    let faults_before = oracle.injected_fault_count();

    let mut recovered: BTreeMap<usize, bool> = BTreeMap::new();
    let mut per_bit: Vec<BitOutcome> = Vec::new();
    let mut patterns: Vec<TestPattern> = Vec::new();

    for target in 0..key_size {
        // All other key lines constrained to the stuck value (logic 1 for
        // sa1); fall back to sa0 with logic-0 constraints.
        let pattern = dfa_pattern_for_key(c, target, key_size, config.backtrack_limit)?;
        let stuck = pattern.polarity.stuck_value();

        let pi = fill_pi(&pattern);
        // Fault-free configuration: every register except the target forced.
        let mut inj_a: BTreeMap<usize, bool> =
            (0..key_size).filter(|&j| j != target).map(|j| (j, stuck)).collect();
        let r_a = oracle.respond(&pi, &inj_a)?[pattern.detect_po];
        // Faulty configuration: the target register forced as well.
        inj_a.insert(target, stuck);
        let r_f = oracle.respond(&pi, &inj_a)?[pattern.detect_po];

        let agree = r_a == r_f;
        let bit = if agree { stuck } else { !stuck };
        recovered.insert(target, bit);
        per_bit.push(BitOutcome {
            key_index: target,
            pattern_id: Some(patterns.len()),
            injections: (2 * key_size - 1) as u64,
            basis: if agree {
                DecisionBasis::DifferentialAgree
            } else {
                DecisionBasis::DifferentialDiffer
            },
            recovered: bit,
        });
        patterns.push(pattern);
    }

    finish(
        AttackMethod::Dfa,
        c,
        oracle,
        config,
        recovered,
        per_bit,
        patterns,
        Vec::new(),
        queries_before,
        faults_before,
    )
}

fn dfa_pattern_for_key(
    c: &Circuit,
    target: usize,
    key_size: usize,
    limit: u64,
) -> Result<TestPattern, AttackError> {
    let constraints = |v: bool| -> BTreeMap<usize, bool> {
        (0..key_size).filter(|&j| j != target).map(|j| (j, v)).collect()
    };
    let fault = |polarity| Fault {
        net: c.key_inputs()[target],
        polarity,
    };
    let sa1 = atpg::generate_pattern(c, fault(FaultPolarity::Sa1), &constraints(true), limit)?;
    if let AtpgOutcome::Detected(p) = sa1 {
        return Ok(p);
    }
    let sa0 = atpg::generate_pattern(c, fault(FaultPolarity::Sa0), &constraints(false), limit)?;
    if let AtpgOutcome::Detected(p) = sa0 {
        return Ok(p);
    }
    Err(AttackError::UnresolvableBit {
        key: target,
        sa1: (&sa1).into(),
        sa0: (&sa0).into(),
    })
}

#[allow(clippy::too_many_arguments)]
fn finish(
    method: AttackMethod,
    c: &Circuit,
    oracle: &mut Oracle,
    config: &AttackConfig,
    recovered: BTreeMap<usize, bool>,
    per_bit: Vec<BitOutcome>,
    patterns: Vec<TestPattern>,
    dead_keys: Vec<usize>,
    queries_before: u64,
    faults_before: u64,
) -> Result<AttackResult, AttackError> {
    let key_size = c.key_size();
    debug_assert_eq!(recovered.len(), key_size);
    let recovered_key: Vec<bool> = (0..key_size).map(|i| recovered[&i]).collect();
    let total_injected_faults = oracle.injected_fault_count() - faults_before;
    debug_assert_eq!(
        total_injected_faults,
        per_bit.iter().map(|b| b.injections).sum::<u64>()
    );
    let verified = oracle.verify_candidate(&recovered_key, config.verify)?;
    Ok(AttackResult {
        method,
        key_size,
        recovered_key,
        pattern_count: patterns.len(),
        total_injected_faults,
        oracle_queries: oracle.query_count() - queries_before,
        per_bit,
        patterns,
        verified,
        dead_keys,
    })
}

/// Aggregate accounting for one attack run, including the analytical bounds
/// the totals are expected to respect.
#[derive(Debug, Clone, Serialize)]
pub struct Accounting {
    pub method: AttackMethod,
    pub key_size: usize,
    pub pattern_count: usize,
    pub total_injected_faults: u64,
    pub faults_per_key: f64,
    /// K for sensitization (one pattern per bit), also K for differential.
    pub pattern_bound: usize,
    pub pattern_bound_ok: bool,
    /// K(K-1)/2 for sensitization on fully dependent keys; (2K-1)K for the
    /// differential attack (always exact there).
    pub fault_bound: u64,
    pub fault_bound_ok: bool,
}

pub fn account(result: &AttackResult) -> Accounting {
    let k = result.key_size as u64;
    let fault_bound = match result.method {
        AttackMethod::Afia => k * k.saturating_sub(1) / 2,
        AttackMethod::Dfa => (2 * k).saturating_sub(1) * k,
    };
    Accounting {
        method: result.method,
        key_size: result.key_size,
        pattern_count: result.pattern_count,
        total_injected_faults: result.total_injected_faults,
        faults_per_key: if result.key_size == 0 {
            0.0
        } else {
            result.total_injected_faults as f64 / result.key_size as f64
        },
        pattern_bound: result.key_size,
        pattern_bound_ok: result.pattern_count <= result.key_size,
        fault_bound,
        fault_bound_ok: result.total_injected_faults <= fault_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fig_demo;
    use crate::locking::{lock_chain, lock_rll, LockedDesign};
    use crate::sim::VerifyMode;

    fn exhaustive_config() -> AttackConfig {
        AttackConfig {
            verify: VerifyMode::Exhaustive,
            ..AttackConfig::default()
        }
    }

    #[test]
    fn decide_rule_matches_the_documented_cases() {
        use FaultPolarity::*;
        // sa1, good=0: faulty response (1) means bit 1, good response bit 0.
        assert!(decide_key_bit(true, V3::Zero, V3::One, Sa1).unwrap());
        assert!(!decide_key_bit(false, V3::Zero, V3::One, Sa1).unwrap());
        // sa0, good=1, observed=0 (faulty) -> bit 0.
        assert!(!decide_key_bit(false, V3::One, V3::Zero, Sa0).unwrap());
        assert!(matches!(
            decide_key_bit(true, V3::X, V3::One, Sa1),
            Err(AttackError::InvalidDecisionBasis)
        ));
    }

    #[test]
    fn afia_on_demo_uses_three_patterns_and_one_injection() {
        let c = fig_demo();
        for hidden in 0..8u8 {
            let key: Vec<bool> = (0..3).map(|i| hidden >> i & 1 != 0).collect();
            let mut oracle = Oracle::new(LockedDesign::from_parts(c.clone(), key.clone()));
            let r = run_afia(&c, &mut oracle, &exhaustive_config()).unwrap();
            assert_eq!(r.recovered_key, key, "hidden {hidden:03b}");
            assert!(r.verified);
            assert_eq!(r.pattern_count, 3);
            assert_eq!(r.total_injected_faults, 1);
            // The single injection happens at k1 while solving k0.
            let k0 = r.per_bit.iter().find(|b| b.key_index == 0).unwrap();
            assert_eq!(k0.injections, 1);
        }
    }

    #[test]
    fn dfa_on_demo_recovers_and_costs_2k_minus_1_each() {
        let c = fig_demo();
        for hidden in [0u8, 3, 5, 7] {
            let key: Vec<bool> = (0..3).map(|i| hidden >> i & 1 != 0).collect();
            let mut oracle = Oracle::new(LockedDesign::from_parts(c.clone(), key.clone()));
            let r = run_dfa(&c, &mut oracle, &exhaustive_config()).unwrap();
            assert_eq!(r.recovered_key, key);
            assert!(r.verified);
            assert_eq!(r.total_injected_faults, 3 * (2 * 3 - 1));
        }
    }

    #[test]
    fn chain_lock_costs_the_full_triangle() {
        let base = crate::fixtures::c17();
        let d = lock_chain(&base, 6, 11).unwrap();
        let c = d.circuit().clone();
        let mut oracle = Oracle::new(d);
        let r = run_afia(&c, &mut oracle, &exhaustive_config()).unwrap();
        assert!(r.verified);
        assert_eq!(r.pattern_count, 6);
        assert_eq!(r.total_injected_faults, 6 * 5 / 2);
        let acct = account(&r);
        assert!(acct.fault_bound_ok && acct.pattern_bound_ok);
        assert_eq!(acct.faults_per_key, 2.5);
    }

    #[test]
    fn single_key_chain_needs_no_injection() {
        let base = crate::fixtures::c17();
        let d = lock_chain(&base, 1, 2).unwrap();
        let c = d.circuit().clone();
        let mut oracle = Oracle::new(d);
        let r = run_afia(&c, &mut oracle, &exhaustive_config()).unwrap();
        assert!(r.verified);
        assert_eq!(r.pattern_count, 1);
        assert_eq!(r.total_injected_faults, 0);
    }

    #[test]
    fn rll_keys_in_singleton_cones_cost_nothing() {
        // Two disjoint buffers, one key each: no blocking keys anywhere.
        let base = crate::netlist::parse_bench(
            "INPUT(a)\nINPUT(b)\nOUTPUT(y)\nOUTPUT(z)\ny = BUF(a)\nz = NOT(b)\n",
        )
        .unwrap();
        let d = lock_rll(&base, 2, 4).unwrap();
        let c = d.circuit().clone();
        let mut oracle = Oracle::new(d);
        let r = run_afia(&c, &mut oracle, &exhaustive_config()).unwrap();
        assert!(r.verified);
        assert_eq!(r.total_injected_faults, 0);
    }

    #[test]
    fn dead_key_is_reported_and_defaulted() {
        let locked = crate::netlist::parse_bench(
            "INPUT(a)\nKEYINPUT(k0)\nKEYINPUT(k1)\nOUTPUT(y)\n\
             y = XOR(a, k0)\nd = XOR(a, k1)\n",
        )
        .unwrap();
        let mut oracle = Oracle::new(LockedDesign::from_parts(locked.clone(), vec![true, true]));
        let r = run_afia(&locked, &mut oracle, &exhaustive_config()).unwrap();
        assert_eq!(r.dead_keys, vec![1]);
        assert_eq!(r.recovered_key[0], true);
        assert_eq!(r.recovered_key[1], false);
        // Functionally equivalent despite the dead bit mismatch.
        assert!(r.verified);
    }

    #[test]
    fn afia_and_dfa_agree_on_random_locks() {
        let base = crate::fixtures::c17();
        for seed in 0..6u64 {
            let d = lock_rll(&base, 3, seed).unwrap();
            let c = d.circuit().clone();
            let correct = d.correct_key().to_vec();
            let mut oracle = Oracle::new(d);
            let a = run_afia(&c, &mut oracle, &exhaustive_config()).unwrap();
            let b = run_dfa(&c, &mut oracle, &exhaustive_config()).unwrap();
            assert_eq!(a.recovered_key, b.recovered_key, "seed {seed}");
            assert_eq!(a.recovered_key, correct, "seed {seed}");
            assert!(a.verified && b.verified);
        }
    }
}
