//! Output logic cones and the key/cone association matrix.
//!
//! A cone `LC_j` is everything that can influence output `y_j`: the gates,
//! primary inputs and key inputs with a directed path to it. The association
//! matrix records which key bits sit in which cones; the attack repeatedly
//! picks the cone with the fewest unresolved keys, because only keys inside
//! the active cone can block the target bit's propagation there.

use serde::Serialize;

use crate::netlist::{Circuit, NetId};

/// One output's transitive fanin, computed over reversed edges.
#[derive(Debug, Clone)]
pub struct Cone {
    pub output: NetId,
    /// Gate indices in the cone, ascending.
    pub gates: Vec<usize>,
    /// Primary-input positions in the cone, ascending.
    pub inputs: Vec<usize>,
    /// key position -> membership, length = key size.
    pub keys: Vec<bool>,
}

impl Cone {
    pub fn key_indices(&self) -> Vec<usize> {
        self.keys
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn key_count(&self) -> usize {
        self.keys.iter().filter(|&&m| m).count()
    }
}

/// All cones of a circuit, one per primary output, in output order.
#[derive(Debug, Clone)]
pub struct ConeSet {
    pub cones: Vec<Cone>,
}

/// Breadth-first search from each output over reversed edges.
pub fn extract_cones(c: &Circuit) -> ConeSet {
    let cones = c
        .outputs()
        .iter()
        .map(|&out| {
            let mut seen = vec![false; c.num_nets()];
            let mut queue = std::collections::VecDeque::new();
            seen[out.index()] = true;
            queue.push_back(out);
            while let Some(n) = queue.pop_front() {
                if let Some(g) = c.driver(n) {
                    for &f in &g.fanins {
                        if !seen[f.index()] {
                            seen[f.index()] = true;
                            queue.push_back(f);
                        }
                    }
                }
            }
            let gates = c
                .gates()
                .iter()
                .enumerate()
                .filter(|(_, g)| seen[g.output.index()])
                .map(|(i, _)| i)
                .collect();
            let inputs = c
                .inputs()
                .iter()
                .enumerate()
                .filter(|(_, n)| seen[n.index()])
                .map(|(i, _)| i)
                .collect();
            let keys = c
                .key_inputs()
                .iter()
                .map(|n| seen[n.index()])
                .collect();
            Cone {
                output: out,
                gates,
                inputs,
                keys,
            }
        })
        .collect();
    ConeSet { cones }
}

/// The K-by-N boolean association matrix: `a[i][j]` is true iff key `i` lies
/// in cone `j`. Recovering a key clears its row, so the matrix empties out
/// as the attack proceeds.
#[derive(Debug, Clone, Serialize)]
pub struct AssocMatrix {
    pub a: Vec<Vec<bool>>,
    pub solved: Vec<bool>,
}

pub fn build_assoc_matrix(cones: &ConeSet, key_size: usize) -> AssocMatrix {
    let n = cones.cones.len();
    let mut a = vec![vec![false; n]; key_size];
    for (j, cone) in cones.cones.iter().enumerate() {
        for (i, &m) in cone.keys.iter().enumerate() {
            if m {
                a[i][j] = true;
            }
        }
    }
    AssocMatrix {
        a,
        solved: vec![false; key_size],
    }
}

impl AssocMatrix {
    pub fn key_size(&self) -> usize {
        self.a.len()
    }

    pub fn cone_count(&self) -> usize {
        self.a.first().map(|r| r.len()).unwrap_or(0)
    }

    /// Mark key `i` recovered: record it solved and zero its row.
    pub fn mark_solved(&mut self, i: usize) {
        self.solved[i] = true;
        for cell in &mut self.a[i] {
            *cell = false;
        }
    }

    pub fn unknown_keys_in_cone(&self, j: usize) -> Vec<usize> {
        (0..self.key_size())
            .filter(|&i| self.a[i][j] && !self.solved[i])
            .collect()
    }

    /// The cone with the smallest positive number of unresolved keys, with
    /// its unresolved key indices (ascending). Ties break toward the lowest
    /// output index. `None` once no cone holds an unresolved key.
    pub fn cone_with_min_unknown_keys(&self) -> Option<(usize, Vec<usize>)> {
        let mut best: Option<(usize, Vec<usize>)> = None;
        for j in 0..self.cone_count() {
            let unknown = self.unknown_keys_in_cone(j);
            if unknown.is_empty() {
                continue;
            }
            match &best {
                Some((_, bu)) if bu.len() <= unknown.len() => {}
                _ => best = Some((j, unknown)),
            }
        }
        best
    }

    /// Keys that sit in no cone at all. A sound lock has none; they are
    /// surfaced so malformed inputs fail loudly instead of hanging the loop.
    pub fn dead_keys(&self) -> Vec<usize> {
        (0..self.key_size())
            .filter(|&i| !self.solved[i] && self.a[i].iter().all(|&m| !m))
            .collect()
    }
}

/// Per-cone statistics for reports.
#[derive(Debug, Clone, Serialize)]
pub struct ConeStats {
    pub output: String,
    pub gate_count: usize,
    pub input_count: usize,
    pub key_count: usize,
    pub key_indices: Vec<usize>,
}

pub fn cone_stats(c: &Circuit, cones: &ConeSet) -> Vec<ConeStats> {
    cones
        .cones
        .iter()
        .map(|cone| ConeStats {
            output: c.net_name(cone.output).to_string(),
            gate_count: cone.gates.len(),
            input_count: cone.inputs.len(),
            key_count: cone.key_count(),
            key_indices: cone.key_indices(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_bench;

    #[test]
    fn buffer_cone_contains_its_input() {
        let c = parse_bench("INPUT(a)\nOUTPUT(y)\ny = BUF(a)\n").unwrap();
        let cs = extract_cones(&c);
        assert_eq!(cs.cones.len(), 1);
        assert_eq!(cs.cones[0].inputs, vec![0]);
        assert_eq!(cs.cones[0].gates, vec![0]);
    }

    #[test]
    fn disjoint_circuits_have_disjoint_cones() {
        let c = parse_bench(
            "INPUT(a)\nINPUT(b)\nOUTPUT(y)\nOUTPUT(z)\ny = BUF(a)\nz = BUF(b)\n",
        )
        .unwrap();
        let cs = extract_cones(&c);
        assert_eq!(cs.cones[0].inputs, vec![0]);
        assert_eq!(cs.cones[1].inputs, vec![1]);
        assert_eq!(cs.cones[0].gates, vec![0]);
        assert_eq!(cs.cones[1].gates, vec![1]);
    }

    #[test]
    fn shared_key_appears_in_both_rows() {
        let c = parse_bench(
            "INPUT(a)\nKEYINPUT(k)\nOUTPUT(y)\nOUTPUT(z)\n\
             n = XOR(a, k)\ny = BUF(n)\nz = NOT(n)\n",
        )
        .unwrap();
        let m = build_assoc_matrix(&extract_cones(&c), c.key_size());
        assert_eq!(m.a, vec![vec![true, true]]);
    }

    #[test]
    fn min_unknown_selection_and_row_clearing() {
        // k0 in both cones, k1 only in cone 1.
        let c = parse_bench(
            "INPUT(a)\nINPUT(b)\nKEYINPUT(k0)\nKEYINPUT(k1)\nOUTPUT(y)\nOUTPUT(z)\n\
             n = XOR(a, k0)\ny = BUF(n)\nm = XOR(n, k1)\nz = AND(m, b)\n",
        )
        .unwrap();
        let mut m = build_assoc_matrix(&extract_cones(&c), 2);
        assert_eq!(m.a, vec![vec![true, true], vec![false, true]]);
        let (j, unknown) = m.cone_with_min_unknown_keys().unwrap();
        assert_eq!((j, unknown), (0, vec![0]));
        m.mark_solved(0);
        let (j, unknown) = m.cone_with_min_unknown_keys().unwrap();
        assert_eq!((j, unknown), (1, vec![1]));
        m.mark_solved(1);
        assert!(m.cone_with_min_unknown_keys().is_none());
    }

    #[test]
    fn dead_keys_are_reported() {
        // k feeds a gate that reaches no output.
        let c = parse_bench(
            "INPUT(a)\nKEYINPUT(k)\nOUTPUT(y)\ny = BUF(a)\nd = XOR(a, k)\n",
        )
        .unwrap();
        let m = build_assoc_matrix(&extract_cones(&c), 1);
        assert_eq!(m.dead_keys(), vec![0]);
        assert!(m.cone_with_min_unknown_keys().is_none());
    }

    #[test]
    fn cone_membership_matches_brute_force_reachability() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..25 {
            let c = crate::synth::random_circuit(
                "r",
                crate::synth::SynthConfig {
                    inputs: 6,
                    key_inputs: 0,
                    outputs: 3,
                    gates: rng.gen_range(8..40),
                    seed: rng.gen(),
                },
            );
            let cs = extract_cones(&c);
            for cone in &cs.cones {
                for (gi, g) in c.gates().iter().enumerate() {
                    let reaches = reaches_forward(&c, g.output, cone.output);
                    assert_eq!(cone.gates.contains(&gi), reaches);
                }
            }
        }
    }

    /// Independent oracle: forward DFS over gate fanout.
    fn reaches_forward(c: &Circuit, from: NetId, to: NetId) -> bool {
        let mut stack = vec![from];
        let mut seen = vec![false; c.num_nets()];
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            if seen[n.index()] {
                continue;
            }
            seen[n.index()] = true;
            for g in c.gates() {
                if g.fanins.contains(&n) && !seen[g.output.index()] {
                    stack.push(g.output);
                }
            }
        }
        false
    }
}
