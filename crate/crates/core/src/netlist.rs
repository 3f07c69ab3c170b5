//! Gate-level combinational netlists and the `.bench` interchange format.
//!
//! The dialect is the ISCAS-85 `.bench` format extended with `KEYINPUT`
//! declarations:
//!
//! ```text
//! # circuit: demo            (optional; restores the circuit name)
//! INPUT(x0)
//! KEYINPUT(k0)
//! OUTPUT(y)
//! n1 = AND(x0, x1)
//! y  = XOR(k0, n1)
//! ```
//!
//! Gate kinds are case-insensitive. For third-party files that do not use
//! `KEYINPUT`, an `INPUT` whose name starts with `keyinput` (any case) is
//! treated as a key line. Key index `i` always denotes the `i`-th declared
//! key input.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Dense identifier of a net. Ids are assigned in declaration order:
/// primary inputs, then key inputs, then gate outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetId(pub u32);

impl NetId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Supported combinational gate kinds. `Mux2` takes the select line first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Nand,
    Or,
    Nor,
    Xor,
    Xnor,
    Not,
    Buf,
    Mux2,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Nand => "NAND",
            GateKind::Or => "OR",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Not => "NOT",
            GateKind::Buf => "BUF",
            GateKind::Mux2 => "MUX2",
        }
    }

    fn from_token(tok: &str) -> Option<GateKind> {
        match tok.to_ascii_uppercase().as_str() {
            "AND" => Some(GateKind::And),
            "NAND" => Some(GateKind::Nand),
            "OR" => Some(GateKind::Or),
            "NOR" => Some(GateKind::Nor),
            "XOR" => Some(GateKind::Xor),
            "XNOR" => Some(GateKind::Xnor),
            "NOT" | "INV" => Some(GateKind::Not),
            "BUF" | "BUFF" => Some(GateKind::Buf),
            "MUX2" | "MUX" => Some(GateKind::Mux2),
            _ => None,
        }
    }

    /// Whether `n` fanins is a legal arity for this kind.
    pub fn arity_ok(self, n: usize) -> bool {
        match self {
            GateKind::Not | GateKind::Buf => n == 1,
            GateKind::Mux2 => n == 3,
            _ => n >= 2,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One gate. `output` doubles as the gate's identity: every net has at most
/// one driver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub output: NetId,
    pub kind: GateKind,
    pub fanins: Vec<NetId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("line {line}, col {col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("net `{name}` is referenced but never defined")]
    UndeclaredNet { name: String },
    #[error("combinational cycle through net `{name}`")]
    CombinationalCycle { name: String },
    #[error("duplicate definition of net `{name}`")]
    DuplicateDefinition { name: String },
    #[error("gate `{net}`: {kind} cannot take {got} fanin(s)")]
    BadArity { net: String, kind: GateKind, got: usize },
    #[error("line {line}: unsupported construct `{what}`: only combinational gates are accepted")]
    Unsupported { line: usize, what: String },
}

/// An immutable combinational circuit. Construction validates every
/// structural invariant (acyclicity, declared fanins, input/key disjointness,
/// output existence), so a `Circuit` in hand is always well-formed.
#[derive(Debug, Clone)]
pub struct Circuit {
    name: String,
    inputs: Vec<NetId>,
    key_inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    gates: Vec<Gate>,
    net_names: Vec<String>,
    name_to_id: HashMap<String, NetId>,
    /// net index -> index into `gates` for driven nets.
    driver: Vec<Option<u32>>,
    /// Gate indices in topological order, stable by declaration order.
    topo: Vec<u32>,
    /// net -> position in `key_inputs`.
    key_pos: HashMap<NetId, usize>,
    /// net -> position in `inputs`.
    input_pos: HashMap<NetId, usize>,
}

impl Circuit {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn inputs(&self) -> &[NetId] {
        &self.inputs
    }

    pub fn key_inputs(&self) -> &[NetId] {
        &self.key_inputs
    }

    pub fn outputs(&self) -> &[NetId] {
        &self.outputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_nets(&self) -> usize {
        self.net_names.len()
    }

    pub fn key_size(&self) -> usize {
        self.key_inputs.len()
    }

    pub fn net_name(&self, id: NetId) -> &str {
        &self.net_names[id.index()]
    }

    pub fn net_id(&self, name: &str) -> Option<NetId> {
        self.name_to_id.get(name).copied()
    }

    /// Gate driving `net`, if the net is not a primary or key input.
    pub fn driver(&self, net: NetId) -> Option<&Gate> {
        self.driver[net.index()].map(|g| &self.gates[g as usize])
    }

    pub fn driver_index(&self, net: NetId) -> Option<usize> {
        self.driver[net.index()].map(|g| g as usize)
    }

    /// Position of `net` in the key-input list, if it is a key line.
    pub fn key_index(&self, net: NetId) -> Option<usize> {
        self.key_pos.get(&net).copied()
    }

    pub fn input_index(&self, net: NetId) -> Option<usize> {
        self.input_pos.get(&net).copied()
    }

    pub fn is_primary_or_key_input(&self, net: NetId) -> bool {
        self.driver[net.index()].is_none()
    }

    /// Gate indices in topological order: every gate appears after all the
    /// gates driving its fanins, and ties are broken by declaration order.
    pub fn topo_order(&self) -> &[u32] {
        &self.topo
    }

    pub fn topo_gates(&self) -> impl Iterator<Item = &Gate> {
        self.topo.iter().map(move |&g| &self.gates[g as usize])
    }
}

/// Incremental, name-based circuit construction. `build` runs full
/// validation, so generators can emit statements without tracking ids.
#[derive(Debug, Default, Clone)]
pub struct CircuitBuilder {
    name: String,
    inputs: Vec<String>,
    key_inputs: Vec<String>,
    outputs: Vec<String>,
    gates: Vec<(String, GateKind, Vec<String>)>,
}

impl CircuitBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        CircuitBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn input(&mut self, name: impl Into<String>) -> &mut Self {
        self.inputs.push(name.into());
        self
    }

    pub fn key_input(&mut self, name: impl Into<String>) -> &mut Self {
        self.key_inputs.push(name.into());
        self
    }

    pub fn output(&mut self, name: impl Into<String>) -> &mut Self {
        self.outputs.push(name.into());
        self
    }

    pub fn gate<S: Into<String>>(
        &mut self,
        output: impl Into<String>,
        kind: GateKind,
        fanins: impl IntoIterator<Item = S>,
    ) -> &mut Self {
        self.gates.push((
            output.into(),
            kind,
            fanins.into_iter().map(Into::into).collect(),
        ));
        self
    }

    pub fn has_net(&self, name: &str) -> bool {
        self.inputs.iter().any(|n| n == name)
            || self.key_inputs.iter().any(|n| n == name)
            || self.gates.iter().any(|(n, _, _)| n == name)
    }

    pub fn build(self) -> Result<Circuit, NetlistError> {
        let mut net_names: Vec<String> = Vec::new();
        let mut name_to_id: HashMap<String, NetId> = HashMap::new();
        let declare = |name: &str,
                           net_names: &mut Vec<String>,
                           name_to_id: &mut HashMap<String, NetId>|
         -> Result<NetId, NetlistError> {
            if name_to_id.contains_key(name) {
                return Err(NetlistError::DuplicateDefinition {
                    name: name.to_string(),
                });
            }
            let id = NetId(net_names.len() as u32);
            net_names.push(name.to_string());
            name_to_id.insert(name.to_string(), id);
            Ok(id)
        };

        let mut inputs = Vec::with_capacity(self.inputs.len());
        for n in &self.inputs {
            inputs.push(declare(n, &mut net_names, &mut name_to_id)?);
        }
        let mut key_inputs = Vec::with_capacity(self.key_inputs.len());
        for n in &self.key_inputs {
            key_inputs.push(declare(n, &mut net_names, &mut name_to_id)?);
        }
        let mut gate_outputs = Vec::with_capacity(self.gates.len());
        for (out, kind, fanins) in &self.gates {
            if !kind.arity_ok(fanins.len()) {
                return Err(NetlistError::BadArity {
                    net: out.clone(),
                    kind: *kind,
                    got: fanins.len(),
                });
            }
            gate_outputs.push(declare(out, &mut net_names, &mut name_to_id)?);
        }

        let lookup = |name: &str| -> Result<NetId, NetlistError> {
            name_to_id
                .get(name)
                .copied()
                .ok_or_else(|| NetlistError::UndeclaredNet {
                    name: name.to_string(),
                })
        };

        let mut gates = Vec::with_capacity(self.gates.len());
        let mut driver: Vec<Option<u32>> = vec![None; net_names.len()];
        for (gi, (out, kind, fanin_names)) in self.gates.iter().enumerate() {
            let _ = out;
            let mut fanins = Vec::with_capacity(fanin_names.len());
            for f in fanin_names {
                fanins.push(lookup(f)?);
            }
            let output = gate_outputs[gi];
            driver[output.index()] = Some(gi as u32);
            gates.push(Gate {
                output,
                kind: *kind,
                fanins,
            });
        }

        let mut outputs = Vec::with_capacity(self.outputs.len());
        for n in &self.outputs {
            outputs.push(lookup(n)?);
        }

        let topo = toposort(&gates, &driver, &net_names)?;

        let key_pos = key_inputs
            .iter()
            .enumerate()
            .map(|(i, &n)| (n, i))
            .collect();
        let input_pos = inputs.iter().enumerate().map(|(i, &n)| (n, i)).collect();

        Ok(Circuit {
            name: self.name,
            inputs,
            key_inputs,
            outputs,
            gates,
            net_names,
            name_to_id,
            driver,
            topo,
            key_pos,
            input_pos,
        })
    }
}

/// Kahn's algorithm with a min-index ready set, so the order is deterministic
/// and stable by declaration order.
fn toposort(
    gates: &[Gate],
    driver: &[Option<u32>],
    net_names: &[String],
) -> Result<Vec<u32>, NetlistError> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let mut pending: Vec<u32> = gates
        .iter()
        .map(|g| {
            g.fanins
                .iter()
                .filter(|f| driver[f.index()].is_some())
                .count() as u32
        })
        .collect();
    // gate index -> downstream gate indices
    let mut consumers: Vec<Vec<u32>> = vec![Vec::new(); gates.len()];
    for (gi, g) in gates.iter().enumerate() {
        for f in &g.fanins {
            if let Some(d) = driver[f.index()] {
                consumers[d as usize].push(gi as u32);
            }
        }
    }

    let mut ready: BinaryHeap<Reverse<u32>> = BinaryHeap::new();
    for (gi, &p) in pending.iter().enumerate() {
        if p == 0 {
            ready.push(Reverse(gi as u32));
        }
    }

    let mut order = Vec::with_capacity(gates.len());
    while let Some(Reverse(gi)) = ready.pop() {
        order.push(gi);
        for &c in &consumers[gi as usize] {
            pending[c as usize] -= 1;
            if pending[c as usize] == 0 {
                ready.push(Reverse(c));
            }
        }
    }

    if order.len() != gates.len() {
        // Deterministically blame the lowest-index gate stuck in a cycle.
        let stuck = pending
            .iter()
            .enumerate()
            .find(|(_, &p)| p > 0)
            .map(|(gi, _)| gi)
            .expect("some gate must be unplaced");
        return Err(NetlistError::CombinationalCycle {
            name: net_names[gates[stuck].output.index()].clone(),
        });
    }
    Ok(order)
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '$' || c == '[' || c == ']')
}

/// Parse the extended `.bench` dialect. See the module docs for the grammar.
pub fn parse_bench(text: &str) -> Result<Circuit, NetlistError> {
    let mut builder = CircuitBuilder::new("");
    let mut seen_keyinput_directive = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        // `# circuit: NAME` carries the circuit name through round-trips.
        if let Some(rest) = raw.trim_start().strip_prefix("# circuit:") {
            builder.name = rest.trim().to_string();
            continue;
        }
        let code = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let stmt = code.trim();
        if stmt.is_empty() {
            continue;
        }

        let col_of = |needle: &str| code.find(needle).map(|p| p + 1).unwrap_or(1);

        if let Some(eq) = stmt.find('=') {
            // net = KIND(a, b, ...)
            let out = stmt[..eq].trim();
            if !is_ident(out) {
                return Err(NetlistError::Syntax {
                    line,
                    col: col_of(out.trim()),
                    msg: format!("bad net name `{out}`"),
                });
            }
            let rhs = stmt[eq + 1..].trim();
            let open = rhs.find('(').ok_or(NetlistError::Syntax {
                line,
                col: col_of(rhs),
                msg: "expected `KIND(fanin, ...)`".into(),
            })?;
            if !rhs.ends_with(')') {
                return Err(NetlistError::Syntax {
                    line,
                    col: code.len(),
                    msg: "missing closing `)`".into(),
                });
            }
            let kind_tok = rhs[..open].trim();
            let kind = match GateKind::from_token(kind_tok) {
                Some(k) => k,
                None => {
                    let upper = kind_tok.to_ascii_uppercase();
                    if matches!(upper.as_str(), "DFF" | "DFFSR" | "LATCH" | "SDFF") {
                        return Err(NetlistError::Unsupported {
                            line,
                            what: upper,
                        });
                    }
                    if upper == "LUT" {
                        return Err(NetlistError::Unsupported { line, what: upper });
                    }
                    return Err(NetlistError::Syntax {
                        line,
                        col: col_of(kind_tok),
                        msg: format!("unknown gate kind `{kind_tok}`"),
                    });
                }
            };
            let args = &rhs[open + 1..rhs.len() - 1];
            let fanins: Vec<&str> = args.split(',').map(str::trim).collect();
            if fanins.iter().any(|f| f.is_empty()) || fanins.iter().any(|f| !is_ident(f)) {
                return Err(NetlistError::Syntax {
                    line,
                    col: col_of(args),
                    msg: "bad fanin list".into(),
                });
            }
            if !kind.arity_ok(fanins.len()) {
                return Err(NetlistError::BadArity {
                    net: out.to_string(),
                    kind,
                    got: fanins.len(),
                });
            }
            builder.gate(out, kind, fanins);
        } else {
            // DIRECTIVE(name)
            let open = stmt.find('(').ok_or(NetlistError::Syntax {
                line,
                col: 1,
                msg: format!("cannot parse `{stmt}`"),
            })?;
            if !stmt.ends_with(')') {
                return Err(NetlistError::Syntax {
                    line,
                    col: code.len(),
                    msg: "missing closing `)`".into(),
                });
            }
            let directive = stmt[..open].trim().to_ascii_uppercase();
            let arg = stmt[open + 1..stmt.len() - 1].trim();
            if !is_ident(arg) {
                return Err(NetlistError::Syntax {
                    line,
                    col: col_of(arg),
                    msg: format!("bad net name `{arg}`"),
                });
            }
            match directive.as_str() {
                "INPUT" => {
                    // Third-party convention: key lines named keyinput*.
                    if arg.to_ascii_lowercase().starts_with("keyinput") && !seen_keyinput_directive
                    {
                        builder.key_input(arg);
                    } else {
                        builder.input(arg);
                    }
                }
                "KEYINPUT" => {
                    seen_keyinput_directive = true;
                    builder.key_input(arg);
                }
                "OUTPUT" => {
                    builder.output(arg);
                }
                other => {
                    return Err(NetlistError::Syntax {
                        line,
                        col: 1,
                        msg: format!("unknown directive `{other}`"),
                    });
                }
            }
        }
    }

    builder.build()
}

/// Emit the circuit in the same `.bench` dialect; `parse_bench` on the result
/// reconstructs an identical circuit (same nets, same orderings).
pub fn write_bench(c: &Circuit) -> String {
    let mut out = String::new();
    if !c.name().is_empty() {
        out.push_str(&format!("# circuit: {}\n", c.name()));
    }
    for &n in c.inputs() {
        out.push_str(&format!("INPUT({})\n", c.net_name(n)));
    }
    for &n in c.key_inputs() {
        out.push_str(&format!("KEYINPUT({})\n", c.net_name(n)));
    }
    for &n in c.outputs() {
        out.push_str(&format!("OUTPUT({})\n", c.net_name(n)));
    }
    for g in c.gates() {
        let fanins: Vec<&str> = g.fanins.iter().map(|&f| c.net_name(f)).collect();
        out.push_str(&format!(
            "{} = {}({})\n",
            c.net_name(g.output),
            g.kind.name(),
            fanins.join(", ")
        ));
    }
    out
}
