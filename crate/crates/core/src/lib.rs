//! Attack workbench for key-locked gate-level netlists.
//!
//! The crate is organized as a pipeline:
//!
//! * [`netlist`] — parse, validate and emit `.bench` combinational netlists
//!   extended with `KEYINPUT` declarations.
//! * [`locking`] — generators that lock a plain circuit with a secret key
//!   (random XOR/XNOR insertion, a fully dependent key-gate chain, and a
//!   restoration-unit comparator), together with the ground-truth key.
//! * [`sim`] — three-valued good-circuit simulation, five-valued stuck-at
//!   fault simulation, and the fault-injectable oracle that stands in for an
//!   unlocked chip.
//! * [`cone`] — output logic-cone extraction and the key/cone association
//!   matrix used to schedule the attack.
//! * [`atpg`] — constrained test pattern generation for stuck-at faults on
//!   key lines, with don't-care fill and an independent pattern verifier.
//! * [`attack`] — the fault-injection attack drivers (per-cone sensitization
//!   and the differential baseline) plus fault accounting.
//! * [`synth`] — seeded random circuit generation for benchmarks and tests.

pub mod atpg;
pub mod attack;
pub mod cone;
pub mod fixtures;
pub mod locking;
pub mod netlist;
pub mod sim;
pub mod synth;

pub use netlist::{Circuit, Gate, GateKind, NetId};
pub use sim::{Fault, FaultPolarity, Oracle, V3, V5};
